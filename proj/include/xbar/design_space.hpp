#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "xbar/common.hpp"

namespace xbar {

/// One operating point of the co-design space. Fields set to 0 where marked
/// "derived" fall back to the bound computed from the other parameters.
struct DesignPoint {
  double weights_total = 0.0;
  double mac_total = 0.0;  ///< 0 = unknown, speed falls back to the weights bound
  double share_max = 0.0;  ///< max weight-reuse factor; 0 = unknown
  double t_int = 1e-7;     ///< s
  double temperature = 300.0;
  double v_read = 0.0;     ///< V; 0 = derive from the voltage bound
  double r_wire = 0.1;     ///< ohm per cell
  double r_dev = 0.0;      ///< ohm; 0 = derive from the resistance bound
  double r_aver = 0.0;     ///< ohm; 0 = 2 * r_dev (mid-conductance differential array)
  double array_n = 2048.0; ///< square tile dimension N
  double tile_num = 128.0;
  double pitch = 200e-9;   ///< m
  double array_efficiency = 1.0; ///< in (0, 1]
  double e_adc = 5e-12;    ///< J per ADC sample
  double snr_target = 10.0;
  double ir_budget = 0.1;  ///< allowed N^2 * r_wire / R_dev

  void validate() const;
  /// r_dev if given, otherwise the IR-drop bound.
  double effective_r_dev() const;
};

/// Op/s <= min(2*MAC_total/(t_int*share_max), 2*weights_total/t_int);
/// the second bound alone when MAC_total or share_max is unknown.
double ops_per_second_bound(const DesignPoint& point);

/// R_dev >= N^2 * r_wire / ir_budget.
double min_device_resistance(const DesignPoint& point);

/// V >= snr_target * sqrt(N * R_dev * k_B * T / t_int). Shares the formula of
/// crossbar min_read_voltage (single source of truth in voltage_bound).
double min_voltage(const DesignPoint& point);

struct AreaBound {
  double with_efficiency = 0.0;  ///< 4 p^2 N^2 Tile_num / Array_efficiency, m^2
  double efficiency_free = 0.0;  ///< 4 p^2 N^2 Tile_num, m^2
};
AreaBound area_lower_bound(const DesignPoint& point);

/// Op/J <= 2 N^2 / ((V^2 / R_aver) * t_int * N^2 + E_ADC * N).
double energy_efficiency_bound(const DesignPoint& point);

/// Cartesian grid over named DesignPoint fields.
struct SweepGrid {
  std::map<std::string, std::vector<double>> axes;

  static SweepGrid load(const std::filesystem::path& path);
  std::size_t size() const;
};

struct SweepRow {
  DesignPoint point;
  double ops_bound = 0.0;
  double min_r_dev = 0.0;
  double min_v = 0.0;
  double area_m2 = 0.0;
  double area_free_m2 = 0.0;
  double op_per_joule = 0.0;
};

/// Evaluates every grid point against the base point. Throws ConfigError on
/// an empty grid.
std::vector<SweepRow> sweep(const SweepGrid& grid, const DesignPoint& base = {});

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Known DesignPoint field names accepted by grids and configs.
bool set_design_field(DesignPoint& point, const std::string& key, double value);

} // namespace xbar
