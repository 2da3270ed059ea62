#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xbar/common.hpp"
#include "xbar/device.hpp"

namespace xbar {

enum class IrSolverMode { exact, approximate };

/// Electrical parameters of one tile.
struct CrossbarConfig {
  int rows = 0;
  int cols = 0;
  double r_wire = 0.0;      ///< ohms per unit cell of interconnect
  double v_read = 0.2;      ///< read voltage amplitude, V
  double t_int = 1e-7;      ///< column integration time, s
  double temperature = 300; ///< K
  int adc_bits = 8;
  double adc_energy_per_sample = 5e-12; ///< J
  int adc_share = 1;                    ///< columns multiplexed per ADC
  /// ADC full-scale in coulombs; 0 selects the worst-case default
  /// rows * g_max * v_read * t_int (all devices on, all inputs at v_read).
  double adc_full_scale_charge = 0.0;
  IrSolverMode ir_mode = IrSolverMode::exact;
  bool allow_transpose = true; ///< column-drive/row-sense capability

  void validate() const;
};

/// Per-operation accounting: energy in joules, latency in conversion slots and
/// integration windows. Totals decompose exactly into array + ADC terms.
struct MvmStats {
  double array_energy = 0.0;
  double adc_energy = 0.0;
  std::int64_t adc_conversions = 0;
  std::int64_t adc_saturations = 0;
  std::int64_t conversion_slots = 0;
  std::int64_t integration_windows = 0;
  std::int64_t mvm_count = 0;

  double total_energy() const { return array_energy + adc_energy; }
  MvmStats& operator+=(const MvmStats& o);
};

/// One crossbar tile: a conductance grid plus its wiring and peripherals.
/// MVM over a const tile is safe to run concurrently; programming needs
/// exclusive access.
class CrossbarState {
public:
  CrossbarState() = default;
  /// All cells start at g_min; per-device spatial gains are sampled once here.
  static CrossbarState make(const CrossbarConfig& config, const DeviceParams& device,
                            std::uint64_t seed);

  const CrossbarConfig& config() const { return config_; }
  const DeviceParams& device() const { return device_; }
  std::uint64_t init_seed() const { return init_seed_; }

  ConductanceState& at(int i, int j) { return cells_[idx(i, j)]; }
  const ConductanceState& at(int i, int j) const { return cells_[idx(i, j)]; }
  double spatial_gain(int i, int j) const { return spatial_[idx(i, j)]; }

  /// Programming pulse on one cell, routed through the device model with the
  /// cell's spatial gain.
  void pulse_cell(int i, int j, PulseDirection dir, std::uint64_t seed);
  void reset_cell(int i, int j);
  /// Directly writes a conductance (ideal transfer channel), resetting age.
  void set_cell(int i, int j, double g);
  /// Noisy read of one cell.
  double read_cell(int i, int j, std::uint64_t seed) const;

  /// Advances retention time on every cell, applying the drift law.
  void advance_age(double elapsed);

  std::int64_t total_pulses() const;

  friend void save_snapshot(const CrossbarState& state, const std::filesystem::path& path);
  friend CrossbarState load_snapshot(const std::filesystem::path& path);

private:
  std::size_t idx(int i, int j) const;

  CrossbarConfig config_;
  DeviceParams device_;
  std::vector<ConductanceState> cells_; // row-major rows x cols
  std::vector<double> spatial_;         // per-device increment gain
  std::uint64_t init_seed_ = 0;
};

/// Exact analog MVM, I_j = sum_i G_ij * V_i. No wire resistance, no noise.
std::vector<double> mvm_ideal(const CrossbarState& state, std::span<const double> v_in,
                              MvmStats* stats = nullptr);

/// IR-drop-aware MVM: solves the row/column resistive ladder (exact nodal
/// solve or first-order cumulative-resistance correction per config), applies
/// per-cell read noise and per-column Johnson charge noise.
std::vector<double> mvm_nonideal(const CrossbarState& state, std::span<const double> v_in,
                                 std::uint64_t rng_seed, MvmStats* stats = nullptr);

/// Transposed read (drive columns, sense rows): I_i = sum_j G_ij * V_j.
/// Requires config.allow_transpose; wire resistance is not modelled on this
/// path (r_wire must be 0), read noise is applied when `noisy`.
std::vector<double> mvm_transposed(const CrossbarState& state, std::span<const double> v_cols,
                                   std::uint64_t rng_seed, bool noisy,
                                   MvmStats* stats = nullptr);

/// Column charge Q_j = I_j * t_int mapped linearly onto 2^adc_bits codes over
/// the full-scale range; saturation is silent but counted in stats.
std::vector<int> adc_quantize(std::span<const double> i_out, const CrossbarState& state,
                              MvmStats* stats = nullptr);

/// ADC precision needed for exact MVM results: log2(M) + I + W - 2
/// (ceil(log2 M) for non-power-of-two M), never negative.
int required_adc_bits(int rows, int input_bits, int weight_bits);

/// Shared Johnson-noise voltage bound: V = snr * sqrt(N * R_dev * k_B * T / t_int).
double voltage_bound(double n_rows, double r_dev, double temperature, double t_int,
                     double snr_target);

/// Minimum read voltage for this tile at the given weight-range to read-noise
/// ratio (default target 10).
double min_read_voltage(const CrossbarState& state, double snr_target = 10.0);

/// Per-column Johnson charge-noise sigma for a full column of rows devices.
double johnson_column_charge_sigma(const CrossbarConfig& config, double g_max);

// -- snapshot / debug formats ------------------------------------------------

/// Text header (dimensions, device preset, seed) + flat little-endian float64
/// grids for conductance, age and pulse counts.
void save_snapshot(const CrossbarState& state, const std::filesystem::path& path);
CrossbarState load_snapshot(const std::filesystem::path& path);

void export_column_currents_csv(std::span<const double> currents,
                                const std::filesystem::path& path);

} // namespace xbar
