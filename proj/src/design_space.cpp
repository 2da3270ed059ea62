#include "xbar/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xbar/crossbar.hpp"

namespace xbar {

void DesignPoint::validate() const {
  if (weights_total < 0.0 || mac_total < 0.0 || share_max < 0.0)
    throw ConfigError("counts must be >= 0");
  if (t_int <= 0.0) throw ConfigError("t_int must be > 0");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (r_wire < 0.0) throw ConfigError("r_wire must be >= 0");
  if (array_n < 1.0) throw ConfigError("array_n must be >= 1");
  if (tile_num < 0.0) throw ConfigError("tile_num must be >= 0");
  if (pitch <= 0.0) throw ConfigError("pitch must be > 0");
  if (!(array_efficiency > 0.0) || array_efficiency > 1.0)
    throw ConfigError("array_efficiency must be in (0, 1]");
  if (e_adc < 0.0) throw ConfigError("e_adc must be >= 0");
  if (!(snr_target > 0.0)) throw ConfigError("snr_target must be > 0");
  if (!(ir_budget > 0.0)) throw ConfigError("ir_budget must be > 0");
}

double DesignPoint::effective_r_dev() const {
  return r_dev > 0.0 ? r_dev : min_device_resistance(*this);
}

double ops_per_second_bound(const DesignPoint& point) {
  point.validate();
  const double weights_bound = 2.0 * point.weights_total / point.t_int;
  if (point.mac_total > 0.0 && point.share_max > 0.0) {
    const double mac_bound = 2.0 * point.mac_total / (point.t_int * point.share_max);
    return std::min(mac_bound, weights_bound);
  }
  return weights_bound;
}

double min_device_resistance(const DesignPoint& point) {
  point.validate();
  return point.array_n * point.array_n * point.r_wire / point.ir_budget;
}

double min_voltage(const DesignPoint& point) {
  point.validate();
  return voltage_bound(point.array_n, point.effective_r_dev(), point.temperature, point.t_int,
                       point.snr_target);
}

AreaBound area_lower_bound(const DesignPoint& point) {
  point.validate();
  const double cell_area = 4.0 * point.pitch * point.pitch;
  const double free = cell_area * point.array_n * point.array_n * point.tile_num;
  return {free / point.array_efficiency, free};
}

double energy_efficiency_bound(const DesignPoint& point) {
  point.validate();
  const double v = point.v_read > 0.0 ? point.v_read : min_voltage(point);
  const double r_aver = point.r_aver > 0.0 ? point.r_aver : 2.0 * point.effective_r_dev();
  const double n = point.array_n;
  const double denom = (v * v / r_aver) * point.t_int * n * n + point.e_adc * n;
  if (denom <= 0.0) throw ConfigError("energy bound denominator must be > 0");
  return 2.0 * n * n / denom;
}

bool set_design_field(DesignPoint& p, const std::string& key, double value) {
  if (key == "weights_total") p.weights_total = value;
  else if (key == "mac_total") p.mac_total = value;
  else if (key == "share_max") p.share_max = value;
  else if (key == "t_int") p.t_int = value;
  else if (key == "temperature") p.temperature = value;
  else if (key == "v_read") p.v_read = value;
  else if (key == "r_wire") p.r_wire = value;
  else if (key == "r_dev") p.r_dev = value;
  else if (key == "r_aver") p.r_aver = value;
  else if (key == "array_n") p.array_n = value;
  else if (key == "tile_num") p.tile_num = value;
  else if (key == "pitch") p.pitch = value;
  else if (key == "array_efficiency") p.array_efficiency = value;
  else if (key == "e_adc") p.e_adc = value;
  else if (key == "snr_target") p.snr_target = value;
  else if (key == "ir_budget") p.ir_budget = value;
  else return false;
  return true;
}

SweepGrid SweepGrid::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file '" + path.string() + "'");
  SweepGrid grid;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string eq;
    ls >> eq;
    if (eq != "=")
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = values'");
    std::vector<double> values;
    std::string token;
    while (std::getline(ls, token, ',')) {
      std::istringstream ts(token);
      double v;
      if (!(ts >> v))
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                         token + "'");
      values.push_back(v);
    }
    if (values.empty())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": no values for '" + key +
                       "'");
    DesignPoint probe;
    if (!set_design_field(probe, key, values.front()))
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": unknown parameter '" +
                       key + "'");
    grid.axes[key] = values;
  }
  return grid;
}

std::size_t SweepGrid::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& [k, v] : axes) n *= v.size();
  return n;
}

std::vector<SweepRow> sweep(const SweepGrid& grid, const DesignPoint& base) {
  if (grid.size() == 0) throw ConfigError("sweep grid is empty");
  std::vector<std::string> keys;
  keys.reserve(grid.axes.size());
  for (const auto& [k, v] : grid.axes) keys.push_back(k);

  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  std::vector<std::size_t> index(keys.size(), 0);
  for (;;) {
    DesignPoint p = base;
    for (std::size_t a = 0; a < keys.size(); ++a)
      set_design_field(p, keys[a], grid.axes.at(keys[a])[index[a]]);
    SweepRow row;
    row.point = p;
    row.ops_bound = ops_per_second_bound(p);
    row.min_r_dev = min_device_resistance(p);
    row.min_v = min_voltage(p);
    const AreaBound area = area_lower_bound(p);
    row.area_m2 = area.with_efficiency;
    row.area_free_m2 = area.efficiency_free;
    row.op_per_joule = energy_efficiency_bound(p);
    rows.push_back(row);

    // odometer increment, last axis fastest
    std::size_t a = keys.size();
    while (a > 0) {
      --a;
      if (++index[a] < grid.axes.at(keys[a]).size()) break;
      index[a] = 0;
      if (a == 0) return rows;
    }
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "array_n,tile_num,t_int_s,r_wire_ohm,weights_total,e_adc_j,pitch_m,array_efficiency,"
         "snr_target,temperature_k,ops_bound_per_s,min_r_dev_ohm,min_v_volt,area_m2,"
         "area_no_eff_m2,op_per_joule\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.point.array_n, r.point.tile_num, r.point.t_int, r.point.r_wire,
                  r.point.weights_total, r.point.e_adc, r.point.pitch,
                  r.point.array_efficiency, r.point.snr_target, r.point.temperature,
                  r.ops_bound, r.min_r_dev, r.min_v, r.area_m2, r.area_free_m2, r.op_per_joule);
    out << buf;
  }
}

} // namespace xbar
