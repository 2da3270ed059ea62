#include "xbar/crossbar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xbar/ir_solver.hpp"
#include "xbar/rng.hpp"

namespace xbar {

void CrossbarConfig::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("crossbar requires rows, cols >= 1");
  if (r_wire < 0.0) throw ConfigError("r_wire must be >= 0");
  if (t_int <= 0.0) throw ConfigError("t_int must be > 0");
  if (v_read <= 0.0) throw ConfigError("v_read must be > 0");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (adc_bits < 1) throw ConfigError("adc_bits must be >= 1");
  if (adc_share < 1 || cols % adc_share != 0)
    throw ConfigError("adc_share must be >= 1 and divide cols");
}

MvmStats& MvmStats::operator+=(const MvmStats& o) {
  array_energy += o.array_energy;
  adc_energy += o.adc_energy;
  adc_conversions += o.adc_conversions;
  adc_saturations += o.adc_saturations;
  conversion_slots += o.conversion_slots;
  integration_windows += o.integration_windows;
  mvm_count += o.mvm_count;
  return *this;
}

std::size_t CrossbarState::idx(int i, int j) const {
  if (i < 0 || i >= config_.rows || j < 0 || j >= config_.cols)
    throw DimensionError("cell index out of range");
  return static_cast<std::size_t>(i) * config_.cols + j;
}

CrossbarState CrossbarState::make(const CrossbarConfig& config, const DeviceParams& device,
                                  std::uint64_t seed) {
  config.validate();
  device.validate();
  CrossbarState s;
  s.config_ = config;
  s.device_ = device;
  s.init_seed_ = seed;
  const std::size_t n = static_cast<std::size_t>(config.rows) * config.cols;
  s.cells_.assign(n, ConductanceState{device.g_min, 0, 0.0});
  s.spatial_.assign(n, 1.0);
  if (device.spatial_rel_sigma > 0.0) {
    Rng rng(substream(seed, "device-spatial"));
    for (auto& m : s.spatial_) m = rng.lognormal_unit_mean(device.spatial_rel_sigma);
  }
  return s;
}

void CrossbarState::pulse_cell(int i, int j, PulseDirection dir, std::uint64_t seed) {
  auto& c = cells_[idx(i, j)];
  c = apply_pulse(c, device_, dir, seed, spatial_[idx(i, j)]);
}

void CrossbarState::reset_cell(int i, int j) {
  auto& c = cells_[idx(i, j)];
  c = reset_device(c, device_);
}

void CrossbarState::set_cell(int i, int j, double g) {
  auto& c = cells_[idx(i, j)];
  c.g = std::clamp(g, device_.g_min, device_.g_max);
  c.age = 0.0;
}

double CrossbarState::read_cell(int i, int j, std::uint64_t seed) const {
  return read_conductance(cells_[idx(i, j)], device_, seed);
}

void CrossbarState::advance_age(double elapsed) {
  for (auto& c : cells_) c = apply_drift(c, device_, elapsed);
}

std::int64_t CrossbarState::total_pulses() const {
  std::int64_t n = 0;
  for (const auto& c : cells_) n += c.pulses_seen;
  return n;
}

namespace {

void check_input(const CrossbarState& state, std::span<const double> v, int expected,
                 const char* what) {
  if (static_cast<int>(v.size()) != expected)
    throw DimensionError(std::string(what) + ": input vector length " +
                         std::to_string(v.size()) + " does not match " +
                         std::to_string(expected));
  const double limit = state.config().v_read * (1.0 + 1e-12);
  for (double x : v)
    if (!(std::abs(x) <= limit))
      throw ConfigError(std::string(what) + ": |input voltage| exceeds v_read");
}

void account_array_energy(const CrossbarState& state, std::span<const double> v_in,
                          MvmStats* stats) {
  if (!stats) return;
  const auto& cfg = state.config();
  double e = 0.0;
  for (int i = 0; i < cfg.rows; ++i) {
    if (v_in[i] == 0.0) continue;
    double grow = 0.0;
    for (int j = 0; j < cfg.cols; ++j) grow += state.at(i, j).g;
    e += v_in[i] * v_in[i] * grow;
  }
  stats->array_energy += e * cfg.t_int;
  stats->integration_windows += 1;
  stats->mvm_count += 1;
}

} // namespace

std::vector<double> mvm_ideal(const CrossbarState& state, std::span<const double> v_in,
                              MvmStats* stats) {
  const auto& cfg = state.config();
  check_input(state, v_in, cfg.rows, "mvm_ideal");
  std::vector<double> out(cfg.cols, 0.0);
  for (int i = 0; i < cfg.rows; ++i) {
    const double v = v_in[i];
    if (v == 0.0) continue;
    for (int j = 0; j < cfg.cols; ++j) out[j] += state.at(i, j).g * v;
  }
  account_array_energy(state, v_in, stats);
  return out;
}

double johnson_column_charge_sigma(const CrossbarConfig& config, double g_max) {
  return std::sqrt(config.rows * kBoltzmann * config.temperature * config.t_int * g_max);
}

std::vector<double> mvm_nonideal(const CrossbarState& state, std::span<const double> v_in,
                                 std::uint64_t rng_seed, MvmStats* stats) {
  const auto& cfg = state.config();
  check_input(state, v_in, cfg.rows, "mvm_nonideal");

  // Temporal read noise on every cell conductance.
  const std::size_t n = static_cast<std::size_t>(cfg.rows) * cfg.cols;
  std::vector<double> g(n);
  if (state.device().read_noise_rel_sigma > 0.0) {
    Rng rng(substream(rng_seed, "read-noise"));
    for (int i = 0; i < cfg.rows; ++i)
      for (int j = 0; j < cfg.cols; ++j)
        g[i * cfg.cols + j] = std::clamp(
            state.at(i, j).g * (1.0 + state.device().read_noise_rel_sigma * rng.gaussian()),
            state.device().g_min, state.device().g_max);
  } else {
    for (int i = 0; i < cfg.rows; ++i)
      for (int j = 0; j < cfg.cols; ++j) g[i * cfg.cols + j] = state.at(i, j).g;
  }

  std::vector<double> out = cfg.ir_mode == IrSolverMode::exact
                                ? solve_ir_exact(g, cfg.rows, cfg.cols, v_in, cfg.r_wire)
                                : solve_ir_approx(g, cfg.rows, cfg.cols, v_in, cfg.r_wire);

  // Johnson charge noise, one quadrature sum per column (sigma per device
  // sqrt(kB*T*t_int/R_dev), which makes the full-column SNR reproduce the
  // read-noise bound).
  const double sigma_q = johnson_column_charge_sigma(cfg, state.device().g_max);
  if (sigma_q > 0.0) {
    Rng rng(substream(rng_seed, "johnson"));
    const double sigma_i = sigma_q / cfg.t_int;
    for (auto& x : out) x += sigma_i * rng.gaussian();
  }
  account_array_energy(state, v_in, stats);
  return out;
}

std::vector<double> mvm_transposed(const CrossbarState& state, std::span<const double> v_cols,
                                   std::uint64_t rng_seed, bool noisy, MvmStats* stats) {
  const auto& cfg = state.config();
  if (!cfg.allow_transpose)
    throw UnsupportedError("this tile is not configured for column-drive/row-sense reads");
  if (cfg.r_wire != 0.0)
    throw UnsupportedError("transposed reads do not model wire resistance; r_wire must be 0");
  check_input(state, v_cols, cfg.cols, "mvm_transposed");

  std::vector<double> out(cfg.rows, 0.0);
  if (noisy && state.device().read_noise_rel_sigma > 0.0) {
    Rng rng(substream(rng_seed, "read-noise-t"));
    for (int i = 0; i < cfg.rows; ++i)
      for (int j = 0; j < cfg.cols; ++j) {
        const double gij = std::clamp(
            state.at(i, j).g * (1.0 + state.device().read_noise_rel_sigma * rng.gaussian()),
            state.device().g_min, state.device().g_max);
        out[i] += gij * v_cols[j];
      }
  } else {
    for (int i = 0; i < cfg.rows; ++i)
      for (int j = 0; j < cfg.cols; ++j) out[i] += state.at(i, j).g * v_cols[j];
  }
  if (noisy) {
    CrossbarConfig rowcfg = cfg;
    rowcfg.rows = cfg.cols; // a sensed row integrates cols devices
    const double sigma_q = johnson_column_charge_sigma(rowcfg, state.device().g_max);
    if (sigma_q > 0.0) {
      Rng rng(substream(rng_seed, "johnson-t"));
      const double sigma_i = sigma_q / cfg.t_int;
      for (auto& x : out) x += sigma_i * rng.gaussian();
    }
  }
  if (stats) {
    double e = 0.0;
    for (int j = 0; j < cfg.cols; ++j) {
      if (v_cols[j] == 0.0) continue;
      double gcol = 0.0;
      for (int i = 0; i < cfg.rows; ++i) gcol += state.at(i, j).g;
      e += v_cols[j] * v_cols[j] * gcol;
    }
    stats->array_energy += e * cfg.t_int;
    stats->integration_windows += 1;
    stats->mvm_count += 1;
  }
  return out;
}

std::vector<int> adc_quantize(std::span<const double> i_out, const CrossbarState& state,
                              MvmStats* stats) {
  const auto& cfg = state.config();
  const double full_scale =
      cfg.adc_full_scale_charge > 0.0
          ? cfg.adc_full_scale_charge
          : cfg.rows * state.device().g_max * cfg.v_read * cfg.t_int;
  const std::int64_t levels = (std::int64_t{1} << cfg.adc_bits) - 1;

  std::vector<int> codes(i_out.size());
  std::int64_t saturated = 0;
  for (std::size_t j = 0; j < i_out.size(); ++j) {
    const double q = i_out[j] * cfg.t_int;
    std::int64_t code = std::llround(q / full_scale * static_cast<double>(levels));
    if (code < 0) {
      code = 0;
      ++saturated;
    } else if (code > levels) {
      code = levels;
      ++saturated;
    }
    codes[j] = static_cast<int>(code);
  }
  if (stats) {
    stats->adc_conversions += static_cast<std::int64_t>(i_out.size());
    stats->adc_energy += static_cast<double>(i_out.size()) * cfg.adc_energy_per_sample;
    stats->adc_saturations += saturated;
    stats->conversion_slots += cfg.adc_share;
  }
  return codes;
}

int required_adc_bits(int rows, int input_bits, int weight_bits) {
  if (rows < 1 || input_bits < 1 || weight_bits < 1)
    throw ConfigError("required_adc_bits needs rows, I, W >= 1");
  int log2m = 0;
  while ((1 << log2m) < rows) ++log2m; // ceil(log2 rows)
  return std::max(log2m + input_bits + weight_bits - 2, 0);
}

double voltage_bound(double n_rows, double r_dev, double temperature, double t_int,
                     double snr_target) {
  if (snr_target <= 0.0) throw ConfigError("snr_target must be > 0");
  if (n_rows <= 0.0 || r_dev <= 0.0 || t_int <= 0.0 || temperature < 0.0)
    throw ConfigError("voltage_bound needs positive N, R_dev, t_int");
  return snr_target * std::sqrt(n_rows * r_dev * kBoltzmann * temperature / t_int);
}

double min_read_voltage(const CrossbarState& state, double snr_target) {
  const auto& cfg = state.config();
  return voltage_bound(cfg.rows, 1.0 / state.device().g_max, cfg.temperature, cfg.t_int,
                       snr_target);
}

// -- snapshot ----------------------------------------------------------------

namespace {

void write_grid(std::ofstream& out, const std::vector<double>& grid) {
  out.write(reinterpret_cast<const char*>(grid.data()),
            static_cast<std::streamsize>(grid.size() * sizeof(double)));
}

std::vector<double> read_grid(std::ifstream& in, std::size_t n, const std::string& path) {
  std::vector<double> grid(n);
  in.read(reinterpret_cast<char*>(grid.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ParseError(path + ": truncated snapshot payload");
  return grid;
}

} // namespace

void save_snapshot(const CrossbarState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimError("cannot write snapshot '" + path.string() + "'");
  const auto& cfg = state.config_;
  out << "xbar-snapshot 1\n";
  out << "rows " << cfg.rows << "\n";
  out << "cols " << cfg.cols << "\n";
  out << "device " << state.device_.name << "\n";
  out << "seed " << state.init_seed_ << "\n";
  out << "grids g age pulses\n";
  out << "end-header\n";
  const std::size_t n = state.cells_.size();
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = state.cells_[k].g;
  write_grid(out, grid);
  for (std::size_t k = 0; k < n; ++k) grid[k] = state.cells_[k].age;
  write_grid(out, grid);
  for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(state.cells_[k].pulses_seen);
  write_grid(out, grid);
}

CrossbarState load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot '" + path.string() + "'");
  std::string line, word;
  int rows = 0, cols = 0;
  std::string device_name;
  std::uint64_t seed = 0;
  if (!std::getline(in, line) || line != "xbar-snapshot 1")
    throw ParseError(path.string() + ":1: not a xbar snapshot");
  while (std::getline(in, line) && line != "end-header") {
    std::istringstream ls(line);
    ls >> word;
    if (word == "rows") ls >> rows;
    else if (word == "cols") ls >> cols;
    else if (word == "device") ls >> device_name;
    else if (word == "seed") ls >> seed;
    else if (word == "grids") continue;
    else throw ParseError(path.string() + ": unknown header field '" + word + "'");
  }
  if (rows < 1 || cols < 1) throw ParseError(path.string() + ": bad dimensions in header");

  CrossbarConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  CrossbarState state = CrossbarState::make(cfg, device_preset(device_name), seed);
  const std::size_t n = state.cells_.size();
  const auto g = read_grid(in, n, path.string());
  const auto age = read_grid(in, n, path.string());
  const auto pulses = read_grid(in, n, path.string());
  for (std::size_t k = 0; k < n; ++k) {
    state.cells_[k].g = g[k];
    state.cells_[k].age = age[k];
    state.cells_[k].pulses_seen = static_cast<std::int64_t>(pulses[k]);
  }
  return state;
}

void export_column_currents_csv(std::span<const double> currents,
                                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write '" + path.string() + "'");
  out << "column,current_a\n";
  char buf[64];
  for (std::size_t j = 0; j < currents.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", j, currents[j]);
    out << buf;
  }
}

} // namespace xbar
