#include "xbar/device.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xbar/rng.hpp"

namespace xbar {

namespace {

double clamp_g(double g, const DeviceParams& p) { return std::clamp(g, p.g_min, p.g_max); }

// Internal coordinate for the nonlinear-symmetric response: the device state
// moves linearly in u in [0, 1] and the conductance is read out through a
// smoothstep, so the |dG| vs G curves of the up and down branches coincide and
// an up/down pulse pair composes to the identity exactly.
double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

double inverse_smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return 0.5 - std::sin(std::asin(1.0 - 2.0 * x) / 3.0);
}

double drift_time_factor(const DeviceParams& p, double t_old, double t_new) {
  switch (p.drift_kind) {
  case DriftKind::none:
    return 1.0;
  case DriftKind::power_law: {
    // Resistance follows (t/t0)^nu past the reference time, flat before it.
    const double t0 = kDriftReferenceTime;
    const double num = std::pow(std::max(t_new, t0) / t0, -p.drift_nu);
    const double den = std::pow(std::max(t_old, t0) / t0, -p.drift_nu);
    return num / den;
  }
  case DriftKind::linear_rate: {
    const double den = 1.0 - p.drift_rate * t_old;
    const double num = 1.0 - p.drift_rate * t_new;
    if (den <= 0.0) return 1.0; // already fully drifted, stays clamped
    return std::max(num, 0.0) / den;
  }
  }
  return 1.0;
}

} // namespace

void DeviceParams::validate() const {
  auto fail = [&](const std::string& what) {
    throw ConfigError("device '" + name + "': " + what);
  };
  if (!(g_min >= 0.0) || !(g_min < g_max)) fail("requires 0 <= g_min < g_max");
  if (bits_per_cell < 0) fail("bits_per_cell must be >= 0");
  if (dg_rel_sigma < 0.0 || spatial_rel_sigma < 0.0 || read_noise_rel_sigma < 0.0)
    fail("noise sigmas must be >= 0");
  if (drift_nu < 0.0) fail("drift_nu must be >= 0");
  if (endurance < 1.0) fail("endurance must be >= 1");
  switch (response_kind) {
  case ResponseKind::linear_symmetric:
  case ResponseKind::nonlinear_symmetric:
  case ResponseKind::one_sided:
    if (dg_mean <= 0.0) fail("dg_mean must be > 0 for this response kind");
    break;
  case ResponseKind::asymmetric_soft_bounds:
    if (alpha_up <= 0.0 || alpha_down <= 0.0)
      fail("asymmetric_soft_bounds requires alpha_up, alpha_down > 0");
    break;
  }
  if (drift_kind == DriftKind::power_law && drift_nu == 0.0) fail("power_law drift needs nu > 0");
  if (drift_kind == DriftKind::linear_rate && drift_rate <= 0.0)
    fail("linear_rate drift needs drift_rate > 0");
}

ConductanceState apply_pulse(const ConductanceState& state, const DeviceParams& params,
                             PulseDirection direction, std::uint64_t rng_seed, double gain) {
  if (params.enforce_endurance && state.pulses_seen >= static_cast<std::int64_t>(params.endurance))
    throw DeviceWornError("device '" + params.name + "' endurance exhausted after " +
                          std::to_string(state.pulses_seen) + " pulses");

  Rng rng(rng_seed);
  const double noise = rng.lognormal_unit_mean(params.dg_rel_sigma);
  const double scale = gain * noise;
  const bool up = direction == PulseDirection::up;

  ConductanceState out = state;
  switch (params.response_kind) {
  case ResponseKind::linear_symmetric: {
    const double dg = params.dg_mean * scale;
    out.g = state.g + (up ? dg : -dg);
    break;
  }
  case ResponseKind::nonlinear_symmetric: {
    const double w = params.window();
    const double du = params.dg_mean / w * scale;
    const double u = inverse_smoothstep((state.g - params.g_min) / w);
    const double u2 = std::clamp(up ? u + du : u - du, 0.0, 1.0);
    out.g = params.g_min + w * smoothstep(u2);
    break;
  }
  case ResponseKind::asymmetric_soft_bounds: {
    out.g = up ? state.g + params.alpha_up * (params.g_max - state.g) * scale
               : state.g - params.alpha_down * (state.g - params.g_min) * scale;
    break;
  }
  case ResponseKind::one_sided: {
    if (!up)
      throw UnsupportedError("one-sided device '" + params.name +
                             "' cannot be depressed incrementally; use reset_device");
    out.g = state.g + params.dg_mean * scale;
    break;
  }
  }
  out.g = clamp_g(out.g, params);
  out.pulses_seen = state.pulses_seen + 1;
  out.age = 0.0;
  return out;
}

ConductanceState reset_device(const ConductanceState& state, const DeviceParams& params) {
  if (params.enforce_endurance && state.pulses_seen >= static_cast<std::int64_t>(params.endurance))
    throw DeviceWornError("device '" + params.name + "' endurance exhausted");
  ConductanceState out = state;
  out.g = params.g_min;
  out.pulses_seen = state.pulses_seen + 1;
  out.age = 0.0;
  return out;
}

SymmetryPoint symmetry_point(const DeviceParams& params) {
  switch (params.response_kind) {
  case ResponseKind::linear_symmetric:
  case ResponseKind::nonlinear_symmetric:
    return {SymmetryPoint::Kind::everywhere, 0.0};
  case ResponseKind::asymmetric_soft_bounds: {
    // alpha_up*(g_max - g) = alpha_down*(g - g_min)
    const double g = (params.alpha_up * params.g_max + params.alpha_down * params.g_min) /
                     (params.alpha_up + params.alpha_down);
    return {SymmetryPoint::Kind::at_point, g};
  }
  case ResponseKind::one_sided:
    return {SymmetryPoint::Kind::none, 0.0};
  }
  return {SymmetryPoint::Kind::none, 0.0};
}

std::int64_t programming_steps(const DeviceParams& params) {
  const double w = params.window();
  if (w <= 0.0) return 0;
  double step = 0.0;
  switch (params.response_kind) {
  case ResponseKind::linear_symmetric:
  case ResponseKind::nonlinear_symmetric:
    // The nonlinear-symmetric mean step across a full sweep equals dg_mean.
    if (params.dg_mean <= 0.0) throw ConfigError("programming_steps requires dg_mean > 0");
    step = params.dg_mean;
    break;
  case ResponseKind::asymmetric_soft_bounds: {
    if (params.alpha_up <= 0.0 || params.alpha_down <= 0.0)
      throw ConfigError("programming_steps requires positive alphas");
    const SymmetryPoint sym = symmetry_point(params);
    step = params.alpha_up * (params.g_max - sym.g); // == alpha_down*(g_sym - g_min)
    break;
  }
  case ResponseKind::one_sided:
    throw UnsupportedError("one-sided device '" + params.name +
                           "' has no symmetric step count; unsupported for training");
  }
  return std::llround(2.0 * w / step);
}

ConductanceState apply_drift(const ConductanceState& state, const DeviceParams& params,
                             double elapsed) {
  if (elapsed < 0.0) throw ConfigError("apply_drift requires elapsed >= 0");
  ConductanceState out = state;
  out.age = state.age + elapsed;
  out.g = clamp_g(state.g * drift_time_factor(params, state.age, out.age), params);
  return out;
}

double read_conductance(const ConductanceState& state, const DeviceParams& params,
                        std::uint64_t rng_seed) {
  if (params.read_noise_rel_sigma <= 0.0) return state.g;
  Rng rng(rng_seed);
  return clamp_g(state.g * (1.0 + params.read_noise_rel_sigma * rng.gaussian()), params);
}

namespace {

constexpr double kSecondsPerMonth = 30.0 * 24.0 * 3600.0;

DeviceParams make_ideal() {
  DeviceParams p;
  p.name = "ideal";
  p.g_min = 0.0;
  p.g_max = 5e-6; // 200 kOhm on-resistance, the IR-drop design target
  p.bits_per_cell = 0;
  p.response_kind = ResponseKind::linear_symmetric;
  p.dg_mean = 1e-8; // 1000 programming steps across the window
  p.write_energy = 0.0;
  p.write_latency = 1e-8;
  p.endurance = 1e18;
  return p;
}

DeviceParams make_pcm() {
  DeviceParams p;
  p.name = "pcm";
  p.g_min = 5e-9;
  p.g_max = 5e-5;
  p.bits_per_cell = 4;
  p.response_kind = ResponseKind::one_sided; // gradual SET, abrupt melt RESET
  p.dg_mean = 6.25e-7;
  p.dg_rel_sigma = 0.10;
  p.spatial_rel_sigma = 0.05;
  p.read_noise_rel_sigma = 0.01;
  p.drift_kind = DriftKind::power_law;
  p.drift_nu = 0.05;
  p.write_energy = 5e-12;  // SET pulse; RESET runs ~30 pJ
  p.write_latency = 1e-7;
  p.endurance = 1e7;
  p.metadata["on_off_nominal"] = "1e4";
  p.metadata["on_off_range"] = "1e3..1e5";
  p.metadata["write_energy_range"] = "set<10pJ reset<100pJ";
  p.metadata["endurance_range"] = "1e6..1e9";
  p.metadata["write_latency_range"] = "10ns..100ns";
  return p;
}

DeviceParams make_rram() {
  DeviceParams p;
  p.name = "rram";
  p.g_min = 2e-6;
  p.g_max = 2e-5;
  p.bits_per_cell = 2;
  p.response_kind = ResponseKind::asymmetric_soft_bounds;
  p.alpha_up = 0.05;
  p.alpha_down = 0.05;
  p.dg_mean = 4.5e-7; // step at the symmetry point
  p.dg_rel_sigma = 0.20;
  p.spatial_rel_sigma = 0.03;
  p.read_noise_rel_sigma = 0.01;
  p.drift_kind = DriftKind::linear_rate;
  p.drift_rate = 0.007 / kSecondsPerMonth; // 0.7% per month
  p.write_energy = 1e-12;
  p.write_latency = 3e-8;
  p.endurance = 1e6;
  p.metadata["on_off_nominal"] = "10";
  p.metadata["conductance_window_source"] = "2uS..20uS closed-loop transfer window";
  p.metadata["write_energy_range"] = "100fJ..10pJ";
  p.metadata["endurance_range"] = "1e5..1e8";
  p.metadata["drift_month"] = "30 days";
  return p;
}

DeviceParams make_ecram() {
  DeviceParams p;
  p.name = "ecram";
  p.g_min = 1e-6;
  p.g_max = 3e-4;
  p.bits_per_cell = 0; // continuous channel conductance
  p.response_kind = ResponseKind::asymmetric_soft_bounds;
  p.alpha_up = 0.004;
  p.alpha_down = 0.005;
  p.dg_mean = 6.64e-7;
  p.dg_rel_sigma = 0.05;
  p.spatial_rel_sigma = 0.02;
  p.read_noise_rel_sigma = 0.005;
  p.write_energy = 1e-15;
  p.write_latency = 1e-6;
  p.endurance = 1e5;
  p.metadata["on_off_nominal"] = "300";
  p.metadata["on_off_range"] = "1e2..1e3";
  p.metadata["write_latency_range"] = "5ns..1s";
  p.metadata["endurance_range"] = "40..1e5";
  return p;
}

DeviceParams make_mram() {
  DeviceParams p;
  p.name = "mram";
  p.g_min = 3.8e-5; // 26 kOhm anti-parallel
  p.g_max = 7.7e-5; // 13 kOhm parallel
  p.bits_per_cell = 1;
  p.response_kind = ResponseKind::one_sided; // bistable: one pulse saturates
  p.dg_mean = 3.9e-5;
  p.spatial_rel_sigma = 0.01;
  p.read_noise_rel_sigma = 0.005;
  p.write_energy = 1e-13;
  p.write_latency = 1e-8;
  p.endurance = 1e15;
  p.metadata["on_off_nominal"] = "2.03";
  p.metadata["on_off_range"] = "<10";
  p.metadata["resistance_range"] = "13kOhm..26kOhm";
  return p;
}

} // namespace

DeviceParams device_preset(const std::string& name) {
  DeviceParams p;
  if (name == "ideal") p = make_ideal();
  else if (name == "pcm") p = make_pcm();
  else if (name == "rram") p = make_rram();
  else if (name == "ecram") p = make_ecram();
  else if (name == "mram") p = make_mram();
  else throw ConfigError("unknown device preset '" + name + "'");
  p.validate();
  return p;
}

std::vector<std::string> device_preset_names() {
  return {"ideal", "pcm", "rram", "ecram", "mram"};
}

std::string to_string(ResponseKind kind) {
  switch (kind) {
  case ResponseKind::linear_symmetric: return "linear_symmetric";
  case ResponseKind::nonlinear_symmetric: return "nonlinear_symmetric";
  case ResponseKind::asymmetric_soft_bounds: return "asymmetric_soft_bounds";
  case ResponseKind::one_sided: return "one_sided";
  }
  return "?";
}

std::string to_string(DriftKind kind) {
  switch (kind) {
  case DriftKind::none: return "none";
  case DriftKind::power_law: return "power_law";
  case DriftKind::linear_rate: return "linear_rate";
  }
  return "?";
}

ResponseKind response_kind_from_string(const std::string& s) {
  if (s == "linear_symmetric") return ResponseKind::linear_symmetric;
  if (s == "nonlinear_symmetric") return ResponseKind::nonlinear_symmetric;
  if (s == "asymmetric_soft_bounds") return ResponseKind::asymmetric_soft_bounds;
  if (s == "one_sided") return ResponseKind::one_sided;
  throw ConfigError("unknown response_kind '" + s + "'");
}

DriftKind drift_kind_from_string(const std::string& s) {
  if (s == "none") return DriftKind::none;
  if (s == "power_law") return DriftKind::power_law;
  if (s == "linear_rate") return DriftKind::linear_rate;
  throw ConfigError("unknown drift_kind '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace

DeviceParams load_device_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open device file '" + path.string() + "'");
  DeviceParams p;
  std::string line;
  int lineno = 0;
  auto bad = [&](const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) bad("empty key or value");
    try {
      if (key == "name") p.name = value;
      else if (key == "g_min") p.g_min = std::stod(value);
      else if (key == "g_max") p.g_max = std::stod(value);
      else if (key == "bits_per_cell") p.bits_per_cell = std::stoi(value);
      else if (key == "response_kind") p.response_kind = response_kind_from_string(value);
      else if (key == "alpha_up") p.alpha_up = std::stod(value);
      else if (key == "alpha_down") p.alpha_down = std::stod(value);
      else if (key == "dg_mean") p.dg_mean = std::stod(value);
      else if (key == "dg_rel_sigma") p.dg_rel_sigma = std::stod(value);
      else if (key == "spatial_rel_sigma") p.spatial_rel_sigma = std::stod(value);
      else if (key == "read_noise_rel_sigma") p.read_noise_rel_sigma = std::stod(value);
      else if (key == "drift_kind") p.drift_kind = drift_kind_from_string(value);
      else if (key == "drift_nu") p.drift_nu = std::stod(value);
      else if (key == "drift_rate") p.drift_rate = std::stod(value);
      else if (key == "write_energy") p.write_energy = std::stod(value);
      else if (key == "write_latency") p.write_latency = std::stod(value);
      else if (key == "endurance") p.endurance = std::stod(value);
      else if (key == "enforce_endurance") p.enforce_endurance = value == "true" || value == "1";
      else if (key.starts_with("meta.")) p.metadata[key.substr(5)] = value;
      else bad("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      bad("invalid numeric value '" + value + "' for key '" + key + "'");
    } catch (const std::out_of_range&) {
      bad("numeric value out of range for key '" + key + "'");
    }
  }
  p.validate();
  return p;
}

} // namespace xbar
