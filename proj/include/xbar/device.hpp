#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xbar/common.hpp"

namespace xbar {

/// Conductance response to programming pulses (the four incremental-switching
/// shapes: symmetric linear/nonlinear, asymmetric with a crossing point, and
/// increment-only devices that can only be depressed by a full reset).
enum class ResponseKind {
  linear_symmetric,
  nonlinear_symmetric,
  asymmetric_soft_bounds,
  one_sided,
};

enum class DriftKind { none, power_law, linear_rate };

enum class PulseDirection { up, down };

/// Static parameters of one NVM technology class.
///
/// Conductances are in siemens, energies in joules, times in seconds.
/// `alpha_up`/`alpha_down` are the soft-bounds rate coefficients: an up pulse
/// moves the conductance by alpha_up*(g_max - g), a down pulse by
/// -alpha_down*(g - g_min). For the symmetric kinds the per-pulse step is
/// `dg_mean`. Programming noise is lognormal multiplicative on each increment
/// (keeps increments sign-correct); `spatial_rel_sigma` is sampled once per
/// device at array construction as a static gain on the increment.
struct DeviceParams {
  std::string name;
  double g_min = 0.0;
  double g_max = 0.0;
  int bits_per_cell = 0; ///< 0 means continuous/analog storage
  ResponseKind response_kind = ResponseKind::linear_symmetric;
  double alpha_up = 0.0;
  double alpha_down = 0.0;
  double dg_mean = 0.0;          ///< mean conductance increment per pulse, S
  double dg_rel_sigma = 0.0;     ///< cycle-to-cycle relative spread of increments
  double spatial_rel_sigma = 0.0; ///< device-to-device relative spread
  double read_noise_rel_sigma = 0.0; ///< temporal read noise, relative
  DriftKind drift_kind = DriftKind::none;
  double drift_nu = 0.0;   ///< power-law exponent (PCM)
  double drift_rate = 0.0; ///< fractional conductance loss per second (RRAM)
  double write_energy = 0.0;  ///< J per programming pulse
  double write_latency = 0.0; ///< s per programming pulse
  double endurance = 1.0;     ///< programming cycles
  bool enforce_endurance = true;
  std::map<std::string, std::string> metadata; ///< source ranges etc., free-form

  double window() const { return g_max - g_min; }
  double on_off_ratio() const { return g_min > 0.0 ? g_max / g_min : 0.0; }

  /// Throws ConfigError if any invariant is violated.
  void validate() const;
};

/// Mutable state of one cross-point element.
struct ConductanceState {
  double g = 0.0;                 ///< conductance at `age` seconds after programming
  std::int64_t pulses_seen = 0;
  double age = 0.0;               ///< seconds since last programming event
};

/// Where the zero-noise |dG| up and down curves cross.
struct SymmetryPoint {
  enum class Kind { none, everywhere, at_point };
  Kind kind = Kind::none;
  double g = 0.0; ///< valid only for Kind::at_point

  bool exists() const { return kind != Kind::none; }
};

/// Applies one programming pulse. Returns the new state (value semantics);
/// clamps to [g_min, g_max], increments pulses_seen and resets age.
/// `gain` carries the per-device spatial multiplier (1.0 for a lone device).
/// Throws DeviceWornError past endurance, UnsupportedError for a down pulse
/// on a one-sided device.
ConductanceState apply_pulse(const ConductanceState& state, const DeviceParams& params,
                             PulseDirection direction, std::uint64_t rng_seed,
                             double gain = 1.0);

/// Full RESET to g_min. The only depression mechanism for one-sided devices.
ConductanceState reset_device(const ConductanceState& state, const DeviceParams& params);

SymmetryPoint symmetry_point(const DeviceParams& params);

/// Effective number of programming steps, 2*(g_max - g_min)/dG with dG the
/// mean step (the step at the symmetry point for asymmetric devices).
/// Throws UnsupportedError for one-sided devices.
std::int64_t programming_steps(const DeviceParams& params);

/// Advances the device by `elapsed` seconds of retention, applying the
/// configured drift law. Composes exactly: drifting t1 then t2 equals
/// drifting t1+t2 in one call. Power-law drift uses reference time t0.
ConductanceState apply_drift(const ConductanceState& state, const DeviceParams& params,
                             double elapsed);

/// Power-law drift reference time, seconds.
inline constexpr double kDriftReferenceTime = 1.0;

/// One noisy conductance read, clamped to [g_min, g_max]. Deterministic per seed.
double read_conductance(const ConductanceState& state, const DeviceParams& params,
                        std::uint64_t rng_seed);

/// Built-in technology presets: pcm, rram, ecram, mram, ideal.
DeviceParams device_preset(const std::string& name);
std::vector<std::string> device_preset_names();

/// Loads parameters from a key/value text file ("field = value" per line,
/// '#' comments, "meta.key = ..." entries go to metadata).
DeviceParams load_device_params(const std::filesystem::path& path);

std::string to_string(ResponseKind kind);
std::string to_string(DriftKind kind);
ResponseKind response_kind_from_string(const std::string& s);
DriftKind drift_kind_from_string(const std::string& s);

} // namespace xbar
