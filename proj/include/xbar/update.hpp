#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "xbar/crossbar.hpp"

namespace xbar {

/// One Bernoulli pulse train of `length` slots packed into 64-bit words.
struct PulseTrain {
  std::vector<std::uint64_t> words;

  bool bit(int slot) const { return (words[slot >> 6] >> (slot & 63)) & 1u; }
  void set(int slot) { words[slot >> 6] |= std::uint64_t{1} << (slot & 63); }
};

/// One sign-quadrant sub-phase: rows and columns whose product has this
/// quadrant's sign fire together; all coincidences share one pulse direction.
struct PulsePhase {
  PulseDirection direction = PulseDirection::up;
  std::vector<PulseTrain> rows;
  std::vector<PulseTrain> cols;
};

/// Row/column pulse trains realizing a parallel rank-1 update
/// w <- w - eta * x * delta^T. A single train pair cannot encode all four
/// sign quadrants at once, so the product sign is decomposed into four
/// time-separated sub-phases grouped by pulse polarity: (+x,+d) and (-x,-d)
/// coincidences depress the weight (conductance direction chosen by the
/// applier), (+x,-d) and (-x,+d) potentiate it.
struct PulsePlan {
  int rows = 0;
  int cols = 0;
  int length = 0; ///< slots per sub-phase
  std::uint64_t encoding_seed = 0;
  std::array<PulsePhase, 4> phases;
  std::int64_t clipped_rates = 0; ///< rates that exceeded 1 and were clipped
  double dw_min = 0.0;            ///< weight change per coincident pulse

  /// Pulse-slot latency of applying this plan; a function of length only.
  std::int64_t total_slots() const { return 4 * static_cast<std::int64_t>(length); }
  std::int64_t coincidences(int i, int j) const;
};

/// Encodes |x_i| and |delta_j| as Bernoulli rates scaled so the expected
/// weight change per cell is eta * x_i * delta_j, given dw_min weight units
/// per coincident pulse. Rates clipping at 1 is counted in the plan.
PulsePlan build_pulse_plan(std::span<const double> x, std::span<const double> delta, double eta,
                           int length, std::uint64_t seed, double dw_min);

struct UpdateReport {
  std::int64_t coincident_pulses = 0;
  double write_energy = 0.0;
  std::int64_t latency_slots = 0; ///< function of train length only
  std::int64_t clipped_rates = 0;
};

/// Applies the plan to one tile (bidirectional devices) or a differential
/// pair. With a pair, a one-sided device realizes "down" as an up pulse on
/// the minus tile; bidirectional devices update the plus tile in place.
/// The plan's "up" means the logical weight increases.
UpdateReport apply_update(CrossbarState& plus, CrossbarState* minus, const PulsePlan& plan,
                          std::uint64_t rng_seed);

/// Per-cell reference conductances subtracted from a differential pair so
/// logical weight zero sits at the device's natural fixed point.
struct ReferenceFrame {
  int rows = 0;
  int cols = 0;
  std::vector<double> plus;
  std::vector<double> minus;

  static ReferenceFrame uniform(int rows, int cols, double g_plus, double g_minus);
};

/// Reference frame centred on the device symmetry point.
/// Throws UnsupportedError when the device has none.
ReferenceFrame symmetry_reference(const CrossbarState& plus, const DeviceParams& device);

/// Logical weights (G+ - ref+) - (G- - ref-), in siemens, row-major.
std::vector<double> zero_shift_reference(const CrossbarState& plus, const CrossbarState& minus,
                                         const ReferenceFrame& refs);

/// Same, with references initialized at the symmetry point.
std::vector<double> zero_shift_reference(const CrossbarState& plus, const CrossbarState& minus,
                                         const DeviceParams& device);

} // namespace xbar
