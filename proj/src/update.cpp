#include "xbar/update.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "xbar/rng.hpp"

namespace xbar {

namespace {

PulseTrain sample_train(int length, double rate, Rng& rng) {
  PulseTrain t;
  t.words.assign(static_cast<std::size_t>((length + 63) / 64), 0);
  if (rate <= 0.0) return t;
  if (rate >= 1.0) {
    for (int s = 0; s < length; ++s) t.set(s);
    return t;
  }
  for (int s = 0; s < length; ++s)
    if (rng.uniform01() < rate) t.set(s);
  return t;
}

int count_coincidences(const PulseTrain& a, const PulseTrain& b) {
  int n = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w)
    n += std::popcount(a.words[w] & b.words[w]);
  return n;
}

// Quadrant selectors: phases 0..3 are (+x,+d), (-x,-d), (+x,-d), (-x,+d).
constexpr bool kRowPositive[4] = {true, false, true, false};
constexpr bool kColPositive[4] = {true, false, false, true};

} // namespace

std::int64_t PulsePlan::coincidences(int i, int j) const {
  std::int64_t n = 0;
  for (const auto& phase : phases) {
    if (phase.rows[i].words.empty() || phase.cols[j].words.empty()) continue;
    n += count_coincidences(phase.rows[i], phase.cols[j]);
  }
  return n;
}

PulsePlan build_pulse_plan(std::span<const double> x, std::span<const double> delta, double eta,
                           int length, std::uint64_t seed, double dw_min) {
  if (length < 1) throw ConfigError("pulse train length must be >= 1");
  if (!(eta > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(dw_min > 0.0)) throw ConfigError("dw_min must be > 0");
  for (double v : x)
    if (!std::isfinite(v)) throw ConfigError("x contains a non-finite value");
  for (double v : delta)
    if (!std::isfinite(v)) throw ConfigError("delta contains a non-finite value");

  PulsePlan plan;
  plan.rows = static_cast<int>(x.size());
  plan.cols = static_cast<int>(delta.size());
  plan.length = length;
  plan.encoding_seed = seed;
  plan.dw_min = dw_min;

  // E[coincidences(i,j)] = L * px_i * pd_j must equal eta*|x_i||d_j|/dw_min,
  // so px*pd = |x||d| * eta/(L*dw_min). The scale is split between the two
  // trains, balanced by the operand maxima to delay clipping.
  double max_x = 0.0, max_d = 0.0;
  for (double v : x) max_x = std::max(max_x, std::abs(v));
  for (double v : delta) max_d = std::max(max_d, std::abs(v));
  const double c = eta / (static_cast<double>(length) * dw_min);
  double kx = std::sqrt(c), kd = std::sqrt(c);
  if (max_x > 0.0 && max_d > 0.0) {
    const double balance = std::sqrt(max_d / max_x);
    kx *= balance;
    kd /= balance;
  }

  // One train per operand entry, seeded by its index alone: negating an
  // operand moves its train between quadrants without resampling it, so the
  // realized update flips sign exactly.
  PulseTrain silent;
  silent.words.assign(static_cast<std::size_t>((length + 63) / 64), 0);
  std::vector<PulseTrain> row_trains(plan.rows), col_trains(plan.cols);
  for (int i = 0; i < plan.rows; ++i) {
    double rate = std::abs(x[i]) * kx;
    if (rate > 1.0) {
      rate = 1.0;
      if (x[i] != 0.0) ++plan.clipped_rates;
    }
    Rng rng(substream(seed, "row-train", static_cast<std::uint64_t>(i)));
    row_trains[i] = sample_train(length, rate, rng);
  }
  for (int j = 0; j < plan.cols; ++j) {
    double rate = std::abs(delta[j]) * kd;
    if (rate > 1.0) {
      rate = 1.0;
      if (delta[j] != 0.0) ++plan.clipped_rates;
    }
    Rng rng(substream(seed, "col-train", static_cast<std::uint64_t>(j)));
    col_trains[j] = sample_train(length, rate, rng);
  }

  for (int phase = 0; phase < 4; ++phase) {
    auto& ph = plan.phases[phase];
    // (+x,+d) and (-x,-d) carry a positive product: the weight moves down
    // under w <- w - eta*x*d^T.
    ph.direction = phase < 2 ? PulseDirection::down : PulseDirection::up;
    ph.rows.resize(plan.rows);
    ph.cols.resize(plan.cols);
    for (int i = 0; i < plan.rows; ++i) {
      const bool active = kRowPositive[phase] ? x[i] > 0.0 : x[i] < 0.0;
      ph.rows[i] = active ? row_trains[i] : silent;
    }
    for (int j = 0; j < plan.cols; ++j) {
      const bool active = kColPositive[phase] ? delta[j] > 0.0 : delta[j] < 0.0;
      ph.cols[j] = active ? col_trains[j] : silent;
    }
  }
  return plan;
}

UpdateReport apply_update(CrossbarState& plus, CrossbarState* minus, const PulsePlan& plan,
                          std::uint64_t rng_seed) {
  const auto& cfg = plus.config();
  if (plan.rows != cfg.rows || plan.cols != cfg.cols)
    throw DimensionError("pulse plan does not match the tile dimensions");
  if (minus && (minus->config().rows != cfg.rows || minus->config().cols != cfg.cols))
    throw DimensionError("differential pair tiles disagree in shape");
  const DeviceParams& dev = plus.device();
  const bool one_sided = dev.response_kind == ResponseKind::one_sided;
  if (one_sided && !minus)
    throw UnsupportedError("one-sided device '" + dev.name +
                           "' needs the differential-pair trick for updates");

  UpdateReport report;
  report.clipped_rates = plan.clipped_rates;
  report.latency_slots = plan.total_slots();

  for (int phase = 0; phase < 4; ++phase) {
    const auto& ph = plan.phases[phase];
    const bool weight_up = ph.direction == PulseDirection::up;
    for (int i = 0; i < cfg.rows; ++i) {
      const auto& row_train = ph.rows[i];
      bool row_any = false;
      for (auto w : row_train.words) row_any |= w != 0;
      if (!row_any) continue;
      for (int j = 0; j < cfg.cols; ++j) {
        const int n = count_coincidences(row_train, ph.cols[j]);
        if (n == 0) continue;
        // Pulse sampling is per-cell seed-deterministic, independent of
        // iteration order.
        const std::uint64_t cell_seed =
            substream(rng_seed, "cell", static_cast<std::uint64_t>(phase),
                      static_cast<std::uint64_t>(i) * cfg.cols + j);
        for (int k = 0; k < n; ++k) {
          const std::uint64_t pulse_seed = substream(cell_seed, "p", k);
          if (one_sided) {
            // up on the plus side raises the weight; up on the minus lowers it
            if (weight_up) plus.pulse_cell(i, j, PulseDirection::up, pulse_seed);
            else minus->pulse_cell(i, j, PulseDirection::up, pulse_seed);
          } else {
            plus.pulse_cell(i, j, weight_up ? PulseDirection::up : PulseDirection::down,
                            pulse_seed);
          }
        }
        report.coincident_pulses += n;
        report.write_energy += n * dev.write_energy;
      }
    }
  }
  return report;
}

ReferenceFrame ReferenceFrame::uniform(int rows, int cols, double g_plus, double g_minus) {
  ReferenceFrame f;
  f.rows = rows;
  f.cols = cols;
  f.plus.assign(static_cast<std::size_t>(rows) * cols, g_plus);
  f.minus.assign(static_cast<std::size_t>(rows) * cols, g_minus);
  return f;
}

ReferenceFrame symmetry_reference(const CrossbarState& plus, const DeviceParams& device) {
  const SymmetryPoint sym = symmetry_point(device);
  if (!sym.exists())
    throw UnsupportedError("device '" + device.name + "' has no symmetry point");
  const double g_ref = sym.kind == SymmetryPoint::Kind::at_point
                           ? sym.g
                           : 0.5 * (device.g_min + device.g_max);
  return ReferenceFrame::uniform(plus.config().rows, plus.config().cols, g_ref, g_ref);
}

std::vector<double> zero_shift_reference(const CrossbarState& plus, const CrossbarState& minus,
                                         const ReferenceFrame& refs) {
  const auto& cfg = plus.config();
  if (refs.rows != cfg.rows || refs.cols != cfg.cols)
    throw DimensionError("reference frame does not match the tile");
  std::vector<double> w(static_cast<std::size_t>(cfg.rows) * cfg.cols);
  for (int i = 0; i < cfg.rows; ++i)
    for (int j = 0; j < cfg.cols; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * cfg.cols + j;
      w[k] = (plus.at(i, j).g - refs.plus[k]) - (minus.at(i, j).g - refs.minus[k]);
    }
  return w;
}

std::vector<double> zero_shift_reference(const CrossbarState& plus, const CrossbarState& minus,
                                         const DeviceParams& device) {
  return zero_shift_reference(plus, minus, symmetry_reference(plus, device));
}

} // namespace xbar
