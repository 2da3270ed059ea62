#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "xbar/rng.hpp"
#include "xbar/update.hpp"

using namespace xbar;

namespace {

DeviceParams linear_device(double dg = 1e-3) {
  DeviceParams p;
  p.name = "lin";
  p.g_min = 0.0;
  p.g_max = 1.0;
  p.response_kind = ResponseKind::linear_symmetric;
  p.dg_mean = dg;
  p.endurance = 1e18;
  p.validate();
  return p;
}

CrossbarConfig quiet_config(int rows, int cols) {
  CrossbarConfig c;
  c.rows = rows;
  c.cols = cols;
  c.temperature = 0.0;
  return c;
}

CrossbarState mid_tile(int rows, int cols, const DeviceParams& dev, std::uint64_t seed) {
  CrossbarState t = CrossbarState::make(quiet_config(rows, cols), dev, seed);
  const double mid = 0.5 * (dev.g_min + dev.g_max);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t.set_cell(i, j, mid);
  return t;
}

} // namespace

TEST_CASE("zero stimulus builds all-zero trains and changes nothing") {
  const std::vector<double> x(4, 0.0), d(3, 0.0);
  const PulsePlan plan = build_pulse_plan(x, d, 0.1, 32, 1, 1e-3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(plan.coincidences(i, j) == 0);

  const DeviceParams dev = linear_device();
  CrossbarState tile = mid_tile(4, 3, dev, 1);
  const CrossbarState before = tile;
  const UpdateReport r = apply_update(tile, nullptr, plan, 2);
  CHECK(r.coincident_pulses == 0);
  CHECK(r.write_energy == 0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(tile.at(i, j).g == before.at(i, j).g);
}

TEST_CASE("saturated unit rates coincide on every slot") {
  // eta = L * dw_min makes the Bernoulli rates exactly 1.0
  const int length = 100;
  const double dw_min = 1e-3;
  const std::vector<double> x{1.0}, d{1.0};
  const PulsePlan plan = build_pulse_plan(x, d, length * dw_min, length, 3, dw_min);
  CHECK(plan.coincidences(0, 0) == 100);
  CHECK(plan.clipped_rates == 0);
}

TEST_CASE("coincidence fraction matches the rate product statistically") {
  // rates 0.5 x 0.5 -> expected fraction 0.25 within 3 binomial sigma
  const int length = 10000;
  const double dw_min = 1e-3;
  const std::vector<double> x{0.5}, d{0.5};
  const PulsePlan plan = build_pulse_plan(x, d, length * dw_min, length, 11, dw_min);
  const double frac = static_cast<double>(plan.coincidences(0, 0)) / length;
  const double sigma = std::sqrt(0.25 * 0.75 / length);
  CHECK(std::abs(frac - 0.25) <= 3.0 * sigma);
}

TEST_CASE("rates above one are clipped and reported") {
  const std::vector<double> x{1.0}, d{1.0};
  const PulsePlan plan = build_pulse_plan(x, d, 4.0, 16, 5, 1e-3); // eta >> L*dw
  CHECK(plan.clipped_rates > 0);
  CHECK(plan.coincidences(0, 0) == 16);
}

TEST_CASE("deterministic saturated trains reproduce the outer-product step") {
  // x, delta in {0,1}: every active pair gets exactly L coincidences, so
  // dW = -eta * x * d^T to one-pulse granularity.
  const int length = 8;
  const double dw_min = 1e-3;
  const double eta = length * dw_min;
  const std::vector<double> x{1.0, 0.0, 1.0, 1.0};
  const std::vector<double> d{1.0, 1.0, 0.0};
  const DeviceParams dev = linear_device(dw_min); // g_per_w of 1: dg == dw
  CrossbarState tile = mid_tile(4, 3, dev, 1);
  const CrossbarState before = tile;
  const PulsePlan plan = build_pulse_plan(x, d, eta, length, 17, dw_min);
  apply_update(tile, nullptr, plan, 18);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) {
      const double dw = tile.at(i, j).g - before.at(i, j).g;
      const double target = -eta * x[i] * d[j];
      REQUIRE(std::abs(dw - target) <= dw_min * (1.0 + 1e-12));
    }
}

TEST_CASE("flipping the sign of delta flips every conductance change exactly") {
  const int length = 16;
  const double dw_min = 1e-3;
  const std::vector<double> x{1.0, 0.5, 0.25};
  std::vector<double> d{0.5, -1.0};
  const DeviceParams dev = linear_device(dw_min);

  CrossbarState a = mid_tile(3, 2, dev, 1);
  CrossbarState b = mid_tile(3, 2, dev, 1);
  const CrossbarState before = a;
  const PulsePlan plan_pos = build_pulse_plan(x, d, length * dw_min, length, 23, dw_min);
  for (auto& v : d) v = -v;
  const PulsePlan plan_neg = build_pulse_plan(x, d, length * dw_min, length, 23, dw_min);
  apply_update(a, nullptr, plan_pos, 29);
  apply_update(b, nullptr, plan_neg, 29);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      const double da = a.at(i, j).g - before.at(i, j).g;
      const double db = b.at(i, j).g - before.at(i, j).g;
      // same seed, opposite quadrant: identical trains, mirrored direction
      REQUIRE(da == doctest::Approx(-db).epsilon(1e-12));
    }
}

TEST_CASE("reported latency depends on the train length only") {
  const double dw_min = 1e-3;
  const std::vector<double> x4(4, 0.5), d4(4, 0.5);
  const std::vector<double> x32(32, 0.5), d32(32, 0.5);
  const DeviceParams dev = linear_device(dw_min);
  CrossbarState small = mid_tile(4, 4, dev, 1);
  CrossbarState large = mid_tile(32, 32, dev, 1);
  const PulsePlan p_small = build_pulse_plan(x4, d4, 0.01, 32, 1, dw_min);
  const PulsePlan p_large = build_pulse_plan(x32, d32, 0.01, 32, 1, dw_min);
  const UpdateReport r_small = apply_update(small, nullptr, p_small, 2);
  const UpdateReport r_large = apply_update(large, nullptr, p_large, 2);
  CHECK(r_small.latency_slots == r_large.latency_slots);
  CHECK(r_small.latency_slots == p_small.total_slots());
}

TEST_CASE("expected conductance change is proportional to the outer product") {
  // reduced Monte-Carlo of the update-expectation regression; eta is kept
  // inside the unclipped range eta <= L*dw_min
  const int rows = 8, cols = 8, length = 64, reps = 200;
  const double dw_min = 1e-4, eta = 3e-3;
  const DeviceParams dev = linear_device(dw_min);
  Rng rng(31);
  std::vector<double> x(rows), d(cols);
  for (auto& v : x) v = rng.uniform(0.2, 1.0);
  for (auto& v : d) v = rng.uniform(-1.0, 1.0);

  std::vector<double> mean_dw(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    CrossbarState tile = mid_tile(rows, cols, dev, 1);
    const PulsePlan plan = build_pulse_plan(x, d, eta, length, 100 + rep, dw_min);
    apply_update(tile, nullptr, plan, 200 + rep);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) mean_dw[i * cols + j] += (tile.at(i, j).g - 0.5) / reps;
  }
  // regression through the origin against -eta*x*d^T
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double target = -eta * x[i] * d[j];
      const double got = mean_dw[i * cols + j];
      sxy += target * got;
      sxx += target * target;
      syy += got * got;
    }
  const double slope = sxy / sxx;
  double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) mean += mean_dw[i * cols + j];
  mean /= rows * cols;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double target = -eta * x[i] * d[j];
      const double got = mean_dw[i * cols + j];
      ss_res += (got - slope * target) * (got - slope * target);
      ss_tot += (got - mean) * (got - mean);
    }
  CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(1.0 - ss_res / ss_tot > 0.99);
}

TEST_CASE("asymmetric devices drift toward the symmetry point under balanced streams") {
  DeviceParams dev;
  dev.name = "asym";
  dev.g_min = 0.0;
  dev.g_max = 1.0;
  dev.response_kind = ResponseKind::asymmetric_soft_bounds;
  dev.alpha_up = 0.01;
  dev.alpha_down = 0.01;
  dev.endurance = 1e18;
  dev.validate();
  const double g_sym = symmetry_point(dev).g;

  int improved = 0;
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(substream(7, "fixed-point", seed));
    const double g0 = seed % 2 ? rng.uniform(0.0, 0.2) : rng.uniform(0.8, 1.0);
    ConductanceState s{g0, 0, 0.0};
    for (int k = 0; k < 10000; ++k) {
      const PulseDirection dir =
          rng.uniform01() < 0.5 ? PulseDirection::up : PulseDirection::down;
      s = apply_pulse(s, dev, dir, substream(11, "p", seed, k));
    }
    if (std::abs(s.g - g_sym) < std::abs(g0 - g_sym)) ++improved;
  }
  CHECK(improved >= 95);
}

TEST_CASE("one-sided devices need the differential pair") {
  DeviceParams dev = linear_device();
  dev.response_kind = ResponseKind::one_sided;
  dev.validate();
  CrossbarState plus = mid_tile(2, 2, dev, 1);
  CrossbarState minus = mid_tile(2, 2, dev, 2);
  const std::vector<double> x{1.0, 1.0}, d{1.0, -1.0};
  const PulsePlan plan = build_pulse_plan(x, d, 8e-3, 8, 3, 1e-3);
  CHECK_THROWS_AS(apply_update(plus, nullptr, plan, 4), UnsupportedError);

  const CrossbarState p0 = plus, m0 = minus;
  CHECK_NOTHROW(apply_update(plus, &minus, plan, 4));
  // positive products depress the weight: up pulses land on the minus tile
  CHECK(minus.at(0, 0).g > m0.at(0, 0).g);
  CHECK(plus.at(0, 0).g == p0.at(0, 0).g);
  // negative products potentiate: up pulses land on the plus tile
  CHECK(plus.at(0, 1).g > p0.at(0, 1).g);
  CHECK(minus.at(0, 1).g == m0.at(0, 1).g);
}

TEST_CASE("zero-shift reference frame") {
  DeviceParams dev;
  dev.name = "asym";
  dev.g_min = 0.0;
  dev.g_max = 1.0;
  dev.response_kind = ResponseKind::asymmetric_soft_bounds;
  dev.alpha_up = 0.03;
  dev.alpha_down = 0.01;
  dev.endurance = 1e18;
  dev.validate();
  const double g_sym = symmetry_point(dev).g;

  SUBCASE("all cells at the symmetry point read as logical zero") {
    CrossbarState plus = CrossbarState::make(quiet_config(3, 3), dev, 1);
    CrossbarState minus = CrossbarState::make(quiet_config(3, 3), dev, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        plus.set_cell(i, j, g_sym);
        minus.set_cell(i, j, g_sym);
      }
    for (double w : zero_shift_reference(plus, minus, dev)) REQUIRE(w == 0.0);
  }
  SUBCASE("uniform reference shifts cancel") {
    CrossbarState plus = CrossbarState::make(quiet_config(2, 2), dev, 1);
    CrossbarState minus = CrossbarState::make(quiet_config(2, 2), dev, 2);
    Rng rng(5);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        plus.set_cell(i, j, rng.uniform(0.1, 0.9));
        minus.set_cell(i, j, rng.uniform(0.1, 0.9));
      }
    const auto base = zero_shift_reference(plus, minus, dev);
    ReferenceFrame shifted = symmetry_reference(plus, dev);
    for (auto& g : shifted.plus) g += 0.07;
    for (auto& g : shifted.minus) g += 0.07;
    const auto moved = zero_shift_reference(plus, minus, shifted);
    for (std::size_t k = 0; k < base.size(); ++k)
      REQUIRE(moved[k] == doctest::Approx(base[k]).epsilon(1e-12));
  }
  SUBCASE("one-sided devices have no symmetry reference") {
    DeviceParams os = linear_device();
    os.response_kind = ResponseKind::one_sided;
    CrossbarState plus = CrossbarState::make(quiet_config(2, 2), os, 1);
    CHECK_THROWS_AS(symmetry_reference(plus, os), UnsupportedError);
  }
  SUBCASE("balanced random updates keep the mean logical weight near zero") {
    CrossbarState plus = CrossbarState::make(quiet_config(4, 4), dev, 1);
    CrossbarState minus = CrossbarState::make(quiet_config(4, 4), dev, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        plus.set_cell(i, j, g_sym);
        minus.set_cell(i, j, g_sym);
      }
    Rng rng(9);
    const double dw_min = dev.alpha_up * (dev.g_max - g_sym);
    std::vector<double> x(4), d(4);
    for (int step = 0; step < 2500; ++step) {
      for (auto& v : x) v = rng.uniform(0.0, 1.0);
      for (auto& v : d) v = rng.uniform(-1.0, 1.0); // zero-mean errors
      const PulsePlan plan = build_pulse_plan(x, d, 0.02, 4, 1000 + step, dw_min);
      apply_update(plus, &minus, plan, 2000 + step);
    }
    const auto w = zero_shift_reference(plus, minus, dev);
    double mean = 0.0;
    for (double v : w) mean += v / w.size();
    // noise band: well inside the window around the fixed point
    CHECK(std::abs(mean) < 0.05 * dev.window());
  }
}
