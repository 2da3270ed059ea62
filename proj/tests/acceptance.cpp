// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Expected values are frozen from independent oracles (direct
// products, finite differences, closed forms) or verified constants.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xbar/bitslice.hpp"
#include "xbar/crossbar.hpp"
#include "xbar/design_space.hpp"
#include "xbar/device.hpp"
#include "xbar/io.hpp"
#include "xbar/ir_solver.hpp"
#include "xbar/rng.hpp"
#include "xbar/training.hpp"
#include "xbar/update.hpp"

using namespace xbar;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d. %s%s%s\n", ok ? "PASS" : "FAIL", num, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// 1. ADC precision formula
void criterion_adc_bits() {
  const int bits = required_adc_bits(128, 1, 2);
  report(1, "ADC precision: required_adc_bits(128, 1, 2) == 8", bits == 8,
         "got " + std::to_string(bits));
}

// 2. Speed bound
void criterion_speed_bound() {
  DesignPoint p;
  p.weights_total = 250e6;
  p.t_int = 1e-7;
  const double ops = ops_per_second_bound(p);
  report(2, "speed bound: 250M weights at 100 ns == 5.0e15 Op/s", ops == 5.0e15, fmt(ops));
}

// 3. Resistance bound
void criterion_resistance_bound() {
  DesignPoint p;
  p.array_n = 2048;
  p.r_wire = 0.1;
  const double r = min_device_resistance(p);
  const bool literal = r == 4194304.0; // 2048^2 * 0.1 / 0.1 exactly
  const bool in_band = r >= 4.0e6 && r <= 5.5e6;
  const bool narrative = std::abs(r - 5e6) / 5e6 <= 0.25;
  report(3, "resistance bound: 4.194 MOhm, within [4, 5.5] MOhm and 25% of 5 MOhm",
         literal && in_band && narrative, fmt(r) + " Ohm");
}

// 4. Voltage bound
void criterion_voltage_bound() {
  const double v = voltage_bound(2048, 5e6, 300.0, 1e-7, 10.0);
  const double expected = 0.206; // independent calculator check
  const bool ok = std::abs(v - expected) / expected <= 0.01;
  report(4, "voltage bound: 0.206 V +- 1% at (2048, 5 MOhm, 300 K, 100 ns)", ok, fmt(v) + " V");
}

// 5. Energy bound
void criterion_energy_bound() {
  DesignPoint p;
  p.array_n = 2048;
  p.r_wire = 0.1;
  p.r_dev = 5e6;
  p.t_int = 1e-7;
  p.e_adc = 5e-12;
  const double bound = energy_efficiency_bound(p);
  bool monotone = true;
  double prev = bound;
  for (double e : {1e-11, 4e-11, 1.6e-10, 6.4e-10}) {
    p.e_adc = e;
    const double b = energy_efficiency_bound(p);
    monotone = monotone && b < prev;
    prev = b;
  }
  report(5, "energy bound: > 1e14 Op/J at the reference point, decreasing in E_ADC",
         bound > 1e14 && monotone, fmt(bound) + " Op/J");
}

// 6. Bit-slice exactness
void criterion_bitslice_exact() {
  Rng rng(600);
  CrossbarConfig base;
  base.rows = base.cols = 1;
  base.temperature = 0.0;
  long long cases = 0, mismatches = 0;
  for (int wbits : {1, 2, 4}) {
    for (int ibits : {1, 2, 4}) {
      for (int b : {1, 2}) {
        for (int rep = 0; rep < 7; ++rep) { // 9 combos x 2 b x 7 geometries
          const int rows = 2 + static_cast<int>(rng.below(31));
          const int cols = 2 + static_cast<int>(rng.below(31));
          const int tr = 1 + static_cast<int>(rng.below(rows));
          const int tc = 1 + static_cast<int>(rng.below(cols));
          const SlicePlan plan = plan_slices(rows, cols, wbits, ibits, b, tr, tc);

          QuantizedMatrix m;
          m.rows = rows;
          m.cols = cols;
          const std::int64_t lo = -(std::int64_t{1} << (wbits - 1));
          const std::int64_t span = (std::int64_t{1} << wbits) - 1;
          for (int k = 0; k < rows * cols; ++k)
            m.values.push_back(lo + static_cast<std::int64_t>(rng.below(span + 1)));

          TileSet tiles = make_tile_set(plan, device_preset("ideal"), base, rep);
          WriteVerifyOptions wv;
          wv.exact_write = true;
          program_weights(plan, m, tiles, rep, wv);

          for (int q = 0; q < 8; ++q) { // 126 geometries x 8 vectors = 1008 cases
            std::vector<std::int64_t> x(rows);
            const std::int64_t xlo = -(std::int64_t{1} << (ibits - 1));
            const std::int64_t xspan = (std::int64_t{1} << ibits) - 1;
            for (auto& v : x) v = xlo + static_cast<std::int64_t>(rng.below(xspan + 1));
            const auto got = mvm_bitsliced(tiles, x, MvmMode::ideal, q).values;
            std::vector<std::int64_t> expect(cols, 0);
            for (int i = 0; i < rows; ++i)
              for (int j = 0; j < cols; ++j) expect[j] += m.at(i, j) * x[i];
            ++cases;
            if (got != expect) ++mismatches;
          }
        }
      }
    }
  }
  report(6, "bit-slice exactness vs integer matmul over W,I in {1,2,4}, b in {1,2}",
         cases >= 1000 && mismatches == 0,
         std::to_string(cases) + " cases, " + std::to_string(mismatches) + " mismatches");
}

// 7. IR-drop solver agreement
void criterion_ir_drop() {
  Rng rng(700);
  const double g_max = 5e-6;
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 16 + static_cast<int>(rng.below(49));
    const int n = 16 + static_cast<int>(rng.below(49));
    // wiring budget N^2 r_wire / R_dev <= 0.1 with N the larger dimension
    const double dim = std::max(m, n);
    const double budget = 0.01 + 0.09 * rng.uniform01();
    const double r_wire = budget / (dim * dim) / g_max;
    std::vector<double> g(static_cast<std::size_t>(m) * n);
    for (auto& x : g) x = rng.uniform(0.05 * g_max, g_max);
    std::vector<double> v(m);
    for (auto& x : v) x = rng.uniform(0.0, 0.2);
    const auto exact = solve_ir_exact(g, m, n, v, r_wire);
    const auto approx = solve_ir_approx(g, m, n, v, r_wire);
    double scale = 0.0;
    for (double x : exact) scale = std::max(scale, std::abs(x));
    for (int j = 0; j < n; ++j) {
      const double err = std::abs(approx[j] - exact[j]) / scale;
      worst = std::max(worst, err);
      if (err > 0.02) ++violations;
    }
  }

  // zero wire resistance collapses to the ideal product
  Rng rng2(701);
  const int m = 24, n = 24;
  std::vector<double> g(m * n);
  for (auto& x : g) x = rng2.uniform(0.0, g_max);
  std::vector<double> v(m);
  for (auto& x : v) x = rng2.uniform(0.0, 0.2);
  const auto zero_wire = solve_ir_exact(g, m, n, v, 0.0);
  double ideal_err = 0.0;
  for (int j = 0; j < n; ++j) {
    double expect = 0.0;
    for (int i = 0; i < m; ++i) expect += g[i * n + j] * v[i];
    ideal_err = std::max(ideal_err, std::abs(zero_wire[j] - expect));
  }

  report(7, "IR-drop: approximate within 2% of exact on 200 arrays; r_wire=0 equals ideal",
         violations == 0 && ideal_err <= 1e-10,
         "max rel err " + fmt(worst) + ", ideal gap " + fmt(ideal_err));
}

// 8. Device dynamics
void criterion_device_dynamics() {
  bool pair_ok = true;
  double worst_pair = 0.0;
  {
    DeviceParams lin;
    lin.name = "a-lin";
    lin.g_min = 0.0;
    lin.g_max = 1.0;
    lin.response_kind = ResponseKind::linear_symmetric;
    lin.dg_mean = 0.002;
    lin.endurance = 1e18;
    DeviceParams nonlin = lin;
    nonlin.name = "a-nonlin";
    nonlin.response_kind = ResponseKind::nonlinear_symmetric;
    Rng rng(800);
    for (const DeviceParams& dev : {lin, nonlin}) {
      for (int k = 0; k < 10000; ++k) {
        const double g0 = rng.uniform(0.05, 0.95);
        ConductanceState s{g0, 0, 0.0};
        s = apply_pulse(s, dev, PulseDirection::up, 2 * k);
        s = apply_pulse(s, dev, PulseDirection::down, 2 * k + 1);
        worst_pair = std::max(worst_pair, std::abs(s.g - g0));
      }
    }
    pair_ok = worst_pair <= 1e-12;
  }

  bool converge_ok = true;
  {
    DeviceParams asym;
    asym.name = "a-asym";
    asym.g_min = 0.0;
    asym.g_max = 1.0;
    asym.response_kind = ResponseKind::asymmetric_soft_bounds;
    asym.alpha_up = 0.04;
    asym.alpha_down = 0.07;
    asym.endurance = 1e18;
    const SymmetryPoint sym = symmetry_point(asym);
    const double dg_sym = asym.alpha_up * (asym.g_max - sym.g);
    Rng rng(801);
    for (int seed = 0; seed < 100; ++seed) {
      ConductanceState s{rng.uniform01(), 0, 0.0};
      for (int k = 0; k < 2000; ++k) { // balanced alternating stream
        s = apply_pulse(s, asym, PulseDirection::up, 2 * k);
        s = apply_pulse(s, asym, PulseDirection::down, 2 * k + 1);
      }
      if (std::abs(s.g - sym.g) > dg_sym) converge_ok = false;
    }
  }

  bool slope_ok = true;
  double slope_err = 0.0;
  {
    DeviceParams pcm;
    pcm.name = "a-pcm";
    pcm.g_min = 0.0;
    pcm.g_max = 1.0;
    pcm.response_kind = ResponseKind::one_sided;
    pcm.dg_mean = 0.01;
    pcm.drift_kind = DriftKind::power_law;
    pcm.drift_nu = 0.05;
    pcm.endurance = 1e18;
    const ConductanceState s{1.0, 0, 0.0};
    const double t1 = 10.0, t2 = 1e5;
    const double r1 = 1.0 / apply_drift(s, pcm, t1).g;
    const double r2 = 1.0 / apply_drift(s, pcm, t2).g;
    const double slope = (std::log(r2) - std::log(r1)) / (std::log(t2) - std::log(t1));
    slope_err = std::abs(slope - pcm.drift_nu);
    slope_ok = slope_err < 1e-9;
  }

  report(8, "device dynamics: pulse-pair identity, symmetry convergence, drift slope",
         pair_ok && converge_ok && slope_ok,
         "pair gap " + fmt(worst_pair) + ", slope gap " + fmt(slope_err));
}

// 9. Update expectation
void criterion_update_expectation() {
  const int rows = 16, cols = 16, length = 256, reps = 500;
  const double dw_min = 1e-4, eta = 0.01;
  DeviceParams dev;
  dev.name = "a-upd";
  dev.g_min = 0.0;
  dev.g_max = 1.0;
  dev.response_kind = ResponseKind::linear_symmetric;
  dev.dg_mean = dw_min;
  dev.endurance = 1e18;
  CrossbarConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.temperature = 0.0;

  Rng rng(900);
  std::vector<double> x(rows), d(cols);
  for (auto& v : x) v = rng.uniform(0.2, 1.0);
  for (auto& v : d) v = rng.uniform(-1.0, 1.0);

  std::vector<double> mean_dw(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    CrossbarState tile = CrossbarState::make(cfg, dev, 1);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) tile.set_cell(i, j, 0.5);
    const PulsePlan plan = build_pulse_plan(x, d, eta, length, 9000 + rep, dw_min);
    apply_update(tile, nullptr, plan, 19000 + rep);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        mean_dw[i * cols + j] += (tile.at(i, j).g - 0.5) / reps;
  }

  double sxy = 0.0, sxx = 0.0, mean = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double target = -eta * x[i] * d[j];
      sxy += target * mean_dw[i * cols + j];
      sxx += target * target;
      mean += mean_dw[i * cols + j];
    }
  mean /= rows * cols;
  const double slope = sxy / sxx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double target = -eta * x[i] * d[j];
      const double got = mean_dw[i * cols + j];
      ss_res += (got - slope * target) * (got - slope * target);
      ss_tot += (got - mean) * (got - mean);
    }
  const double r2 = 1.0 - ss_res / ss_tot;
  report(9, "update expectation: E[dG] ~ x*delta^T with R^2 > 0.99 (16x16, L=256, 500 reps)",
         r2 > 0.99, "R^2 = " + fmt(r2) + ", slope " + fmt(slope));
}

// 10. Gradient check
void criterion_gradient_check() {
  NetworkSpec spec;
  spec.dims = {6, 4, 3};
  spec.activation = Activation::sigmoid;
  double worst = 0.0;
  Rng rng(1000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FloatNet net = FloatNet::init(spec, seed);
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(0.0, 1.0);
    const int label = static_cast<int>(rng.below(3));
    const auto trace = net.forward(x);
    const auto deltas = net.backward(trace, label);
    const double h = 1e-5;
    for (int l = 0; l < spec.layer_count(); ++l) {
      const int in = spec.dims[l], out = spec.dims[l + 1];
      for (int i = 0; i <= in; ++i) {
        const double xi = i < in ? trace.inputs[l][i] : 1.0;
        for (int j = 0; j < out; ++j) {
          auto& w = net.weights(l)[static_cast<std::size_t>(i) * out + j];
          const double keep = w;
          w = keep + h;
          const double up = net.loss(net.forward(x), label);
          w = keep - h;
          const double dn = net.loss(net.forward(x), label);
          w = keep;
          const double fd = (up - dn) / (2.0 * h);
          const double analytic = xi * deltas[l][j];
          const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6});
          worst = std::max(worst, rel);
        }
      }
    }
  }
  report(10, "gradient check: analytic vs central differences on 6-4-3, 20 seeds",
         worst < 1e-4, "worst rel err " + fmt(worst));
}

// 11. End-to-end training
void criterion_training() {
  const Dataset bundled =
      Dataset::load_csv(fs::path(XBAR_SOURCE_DIR) / "data/blobs_8x8.csv");
  const auto [train_set, test_set] = bundled.split(90, 11);

  NetworkSpec spec;
  spec.dims = {64, 8, 3};
  spec.activation = Activation::sigmoid;
  spec.eta = 0.3;
  spec.epochs = 6;

  AnalogOptions ideal_opt;
  ideal_opt.device = device_preset("ideal");
  ideal_opt.tile_base.rows = ideal_opt.tile_base.cols = 1;
  ideal_opt.tile_base.temperature = 0.0;
  ideal_opt.pulse_length = 64; // keeps rates unclipped at eta 0.3

  // (a) ideal symmetric analog vs float baseline, same seed
  FloatNet fnet = FloatNet::init(spec, 1);
  train(fnet, train_set, 1);
  const double float_acc = evaluate(fnet, test_set).accuracy;
  AnalogNet anet = AnalogNet::init(spec, ideal_opt, 1);
  train(anet, train_set, 1);
  const double analog_acc = evaluate(anet, test_set, 2).accuracy;
  const bool a_ok = analog_acc >= 0.9 * float_acc && float_acc > 0.5;
  report(11, "training (a): ideal analog >= 90% of the float baseline", a_ok,
         "float " + fmt(float_acc) + ", analog " + fmt(analog_acc));

  // (b) asymmetric device without zero-shift scores below the symmetric run
  DeviceParams asym = device_preset("ideal");
  asym.name = "asym-nozshift";
  asym.response_kind = ResponseKind::asymmetric_soft_bounds;
  asym.alpha_up = 0.08;
  asym.alpha_down = 0.02; // symmetry point far off the window midpoint
  asym.dg_mean = 0.0;
  AnalogOptions asym_opt = ideal_opt;
  asym_opt.device = asym;
  asym_opt.zero_shift = false;

  int below = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AnalogNet sym_net = AnalogNet::init(spec, ideal_opt, seed);
    train(sym_net, train_set, seed);
    const double sym_acc = evaluate(sym_net, test_set, 100 + seed).accuracy;
    AnalogNet asym_net = AnalogNet::init(spec, asym_opt, seed);
    train(asym_net, train_set, seed);
    const double asym_acc = evaluate(asym_net, test_set, 100 + seed).accuracy;
    if (asym_acc < sym_acc) ++below;
  }
  report(11, "training (b): asymmetric device without zero-shift below symmetric on >= 8/10 seeds",
         below >= 8, std::to_string(below) + "/10 seeds below");

  // (c) accuracy non-increasing across the read-noise sweep, mean of 10 seeds
  FloatNet base = FloatNet::init(spec, 2);
  train(base, train_set, 2);
  std::vector<double> means;
  for (double sigma : {0.0, 0.005, 0.02, 0.10}) {
    AnalogOptions opt = ideal_opt;
    opt.device.read_noise_rel_sigma = sigma;
    opt.noisy_read = sigma > 0.0;
    const AnalogNet net = AnalogNet::program_from(base, opt, 2);
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      mean += evaluate(net, test_set, 500 + seed).accuracy / 10.0;
    means.push_back(mean);
  }
  // estimator slack: one prediction out of the 10-seed x test-set pool
  const double slack = 1.0 / (10.0 * static_cast<double>(test_set.size()));
  bool monotone = true;
  for (std::size_t k = 1; k < means.size(); ++k)
    if (means[k] > means[k - 1] + slack) monotone = false;
  const bool dropped = means.back() <= means.front();
  std::string detail = "means";
  for (double m : means) detail += " " + fmt(m);
  report(11, "training (c): accuracy non-increasing over read-noise {0, 0.5%, 2%, 10%}",
         monotone && dropped, detail);
}

// 12. Reproducibility
void criterion_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "xbar_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "train.cfg");
    cfg << "dataset = " << (fs::path(XBAR_SOURCE_DIR) / "data/blobs_8x8.csv").string() << "\n";
    cfg << "train_count = 90\ndims = 64,8,3\nepochs = 2\neta = 0.3\npulse_length = 64\n";
    cfg << "device = rram\nnoisy_read = true\nmode = analog\nseed = 7\n";
  }
  auto run = [&](const std::string& out) {
    const std::string cmd = std::string(XBAR_CLI_PATH) + " train --config " +
                            (dir / "train.cfg").string() + " --out " + (dir / out).string() +
                            " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  auto slurp = [&](const std::string& out, const std::string& file) {
    std::ifstream in(dir / out / file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const int rc1 = run("a");
  const int rc2 = run("b");
  const bool ok = rc1 == 0 && rc2 == 0 && slurp("a", "metrics.csv") == slurp("b", "metrics.csv") &&
                  !slurp("a", "metrics.csv").empty() &&
                  slurp("a", "summary.json") == slurp("b", "summary.json") &&
                  slurp("a", "manifest.txt") == slurp("b", "manifest.txt");
  report(12, "reproducibility: identical manifest gives byte-identical CSV outputs", ok,
         rc1 == 0 && rc2 == 0 ? "outputs compared byte-for-byte" : "cli run failed");
  fs::remove_all(dir);
}

} // namespace

int main() {
  std::printf("crossbar simulator acceptance suite\n");
  criterion_adc_bits();
  criterion_speed_bound();
  criterion_resistance_bound();
  criterion_voltage_bound();
  criterion_energy_bound();
  criterion_bitslice_exact();
  criterion_ir_drop();
  criterion_device_dynamics();
  criterion_update_expectation();
  criterion_gradient_check();
  criterion_training();
  criterion_reproducibility();
  if (g_failures) {
    std::printf("%d criterion check(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
