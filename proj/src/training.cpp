#include "xbar/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "xbar/io.hpp"
#include "xbar/rng.hpp"

namespace xbar {

void NetworkSpec::validate() const {
  if (dims.size() < 2) throw ConfigError("network needs at least two layer dims");
  for (int d : dims)
    if (d < 1) throw ConfigError("layer dims must be >= 1");
  if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

void Dataset::validate() const {
  if (dim < 1 || n_classes < 1) throw ConfigError("dataset needs dim, n_classes >= 1");
  if (inputs.size() != labels.size()) throw ConfigError("inputs/labels size mismatch");
  for (const auto& v : inputs) {
    if (static_cast<int>(v.size()) != dim) throw ConfigError("dataset input dim mismatch");
    for (double x : v)
      if (!std::isfinite(x) || x < -1e-9 || x > 1.0 + 1e-9)
        throw ConfigError("dataset inputs must be finite and normalized to [0, 1]");
  }
  for (int l : labels)
    if (l < 0 || l >= n_classes) throw ConfigError("dataset label out of range");
}

Dataset Dataset::load_csv(const std::filesystem::path& path) {
  const CsvMatrix m = load_csv_matrix(path);
  if (m.cols < 2) throw ParseError(path.string() + ": need label plus at least one feature");
  Dataset d;
  d.dim = m.cols - 1;
  for (int i = 0; i < m.rows; ++i) {
    const double lab = m.at(i, 0);
    const int label = static_cast<int>(std::llround(lab));
    if (std::abs(lab - label) > 1e-9)
      throw ParseError(path.string() + ": non-integer label in row " + std::to_string(i + 1));
    d.labels.push_back(label);
    std::vector<double> row(d.dim);
    for (int j = 0; j < d.dim; ++j) row[j] = m.at(i, j + 1);
    d.inputs.push_back(std::move(row));
    d.n_classes = std::max(d.n_classes, label + 1);
  }
  d.validate();
  return d;
}

void Dataset::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out << labels[i];
    for (double x : inputs[i]) out << ',' << format_double(x);
    out << '\n';
  }
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError(path + ": truncated IDX header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

} // namespace

Dataset Dataset::load_idx(const std::filesystem::path& images,
                          const std::filesystem::path& labels) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw ConfigError("cannot open '" + images.string() + "'");
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw ConfigError("cannot open '" + labels.string() + "'");

  if (read_be32(img, images.string()) != 2051)
    throw ParseError(images.string() + ": bad IDX image magic");
  const std::uint32_t n = read_be32(img, images.string());
  const std::uint32_t h = read_be32(img, images.string());
  const std::uint32_t w = read_be32(img, images.string());
  if (read_be32(lab, labels.string()) != 2049)
    throw ParseError(labels.string() + ": bad IDX label magic");
  if (read_be32(lab, labels.string()) != n)
    throw ParseError(labels.string() + ": image/label count mismatch");

  Dataset d;
  d.dim = static_cast<int>(h * w);
  std::vector<unsigned char> pix(d.dim);
  for (std::uint32_t k = 0; k < n; ++k) {
    img.read(reinterpret_cast<char*>(pix.data()), d.dim);
    char c;
    lab.read(&c, 1);
    if (!img || !lab) throw ParseError(images.string() + ": truncated IDX payload");
    std::vector<double> row(d.dim);
    for (int j = 0; j < d.dim; ++j) row[j] = pix[j] / 255.0;
    d.inputs.push_back(std::move(row));
    d.labels.push_back(static_cast<unsigned char>(c));
    d.n_classes = std::max(d.n_classes, static_cast<int>(static_cast<unsigned char>(c)) + 1);
  }
  d.validate();
  return d;
}

Dataset Dataset::make_blobs(int dim, int n_classes, int per_class, double noise,
                            std::uint64_t seed, double separation) {
  if (dim < 1 || n_classes < 1 || per_class < 1)
    throw ConfigError("make_blobs needs positive dim, classes, per_class");
  Dataset d;
  d.dim = dim;
  d.n_classes = n_classes;
  std::vector<std::vector<double>> centers(n_classes, std::vector<double>(dim));
  Rng crng(substream(seed, "blob-centers"));
  for (auto& c : centers)
    for (double& x : c) x = 0.5 + (crng.uniform01() < 0.5 ? -separation : separation);
  Rng srng(substream(seed, "blob-samples"));
  for (int c = 0; c < n_classes; ++c) {
    for (int k = 0; k < per_class; ++k) {
      std::vector<double> row(dim);
      for (int j = 0; j < dim; ++j)
        row[j] = std::clamp(centers[c][j] + noise * srng.gaussian(), 0.0, 1.0);
      d.inputs.push_back(std::move(row));
      d.labels.push_back(c);
    }
  }
  d.validate();
  return d;
}

std::pair<Dataset, Dataset> Dataset::split(std::size_t first_count, std::uint64_t seed) const {
  if (first_count > size()) throw ConfigError("split size exceeds dataset");
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(substream(seed, "split"));
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  Dataset a, b;
  a.dim = b.dim = dim;
  a.n_classes = b.n_classes = n_classes;
  for (std::size_t k = 0; k < order.size(); ++k) {
    Dataset& dst = k < first_count ? a : b;
    dst.inputs.push_back(inputs[order[k]]);
    dst.labels.push_back(labels[order[k]]);
  }
  return {std::move(a), std::move(b)};
}

namespace {

double activate(Activation act, double z) {
  switch (act) {
  case Activation::relu: return z > 0.0 ? z : 0.0;
  case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

double activate_grad(Activation act, double z) {
  switch (act) {
  case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
  case Activation::sigmoid: {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 - s);
  }
  }
  return 1.0;
}

std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.size());
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    p[j] = std::exp(z[j] - zmax);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> init_layer_weights(int fan_in, int fan_out, Rng& rng) {
  // Uniform +-0.5/sqrt(fan_in), bias row at zero.
  std::vector<double> w(static_cast<std::size_t>(fan_in + 1) * fan_out, 0.0);
  const double bound = 0.5 / std::sqrt(static_cast<double>(fan_in));
  for (int i = 0; i < fan_in; ++i)
    for (int j = 0; j < fan_out; ++j)
      w[static_cast<std::size_t>(i) * fan_out + j] = rng.uniform(-bound, bound);
  return w;
}

} // namespace

FloatNet FloatNet::init(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  FloatNet net;
  net.spec_ = spec;
  Rng rng(substream(seed, "net-init"));
  for (int l = 0; l < spec.layer_count(); ++l)
    net.weights_.push_back(init_layer_weights(spec.dims[l], spec.dims[l + 1], rng));
  return net;
}

FloatNet::Trace FloatNet::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != spec_.dims.front())
    throw DimensionError("input dim mismatch");
  Trace t;
  t.inputs.emplace_back(x.begin(), x.end());
  for (int l = 0; l < spec_.layer_count(); ++l) {
    const int in = spec_.dims[l], out = spec_.dims[l + 1];
    const auto& w = weights_[l];
    const auto& a = t.inputs[l];
    std::vector<double> z(out, 0.0);
    for (int i = 0; i < in; ++i) {
      const double ai = a[i];
      if (ai == 0.0) continue;
      for (int j = 0; j < out; ++j) z[j] += w[static_cast<std::size_t>(i) * out + j] * ai;
    }
    for (int j = 0; j < out; ++j) z[j] += w[static_cast<std::size_t>(in) * out + j]; // bias
    t.pre.push_back(z);
    if (l + 1 < spec_.layer_count()) {
      std::vector<double> a2(out);
      for (int j = 0; j < out; ++j) a2[j] = activate(spec_.activation, z[j]);
      t.inputs.push_back(std::move(a2));
    } else {
      t.probs = softmax(z);
    }
  }
  return t;
}

std::vector<std::vector<double>> FloatNet::backward(const Trace& trace, int label) const {
  const int layers = spec_.layer_count();
  std::vector<std::vector<double>> deltas(layers);
  // Cross-entropy with softmax output: delta = p - onehot.
  deltas[layers - 1] = trace.probs;
  deltas[layers - 1][label] -= 1.0;
  for (int l = layers - 2; l >= 0; --l) {
    const int n = spec_.dims[l + 1];
    const int m = spec_.dims[l + 2];
    const auto& w = weights_[l + 1];
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double e = 0.0;
      for (int j = 0; j < m; ++j) e += w[static_cast<std::size_t>(i) * m + j] * deltas[l + 1][j];
      d[i] = e * activate_grad(spec_.activation, trace.pre[l][i]);
    }
    deltas[l] = std::move(d);
  }
  return deltas;
}

void FloatNet::sgd_step(const Trace& trace, const std::vector<std::vector<double>>& deltas) {
  for (int l = 0; l < spec_.layer_count(); ++l) {
    const int in = spec_.dims[l], out = spec_.dims[l + 1];
    auto& w = weights_[l];
    const auto& a = trace.inputs[l];
    const auto& d = deltas[l];
    for (int i = 0; i <= in; ++i) {
      const double xi = i < in ? a[i] : 1.0;
      if (xi == 0.0) continue;
      for (int j = 0; j < out; ++j)
        w[static_cast<std::size_t>(i) * out + j] -= spec_.eta * xi * d[j];
    }
  }
}

double FloatNet::loss(const Trace& trace, int label) const {
  return -std::log(std::max(trace.probs[label], 1e-300));
}

int FloatNet::predict(std::span<const double> x) const {
  const Trace t = forward(x);
  return static_cast<int>(
      std::max_element(t.probs.begin(), t.probs.end()) - t.probs.begin());
}

// -- analog network -----------------------------------------------------------

namespace {

double reference_conductance(const AnalogOptions& opt) {
  const DeviceParams& dev = opt.device;
  if (opt.zero_shift) {
    const SymmetryPoint sym = symmetry_point(dev);
    if (sym.kind == SymmetryPoint::Kind::at_point) return sym.g;
  }
  return 0.5 * (dev.g_min + dev.g_max);
}

/// Expected conductance step per coincident pulse, for rate calibration.
double expected_pulse_dg(const DeviceParams& dev) {
  if (dev.response_kind == ResponseKind::asymmetric_soft_bounds) {
    const SymmetryPoint sym = symmetry_point(dev);
    return dev.alpha_up * (dev.g_max - sym.g);
  }
  return dev.dg_mean;
}

} // namespace

AnalogNet AnalogNet::init(const NetworkSpec& spec, const AnalogOptions& options,
                          std::uint64_t seed) {
  const FloatNet ref = FloatNet::init(spec, seed);
  return program_from(ref, options, seed);
}

AnalogNet AnalogNet::program_from(const FloatNet& net, const AnalogOptions& options,
                                  std::uint64_t seed) {
  const NetworkSpec& spec = net.spec();
  spec.validate();
  options.device.validate();
  if (!(options.weight_clip > 0.0)) throw ConfigError("weight_clip must be > 0");

  AnalogNet out;
  out.spec_ = spec;
  out.options_ = options;
  const DeviceParams& dev = options.device;
  const double g_ref = reference_conductance(options);
  const double headroom = std::min(dev.g_max - g_ref, g_ref - dev.g_min);
  if (!(headroom > 0.0))
    throw ConfigError("device window leaves no headroom around the reference point");
  const double g_per_w = headroom / options.weight_clip;

  for (int l = 0; l < spec.layer_count(); ++l) {
    CrossbarConfig cfg = options.tile_base;
    cfg.rows = spec.dims[l] + 1; // +1 bias row
    cfg.cols = spec.dims[l + 1];
    if (cfg.adc_share > cfg.cols || cfg.cols % cfg.adc_share != 0) cfg.adc_share = 1;
    Layer layer;
    layer.g_per_w = g_per_w;
    layer.g_ref = g_ref;
    layer.plus = CrossbarState::make(cfg, dev, substream(seed, "layer-plus", l));
    layer.minus = CrossbarState::make(cfg, dev, substream(seed, "layer-minus", l));
    const auto& w = net.weights(l);
    for (int i = 0; i < cfg.rows; ++i)
      for (int j = 0; j < cfg.cols; ++j) {
        const double wij =
            std::clamp(w[static_cast<std::size_t>(i) * cfg.cols + j], -options.weight_clip,
                       options.weight_clip);
        layer.plus.set_cell(i, j, g_ref + 0.5 * wij * g_per_w);
        layer.minus.set_cell(i, j, g_ref - 0.5 * wij * g_per_w);
      }
    out.layers_.push_back(std::move(layer));
  }
  return out;
}

std::vector<double> AnalogNet::logical_weights(int l) const {
  const Layer& layer = layers_[l];
  const auto& cfg = layer.plus.config();
  std::vector<double> w(static_cast<std::size_t>(cfg.rows) * cfg.cols);
  for (int i = 0; i < cfg.rows; ++i)
    for (int j = 0; j < cfg.cols; ++j)
      w[static_cast<std::size_t>(i) * cfg.cols + j] =
          (layer.plus.at(i, j).g - layer.minus.at(i, j).g) / layer.g_per_w;
  return w;
}

namespace {

/// ADC energy/latency accounting for one full-array analog read; with
/// quantized_read the currents are actually passed through the converter.
std::vector<double> read_columns(const CrossbarState& tile, std::span<const double> v,
                                 const AnalogOptions& opt, std::uint64_t seed, MvmStats* stats) {
  std::vector<double> currents = opt.noisy_read ? mvm_nonideal(tile, v, seed, stats)
                                                : mvm_ideal(tile, v, stats);
  const auto& cfg = tile.config();
  if (opt.quantized_read) {
    const std::vector<int> codes = adc_quantize(currents, tile, stats);
    const double full_scale = cfg.adc_full_scale_charge > 0.0
                                  ? cfg.adc_full_scale_charge
                                  : cfg.rows * tile.device().g_max * cfg.v_read * cfg.t_int;
    const double levels = static_cast<double>((std::int64_t{1} << cfg.adc_bits) - 1);
    for (std::size_t j = 0; j < currents.size(); ++j)
      currents[j] = codes[j] / levels * full_scale / cfg.t_int;
  } else if (stats) {
    // Ideal converters still cost their sampling energy and mux slots.
    stats->adc_conversions += cfg.cols;
    stats->adc_energy += cfg.cols * cfg.adc_energy_per_sample;
    stats->conversion_slots += cfg.adc_share;
  }
  return currents;
}

} // namespace

AnalogNet::Trace AnalogNet::forward(std::span<const double> x, std::uint64_t seed,
                                    MvmStats* stats) const {
  if (static_cast<int>(x.size()) != spec_.dims.front())
    throw DimensionError("input dim mismatch");
  Trace t;
  t.inputs.emplace_back(x.begin(), x.end());
  for (int l = 0; l < spec_.layer_count(); ++l) {
    const Layer& layer = layers_[l];
    const auto& cfg = layer.plus.config();
    const int out = cfg.cols;
    const auto& a = t.inputs[l];
    // Activations are normalized to [0, 1] and drive the rows at a * v_read,
    // with the constant-1 bias row at full v_read.
    std::vector<double> v(cfg.rows, cfg.v_read);
    for (int i = 0; i + 1 < cfg.rows; ++i) v[i] = std::clamp(a[i], 0.0, 1.0) * cfg.v_read;

    const std::vector<double> ip =
        read_columns(layer.plus, v, options_, substream(seed, "fwd-p", l), stats);
    const std::vector<double> im =
        read_columns(layer.minus, v, options_, substream(seed, "fwd-m", l), stats);
    std::vector<double> z(out);
    for (int j = 0; j < out; ++j) z[j] = (ip[j] - im[j]) / (cfg.v_read * layer.g_per_w);
    t.pre.push_back(z);
    if (l + 1 < spec_.layer_count()) {
      std::vector<double> a2(out);
      for (int j = 0; j < out; ++j) a2[j] = activate(spec_.activation, z[j]);
      t.inputs.push_back(std::move(a2));
    } else {
      t.probs = softmax(z);
    }
  }
  return t;
}

std::vector<std::vector<double>> AnalogNet::backward(const Trace& trace, int label,
                                                     std::uint64_t seed, MvmStats* stats) const {
  const int layers = spec_.layer_count();
  std::vector<std::vector<double>> deltas(layers);
  deltas[layers - 1] = trace.probs;
  deltas[layers - 1][label] -= 1.0;
  for (int l = layers - 2; l >= 0; --l) {
    const Layer& layer = layers_[l + 1];
    const auto& cfg = layer.plus.config();
    const int n = spec_.dims[l + 1];
    const auto& d_next = deltas[l + 1];
    // Transposed read: drive the columns with the (rescaled) error vector,
    // sense the rows. Pulled back to weight units digitally.
    double dmax = 0.0;
    for (double dv : d_next) dmax = std::max(dmax, std::abs(dv));
    std::vector<double> d(n, 0.0);
    if (dmax > 0.0) {
      std::vector<double> v(cfg.cols);
      for (int j = 0; j < cfg.cols; ++j) v[j] = d_next[j] / dmax * cfg.v_read;
      const std::vector<double> ep = mvm_transposed(layer.plus, v, substream(seed, "bwd-p", l),
                                                    options_.noisy_read, stats);
      const std::vector<double> em = mvm_transposed(layer.minus, v, substream(seed, "bwd-m", l),
                                                    options_.noisy_read, stats);
      for (int i = 0; i < n; ++i) {
        const double e = (ep[i] - em[i]) / (cfg.v_read * layer.g_per_w) * dmax;
        d[i] = e * activate_grad(spec_.activation, trace.pre[l][i]);
      }
    }
    deltas[l] = std::move(d);
  }
  return deltas;
}

AnalogNet::StepReport AnalogNet::train_step(const Trace& trace,
                                            const std::vector<std::vector<double>>& deltas,
                                            std::uint64_t seed) {
  StepReport report;
  const DeviceParams& dev = options_.device;
  for (int l = 0; l < spec_.layer_count(); ++l) {
    Layer& layer = layers_[l];
    const auto& cfg = layer.plus.config();
    std::vector<double> x(cfg.rows, 1.0); // bias row fires at 1
    const auto& a = trace.inputs[l];
    for (int i = 0; i + 1 < cfg.rows; ++i) x[i] = std::clamp(a[i], 0.0, 1.0);

    const double dw_min = expected_pulse_dg(dev) / layer.g_per_w;
    const PulsePlan plan = build_pulse_plan(x, deltas[l], spec_.eta, options_.pulse_length,
                                            substream(seed, "plan", l), dw_min);
    try {
      CrossbarState* minus =
          options_.one_sided_pair_trick || dev.response_kind != ResponseKind::one_sided
              ? &layer.minus
              : nullptr;
      if (dev.response_kind == ResponseKind::one_sided && !options_.one_sided_pair_trick)
        throw UnsupportedError("one-sided device updates disabled without the pair trick");
      const UpdateReport r = apply_update(layer.plus, minus, plan, substream(seed, "upd", l));
      report.pulses += r.coincident_pulses;
      report.write_energy += r.write_energy;
      report.latency_slots = std::max(report.latency_slots, r.latency_slots);
    } catch (const UnsupportedError&) {
      if (!options_.reprogram_fallback) throw;
      // Full write-verify reprogram toward the float-updated weights.
      const std::vector<double> w = logical_weights(l);
      for (int i = 0; i < cfg.rows; ++i)
        for (int j = 0; j < cfg.cols; ++j) {
          const double xi = x[i];
          const double target =
              std::clamp(w[static_cast<std::size_t>(i) * cfg.cols + j] -
                             spec_.eta * xi * deltas[l][j],
                         -options_.weight_clip, options_.weight_clip);
          layer.plus.set_cell(i, j, layer.g_ref + 0.5 * target * layer.g_per_w);
          layer.minus.set_cell(i, j, layer.g_ref - 0.5 * target * layer.g_per_w);
        }
      report.fallback_reprograms += 1;
    }
  }
  return report;
}

int AnalogNet::predict(std::span<const double> x, std::uint64_t seed, MvmStats* stats) const {
  const Trace t = forward(x, seed, stats);
  return static_cast<int>(
      std::max_element(t.probs.begin(), t.probs.end()) - t.probs.begin());
}

void AnalogNet::advance_age(double seconds) {
  for (auto& layer : layers_) {
    layer.plus.advance_age(seconds);
    layer.minus.advance_age(seconds);
  }
}

// -- training loops -----------------------------------------------------------

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(substream(seed, "shuffle", static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

} // namespace

TrainResult train(FloatNet& net, const Dataset& data, std::uint64_t seed) {
  data.validate();
  TrainResult result;
  for (int epoch = 0; epoch < net.spec().epochs; ++epoch) {
    const auto order = epoch_order(data.size(), seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t k : order) {
      const FloatNet::Trace t = net.forward(data.inputs[k]);
      const auto deltas = net.backward(t, data.labels[k]);
      net.sgd_step(t, deltas);
      loss_sum += net.loss(t, data.labels[k]);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.mean_loss = loss_sum / static_cast<double>(data.size());
    int correct = 0;
    for (std::size_t k = 0; k < data.size(); ++k)
      correct += net.predict(data.inputs[k]) == data.labels[k] ? 1 : 0;
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    result.epochs.push_back(m);
  }
  return result;
}

TrainResult train(AnalogNet& net, const Dataset& data, std::uint64_t seed) {
  data.validate();
  TrainResult result;
  for (int epoch = 0; epoch < net.spec().epochs; ++epoch) {
    const auto order = epoch_order(data.size(), seed, epoch);
    double loss_sum = 0.0;
    std::int64_t pulses = 0;
    double energy = 0.0;
    std::size_t step = 0;
    for (std::size_t k : order) {
      const std::uint64_t step_seed =
          substream(seed, "step", static_cast<std::uint64_t>(epoch), step++);
      const AnalogNet::Trace t =
          net.forward(data.inputs[k], substream(step_seed, "f"), &result.mvm_stats);
      const auto deltas = net.backward(t, data.labels[k], substream(step_seed, "b"),
                                       &result.mvm_stats);
      const auto r = net.train_step(t, deltas, substream(step_seed, "u"));
      pulses += r.pulses;
      energy += r.write_energy;
      result.fallback_reprograms += r.fallback_reprograms;
      loss_sum += -std::log(std::max(t.probs[data.labels[k]], 1e-300));
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.mean_loss = loss_sum / static_cast<double>(data.size());
    m.pulses = pulses;
    m.update_energy = energy;
    int correct = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
      const std::uint64_t s = substream(seed, "eval", static_cast<std::uint64_t>(epoch), k);
      correct += net.predict(data.inputs[k], s) == data.labels[k] ? 1 : 0;
    }
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    result.epochs.push_back(m);
    result.total_pulses += pulses;
    result.update_energy += energy;
  }
  return result;
}

EvalReport evaluate(const FloatNet& net, const Dataset& data) {
  data.validate();
  EvalReport r;
  r.samples = static_cast<int>(data.size());
  for (std::size_t k = 0; k < data.size(); ++k)
    r.correct += net.predict(data.inputs[k]) == data.labels[k] ? 1 : 0;
  r.accuracy = r.samples ? static_cast<double>(r.correct) / r.samples : 0.0;
  return r;
}

EvalReport evaluate(const AnalogNet& net, const Dataset& data, std::uint64_t seed) {
  data.validate();
  EvalReport r;
  r.samples = static_cast<int>(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const int pred = net.predict(data.inputs[k], substream(seed, "eval-sample", k), &r.stats);
    r.correct += pred == data.labels[k] ? 1 : 0;
  }
  r.accuracy = r.samples ? static_cast<double>(r.correct) / r.samples : 0.0;
  return r;
}

} // namespace xbar
