#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xbar/bitslice.hpp"
#include "xbar/crossbar.hpp"
#include "xbar/update.hpp"

namespace xbar {

enum class Activation { relu, sigmoid };

/// Fully connected network trained one sample at a time (pulse updates are
/// per-sample rank-1 outer products).
struct NetworkSpec {
  std::vector<int> dims; ///< e.g. {64, 16, 3}
  Activation activation = Activation::sigmoid;
  double eta = 0.1;
  int epochs = 3;
  std::uint64_t seed = 1;

  int layer_count() const { return static_cast<int>(dims.size()) - 1; }
  void validate() const;
};

struct Dataset {
  int dim = 0;
  int n_classes = 0;
  std::vector<std::vector<double>> inputs; ///< normalized to [0, 1]
  std::vector<int> labels;

  std::size_t size() const { return inputs.size(); }
  void validate() const;

  /// CSV rows "label,f0,f1,...", features already in [0, 1].
  static Dataset load_csv(const std::filesystem::path& path);
  void save_csv(const std::filesystem::path& path) const;
  /// MNIST-style IDX pair (images + labels); pixels are scaled by 1/255.
  static Dataset load_idx(const std::filesystem::path& images,
                          const std::filesystem::path& labels);
  /// Synthetic Gaussian blob classes; seeded centers sit at 0.5 +- separation
  /// per coordinate, samples add N(0, noise) clipped to [0, 1].
  static Dataset make_blobs(int dim, int n_classes, int per_class, double noise,
                            std::uint64_t seed, double separation = 0.3);
  /// Deterministic shuffled split; first part has `first_count` samples.
  std::pair<Dataset, Dataset> split(std::size_t first_count, std::uint64_t seed) const;
};

/// Plain float reference implementation (the training oracle).
class FloatNet {
public:
  struct Trace {
    std::vector<std::vector<double>> inputs; ///< per-layer inputs, inputs[0] = x
    std::vector<std::vector<double>> pre;    ///< per-layer pre-activations
    std::vector<double> probs;               ///< softmax output
  };

  static FloatNet init(const NetworkSpec& spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  /// Layer l weights, (dims[l]+1) x dims[l+1] row-major; last row is the bias.
  std::vector<double>& weights(int layer) { return weights_[layer]; }
  const std::vector<double>& weights(int layer) const { return weights_[layer]; }

  Trace forward(std::span<const double> x) const;
  /// Per-layer error vectors d(loss)/d(pre-activation).
  std::vector<std::vector<double>> backward(const Trace& trace, int label) const;
  void sgd_step(const Trace& trace, const std::vector<std::vector<double>>& deltas);
  double loss(const Trace& trace, int label) const;
  int predict(std::span<const double> x) const;

private:
  NetworkSpec spec_;
  std::vector<std::vector<double>> weights_;
};

/// How a logical network maps onto analog differential tiles.
struct AnalogOptions {
  DeviceParams device;
  CrossbarConfig tile_base;   ///< electrical parameters; rows/cols set per layer
  double weight_clip = 2.0;   ///< logical weights live in [-clip, clip]
  bool zero_shift = true;     ///< reference the pair at the symmetry point
  bool noisy_read = false;    ///< forward/backward through the nonideal path
  bool quantized_read = false; ///< pass column currents through the ADC
  int pulse_length = 32;      ///< L, slots per update sub-phase
  bool one_sided_pair_trick = true; ///< realize "down" as up on the minus tile
  bool reprogram_fallback = false;  ///< full write-verify reprogram when updates
                                    ///< are unsupported on this device
};

/// A network stored on crossbar tiles: one differential pair per layer, bias
/// as a constant-1 appended input row.
class AnalogNet {
public:
  struct Layer {
    CrossbarState plus;
    CrossbarState minus;
    double g_per_w = 0.0; ///< siemens of pair difference per weight unit
    double g_ref = 0.0;   ///< conductance both members start from at weight 0
  };

  using Trace = FloatNet::Trace;

  /// Random initialization (same distribution as FloatNet::init).
  static AnalogNet init(const NetworkSpec& spec, const AnalogOptions& options,
                        std::uint64_t seed);
  /// Weight transfer from a trained float model (ideal write channel).
  static AnalogNet program_from(const FloatNet& net, const AnalogOptions& options,
                                std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  const AnalogOptions& options() const { return options_; }
  Layer& layer(int l) { return layers_[l]; }
  const Layer& layer(int l) const { return layers_[l]; }

  /// Logical weights of a layer read back from the pair, (dims[l]+1) x dims[l+1].
  std::vector<double> logical_weights(int l) const;

  Trace forward(std::span<const double> x, std::uint64_t seed, MvmStats* stats = nullptr) const;
  std::vector<std::vector<double>> backward(const Trace& trace, int label, std::uint64_t seed,
                                            MvmStats* stats = nullptr) const;

  struct StepReport {
    std::int64_t pulses = 0;
    double write_energy = 0.0;
    std::int64_t latency_slots = 0;
    std::int64_t fallback_reprograms = 0;
  };
  /// One w <- w - eta*x*delta^T update through pulse coincidence.
  StepReport train_step(const Trace& trace, const std::vector<std::vector<double>>& deltas,
                        std::uint64_t seed);

  int predict(std::span<const double> x, std::uint64_t seed, MvmStats* stats = nullptr) const;
  /// Advances retention age on every tile (drift).
  void advance_age(double seconds);

private:
  NetworkSpec spec_;
  AnalogOptions options_;
  std::vector<Layer> layers_;
};

struct EpochMetrics {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  std::int64_t pulses = 0;
  double update_energy = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  MvmStats mvm_stats;          ///< forward + backward accounting
  std::int64_t total_pulses = 0;
  double update_energy = 0.0;
  std::int64_t fallback_reprograms = 0;
};

TrainResult train(FloatNet& net, const Dataset& data, std::uint64_t seed);
TrainResult train(AnalogNet& net, const Dataset& data, std::uint64_t seed);

struct EvalReport {
  int samples = 0;
  int correct = 0;
  double accuracy = 0.0;
  MvmStats stats;
};

EvalReport evaluate(const FloatNet& net, const Dataset& data);
EvalReport evaluate(const AnalogNet& net, const Dataset& data, std::uint64_t seed);

} // namespace xbar
