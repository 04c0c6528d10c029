#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sphreg/activations.hpp"
#include "sphreg/dataset.hpp"
#include "sphreg/heads.hpp"
#include "sphreg/numeric.hpp"

namespace sphreg {

/// y = W x + b, W is out × in.
struct DenseLayer {
  Matrix weight;
  Vector bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out) : weight(out, in), bias(out) {}

  [[nodiscard]] std::size_t in() const noexcept { return weight.cols(); }
  [[nodiscard]] std::size_t out() const noexcept { return weight.rows(); }

  /// Weights ~ Normal(0, sqrt(2 / fan_in)), biases zero.
  void he_init(Rng& rng);
};

struct LayerGrad {
  Matrix weight;
  Vector bias;
};

/// Gradients laid out like the model's parameters, plus ∂L/∂O.
struct Gradients {
  std::vector<LayerGrad> trunk;
  LayerGrad reg_head;
  LayerGrad sign_head;
  Vector grad_embedding;

  void set_zero();
  Gradients& operator+=(const Gradients& rhs);
  Gradients& operator*=(double s);

  /// Name of the first parameter block holding a non-finite value, if any.
  [[nodiscard]] std::optional<std::string> first_non_finite() const;
};

struct Architecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;  // trunk widths; each layer is followed by ReLU
  std::size_t reg_dim = 0;          // n + 1
  std::size_t sign_dim = 0;         // number of sign classes
  std::optional<ActivationKind> activation;  // nullopt: direct regression, P = O
};

/// Default trunk widths for the experiments: input → 64 → 64 → 32 → heads.
Architecture default_architecture(std::size_t input_dim, SphereKind kind,
                                  std::optional<ActivationKind> activation);

struct ForwardResult {
  Vector embedding;  // O
  Vector output;     // P = activation(O), or O in direct mode
  Vector logits;     // sign-branch logits
};

/// Two-branch network: a ReLU trunk shared by a regression head (producing O,
/// then P through the sphere activation) and a sign-classification head.
class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(const Architecture& arch);

  /// Architecture with He-initialized weights.
  static MlpModel create(const Architecture& arch, Rng& rng);

  /// Runs the network and caches what backward() needs.
  ForwardResult forward(const Vector& x);

  /// Backward pass from the cached forward. Returns all parameter gradients
  /// and grad_embedding = Jᵀ · grad_output. Throws std::logic_error when no
  /// forward pass is cached.
  [[nodiscard]] Gradients backward(const Vector& grad_output, const Vector& grad_logits) const;

  /// Same as backward() but adds into `acc` (which must already be shaped by
  /// zero_gradients()) and returns ∂L/∂O.
  Vector accumulate_backward(const Vector& grad_output, const Vector& grad_logits,
                             Gradients& acc) const;

  [[nodiscard]] Gradients zero_gradients() const;

  /// θ ← θ - lr · g. Throws NonFiniteError naming the offending block when g
  /// is not finite, DomainError when lr is negative.
  void sgd_step(const Gradients& grads, double learning_rate);

  [[nodiscard]] const Architecture& architecture() const noexcept { return arch_; }
  [[nodiscard]] std::optional<ActivationKind> activation() const noexcept {
    return arch_.activation;
  }
  [[nodiscard]] std::vector<DenseLayer>& trunk() noexcept { return trunk_; }
  [[nodiscard]] const std::vector<DenseLayer>& trunk() const noexcept { return trunk_; }
  [[nodiscard]] DenseLayer& reg_head() noexcept { return reg_head_; }
  [[nodiscard]] const DenseLayer& reg_head() const noexcept { return reg_head_; }
  [[nodiscard]] DenseLayer& sign_head() noexcept { return sign_head_; }
  [[nodiscard]] const DenseLayer& sign_head() const noexcept { return sign_head_; }

  [[nodiscard]] std::size_t parameter_count() const noexcept;

  struct NamedTensor {
    std::string name;
    std::size_t rows;
    std::size_t cols;
    std::span<double> values;
  };
  struct ConstNamedTensor {
    std::string name;
    std::size_t rows;
    std::size_t cols;
    std::span<const double> values;
  };
  /// Views over every parameter tensor in a fixed order
  /// (trunk.K.weight, trunk.K.bias, ..., reg_head.*, sign_head.*).
  std::vector<NamedTensor> parameters();
  [[nodiscard]] std::vector<ConstNamedTensor> parameters() const;

  /// Flattened gradient in the same order as parameters().
  static std::vector<double> flatten(const Gradients& grads);

  /// Smallest |pre-activation| over trunk ReLUs in the cached forward pass;
  /// +inf when the trunk is empty.
  [[nodiscard]] double relu_margin() const;

 private:
  Architecture arch_;
  std::vector<DenseLayer> trunk_;
  DenseLayer reg_head_;
  DenseLayer sign_head_;

  struct Cache {
    std::vector<Vector> inputs;       // input to each trunk layer
    std::vector<Vector> pre_activations;
    Vector features;                  // trunk output
    Vector embedding;
    Vector output;
    bool valid = false;
  } cache_;
};

/// Per-sample loss for a forward result. Direct mode regresses the signed
/// target; sphere modes regress |Y| and add weight·sign cross-entropy.
struct SampleLoss {
  double value = 0.0;
  Vector grad_output;
  Vector grad_logits;
};
SampleLoss sample_loss(const ForwardResult& fwd, const Vector& raw_target,
                       const SphereTarget& target, RegressionLoss loss, bool use_sign_branch,
                       double sign_weight);

/// Merged on-sphere prediction from a forward result.
Vector predict_target(const ForwardResult& fwd, SphereKind kind, bool use_sign_branch);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  RegressionLoss loss = RegressionLoss::Cosine;
  double sign_weight = kDefaultSignWeight;
};

struct TrainRecord {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double loss = 0.0;         // mean per-sample loss over the batch
  double grad_O_norm = 0.0;  // mean per-sample ‖∂L/∂O‖₂ over the batch
};

/// Raised when a batch loss turns non-finite.
class TrainingDiverged : public NonFiniteError {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch, const std::string& what)
      : NonFiniteError(what), epoch_(epoch), batch_(batch) {}
  [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }
  [[nodiscard]] std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

struct TrainResult {
  MlpModel model;
  std::vector<TrainRecord> records;
};

/// Minibatch SGD with a seeded per-epoch permutation; batch gradient is the
/// mean over samples. Pure function of (model, dataset, config).
TrainResult train(MlpModel model, const SyntheticDataset& data, const TrainConfig& config);

/// Text checkpoint, format version 1:
///   sphreg-checkpoint 1
///   activation <none|flat|sexp|softmax>
///   tensor <name> <rows> <cols>
///   <rows lines of cols values, 17 significant digits>
///   ...
///   end
void save_checkpoint(std::ostream& os, const MlpModel& model);
MlpModel load_checkpoint(std::istream& is);

}  // namespace sphreg
