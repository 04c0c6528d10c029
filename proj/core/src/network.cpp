#include "sphreg/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sphreg {

namespace {

// y = W x + b into a preallocated output.
void affine(const DenseLayer& layer, const Vector& x, Vector& y) {
  const std::size_t out = layer.out();
  const std::size_t in = layer.in();
  if (x.size() != in) {
    throw DimensionError("DenseLayer: input width " + std::to_string(x.size()) + ", expected " +
                         std::to_string(in));
  }
  y = Vector(out);
  const double* w = layer.weight.data();
  const double* xv = x.data();
  for (std::size_t r = 0; r < out; ++r) {
    const double* row = w + r * in;
    double s = layer.bias[r];
    for (std::size_t c = 0; c < in; ++c) s += row[c] * xv[c];
    y[r] = s;
  }
}

// dW += g ⊗ x, db += g
void accumulate_outer(LayerGrad& grad, const Vector& g, const Vector& x) {
  const std::size_t in = x.size();
  double* w = grad.weight.data();
  for (std::size_t r = 0; r < g.size(); ++r) {
    const double gr = g[r];
    grad.bias[r] += gr;
    if (gr == 0.0) continue;
    double* row = w + r * in;
    for (std::size_t c = 0; c < in; ++c) row[c] += gr * x[c];
  }
}

// out += Wᵀ g
void add_transpose_times(const DenseLayer& layer, const Vector& g, Vector& out) {
  const std::size_t in = layer.in();
  const double* w = layer.weight.data();
  for (std::size_t r = 0; r < g.size(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* row = w + r * in;
    for (std::size_t c = 0; c < in; ++c) out[c] += row[c] * gr;
  }
}

LayerGrad zero_like(const DenseLayer& layer) {
  return LayerGrad{Matrix(layer.out(), layer.in()), Vector(layer.out())};
}

bool finite(const LayerGrad& g) { return g.weight.all_finite() && g.bias.all_finite(); }

void step(DenseLayer& layer, const LayerGrad& g, double lr) {
  double* w = layer.weight.data();
  const double* gw = g.weight.data();
  for (std::size_t i = 0; i < layer.weight.size(); ++i) w[i] -= lr * gw[i];
  for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * g.bias[i];
}

std::string activation_name(std::optional<ActivationKind> kind) {
  return kind ? std::string(to_string(*kind)) : std::string("none");
}

std::optional<ActivationKind> parse_activation_name(const std::string& s) {
  if (s == "none") return std::nullopt;
  if (s == "flat") return ActivationKind::SphericalFlat;
  if (s == "sexp") return ActivationKind::SphericalExp;
  if (s == "softmax") return ActivationKind::Softmax;
  throw DomainError("checkpoint: unknown activation '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------- DenseLayer

void DenseLayer::he_init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(in()));
  for (std::size_t i = 0; i < weight.size(); ++i) weight.data()[i] = stddev * rng.normal();
  for (double& b : bias) b = 0.0;
}

// ---------------------------------------------------------------- Gradients

void Gradients::set_zero() {
  auto clear = [](LayerGrad& g) {
    g.weight *= 0.0;
    g.bias *= 0.0;
  };
  for (auto& g : trunk) clear(g);
  clear(reg_head);
  clear(sign_head);
  grad_embedding *= 0.0;
}

Gradients& Gradients::operator+=(const Gradients& rhs) {
  if (trunk.size() != rhs.trunk.size()) throw DimensionError("Gradients: layout mismatch");
  for (std::size_t k = 0; k < trunk.size(); ++k) {
    trunk[k].weight += rhs.trunk[k].weight;
    trunk[k].bias += rhs.trunk[k].bias;
  }
  reg_head.weight += rhs.reg_head.weight;
  reg_head.bias += rhs.reg_head.bias;
  sign_head.weight += rhs.sign_head.weight;
  sign_head.bias += rhs.sign_head.bias;
  if (grad_embedding.size() == rhs.grad_embedding.size()) grad_embedding += rhs.grad_embedding;
  return *this;
}

Gradients& Gradients::operator*=(double s) {
  for (auto& g : trunk) {
    g.weight *= s;
    g.bias *= s;
  }
  reg_head.weight *= s;
  reg_head.bias *= s;
  sign_head.weight *= s;
  sign_head.bias *= s;
  grad_embedding *= s;
  return *this;
}

std::optional<std::string> Gradients::first_non_finite() const {
  for (std::size_t k = 0; k < trunk.size(); ++k) {
    if (!finite(trunk[k])) return "trunk." + std::to_string(k);
  }
  if (!finite(reg_head)) return std::string("reg_head");
  if (!finite(sign_head)) return std::string("sign_head");
  return std::nullopt;
}

// ---------------------------------------------------------------- MlpModel

Architecture default_architecture(std::size_t input_dim, SphereKind kind,
                                  std::optional<ActivationKind> activation) {
  return Architecture{input_dim, {64, 64, 32}, sphere_dims(kind), sign_classes(kind), activation};
}

MlpModel::MlpModel(const Architecture& arch) : arch_(arch) {
  if (arch.input_dim == 0 || arch.reg_dim == 0 || arch.sign_dim == 0) {
    throw DimensionError("MlpModel: zero-width layer");
  }
  std::size_t width = arch.input_dim;
  for (std::size_t h : arch.hidden) {
    if (h == 0) throw DimensionError("MlpModel: zero-width hidden layer");
    trunk_.emplace_back(width, h);
    width = h;
  }
  reg_head_ = DenseLayer(width, arch.reg_dim);
  sign_head_ = DenseLayer(width, arch.sign_dim);
}

MlpModel MlpModel::create(const Architecture& arch, Rng& rng) {
  MlpModel m(arch);
  for (auto& layer : m.trunk_) layer.he_init(rng);
  m.reg_head_.he_init(rng);
  m.sign_head_.he_init(rng);
  return m;
}

ForwardResult MlpModel::forward(const Vector& x) {
  cache_.valid = false;
  cache_.inputs.resize(trunk_.size());
  cache_.pre_activations.resize(trunk_.size());
  Vector h = x;
  for (std::size_t k = 0; k < trunk_.size(); ++k) {
    cache_.inputs[k] = h;
    affine(trunk_[k], h, cache_.pre_activations[k]);
    h = cache_.pre_activations[k];
    for (double& v : h) v = v > 0.0 ? v : 0.0;
  }
  ForwardResult out;
  affine(reg_head_, h, out.embedding);
  affine(sign_head_, h, out.logits);
  out.output = arch_.activation ? activation_forward(*arch_.activation, out.embedding)
                                : out.embedding;
  cache_.features = std::move(h);
  cache_.embedding = out.embedding;
  cache_.output = out.output;
  cache_.valid = true;
  return out;
}

Gradients MlpModel::zero_gradients() const {
  Gradients g;
  for (const auto& layer : trunk_) g.trunk.push_back(zero_like(layer));
  g.reg_head = zero_like(reg_head_);
  g.sign_head = zero_like(sign_head_);
  g.grad_embedding = Vector(arch_.reg_dim);
  return g;
}

Vector MlpModel::accumulate_backward(const Vector& grad_output, const Vector& grad_logits,
                                     Gradients& acc) const {
  if (!cache_.valid) throw std::logic_error("MlpModel::backward called before forward");
  if (grad_output.size() != arch_.reg_dim || grad_logits.size() != arch_.sign_dim) {
    throw DimensionError("MlpModel::backward: loss gradient width mismatch");
  }
  // Chain through the sphere activation: ∂L/∂O = Jᵀ ∂L/∂P.
  Vector grad_embedding =
      arch_.activation
          ? activation_backward(*arch_.activation, cache_.embedding, cache_.output, grad_output)
          : grad_output;

  accumulate_outer(acc.reg_head, grad_embedding, cache_.features);
  accumulate_outer(acc.sign_head, grad_logits, cache_.features);

  if (trunk_.empty()) return grad_embedding;

  Vector grad_h(cache_.features.size());
  add_transpose_times(reg_head_, grad_embedding, grad_h);
  add_transpose_times(sign_head_, grad_logits, grad_h);

  for (std::size_t k = trunk_.size(); k-- > 0;) {
    const Vector& z = cache_.pre_activations[k];
    for (std::size_t i = 0; i < grad_h.size(); ++i) {
      if (!(z[i] > 0.0)) grad_h[i] = 0.0;
    }
    accumulate_outer(acc.trunk[k], grad_h, cache_.inputs[k]);
    if (k == 0) break;
    Vector next(trunk_[k].in());
    add_transpose_times(trunk_[k], grad_h, next);
    grad_h = std::move(next);
  }
  return grad_embedding;
}

Gradients MlpModel::backward(const Vector& grad_output, const Vector& grad_logits) const {
  Gradients g = zero_gradients();
  g.grad_embedding = accumulate_backward(grad_output, grad_logits, g);
  return g;
}

void MlpModel::sgd_step(const Gradients& grads, double learning_rate) {
  if (!(learning_rate >= 0.0)) throw DomainError("sgd_step: learning rate must be non-negative");
  if (grads.trunk.size() != trunk_.size()) throw DimensionError("sgd_step: gradient layout mismatch");
  if (auto bad = grads.first_non_finite()) {
    throw NonFiniteError("sgd_step: non-finite gradient in " + *bad);
  }
  for (std::size_t k = 0; k < trunk_.size(); ++k) step(trunk_[k], grads.trunk[k], learning_rate);
  step(reg_head_, grads.reg_head, learning_rate);
  step(sign_head_, grads.sign_head, learning_rate);
}

std::size_t MlpModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : trunk_) n += l.weight.size() + l.bias.size();
  n += reg_head_.weight.size() + reg_head_.bias.size();
  n += sign_head_.weight.size() + sign_head_.bias.size();
  return n;
}

std::vector<MlpModel::NamedTensor> MlpModel::parameters() {
  std::vector<NamedTensor> out;
  auto add = [&out](const std::string& prefix, DenseLayer& l) {
    out.push_back({prefix + ".weight", l.out(), l.in(), {l.weight.data(), l.weight.size()}});
    out.push_back({prefix + ".bias", l.out(), 1, l.bias.span()});
  };
  for (std::size_t k = 0; k < trunk_.size(); ++k) add("trunk." + std::to_string(k), trunk_[k]);
  add("reg_head", reg_head_);
  add("sign_head", sign_head_);
  return out;
}

std::vector<MlpModel::ConstNamedTensor> MlpModel::parameters() const {
  std::vector<ConstNamedTensor> out;
  auto add = [&out](const std::string& prefix, const DenseLayer& l) {
    out.push_back({prefix + ".weight", l.out(), l.in(), {l.weight.data(), l.weight.size()}});
    out.push_back({prefix + ".bias", l.out(), 1, l.bias.span()});
  };
  for (std::size_t k = 0; k < trunk_.size(); ++k) add("trunk." + std::to_string(k), trunk_[k]);
  add("reg_head", reg_head_);
  add("sign_head", sign_head_);
  return out;
}

std::vector<double> MlpModel::flatten(const Gradients& grads) {
  std::vector<double> out;
  auto add = [&out](const LayerGrad& g) {
    out.insert(out.end(), g.weight.values().begin(), g.weight.values().end());
    out.insert(out.end(), g.bias.begin(), g.bias.end());
  };
  for (const auto& g : grads.trunk) add(g);
  add(grads.reg_head);
  add(grads.sign_head);
  return out;
}

double MlpModel::relu_margin() const {
  if (!cache_.valid) throw std::logic_error("MlpModel::relu_margin called before forward");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& z : cache_.pre_activations)
    for (double v : z) m = std::min(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------- losses

SampleLoss sample_loss(const ForwardResult& fwd, const Vector& raw_target,
                       const SphereTarget& target, RegressionLoss loss, bool use_sign_branch,
                       double sign_weight) {
  SampleLoss out;
  if (!use_sign_branch) {
    const LossValue reg = regression_loss(loss, fwd.output, raw_target);
    out.value = reg.value;
    out.grad_output = reg.grad_abs;
    out.grad_logits = Vector(fwd.logits.size());
    return out;
  }
  const LossValue reg = regression_loss(loss, fwd.output, target.abs);
  const LossValue cls = sign_xent_loss(fwd.logits, target.sign_class);
  out.value = reg.value + sign_weight * cls.value;
  out.grad_output = reg.grad_abs;
  out.grad_logits = sign_weight * cls.grad_logits;
  return out;
}

Vector predict_target(const ForwardResult& fwd, SphereKind kind, bool use_sign_branch) {
  Vector pred = use_sign_branch ? merge_prediction(fwd.output, argmax(fwd.logits), kind)
                                : fwd.output;
  if (!(pred.norm() > 0.0) || !pred.all_finite()) {
    // Degenerate output carries no direction; fall back to the first basis vector.
    pred = Vector(pred.size());
    pred[0] = 1.0;
    return pred;
  }
  return l2_normalize(pred);
}

// ---------------------------------------------------------------- training

TrainResult train(MlpModel model, const SyntheticDataset& data, const TrainConfig& config) {
  if (config.epochs == 0) throw DomainError("train: epochs must be at least 1");
  if (config.batch_size == 0) throw DomainError("train: batch size must be at least 1");
  if (!(config.learning_rate > 0.0)) throw DomainError("train: learning rate must be positive");
  if (data.size() == 0) throw DomainError("train: empty dataset");
  const Architecture& arch = model.architecture();
  if (arch.reg_dim != sphere_dims(data.kind) || arch.sign_dim != sign_classes(data.kind)) {
    throw DimensionError("train: model heads do not match the dataset sphere");
  }

  const bool use_sign = arch.activation.has_value();
  Rng rng(config.seed);
  Gradients grads = model.zero_gradients();
  TrainResult result;
  const std::size_t n = data.size();
  const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
  result.records.reserve(config.epochs * batches);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = rng.permutation(n);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      grads.set_zero();
      double loss_sum = 0.0;
      double grad_norm_sum = 0.0;
      for (std::size_t j = begin; j < end; ++j) {
        const std::size_t i = order[j];
        const ForwardResult fwd = model.forward(data.features[i]);
        const SampleLoss sl = sample_loss(fwd, data.raw_targets[i], data.targets[i], config.loss,
                                          use_sign, config.sign_weight);
        const Vector grad_o = model.accumulate_backward(sl.grad_output, sl.grad_logits, grads);
        loss_sum += sl.value;
        grad_norm_sum += grad_o.norm();
      }
      const double m = static_cast<double>(end - begin);
      TrainRecord rec{epoch, b, loss_sum / m, grad_norm_sum / m};
      if (!std::isfinite(rec.loss) || !std::isfinite(rec.grad_O_norm)) {
        throw TrainingDiverged(epoch, b,
                               "train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(b));
      }
      grads *= 1.0 / m;
      model.sgd_step(grads, config.learning_rate);
      result.records.push_back(rec);
    }
  }
  result.model = std::move(model);
  return result;
}

// ---------------------------------------------------------------- checkpoint

void save_checkpoint(std::ostream& os, const MlpModel& model) {
  os << "sphreg-checkpoint 1\n";
  os << "activation " << activation_name(model.activation()) << '\n';
  char buf[64];
  for (const auto& t : model.parameters()) {
    os << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", t.values[r * t.cols + c]);
        os << (c ? " " : "") << buf;
      }
      os << '\n';
    }
  }
  os << "end\n";
}

MlpModel load_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "sphreg-checkpoint") {
    throw DomainError("checkpoint: missing header");
  }
  if (version != 1) throw DomainError("checkpoint: unsupported version " + std::to_string(version));
  std::string key, act;
  if (!(is >> key >> act) || key != "activation") throw DomainError("checkpoint: missing activation");

  struct Tensor {
    std::size_t rows, cols;
    std::vector<double> values;
  };
  std::map<std::string, Tensor> tensors;
  while (is >> key && key != "end") {
    if (key != "tensor") throw DomainError("checkpoint: unexpected token '" + key + "'");
    std::string name;
    Tensor t{};
    if (!(is >> name >> t.rows >> t.cols)) throw DomainError("checkpoint: bad tensor header");
    t.values.resize(t.rows * t.cols);
    for (double& v : t.values) {
      if (!(is >> v)) throw DomainError("checkpoint: truncated tensor " + name);
    }
    tensors[name] = std::move(t);
  }
  if (key != "end") throw DomainError("checkpoint: missing end marker");

  auto need = [&tensors](const std::string& name) -> const Tensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DomainError("checkpoint: missing tensor " + name);
    return it->second;
  };

  Architecture arch;
  arch.activation = parse_activation_name(act);
  std::size_t depth = 0;
  while (tensors.count("trunk." + std::to_string(depth) + ".weight")) ++depth;
  for (std::size_t k = 0; k < depth; ++k) {
    const Tensor& w = need("trunk." + std::to_string(k) + ".weight");
    if (k == 0) arch.input_dim = w.cols;
    arch.hidden.push_back(w.rows);
  }
  const Tensor& reg_w = need("reg_head.weight");
  const Tensor& sign_w = need("sign_head.weight");
  if (depth == 0) arch.input_dim = reg_w.cols;
  arch.reg_dim = reg_w.rows;
  arch.sign_dim = sign_w.rows;

  MlpModel model(arch);
  for (auto& p : model.parameters()) {
    const Tensor& t = need(p.name);
    if (t.rows != p.rows || t.cols != p.cols) {
      throw DimensionError("checkpoint: shape mismatch for " + p.name);
    }
    std::copy(t.values.begin(), t.values.end(), p.values.begin());
  }
  return model;
}

}  // namespace sphreg
