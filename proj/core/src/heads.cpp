#include "sphreg/heads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sphreg/activations.hpp"

namespace sphreg {

namespace {

struct SignLayout {
  std::size_t dims;
  // Component with a forced sign, its sign, and whether one exists.
  bool has_fixed;
  std::size_t fixed_index;
  double fixed_sign;
};

SignLayout layout(SphereKind kind) {
  switch (kind) {
    case SphereKind::S1:
      return {2, false, 0, 1.0};
    case SphereKind::S2:
      return {3, true, 2, -1.0};
    case SphereKind::S3:
      return {4, true, 0, 1.0};
  }
  throw DomainError("unknown sphere kind");
}

void require_length(const Vector& v, std::size_t n, const char* op) {
  if (v.size() != n) {
    throw DimensionError(std::string(op) + ": expected " + std::to_string(n) +
                         " components, got " + std::to_string(v.size()));
  }
}

void require_same_length(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size() || a.empty()) {
    throw DimensionError(std::string(op) + ": length mismatch");
  }
}

void require_class(int sign_class, std::size_t classes, const char* op) {
  if (sign_class < 0 || static_cast<std::size_t>(sign_class) >= classes) {
    throw DomainError(std::string(op) + ": sign class " + std::to_string(sign_class) +
                      " out of range");
  }
}

}  // namespace

std::size_t sphere_dims(SphereKind kind) noexcept {
  switch (kind) {
    case SphereKind::S1:
      return 2;
    case SphereKind::S2:
      return 3;
    case SphereKind::S3:
      return 4;
  }
  return 0;
}

std::size_t sign_classes(SphereKind kind) noexcept {
  return kind == SphereKind::S3 ? 8 : 4;
}

std::string_view to_string(SphereKind kind) noexcept {
  switch (kind) {
    case SphereKind::S1:
      return "s1";
    case SphereKind::S2:
      return "s2";
    case SphereKind::S3:
      return "s3";
  }
  return "unknown";
}

SphereTarget encode_target(const Vector& y, SphereKind kind) {
  const SignLayout lay = layout(kind);
  require_length(y, lay.dims, "encode_target");
  if (!y.all_finite()) throw NonFiniteError("encode_target: non-finite target");
  if (std::abs(y.norm() - 1.0) > 1e-6) throw DomainError("encode_target: target is off the sphere");
  if (lay.has_fixed && y[lay.fixed_index] * lay.fixed_sign < 0.0) {
    throw DomainError("encode_target: fixed-sign component has the wrong sign");
  }
  SphereTarget t;
  t.kind = kind;
  t.abs = Vector(lay.dims);
  for (std::size_t i = 0; i < lay.dims; ++i) {
    t.abs[i] = std::abs(y[i]);
    if (lay.has_fixed && i == lay.fixed_index) continue;
    t.sign_class = (t.sign_class << 1) | (y[i] < 0.0 ? 1 : 0);
  }
  return t;
}

Vector decode_signs(int sign_class, SphereKind kind) {
  const SignLayout lay = layout(kind);
  require_class(sign_class, sign_classes(kind), "decode_signs");
  Vector signs(lay.dims, 1.0);
  const std::size_t free_count = lay.has_fixed ? lay.dims - 1 : lay.dims;
  std::size_t bit = free_count;
  for (std::size_t i = 0; i < lay.dims; ++i) {
    if (lay.has_fixed && i == lay.fixed_index) {
      signs[i] = lay.fixed_sign;
      continue;
    }
    --bit;
    signs[i] = ((sign_class >> bit) & 1) ? -1.0 : 1.0;
  }
  return signs;
}

Vector merge_prediction(const Vector& abs, int sign_class, SphereKind kind) {
  require_length(abs, sphere_dims(kind), "merge_prediction");
  const Vector signs = decode_signs(sign_class, kind);
  Vector out(abs.size());
  for (std::size_t i = 0; i < abs.size(); ++i) out[i] = signs[i] * std::abs(abs[i]);
  return out;
}

int argmax(const Vector& logits) {
  if (logits.empty()) throw DimensionError("argmax: empty input");
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

LossValue cosine_proximity_loss(const Vector& abs_pred, const Vector& abs_target) {
  require_same_length(abs_pred, abs_target, "cosine_proximity_loss");
  LossValue out;
  out.value = -dot(abs_pred, abs_target);
  out.grad_abs = -1.0 * abs_target;
  return out;
}

LossValue l2_sphere_loss(const Vector& abs_pred, const Vector& abs_target) {
  require_same_length(abs_pred, abs_target, "l2_sphere_loss");
  Vector diff = abs_pred - abs_target;
  LossValue out;
  out.value = dot(diff, diff);
  out.grad_abs = 2.0 * std::move(diff);
  return out;
}

LossValue xent_squares_loss(const Vector& pred, const Vector& target) {
  require_same_length(pred, target, "xent_squares_loss");
  LossValue out;
  out.grad_abs = Vector(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] > 0.0)) throw DomainError("xent_squares_loss: prediction must be strictly positive");
    const double y2 = target[i] * target[i];
    out.value -= y2 * 2.0 * std::log(pred[i]);
    out.grad_abs[i] = -2.0 * y2 / pred[i];
  }
  return out;
}

LossValue smooth_l1_loss(const Vector& output, const Vector& target) {
  require_same_length(output, target, "smooth_l1_loss");
  LossValue out;
  out.grad_abs = Vector(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double r = target[i] - output[i];
    if (std::abs(r) <= 1.0) {
      out.value += 0.5 * r * r;
      out.grad_abs[i] = -r;
    } else {
      out.value += std::abs(r) - 0.5;
      out.grad_abs[i] = r > 0.0 ? -1.0 : 1.0;
    }
  }
  return out;
}

LossValue sign_xent_loss(const Vector& logits, int sign_class) {
  require_class(sign_class, logits.size(), "sign_xent_loss");
  const auto k = static_cast<std::size_t>(sign_class);
  // log-sum-exp with max shift
  const double shift = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - shift);
  LossValue out;
  out.value = std::log(sum) + shift - logits[k];
  out.grad_logits = softmax_forward(logits);
  out.grad_logits[k] -= 1.0;
  return out;
}

std::string_view to_string(RegressionLoss loss) noexcept {
  switch (loss) {
    case RegressionLoss::Cosine:
      return "cosine";
    case RegressionLoss::L2:
      return "l2";
    case RegressionLoss::XentSquares:
      return "xent2";
    case RegressionLoss::SmoothL1:
      return "smoothl1";
  }
  return "unknown";
}

LossValue regression_loss(RegressionLoss loss, const Vector& pred, const Vector& target) {
  switch (loss) {
    case RegressionLoss::Cosine:
      return cosine_proximity_loss(pred, target);
    case RegressionLoss::L2:
      return l2_sphere_loss(pred, target);
    case RegressionLoss::XentSquares:
      return xent_squares_loss(pred, target);
    case RegressionLoss::SmoothL1:
      return smooth_l1_loss(pred, target);
  }
  throw DomainError("regression_loss: unknown loss");
}

LossValue joint_loss(const Vector& abs_pred, const Vector& abs_target, const Vector& logits,
                     int sign_class, double sign_weight) {
  if (!(sign_weight >= 0.0)) throw DomainError("joint_loss: weight must be non-negative");
  LossValue reg = cosine_proximity_loss(abs_pred, abs_target);
  const LossValue cls = sign_xent_loss(logits, sign_class);
  reg.value += sign_weight * cls.value;
  reg.grad_logits = sign_weight * cls.grad_logits;
  return reg;
}

}  // namespace sphreg
