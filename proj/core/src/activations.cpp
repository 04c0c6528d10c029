#include "sphreg/activations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sphreg {

namespace {

void require_nonempty_finite(const Vector& v, const char* op) {
  if (v.empty()) throw DimensionError(std::string(op) + ": empty input");
  if (!v.all_finite()) throw NonFiniteError(std::string(op) + ": non-finite input");
}

double max_entry(const Vector& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

std::string_view to_string(ActivationKind kind) noexcept {
  switch (kind) {
    case ActivationKind::Softmax:
      return "softmax";
    case ActivationKind::SphericalFlat:
      return "flat";
    case ActivationKind::SphericalExp:
      return "sexp";
  }
  return "unknown";
}

Vector softmax_forward(const Vector& logits) {
  require_nonempty_finite(logits, "softmax_forward");
  const double shift = max_entry(logits);
  Vector p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - shift);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

Matrix softmax_jacobian(const Vector& probs) {
  require_nonempty_finite(probs, "softmax_jacobian");
  double sum = 0.0;
  for (double p : probs) {
    if (p < -kManifoldTolerance) throw DomainError("softmax_jacobian: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kManifoldTolerance) {
    throw DomainError("softmax_jacobian: input is not on the probability simplex");
  }
  const std::size_t n = probs.size();
  Matrix jac(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      jac(j, i) = (i == j) ? probs[j] * (1.0 - probs[j]) : -probs[i] * probs[j];
    }
  }
  return jac;
}

Vector softmax_xent_grad(const Vector& probs, const Vector& target) {
  if (probs.size() != target.size()) throw DimensionError("softmax_xent_grad: length mismatch");
  return probs - target;
}

Vector sflat_forward(const Vector& embedding) {
  require_nonempty_finite(embedding, "sflat_forward");
  return l2_normalize(embedding);
}

Matrix sflat_jacobian(const Vector& embedding) {
  const Vector p = sflat_forward(embedding);
  const double inv_norm = 1.0 / embedding.norm();
  const std::size_t n = p.size();
  Matrix jac(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      jac(j, i) = ((i == j ? 1.0 : 0.0) - p[j] * p[i]) * inv_norm;
    }
  }
  return jac;
}

Vector sexp_forward(const Vector& embedding) {
  require_nonempty_finite(embedding, "sexp_forward");
  // e^{o_j - m} / sqrt(Σ e^{2(o_k - m)}) is identical to the unshifted form.
  const double shift = max_entry(embedding);
  Vector p(embedding.size());
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    p[i] = std::exp(embedding[i] - shift);
    sum_sq += p[i] * p[i];
  }
  const double inv = 1.0 / std::sqrt(sum_sq);
  for (double& x : p) x *= inv;
  return p;
}

Matrix sexp_jacobian(const Vector& output) {
  require_nonempty_finite(output, "sexp_jacobian");
  for (double p : output) {
    if (!(p > 0.0)) throw DomainError("sexp_jacobian: output must be strictly positive");
  }
  if (std::abs(dot(output, output) - 1.0) > kManifoldTolerance) {
    throw DomainError("sexp_jacobian: output is not on the unit sphere");
  }
  const std::size_t n = output.size();
  Matrix jac(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pi = output[i];
      jac(j, i) = (i == j) ? pi * (1.0 - pi * pi) : -pi * pi * output[j];
    }
  }
  return jac;
}

Vector activation_forward(ActivationKind kind, const Vector& embedding) {
  switch (kind) {
    case ActivationKind::Softmax:
      return softmax_forward(embedding);
    case ActivationKind::SphericalFlat:
      return sflat_forward(embedding);
    case ActivationKind::SphericalExp:
      return sexp_forward(embedding);
  }
  throw DomainError("activation_forward: unknown kind");
}

Matrix activation_jacobian(ActivationKind kind, const Vector& embedding) {
  switch (kind) {
    case ActivationKind::Softmax:
      return softmax_jacobian(softmax_forward(embedding));
    case ActivationKind::SphericalFlat:
      return sflat_jacobian(embedding);
    case ActivationKind::SphericalExp:
      return sexp_jacobian(sexp_forward(embedding));
  }
  throw DomainError("activation_jacobian: unknown kind");
}

Vector activation_backward(ActivationKind kind, const Vector& embedding, const Vector& output,
                           const Vector& upstream) {
  if (output.size() != upstream.size()) {
    throw DimensionError("activation_backward: gradient length mismatch");
  }
  // Closed forms of Jᵀ·g, O(n) instead of materializing J.
  const double pg = dot(output, upstream);
  Vector grad(output.size());
  switch (kind) {
    case ActivationKind::Softmax:
      // Jᵀg = P ∘ (g - ⟨P, g⟩)
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = output[i] * (upstream[i] - pg);
      return grad;
    case ActivationKind::SphericalFlat: {
      // Jᵀg = (g - P⟨P, g⟩) / ‖O‖
      const double inv_norm = 1.0 / embedding.norm();
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = (upstream[i] - output[i] * pg) * inv_norm;
      }
      return grad;
    }
    case ActivationKind::SphericalExp:
      // Jᵀg = diag(P)(I - P⊗P) g = P ∘ (g - P⟨P, g⟩)
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = output[i] * (upstream[i] - output[i] * pg);
      }
      return grad;
  }
  throw DomainError("activation_backward: unknown kind");
}

double grad_check(ActivationKind kind, const Vector& embedding, double eps) {
  const Matrix analytic = activation_jacobian(kind, embedding);
  const Matrix numeric =
      fd_jacobian([kind](const Vector& o) { return activation_forward(kind, o); }, embedding, eps);
  return max_relative_error(analytic, numeric);
}

}  // namespace sphreg
