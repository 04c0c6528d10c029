#pragma once

#include <string_view>

#include "sphreg/numeric.hpp"

namespace sphreg {

// Jacobian convention throughout: J(j, i) = ∂p_j / ∂o_i, output index is the row.

enum class ActivationKind { Softmax, SphericalFlat, SphericalExp };

std::string_view to_string(ActivationKind kind) noexcept;

/// Tolerance used by the Jacobian-from-output entry points to reject inputs
/// that are not on the simplex / sphere.
inline constexpr double kManifoldTolerance = 1e-9;

/// e^O / Σe^O. Max-shifted internally, so any finite O is accepted.
Vector softmax_forward(const Vector& logits);

/// Softmax Jacobian expressed only through P: diag(P) - P⊗P.
/// Throws DomainError when P is off the simplex by more than kManifoldTolerance.
Matrix softmax_jacobian(const Vector& probs);

/// ∂/∂O of -Σ y_k log softmax(O)_k, i.e. P - Y.
Vector softmax_xent_grad(const Vector& probs, const Vector& target);

/// O / ‖O‖.
Vector sflat_forward(const Vector& embedding);

/// (I - P⊗P) / ‖O‖ with P = O/‖O‖. Needs O itself: the scale is not
/// recoverable from P.
Matrix sflat_jacobian(const Vector& embedding);

/// Spherical exponential: p_j = e^{o_j} / sqrt(Σ_k e^{2 o_k}).
/// Maps R^{n+1} onto the strictly positive part of S^n.
Vector sexp_forward(const Vector& embedding);

/// Spherical-exponential Jacobian from the output alone:
///   J(j, i) = p_i (1 - p_i²)  for j == i
///   J(j, i) = -p_i² p_j       for j != i
/// which is (I - P⊗P)·diag(P). Throws DomainError when P is not strictly
/// positive or is off the unit sphere by more than kManifoldTolerance.
Matrix sexp_jacobian(const Vector& output);

/// Forward pass for any kind.
Vector activation_forward(ActivationKind kind, const Vector& embedding);

/// Analytic Jacobian at O for any kind (routes through the P-only forms for
/// softmax and spherical exponential).
Matrix activation_jacobian(ActivationKind kind, const Vector& embedding);

/// Jᵀ·upstream, the backward pass through an activation. `output` is the
/// cached forward result; `embedding` is only read for SphericalFlat.
Vector activation_backward(ActivationKind kind, const Vector& embedding, const Vector& output,
                           const Vector& upstream);

/// Max elementwise relative error between the analytic and the
/// central-difference Jacobian at O.
double grad_check(ActivationKind kind, const Vector& embedding, double eps = kDefaultFdEps);

}  // namespace sphreg
