#pragma once

#include <array>
#include <string_view>

#include "sphreg/numeric.hpp"

namespace sphreg {

// Which sphere a regression target lives on.
//   S1: [cos φ, sin φ], both signs free                    -> 4 classes
//   S2: [N_x, N_y, N_z], N_z ≤ 0 fixed, N_x/N_y free       -> 4 classes
//   S3: [a, b, c, d] quaternion, a ≥ 0 fixed, b/c/d free   -> 8 classes
enum class SphereKind { S1, S2, S3 };

std::size_t sphere_dims(SphereKind kind) noexcept;
std::size_t sign_classes(SphereKind kind) noexcept;
std::string_view to_string(SphereKind kind) noexcept;

/// Target split into magnitudes and a sign-pattern class.
struct SphereTarget {
  Vector abs;
  int sign_class = 0;
  SphereKind kind = SphereKind::S1;
};

/// Loss value with gradients. `grad_abs` is w.r.t. the regression output
/// (|P|, or O for direct regression); `grad_logits` is w.r.t. the sign logits
/// and empty for pure regression losses.
struct LossValue {
  double value = 0.0;
  Vector grad_abs;
  Vector grad_logits;
};

/// Sign-class bit rule: the free components are taken in position order,
/// a negative component sets its bit, and the first free component is the
/// most significant bit. An exact zero counts as positive.
SphereTarget encode_target(const Vector& y, SphereKind kind);

/// Full sign vector (±1 per component) for a class, fixed components included.
Vector decode_signs(int sign_class, SphereKind kind);

/// sign ∘ abs, elementwise.
Vector merge_prediction(const Vector& abs, int sign_class, SphereKind kind);

/// Index of the largest logit (first one on ties).
int argmax(const Vector& logits);

/// -⟨|P|, |Y|⟩; gradient -|Y|.
LossValue cosine_proximity_loss(const Vector& abs_pred, const Vector& abs_target);

/// ‖|P| - |Y|‖²; gradient 2(|P| - |Y|). On the sphere this equals
/// 2 + 2·cosine_proximity.
LossValue l2_sphere_loss(const Vector& abs_pred, const Vector& abs_target);

/// Cross-entropy between Y² and P²: -Σ y_i² log p_i²; gradient -2 y_i² / p_i.
/// Throws DomainError when any p_i ≤ 0.
LossValue xent_squares_loss(const Vector& pred, const Vector& target);

/// Σ smooth-L1(y_i - o_i) with unit transition point.
LossValue smooth_l1_loss(const Vector& output, const Vector& target);

/// -log softmax(logits)[class]; gradient softmax(logits) - onehot(class).
LossValue sign_xent_loss(const Vector& logits, int sign_class);

enum class RegressionLoss { Cosine, L2, XentSquares, SmoothL1 };

std::string_view to_string(RegressionLoss loss) noexcept;

/// Dispatch to one of the regression losses above.
LossValue regression_loss(RegressionLoss loss, const Vector& pred, const Vector& target);

inline constexpr double kDefaultSignWeight = 1.0;

/// cosine_proximity + weight · sign_xent.
LossValue joint_loss(const Vector& abs_pred, const Vector& abs_target, const Vector& logits,
                     int sign_class, double sign_weight = kDefaultSignWeight);

}  // namespace sphreg
