#pragma once

#include <vector>

#include "sphreg/numeric.hpp"
#include "sphreg/rotations.hpp"

namespace sphreg {

/// Angular error summary. Angles in degrees, accuracies are fractions of
/// samples whose error is strictly below the threshold.
///
/// The rotation thresholds (π/6, π/12, π/24) and the normal thresholds
/// (11.25°, 22.5°, 30°) are both filled from the same error list, whichever
/// evaluator produced it.
struct EvalReport {
  std::size_t count = 0;
  double med_err = 0.0;
  double acc_pi6 = 0.0;
  double acc_pi12 = 0.0;
  double acc_pi24 = 0.0;
  double mean_err = 0.0;
  double median_err = 0.0;
  double acc_11_25 = 0.0;
  double acc_22_5 = 0.0;
  double acc_30 = 0.0;
};

/// Summarize per-sample angular errors given in radians. Throws DomainError
/// on an empty list.
EvalReport summarize_errors(const std::vector<double>& errors_rad);

/// Per-sample error is the geodesic distance between the two rotations.
EvalReport eval_rotation(const std::vector<RotationMatrix>& preds,
                         const std::vector<RotationMatrix>& gts);
EvalReport eval_rotation(const std::vector<Quaternion>& preds, const std::vector<Quaternion>& gts);
EvalReport eval_rotation(const std::vector<EulerAngles>& preds,
                         const std::vector<EulerAngles>& gts);

/// Per-sample error is acos(clamp(⟨p, g⟩)). Inputs must be unit within 1e-6.
EvalReport eval_normals(const std::vector<Vector>& preds, const std::vector<Vector>& gts);

double median(std::vector<double> values);

}  // namespace sphreg
