#include "sphreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sphreg {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

template <class A, class B>
void require_pairs(const std::vector<A>& preds, const std::vector<B>& gts, const char* op) {
  if (preds.empty()) throw DomainError(std::string(op) + ": empty prediction list");
  if (preds.size() != gts.size()) throw DimensionError(std::string(op) + ": length mismatch");
}

double fraction_below(const std::vector<double>& errors, double threshold) {
  const auto n = std::count_if(errors.begin(), errors.end(),
                               [threshold](double e) { return e < threshold; });
  return static_cast<double>(n) / static_cast<double>(errors.size());
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median: empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

EvalReport summarize_errors(const std::vector<double>& errors_rad) {
  if (errors_rad.empty()) throw DomainError("summarize_errors: empty error list");
  constexpr double pi = std::numbers::pi;
  EvalReport r;
  r.count = errors_rad.size();
  r.median_err = median(errors_rad) * kRadToDeg;
  r.med_err = r.median_err;
  double sum = 0.0;
  for (double e : errors_rad) sum += e;
  r.mean_err = sum / static_cast<double>(errors_rad.size()) * kRadToDeg;
  r.acc_pi6 = fraction_below(errors_rad, pi / 6);
  r.acc_pi12 = fraction_below(errors_rad, pi / 12);
  r.acc_pi24 = fraction_below(errors_rad, pi / 24);
  r.acc_11_25 = fraction_below(errors_rad, 11.25 / kRadToDeg);
  r.acc_22_5 = fraction_below(errors_rad, 22.5 / kRadToDeg);
  r.acc_30 = fraction_below(errors_rad, 30.0 / kRadToDeg);
  return r;
}

EvalReport eval_rotation(const std::vector<RotationMatrix>& preds,
                         const std::vector<RotationMatrix>& gts) {
  require_pairs(preds, gts, "eval_rotation");
  std::vector<double> errors(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) errors[i] = geodesic_distance(gts[i], preds[i]);
  return summarize_errors(errors);
}

EvalReport eval_rotation(const std::vector<Quaternion>& preds, const std::vector<Quaternion>& gts) {
  require_pairs(preds, gts, "eval_rotation");
  std::vector<RotationMatrix> p, g;
  p.reserve(preds.size());
  g.reserve(gts.size());
  for (const auto& q : preds) p.push_back(quat_to_matrix(q));
  for (const auto& q : gts) g.push_back(quat_to_matrix(q));
  return eval_rotation(p, g);
}

EvalReport eval_rotation(const std::vector<EulerAngles>& preds,
                         const std::vector<EulerAngles>& gts) {
  require_pairs(preds, gts, "eval_rotation");
  std::vector<RotationMatrix> p, g;
  p.reserve(preds.size());
  g.reserve(gts.size());
  for (const auto& e : preds) p.push_back(euler_to_matrix(e));
  for (const auto& e : gts) g.push_back(euler_to_matrix(e));
  return eval_rotation(p, g);
}

EvalReport eval_normals(const std::vector<Vector>& preds, const std::vector<Vector>& gts) {
  require_pairs(preds, gts, "eval_normals");
  std::vector<double> errors(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != 3 || gts[i].size() != 3) {
      throw DimensionError("eval_normals: expected 3-vectors");
    }
    if (std::abs(preds[i].norm() - 1.0) > 1e-6 || std::abs(gts[i].norm() - 1.0) > 1e-6) {
      throw DomainError("eval_normals: non-unit normal at index " + std::to_string(i));
    }
    errors[i] = std::acos(std::clamp(dot(preds[i], gts[i]), -1.0, 1.0));
  }
  return summarize_errors(errors);
}

}  // namespace sphreg
