#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sphreg/numeric.hpp"

namespace sphreg {

struct GradCheckOptions {
  std::size_t trials = 1000;  // random draws per check
  double eps = kDefaultFdEps;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  std::size_t max_dim = 16;  // activation and loss vectors have 2..max_dim entries
};

struct GradCheckResult {
  std::string name;
  std::size_t trials = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  [[nodiscard]] bool passed() const noexcept { return max_rel_error <= tolerance; }
};

inline constexpr double kGradCheckTolerance = 1e-6;
inline constexpr double kModelGradCheckTolerance = 1e-5;

/// Analytic-vs-central-difference checks for the three activations, every
/// loss (plus the joint loss) and the full two-branch model in each
/// supported head/loss combination.
std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& options = {});

/// Just the full-model checks; exposed so tests can run them on their own.
std::vector<GradCheckResult> run_model_gradient_checks(const GradCheckOptions& options);

}  // namespace sphreg
