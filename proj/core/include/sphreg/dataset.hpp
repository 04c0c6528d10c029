#pragma once

#include <vector>

#include "sphreg/heads.hpp"
#include "sphreg/numeric.hpp"

namespace sphreg {

/// Feature vectors paired with sphere targets. `raw_targets[i]` is the signed
/// target Y; `targets[i]` is its |Y| + sign-class decomposition.
struct SyntheticDataset {
  SphereKind kind = SphereKind::S1;
  std::vector<Vector> features;
  std::vector<SphereTarget> targets;
  std::vector<Vector> raw_targets;

  [[nodiscard]] std::size_t size() const noexcept { return features.size(); }

  /// Append one sample, encoding the target. Throws on invalid targets.
  void push_back(Vector feature, Vector raw_target);

  /// Throws DomainError if lengths disagree or any target fails its invariants.
  void validate() const;
};

}  // namespace sphreg
