#include "sphreg/dataset.hpp"

#include <cmath>
#include <string>

namespace sphreg {

void SyntheticDataset::push_back(Vector feature, Vector raw_target) {
  targets.push_back(encode_target(raw_target, kind));
  features.push_back(std::move(feature));
  raw_targets.push_back(std::move(raw_target));
}

void SyntheticDataset::validate() const {
  if (features.size() != targets.size() || features.size() != raw_targets.size()) {
    throw DomainError("SyntheticDataset: field lengths disagree");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const SphereTarget& t = targets[i];
    if (t.kind != kind) throw DomainError("SyntheticDataset: target kind mismatch");
    if (t.sign_class < 0 || static_cast<std::size_t>(t.sign_class) >= sign_classes(kind)) {
      throw DomainError("SyntheticDataset: sign class out of range at " + std::to_string(i));
    }
    if (std::abs(t.abs.norm() - 1.0) > 1e-9) {
      throw DomainError("SyntheticDataset: target off the sphere at " + std::to_string(i));
    }
    const SphereTarget expect = encode_target(raw_targets[i], kind);
    if (expect.sign_class != t.sign_class) {
      throw DomainError("SyntheticDataset: stale sign class at " + std::to_string(i));
    }
  }
}

}  // namespace sphreg
