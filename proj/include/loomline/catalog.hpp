#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loomline/classifier.hpp"
#include "loomline/repository.hpp"

namespace loomline {

struct CatalogEntry {
  ClassifierProfile profile;
  bool stored = false;  // false for built-in defaults
};

/// Built-in profiles followed by the store's profiles.
std::vector<CatalogEntry> available_profiles(const RunStore* store);

/// Classifier by name: "oracle", a built-in profile or a stored profile.
std::shared_ptr<const Classifier> find_classifier(const std::string& name,
                                                  const RunStore* store);

}  // namespace loomline
