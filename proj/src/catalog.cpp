#include "loomline/catalog.hpp"

namespace loomline {

std::vector<CatalogEntry> available_profiles(const RunStore* store) {
  std::vector<CatalogEntry> out;
  for (auto& p : default_profiles()) out.push_back({std::move(p), false});
  if (store != nullptr) {
    for (auto& p : store->stored_profiles()) out.push_back({std::move(p), true});
  }
  return out;
}

std::shared_ptr<const Classifier> find_classifier(const std::string& name,
                                                  const RunStore* store) {
  if (name == OracleClassifier::kName) return std::make_shared<OracleClassifier>();
  for (auto& entry : available_profiles(store)) {
    if (entry.profile.name == name) {
      return std::make_shared<StochasticClassifier>(std::move(entry.profile));
    }
  }
  return nullptr;
}

}  // namespace loomline
