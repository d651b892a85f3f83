#include "loomline/classifier.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "loomline/scenario.hpp"

namespace loomline {

double ClassifierProfile::uniform_prior_accuracy() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < kMaterialCount; ++i) sum += confusion_probabilities[i][i];
  return sum / static_cast<double>(kMaterialCount);
}

void validate_profile(const ClassifierProfile& profile) {
  std::vector<Violation> out;
  if (profile.name.empty()) out.push_back({"name", "\"\"", "non-empty text"});
  if (profile.layer_count < 1) {
    out.push_back({"layer_count", std::to_string(profile.layer_count), "[1,inf)"});
  }
  if (profile.parameter_count < 1) {
    out.push_back({"parameter_count", std::to_string(profile.parameter_count), "[1,inf)"});
  }
  for (std::size_t r = 0; r < kMaterialCount; ++r) {
    const auto& row = profile.confusion_probabilities[r];
    double sum = 0.0;
    bool in_range = true;
    for (double p : row) {
      in_range = in_range && p >= 0.0 && p <= 1.0;
      sum += p;
    }
    if (!in_range || std::abs(sum - 1.0) > 1e-9) {
      out.push_back({fmt::format("confusion_probabilities[{}]", r), Json(row).dump(),
                     "entries in [0,1] summing to 1 (tolerance 1e-9)"});
    }
  }
  if (!out.empty()) throw ValidationError(std::move(out));
}

Json profile_to_json(const ClassifierProfile& profile) {
  Json doc = Json::object();
  doc["name"] = profile.name;
  doc["layer_count"] = profile.layer_count;
  doc["parameter_count"] = profile.parameter_count;
  doc["confusion_probabilities"] = profile.confusion_probabilities;
  return doc;
}

ClassifierProfile profile_from_json(const Json& doc) {
  if (!doc.is_object()) {
    throw ValidationError({{"(document)", doc.dump(), "a JSON object"}});
  }
  std::vector<Violation> out;
  for (const auto& [key, value] : doc.items()) {
    if (key != "name" && key != "layer_count" && key != "parameter_count" &&
        key != "confusion_probabilities") {
      out.push_back({key, value.dump(), "no such field"});
    }
  }
  ClassifierProfile p;
  const auto name = doc.find("name");
  if (name == doc.end() || !name->is_string()) {
    out.push_back({"name", name == doc.end() ? "(missing)" : name->dump(), "text"});
  } else {
    p.name = name->get<std::string>();
  }
  for (const char* field : {"layer_count", "parameter_count"}) {
    const auto it = doc.find(field);
    if (it == doc.end() || !it->is_number_integer()) {
      out.push_back({field, it == doc.end() ? "(missing)" : it->dump(), "an integer"});
      continue;
    }
    (std::string_view(field) == "layer_count" ? p.layer_count : p.parameter_count) =
        it->get<std::int64_t>();
  }
  const auto matrix = doc.find("confusion_probabilities");
  bool shape_ok = matrix != doc.end() && matrix->is_array() &&
                  matrix->size() == kMaterialCount;
  if (shape_ok) {
    for (const auto& row : *matrix) {
      shape_ok = shape_ok && row.is_array() && row.size() == kMaterialCount;
      if (!shape_ok) break;
      for (const auto& v : row) shape_ok = shape_ok && v.is_number();
    }
  }
  if (shape_ok) {
    p.confusion_probabilities = matrix->get<ConfusionProbabilities>();
  } else {
    out.push_back({"confusion_probabilities",
                   matrix == doc.end() ? "(missing)" : matrix->dump(),
                   "a 5x5 array of numbers"});
  }
  if (!out.empty()) throw ValidationError(std::move(out));
  validate_profile(p);
  return p;
}

namespace {

struct DefaultModel {
  const char* name;
  std::int64_t layers;
  std::int64_t parameters;
  PublishedScores published;
};

constexpr std::array<DefaultModel, 4> kDefaultModels = {{
    {"EfficientNet-B6", 600, 41'000'000, {0.242, 0.219, 0.195}},
    {"ResNest-101", 600, 46'000'000, {0.586, 0.670, 0.618}},
    {"MediumCustom", 22, 1'500'000, {0.393, 0.078, 0.113}},
    {"SimpleCustom", 10, 1'500'000, {0.363, 0.082, 0.114}},
}};

ConfusionProbabilities uniform_off_diagonal(double accuracy) {
  ConfusionProbabilities m{};
  const double off = (1.0 - accuracy) / static_cast<double>(kMaterialCount - 1);
  for (std::size_t r = 0; r < kMaterialCount; ++r) {
    for (std::size_t c = 0; c < kMaterialCount; ++c) m[r][c] = r == c ? accuracy : off;
  }
  return m;
}

}  // namespace

std::vector<ClassifierProfile> default_profiles() {
  std::vector<ClassifierProfile> out;
  for (const auto& model : kDefaultModels) {
    out.push_back({model.name, model.layers, model.parameters,
                   uniform_off_diagonal(model.published.accuracy)});
  }
  return out;
}

std::optional<PublishedScores> published_scores(const std::string& profile_name) {
  for (const auto& model : kDefaultModels) {
    if (profile_name == model.name) return model.published;
  }
  return std::nullopt;
}

MaterialClass argmax_lowest(const ScoreVector& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<MaterialClass>(best);
}

ClassificationResult classify_stochastic(MaterialClass true_class,
                                         const ClassifierProfile& profile,
                                         RandomStream& rng) {
  const auto& row = profile.confusion_probabilities[static_cast<std::size_t>(true_class)];
  const std::size_t predicted = rng.categorical(row);
  const double top = 0.5 + 0.5 * rng.uniform_open_low();

  ClassificationResult result;
  double other_mass = 0.0;
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    if (c != predicted) other_mass += row[c];
  }
  const double rest = 1.0 - top;
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    if (c == predicted) {
      result.scores[c] = top;
    } else if (other_mass > 0.0) {
      result.scores[c] = rest * row[c] / other_mass;
    } else {
      result.scores[c] = rest / static_cast<double>(kMaterialCount - 1);
    }
  }
  result.predicted = argmax_lowest(result.scores);
  return result;
}

ClassificationResult classify_oracle(const Garment& garment,
                                     const std::array<Signature, kMaterialCount>& signatures,
                                     double temperature) {
  if (!garment.cube) {
    throw MissingCubeError(fmt::format(
        "garment {} has no spectral cube; the oracle classifier needs the sensing path "
        "to attach cubes",
        garment.id));
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("classify_oracle: temperature must be positive");
  }
  const auto means = garment.cube->band_means();
  std::array<double, kMaterialCount> distance{};
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    double sum = 0.0;
    for (std::size_t b = 0; b < kBandCount; ++b) {
      const double d = means[b] - signatures[c][b];
      sum += d * d;
    }
    distance[c] = sum / static_cast<double>(kBandCount);
  }

  // Shifted softmax of -distance/temperature.
  const double nearest = *std::min_element(distance.begin(), distance.end());
  ClassificationResult result;
  double total = 0.0;
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    result.scores[c] = std::exp(-(distance[c] - nearest) / temperature);
    total += result.scores[c];
  }
  for (double& s : result.scores) s /= total;

  // exp is monotone, so the argmax is the nearest signature.
  result.predicted = argmax_lowest(result.scores);
  return result;
}

ClassificationResult classify_oracle(const Garment& garment, double temperature) {
  static const std::array<Signature, kMaterialCount> signatures = [] {
    std::array<Signature, kMaterialCount> s{};
    for (auto m : kAllMaterials) s[static_cast<std::size_t>(m)] = base_signature(m);
    return s;
  }();
  return classify_oracle(garment, signatures, temperature);
}

StochasticClassifier::StochasticClassifier(ClassifierProfile profile)
    : profile_(std::move(profile)) {
  validate_profile(profile_);
}

ClassificationResult StochasticClassifier::classify(const Garment& garment,
                                                    RandomStream& rng) const {
  return classify_stochastic(garment.true_class, profile_, rng);
}

OracleClassifier::OracleClassifier(double temperature) : temperature_(temperature) {
  if (!(temperature_ > 0.0)) {
    throw std::invalid_argument("oracle temperature must be positive");
  }
}

ClassificationResult OracleClassifier::classify(const Garment& garment,
                                                RandomStream&) const {
  return classify_oracle(garment, temperature_);
}

}  // namespace loomline
