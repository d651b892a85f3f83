#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loomline/garment.hpp"
#include "loomline/json_util.hpp"
#include "loomline/material.hpp"
#include "loomline/random.hpp"
#include "loomline/spectral.hpp"

namespace loomline {

using ScoreVector = std::array<double, kMaterialCount>;
using ConfusionProbabilities = std::array<std::array<double, kMaterialCount>, kMaterialCount>;

/// Model metadata plus the row-stochastic matrix P(predicted | true) that
/// drives the stochastic classifier. Rows are true classes.
struct ClassifierProfile {
  std::string name;
  std::int64_t layer_count = 1;
  std::int64_t parameter_count = 1;
  ConfusionProbabilities confusion_probabilities{};

  /// Mean of the diagonal: accuracy under uniform class priors.
  double uniform_prior_accuracy() const;

  bool operator==(const ClassifierProfile&) const = default;
};

/// Throws ValidationError naming each broken field.
void validate_profile(const ClassifierProfile& profile);

Json profile_to_json(const ClassifierProfile& profile);
/// Strict parse plus validate_profile.
ClassifierProfile profile_from_json(const Json& doc);

/// Published accuracy/precision/F1 of a default model; reference only, not
/// enforced by the calibrated matrices.
struct PublishedScores {
  double accuracy;
  double precision;
  double f1;
};

/// Four profiles: EfficientNet-B6, ResNest-101, MediumCustom, SimpleCustom.
/// Each diagonal equals the model's published accuracy; the remaining row
/// mass is split evenly across the other four classes.
std::vector<ClassifierProfile> default_profiles();
std::optional<PublishedScores> published_scores(const std::string& profile_name);

inline constexpr const char* kDefaultProfileName = "ResNest-101";

struct ClassificationResult {
  MaterialClass predicted = MaterialClass::cotton;
  ScoreVector scores{};
};

/// Index of the largest score; ties go to the lowest label.
MaterialClass argmax_lowest(const ScoreVector& scores);

/// Samples the prediction from the confusion row of `true_class`. The
/// predicted class scores 0.5 + 0.5u with u uniform in (0, 1]; the rest is
/// spread over the other classes in proportion to their row entries, or
/// evenly when those entries are all zero.
ClassificationResult classify_stochastic(MaterialClass true_class,
                                         const ClassifierProfile& profile,
                                         RandomStream& rng);

/// Raised when the oracle is asked to classify a garment without a cube.
class MissingCubeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultOracleTemperature = 0.02;

/// Nearest-signature classification on per-band spatial means. Scores are
/// softmax(-distance / temperature) where distance is the mean squared
/// difference to each class signature.
ClassificationResult classify_oracle(
    const Garment& garment, double temperature = kDefaultOracleTemperature);
ClassificationResult classify_oracle(const Garment& garment,
                                     const std::array<Signature, kMaterialCount>& signatures,
                                     double temperature);

/// Interface the pipeline's camera station uses. Implementations must be
/// safe to call concurrently with distinct streams.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string name() const = 0;
  virtual ClassificationResult classify(const Garment& garment, RandomStream& rng) const = 0;
  /// True when classify needs garment.cube.
  virtual bool needs_cubes() const { return false; }
};

class StochasticClassifier final : public Classifier {
 public:
  explicit StochasticClassifier(ClassifierProfile profile);

  std::string name() const override { return profile_.name; }
  ClassificationResult classify(const Garment& garment, RandomStream& rng) const override;
  const ClassifierProfile& profile() const { return profile_; }

 private:
  ClassifierProfile profile_;
};

class OracleClassifier final : public Classifier {
 public:
  static constexpr const char* kName = "oracle";

  explicit OracleClassifier(double temperature = kDefaultOracleTemperature);

  std::string name() const override { return kName; }
  ClassificationResult classify(const Garment& garment, RandomStream& rng) const override;
  bool needs_cubes() const override { return true; }

 private:
  double temperature_;
};

}  // namespace loomline
