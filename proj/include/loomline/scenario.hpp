#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loomline/json_util.hpp"

namespace loomline {

/// Every knob of one digital-twin experiment. Holds arbitrary candidate
/// values; validate_scenario decides whether they are acceptable.
struct ScenarioConfig {
  int conveyor_speed = 5;
  int arm_speed = 5;
  int camera_capture_time = 3;  // seconds per garment, AI inference included
  int laser_speed = 5;
  double error_percent = 8.0;   // per station, per garment
  std::int64_t garment_count = 10;
  std::vector<double> class_priors = {0.2, 0.2, 0.2, 0.2, 0.2};
  std::int64_t repetitions = 1;
  std::uint64_t seed = 0;

  bool operator==(const ScenarioConfig&) const = default;
};

/// One offending field: its name, the value supplied and what is allowed.
struct Violation {
  std::string field;
  std::string value;
  std::string allowed;

  std::string message() const;
  bool operator==(const Violation&) const = default;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct ScenarioCheck {
  std::optional<ScenarioConfig> config;
  std::vector<Violation> violations;

  bool ok() const { return config.has_value(); }
};

/// Returns the config unchanged when every range holds, otherwise one
/// violation per offending field.
ScenarioCheck validate_scenario(const ScenarioConfig& cfg);

/// Throws ValidationError unless cfg is valid.
const ScenarioConfig& require_valid(const ScenarioConfig& cfg);

/// The experiment setting of the reference digital-twin runs: belt and arm
/// speed 5, capture time 3 s, laser speed 5, 8% error, 10 repetitions.
ScenarioConfig table_iv_scenario(std::int64_t garment_count,
                                 std::uint64_t seed = 2024);

Json scenario_to_json(const ScenarioConfig& cfg);

/// Strict schema parse: unknown keys and wrongly typed values are reported
/// as violations (ValidationError). Range checks are left to
/// validate_scenario. Missing class_priors/repetitions/seed take the
/// defaults (uniform, 1, 0); the other fields are required.
ScenarioConfig scenario_from_json(const Json& doc);

/// Parse text and validate ranges in one step.
ScenarioConfig parse_scenario(const std::string& text);

}  // namespace loomline
