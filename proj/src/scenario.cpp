#include "loomline/scenario.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>

namespace loomline {

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw JsonSyntaxError(e.what());
  }
}

std::string render_document(const Json& doc) { return doc.dump(2) + "\n"; }

std::string Violation::message() const {
  return fmt::format("{}: got {}, expected {}", field, value, allowed);
}

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
  std::string out = "invalid scenario";
  for (const auto& v : violations) {
    out += "; ";
    out += v.message();
  }
  return out;
}

void check_int_range(std::vector<Violation>& out, const char* field,
                     std::int64_t value, std::int64_t lo, std::int64_t hi) {
  if (value < lo || value > hi) {
    out.push_back({field, std::to_string(value), fmt::format("[{},{}]", lo, hi)});
  }
}

constexpr const char* kFieldNames[] = {
    "conveyor_speed", "arm_speed",     "camera_capture_time",
    "laser_speed",    "error_percent", "garment_count",
    "class_priors",   "repetitions",   "seed"};

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_messages(violations)),
      violations_(std::move(violations)) {}

ScenarioCheck validate_scenario(const ScenarioConfig& cfg) {
  std::vector<Violation> out;
  check_int_range(out, "conveyor_speed", cfg.conveyor_speed, 1, 5);
  check_int_range(out, "arm_speed", cfg.arm_speed, 1, 5);
  check_int_range(out, "camera_capture_time", cfg.camera_capture_time, 3, 8);
  check_int_range(out, "laser_speed", cfg.laser_speed, 1, 5);
  if (!(cfg.error_percent >= 0.0 && cfg.error_percent <= 100.0)) {
    out.push_back({"error_percent", fmt::format("{}", cfg.error_percent), "[0,100]"});
  }
  if (cfg.garment_count < 0) {
    out.push_back({"garment_count", std::to_string(cfg.garment_count), "[0,inf)"});
  }

  const auto& priors = cfg.class_priors;
  bool priors_ok = priors.size() == 5;
  double sum = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0) || !std::isfinite(p)) priors_ok = false;
    sum += p;
  }
  if (priors_ok && std::abs(sum - 1.0) > 1e-9) priors_ok = false;
  if (!priors_ok) {
    out.push_back({"class_priors", Json(priors).dump(),
                   "5 non-negative entries summing to 1 (tolerance 1e-9)"});
  }

  if (cfg.repetitions < 1) {
    out.push_back({"repetitions", std::to_string(cfg.repetitions), "[1,inf)"});
  }

  if (!out.empty()) return {std::nullopt, std::move(out)};
  return {cfg, {}};
}

const ScenarioConfig& require_valid(const ScenarioConfig& cfg) {
  auto check = validate_scenario(cfg);
  if (!check.ok()) throw ValidationError(std::move(check.violations));
  return cfg;
}

ScenarioConfig table_iv_scenario(std::int64_t garment_count, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.conveyor_speed = 5;
  cfg.arm_speed = 5;
  cfg.camera_capture_time = 3;
  cfg.laser_speed = 5;
  cfg.error_percent = 8.0;
  cfg.garment_count = garment_count;
  cfg.repetitions = 10;
  cfg.seed = seed;
  return cfg;
}

Json scenario_to_json(const ScenarioConfig& cfg) {
  Json doc = Json::object();
  doc["conveyor_speed"] = cfg.conveyor_speed;
  doc["arm_speed"] = cfg.arm_speed;
  doc["camera_capture_time"] = cfg.camera_capture_time;
  doc["laser_speed"] = cfg.laser_speed;
  doc["error_percent"] = cfg.error_percent;
  doc["garment_count"] = cfg.garment_count;
  doc["class_priors"] = cfg.class_priors;
  doc["repetitions"] = cfg.repetitions;
  doc["seed"] = cfg.seed;
  return doc;
}

namespace {

class FieldReader {
 public:
  explicit FieldReader(const Json& doc) : doc_(doc) {}

  template <typename Int>
  void integer(const char* field, Int& target, bool required) {
    const auto it = doc_.find(field);
    if (it == doc_.end()) {
      if (required) missing(field);
      return;
    }
    if (!it->is_number_integer()) {
      violations_.push_back({field, it->dump(), "an integer"});
      return;
    }
    if constexpr (std::is_unsigned_v<Int>) {
      if (!it->is_number_unsigned()) {
        violations_.push_back({field, it->dump(), "an unsigned 64-bit integer"});
        return;
      }
      target = it->template get<Int>();
    } else {
      if (it->is_number_unsigned() &&
          it->template get<std::uint64_t>() >
              static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
        violations_.push_back({field, it->dump(), "a representable integer"});
        return;
      }
      const auto wide = it->template get<std::int64_t>();
      if (wide < std::numeric_limits<Int>::min() ||
          wide > std::numeric_limits<Int>::max()) {
        violations_.push_back({field, it->dump(), "a representable integer"});
        return;
      }
      target = static_cast<Int>(wide);
    }
  }

  void real(const char* field, double& target) {
    const auto it = doc_.find(field);
    if (it == doc_.end()) return missing(field);
    if (!it->is_number()) {
      violations_.push_back({field, it->dump(), "a number"});
      return;
    }
    target = it->get<double>();
  }

  void real_vector(const char* field, std::vector<double>& target) {
    const auto it = doc_.find(field);
    if (it == doc_.end()) return;
    bool ok = it->is_array();
    if (ok) {
      for (const auto& v : *it) ok = ok && v.is_number();
    }
    if (!ok) {
      violations_.push_back({field, it->dump(), "an array of numbers"});
      return;
    }
    target = it->get<std::vector<double>>();
  }

  void reject_unknown() {
    for (const auto& [key, value] : doc_.items()) {
      bool known = false;
      for (const char* name : kFieldNames) known = known || key == name;
      if (!known) violations_.push_back({key, value.dump(), "no such field"});
    }
  }

  std::vector<Violation>& violations() { return violations_; }

 private:
  void missing(const char* field) {
    violations_.push_back({field, "(missing)", "a required field"});
  }

  const Json& doc_;
  std::vector<Violation> violations_;
};

}  // namespace

ScenarioConfig scenario_from_json(const Json& doc) {
  if (!doc.is_object()) {
    throw ValidationError({{"(document)", doc.dump(), "a JSON object"}});
  }
  ScenarioConfig cfg;
  FieldReader reader(doc);
  reader.reject_unknown();
  reader.integer("conveyor_speed", cfg.conveyor_speed, true);
  reader.integer("arm_speed", cfg.arm_speed, true);
  reader.integer("camera_capture_time", cfg.camera_capture_time, true);
  reader.integer("laser_speed", cfg.laser_speed, true);
  reader.real("error_percent", cfg.error_percent);
  reader.integer("garment_count", cfg.garment_count, true);
  reader.real_vector("class_priors", cfg.class_priors);
  reader.integer("repetitions", cfg.repetitions, false);
  reader.integer("seed", cfg.seed, false);
  if (!reader.violations().empty()) throw ValidationError(std::move(reader.violations()));
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& text) {
  auto cfg = scenario_from_json(parse_json_text(text));
  require_valid(cfg);
  return cfg;
}

}  // namespace loomline
