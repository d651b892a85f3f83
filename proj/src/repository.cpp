#include "loomline/repository.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "loomline/report.hpp"

namespace loomline {

namespace {

constexpr const char* kRunsFile = "runs.jsonl";
constexpr const char* kProfilesFile = "profiles.jsonl";
constexpr const char* kScenariosFile = "scenarios.jsonl";

std::uint64_t leading_counter(const std::string& id) {
  std::uint64_t value = 0;
  for (char c : id) {
    if (c < '0' || c > '9') break;
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

std::string random_suffix() {
  static thread_local std::mt19937 gen{std::random_device{}()};
  return fmt::format("{:04x}", gen() & 0xFFFFu);
}

}  // namespace

StoreIoError::StoreIoError(const std::filesystem::path& path, const std::string& what)
    : std::runtime_error(fmt::format("{}: {}", path.string(), what)), path_(path) {}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

Json run_record_to_json(const RunRecord& record) {
  Json doc = Json::object();
  doc["run_id"] = record.run_id;
  doc["created_at"] = record.created_at;
  doc["profile_name"] = record.profile_name;
  doc["scenario"] = scenario_to_json(record.scenario);
  doc["report"] = report_to_json(record.report);
  return doc;
}

RunRecord run_record_from_json(const Json& doc) {
  RunRecord r;
  r.run_id = doc.at("run_id").get<std::string>();
  r.created_at = doc.at("created_at").get<std::string>();
  r.profile_name = doc.at("profile_name").get<std::string>();
  r.scenario = scenario_from_json(doc.at("scenario"));
  r.report = report_from_json(doc.at("report"));
  return r;
}

Json run_listing_to_json(const RunListing& l) {
  return Json{{"run_id", l.run_id},
              {"created_at", l.created_at},
              {"garment_count", l.garment_count},
              {"total_time", l.total_time},
              {"green_efficiency", l.green_efficiency}};
}

RunStore::RunStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(*directory_, ec);
  if (ec) throw StoreIoError(*directory_, "cannot create store directory: " + ec.message());

  load_file(kRunsFile, [this](const Json& doc) {
    auto record = run_record_from_json(doc);
    if (run_index_.contains(record.run_id)) {
      throw std::invalid_argument("duplicate run id " + record.run_id);
    }
    run_counter_ = std::max(run_counter_, leading_counter(record.run_id));
    run_index_.emplace(record.run_id, runs_.size());
    runs_.push_back(std::move(record));
  });
  load_file(kProfilesFile, [this](const Json& doc) {
    profiles_.push_back(profile_from_json(doc));
  });
  load_file(kScenariosFile, [this](const Json& doc) {
    StoredScenario s{doc.at("scenario_id").get<std::string>(),
                     scenario_from_json(doc.at("scenario"))};
    scenario_counter_ = std::max(scenario_counter_, leading_counter(s.id.substr(4)));
    scenarios_.push_back(std::move(s));
  });
}

std::filesystem::path RunStore::file(const char* name) const { return *directory_ / name; }

void RunStore::load_file(const char* name, const std::function<void(const Json&)>& accept) {
  const auto path = file(name);
  if (!std::filesystem::exists(path)) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreIoError(path, "cannot open for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      accept(Json::parse(line));
    } catch (const std::exception& e) {
      const bool last = pos >= text.size();
      warnings_.push_back(fmt::format("{}:{}: skipped {}record ({})", path.string(), line_no,
                                      last ? "truncated final " : "unreadable ", e.what()));
    }
  }
}

void RunStore::append_line(const char* file_name, const Json& doc) {
  if (!directory_) return;
  const auto path = file(file_name);
  // A crash may have left a final line without its newline.
  bool needs_separator = false;
  if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    std::ifstream in(path, std::ios::binary);
    in.seekg(-1, std::ios::end);
    char last = '\n';
    in.get(last);
    needs_separator = last != '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw StoreIoError(path, "cannot open for appending");
  if (needs_separator) out << '\n';
  out << doc.dump() << '\n';
  out.flush();
  if (!out) throw StoreIoError(path, "write failed");
}

std::string RunStore::allocate_run_id() {
  std::lock_guard lock(mutex_);
  ++run_counter_;
  return fmt::format("{:06d}-{}", run_counter_, random_suffix());
}

std::string RunStore::save_run(RunRecord record) {
  if (record.run_id.empty()) record.run_id = allocate_run_id();
  if (record.created_at.empty()) record.created_at = utc_timestamp_now();
  std::lock_guard lock(mutex_);
  if (run_index_.contains(record.run_id)) {
    throw ConflictError("run id already stored: " + record.run_id);
  }
  append_line(kRunsFile, run_record_to_json(record));
  run_counter_ = std::max(run_counter_, leading_counter(record.run_id));
  run_index_.emplace(record.run_id, runs_.size());
  runs_.push_back(std::move(record));
  return runs_.back().run_id;
}

RunRecord RunStore::load_run(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  const auto it = run_index_.find(run_id);
  if (it == run_index_.end()) throw NotFoundError("no such run: " + run_id);
  return runs_[it->second];
}

std::vector<RunListing> RunStore::list_runs(std::span<const FieldPredicate> filter) const {
  static const Json kFields = scenario_to_json(ScenarioConfig{});
  for (const auto& p : filter) {
    if (!kFields.contains(p.field)) {
      throw std::invalid_argument("unknown scenario field in filter: " + p.field);
    }
  }
  std::lock_guard lock(mutex_);
  std::vector<RunListing> out;
  for (const auto& r : runs_) {
    const Json scenario = scenario_to_json(r.scenario);
    bool match = true;
    for (const auto& p : filter) match = match && scenario.at(p.field) == p.value;
    if (!match) continue;
    out.push_back({r.run_id, r.created_at, r.scenario.garment_count,
                   r.report.summary.times.total, r.report.summary.green_efficiency});
  }
  return out;
}

void RunStore::save_profile(const ClassifierProfile& profile) {
  validate_profile(profile);
  std::lock_guard lock(mutex_);
  for (const auto& p : profiles_) {
    if (p.name == profile.name) throw ConflictError("profile already stored: " + profile.name);
  }
  append_line(kProfilesFile, profile_to_json(profile));
  profiles_.push_back(profile);
}

std::vector<ClassifierProfile> RunStore::stored_profiles() const {
  std::lock_guard lock(mutex_);
  return profiles_;
}

std::string RunStore::save_scenario(const ScenarioConfig& scenario) {
  require_valid(scenario);
  std::lock_guard lock(mutex_);
  StoredScenario s{fmt::format("scn-{:06d}", ++scenario_counter_), scenario};
  append_line(kScenariosFile,
              Json{{"scenario_id", s.id}, {"scenario", scenario_to_json(scenario)}});
  scenarios_.push_back(std::move(s));
  return scenarios_.back().id;
}

std::optional<ScenarioConfig> RunStore::load_scenario(const std::string& scenario_id) const {
  std::lock_guard lock(mutex_);
  for (const auto& s : scenarios_) {
    if (s.id == scenario_id) return s.scenario;
  }
  return std::nullopt;
}

std::vector<std::string> RunStore::warnings() const {
  std::lock_guard lock(mutex_);
  return warnings_;
}

std::optional<std::filesystem::path> resolve_store_path(const std::string& flag_value) {
  if (!flag_value.empty()) return std::filesystem::path(flag_value);
  if (const char* env = std::getenv("LOOMLINE_STORE"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

}  // namespace loomline
