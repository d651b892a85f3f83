#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "loomline/classifier.hpp"
#include "loomline/json_util.hpp"
#include "loomline/pipeline.hpp"
#include "loomline/scenario.hpp"

namespace loomline {

struct RunRecord {
  std::string run_id;
  std::string created_at;  // UTC, ISO-8601, e.g. 2026-10-16T11:14:03Z
  ScenarioConfig scenario;
  RunReport report;
  std::string profile_name;

  bool operator==(const RunRecord&) const = default;
};

Json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const Json& doc);

/// What list_runs returns per record.
struct RunListing {
  std::string run_id;
  std::string created_at;
  std::int64_t garment_count = 0;
  double total_time = 0.0;
  double green_efficiency = 0.0;
};

Json run_listing_to_json(const RunListing& listing);

/// Equality test on one scenario field, e.g. {"garment_count", 12}.
struct FieldPredicate {
  std::string field;
  Json value;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StoreIoError : public std::runtime_error {
 public:
  StoreIoError(const std::filesystem::path& path, const std::string& what);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string utc_timestamp_now();

/**
 * Append-only store of runs, classifier profiles and scenarios.
 *
 * On disk a store is a directory with three JSON-lines files: runs.jsonl,
 * profiles.jsonl and scenarios.jsonl. Files are indexed when the store is
 * opened. Unparsable lines (typically a final line cut short by a crash)
 * are skipped and reported through warnings(). A store built with no
 * directory keeps everything in memory.
 *
 * All methods are safe to call from several threads; writes are serialized.
 */
class RunStore {
 public:
  RunStore() = default;
  explicit RunStore(std::filesystem::path directory);

  RunStore(const RunStore&) = delete;
  RunStore& operator=(const RunStore&) = delete;

  /// Reserves the next "NNNNNN-xxxx" id: zero-padded counter plus a short
  /// random hex suffix.
  std::string allocate_run_id();

  /// Appends the record (allocating an id when run_id is empty) and returns
  /// its id. Throws ConflictError on a duplicate id, StoreIoError on write
  /// failure.
  std::string save_run(RunRecord record);

  /// Throws NotFoundError.
  RunRecord load_run(const std::string& run_id) const;

  /// Matching runs in creation order (newest last). Throws
  /// std::invalid_argument for predicates on unknown fields.
  std::vector<RunListing> list_runs(std::span<const FieldPredicate> filter = {}) const;

  /// Throws ConflictError when a stored profile already has the name.
  void save_profile(const ClassifierProfile& profile);
  std::vector<ClassifierProfile> stored_profiles() const;

  /// Returns the new scenario id ("scn-NNNNNN").
  std::string save_scenario(const ScenarioConfig& scenario);
  std::optional<ScenarioConfig> load_scenario(const std::string& scenario_id) const;

  std::vector<std::string> warnings() const;
  const std::optional<std::filesystem::path>& directory() const { return directory_; }

 private:
  struct StoredScenario {
    std::string id;
    ScenarioConfig scenario;
  };

  std::filesystem::path file(const char* name) const;
  void append_line(const char* file_name, const Json& doc);
  void load_file(const char* name, const std::function<void(const Json&)>& accept);

  std::optional<std::filesystem::path> directory_;
  mutable std::mutex mutex_;
  std::vector<RunRecord> runs_;
  std::unordered_map<std::string, std::size_t> run_index_;
  std::vector<ClassifierProfile> profiles_;
  std::vector<StoredScenario> scenarios_;
  std::uint64_t run_counter_ = 0;
  std::uint64_t scenario_counter_ = 0;
  std::vector<std::string> warnings_;
};

/// Store directory from an explicit flag, else LOOMLINE_STORE, else none.
std::optional<std::filesystem::path> resolve_store_path(const std::string& flag_value);

}  // namespace loomline
