#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "loomline/classifier.hpp"
#include "loomline/garment.hpp"
#include "loomline/scenario.hpp"
#include "loomline/sim_kernel.hpp"
#include "loomline/stations.hpp"

namespace loomline {

/// Errors injected per processing station, indexed by station_index().
using StationCounts = std::array<int, 4>;

struct GarmentRecord {
  std::uint64_t garment_id = 0;
  MaterialClass true_class = MaterialClass::cotton;
  MaterialClass predicted_class = MaterialClass::cotton;
  ScoreVector scores{};
  StationCounts errors{};
  std::vector<HardComponent> components_removed;

  bool error_free() const;
  bool operator==(const GarmentRecord&) const = default;
};

/// Aggregate service seconds. total is always the sum of the four station
/// fields, computed as ((conveyor + arm) + camera) + laser.
struct StationTimes {
  double total = 0.0;
  double conveyor = 0.0;
  double arm = 0.0;
  double camera = 0.0;
  double laser = 0.0;

  bool operator==(const StationTimes&) const = default;
};

StationTimes make_station_times(double conveyor, double arm, double camera, double laser);

struct RepetitionReport {
  std::int64_t index = 0;
  StationTimes times;
  double green_efficiency = 1.0;  // error-free garments / garments
  std::vector<GarmentRecord> garments;

  int error_count(Station station) const;
  bool operator==(const RepetitionReport&) const = default;
};

/// Arithmetic means of the repetition fields.
struct RunSummary {
  StationTimes times;
  double green_efficiency = 1.0;

  bool operator==(const RunSummary&) const = default;
};

struct RunReport {
  ScenarioConfig scenario;
  std::vector<RepetitionReport> repetitions;
  RunSummary summary;

  bool operator==(const RunReport&) const = default;
};

RunSummary summarize(std::span<const RepetitionReport> repetitions);

struct RepetitionResult {
  RepetitionReport report;
  sim::EventTrace trace;
};

/**
 * Runs one repetition of the line on the discrete-event kernel.
 *
 * Garments are processed one after another through
 * conveyor -> camera (capture + classify) -> arm -> laser -> bin. After the
 * first service at each station an error is injected with probability
 * error_percent/100; stations that retry charge a second service. The laser
 * removes every hard component and the garment lands in the bin of its
 * predicted class.
 *
 * Draws come from children of `rng`: "service", "errors" and "classifier".
 */
RepetitionResult process_pipeline(const ScenarioConfig& scenario,
                                  std::span<const Garment> garments,
                                  const Classifier& classifier, const RandomStream& rng,
                                  const PipelineOptions& options = {});

/// A repetition failure, tagged with its index.
class RepetitionError : public std::runtime_error {
 public:
  RepetitionError(std::int64_t index, const std::string& what);
  std::int64_t index() const { return index_; }

 private:
  std::int64_t index_;
};

struct TracedRun {
  RunReport report;
  std::vector<sim::EventTrace> traces;  // one per repetition
};

/// Runs every repetition with stream derive_stream(seed, "rep-i"); garments
/// are drawn from its "garments" child and cubes from "sensing".
TracedRun run_scenario_traced(const ScenarioConfig& scenario, const Classifier& classifier,
                              const PipelineOptions& options = {});
RunReport run_scenario(const ScenarioConfig& scenario, const Classifier& classifier,
                       const PipelineOptions& options = {});

}  // namespace loomline
