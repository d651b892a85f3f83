#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "loomline/classifier.hpp"
#include "loomline/json_util.hpp"
#include "loomline/pipeline.hpp"

namespace loomline {

/// One column of the published digital-twin results (reference only).
struct PublishedColumn {
  std::int64_t garments;
  double total;
  double conveyor;
  double arm;
  double camera;
  double laser;
  double efficiency;
};

inline constexpr std::array<PublishedColumn, 3> kPublishedDigitalTwinResults = {{
    {10, 80.7, 18.3, 22.4, 30.0, 10.0, 0.75},
    {12, 80.3, 12.7, 19.6, 36.0, 12.0, 0.75},
    {14, 93.6, 14.8, 22.8, 42.0, 14.0, 0.75},
}};

// Acceptance bands for the stochastic stations and the n=10 total.
inline constexpr double kConveyorPerItemLow = 0.75;
inline constexpr double kConveyorPerItemHigh = 2.0;
inline constexpr double kArmPerItemLow = 1.2;
inline constexpr double kArmPerItemHigh = 2.6;
inline constexpr double kTotalTenLow = 65.0;
inline constexpr double kTotalTenHigh = 100.0;
inline constexpr double kEfficiencyGapToPublished = 0.05;

/// (1 - p)^4: probability a garment passes all four stations error-free.
double expected_green_efficiency(double error_percent);

struct Table4Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Table4Column {
  PublishedColumn published;
  RunReport report;
  std::vector<Table4Check> checks;
};

struct Table4Result {
  std::vector<Table4Column> columns;
  double expected_efficiency = 0.0;
  Table4Check efficiency_check;

  bool all_passed() const;
};

/// Runs the three published settings (n = 10, 12, 14; speeds 5/5/3/5; 8%
/// error) and checks each against the acceptance tolerances.
Table4Result reproduce_table4(const Classifier& classifier, std::int64_t repetitions = 10,
                              std::uint64_t seed = 2024,
                              const PipelineOptions& options = {});

std::string render_table4(const Table4Result& result);
Json table4_to_json(const Table4Result& result);

}  // namespace loomline
