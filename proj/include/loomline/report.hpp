#pragma once

#include <cstddef>
#include <string>

#include "loomline/json_util.hpp"
#include "loomline/metrics.hpp"
#include "loomline/pipeline.hpp"

namespace loomline {

/// Classification metrics over every garment of every repetition.
metrics::MetricSet classification_metrics(const RunReport& report);

/// Full-precision JSON. The summary also carries Table-IV-style strings
/// (one decimal) and the pooled classification metrics.
Json report_to_json(const RunReport& report);

/// Reads the fields written by report_to_json. Derived fields (summary,
/// rendered strings, metrics) are recomputed rather than trusted.
RunReport report_from_json(const Json& doc);

/// render_document(report_to_json(report)); the byte-exact report file.
std::string render_report_document(const RunReport& report);

inline constexpr const char* kGarmentCsvHeader =
    "garment_id,true_class,predicted_class,errors_conveyor,errors_camera,errors_arm,"
    "errors_laser,components_removed";

/// Per-garment records of one repetition. components_removed is a
/// ';'-separated tag list.
std::string garments_to_csv(const RepetitionReport& repetition);

/// Rows: Total time, Conveyor belt time, Robotic arm time, Camera capture
/// time, Laser segment time, Green production efficiency.
std::string render_summary_table(const RunReport& report);

std::string format_seconds(double seconds);
std::string format_percent(double fraction);

}  // namespace loomline
