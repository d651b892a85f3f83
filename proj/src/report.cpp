#include "loomline/report.hpp"

#include <fmt/format.h>

namespace loomline {

metrics::MetricSet classification_metrics(const RunReport& report) {
  std::vector<int> truth;
  std::vector<int> predicted;
  metrics::ScoreMatrix scores;
  for (const auto& rep : report.repetitions) {
    for (const auto& g : rep.garments) {
      truth.push_back(label_of(g.true_class));
      predicted.push_back(label_of(g.predicted_class));
      scores.emplace_back(g.scores.begin(), g.scores.end());
    }
  }
  return metrics::evaluate(truth, predicted, scores);
}

std::string format_seconds(double seconds) { return fmt::format("{:.1f} s", seconds); }

std::string format_percent(double fraction) { return fmt::format("{:.1f}%", fraction * 100.0); }

namespace {

Json station_counts_json(const StationCounts& counts) {
  Json doc = Json::object();
  for (Station s : kProcessingStations) doc[std::string(name_of(s))] = counts[station_index(s)];
  return doc;
}

Json times_json(const StationTimes& t) {
  return Json{{"total_time", t.total},
              {"conveyor_time", t.conveyor},
              {"arm_time", t.arm},
              {"camera_time", t.camera},
              {"laser_time", t.laser}};
}

Json garment_json(const GarmentRecord& g) {
  Json components = Json::array();
  for (auto c : g.components_removed) components.push_back(name_of(c));
  return Json{{"garment_id", g.garment_id},
              {"true_class", name_of(g.true_class)},
              {"predicted_class", name_of(g.predicted_class)},
              {"scores", g.scores},
              {"errors", station_counts_json(g.errors)},
              {"components_removed", std::move(components)}};
}

Json repetition_json(const RepetitionReport& r) {
  Json doc = Json::object();
  doc["index"] = r.index;
  doc.update(times_json(r.times));
  doc["green_efficiency"] = r.green_efficiency;
  StationCounts totals{};
  for (Station s : kProcessingStations) totals[station_index(s)] = r.error_count(s);
  doc["error_counts"] = station_counts_json(totals);
  Json garments = Json::array();
  for (const auto& g : r.garments) garments.push_back(garment_json(g));
  doc["garments"] = std::move(garments);
  return doc;
}

MaterialClass material_field(const Json& doc, const char* field) {
  const auto name = doc.at(field).get<std::string>();
  const auto m = material_from_name(name);
  if (!m) throw std::invalid_argument(fmt::format("{}: unknown material '{}'", field, name));
  return *m;
}

StationCounts station_counts_from(const Json& doc) {
  StationCounts counts{};
  for (Station s : kProcessingStations) {
    counts[station_index(s)] = doc.at(std::string(name_of(s))).get<int>();
  }
  return counts;
}

GarmentRecord garment_from(const Json& doc) {
  GarmentRecord g;
  g.garment_id = doc.at("garment_id").get<std::uint64_t>();
  g.true_class = material_field(doc, "true_class");
  g.predicted_class = material_field(doc, "predicted_class");
  g.scores = doc.at("scores").get<ScoreVector>();
  g.errors = station_counts_from(doc.at("errors"));
  for (const auto& c : doc.at("components_removed")) {
    const auto tag = component_from_name(c.get<std::string>());
    if (!tag) throw std::invalid_argument("unknown component tag " + c.dump());
    g.components_removed.push_back(*tag);
  }
  return g;
}

RepetitionReport repetition_from(const Json& doc) {
  RepetitionReport r;
  r.index = doc.at("index").get<std::int64_t>();
  r.times.total = doc.at("total_time").get<double>();
  r.times.conveyor = doc.at("conveyor_time").get<double>();
  r.times.arm = doc.at("arm_time").get<double>();
  r.times.camera = doc.at("camera_time").get<double>();
  r.times.laser = doc.at("laser_time").get<double>();
  r.green_efficiency = doc.at("green_efficiency").get<double>();
  for (const auto& g : doc.at("garments")) r.garments.push_back(garment_from(g));
  return r;
}

}  // namespace

Json report_to_json(const RunReport& report) {
  Json doc = Json::object();
  doc["scenario"] = scenario_to_json(report.scenario);
  Json reps = Json::array();
  for (const auto& r : report.repetitions) reps.push_back(repetition_json(r));
  doc["repetitions"] = std::move(reps);

  const auto& s = report.summary;
  Json summary = times_json(s.times);
  summary["green_efficiency"] = s.green_efficiency;
  summary["rendered"] = Json{
      {"Total time", format_seconds(s.times.total)},
      {"Conveyor belt time", format_seconds(s.times.conveyor)},
      {"Robotic arm time", format_seconds(s.times.arm)},
      {"Camera capture time", format_seconds(s.times.camera)},
      {"Laser segment time", format_seconds(s.times.laser)},
      {"Green production efficiency", format_percent(s.green_efficiency)}};
  summary["classification"] = metrics::metric_set_to_json(classification_metrics(report));
  doc["summary"] = std::move(summary);
  return doc;
}

RunReport report_from_json(const Json& doc) {
  RunReport report;
  report.scenario = scenario_from_json(doc.at("scenario"));
  for (const auto& r : doc.at("repetitions")) report.repetitions.push_back(repetition_from(r));
  report.summary = summarize(report.repetitions);
  return report;
}

std::string render_report_document(const RunReport& report) {
  return render_document(report_to_json(report));
}

std::string garments_to_csv(const RepetitionReport& repetition) {
  std::string out = kGarmentCsvHeader;
  out += '\n';
  for (const auto& g : repetition.garments) {
    std::string components;
    for (std::size_t i = 0; i < g.components_removed.size(); ++i) {
      if (i > 0) components += ';';
      components += name_of(g.components_removed[i]);
    }
    out += fmt::format("{},{},{},{},{},{},{},{}\n", g.garment_id, name_of(g.true_class),
                       name_of(g.predicted_class), g.errors[station_index(Station::conveyor)],
                       g.errors[station_index(Station::camera)],
                       g.errors[station_index(Station::arm)],
                       g.errors[station_index(Station::laser)], components);
  }
  return out;
}

std::string render_summary_table(const RunReport& report) {
  const auto& s = report.summary;
  std::string out;
  const auto row = [&out](std::string_view label, const std::string& value) {
    out += fmt::format("{:<30}{:>10}\n", label, value);
  };
  row("Number of clothes", std::to_string(report.scenario.garment_count));
  row("Total time", format_seconds(s.times.total));
  row("Conveyor belt time", format_seconds(s.times.conveyor));
  row("Robotic arm time", format_seconds(s.times.arm));
  row("Camera capture time", format_seconds(s.times.camera));
  row("Laser segment time", format_seconds(s.times.laser));
  row("Green production efficiency", format_percent(s.green_efficiency));
  return out;
}

}  // namespace loomline
