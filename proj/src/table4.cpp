#include "loomline/table4.hpp"

#include <fmt/format.h>

#include <cmath>

#include "loomline/report.hpp"

namespace loomline {

double expected_green_efficiency(double error_percent) {
  return std::pow(1.0 - error_percent / 100.0, 4);
}

bool Table4Result::all_passed() const {
  if (!efficiency_check.passed) return false;
  for (const auto& c : columns) {
    for (const auto& check : c.checks) {
      if (!check.passed) return false;
    }
  }
  return true;
}

namespace {

std::vector<Table4Check> check_column(const RunReport& report, const PipelineOptions& options) {
  const auto& scenario = report.scenario;
  const auto n = scenario.garment_count;
  const double laser_unit = options.laser.base_time / scenario.laser_speed;
  const bool camera_retry = retries_on_error(Station::camera, options);
  const bool laser_retry = retries_on_error(Station::laser, options);

  bool camera_exact = true;
  bool laser_exact = true;
  bool additive = true;
  for (const auto& rep : report.repetitions) {
    const auto camera_services =
        n + (camera_retry ? rep.error_count(Station::camera) : 0);
    const auto laser_services = n + (laser_retry ? rep.error_count(Station::laser) : 0);
    camera_exact = camera_exact && rep.times.camera ==
                                       static_cast<double>(camera_services) *
                                           scenario.camera_capture_time;
    laser_exact = laser_exact &&
                  rep.times.laser == static_cast<double>(laser_services) * laser_unit;
    const auto& t = rep.times;
    additive = additive && t.total - (((t.conveyor + t.arm) + t.camera) + t.laser) == 0.0;
  }

  const auto& s = report.summary.times;
  const double items = static_cast<double>(n);
  const double conveyor_per_item = s.conveyor / items;
  const double arm_per_item = s.arm / items;

  std::vector<Table4Check> checks;
  checks.push_back({"camera exact", camera_exact,
                    fmt::format("mean {:.1f} s", s.camera)});
  checks.push_back({"laser exact", laser_exact, fmt::format("mean {:.1f} s", s.laser)});
  checks.push_back({"additivity", additive, "total = conveyor + arm + camera + laser"});
  checks.push_back({"conveyor per-item band",
                    conveyor_per_item >= kConveyorPerItemLow &&
                        conveyor_per_item <= kConveyorPerItemHigh,
                    fmt::format("{:.3f} s in [{}, {}]", conveyor_per_item,
                                kConveyorPerItemLow, kConveyorPerItemHigh)});
  checks.push_back({"arm per-item band",
                    arm_per_item >= kArmPerItemLow && arm_per_item <= kArmPerItemHigh,
                    fmt::format("{:.3f} s in [{}, {}]", arm_per_item, kArmPerItemLow,
                                kArmPerItemHigh)});
  if (n == 10) {
    checks.push_back({"total band",
                      s.total >= kTotalTenLow && s.total <= kTotalTenHigh,
                      fmt::format("{:.1f} s in [{}, {}]", s.total, kTotalTenLow,
                                  kTotalTenHigh)});
  }
  return checks;
}

}  // namespace

Table4Result reproduce_table4(const Classifier& classifier, std::int64_t repetitions,
                              std::uint64_t seed, const PipelineOptions& options) {
  Table4Result result;
  for (const auto& published : kPublishedDigitalTwinResults) {
    auto scenario = table_iv_scenario(published.garments, seed);
    scenario.repetitions = repetitions;
    Table4Column column{published, run_scenario(scenario, classifier, options), {}};
    column.checks = check_column(column.report, options);
    result.columns.push_back(std::move(column));
  }
  result.expected_efficiency = expected_green_efficiency(8.0);
  const double gap = std::abs(result.expected_efficiency - 0.75);
  result.efficiency_check = {"efficiency model vs published", gap <= kEfficiencyGapToPublished,
                             fmt::format("(1-0.08)^4 = {:.1f}% vs 75.0%, gap {:.1f} points",
                                         result.expected_efficiency * 100.0, gap * 100.0)};
  return result;
}

std::string render_table4(const Table4Result& result) {
  std::string out;
  out += fmt::format("{:<30}", "Number of clothes");
  for (const auto& c : result.columns) out += fmt::format("{:>22}", c.published.garments);
  out += '\n';
  out += fmt::format("{:<30}", "");
  for (std::size_t i = 0; i < result.columns.size(); ++i) {
    out += fmt::format("{:>22}", "model (published)");
  }
  out += '\n';

  const auto row = [&](const char* label, auto model, auto published, auto format) {
    out += fmt::format("{:<30}", label);
    for (const auto& c : result.columns) {
      out += fmt::format("{:>22}", fmt::format("{} ({})", format(model(c)), format(published(c))));
    }
    out += '\n';
  };
  const auto secs = [](double v) { return format_seconds(v); };
  const auto pct = [](double v) { return format_percent(v); };
  row("Total time", [](const Table4Column& c) { return c.report.summary.times.total; },
      [](const Table4Column& c) { return c.published.total; }, secs);
  row("Conveyor belt time", [](const Table4Column& c) { return c.report.summary.times.conveyor; },
      [](const Table4Column& c) { return c.published.conveyor; }, secs);
  row("Robotic arm time", [](const Table4Column& c) { return c.report.summary.times.arm; },
      [](const Table4Column& c) { return c.published.arm; }, secs);
  row("Camera capture time", [](const Table4Column& c) { return c.report.summary.times.camera; },
      [](const Table4Column& c) { return c.published.camera; }, secs);
  row("Laser segment time", [](const Table4Column& c) { return c.report.summary.times.laser; },
      [](const Table4Column& c) { return c.published.laser; }, secs);
  row("Green production efficiency",
      [](const Table4Column& c) { return c.report.summary.green_efficiency; },
      [](const Table4Column& c) { return c.published.efficiency; }, pct);

  out += "\nChecks\n";
  for (const auto& c : result.columns) {
    for (const auto& check : c.checks) {
      out += fmt::format("  n={:<3} {:<24} {:<5} {}\n", c.published.garments, check.name,
                         check.passed ? "PASS" : "FAIL", check.detail);
    }
  }
  out += fmt::format("  {:<30} {:<5} {}\n", result.efficiency_check.name,
                     result.efficiency_check.passed ? "PASS" : "FAIL",
                     result.efficiency_check.detail);
  return out;
}

Json table4_to_json(const Table4Result& result) {
  const auto check_json = [](const Table4Check& c) {
    return Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}};
  };
  Json columns = Json::array();
  for (const auto& c : result.columns) {
    Json checks = Json::array();
    for (const auto& check : c.checks) checks.push_back(check_json(check));
    const auto& p = c.published;
    columns.push_back(Json{
        {"garments", p.garments},
        {"published",
         Json{{"total_time", p.total},
              {"conveyor_time", p.conveyor},
              {"arm_time", p.arm},
              {"camera_time", p.camera},
              {"laser_time", p.laser},
              {"green_efficiency", p.efficiency}}},
        {"report", report_to_json(c.report)},
        {"checks", std::move(checks)}});
  }
  return Json{{"expected_green_efficiency", result.expected_efficiency},
              {"efficiency_check", check_json(result.efficiency_check)},
              {"columns", std::move(columns)},
              {"all_passed", result.all_passed()}};
}

}  // namespace loomline
