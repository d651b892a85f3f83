#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "loomline/catalog.hpp"
#include "loomline/metrics.hpp"
#include "loomline/report.hpp"
#include "loomline/repository.hpp"
#include "loomline/service.hpp"
#include "loomline/table4.hpp"

namespace fs = std::filesystem;
using namespace loomline;

namespace {

enum ExitCode { kOk = 0, kIoFailure = 1, kInvalid = 2, kNotFound = 3 };

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure(fmt::format("cannot read {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) {
    throw IoFailure(fmt::format("cannot write {}", path.string()));
  }
}

std::unique_ptr<RunStore> open_store(const std::string& flag) {
  const auto dir = resolve_store_path(flag);
  if (!dir) return nullptr;
  auto store = std::make_unique<RunStore>(*dir);
  for (const auto& w : store->warnings()) fmt::print(stderr, "warning: {}\n", w);
  return store;
}

// A name from the catalog, or a path to a profile JSON document.
std::shared_ptr<const Classifier> resolve_classifier(const std::string& name_or_path, RunStore* store) {
  if (auto known = find_classifier(name_or_path, store)) return known;
  if (!fs::exists(name_or_path)) {
    throw UsageError(fmt::format("unknown profile '{}' (not a profile name or a file)", name_or_path));
  }
  auto profile = profile_from_json(parse_json_text(read_file(name_or_path)));
  if (store) {
    bool already = false;
    for (const auto& p : store->stored_profiles()) already = already || p == profile;
    if (!already) store->save_profile(profile);
  }
  return std::make_shared<StochasticClassifier>(std::move(profile));
}

void print_violations(const std::vector<Violation>& violations) {
  for (const auto& v : violations) fmt::print(stderr, "  {}\n", v.message());
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string profile = kDefaultProfileName;
  std::string store;
  std::string out;
  std::string trace;
  std::string csv;
  std::int64_t csv_repetition = 0;
};

int run_simulate(const SimulateArgs& a) {
  const auto scenario = parse_scenario(read_file(a.scenario));
  auto store = open_store(a.store);
  const auto classifier = resolve_classifier(a.profile, store.get());

  TracedRun run = run_scenario_traced(scenario, *classifier);
  const RunReport& report = run.report;

  fmt::print("{}", render_summary_table(report));

  if (!a.out.empty()) write_file(a.out, render_report_document(report));
  if (!a.trace.empty()) {
    std::string lines;
    for (std::size_t rep = 0; rep < run.traces.size(); ++rep) {
      for (const auto& e : run.traces[rep]) {
        lines += sim::event_to_json_line(e, static_cast<std::int64_t>(rep));
        lines += '\n';
      }
    }
    write_file(a.trace, lines);
  }
  if (!a.csv.empty()) {
    if (a.csv_repetition < 0 ||
        a.csv_repetition >= static_cast<std::int64_t>(report.repetitions.size())) {
      throw UsageError(fmt::format("--csv-repetition {} out of range (run has {})",
                                   a.csv_repetition, report.repetitions.size()));
    }
    write_file(a.csv, garments_to_csv(report.repetitions[a.csv_repetition]));
  }
  if (store) {
    RunRecord record;
    record.scenario = scenario;
    record.report = report;
    record.profile_name = classifier->name();
    const auto id = store->save_run(std::move(record));
    fmt::print("stored run {}\n", id);
  }
  return kOk;
}

// --- table4 -----------------------------------------------------------------

struct Table4Args {
  std::int64_t reps = 10;
  std::uint64_t seed = 2024;
  std::string profile = kDefaultProfileName;
  std::string out;
};

int run_table4(const Table4Args& a) {
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  const auto classifier = resolve_classifier(a.profile, nullptr);
  const auto result = reproduce_table4(*classifier, a.reps, a.seed);
  fmt::print("{}", render_table4(result));
  if (!a.out.empty()) write_file(a.out, render_document(table4_to_json(result)));
  return kOk;
}

// --- metrics ----------------------------------------------------------------

struct MetricsArgs {
  std::string predictions;
  std::string out;
  std::string summary_csv;
};

std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("n/a");
}

int run_metrics(const MetricsArgs& a) {
  const auto preds = metrics::parse_predictions_csv(read_file(a.predictions));
  const auto m = metrics::evaluate(preds.truth, preds.predicted, preds.scores, kMaterialCount);

  fmt::print("samples   {}\naccuracy  {}\n\n", m.confusion.total(), cell(m.accuracy));
  fmt::print("{:<10} {:>9} {:>9} {:>9} {:>9}\n", "class", "precision", "recall", "f1", "auc");
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    fmt::print("{:<10} {:>9} {:>9} {:>9} {:>9}\n", name_of(kAllMaterials[c]),
               cell(m.precision[c]), cell(m.recall[c]), cell(m.f1[c]), cell(m.auc[c]));
  }
  fmt::print("{:<10} {:>9} {:>9} {:>9} {:>9}\n", "macro", cell(m.macro_precision.value),
             cell(m.macro_recall.value), cell(m.macro_f1.value), cell(m.macro_auc.value));
  fmt::print("{:<10} {:>9} {:>9} {:>9}\n\nconfusion (rows true, columns predicted)\n", "micro",
             cell(m.micro_precision), cell(m.micro_recall), cell(m.micro_f1));
  for (std::size_t r = 0; r < kMaterialCount; ++r) {
    fmt::print("{:<10}", name_of(kAllMaterials[r]));
    for (std::size_t c = 0; c < kMaterialCount; ++c) fmt::print(" {:>7}", m.confusion.cell(r, c));
    fmt::print("\n");
  }

  if (!a.out.empty()) write_file(a.out, render_document(metrics::metric_set_to_json(m)));
  if (!a.summary_csv.empty()) write_file(a.summary_csv, metrics::metric_summary_csv(m));
  return kOk;
}

// --- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string bind = "127.0.0.1:8080";
  std::string store;
  std::string static_dir;
};

int run_serve(const ServeArgs& a) {
  const auto [host, port] = parse_bind_address(a.bind);
  ServiceOptions options;
  options.store_directory = resolve_store_path(a.store);
  if (!a.static_dir.empty()) options.static_directory = a.static_dir;

  // Signals go to the waiter thread only.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(options);
  if (!service.bind(host, port)) {
    fmt::print(stderr, "error: cannot bind {}\n", a.bind);
    return kIoFailure;
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  fmt::print("serving on http://{}:{}\n", host, port);
  std::fflush(stdout);
  const bool clean = service.serve();
  kill(getpid(), SIGTERM);
  waiter.join();
  return clean ? kOk : kIoFailure;
}

// --- runs -------------------------------------------------------------------

struct RunsArgs {
  std::string store;
  std::vector<std::string> where;
  std::string run_id;
};

RunStore& require_store(std::unique_ptr<RunStore>& store) {
  if (!store) throw UsageError("no store: pass --store or set LOOMLINE_STORE");
  return *store;
}

int run_runs_list(const RunsArgs& a) {
  auto store = open_store(a.store);
  std::vector<FieldPredicate> filter;
  for (const auto& clause : a.where) {
    const auto eq = clause.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError(fmt::format("--where expects field=value, got '{}'", clause));
    }
    const std::string text = clause.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(text);
    } catch (const Json::parse_error&) {
      value = text;
    }
    filter.push_back({clause.substr(0, eq), std::move(value)});
  }
  std::vector<RunListing> rows;
  try {
    rows = require_store(store).list_runs(filter);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fmt::print("{:<12} {:<21} {:>8} {:>10} {:>10}\n", "run_id", "created_at", "garments",
             "total", "efficiency");
  for (const auto& r : rows) {
    fmt::print("{:<12} {:<21} {:>8} {:>10} {:>10}\n", r.run_id, r.created_at, r.garment_count,
               format_seconds(r.total_time), format_percent(r.green_efficiency));
  }
  return kOk;
}

int run_runs_show(const RunsArgs& a) {
  auto store = open_store(a.store);
  const auto record = require_store(store).load_run(a.run_id);
  fmt::print("{}", render_document(run_record_to_json(record)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loomline: digital twin of a textile sorting line"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and print its summary");
  simulate->add_option("--scenario", sim_args.scenario, "Scenario JSON file")->required();
  simulate->add_option("--profile", sim_args.profile,
                       "Classifier: profile name, profile JSON file or 'oracle'")
      ->capture_default_str();
  simulate->add_option("--store", sim_args.store, "Run store directory");
  simulate->add_option("--out", sim_args.out, "Write the report JSON here");
  simulate->add_option("--trace", sim_args.trace, "Write the event trace (JSON lines) here");
  simulate->add_option("--csv", sim_args.csv, "Write per-garment rows of one repetition here");
  simulate->add_option("--csv-repetition", sim_args.csv_repetition,
                       "Repetition exported by --csv")
      ->capture_default_str();

  Table4Args t4_args;
  auto* table4 = app.add_subcommand("table4", "Reproduce the reference digital-twin table");
  table4->add_option("--reps", t4_args.reps, "Repetitions per column")->capture_default_str();
  table4->add_option("--seed", t4_args.seed, "Base seed")->capture_default_str();
  table4->add_option("--profile", t4_args.profile, "Classifier")->capture_default_str();
  table4->add_option("--out", t4_args.out, "Write the table as JSON here");

  MetricsArgs m_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "Score a predictions CSV");
  metrics_cmd->add_option("--predictions", m_args.predictions, "Predictions CSV")->required();
  metrics_cmd->add_option("--out", m_args.out, "Write the metric set as JSON here");
  metrics_cmd->add_option("--summary-csv", m_args.summary_csv, "Write a one-row summary CSV");

  ServeArgs s_args;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--bind", s_args.bind, "host:port")->capture_default_str();
  serve->add_option("--store", s_args.store, "Run store directory");
  serve->add_option("--static", s_args.static_dir, "Directory of dashboard assets");

  RunsArgs r_args;
  auto* runs = app.add_subcommand("runs", "Inspect the run store");
  runs->require_subcommand(1);
  auto* runs_list = runs->add_subcommand("list", "List stored runs");
  runs_list->add_option("--store", r_args.store, "Run store directory");
  runs_list->add_option("--where", r_args.where, "Scenario filter field=value (repeatable)");
  auto* runs_show = runs->add_subcommand("show", "Print one stored run");
  runs_show->add_option("run_id", r_args.run_id, "Run id")->required();
  runs_show->add_option("--store", r_args.store, "Run store directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*simulate) return run_simulate(sim_args);
    if (*table4) return run_table4(t4_args);
    if (*metrics_cmd) return run_metrics(m_args);
    if (*serve) return run_serve(s_args);
    if (*runs_list) return run_runs_list(r_args);
    if (*runs_show) return run_runs_show(r_args);
  } catch (const ValidationError& e) {
    fmt::print(stderr, "error: validation failed\n");
    print_violations(e.violations());
    return kInvalid;
  } catch (const JsonSyntaxError& e) {
    fmt::print(stderr, "error: malformed JSON: {}\n", e.what());
    return kInvalid;
  } catch (const metrics::CsvError& e) {
    fmt::print(stderr, "error: malformed predictions CSV at {}\n", e.what());
    return kInvalid;
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInvalid;
  } catch (const NotFoundError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNotFound;
  } catch (const IoFailure& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIoFailure;
  } catch (const StoreIoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIoFailure;
  } catch (const ConflictError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIoFailure;
  }
  return kOk;
}
