#include "loomline/pipeline.hpp"

#include <fmt/format.h>

#include <future>

namespace loomline {

using sim::EventKind;
using sim::Scheduler;
using sim::SimEvent;

bool GarmentRecord::error_free() const {
  for (int e : errors) {
    if (e != 0) return false;
  }
  return true;
}

StationTimes make_station_times(double conveyor, double arm, double camera, double laser) {
  return {((conveyor + arm) + camera) + laser, conveyor, arm, camera, laser};
}

int RepetitionReport::error_count(Station station) const {
  int n = 0;
  for (const auto& g : garments) n += g.errors.at(station_index(station));
  return n;
}

RunSummary summarize(std::span<const RepetitionReport> repetitions) {
  RunSummary s;
  if (repetitions.empty()) return s;
  StationTimes sum{};
  double efficiency = 0.0;
  for (const auto& r : repetitions) {
    sum.total += r.times.total;
    sum.conveyor += r.times.conveyor;
    sum.arm += r.times.arm;
    sum.camera += r.times.camera;
    sum.laser += r.times.laser;
    efficiency += r.green_efficiency;
  }
  const auto n = static_cast<double>(repetitions.size());
  s.times = {sum.total / n, sum.conveyor / n, sum.arm / n, sum.camera / n, sum.laser / n};
  s.green_efficiency = efficiency / n;
  return s;
}

namespace {

/// Mutable state of one repetition, driven by the kernel's handlers.
class LineRun {
 public:
  LineRun(const ScenarioConfig& scenario, std::span<const Garment> garments,
          const Classifier& classifier, const RandomStream& rng,
          const PipelineOptions& options)
      : scenario_(scenario),
        garments_(garments),
        classifier_(classifier),
        service_rng_(rng.child("service")),
        error_rng_(rng.child("errors")),
        classifier_rng_(rng.child("classifier")) {
    for (Station s : kProcessingStations) {
      params_[station_index(s)] = station_params(s, scenario, options);
      retry_[station_index(s)] = retries_on_error(s, options);
    }
    records_.reserve(garments.size());
    for (const auto& g : garments) {
      GarmentRecord r;
      r.garment_id = g.id;
      r.true_class = g.true_class;
      records_.push_back(std::move(r));
    }
  }

  RepetitionResult run() {
    std::vector<SimEvent> initial;
    if (!garments_.empty()) {
      SimEvent first;
      first.kind = EventKind::arrival;
      first.garment_id = garments_.front().id;
      first.station = Station::conveyor;
      initial.push_back(first);
    }

    sim::HandlerTable handlers;
    handlers.on(EventKind::arrival, [this](const SimEvent& e, Scheduler& s) { on_arrival(e, s); })
        .on(EventKind::service_start,
            [this](const SimEvent& e, Scheduler& s) { on_service_start(e, s); })
        .on(EventKind::service_end,
            [this](const SimEvent& e, Scheduler& s) { on_service_end(e, s); })
        .on(EventKind::error_injected,
            [this](const SimEvent& e, Scheduler& s) { on_error(e, s); })
        .on(EventKind::classified,
            [this](const SimEvent& e, Scheduler& s) { on_classified(e, s); })
        .on(EventKind::component_removed,
            [this](const SimEvent& e, Scheduler&) { on_component_removed(e); })
        .on(EventKind::deposited,
            [this](const SimEvent& e, Scheduler& s) { on_deposited(e, s); });

    auto run = sim::run_to_completion(std::move(initial), handlers);

    RepetitionResult result;
    auto& report = result.report;
    report.times = make_station_times(busy_[station_index(Station::conveyor)],
                                      busy_[station_index(Station::arm)],
                                      busy_[station_index(Station::camera)],
                                      busy_[station_index(Station::laser)]);
    std::size_t clean = 0;
    for (const auto& r : records_) clean += r.error_free() ? 1 : 0;
    report.green_efficiency =
        records_.empty() ? 1.0
                         : static_cast<double>(clean) / static_cast<double>(records_.size());
    report.garments = std::move(records_);
    result.trace = std::move(run.trace);
    return result;
  }

 private:
  std::size_t position_of(std::uint64_t garment_id) const {
    // Ids are the positions in the batch for generated garments; fall back
    // to a scan for caller-supplied batches.
    if (garment_id < garments_.size() && garments_[garment_id].id == garment_id) {
      return static_cast<std::size_t>(garment_id);
    }
    for (std::size_t i = 0; i < garments_.size(); ++i) {
      if (garments_[i].id == garment_id) return i;
    }
    throw std::logic_error(fmt::format("unknown garment id {}", garment_id));
  }

  static void start_service(const SimEvent& e, Scheduler& s, Station station, int attempt) {
    s.schedule(e.time, EventKind::service_start, e.garment_id, station,
               sim::Attempt{attempt});
  }

  void on_arrival(const SimEvent& e, Scheduler& s) {
    start_service(e, s, Station::conveyor, 1);
  }

  void on_service_start(const SimEvent& e, Scheduler& s) {
    const int attempt = std::get<sim::Attempt>(e.payload).attempt;
    const double duration = service_time(params_[station_index(e.station)], service_rng_);
    s.schedule(e.time + duration, EventKind::service_end, e.garment_id, e.station,
               sim::ServiceDone{attempt, duration});
  }

  void on_service_end(const SimEvent& e, Scheduler& s) {
    const auto& done = std::get<sim::ServiceDone>(e.payload);
    busy_[station_index(e.station)] += done.duration;
    if (done.attempt == 1 && inject_error(scenario_.error_percent, error_rng_)) {
      s.schedule(e.time, EventKind::error_injected, e.garment_id, e.station,
                 sim::ErrorInjected{done.attempt, retry_[station_index(e.station)]});
      return;
    }
    finish_station(e, s);
  }

  void on_error(const SimEvent& e, Scheduler& s) {
    const auto& err = std::get<sim::ErrorInjected>(e.payload);
    records_[position_of(e.garment_id)].errors[station_index(e.station)] += 1;
    if (err.retry) {
      start_service(e, s, e.station, err.attempt + 1);
    } else {
      finish_station(e, s);
    }
  }

  void finish_station(const SimEvent& e, Scheduler& s) {
    switch (e.station) {
      case Station::conveyor:
        start_service(e, s, Station::camera, 1);
        break;
      case Station::camera: {
        const auto& garment = garments_[position_of(e.garment_id)];
        const auto result = classifier_.classify(garment, classifier_rng_);
        s.schedule(e.time, EventKind::classified, e.garment_id, Station::camera,
                   sim::Classified{result.predicted, result.scores});
        break;
      }
      case Station::arm:
        start_service(e, s, Station::laser, 1);
        break;
      case Station::laser: {
        const auto& garment = garments_[position_of(e.garment_id)];
        for (HardComponent c : garment.hard_components) {
          s.schedule(e.time, EventKind::component_removed, e.garment_id, Station::laser,
                     sim::ComponentRemoved{c});
        }
        s.schedule(e.time, EventKind::deposited, e.garment_id, Station::bin,
                   sim::Deposited{records_[position_of(e.garment_id)].predicted_class});
        break;
      }
      case Station::bin:
        throw std::logic_error("bin is not a processing station");
    }
  }

  void on_classified(const SimEvent& e, Scheduler& s) {
    const auto& c = std::get<sim::Classified>(e.payload);
    auto& record = records_[position_of(e.garment_id)];
    record.predicted_class = c.predicted;
    record.scores = c.scores;
    // The arm routes by the predicted class.
    start_service(e, s, Station::arm, 1);
  }

  void on_component_removed(const SimEvent& e) {
    records_[position_of(e.garment_id)].components_removed.push_back(
        std::get<sim::ComponentRemoved>(e.payload).component);
  }

  void on_deposited(const SimEvent& e, Scheduler& s) {
    const std::size_t next = position_of(e.garment_id) + 1;
    if (next < garments_.size()) {
      s.schedule(e.time, EventKind::arrival, garments_[next].id, Station::conveyor);
    }
  }

  const ScenarioConfig& scenario_;
  std::span<const Garment> garments_;
  const Classifier& classifier_;
  RandomStream service_rng_;
  RandomStream error_rng_;
  RandomStream classifier_rng_;
  std::array<StationParams, 4> params_{};
  std::array<bool, 4> retry_{};
  std::array<double, 4> busy_{};
  std::vector<GarmentRecord> records_;
};

RepetitionResult run_repetition(const ScenarioConfig& scenario, const Classifier& classifier,
                                const PipelineOptions& options, std::int64_t index) {
  try {
    const RandomStream rep = derive_stream(scenario.seed, fmt::format("rep-{}", index));
    RandomStream garment_rng = rep.child("garments");
    auto garments = generate_garments(static_cast<std::size_t>(scenario.garment_count),
                                      scenario.class_priors, options.component_rate,
                                      garment_rng);
    if (options.cube_noise_sigma || classifier.needs_cubes()) {
      RandomStream sensing_rng = rep.child("sensing");
      attach_cubes(garments, options.cube_noise_sigma.value_or(kDefaultCubeNoiseSigma),
                   options.cube_size, sensing_rng);
    }
    auto result = process_pipeline(scenario, garments, classifier, rep, options);
    result.report.index = index;
    return result;
  } catch (const RepetitionError&) {
    throw;
  } catch (const std::exception& e) {
    throw RepetitionError(index, e.what());
  }
}

}  // namespace

RepetitionResult process_pipeline(const ScenarioConfig& scenario,
                                  std::span<const Garment> garments,
                                  const Classifier& classifier, const RandomStream& rng,
                                  const PipelineOptions& options) {
  require_valid(scenario);
  return LineRun(scenario, garments, classifier, rng, options).run();
}

RepetitionError::RepetitionError(std::int64_t index, const std::string& what)
    : std::runtime_error(fmt::format("repetition {}: {}", index, what)), index_(index) {}

TracedRun run_scenario_traced(const ScenarioConfig& scenario, const Classifier& classifier,
                              const PipelineOptions& options) {
  require_valid(scenario);
  std::vector<RepetitionResult> results;
  results.reserve(static_cast<std::size_t>(scenario.repetitions));

  if (options.parallel_repetitions && scenario.repetitions > 1) {
    std::vector<std::future<RepetitionResult>> pending;
    for (std::int64_t i = 0; i < scenario.repetitions; ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        return run_repetition(scenario, classifier, options, i);
      }));
    }
    // Merge in repetition order; get() rethrows the first failure.
    for (auto& f : pending) results.push_back(f.get());
  } else {
    for (std::int64_t i = 0; i < scenario.repetitions; ++i) {
      results.push_back(run_repetition(scenario, classifier, options, i));
    }
  }

  TracedRun out;
  out.report.scenario = scenario;
  for (auto& r : results) {
    out.report.repetitions.push_back(std::move(r.report));
    out.traces.push_back(std::move(r.trace));
  }
  out.report.summary = summarize(out.report.repetitions);
  return out;
}

RunReport run_scenario(const ScenarioConfig& scenario, const Classifier& classifier,
                       const PipelineOptions& options) {
  return run_scenario_traced(scenario, classifier, options).report;
}

}  // namespace loomline
