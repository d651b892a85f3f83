#include "loomline/sim_kernel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace loomline::sim {

namespace {

constexpr std::array<std::string_view, kEventKindCount> kKindNames = {
    "arrival",    "service_start",     "service_end", "error_injected",
    "classified", "component_removed", "deposited"};

std::string describe(const SimEvent& e) {
  return fmt::format("{} garment {} at {} (t={})", name_of(e.kind), e.garment_id,
                     loomline::name_of(e.station), e.time);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view name_of(EventKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

std::optional<EventKind> event_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

SchedulingError::SchedulingError(const SimEvent& event, double clock,
                                 std::size_t trace_position)
    : std::logic_error(fmt::format(
          "cannot schedule {} before current clock {} (trace position {})",
          describe(event), clock, trace_position)),
      clock_(clock),
      trace_position_(trace_position) {}

std::uint64_t EventQueue::schedule(SimEvent event) {
  if (!std::isfinite(event.time) || event.time < clock_) {
    throw SchedulingError(event, clock_, 0);
  }
  event.seq = next_seq_++;
  const auto seq = event.seq;
  heap_.push(std::move(event));
  return seq;
}

SimEvent EventQueue::next_event() {
  if (heap_.empty()) throw std::logic_error("next_event on empty queue");
  SimEvent e = heap_.top();
  heap_.pop();
  clock_ = e.time;
  return e;
}

std::uint64_t Scheduler::schedule(double time, EventKind kind, std::uint64_t garment_id,
                                  Station station, Payload payload) {
  SimEvent e;
  e.time = time;
  e.kind = kind;
  e.garment_id = garment_id;
  e.station = station;
  e.payload = std::move(payload);
  return queue_.schedule(std::move(e));
}

HandlerTable& HandlerTable::on(EventKind kind, Handler handler) {
  handlers_.at(static_cast<std::size_t>(kind)) = std::move(handler);
  return *this;
}

const Handler& HandlerTable::at(EventKind kind) const {
  const auto& h = handlers_.at(static_cast<std::size_t>(kind));
  if (!h) {
    throw std::invalid_argument(
        fmt::format("no handler registered for event kind {}", name_of(kind)));
  }
  return h;
}

RunResult run_to_completion(std::vector<SimEvent> initial, const HandlerTable& handlers) {
  EventQueue queue;
  for (auto& e : initial) queue.schedule(std::move(e));

  RunResult result;
  Scheduler scheduler(queue);
  while (!queue.empty()) {
    SimEvent event = queue.next_event();
    const std::size_t position = result.trace.size();
    result.trace.push_back(event);
    try {
      handlers.at(event.kind)(result.trace.back(), scheduler);
    } catch (const SchedulingError& e) {
      throw SchedulingError(event, e.clock(), position);
    }
  }
  result.clock = queue.now();
  return result;
}

Json payload_to_json(const Payload& payload) {
  return std::visit(
      Overloaded{
          [](const std::monostate&) { return Json::object(); },
          [](const Attempt& p) { return Json{{"attempt", p.attempt}}; },
          [](const ServiceDone& p) {
            return Json{{"attempt", p.attempt}, {"duration", p.duration}};
          },
          [](const ErrorInjected& p) {
            return Json{{"attempt", p.attempt}, {"retry", p.retry}};
          },
          [](const Classified& p) {
            return Json{{"predicted", loomline::name_of(p.predicted)},
                        {"scores", p.scores}};
          },
          [](const ComponentRemoved& p) {
            return Json{{"component", loomline::name_of(p.component)}};
          },
          [](const Deposited& p) { return Json{{"bin", loomline::name_of(p.bin)}}; },
      },
      payload);
}

std::string event_to_json_line(const SimEvent& event,
                               std::optional<std::int64_t> repetition) {
  std::string line = fmt::format(
      R"({{"time":{:.3f},"seq":{},"kind":"{}","garment_id":{},"station":"{}","payload":{})",
      event.time, event.seq, name_of(event.kind), event.garment_id,
      loomline::name_of(event.station), payload_to_json(event.payload).dump());
  if (repetition) line += fmt::format(R"(,"repetition":{})", *repetition);
  line += '}';
  return line;
}

std::string trace_to_json_lines(const EventTrace& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += event_to_json_line(e);
    out += '\n';
  }
  return out;
}

}  // namespace loomline::sim
