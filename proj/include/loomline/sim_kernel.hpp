#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loomline/json_util.hpp"
#include "loomline/material.hpp"

namespace loomline::sim {

enum class EventKind {
  arrival,
  service_start,
  service_end,
  error_injected,
  classified,
  component_removed,
  deposited,
};

inline constexpr std::size_t kEventKindCount = 7;

std::string_view name_of(EventKind kind);
std::optional<EventKind> event_kind_from_name(std::string_view name);

struct Attempt {
  int attempt = 1;
  bool operator==(const Attempt&) const = default;
};

struct ServiceDone {
  int attempt = 1;
  double duration = 0.0;
  bool operator==(const ServiceDone&) const = default;
};

struct ErrorInjected {
  int attempt = 1;
  bool retry = false;
  bool operator==(const ErrorInjected&) const = default;
};

struct Classified {
  MaterialClass predicted = MaterialClass::cotton;
  std::array<double, kMaterialCount> scores{};
  bool operator==(const Classified&) const = default;
};

struct ComponentRemoved {
  HardComponent component = HardComponent::button;
  bool operator==(const ComponentRemoved&) const = default;
};

struct Deposited {
  MaterialClass bin = MaterialClass::cotton;
  bool operator==(const Deposited&) const = default;
};

using Payload = std::variant<std::monostate, Attempt, ServiceDone, ErrorInjected,
                             Classified, ComponentRemoved, Deposited>;

struct SimEvent {
  double time = 0.0;       // virtual seconds
  std::uint64_t seq = 0;   // assigned by the queue on insertion
  EventKind kind = EventKind::arrival;
  std::uint64_t garment_id = 0;
  Station station = Station::conveyor;
  Payload payload;

  bool operator==(const SimEvent&) const = default;
};

using EventTrace = std::vector<SimEvent>;

/// Scheduling before the current clock, or at a non-finite time.
class SchedulingError : public std::logic_error {
 public:
  SchedulingError(const SimEvent& event, double clock, std::size_t trace_position);
  double clock() const { return clock_; }
  std::size_t trace_position() const { return trace_position_; }

 private:
  double clock_;
  std::size_t trace_position_;
};

/// Future-event list ordered by (time, seq). seq is the insertion counter,
/// so simultaneous events leave in FIFO order.
class EventQueue {
 public:
  /// Stamps the next seq on the event and enqueues it. Throws
  /// SchedulingError when event.time < now().
  std::uint64_t schedule(SimEvent event);

  /// Pops the earliest event and advances the clock to its time.
  SimEvent next_event();

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  double now() const { return clock_; }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  double clock_ = 0.0;
};

/// What a handler may do while an event is being processed.
class Scheduler {
 public:
  explicit Scheduler(EventQueue& queue) : queue_(queue) {}

  double now() const { return queue_.now(); }
  std::uint64_t schedule(SimEvent event) { return queue_.schedule(std::move(event)); }
  std::uint64_t schedule(double time, EventKind kind, std::uint64_t garment_id,
                         Station station, Payload payload = {});

 private:
  EventQueue& queue_;
};

using Handler = std::function<void(const SimEvent&, Scheduler&)>;

class HandlerTable {
 public:
  HandlerTable& on(EventKind kind, Handler handler);
  const Handler& at(EventKind kind) const;

 private:
  std::array<Handler, kEventKindCount> handlers_;
};

struct RunResult {
  EventTrace trace;
  double clock = 0.0;
};

/// Processes events in (time, seq) order until the queue drains. A handler
/// that schedules into the past aborts the run with a SchedulingError whose
/// trace_position is the index of the event being handled.
RunResult run_to_completion(std::vector<SimEvent> initial, const HandlerTable& handlers);

Json payload_to_json(const Payload& payload);

/// One JSON-lines record; time is printed with three decimals. When
/// `repetition` is set it is appended as an extra field.
std::string event_to_json_line(const SimEvent& event,
                               std::optional<std::int64_t> repetition = std::nullopt);

/// The whole trace as JSON lines, each terminated by '\n'.
std::string trace_to_json_lines(const EventTrace& trace);

}  // namespace loomline::sim
