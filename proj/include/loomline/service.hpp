#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "loomline/pipeline.hpp"
#include "loomline/repository.hpp"

namespace loomline {

enum class SessionState { pending, running, paused, completed, failed };

std::string_view name_of(SessionState state);

/// Legal moves: pending->running, running<->paused, running->completed|failed.
bool is_legal_transition(SessionState from, SessionState to);

struct ServiceOptions {
  std::optional<std::filesystem::path> store_directory;  // none: in-memory store
  std::optional<std::filesystem::path> static_directory;  // dashboard assets
  PipelineOptions pipeline;
};

/// Splits "host:port". Throws std::invalid_argument when malformed.
std::pair<std::string, int> parse_bind_address(const std::string& address);

/**
 * HTTP control plane over the simulator.
 *
 *   POST /api/scenarios              validate + store a scenario
 *   GET  /api/scenarios/{id}
 *   POST /api/runs                   {scenario_id, profile_name, pacing}
 *   GET  /api/runs                   repository listing; query params filter
 *   GET  /api/runs/{id}              session state (+ report once completed)
 *   GET  /api/runs/{id}/report       the report document, byte-identical to
 *                                    `loomline simulate --out`
 *   POST /api/runs/{id}/pause|resume
 *   GET  /api/runs/{id}/events       text/event-stream of SimEvents
 *   GET  /api/profiles
 *
 * Each run executes on its own thread; request handling stays responsive.
 */
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds without serving. Returns false when the address is unavailable.
  bool bind(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_to_any_port(const std::string& host);
  /// Serves on the bound socket until stop(). Blocks.
  bool serve();
  /// Blocks until serve() is accepting connections.
  void wait_until_ready() const;
  /// Cancels live runs, closes the socket and joins run threads.
  void stop();

  RunStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace loomline
