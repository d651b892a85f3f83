#include "loomline/service.hpp"

#include <httplib.h>
#include <fmt/format.h>

#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include "loomline/catalog.hpp"
#include "loomline/report.hpp"

namespace loomline {

std::string_view name_of(SessionState state) {
  switch (state) {
    case SessionState::pending: return "pending";
    case SessionState::running: return "running";
    case SessionState::paused: return "paused";
    case SessionState::completed: return "completed";
    case SessionState::failed: return "failed";
  }
  return "unknown";
}

bool is_legal_transition(SessionState from, SessionState to) {
  using S = SessionState;
  switch (from) {
    case S::pending: return to == S::running;
    case S::running: return to == S::paused || to == S::completed || to == S::failed;
    case S::paused: return to == S::running;
    case S::completed:
    case S::failed: return false;
  }
  return false;
}

std::pair<std::string, int> parse_bind_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw std::invalid_argument("bind address must be host:port, got '" + address + "'");
  }
  const std::string port_text = address.substr(colon + 1);
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port_text.size() || port < 0 || port > 65535) {
    throw std::invalid_argument("invalid port in bind address '" + address + "'");
  }
  return {address.substr(0, colon), port};
}

namespace {

using namespace std::chrono_literals;

struct StreamMessage {
  std::string event;  // SSE event name
  std::string data;   // one JSON document
};

/// One run launched through the API.
struct Session {
  std::string run_id;
  std::string scenario_id;
  std::string profile_name;
  ScenarioConfig scenario;
  double pacing = 0.0;
  std::shared_ptr<const Classifier> classifier;

  mutable std::mutex mutex;
  std::condition_variable changed;
  SessionState state = SessionState::pending;
  std::uint64_t deposited = 0;
  std::uint64_t total = 0;
  std::vector<StreamMessage> messages;  // SSE id = index
  bool finished = false;                // terminal message published
  bool cancelled = false;
  std::optional<RunReport> report;
  std::string error;

  std::thread worker;

  // Callers hold `mutex`.
  bool move_to(SessionState next) {
    if (!is_legal_transition(state, next)) return false;
    state = next;
    changed.notify_all();
    return true;
  }

  Json to_json_locked() const {
    Json doc = Json::object();
    doc["run_id"] = run_id;
    doc["scenario_id"] = scenario_id;
    doc["profile_name"] = profile_name;
    doc["state"] = name_of(state);
    doc["progress"] = Json{{"deposited", deposited}, {"total", total}};
    doc["pacing"] = pacing;
    if (!error.empty()) doc["error"] = error;
    return doc;
  }
};

Json error_body(const std::string& message) { return Json{{"error", message}}; }

Json violations_body(const std::vector<Violation>& violations) {
  Json list = Json::array();
  for (const auto& v : violations) {
    list.push_back(Json{{"field", v.field},
                        {"value", v.value},
                        {"allowed", v.allowed},
                        {"message", v.message()}});
  }
  return Json{{"error", "validation failed"}, {"violations", std::move(list)}};
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(render_document(body), "application/json");
}

std::string sse_frame(std::size_t id, const StreamMessage& m) {
  return fmt::format("id: {}\nevent: {}\ndata: {}\n\n", id, m.event, m.data);
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions opts)
      : options(std::move(opts)),
        store(options.store_directory ? std::make_unique<RunStore>(*options.store_directory)
                                      : std::make_unique<RunStore>()) {
    server.new_task_queue = [] { return new httplib::ThreadPool(32); };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    routes();
  }

  ServiceOptions options;
  std::unique_ptr<RunStore> store;
  httplib::Server server;

  std::mutex shutdown_mutex;
  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  bool stopping = false;

  std::shared_ptr<Session> find_session(const std::string& run_id) {
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(run_id);
    return it == sessions.end() ? nullptr : it->second;
  }

  void routes();
  void post_scenario(const httplib::Request& req, httplib::Response& res);
  void post_run(const httplib::Request& req, httplib::Response& res);
  void get_run(const httplib::Request& req, httplib::Response& res);
  void get_report(const httplib::Request& req, httplib::Response& res);
  void change_state(const httplib::Request& req, httplib::Response& res, bool pause);
  void get_events(const httplib::Request& req, httplib::Response& res);
  void list_runs(const httplib::Request& req, httplib::Response& res);
  void list_profiles(httplib::Response& res);

  void execute(const std::shared_ptr<Session>& session);
  void shutdown();
};

void Service::Impl::routes() {
  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        send_json(res, 500, error_body(what));
      });

  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });

  server.Post("/api/scenarios",
              [this](const httplib::Request& req, httplib::Response& res) {
                post_scenario(req, res);
              });
  server.Get(R"(/api/scenarios/([^/]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               const auto scenario = store->load_scenario(req.matches[1]);
               if (!scenario) return send_json(res, 404, error_body("no such scenario"));
               send_json(res, 200,
                         Json{{"scenario_id", req.matches[1].str()},
                              {"scenario", scenario_to_json(*scenario)}});
             });
  server.Post("/api/runs", [this](const httplib::Request& req, httplib::Response& res) {
    post_run(req, res);
  });
  server.Get("/api/runs", [this](const httplib::Request& req, httplib::Response& res) {
    list_runs(req, res);
  });
  server.Get(R"(/api/runs/([^/]+))",
             [this](const httplib::Request& req, httplib::Response& res) { get_run(req, res); });
  server.Get(R"(/api/runs/([^/]+)/report)",
             [this](const httplib::Request& req, httplib::Response& res) {
               get_report(req, res);
             });
  server.Post(R"(/api/runs/([^/]+)/pause)",
              [this](const httplib::Request& req, httplib::Response& res) {
                change_state(req, res, true);
              });
  server.Post(R"(/api/runs/([^/]+)/resume)",
              [this](const httplib::Request& req, httplib::Response& res) {
                change_state(req, res, false);
              });
  server.Get(R"(/api/runs/([^/]+)/events)",
             [this](const httplib::Request& req, httplib::Response& res) {
               get_events(req, res);
             });
  server.Get("/api/profiles",
             [this](const httplib::Request&, httplib::Response& res) { list_profiles(res); });

  if (options.static_directory) {
    server.set_mount_point("/", options.static_directory->string());
  }
}

void Service::Impl::post_scenario(const httplib::Request& req, httplib::Response& res) {
  Json body;
  try {
    body = parse_json_text(req.body);
  } catch (const JsonSyntaxError& e) {
    return send_json(res, 400, error_body(std::string("malformed JSON: ") + e.what()));
  }
  ScenarioConfig scenario;
  try {
    scenario = scenario_from_json(body);
  } catch (const ValidationError& e) {
    return send_json(res, 422, violations_body(e.violations()));
  }
  auto check = validate_scenario(scenario);
  if (!check.ok()) return send_json(res, 422, violations_body(check.violations));
  const auto id = store->save_scenario(*check.config);
  send_json(res, 201, Json{{"scenario_id", id}, {"scenario", scenario_to_json(scenario)}});
}

void Service::Impl::post_run(const httplib::Request& req, httplib::Response& res) {
  Json body;
  try {
    body = parse_json_text(req.body);
  } catch (const JsonSyntaxError& e) {
    return send_json(res, 400, error_body(std::string("malformed JSON: ") + e.what()));
  }
  if (!body.is_object()) return send_json(res, 400, error_body("body must be a JSON object"));

  std::vector<Violation> violations;
  for (const auto& [key, value] : body.items()) {
    if (key != "scenario_id" && key != "profile_name" && key != "pacing") {
      violations.push_back({key, value.dump(), "no such field"});
    }
  }
  auto session = std::make_shared<Session>();

  const auto scenario_id = body.find("scenario_id");
  std::optional<ScenarioConfig> scenario;
  if (scenario_id == body.end() || !scenario_id->is_string()) {
    violations.push_back({"scenario_id",
                          scenario_id == body.end() ? "(missing)" : scenario_id->dump(),
                          "id returned by POST /api/scenarios"});
  } else {
    session->scenario_id = scenario_id->get<std::string>();
    scenario = store->load_scenario(session->scenario_id);
    if (!scenario) {
      violations.push_back({"scenario_id", scenario_id->dump(), "a stored scenario id"});
    }
  }

  session->profile_name = kDefaultProfileName;
  if (const auto it = body.find("profile_name"); it != body.end()) {
    if (!it->is_string()) {
      violations.push_back({"profile_name", it->dump(), "text"});
    } else {
      session->profile_name = it->get<std::string>();
    }
  }
  session->classifier = find_classifier(session->profile_name, store.get());
  if (!session->classifier) {
    violations.push_back({"profile_name", session->profile_name,
                          "a name listed by GET /api/profiles, or \"oracle\""});
  }

  if (const auto it = body.find("pacing"); it != body.end()) {
    if (!it->is_number() || !(it->get<double>() >= 0.0)) {
      violations.push_back({"pacing", it->dump(), "a number >= 0"});
    } else {
      session->pacing = it->get<double>();
    }
  }
  if (!violations.empty()) return send_json(res, 422, violations_body(violations));

  session->scenario = *scenario;
  session->total = static_cast<std::uint64_t>(scenario->garment_count) *
                   static_cast<std::uint64_t>(scenario->repetitions);
  session->run_id = store->allocate_run_id();
  {
    std::lock_guard lock(sessions_mutex);
    if (stopping) return send_json(res, 503, error_body("service is shutting down"));
    sessions.emplace(session->run_id, session);
    session->worker = std::thread([this, session] { execute(session); });
  }
  Json doc;
  {
    std::lock_guard lock(session->mutex);
    doc = session->to_json_locked();
  }
  send_json(res, 202, doc);
}

void Service::Impl::execute(const std::shared_ptr<Session>& session) {
  std::unique_lock lock(session->mutex);
  if (session->cancelled) {
    session->move_to(SessionState::running);
    session->move_to(SessionState::failed);
    session->error = "cancelled";
    session->finished = true;
    session->changed.notify_all();
    return;
  }
  session->move_to(SessionState::running);
  lock.unlock();

  try {
    auto traced = run_scenario_traced(session->scenario, *session->classifier,
                                      options.pipeline);

    for (std::size_t rep = 0; rep < traced.traces.size(); ++rep) {
      double previous = 0.0;
      for (const auto& event : traced.traces[rep]) {
        lock.lock();
        if (session->pacing > 0.0 && event.time > previous) {
          const auto delay = std::chrono::duration<double>((event.time - previous) /
                                                           session->pacing);
          session->changed.wait_for(lock, delay, [&] { return session->cancelled; });
        }
        session->changed.wait(lock, [&] {
          return session->cancelled || session->state != SessionState::paused;
        });
        if (session->cancelled) throw std::runtime_error("cancelled: service stopping");
        session->messages.push_back(
            {"sim", sim::event_to_json_line(event, static_cast<std::int64_t>(rep))});
        if (event.kind == sim::EventKind::deposited) ++session->deposited;
        session->changed.notify_all();
        lock.unlock();
        previous = event.time;
      }
    }

    RunRecord record;
    record.run_id = session->run_id;
    record.scenario = session->scenario;
    record.report = traced.report;
    record.profile_name = session->profile_name;
    store->save_run(std::move(record));

    lock.lock();
    // A pause requested after the last event still has to resolve first.
    session->changed.wait(lock, [&] {
      return session->cancelled || session->state != SessionState::paused;
    });
    session->report = std::move(traced.report);
    session->move_to(SessionState::completed);
    Json summary = report_to_json(*session->report).at("summary");
    session->messages.push_back(
        {"summary", Json{{"run_id", session->run_id},
                         {"state", "completed"},
                         {"summary", std::move(summary)}}
                        .dump()});
    session->finished = true;
    session->changed.notify_all();
  } catch (const std::exception& e) {
    if (!lock.owns_lock()) lock.lock();
    if (session->state == SessionState::paused) session->move_to(SessionState::running);
    session->move_to(SessionState::failed);
    session->error = e.what();
    session->messages.push_back(
        {"error", Json{{"run_id", session->run_id}, {"state", "failed"}, {"error", e.what()}}
                      .dump()});
    session->finished = true;
    session->changed.notify_all();
  }
}

void Service::Impl::get_run(const httplib::Request& req, httplib::Response& res) {
  const std::string run_id = req.matches[1];
  if (auto session = find_session(run_id)) {
    std::lock_guard lock(session->mutex);
    Json doc = Json{{"session", session->to_json_locked()}};
    if (session->report) doc["report"] = report_to_json(*session->report);
    return send_json(res, 200, doc);
  }
  try {
    const auto record = store->load_run(run_id);
    const auto garments = static_cast<std::uint64_t>(record.scenario.garment_count) *
                          static_cast<std::uint64_t>(record.scenario.repetitions);
    Json session = Json{{"run_id", record.run_id},
                        {"profile_name", record.profile_name},
                        {"state", "completed"},
                        {"progress", Json{{"deposited", garments}, {"total", garments}}},
                        {"created_at", record.created_at}};
    send_json(res, 200, Json{{"session", session}, {"report", report_to_json(record.report)}});
  } catch (const NotFoundError&) {
    send_json(res, 404, error_body("no such run: " + run_id));
  }
}

void Service::Impl::get_report(const httplib::Request& req, httplib::Response& res) {
  const std::string run_id = req.matches[1];
  if (auto session = find_session(run_id)) {
    std::lock_guard lock(session->mutex);
    if (!session->report) {
      return send_json(res, 409,
                       error_body(fmt::format("run is {}", name_of(session->state))));
    }
    res.status = 200;
    res.set_content(render_report_document(*session->report), "application/json");
    return;
  }
  try {
    const auto record = store->load_run(run_id);
    res.status = 200;
    res.set_content(render_report_document(record.report), "application/json");
  } catch (const NotFoundError&) {
    send_json(res, 404, error_body("no such run: " + run_id));
  }
}

void Service::Impl::change_state(const httplib::Request& req, httplib::Response& res,
                                 bool pause) {
  const std::string run_id = req.matches[1];
  auto session = find_session(run_id);
  if (!session) {
    try {
      store->load_run(run_id);
      return send_json(res, 409, error_body("run is completed"));
    } catch (const NotFoundError&) {
      return send_json(res, 404, error_body("no such run: " + run_id));
    }
  }
  std::lock_guard lock(session->mutex);
  const auto target = pause ? SessionState::paused : SessionState::running;
  // resume is only legal out of paused; pending -> running belongs to the worker.
  const bool legal = pause ? session->state == SessionState::running
                           : session->state == SessionState::paused;
  if (!legal || !session->move_to(target)) {
    return send_json(res, 409,
                     error_body(fmt::format("cannot {} a {} run", pause ? "pause" : "resume",
                                            name_of(session->state))));
  }
  send_json(res, 200, session->to_json_locked());
}

void Service::Impl::get_events(const httplib::Request& req, httplib::Response& res) {
  const std::string run_id = req.matches[1];
  auto session = find_session(run_id);
  if (!session) {
    return send_json(res, 404,
                     error_body("no live event stream for run " + run_id +
                                " (streams exist only for runs started by this process)"));
  }

  std::size_t cursor = 0;
  std::string last_seen = req.get_header_value("Last-Event-ID");
  if (req.has_param("last_seq")) last_seen = req.get_param_value("last_seq");
  if (!last_seen.empty()) {
    try {
      cursor = static_cast<std::size_t>(std::stoull(last_seen)) + 1;
    } catch (const std::exception&) {
      return send_json(res, 400, error_body("last_seq must be a non-negative integer"));
    }
  }

  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider(
      "text/event-stream",
      [session, cursor](std::size_t, httplib::DataSink& sink) mutable {
        std::unique_lock lock(session->mutex);
        session->changed.wait_for(lock, 500ms, [&] {
          return cursor < session->messages.size() || session->finished;
        });
        if (cursor >= session->messages.size() && !session->finished) {
          lock.unlock();
          static const std::string keepalive = ": keepalive\n\n";
          return sink.write(keepalive.data(), keepalive.size());
        }
        while (cursor < session->messages.size()) {
          const std::string frame = sse_frame(cursor, session->messages[cursor]);
          ++cursor;
          lock.unlock();
          if (!sink.write(frame.data(), frame.size())) return false;
          lock.lock();
        }
        if (session->finished && cursor >= session->messages.size()) {
          lock.unlock();
          sink.done();
        }
        return true;
      });
}

void Service::Impl::list_runs(const httplib::Request& req, httplib::Response& res) {
  std::vector<FieldPredicate> filter;
  for (const auto& [key, value] : req.params) {
    Json parsed;
    try {
      parsed = Json::parse(value);
    } catch (const Json::parse_error&) {
      parsed = value;
    }
    filter.push_back({key, std::move(parsed)});
  }
  try {
    Json list = Json::array();
    for (const auto& listing : store->list_runs(filter)) {
      list.push_back(run_listing_to_json(listing));
    }
    send_json(res, 200, list);
  } catch (const std::invalid_argument& e) {
    send_json(res, 422, error_body(e.what()));
  }
}

void Service::Impl::list_profiles(httplib::Response& res) {
  Json list = Json::array();
  for (const auto& entry : available_profiles(store.get())) {
    Json item = Json{{"source", entry.stored ? "stored" : "default"},
                     {"profile", profile_to_json(entry.profile)},
                     {"published", nullptr}};
    if (auto published = published_scores(entry.profile.name); published && !entry.stored) {
      item["published"] = Json{{"accuracy", published->accuracy},
                               {"precision", published->precision},
                               {"f1", published->f1}};
    }
    list.push_back(std::move(item));
  }
  send_json(res, 200, list);
}

void Service::Impl::shutdown() {
  std::lock_guard guard(shutdown_mutex);
  std::vector<std::shared_ptr<Session>> live;
  {
    std::lock_guard lock(sessions_mutex);
    stopping = true;
    for (auto& [id, s] : sessions) live.push_back(s);
  }
  for (auto& s : live) {
    std::lock_guard lock(s->mutex);
    s->cancelled = true;
    s->changed.notify_all();
  }
  server.stop();
  for (auto& s : live) {
    if (s->worker.joinable()) s->worker.join();
  }
}

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

bool Service::bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

int Service::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool Service::serve() { return impl_->server.listen_after_bind(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

void Service::stop() {
  if (impl_) impl_->shutdown();
}

RunStore& Service::store() { return *impl_->store; }

}  // namespace loomline
