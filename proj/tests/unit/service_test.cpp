#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include <unistd.h>

#include "loomline/report.hpp"
#include "loomline/service.hpp"
#include "support.hpp"

using namespace loomline;
using namespace std::chrono_literals;

namespace {

struct SseMessage {
  std::string id;
  std::string event;
  std::string data;
};

std::vector<SseMessage> parse_sse(const std::string& body) {
  std::vector<SseMessage> out;
  SseMessage current;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string::npos) end = body.size();
    const std::string line = body.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) {
      if (!current.event.empty() || !current.data.empty()) out.push_back(current);
      current = {};
    } else if (line.rfind("id: ", 0) == 0) {
      current.id = line.substr(4);
    } else if (line.rfind("event: ", 0) == 0) {
      current.event = line.substr(7);
    } else if (line.rfind("data: ", 0) == 0) {
      current.data = line.substr(6);
    }
  }
  return out;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<Service>();
    port_ = service_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_->serve(); });
    service_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(30, 0);
  }

  void TearDown() override {
    service_->stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string post_scenario(const ScenarioConfig& s) {
    auto res = client_->Post("/api/scenarios", scenario_to_json(s).dump(), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return Json::parse(res->body).at("scenario_id").get<std::string>();
  }

  std::string start_run(const std::string& scenario_id, double pacing = 0.0,
                        const std::string& profile = kDefaultProfileName) {
    const Json body{{"scenario_id", scenario_id}, {"profile_name", profile}, {"pacing", pacing}};
    auto res = client_->Post("/api/runs", body.dump(), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 202) << res->body;
    return Json::parse(res->body).at("run_id").get<std::string>();
  }

  std::string wait_for_state(const std::string& run_id, const std::string& state) {
    std::string last;
    for (int i = 0; i < 400; ++i) {
      auto res = client_->Get("/api/runs/" + run_id);
      if (res && res->status == 200) {
        last = Json::parse(res->body).at("session").at("state").get<std::string>();
        if (last == state) return last;
      }
      std::this_thread::sleep_for(25ms);
    }
    return last;
  }

  std::string events(const std::string& run_id, const httplib::Headers& headers = {}) {
    auto res = client_->Get("/api/runs/" + run_id + "/events", headers);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "text/event-stream");
    return res->body;
  }

  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace

TEST_F(ServiceTest, FreshStoreListsNoRuns) {
  auto res = client_->Get("/api/runs");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body), Json::array());
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(ServiceTest, ScenarioAcceptedAndReadable) {
  const auto id = post_scenario(table_iv_scenario(10));
  auto res = client_->Get("/api/scenarios/" + id);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(scenario_from_json(Json::parse(res->body).at("scenario")), table_iv_scenario(10));
  EXPECT_EQ(client_->Get("/api/scenarios/scn-999999")->status, 404);
}

TEST_F(ServiceTest, MalformedScenarioIs400) {
  auto res = client_->Post("/api/scenarios", "{\"conveyor_speed\":", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ServiceTest, OutOfRangeScenarioIs422) {
  auto s = table_iv_scenario(10);
  s.camera_capture_time = 9;
  auto res = client_->Post("/api/scenarios", scenario_to_json(s).dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  const auto body = Json::parse(res->body);
  ASSERT_EQ(body.at("violations").size(), 1u);
  EXPECT_EQ(body["violations"][0]["field"], "camera_capture_time");
  EXPECT_EQ(body["violations"][0]["allowed"], "[3,8]");
}

TEST_F(ServiceTest, RunRequestValidated) {
  const auto id = post_scenario(table_iv_scenario(10));
  const Json bad{{"scenario_id", id}, {"profile_name", "nope"}, {"pacing", -1}};
  auto res = client_->Post("/api/runs", bad.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(Json::parse(res->body).at("violations").size(), 2u);
  const Json missing{{"scenario_id", "scn-424242"}};
  EXPECT_EQ(client_->Post("/api/runs", missing.dump(), "application/json")->status, 422);
}

TEST_F(ServiceTest, CompletedRunReportMatchesDirectRun) {
  const auto scenario = table_iv_scenario(10);
  const auto run_id = start_run(post_scenario(scenario));
  ASSERT_EQ(wait_for_state(run_id, "completed"), "completed");

  auto res = client_->Get("/api/runs/" + run_id + "/report");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto classifier = fixture::default_classifier();
  EXPECT_EQ(res->body, render_report_document(run_scenario(scenario, classifier)));

  auto listing = client_->Get("/api/runs");
  ASSERT_EQ(Json::parse(listing->body).size(), 1u);
  auto filtered = client_->Get("/api/runs?garment_count=12");
  EXPECT_EQ(Json::parse(filtered->body).size(), 0u);
  auto state = Json::parse(client_->Get("/api/runs/" + run_id)->body);
  EXPECT_EQ(state.at("session").at("progress").at("deposited"), 100);
  EXPECT_EQ(state.at("report").at("summary").at("camera_time"), 30.0);
}

TEST_F(ServiceTest, EventStreamFollowsTrace) {
  const auto scenario = fixture::scenario(6, 20.0, 2, 3);
  const auto run_id = start_run(post_scenario(scenario));
  const auto messages = parse_sse(events(run_id));

  const auto classifier = fixture::default_classifier();
  const auto traced = run_scenario_traced(scenario, classifier);
  std::vector<std::string> expected;
  for (std::size_t r = 0; r < traced.traces.size(); ++r) {
    for (const auto& e : traced.traces[r]) {
      expected.push_back(sim::event_to_json_line(e, static_cast<std::int64_t>(r)));
    }
  }
  ASSERT_EQ(messages.size(), expected.size() + 1);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(messages[i].event, "sim");
    EXPECT_EQ(messages[i].id, std::to_string(i));
    EXPECT_EQ(messages[i].data, expected[i]);
  }
  EXPECT_EQ(messages.back().event, "summary");
  EXPECT_EQ(Json::parse(messages.back().data).at("state"), "completed");
}

TEST_F(ServiceTest, ReconnectResumesAfterCursor) {
  const auto run_id = start_run(post_scenario(fixture::scenario(5, 8.0, 1, 4)));
  const auto all = parse_sse(events(run_id));
  ASSERT_GT(all.size(), 10u);

  const auto resumed = parse_sse(events(run_id, {{"Last-Event-ID", "9"}}));
  ASSERT_EQ(resumed.size(), all.size() - 10);
  for (std::size_t i = 0; i < resumed.size(); ++i) {
    EXPECT_EQ(resumed[i].id, all[i + 10].id);
    EXPECT_EQ(resumed[i].data, all[i + 10].data);
  }
  auto by_query = client_->Get("/api/runs/" + run_id + "/events?last_seq=9");
  EXPECT_EQ(parse_sse(by_query->body).size(), resumed.size());
}

TEST_F(ServiceTest, EmptyRunStreamsOnlySummary) {
  const auto run_id = start_run(post_scenario(fixture::scenario(0)));
  const auto messages = parse_sse(events(run_id));
  ASSERT_EQ(messages.size(), 1u);
  EXPECT_EQ(messages[0].event, "summary");
}

TEST_F(ServiceTest, PauseCompletedRunIsConflict) {
  const auto run_id = start_run(post_scenario(fixture::scenario(2)));
  ASSERT_EQ(wait_for_state(run_id, "completed"), "completed");
  auto res = client_->Post("/api/runs/" + run_id + "/pause", "", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(client_->Post("/api/runs/" + run_id + "/resume", "", "application/json")->status,
            409);
}

TEST_F(ServiceTest, UnknownRunIsNotFound) {
  EXPECT_EQ(client_->Get("/api/runs/000999-ffff")->status, 404);
  EXPECT_EQ(client_->Get("/api/runs/000999-ffff/report")->status, 404);
  EXPECT_EQ(client_->Get("/api/runs/000999-ffff/events")->status, 404);
  EXPECT_EQ(client_->Post("/api/runs/000999-ffff/pause", "", "application/json")->status, 404);
}

TEST_F(ServiceTest, PauseAndResumePacedRun) {
  // 2 garments at ~6 s each, replayed at 4 virtual seconds per wall second.
  const auto run_id = start_run(post_scenario(fixture::scenario(2)), 4.0);
  ASSERT_EQ(wait_for_state(run_id, "running"), "running");
  auto paused = client_->Post("/api/runs/" + run_id + "/pause", "", "application/json");
  ASSERT_TRUE(paused);
  ASSERT_EQ(paused->status, 200) << paused->body;
  EXPECT_EQ(Json::parse(paused->body).at("state"), "paused");
  EXPECT_EQ(client_->Post("/api/runs/" + run_id + "/pause", "", "application/json")->status,
            409);

  const auto progress = [&] {
    return Json::parse(client_->Get("/api/runs/" + run_id)->body)
        .at("session")
        .at("progress")
        .at("deposited")
        .get<int>();
  };
  const int before = progress();
  std::this_thread::sleep_for(600ms);
  EXPECT_EQ(progress(), before);
  EXPECT_EQ(client_->Get("/api/runs/" + run_id + "/report")->status, 409);

  auto resumed = client_->Post("/api/runs/" + run_id + "/resume", "", "application/json");
  ASSERT_EQ(resumed->status, 200);
  EXPECT_EQ(wait_for_state(run_id, "completed"), "completed");
  EXPECT_EQ(progress(), 2);
}

TEST_F(ServiceTest, ProfilesListed) {
  auto res = client_->Get("/api/profiles");
  ASSERT_TRUE(res);
  const auto list = Json::parse(res->body);
  ASSERT_EQ(list.size(), 4u);
  EXPECT_EQ(list[1].at("profile").at("name"), "ResNest-101");
  EXPECT_EQ(list[1].at("published").at("accuracy"), 0.586);
}

TEST_F(ServiceTest, OracleRunsThroughApi) {
  const auto run_id = start_run(post_scenario(fixture::scenario(5)), 0.0, "oracle");
  EXPECT_EQ(wait_for_state(run_id, "completed"), "completed");
}

TEST(ServiceStore, RunsSurviveRestart) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("loomline-service-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::string run_id;
  std::string report;
  ServiceOptions options;
  options.store_directory = dir;
  {
    Service service(options);
    const int port = service.bind_to_any_port("127.0.0.1");
    std::thread t([&] { service.serve(); });
    service.wait_until_ready();
    httplib::Client c("127.0.0.1", port);
    auto sid = Json::parse(c.Post("/api/scenarios", scenario_to_json(fixture::scenario(3)).dump(),
                                  "application/json")
                               ->body)
                   .at("scenario_id")
                   .get<std::string>();
    run_id = Json::parse(c.Post("/api/runs", Json{{"scenario_id", sid}}.dump(),
                                "application/json")
                             ->body)
                 .at("run_id")
                 .get<std::string>();
    c.set_read_timeout(30, 0);
    c.Get("/api/runs/" + run_id + "/events");
    report = c.Get("/api/runs/" + run_id + "/report")->body;
    service.stop();
    t.join();
  }
  Service service(options);
  const int port = service.bind_to_any_port("127.0.0.1");
  std::thread t([&] { service.serve(); });
  service.wait_until_ready();
  httplib::Client c("127.0.0.1", port);
  auto res = c.Get("/api/runs/" + run_id + "/report");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, report);
  EXPECT_EQ(c.Get("/api/runs/" + run_id + "/pause")->status, 404);
  EXPECT_EQ(c.Post("/api/runs/" + run_id + "/pause", "", "application/json")->status, 409);
  service.stop();
  t.join();
  std::filesystem::remove_all(dir);
}

TEST(BindAddress, Parses) {
  EXPECT_EQ(parse_bind_address("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_THROW(parse_bind_address("localhost"), std::invalid_argument);
  EXPECT_THROW(parse_bind_address("host:99999"), std::invalid_argument);
  EXPECT_THROW(parse_bind_address("host:8o"), std::invalid_argument);
}

TEST(SessionStates, Transitions) {
  using S = SessionState;
  EXPECT_TRUE(is_legal_transition(S::pending, S::running));
  EXPECT_TRUE(is_legal_transition(S::running, S::paused));
  EXPECT_TRUE(is_legal_transition(S::paused, S::running));
  EXPECT_TRUE(is_legal_transition(S::running, S::completed));
  EXPECT_FALSE(is_legal_transition(S::completed, S::paused));
  EXPECT_FALSE(is_legal_transition(S::failed, S::running));
  EXPECT_FALSE(is_legal_transition(S::pending, S::paused));
}
