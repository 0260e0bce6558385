#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <unistd.h>

#include "xsite/app/artifact.hpp"
#include "xsite/app/service.hpp"

namespace xsite::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace std::chrono_literals;

json run_config(std::uint64_t seed, std::size_t n_reps = 4, std::size_t n_users = 2000) {
  std::ifstream f(std::string(XSITE_CONFIG_DIR) + "/example.json");
  json j = json::parse(f);
  j["spec"]["seed"] = seed;
  j["spec"]["n_reps"] = n_reps;
  j["spec"]["n_users"] = n_users;
  return j;
}

class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    state_ = fs::temp_directory_path() /
             ("xsite_service_" + std::to_string(::getpid()) + "_" +
              ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(state_);
    start();
  }

  void TearDown() override {
    stop();
    fs::remove_all(state_);
  }

  void start() {
    service_ = std::make_unique<RunService>(state_, 2, 2);
    server_ = std::make_unique<httplib::Server>();
    mount_api(*server_, *service_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }

  void stop() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
    service_.reset();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

  json wait_terminal(const std::string& id) {
    EXPECT_TRUE(service_->wait(id, 120s));
    auto res = client().Get("/api/runs/" + id);
    EXPECT_TRUE(res);
    return json::parse(res->body);
  }

  fs::path state_;
  std::unique_ptr<RunService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ApiTest, DesignEchoedNormalized) {
  auto res = client().Post("/api/designs", R"({"alpha": 0.6})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json body = json::parse(res->body);
  EXPECT_EQ(body["valid"], true);
  EXPECT_EQ(body["design"]["alpha"], 0.6);
  EXPECT_EQ(body["design"]["site1_split"], 0.5);
  EXPECT_EQ(body["design"]["n_clusters"], 2);
}

TEST_F(ApiTest, InvalidDesignIs400WithField) {
  auto res = client().Post("/api/designs", R"({"alpha": 0.5})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  const json body = json::parse(res->body);
  EXPECT_EQ(body["error"], "validation");
  EXPECT_EQ(body["field"], "alpha");

  res = client().Post("/api/designs", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  json bad = run_config(1);
  bad["spec"]["p_overlap"] = -1;
  res = client().Post("/api/runs", bad.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["field"], "spec.p_overlap");
}

TEST_F(ApiTest, UnknownRunIs404) {
  auto res = client().Get("/api/runs/0123456789abcdef0123456789abcdef");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ApiTest, RunCompletesWithCliSummaries) {
  const json cfg = run_config(5);
  auto res = client().Post("/api/runs", cfg.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 202);
  const std::string id = json::parse(res->body)["run_id"];

  const json run = wait_terminal(id);
  ASSERT_EQ(run["status"], "complete") << run.dump();
  const ExperimentConfig parsed = config_from_json(cfg);
  EXPECT_EQ(id, run_id_for(parsed));
  const RunArtifact direct = execute_run(parsed, 1);
  EXPECT_EQ(run["points"], sweep_to_json(direct.result));
  EXPECT_EQ(run["points"].size(), 5u);
  EXPECT_EQ(run["points"][0]["summaries"].size(), 4u);

  res = client().Post("/api/runs", cfg.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "complete");
}

TEST_F(ApiTest, DuplicateInFlightIs409) {
  const json heavy = run_config(6, 200, 20000);
  auto first = client().Post("/api/runs", heavy.dump(), "application/json");
  ASSERT_TRUE(first);
  ASSERT_EQ(first->status, 202);
  auto second = client().Post("/api/runs", heavy.dump(), "application/json");
  ASSERT_TRUE(second);
  EXPECT_EQ(second->status, 409);
  const std::string id = json::parse(first->body)["run_id"];
  const json view = json::parse(client().Get("/api/runs/" + id)->body);
  EXPECT_TRUE(view["status"] == "pending" || view["status"] == "running");
  wait_terminal(id);
}

TEST_F(ApiTest, ListAndPersistence) {
  auto list = json::parse(client().Get("/api/runs")->body);
  EXPECT_TRUE(list["runs"].empty());

  std::vector<std::string> ids;
  for (std::uint64_t seed : {11, 12}) {
    auto res = client().Post("/api/runs", run_config(seed).dump(), "application/json");
    ASSERT_EQ(res->status, 202);
    ids.push_back(json::parse(res->body)["run_id"]);
  }
  EXPECT_NE(ids[0], ids[1]);
  for (const auto& id : ids) EXPECT_EQ(wait_terminal(id)["status"], "complete");
  list = json::parse(client().Get("/api/runs")->body);
  EXPECT_EQ(list["runs"].size(), 2u);

  const json before = json::parse(client().Get("/api/runs/" + ids[0])->body);
  stop();
  start();
  auto res = client().Get("/api/runs/" + ids[0]);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body), before);
  EXPECT_EQ(json::parse(client().Get("/api/runs")->body)["runs"].size(), 2u);
}

TEST_F(ApiTest, ReadsStayResponsiveDuringRun) {
  auto res = client().Post("/api/runs", run_config(21, 100, 20000).dump(), "application/json");
  ASSERT_EQ(res->status, 202);
  const std::string id = json::parse(res->body)["run_id"];
  for (int i = 0; i < 20; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = client().Get("/api/runs/" + id);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
  }
  wait_terminal(id);
}

}  // namespace
}  // namespace xsite::app
