#include "xsite/app/service.hpp"

#include <fstream>
#include <iostream>
#include <regex>

#include <httplib.h>

#include "xsite/app/artifact.hpp"
#include "xsite/errors.hpp"

namespace xsite::app {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Pending: return "pending";
    case RunStatus::Running: return "running";
    case RunStatus::Complete: return "complete";
    case RunStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

RunStatus status_from_string(const std::string& s) {
  for (RunStatus st : {RunStatus::Pending, RunStatus::Running, RunStatus::Complete, RunStatus::Failed}) {
    if (to_string(st) == s) return st;
  }
  throw ValidationError("status", "unknown run status '" + s + "'");
}

bool in_flight(RunStatus s) { return s == RunStatus::Pending || s == RunStatus::Running; }

}  // namespace

RunService::RunService(fs::path state_dir, std::size_t workers, std::size_t sweep_threads)
    : state_dir_(std::move(state_dir)), sweep_threads_(sweep_threads) {
  fs::create_directories(state_dir_ / "runs");
  load_persisted();
  workers = std::max<std::size_t>(workers, 1);
  for (std::size_t i = 0; i < workers; ++i) {
    workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
  }
}

RunService::~RunService() {
  for (auto& w : workers_) w.request_stop();
  queue_cv_.notify_all();
  workers_.clear();
}

RunService::Submission RunService::submit(const ExperimentConfig& config) {
  const std::string id = run_id_for(config);
  {
    std::unique_lock lock(runs_mutex_);
    const auto it = runs_.find(id);
    if (it != runs_.end()) {
      if (in_flight(it->second.status)) return {SubmitOutcome::InFlight, id, it->second.status};
      if (it->second.status == RunStatus::Complete) return {SubmitOutcome::AlreadyComplete, id, RunStatus::Complete};
    }
    Entry e;
    e.config = config;
    e.created_at = utc_timestamp();
    runs_[id] = std::move(e);
  }
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(id);
  }
  queue_cv_.notify_one();
  return {SubmitOutcome::Accepted, id, RunStatus::Pending};
}

void RunService::worker_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    std::string id;
    {
      std::unique_lock lock(queue_mutex_);
      if (!queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      id = std::move(queue_.front());
      queue_.pop_front();
    }
    execute(id);
  }
}

void RunService::execute(const std::string& run_id) {
  ExperimentConfig config;
  {
    std::unique_lock lock(runs_mutex_);
    Entry& e = runs_.at(run_id);
    e.status = RunStatus::Running;
    config = e.config;
  }
  status_changed_.notify_all();

  std::shared_ptr<const json> points;
  std::string error;
  try {
    const RunArtifact a = execute_run(config, sweep_threads_);
    points = std::make_shared<const json>(sweep_to_json(a.result));
  } catch (const std::exception& ex) {
    error = ex.what();
  }

  Entry snapshot;
  {
    std::unique_lock lock(runs_mutex_);
    Entry& e = runs_.at(run_id);
    e.points = points;
    e.error = error;
    e.status = points ? RunStatus::Complete : RunStatus::Failed;
    snapshot = e;
  }
  try {
    persist(run_id, snapshot);
  } catch (const std::exception& ex) {
    std::cerr << "failed to persist run " << run_id << ": " << ex.what() << '\n';
  }
  status_changed_.notify_all();
}

void RunService::persist(const std::string& run_id, const Entry& e) const {
  json j{{"schema_version", kSchemaVersion},
         {"run_id", run_id},
         {"status", std::string(to_string(e.status))},
         {"created_at", e.created_at},
         {"config", config_to_json(e.config)}};
  if (e.points) j["points"] = *e.points;
  if (!e.error.empty()) j["error"] = e.error;
  const fs::path final_path = state_dir_ / "runs" / (run_id + ".json");
  const fs::path tmp = final_path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << j.dump(2) << '\n';
    if (!f) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

void RunService::load_persisted() {
  for (const auto& file : fs::directory_iterator(state_dir_ / "runs")) {
    if (file.path().extension() != ".json") continue;
    try {
      std::ifstream in(file.path());
      const json j = json::parse(in);
      if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
        throw ValidationError("schema_version", "unsupported or missing schema_version");
      }
      Entry e;
      e.status = status_from_string(j.at("status").get<std::string>());
      if (in_flight(e.status)) continue;
      e.config = config_from_json(j.at("config"));
      e.created_at = j.at("created_at").get<std::string>();
      if (j.contains("points")) e.points = std::make_shared<const json>(j["points"]);
      if (j.contains("error")) e.error = j["error"].get<std::string>();
      runs_[j.at("run_id").get<std::string>()] = std::move(e);
    } catch (const std::exception& ex) {
      std::cerr << "skipping " << file.path() << ": " << ex.what() << '\n';
    }
  }
}

json RunService::view(const std::string& run_id, const Entry& e) const {
  json j{{"schema_version", kSchemaVersion},
         {"run_id", run_id},
         {"status", std::string(to_string(e.status))},
         {"created_at", e.created_at},
         {"config", config_to_json(e.config)}};
  if (e.points) j["points"] = *e.points;
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

std::optional<json> RunService::get(const std::string& run_id) const {
  std::shared_lock lock(runs_mutex_);
  const auto it = runs_.find(run_id);
  if (it == runs_.end()) return std::nullopt;
  return view(run_id, it->second);
}

json RunService::list() const {
  std::shared_lock lock(runs_mutex_);
  json runs = json::array();
  for (const auto& [id, e] : runs_) {
    runs.push_back(json{{"run_id", id},
                        {"status", std::string(to_string(e.status))},
                        {"created_at", e.created_at},
                        {"alpha", e.config.design.alpha},
                        {"axis", std::string(to_string(e.config.sweep.axis))},
                        {"n_points", e.config.sweep.values.size()}});
  }
  return json{{"runs", runs}};
}

bool RunService::wait(const std::string& run_id, std::chrono::milliseconds timeout) const {
  std::shared_lock lock(runs_mutex_);
  return status_changed_.wait_for(lock, timeout, [&] {
    const auto it = runs_.find(run_id);
    return it != runs_.end() && !in_flight(it->second.status);
  });
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_validation_error(httplib::Response& res, const ValidationError& e) {
  send_json(res, 400, json{{"error", "validation"}, {"field", e.field()}, {"message", e.what()}});
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    send_json(res, 400, json{{"error", "validation"}, {"field", ""}, {"message", std::string("invalid JSON: ") + e.what()}});
    return std::nullopt;
  }
}

}  // namespace

void mount_api(httplib::Server& server, RunService& service) {
  server.Post("/api/designs", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req, res);
    if (!body) return;
    try {
      const DesignConfig d = design_from_json(*body, "");
      send_json(res, 200, json{{"valid", true}, {"design", design_to_json(d)}});
    } catch (const ValidationError& e) {
      send_validation_error(res, e);
    }
  });

  server.Post("/api/runs", [&service](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req, res);
    if (!body) return;
    ExperimentConfig config;
    try {
      config = config_from_json(*body);
    } catch (const ValidationError& e) {
      send_validation_error(res, e);
      return;
    }
    const auto sub = service.submit(config);
    const json out{{"run_id", sub.run_id}, {"status", std::string(to_string(sub.status))}};
    switch (sub.outcome) {
      case RunService::SubmitOutcome::Accepted: send_json(res, 202, out); break;
      case RunService::SubmitOutcome::AlreadyComplete: send_json(res, 200, out); break;
      case RunService::SubmitOutcome::InFlight: {
        json conflict = out;
        conflict["error"] = "duplicate";
        conflict["message"] = "an identical run is already in flight";
        send_json(res, 409, conflict);
        break;
      }
    }
  });

  server.Get("/api/runs", [&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, service.list());
  });

  server.Get(R"(/api/runs/([0-9a-zA-Z]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    const auto run = service.get(req.matches[1]);
    if (!run) {
      send_json(res, 404, json{{"error", "not_found"}, {"run_id", std::string(req.matches[1])}});
      return;
    }
    send_json(res, 200, *run);
  });
}

int serve(const std::string& host, int port, const fs::path& state_dir, std::size_t workers) {
  RunService service(state_dir, workers);
  httplib::Server server;
  mount_api(server, service);
  std::cout << "listening on http://" << host << ':' << port << " (state: " << state_dir.string() << ")\n";
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ':' << port << '\n';
    return 3;
  }
  return 0;
}

}  // namespace xsite::app
