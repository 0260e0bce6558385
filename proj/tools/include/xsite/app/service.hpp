#pragma once

// Run registry and HTTP front end.
//
//   POST /api/designs     DesignConfig JSON -> 200 {"valid":true,"design":{normalized}}
//   POST /api/runs        experiment config JSON -> 202 {"run_id","status":"pending"}
//                         200 when an identical run already completed,
//                         409 while an identical run is pending or running
//   GET  /api/runs        {"runs":[{"run_id","status","created_at","alpha","axis","n_points"}]}
//   GET  /api/runs/{id}   {"run_id","status","config", "points" (complete) | "error" (failed)}
//
// Invalid bodies get 400 {"error":"validation","field":..,"message":..};
// unknown run ids get 404.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "xsite/app/config_io.hpp"

namespace httplib {
class Server;
}

namespace xsite::app {

enum class RunStatus { Pending, Running, Complete, Failed };

std::string_view to_string(RunStatus s);

class RunService {
 public:
  /// Loads persisted runs from `state_dir`/runs. `sweep_threads` = 0 uses the
  /// hardware default.
  explicit RunService(std::filesystem::path state_dir, std::size_t workers = 2,
                      std::size_t sweep_threads = 0);
  ~RunService();

  RunService(const RunService&) = delete;
  RunService& operator=(const RunService&) = delete;

  enum class SubmitOutcome { Accepted, AlreadyComplete, InFlight };

  struct Submission {
    SubmitOutcome outcome;
    std::string run_id;
    RunStatus status;
  };

  Submission submit(const ExperimentConfig& config);

  /// Full run view, or nullopt for an unknown id.
  std::optional<nlohmann::json> get(const std::string& run_id) const;
  nlohmann::json list() const;

  /// Blocks until the run leaves pending/running or the timeout expires.
  bool wait(const std::string& run_id, std::chrono::milliseconds timeout) const;

  const std::filesystem::path& state_dir() const noexcept { return state_dir_; }

 private:
  struct Entry {
    RunStatus status = RunStatus::Pending;
    ExperimentConfig config;
    std::string created_at;
    std::shared_ptr<const nlohmann::json> points;
    std::string error;
  };

  void worker_loop(std::stop_token stop);
  void execute(const std::string& run_id);
  void persist(const std::string& run_id, const Entry& entry) const;
  void load_persisted();
  nlohmann::json view(const std::string& run_id, const Entry& e) const;

  std::filesystem::path state_dir_;
  std::size_t sweep_threads_;

  mutable std::shared_mutex runs_mutex_;
  std::map<std::string, Entry> runs_;
  mutable std::condition_variable_any status_changed_;

  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::deque<std::string> queue_;

  std::vector<std::jthread> workers_;
};

/// Binds the API routes onto `server`.
void mount_api(httplib::Server& server, RunService& service);

/// Blocking: serves the API on host:port until the process is stopped.
int serve(const std::string& host, int port, const std::filesystem::path& state_dir,
          std::size_t workers = 2);

}  // namespace xsite::app
