#include "xsite/app/artifact.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <ostream>

#include "xsite/errors.hpp"
#include "xsite/log_io.hpp"

namespace xsite::app {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunArtifact execute_run(const ExperimentConfig& config, std::size_t threads) {
  RunArtifact a;
  a.run_id = run_id_for(config);
  a.config = config;
  a.result = sweep(config.sweep, config.spec, config.design, config.methods,
                   threads == 0 ? default_thread_count() : threads);
  a.created_at = utc_timestamp();
  return a;
}

json summary_to_json(const ReplicationSummary& s) {
  return json{{"method", std::string(to_string(s.method))},
              {"mean_estimate", s.mean_estimate},
              {"true_te", s.true_te},
              {"bias", s.bias},
              {"se", s.std_error_of_estimate},
              {"n_reps", s.n_reps}};
}

json sweep_to_json(const SweepResult& r) {
  json points = json::array();
  for (const SweepPoint& p : r.points) {
    json summaries = json::array();
    for (const auto& s : p.summaries) summaries.push_back(summary_to_json(s));
    points.push_back(json{{"axis", std::string(to_string(p.axis))},
                          {"value", p.value},
                          {"true_te", p.true_te},
                          {"summaries", summaries},
                          {"failures", p.failures}});
  }
  return points;
}

namespace {

double number_or_nan(const json& j) {
  return j.is_number() ? j.get<double>() : std::nan("");
}

}  // namespace

SweepResult sweep_from_json(const json& j) {
  SweepResult r;
  for (const json& p : j) {
    SweepPoint pt;
    pt.axis = sweep_axis_from_string(p.at("axis").get<std::string>());
    pt.value = p.at("value").get<double>();
    pt.true_te = number_or_nan(p.at("true_te"));
    pt.failures = p.at("failures").get<std::vector<std::string>>();
    for (const json& s : p.at("summaries")) {
      ReplicationSummary rs;
      rs.method = method_from_string(s.at("method").get<std::string>());
      rs.mean_estimate = number_or_nan(s.at("mean_estimate"));
      rs.true_te = number_or_nan(s.at("true_te"));
      rs.bias = number_or_nan(s.at("bias"));
      rs.std_error_of_estimate = number_or_nan(s.at("se"));
      rs.n_reps = s.at("n_reps").get<std::size_t>();
      pt.summaries.push_back(rs);
    }
    r.points.push_back(std::move(pt));
  }
  return r;
}

json artifact_to_json(const RunArtifact& a) {
  return json{{"schema_version", kSchemaVersion},
              {"run_id", a.run_id},
              {"created_at", a.created_at},
              {"config", config_to_json(a.config)},
              {"points", sweep_to_json(a.result)}};
}

RunArtifact artifact_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw ValidationError("schema_version", "artifact has no schema_version");
  }
  if (j["schema_version"].get<int>() != kSchemaVersion) {
    throw ValidationError("schema_version", "unsupported artifact schema version " +
                                                std::to_string(j["schema_version"].get<int>()));
  }
  RunArtifact a;
  try {
    a.run_id = j.at("run_id").get<std::string>();
    a.created_at = j.at("created_at").get<std::string>();
    a.config = config_from_json(j.at("config"));
    a.result = sweep_from_json(j.at("points"));
  } catch (const json::exception& e) {
    throw ValidationError("artifact", std::string("malformed artifact: ") + e.what());
  }
  return a;
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "axis,value,method,true_te,mean_estimate,bias,se,mc_error,n_reps\n";
  for (const SweepPoint& p : r.points) {
    for (const auto& s : p.summaries) {
      out << to_string(p.axis) << ',' << format_double(p.value) << ',' << to_string(s.method) << ','
          << format_double(s.true_te) << ',' << format_double(s.mean_estimate) << ','
          << format_double(s.bias) << ',' << format_double(s.std_error_of_estimate) << ','
          << format_double(s.mc_error()) << ',' << s.n_reps << '\n';
    }
  }
}

json sweep_rows_json(const RunArtifact& a) {
  json rows = json::array();
  for (const SweepPoint& p : a.result.points) {
    for (const auto& s : p.summaries) {
      rows.push_back(json{{"axis", std::string(to_string(p.axis))},
                          {"value", p.value},
                          {"method", std::string(to_string(s.method))},
                          {"true_te", s.true_te},
                          {"mean_estimate", s.mean_estimate},
                          {"bias", s.bias},
                          {"se", s.std_error_of_estimate},
                          {"mc_error", s.mc_error()},
                          {"n_reps", s.n_reps}});
    }
  }
  return json{{"schema_version", kSchemaVersion}, {"run_id", a.run_id}, {"rows", rows}};
}

void print_summary(std::ostream& out, const RunArtifact& a) {
  const auto& spec = a.config.spec;
  out << "run " << a.run_id << "  alpha=" << a.config.design.alpha << "  N=" << spec.n_users
      << "  reps=" << spec.n_reps << "  seed=" << spec.seed << '\n';
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s  %-16s %10s %10s %10s %10s\n", "axis", "value",
                "method", "true_te", "mean", "bias", "se");
  out << line;
  for (const SweepPoint& p : a.result.points) {
    for (const auto& s : p.summaries) {
      std::snprintf(line, sizeof line, "%-10s %10.4f  %-16s %10.4f %10.4f %+10.4f %10.4f\n",
                    std::string(to_string(p.axis)).c_str(), p.value,
                    std::string(to_string(s.method)).c_str(), s.true_te, s.mean_estimate, s.bias,
                    s.std_error_of_estimate);
      out << line;
    }
    if (!p.failures.empty()) out << "  " << p.failures.size() << " failure(s), first: " << p.failures.front() << '\n';
  }
}

}  // namespace xsite::app
