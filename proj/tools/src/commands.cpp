#include "xsite/app/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "xsite/errors.hpp"
#include "xsite/log_io.hpp"
#include "xsite/scenario.hpp"

namespace xsite::app {

using nlohmann::json;
namespace fs = std::filesystem;

int report_error(std::ostream& err) {
  try {
    throw;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const EmptyCellError& e) {
    err << "empty cell: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ScenarioError& e) {
    err << "scenario error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

namespace {

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << contents;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

json estimate_json(const EffectEstimate& e) {
  json j{{"method", std::string(to_string(e.method))},
         {"point", e.point},
         {"std_error", e.std_error},
         {"n_total", e.n_total}};
  if (e.ci) j["ci"] = {{"lo", e.ci->lo}, {"hi", e.ci->hi}, {"level", e.ci->level}};
  return j;
}

json cells_json(const CellQuartet& q) {
  json cells = json::array();
  for (const CellSummary& c : q.cells()) {
    cells.push_back(json{{"cluster", std::string(to_string(c.cluster))},
                         {"treatment", std::string(to_string(c.treatment))},
                         {"n", c.n},
                         {"mean", c.mean},
                         {"sample_variance", c.sample_variance}});
  }
  return cells;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(field, "cannot parse number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

RunArtifact cmd_simulate(const std::string& config_path, const std::string& out_dir,
                         std::optional<std::uint64_t> seed, std::ostream& out) {
  ExperimentConfig config = load_config(config_path);
  if (seed) config.spec.seed = *seed;
  RunArtifact artifact = execute_run(config);

  fs::create_directories(out_dir);
  std::ostringstream csv;
  write_sweep_csv(csv, artifact.result);
  write_file(fs::path(out_dir) / "sweep.csv", csv.str());
  write_file(fs::path(out_dir) / "sweep.json", sweep_rows_json(artifact).dump(2) + "\n");
  write_file(fs::path(out_dir) / "manifest.json", artifact_to_json(artifact).dump(2) + "\n");
  print_summary(out, artifact);
  out << "wrote " << (fs::path(out_dir) / "sweep.csv").string() << '\n';
  return artifact;
}

CovariateBinning parse_bins(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("--bins", "expected COLUMN:CUT[,CUT...] e.g. x1:0");
  std::string column = text.substr(0, colon);
  if (!column.empty() && column[0] == 'x') column.erase(0, 1);
  CovariateBinning b;
  try {
    const long idx = std::stol(column);
    if (idx < 1) throw std::out_of_range(column);
    b.column = static_cast<std::size_t>(idx - 1);
  } catch (const std::exception&) {
    throw ValidationError("--bins", "covariate column must be x1, x2, ...");
  }
  b.cuts = parse_number_list(text.substr(colon + 1), "--bins");
  if (b.cuts.empty()) throw ValidationError("--bins", "at least one cut point is required");
  return b;
}

OutcomeBounds parse_bounds(const std::string& text) {
  const auto v = parse_number_list(text, "--bounds");
  if (v.size() != 2 || !(v[0] <= v[1])) throw ValidationError("--bounds", "expected lo,hi with lo <= hi");
  return {v[0], v[1]};
}

json cmd_estimate(const EstimateOptions& options, std::ostream& out) {
  require_identifiable_alpha(options.alpha, "--alpha");
  LogSchema schema;
  schema.binary_outcome = options.binary;
  const IngestReport report = ingest_log(options.log_path, schema);
  std::optional<OutcomeBounds> bounds = options.bounds;
  if (!bounds && options.binary) bounds = OutcomeBounds{0.0, 1.0};

  const Site1Log log = to_site1_log(report.records, report.covariate_dim);
  const CellQuartet quartet = summarize_cells(log, bounds);

  json result{{"schema_version", kSchemaVersion},
              {"alpha", options.alpha},
              {"n_rows", log.size()},
              {"covariate_dim", log.covariate_dim()},
              {"cells", cells_json(quartet)}};
  json errors = json::array();
  for (const RowError& e : report.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  result["row_errors"] = errors;

  json estimates = json::array();
  estimates.push_back(estimate_json(naive_ate(quartet, options.level)));
  estimates.push_back(estimate_json(corrected_te(quartet, options.alpha, options.level)));
  if (log.covariate_dim() > 0) {
    estimates.push_back(estimate_json(naive_adjusted_ate(log, options.level)));
    estimates.push_back(estimate_json(covariate_adjusted_ate(log, options.alpha, options.level)));
  }
  result["estimates"] = estimates;

  const VarianceBound vb = variance_bound(quartet, options.alpha);
  result["variance_bound"] = {{"v_min", vb.v_min},
                              {"v_max", vb.v_max},
                              {"multiplier", vb.multiplier},
                              {"var_lower", vb.var_lower},
                              {"var_upper", vb.var_upper}};
  if (bounds) {
    const ConfidenceInterval ci = hoeffding_ci(quartet, options.alpha, options.level);
    result["hoeffding_ci"] = {{"lo", ci.lo}, {"hi", ci.hi}, {"level", ci.level}};
  }
  if (options.bins) {
    json cate = json::array();
    for (const BinEstimate& b : corrected_cate(bin_by_covariate(log, *options.bins), options.alpha, options.level)) {
      json e = estimate_json(b.estimate);
      e["bin"] = b.label;
      cate.push_back(e);
    }
    result["cate"] = cate;
  }

  for (const RowError& e : report.errors) out << "warning: line " << e.line << ": " << e.message << '\n';
  char line[160];
  for (const json& e : result["estimates"]) {
    std::snprintf(line, sizeof line, "%-16s %+10.4f  se %8.4f  95%% CI [%+.4f, %+.4f]\n",
                  e["method"].get<std::string>().c_str(), e["point"].get<double>(),
                  e["std_error"].get<double>(), e["ci"]["lo"].get<double>(), e["ci"]["hi"].get<double>());
    out << line;
  }
  out << result.dump(2) << '\n';
  return result;
}

void cmd_generate_log(const GenerateLogOptions& options, std::ostream& out) {
  const ExperimentConfig config = load_config(options.config_path);
  const Replication rep = run_replication(config.spec, config.design, options.rep);
  {
    std::ostringstream os;
    write_site1_log_csv(os, rep.log);
    write_file(options.site1_out, os.str());
  }
  out << "wrote " << rep.log.size() << " site-1 rows to " << options.site1_out << '\n';
  if (!options.keyed_out.empty()) {
    const auto records = generate_keyed_log(config.spec, options.rep);
    std::ostringstream os;
    write_keyed_log_csv(os, records, config.spec.covariate_dim());
    write_file(options.keyed_out, os.str());
    out << "wrote " << records.size() << " keyed records to " << options.keyed_out << '\n';
  }
  out << "true effect " << format_double(config.spec.true_effect()) << '\n';
}

json cmd_resample(const ResampleOptions& options, std::ostream& out) {
  const ExperimentConfig config = load_config(options.config_path);
  LogSchema schema;
  schema.require_cluster = false;
  schema.require_user_key = true;
  const IngestReport report = ingest_log(options.keyed_log_path, schema);
  ScenarioOptions so;
  so.n_out = options.n_out;
  const ScenarioResult r = resample_scenario(report.records, options.p_target, config.design, options.seed, so);
  if (!options.out_path.empty()) {
    std::ostringstream os;
    write_site1_log_csv(os, r.log);
    write_file(options.out_path, os.str());
  }
  const CellQuartet q = summarize_cells(r.log);
  json result{{"schema_version", kSchemaVersion},
              {"p_target", options.p_target},
              {"realized_shared_fraction", r.realized_shared_fraction},
              {"attainable_max", r.attainable_max},
              {"n_rows", r.log.size()},
              {"true_te", r.true_te},
              {"estimates",
               {estimate_json(naive_ate(q)), estimate_json(corrected_te(q, config.design.alpha))}}};
  out << result.dump(2) << '\n';
  return result;
}

}  // namespace xsite::app
