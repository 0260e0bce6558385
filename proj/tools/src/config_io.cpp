#include "xsite/app/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "xsite/errors.hpp"
#include "xsite/log_io.hpp"
#include "xsite/randomization.hpp"

namespace xsite::app {

using nlohmann::json;

namespace {

/// Typed access to one JSON object with path-qualified diagnostics.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) const {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return number(key);
  }
  double number(const std::string& key) const {
    if (!has(key)) throw ValidationError(field(key), "required field is missing");
    const json& v = j_.at(key);
    if (!v.is_number()) throw ValidationError(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(field(key), "must be finite");
    return d;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ValidationError(field(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ValidationError(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ValidationError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ValidationError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        throw ValidationError(field(key) + "[" + std::to_string(i) + "]", "expected a finite number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  /// Rejects keys that were never looked up.
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ValidationError(field(k), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

/// Prefixes a library ValidationError field with the JSON object path.
template <typename F>
void rethrow_under(const std::string& prefix, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    std::string field = e.field();
    if (!prefix.empty() && field.rfind(prefix + ".", 0) != 0) field = prefix + "." + field;
    std::string msg = e.what();
    if (!e.field().empty() && msg.rfind(e.field() + ": ", 0) == 0) msg = msg.substr(e.field().size() + 2);
    throw ValidationError(field, msg);
  }
}

/// Reports any ValidationError from `f` at `field`, keeping its text.
template <typename F>
void rethrow_as(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(field, e.what());
  }
}

ExposureValues mu_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ExposureValues mu(r.number("y10"), r.number("y20"), r.number("y13"), r.number("y14"),
                    r.number("y23"), r.number("y24"));
  r.finish();
  return mu;
}

SyntheticSpec spec_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SyntheticSpec s;
  if (!r.has("mu")) throw ValidationError(r.field("mu"), "required field is missing");
  s.mu = mu_from_json(r.raw("mu"), r.field("mu"));
  s.noise_sd = r.number("noise_sd", s.noise_sd);
  s.covariate_coeffs = r.numbers("covariate_coeffs", {});
  if (r.has("covariate_dim")) {
    const auto d = r.unsigned_integer("covariate_dim", 0);
    if (!r.has("covariate_coeffs")) {
      s.covariate_coeffs.assign(d, 1.0);
    } else if (d != s.covariate_coeffs.size()) {
      throw ValidationError(r.field("covariate_dim"), "does not match the length of covariate_coeffs");
    }
  }
  s.p_overlap = r.number("p_overlap", s.p_overlap);
  s.n_users = r.unsigned_integer("n_users", s.n_users);
  s.n_reps = r.unsigned_integer("n_reps", s.n_reps);
  s.seed = r.unsigned_integer("seed", s.seed);
  const std::string model = r.string("outcome_model", "gaussian");
  if (model == "gaussian") s.outcome_model = OutcomeModel::Gaussian;
  else if (model == "bernoulli") s.outcome_model = OutcomeModel::Bernoulli;
  else throw ValidationError(r.field("outcome_model"), "expected \"gaussian\" or \"bernoulli\"");

  for (const char* key : {"delta1", "delta2"}) {
    if (!r.has(key)) continue;
    const double given = r.number(key);
    const double implied = std::string(key) == "delta1" ? s.delta1() : s.delta2();
    if (std::abs(given - implied) > 1e-12 * std::max(1.0, std::abs(implied))) {
      throw ValidationError(r.field(key), "inconsistent with mu (mu implies " + format_double(implied) + ")");
    }
  }
  r.finish();
  rethrow_under(path, [&] { s.validate(); });
  return s;
}

}  // namespace

DesignConfig design_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DesignConfig d;
  d.alpha = r.number("alpha");
  d.n_clusters = static_cast<int>(r.unsigned_integer("n_clusters", 2));
  d.cluster_salt = r.unsigned_integer("cluster_salt", d.cluster_salt);
  d.site1_split = r.number("site1_split", d.site1_split);
  d.test_mode = r.boolean("test_mode", d.test_mode);
  if (r.has("treatment_labels")) {
    const json& labels = r.raw("treatment_labels");
    if (!labels.is_array() || labels.size() != 4) {
      throw ValidationError(r.field("treatment_labels"), "expected an array of 4 strings");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (!labels[i].is_string()) {
        throw ValidationError(r.field("treatment_labels") + "[" + std::to_string(i) + "]", "expected a string");
      }
      d.treatment_labels[i] = labels[i].get<std::string>();
    }
  }
  r.finish();
  rethrow_under(path, [&] { d.validate(); });
  return d;
}

json design_to_json(const DesignConfig& d) {
  return json{{"alpha", d.alpha},
              {"n_clusters", d.n_clusters},
              {"cluster_salt", d.cluster_salt},
              {"treatment_labels", d.treatment_labels},
              {"site1_split", d.site1_split},
              {"test_mode", d.test_mode}};
}

ExperimentConfig config_from_json(const json& j) {
  ObjectReader r(j, "");
  const auto version = r.unsigned_integer("schema_version", kSchemaVersion);
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    throw ValidationError("schema_version", "unsupported schema version " + std::to_string(version));
  }
  ExperimentConfig c;
  if (!r.has("design")) throw ValidationError("design", "required field is missing");
  if (!r.has("spec")) throw ValidationError("spec", "required field is missing");
  c.design = design_from_json(r.raw("design"), "design");
  c.spec = spec_from_json(r.raw("spec"), "spec");

  c.sweep.axis = SweepAxis::POverlap;
  c.sweep.values = {c.spec.p_overlap};
  if (r.has("sweep")) {
    ObjectReader s(r.raw("sweep"), "sweep");
    const std::string axis = s.string("axis", "p_overlap");
    rethrow_as("sweep.axis", [&] { c.sweep.axis = sweep_axis_from_string(axis); });
    c.sweep.values = s.numbers("values", {});
    if (c.sweep.values.empty()) throw ValidationError("sweep.values", "grid must be non-empty");
    s.finish();
    for (std::size_t i = 0; i < c.sweep.values.size(); ++i) {
      rethrow_as("sweep.values[" + std::to_string(i) + "]",
                    [&] { apply_axis(c.spec, c.sweep.axis, c.sweep.values[i]).validate(); });
    }
  }
  if (r.has("methods")) {
    const json& m = r.raw("methods");
    if (!m.is_array() || m.empty()) throw ValidationError("methods", "expected a non-empty array of method names");
    c.methods.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string f = "methods[" + std::to_string(i) + "]";
      if (!m[i].is_string()) throw ValidationError(f, "expected a string");
      const Method method = method_from_string(m[i].get<std::string>());
      if (method == Method::CATE || method == Method::TrueOracle) {
        throw ValidationError(f, "not a replication estimator");
      }
      c.methods.push_back(method);
    }
  }
  r.finish();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  const SyntheticSpec& s = c.spec;
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  return json{
      {"schema_version", kSchemaVersion},
      {"design", design_to_json(c.design)},
      {"spec",
       {{"mu",
         {{"y10", s.mu.y10()}, {"y20", s.mu.y20()}, {"y13", s.mu.y13()},
          {"y14", s.mu.y14()}, {"y23", s.mu.y23()}, {"y24", s.mu.y24()}}},
        {"delta1", s.delta1()},
        {"delta2", s.delta2()},
        {"noise_sd", s.noise_sd},
        {"covariate_dim", s.covariate_dim()},
        {"covariate_coeffs", s.covariate_coeffs},
        {"p_overlap", s.p_overlap},
        {"n_users", s.n_users},
        {"n_reps", s.n_reps},
        {"seed", s.seed},
        {"outcome_model", std::string(to_string(s.outcome_model))}}},
      {"sweep", {{"axis", std::string(to_string(c.sweep.axis))}, {"values", c.sweep.values}}},
      {"methods", methods},
  };
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path, std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::string run_id_for(const ExperimentConfig& c) {
  const std::string canonical = config_to_json(c).dump();
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(cluster_hash(canonical, 0x72756e2d6964ULL)),
                static_cast<unsigned long long>(cluster_hash(canonical, 0x6964322d72756eULL)));
  return buf;
}

}  // namespace xsite::app
