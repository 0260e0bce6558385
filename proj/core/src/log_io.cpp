#include "xsite/log_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "xsite/errors.hpp"

namespace xsite {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<Treatment> parse_treatment(std::string_view s, int period) {
  int arm = 0;
  if (s == "T1" || s == "1") arm = 1;
  else if (s == "T2" || s == "2") arm = 2;
  else if (s == "T3" || s == "3") arm = 3;
  else if (s == "T4" || s == "4") arm = 4;
  else return std::nullopt;
  if (period == 2 && arm <= 2) arm += 2;
  if (period == 1 && arm > 2) return std::nullopt;
  return static_cast<Treatment>(arm);
}

std::optional<Cluster> parse_cluster(std::string_view s) {
  if (s == "C1" || s == "1") return Cluster::C1;
  if (s == "C2" || s == "2") return Cluster::C2;
  return std::nullopt;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

IngestReport ingest_log(std::istream& in, const LogSchema& schema) {
  IngestReport report;
  std::string line;
  std::size_t line_no = 0;

  // Header: skip leading blank lines; an input without one is an empty log.
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto f : split(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) return report;

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!col.emplace(header[i], i).second) throw SchemaError("duplicate column '" + header[i] + "'");
  }
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = col.find(name);
    return it == col.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  };
  const auto c_key = find("user_key");
  const auto c_period = find("period");
  const auto c_cluster = find("cluster");
  const auto c_treatment = find("treatment");
  const auto c_outcome = find("outcome");

  std::vector<std::string> missing;
  if (!c_treatment) missing.emplace_back("treatment");
  if (!c_outcome) missing.emplace_back("outcome");
  if (schema.require_cluster && !c_cluster) missing.emplace_back("cluster");
  if (schema.require_user_key && !c_key) missing.emplace_back("user_key");
  if (!missing.empty()) {
    std::string msg = "missing required column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw SchemaError(msg);
  }

  std::vector<std::size_t> c_x;
  for (std::size_t j = 1;; ++j) {
    const auto c = find("x" + std::to_string(j));
    if (!c) break;
    c_x.push_back(*c);
  }
  for (const auto& [name, idx] : col) {
    if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const std::size_t j = std::stoul(name.substr(1));
      if (j == 0 || j > c_x.size()) {
        throw SchemaError("covariate columns must be numbered x1..xd without gaps (found '" + name + "')");
      }
    }
  }
  report.covariate_dim = c_x.size();
  report.has_user_key = c_key.has_value();
  report.has_cluster = c_cluster.has_value();

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    auto fail = [&](std::string msg) { report.errors.push_back({line_no, std::move(msg)}); };
    if (f.size() != header.size()) {
      fail("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
      continue;
    }
    LogRecord r;
    if (c_key) {
      if (f[*c_key].empty()) { fail("missing user_key"); continue; }
      r.user_key = std::string(f[*c_key]);
    }
    if (c_period) {
      if (f[*c_period] == "1") r.period = 1;
      else if (f[*c_period] == "2") r.period = 2;
      else { fail("period must be 1 or 2"); continue; }
    }
    if (c_cluster) {
      r.cluster = parse_cluster(f[*c_cluster]);
      if (!r.cluster) { fail("invalid cluster '" + std::string(f[*c_cluster]) + "'"); continue; }
    }
    const auto t = parse_treatment(f[*c_treatment], r.period);
    if (!t) { fail("invalid treatment '" + std::string(f[*c_treatment]) + "' for period " + std::to_string(r.period)); continue; }
    r.treatment = *t;
    if (f[*c_outcome].empty()) { fail("missing outcome"); continue; }
    const auto y = parse_double(f[*c_outcome]);
    if (!y || !std::isfinite(*y)) { fail("invalid outcome '" + std::string(f[*c_outcome]) + "'"); continue; }
    if (schema.binary_outcome && *y != 0.0 && *y != 1.0) {
      fail("outcome must be 0 or 1 for a binary schema, got '" + std::string(f[*c_outcome]) + "'");
      continue;
    }
    r.outcome = *y;
    bool ok = true;
    for (std::size_t j = 0; j < c_x.size() && ok; ++j) {
      const auto v = parse_double(f[c_x[j]]);
      if (!v || !std::isfinite(*v)) {
        fail("invalid covariate x" + std::to_string(j + 1));
        ok = false;
      } else {
        r.x.push_back(*v);
      }
    }
    if (ok) report.records.push_back(std::move(r));
  }
  return report;
}

IngestReport ingest_log(const std::string& path, const LogSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open log file '" + path + "'");
  return ingest_log(in, schema);
}

Site1Log to_site1_log(const std::vector<LogRecord>& records, std::size_t covariate_dim) {
  Site1Log log(covariate_dim);
  log.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LogRecord& r = records[i];
    if (!r.cluster) throw ValidationError("records[" + std::to_string(i) + "].cluster", "site-1 rows need a cluster");
    log.push_back(*r.cluster, r.treatment, r.outcome, r.x);
  }
  return log;
}

void write_site1_log_csv(std::ostream& out, const Site1Log& log) {
  out << "period,cluster,treatment,outcome";
  for (std::size_t j = 1; j <= log.covariate_dim(); ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t i = 0; i < log.size(); ++i) {
    out << "1," << to_string(log.cluster(i)) << ',' << to_string(log.treatment(i)) << ','
        << format_double(log.outcome(i));
    for (double v : log.covariates(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_keyed_log_csv(std::ostream& out, const std::vector<LogRecord>& records,
                         std::size_t covariate_dim) {
  out << "user_key,period,treatment,outcome";
  for (std::size_t j = 1; j <= covariate_dim; ++j) out << ",x" << j;
  out << '\n';
  for (const LogRecord& r : records) {
    if (!r.user_key || r.user_key->find(',') != std::string::npos) {
      throw ValidationError("user_key", "keyed records need a user_key without commas");
    }
    if (r.x.size() != covariate_dim) throw ValidationError("x", "covariate dimension mismatch");
    out << *r.user_key << ',' << r.period << ',' << to_string(r.treatment) << ','
        << format_double(r.outcome);
    for (double v : r.x) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace xsite
