#pragma once

// CSV logs.
//
// Header row required; columns are matched by name, in any order:
//   user_key   optional  opaque visitor id (keyed historical logs only)
//   period     optional  1 or 2, default 1
//   cluster    required unless LogSchema::require_cluster is false; C1|C2|1|2
//   treatment  required  T1|T2|T3|T4 (or 1..4); in period 2, T1/T2 mean the
//                        second website's first/second arm (T3/T4)
//   outcome    required  real; 0/1 when LogSchema::binary_outcome is set
//   x1..xd     optional  real covariates, numbered contiguously from 1

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xsite/core_model.hpp"
#include "xsite/site1_log.hpp"

namespace xsite {

struct LogSchema {
  bool binary_outcome = false;
  bool require_cluster = true;
  bool require_user_key = false;
};

struct LogRecord {
  std::optional<std::string> user_key;
  int period = 1;
  std::optional<Cluster> cluster;
  Treatment treatment = Treatment::T1;
  double outcome = 0.0;
  std::vector<double> x;

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestReport {
  std::vector<LogRecord> records;
  std::vector<RowError> errors;
  std::size_t covariate_dim = 0;
  bool has_user_key = false;
  bool has_cluster = false;
};

/// Missing required columns raise SchemaError; bad rows are reported in
/// `errors` with their 1-based line number and left out of `records`.
IngestReport ingest_log(std::istream& in, const LogSchema& schema = {});
IngestReport ingest_log(const std::string& path, const LogSchema& schema = {});

/// Site-1 view of ingested records. Throws ValidationError on rows without a
/// cluster or with a website-2 treatment.
Site1Log to_site1_log(const std::vector<LogRecord>& records, std::size_t covariate_dim);

/// Writes period,cluster,treatment,outcome,x1..xd with round-trip precision.
void write_site1_log_csv(std::ostream& out, const Site1Log& log);

/// Writes user_key,period,treatment,outcome,x1..xd (clusters are derived from
/// keys when the log is replayed).
void write_keyed_log_csv(std::ostream& out, const std::vector<LogRecord>& records,
                         std::size_t covariate_dim);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace xsite
