#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "collapse/quadrature.hpp"

namespace collapse {

/// Scalar outcome of a diagnostic, real or complex, with its error bar.
struct ResultEntry {
  std::string name;
  double re = 0.0;
  double im = 0.0;
  double error = 0.0;
  bool converged = true;
  long evaluations = 0;
  bool complex_valued = false;

  static ResultEntry real(const std::string& name, const IntegralResult& r);
  static ResultEntry complex(const std::string& name,
                             const ComplexIntegralResult& r);
};

struct ScanEntry {
  std::string name;
  std::string verdict;
  std::vector<ScanPoint> points;
};

/// Generic tabular series (evolution histories, probe sweeps).
struct SeriesEntry {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct VerdictEntry {
  std::string name;
  std::string value;
};

/// Persisted record of a run. Serialization is deterministic: identical
/// content yields byte-identical JSON. Wall-clock timing deliberately stays
/// out of the report (it goes to the log stream) so that reruns with the
/// same configuration and seed reproduce artifacts bit for bit.
struct Report {
  int schema = 1;
  std::string toolkit_version;
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string request_echo;  // canonicalized configuration JSON
  std::vector<ResultEntry> results;
  std::vector<ScanEntry> scans;
  std::vector<SeriesEntry> series;
  std::vector<VerdictEntry> verdicts;
};

std::string to_json_string(const Report& report);
void write_report(const Report& report, const std::string& path);
Report read_report(const std::string& path);

/// One CSV per scan and per series, named <report-stem>.<series-name>.csv,
/// with an RFC 4180 header row. Returns the paths written. Deterministic
/// and idempotent.
std::vector<std::string> emit_plot_data(const std::string& report_path,
                                        const std::string& out_dir);

/// FNV-1a 64-bit hash of a byte string, as fixed-width hex.
std::string fnv1a_hex(const std::string& bytes);

/// Shortest round-trip decimal form of a double (used in CSV output).
std::string format_double(double v);

}  // namespace collapse
