#pragma once

// Structured run reports. The JSON body is byte-identical across runs with
// the same config; wall-clock time is kept outside of it.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace incgraph {

struct Curve {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

using MetricList = std::vector<std::pair<std::string, double>>;

struct EvalReport {
  std::string task;
  MetricList metrics;  // every value in [0, 1]
  MetricList stats;    // unbounded numbers: counts, errors, coefficients
  std::map<std::string, MetricList> groups;
  std::map<std::string, Curve> curves;
  std::vector<std::pair<std::string, std::string>> notes;
  int restarts = 0;
  double wall_seconds = 0.0;
  std::string config_text;

  void set_metric(const std::string& name, double value);
  void set_stat(const std::string& name, double value);
  /// Throws InputError when absent.
  double metric(const std::string& name) const;
  double stat(const std::string& name) const;
  bool has_metric(const std::string& name) const;
};

/// JSON document without the wall-clock field.
std::string report_body(const EvalReport& r);
/// Full JSON document including wall_seconds.
std::string report_json(const EvalReport& r);

std::string curve_csv(const Curve& c);

/// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string content_hash(const std::string& text);

/// Writes <task>-<hash>.json and one <task>-<hash>-<curve>.csv per curve
/// into `dir`; returns the report path.
std::filesystem::path write_report(const EvalReport& r,
                                   const std::filesystem::path& dir);

}  // namespace incgraph
