#include "incgraph/report.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "incgraph/errors.hpp"
#include "incgraph/events.hpp"

namespace incgraph {

namespace {

using Json = nlohmann::ordered_json;

void upsert(MetricList& list, const std::string& name, double value) {
  for (auto& [k, v] : list) {
    if (k == name) {
      v = value;
      return;
    }
  }
  list.emplace_back(name, value);
}

const double* lookup(const MetricList& list, const std::string& name) {
  for (const auto& [k, v] : list) {
    if (k == name) return &v;
  }
  return nullptr;
}

Json to_json(const MetricList& list) {
  Json out = Json::object();
  for (const auto& [k, v] : list) out[k] = v;
  return out;
}

Json build(const EvalReport& r, bool with_clock) {
  Json j;
  j["task"] = r.task;
  j["metrics"] = to_json(r.metrics);
  j["stats"] = to_json(r.stats);
  Json groups = Json::object();
  for (const auto& [name, list] : r.groups) groups[name] = to_json(list);
  j["groups"] = groups;
  Json curves = Json::object();
  for (const auto& [name, c] : r.curves) {
    curves[name] = {{"columns", c.columns}, {"rows", c.rows}};
  }
  j["curves"] = curves;
  Json notes = Json::object();
  for (const auto& [k, v] : r.notes) notes[k] = v;
  j["notes"] = notes;
  j["restarts"] = r.restarts;
  if (with_clock) j["wall_seconds"] = r.wall_seconds;
  j["config"] = r.config_text;
  return j;
}

}  // namespace

void EvalReport::set_metric(const std::string& name, double value) {
  upsert(metrics, name, value);
}

void EvalReport::set_stat(const std::string& name, double value) {
  upsert(stats, name, value);
}

double EvalReport::metric(const std::string& name) const {
  if (const double* v = lookup(metrics, name)) return *v;
  throw InputError("report has no metric '" + name + "'");
}

double EvalReport::stat(const std::string& name) const {
  if (const double* v = lookup(stats, name)) return *v;
  throw InputError("report has no stat '" + name + "'");
}

bool EvalReport::has_metric(const std::string& name) const {
  return lookup(metrics, name) != nullptr;
}

std::string report_body(const EvalReport& r) { return build(r, false).dump(2) + "\n"; }

std::string report_json(const EvalReport& r) { return build(r, true).dump(2) + "\n"; }

std::string curve_csv(const Curve& c) {
  std::string out;
  for (std::size_t j = 0; j < c.columns.size(); ++j) {
    if (j) out += ',';
    out += c.columns[j];
  }
  out += '\n';
  for (const auto& row : c.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  return out;
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path write_report(const EvalReport& r,
                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = r.task + "-" + content_hash(r.config_text);
  const auto path = dir / (stem + ".json");
  {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << report_json(r);
  }
  for (const auto& [name, c] : r.curves) {
    std::ofstream out(dir / (stem + "-" + name + ".csv"));
    if (!out) throw DataError("cannot write curve " + name);
    out << curve_csv(c);
  }
  return path;
}

}  // namespace incgraph
