#include "incgraph/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "incgraph/errors.hpp"
#include "incgraph/events.hpp"

namespace incgraph {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value,
                      const std::string& why) {
  throw ConfigError("config field '" + key + "': " + why + " (got '" + value + "')");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    // Accept simple fractions such as 1/5.
    const auto slash = v.find('/');
    if (slash != std::string::npos) {
      return to_double(key, v.substr(0, slash)) / to_double(key, v.substr(slash + 1));
    }
    bad(key, v, "expected a real number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<std::uint64_t>::max();
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad(key, v, "expected a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  bad(key, v, "expected true/false");
}

std::string from_uint(std::uint64_t v) {
  return v == std::numeric_limits<std::uint64_t>::max() ? "inf" : std::to_string(v);
}

std::string from_bool(bool v) { return v ? "true" : "false"; }

struct Field {
  ConfigKey key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field real(const char* name, T RunConfig::*member, const char* doc) {
  return {{name, "", doc},
          [name, member](RunConfig& c, const std::string& v) { c.*member = to_double(name, v); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

template <typename T>
Field integer(const char* name, T RunConfig::*member, const char* doc) {
  return {{name, "", doc},
          [name, member](RunConfig& c, const std::string& v) {
            c.*member = static_cast<T>(to_uint(name, v));
          },
          [member](const RunConfig& c) { return from_uint(static_cast<std::uint64_t>(c.*member)); }};
}

Field boolean(const char* name, bool RunConfig::*member, const char* doc) {
  return {{name, "", doc},
          [name, member](RunConfig& c, const std::string& v) { c.*member = to_bool(name, v); },
          [member](const RunConfig& c) { return from_bool(c.*member); }};
}

Field text(const char* name, std::string RunConfig::*member, const char* doc) {
  return {{name, "", doc},
          [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

Field rank(int j) {
  const std::string name = "k" + std::to_string(j + 1);
  static const char* docs[6] = {
      "rank budget of the user-item factorization",
      "rank budget of the user-attribute factorization",
      "rank budget of the item-attribute factorization",
      "rank budget of the user_attribute-item factorization",
      "rank budget of the user-item_attribute factorization",
      "rank budget of the user_attribute-item_attribute factorization"};
  return {{name, "", docs[j]},
          [name, j](RunConfig& c, const std::string& v) {
            c.ranks[static_cast<std::size_t>(j)] = static_cast<Index>(to_uint(name, v));
          },
          [j](const RunConfig& c) { return std::to_string(c.ranks[static_cast<std::size_t>(j)]); }};
}

Field path_weight(const char* name, double PathWeights::*member, const char* doc) {
  return {{name, "", doc},
          [name, member](RunConfig& c, const std::string& v) {
            c.path_weights.*member = to_double(name, v);
          },
          [member](const RunConfig& c) { return format_double(c.path_weights.*member); }};
}

Field split_frac(const char* name, double SplitSpec::*member, const char* doc) {
  return {{name, "", doc},
          [name, member](RunConfig& c, const std::string& v) { c.split.*member = to_double(name, v); },
          [member](const RunConfig& c) { return format_double(c.split.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = [] {
    std::vector<Field> f;
    f.push_back({{"task", "", "future-item | next-interaction"},
                 [](RunConfig& c, const std::string& v) {
                   if (v == "future-item") c.task = Task::FutureItem;
                   else if (v == "next-interaction") c.task = Task::NextInteraction;
                   else bad("task", v, "expected future-item or next-interaction");
                 },
                 [](const RunConfig& c) { return task_name(c.task); }});
    f.push_back(text("dataset", &RunConfig::dataset, "canonical event CSV path"));
    f.push_back(real("alpha", &RunConfig::alpha, "degree normalization exponent"));
    f.push_back(real("gamma", &RunConfig::gamma, "frequency exponent, in (0, 0.5]"));
    for (int j = 0; j < 6; ++j) f.push_back(rank(j));
    f.push_back(path_weight("path_weight1", &PathWeights::user_item, "weight of the user-item path"));
    f.push_back(path_weight("path_weight2", &PathWeights::via_user_attr,
                            "weight of the user-user_attribute-item path"));
    f.push_back(path_weight("path_weight3", &PathWeights::via_item_attr,
                            "weight of the user-item_attribute-item path"));
    f.push_back(real("beta1", &RunConfig::beta1, "decay coefficient of the first stage"));
    f.push_back(boolean("decay", &RunConfig::decay, "apply time decay to interaction weights"));
    f.push_back({{"restart", "", "monitor | time | count | none"},
                 [](RunConfig& c, const std::string& v) {
                   if (v == "monitor") c.restart = RestartKind::Monitor;
                   else if (v == "time") c.restart = RestartKind::Time;
                   else if (v == "count") c.restart = RestartKind::Count;
                   else if (v == "none") c.restart = RestartKind::None;
                   else bad("restart", v, "expected monitor, time, count or none");
                 },
                 [](const RunConfig& c) {
                   switch (c.restart) {
                     case RestartKind::Monitor: return std::string("monitor");
                     case RestartKind::Time: return std::string("time");
                     case RestartKind::Count: return std::string("count");
                     case RestartKind::None: break;
                   }
                   return std::string("none");
                 }});
    f.push_back(real("restart_threshold", &RunConfig::restart_threshold,
                     "monitor distance threshold d"));
    f.push_back(real("restart_interval", &RunConfig::restart_interval,
                     "seconds between restarts for restart=time"));
    f.push_back(integer("restart_count", &RunConfig::restart_count,
                        "events between restarts for restart=count"));
    f.push_back(integer("a", &RunConfig::a, "number of recent user embeddings (long-term)"));
    f.push_back(integer("b", &RunConfig::b, "number of recent items (short-term)"));
    f.push_back(real("lambda", &RunConfig::lambda, "short-term weight in the fusion, in [0, 1]"));
    f.push_back(boolean("pattern_modeller", &RunConfig::pattern_modeller,
                        "use the long/short-term modeller (false = current embedding row)"));
    f.push_back(split_frac("train_frac", &SplitSpec::train, "chronological training fraction"));
    f.push_back(split_frac("valid_frac", &SplitSpec::valid, "validation fraction"));
    f.push_back(split_frac("test_frac", &SplitSpec::test, "test fraction"));
    f.push_back(text("eval_split", &RunConfig::eval_split, "valid | test"));
    f.push_back(integer("top_k", &RunConfig::top_k, "cutoff K of Recall@K / Hit@K"));
    f.push_back(text("exclude_seen", &RunConfig::exclude_seen,
                     "auto | true | false: drop already-seen items from rankings"));
    f.push_back(text("group_by", &RunConfig::group_by,
                     "empty, cold_start or user_attr:<column>"));
    f.push_back(text("time_origin", &RunConfig::time_origin,
                     "first (shift first event to t=0) | raw"));
    f.push_back(boolean("clamp_out_of_order", &RunConfig::clamp_out_of_order,
                        "clamp late timestamps instead of failing"));
    f.push_back(boolean("online_updates", &RunConfig::online_updates,
                        "apply online updates after training"));
    f.push_back(boolean("predict_from_stage_start", &RunConfig::predict_from_stage_start,
                        "score with embeddings frozen at the last offline restart"));
    f.push_back(integer("study_intervals", &RunConfig::study_intervals,
                        "number of equal-count intervals for the studies"));
    f.push_back(integer("study_max_delta", &RunConfig::study_max_delta,
                        "largest interval gap in the correlation study"));
    f.push_back({{"study_fractions", "",
                  "comma-separated fractions of the total online error used as monitor thresholds"},
                 [](RunConfig& c, const std::string& v) {
                   c.study_fractions.clear();
                   std::stringstream ss(v);
                   std::string part;
                   while (std::getline(ss, part, ',')) {
                     c.study_fractions.push_back(to_double("study_fractions", trim(part)));
                   }
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (std::size_t k = 0; k < c.study_fractions.size(); ++k) {
                     if (k) out += ',';
                     out += format_double(c.study_fractions[k]);
                   }
                   return out;
                 }});
    f.push_back(integer("seed", &RunConfig::seed, "accepted and echoed; the engine is deterministic"));
    f.push_back(text("trace", &RunConfig::trace, "path of the per-event trace CSV (empty = off)"));
    const RunConfig defaults;
    for (auto& field : f) field.key.default_value = field.get(defaults);
    return f;
  }();
  return kFields;
}

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key.name == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::string task_name(Task t) {
  return t == Task::FutureItem ? "future-item" : "next-interaction";
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  field(trim(key)).set(cfg, trim(value));
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str());
  if (!cfg.dataset.empty() && std::filesystem::path(cfg.dataset).is_relative()) {
    const auto candidate = path.parent_path() / cfg.dataset;
    if (std::filesystem::exists(candidate)) cfg.dataset = candidate.string();
  }
  return cfg;
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const char* key, const std::string& why) {
    if (!ok) throw ConfigError("config field '" + std::string(key) + "': " + why);
  };
  need(c.alpha >= 0.0, "alpha", "must be >= 0");
  need(c.gamma > 0.0 && c.gamma <= 0.5, "gamma", "must lie in (0, 0.5]");
  need(c.ranks[0] >= 1, "k1", "must be >= 1");
  need(c.path_weights.user_item >= 0.0, "path_weight1", "must be >= 0");
  need(c.path_weights.via_user_attr >= 0.0, "path_weight2", "must be >= 0");
  need(c.path_weights.via_item_attr >= 0.0, "path_weight3", "must be >= 0");
  need(c.beta1 > 0.0, "beta1", "must be > 0");
  need(c.restart != RestartKind::Monitor || c.restart_threshold > 0.0,
       "restart_threshold", "must be > 0 for restart=monitor");
  need(c.restart != RestartKind::Time || c.restart_interval > 0.0,
       "restart_interval", "must be > 0 for restart=time");
  need(c.restart != RestartKind::Count || c.restart_count > 0,
       "restart_count", "must be > 0 for restart=count");
  need(c.a >= 1, "a", "must be >= 1");
  need(c.b >= 1, "b", "must be >= 1");
  need(c.lambda >= 0.0 && c.lambda <= 1.0, "lambda", "must lie in [0, 1]");
  need(c.split.train > 0.0, "train_frac", "must be > 0");
  need(c.split.valid >= 0.0, "valid_frac", "must be >= 0");
  need(c.split.test >= 0.0, "test_frac", "must be >= 0");
  need(c.split.train + c.split.valid + c.split.test <= 1.0 + 1e-9, "test_frac",
       "fractions must sum to <= 1");
  need(c.eval_split == "valid" || c.eval_split == "test", "eval_split",
       "expected valid or test");
  need(c.top_k >= 1, "top_k", "must be >= 1");
  need(c.exclude_seen == "auto" || c.exclude_seen == "true" || c.exclude_seen == "false",
       "exclude_seen", "expected auto, true or false");
  need(c.group_by.empty() || c.group_by == "cold_start" ||
           c.group_by.rfind("user_attr:", 0) == 0,
       "group_by", "expected cold_start or user_attr:<column>");
  need(c.time_origin == "first" || c.time_origin == "raw", "time_origin",
       "expected first or raw");
  need(c.study_intervals >= 2, "study_intervals", "must be >= 2");
  need(c.study_max_delta >= 1, "study_max_delta", "must be >= 1");
  for (double f : c.study_fractions) {
    need(f > 0.0, "study_fractions", "fractions must be > 0");
  }
}

std::string to_text(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& f : fields()) kv.emplace_back(f.key.name, f.get(cfg));
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

EngineConfig engine_config(const RunConfig& c) {
  EngineConfig e;
  e.alpha = c.alpha;
  e.gamma = c.gamma;
  e.ranks = c.ranks;
  e.path_weights = c.path_weights;
  e.beta1 = c.beta1;
  e.decay = c.decay;
  e.clamp_out_of_order = c.clamp_out_of_order;
  return e;
}

RestartPolicy restart_policy(const RunConfig& c) {
  switch (c.restart) {
    case RestartKind::Monitor: return MonitorThreshold{c.restart_threshold};
    case RestartKind::Time: return FixedTime{c.restart_interval};
    case RestartKind::Count: return FixedCount{c.restart_count};
    case RestartKind::None: break;
  }
  return never_restart();
}

bool excludes_seen(const RunConfig& c) {
  if (c.exclude_seen == "true") return true;
  if (c.exclude_seen == "false") return false;
  return c.task == Task::FutureItem;
}

}  // namespace incgraph
