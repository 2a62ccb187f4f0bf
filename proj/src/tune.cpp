#include "incgraph/tune.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "incgraph/errors.hpp"
#include "incgraph/tasks.hpp"

namespace incgraph {

std::size_t SearchSpace::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& [key, values] : axes) n *= values.size();
  return n;
}

SearchSpace parse_search_space(const std::string& text) {
  SearchSpace space;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  RunConfig probe;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError("search space line " + std::to_string(line_no) +
                        ": expected key = values");
    }
    std::istringstream keys(line.substr(0, eq));
    std::string key;
    keys >> key;
    std::istringstream vals(line.substr(eq + 1));
    std::vector<std::string> values;
    for (std::string v; vals >> v;) {
      set_config_value(probe, key, v);  // rejects unknown keys and bad values early
      values.push_back(v);
    }
    if (values.empty()) {
      throw ConfigError("search space line " + std::to_string(line_no) + ": no values");
    }
    space.axes.emplace_back(key, std::move(values));
  }
  if (space.axes.empty()) throw ConfigError("search space is empty");
  return space;
}

SearchSpace load_search_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read search space " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_search_space(ss.str());
}

std::vector<Assignment> grid_points(const SearchSpace& space) {
  std::vector<Assignment> out;
  const std::size_t total = space.size();
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Assignment a(space.axes.size());
    std::size_t rest = idx;
    for (std::size_t d = space.axes.size(); d-- > 0;) {
      const auto& [key, values] = space.axes[d];
      a[d] = {key, values[rest % values.size()]};
      rest /= values.size();
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string assignment_text(const Assignment& a) {
  std::string out;
  for (const auto& [k, v] : a) {
    if (!out.empty()) out += ' ';
    out += k + "=" + v;
  }
  return out;
}

TuneResult grid_search(const RunConfig& base, const Dataset& data,
                       const SearchSpace& space, const std::string& objective,
                       std::size_t jobs) {
  const auto points = grid_points(space);
  if (points.empty()) throw ConfigError("search space is empty");
  const std::string metric = objective.empty() ? primary_metric(base) : objective;

  std::vector<RunConfig> configs;
  for (const auto& p : points) {
    RunConfig c = base;
    for (const auto& [k, v] : p) set_config_value(c, k, v);
    c.eval_split = "valid";
    c.trace.clear();
    validate(c);
    configs.push_back(std::move(c));
  }

  std::vector<double> scores(points.size(), 0.0);
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < points.size();) {
      try {
        scores[j] = run_task(configs[j], data).metric(metric);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, points.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  TuneResult result;
  for (std::size_t j = 0; j < points.size(); ++j) {
    result.leaderboard.push_back({j, points[j], scores[j]});
    if (scores[j] > scores[result.best_index]) result.best_index = j;
  }
  result.best = configs[result.best_index];
  result.best.eval_split = "test";
  result.best.trace = base.trace;
  result.final_report = run_task(result.best, data);
  return result;
}

EvalReport tune_report(const TuneResult& result, const RunConfig& base) {
  EvalReport r = result.final_report;
  r.task = "tune-" + task_name(base.task);
  Curve board{{"index", "objective"}, {}};
  for (const auto& e : result.leaderboard) {
    board.rows.push_back({static_cast<double>(e.index), e.objective});
    r.notes.emplace_back("point" + std::to_string(e.index), assignment_text(e.assignment));
  }
  r.curves["leaderboard"] = board;
  r.notes.emplace_back("best", assignment_text(result.leaderboard[result.best_index].assignment));
  r.set_stat("best_index", static_cast<double>(result.best_index));
  r.set_stat("best_valid_objective", result.leaderboard[result.best_index].objective);
  r.config_text = to_text(base) + "# best\n" + to_text(result.best);
  return r;
}

}  // namespace incgraph
