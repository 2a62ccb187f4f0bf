#include "incgraph/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "incgraph/errors.hpp"
#include "incgraph/metrics.hpp"

namespace incgraph {

namespace {

using Clock = std::chrono::steady_clock;

std::string label(double frac) { return "monitor@" + format_double(frac); }

}  // namespace

double true_error(const StageState& state) {
  const FactoredMatrix& live = state.factorizations.user_item;
  const SparseMatrix tracked = state.tracked_matrix();
  const Index k = std::min({live.rank_budget(), tracked.rows(), tracked.cols()});
  if (k == 0 || tracked.nonZeros() == 0) {
    return factored_frobenius_distance(
        live, FactoredMatrix::zeros(live.rows(), live.cols(), live.rank_budget()));
  }
  return factored_frobenius_distance(live, truncated_svd(tracked, k));
}

std::vector<std::size_t> checkpoint_positions(std::size_t events, std::size_t count) {
  std::vector<std::size_t> out;
  if (events == 0 || count == 0) return out;
  for (std::size_t c = 1; c <= count; ++c) {
    const std::size_t pos = c * events / count;
    if (pos > 0 && (out.empty() || out.back() != pos)) out.push_back(pos);
  }
  return out;
}

PolicyRun run_policy(const StageState& init, std::span<const EventRecord> stream,
                     const RestartPolicy& policy,
                     const std::vector<std::size_t>& checkpoints) {
  Engine engine(init, policy);
  PolicyRun out;
  std::size_t next = 0;
  for (std::size_t j = 0; j < stream.size(); ++j) {
    engine.process(stream[j]);
    while (next < checkpoints.size() && checkpoints[next] == j + 1) {
      out.errors.push_back(true_error(engine.state()));
      ++next;
    }
  }
  out.restarts = engine.restarts();
  if (!out.errors.empty()) {
    double sum = 0.0;
    for (double e : out.errors) sum += e;
    out.mean_error = sum / static_cast<double>(out.errors.size());
    out.final_error = out.errors.back();
  }
  return out;
}

std::uint64_t match_count_interval(std::size_t events, int restarts) {
  if (restarts <= 0) return std::numeric_limits<std::uint64_t>::max();
  const auto n = static_cast<std::uint64_t>(restarts);
  std::uint64_t best = 1;
  std::uint64_t best_gap = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t c = std::max<std::uint64_t>(1, events / (n + 1)); c <= events; ++c) {
    const std::uint64_t got = events / c;
    const std::uint64_t gap = got > n ? got - n : n - got;
    if (gap < best_gap) {
      best_gap = gap;
      best = c;
    }
    if (got <= n) break;
  }
  return best;
}

int time_policy_restarts(std::span<const double> times, double stage_start,
                         double interval) {
  int count = 0;
  double anchor = stage_start;
  for (double t : times) {
    if (t - anchor >= interval) {
      ++count;
      anchor = t;
    }
  }
  return count;
}

double match_time_interval(std::span<const double> times, double stage_start,
                           int restarts) {
  if (restarts <= 0 || times.empty()) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = std::max(times.back() - stage_start, 0.0) + 1.0;
  double best = hi;
  int best_gap = std::numeric_limits<int>::max();
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const int got = time_policy_restarts(times, stage_start, mid);
    if (got == restarts) return mid;
    if (std::abs(got - restarts) < best_gap) {
      best_gap = std::abs(got - restarts);
      best = mid;
    }
    if (got > restarts) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

EvalReport restart_policy_study(const RunConfig& cfg, const Dataset& data) {
  validate(cfg);
  const auto start = Clock::now();
  const SplitEvents split = chronological_split(data.events, {cfg.split.train, 0.0, 0.0});
  if (split.train.empty()) throw DataError("train split is empty");
  const std::span<const EventRecord> stream(data.events.data() + split.train.size(),
                                            data.events.size() - split.train.size());
  if (stream.empty()) throw DataError("nothing to stream after the train split");

  const StageState init = init_stage(split.train, engine_config(cfg));
  const auto checkpoints = checkpoint_positions(stream.size(), cfg.study_intervals);
  std::vector<double> times;
  times.reserve(stream.size());
  for (const auto& e : stream) times.push_back(e.timestamp);

  const PolicyRun online = run_policy(init, stream, never_restart(), checkpoints);
  EvalReport r;
  r.task = "study-monitor";
  r.set_stat("total_error", online.final_error);
  r.set_stat("online_mean_error", online.mean_error);

  Curve table{{"fraction", "threshold", "restarts", "monitor_error", "count_error",
               "time_error", "count_restarts", "time_restarts", "count_gap",
               "time_gap"},
              {}};
  for (double frac : cfg.study_fractions) {
    const double threshold = frac * online.final_error;
    const PolicyRun mon = run_policy(init, stream, MonitorThreshold{threshold}, checkpoints);
    const std::uint64_t every = match_count_interval(stream.size(), mon.restarts);
    const double interval = match_time_interval(times, init.stage_start, mon.restarts);
    const PolicyRun cnt = mon.restarts == 0
                              ? online
                              : run_policy(init, stream, FixedCount{every}, checkpoints);
    const PolicyRun tim = mon.restarts == 0
                              ? online
                              : run_policy(init, stream, FixedTime{interval}, checkpoints);
    auto gap = [&](double other) {
      return mon.mean_error > 0.0 ? other / mon.mean_error - 1.0 : 0.0;
    };
    table.rows.push_back({frac, threshold, static_cast<double>(mon.restarts),
                          mon.mean_error, cnt.mean_error, tim.mean_error,
                          static_cast<double>(cnt.restarts),
                          static_cast<double>(tim.restarts), gap(cnt.mean_error),
                          gap(tim.mean_error)});
    r.groups[label(frac)] = {{"restarts", mon.restarts},
                             {"monitor_error", mon.mean_error},
                             {"count_error", cnt.mean_error},
                             {"time_error", tim.mean_error},
                             {"count_restarts", cnt.restarts},
                             {"time_restarts", tim.restarts}};
  }
  r.curves["policies"] = table;
  r.config_text = to_text(cfg);
  r.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

EvalReport correlation_study(const RunConfig& cfg, const Dataset& data) {
  validate(cfg);
  const auto start = Clock::now();
  const std::size_t n = data.events.size();
  const std::size_t intervals = cfg.study_intervals;
  if (n < intervals) throw DataError("fewer events than study intervals");
  std::vector<std::size_t> bound(intervals + 1);
  for (std::size_t t = 0; t <= intervals; ++t) bound[t] = t * n / intervals;
  const std::size_t max_delta = std::min(cfg.study_max_delta, intervals - 1);
  const std::span<const EventRecord> all(data.events);

  // Base state sits at an interval boundary right after an offline restart.
  StageState base = init_stage(all.subspan(0, bound[1]), engine_config(cfg));
  std::vector<double> d_sum(max_delta + 1, 0.0), e_sum(max_delta + 1, 0.0);
  std::vector<std::size_t> samples(max_delta + 1, 0);
  Curve points{{"t", "delta", "distance", "error"}, {}};

  for (std::size_t t = 1; t < intervals; ++t) {
    StageState probe = base;
    const std::size_t last = std::min(intervals, t + max_delta);
    for (std::size_t end = t + 1; end <= last; ++end) {
      for (std::size_t j = bound[end - 1]; j < bound[end]; ++j) ingest_event(probe, all[j]);
      const std::size_t delta = end - t;
      const double d = probe.monitor_distance;
      const double e = true_error(probe);
      d_sum[delta] += d;
      e_sum[delta] += e;
      ++samples[delta];
      points.rows.push_back({static_cast<double>(t), static_cast<double>(delta), d, e});
    }
    for (std::size_t j = bound[t]; j < bound[t + 1]; ++j) ingest_event(base, all[j]);
    restart(base, base.last_timestamp);
  }

  std::vector<double> d_mean, e_mean;
  for (std::size_t delta = 1; delta <= max_delta; ++delta) {
    d_mean.push_back(samples[delta] ? d_sum[delta] / static_cast<double>(samples[delta]) : 0.0);
    e_mean.push_back(samples[delta] ? e_sum[delta] / static_cast<double>(samples[delta]) : 0.0);
  }
  auto normalized = [](std::vector<double> v) {
    const double top = *std::max_element(v.begin(), v.end());
    if (top > 0.0) {
      for (double& x : v) x /= top;
    }
    return v;
  };
  const std::vector<double> y = normalized(e_mean);

  EvalReport r;
  r.task = "study-correlation";
  int best_m = 1;
  double best_pearson = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  for (int m = 1; m <= 3; ++m) {
    std::vector<double> powered = d_mean;
    for (double& v : powered) v = std::pow(v, m);
    const std::vector<double> x = normalized(powered);
    const double p = x.size() >= 2 ? pearson(x, y) : 0.0;
    r.set_stat("pearson_m" + std::to_string(m), p);
    if (p > best_pearson) {
      best_pearson = p;
      best_m = m;
      best_x = x;
    }
  }
  const double rho = best_x.size() >= 2 ? spearman(best_x, y) : 0.0;
  r.set_stat("best_m", best_m);
  r.set_stat("spearman", rho);
  r.set_stat("pearson", best_pearson);

  Curve curve{{"delta", "distance", "error", "x", "y"}, {}};
  for (std::size_t j = 0; j < d_mean.size(); ++j) {
    curve.rows.push_back({static_cast<double>(j + 1), d_mean[j], e_mean[j], best_x[j], y[j]});
  }
  r.curves["correlation"] = curve;
  r.curves["points"] = points;
  r.config_text = to_text(cfg);
  r.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

}  // namespace incgraph
