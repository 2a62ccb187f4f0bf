#pragma once

// Restart-policy comparison and distance/error correlation.
//
// True error at a checkpoint is ||online - svd_k(tracked)||_F where tracked
// is the matrix the live factorization approximates and k its rank budget.
// Both studies initialize on the training split; the policy study then
// streams every remaining event, the correlation study cuts the whole
// event list into equal-count intervals.

#include <cstddef>
#include <span>
#include <vector>

#include "incgraph/config.hpp"
#include "incgraph/engine.hpp"
#include "incgraph/events.hpp"
#include "incgraph/report.hpp"

namespace incgraph {

/// Offline-recomputed approximation error of the live user-item factors.
double true_error(const StageState& state);

struct PolicyRun {
  int restarts = 0;
  double mean_error = 0.0;
  double final_error = 0.0;
  std::vector<double> errors;  // one per checkpoint
};

/// Streams `stream` from a copy of `init`, measuring the true error after
/// every checkpoint (event counts, ascending).
PolicyRun run_policy(const StageState& init, std::span<const EventRecord> stream,
                     const RestartPolicy& policy,
                     const std::vector<std::size_t>& checkpoints);

/// Events processed at each of `count` equally spaced checkpoints.
std::vector<std::size_t> checkpoint_positions(std::size_t events, std::size_t count);

/// Smallest interval giving exactly `restarts` restarts under FixedCount,
/// or the closest achievable.
std::uint64_t match_count_interval(std::size_t events, int restarts);

/// Restarts a FixedTime policy would trigger over `times` with the first
/// stage anchored at `stage_start`.
int time_policy_restarts(std::span<const double> times, double stage_start,
                         double interval);

/// Interval matching `restarts` for FixedTime (bisection), or the closest.
double match_time_interval(std::span<const double> times, double stage_start,
                           int restarts);

EvalReport restart_policy_study(const RunConfig& cfg, const Dataset& data);
EvalReport correlation_study(const RunConfig& cfg, const Dataset& data);

}  // namespace incgraph
