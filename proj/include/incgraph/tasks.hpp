#pragma once

// Task drivers: future-item recommendation (frozen at test time) and
// next-interaction prediction (live updates between predictions), plus the
// Last-k baseline, ablation grids and the training-fraction sweep.

#include <vector>

#include "incgraph/config.hpp"
#include "incgraph/events.hpp"
#include "incgraph/report.hpp"

namespace incgraph {

/// Reads cfg.dataset and applies cfg.time_origin.
Dataset load_dataset(const RunConfig& cfg);

/// "first" shifts every timestamp so the earliest event sits at t = 0.
void apply_time_origin(Dataset& data, const std::string& origin);

EvalReport run_future_item(const RunConfig& cfg, const Dataset& data);
EvalReport run_next_interaction(const RunConfig& cfg, const Dataset& data);

/// Dispatches on cfg.task.
EvalReport run_task(const RunConfig& cfg, const Dataset& data);

/// Name of the headline metric of a task ("mrr" or "recall@K").
std::string primary_metric(const RunConfig& cfg);

/// Last-k baseline over the eval split for each k in `ks`. Each k becomes a
/// group "last-<k>" with mrr, hit@1 and hit@<top_k>.
EvalReport run_last_k(const RunConfig& cfg, const Dataset& data,
                      const std::vector<std::size_t>& ks);

struct Variant {
  std::string label;
  RunConfig config;
};

/// Next-interaction variants D..I and the full model, or future-item
/// variants A..C and the full model, derived from `cfg`.
std::vector<Variant> ablation_variants(const RunConfig& cfg);

/// Runs every variant; one group per label.
EvalReport run_ablation(const RunConfig& cfg, const Dataset& data);

/// Next-interaction with train fractions 0.1 .. 0.8 (valid and test 0.1 each).
EvalReport run_robustness(const RunConfig& cfg, const Dataset& data);

}  // namespace incgraph
