#pragma once

// Online-Monitor-Offline lifecycle.
//
// A stage starts with an offline factorization of the decayed, normalized
// interaction matrix (and the attribute co-occurrence matrices). Each later
// event is folded in as a weighted rank-1 Brand update while the monitor
// tracks the Frobenius distance between the live user-item reconstruction
// and the stage-start snapshot. A restart policy decides when to rebuild.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "incgraph/events.hpp"
#include "incgraph/graphmat.hpp"
#include "incgraph/linalg.hpp"

namespace incgraph {

struct MonitorThreshold {
  double max_distance;
};
struct FixedTime {
  double interval;
};
struct FixedCount {
  std::uint64_t events;
};
using RestartPolicy = std::variant<MonitorThreshold, FixedTime, FixedCount>;

inline RestartPolicy never_restart() {
  return FixedCount{std::numeric_limits<std::uint64_t>::max()};
}

/// exp(beta * (t / stage_start - 1)).
double decay_weight(double t, double stage_start, double beta);

struct EngineConfig {
  double alpha = 2.0;
  double gamma = 0.5;
  /// Rank budgets k1..k6 for R, G, H, G^T R, R H, G^T R H.
  std::array<Index, 6> ranks{1, 0, 0, 0, 0, 0};
  PathWeights path_weights;
  double beta1 = 1.0;
  /// When false every interaction weighs 1 (decay ablation).
  bool decay = true;
  /// Clamp out-of-order timestamps to the previous one instead of throwing.
  bool clamp_out_of_order = false;
};

class IdMap {
 public:
  /// -1 when the id has not been seen.
  Index find(const std::string& id) const;
  Index insert(const std::string& id);
  Index size() const { return static_cast<Index>(ids_.size()); }
  const std::string& id(Index idx) const { return ids_[static_cast<std::size_t>(idx)]; }

 private:
  std::unordered_map<std::string, Index> index_;
  std::vector<std::string> ids_;
};

struct IndexedEvent {
  Index user;
  Index item;
  double t;
};

struct StageState {
  int stage_index = 1;
  double stage_start = 0.0;  // T_i
  double beta = 0.0;         // beta_i
  double decay_rate = 0.0;   // beta_1 / T_1, shared by every stage

  TableFactorizations factorizations;
  DegreeScalers scalers;  // frozen for the stage
  FactoredMatrix snapshot;
  CrossGram monitor_gram;  // user_item vs snapshot, advanced per event
  double monitor_distance = 0.0;
  std::uint64_t events_in_stage = 0;

  IdMap users;
  IdMap items;
  std::vector<VectorXd> user_attrs;
  std::vector<VectorXd> item_attrs;
  Index user_attr_width = 0;
  Index item_attr_width = 0;

  std::vector<IndexedEvent> history;
  double last_timestamp = -std::numeric_limits<double>::infinity();
  EngineConfig config;

  Index user_count() const { return users.size(); }
  Index item_count() const { return items.size(); }
  Index embedding_width() const;

  /// Interaction weight of an event at time t under this stage's clock.
  double weight(double t) const;

  VectorXd user_embedding(Index u) const;
  MatrixXd item_embeddings() const;
  EmbeddingBundle bundle() const;

  /// The normalized, decayed user-item matrix the online factorization
  /// approximates: every event seen so far, weighted with this stage's
  /// clock and scaled with the frozen degrees.
  SparseMatrix tracked_matrix() const;
};

/// Offline initialization from all history up to `stage_start` (defaults to
/// the last event's timestamp). Throws on empty history or T <= 0.
StageState init_stage(std::span<const EventRecord> events,
                      const EngineConfig& config,
                      std::optional<double> stage_start = std::nullopt);

/// Folds one event into the live state. Throws OrderError when the event is
/// older than the previous one unless config.clamp_out_of_order is set.
void ingest_event(StageState& state, const EventRecord& e);

/// Registers a user (or item) without an interaction, growing the
/// factorizations and inserting its attribute row. Returns the index.
Index ensure_user(StageState& state, const std::string& id,
                  const std::vector<double>& attrs);
Index ensure_item(StageState& state, const std::string& id,
                  const std::vector<double>& attrs);

bool should_restart(const StageState& state, const RestartPolicy& policy,
                    double now);

/// New stage anchored at `now`: beta scales with T so beta/T stays constant,
/// degrees are recomputed and every factorization is rebuilt offline.
void restart(StageState& state, double now);

/// Drives ingest / monitor / restart and optionally writes the per-event
/// trace CSV (event_idx,t,stage,distance,restarted).
class Engine {
 public:
  Engine(StageState state, RestartPolicy policy, std::ostream* trace = nullptr);

  /// Ingests `e` and restarts when the policy fires. Returns true on restart.
  bool process(const EventRecord& e);

  const StageState& state() const { return state_; }
  StageState& state() { return state_; }
  const RestartPolicy& policy() const { return policy_; }
  int restarts() const { return restarts_; }
  std::uint64_t events_processed() const { return event_index_; }

 private:
  StageState state_;
  RestartPolicy policy_;
  std::ostream* trace_;
  std::uint64_t event_index_ = 0;
  int restarts_ = 0;
};

}  // namespace incgraph
