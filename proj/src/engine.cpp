#include "incgraph/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "incgraph/errors.hpp"

namespace incgraph {

namespace {

FactoredMatrix factorize_or_zero(const SparseMatrix& a, Index k) {
  const Index budget = std::min({k, a.rows(), a.cols()});
  const bool zero = std::all_of(a.valuePtr(), a.valuePtr() + a.nonZeros(),
                                [](double v) { return v == 0.0; });
  if (budget <= 0 || zero) {
    return FactoredMatrix::zeros(a.rows(), a.cols(), std::max<Index>(budget, 0));
  }
  return truncated_svd(a, budget);
}

SparseMatrix attribute_matrix(const std::vector<VectorXd>& rows, Index width) {
  std::vector<Triplet> trips;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Index c = 0; c < width; ++c) {
      if (rows[r](c) != 0.0) trips.emplace_back(static_cast<Index>(r), c, rows[r](c));
    }
  }
  SparseMatrix m(static_cast<Index>(rows.size()), width);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

VectorXd unit(Index size, Index at, double scale) {
  VectorXd v = VectorXd::Zero(size);
  v(at) = scale;
  return v;
}

VectorXd attr_vector(const std::vector<double>& attrs, Index width,
                     const char* what) {
  if (attrs.empty()) return VectorXd::Zero(width);
  if (static_cast<Index>(attrs.size()) != width) {
    throw DataError(std::string(what) + " attribute width " +
                    std::to_string(attrs.size()) + " differs from " +
                    std::to_string(width));
  }
  return Eigen::Map<const VectorXd>(attrs.data(), width);
}

// Offline build of every factorization for a stage anchored at T.
void rebuild(StageState& s, double stage_start) {
  if (!(stage_start > 0.0) || !std::isfinite(stage_start)) {
    throw InputError("stage start time must be positive, got " +
                     std::to_string(stage_start));
  }
  s.stage_start = stage_start;
  s.beta = s.decay_rate * stage_start;

  const Index m = s.user_count();
  const Index n = s.item_count();
  std::vector<Triplet> trips;
  trips.reserve(s.history.size());
  for (const auto& e : s.history) trips.emplace_back(e.user, e.item, s.weight(e.t));
  SparseMatrix r(m, n);
  r.setFromTriplets(trips.begin(), trips.end());

  s.scalers = DegreeScalers::from_matrix(r, s.config.alpha);
  const SparseMatrix rn = normalize(r, s.scalers);
  const SparseMatrix g = attribute_matrix(s.user_attrs, s.user_attr_width);
  const SparseMatrix h = attribute_matrix(s.item_attrs, s.item_attr_width);
  const DerivedMatrices derived = derive_matrices(rn, g, h);

  const std::array<const SparseMatrix*, 6> inputs = {
      &rn, &g, &h, &derived.user_attr_item, &derived.user_item_attr,
      &derived.user_attr_item_attr};
  std::array<FactoredMatrix, 6> out;
  std::array<std::exception_ptr, 6> errors;
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < 6; ++j) {
    try {
      out[static_cast<std::size_t>(j)] = factorize_or_zero(
          *inputs[static_cast<std::size_t>(j)], s.config.ranks[static_cast<std::size_t>(j)]);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  s.factorizations = {std::move(out[0]), std::move(out[1]), std::move(out[2]),
                      std::move(out[3]), std::move(out[4]), std::move(out[5])};
  s.snapshot = s.factorizations.user_item;
  s.monitor_gram = cross_grams(s.factorizations.user_item, s.snapshot);
  s.monitor_distance = 0.0;
  s.events_in_stage = 0;
}

bool nonzero(const VectorXd& v) { return v.size() > 0 && !v.isZero(0.0); }

}  // namespace

double decay_weight(double t, double stage_start, double beta) {
  return std::exp(beta * (t / stage_start - 1.0));
}

Index IdMap::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

Index IdMap::insert(const std::string& id) {
  auto [it, added] = index_.emplace(id, static_cast<Index>(ids_.size()));
  if (added) ids_.push_back(id);
  return it->second;
}

Index StageState::embedding_width() const {
  return factorizations.user_item.rank_budget() + user_attr_width +
         item_attr_width;
}

double StageState::weight(double t) const {
  return config.decay ? decay_weight(t, stage_start, beta) : 1.0;
}

VectorXd StageState::user_embedding(Index u) const {
  return user_embedding_row(factorizations, config.path_weights, config.gamma, u);
}

MatrixXd StageState::item_embeddings() const {
  return item_embedding_matrix(factorizations, config.path_weights, config.gamma);
}

EmbeddingBundle StageState::bundle() const {
  return build_path_embeddings(factorizations, config.path_weights, config.gamma,
                               scalers);
}

SparseMatrix StageState::tracked_matrix() const {
  std::vector<Triplet> trips;
  trips.reserve(history.size());
  for (const auto& e : history) {
    trips.emplace_back(e.user, e.item,
                       weight(e.t) * scalers.user_factor(e.user) *
                           scalers.item_factor(e.item));
  }
  SparseMatrix r(user_count(), item_count());
  r.setFromTriplets(trips.begin(), trips.end());
  return r;
}

StageState init_stage(std::span<const EventRecord> events,
                      const EngineConfig& config,
                      std::optional<double> stage_start) {
  if (events.empty()) throw InputError("init_stage: empty history");
  StageState s;
  s.config = config;
  s.user_attr_width = static_cast<Index>(events.front().user_attrs.size());
  s.item_attr_width = static_cast<Index>(events.front().item_attrs.size());
  s.history.reserve(events.size());
  for (const auto& e : events) {
    if (e.timestamp < s.last_timestamp) {
      throw OrderError("init_stage: events are not sorted by timestamp");
    }
    Index u = s.users.find(e.user_id);
    if (u < 0) {
      u = s.users.insert(e.user_id);
      s.user_attrs.push_back(attr_vector(e.user_attrs, s.user_attr_width, "user"));
    }
    Index i = s.items.find(e.item_id);
    if (i < 0) {
      i = s.items.insert(e.item_id);
      s.item_attrs.push_back(attr_vector(e.item_attrs, s.item_attr_width, "item"));
    }
    s.history.push_back({u, i, e.timestamp});
    s.last_timestamp = e.timestamp;
  }
  const double t1 = stage_start.value_or(s.last_timestamp);
  if (!(t1 > 0.0)) {
    throw InputError("init_stage: first stage must start at a positive time");
  }
  s.decay_rate = config.beta1 / t1;
  s.stage_index = 1;
  // Budgets never grow past the first stage's shapes, so the embedding
  // width stays fixed across restarts.
  const Index m = s.user_count(), n = s.item_count();
  const Index pu = s.user_attr_width, pi = s.item_attr_width;
  const std::array<std::pair<Index, Index>, 6> shapes = {
      std::pair{m, n}, std::pair{m, pu}, std::pair{n, pi},
      std::pair{pu, n}, std::pair{m, pi}, std::pair{pu, pi}};
  for (std::size_t j = 0; j < 6; ++j) {
    s.config.ranks[j] = std::max<Index>(
        0, std::min({s.config.ranks[j], shapes[j].first, shapes[j].second}));
  }
  rebuild(s, t1);
  return s;
}

Index ensure_user(StageState& s, const std::string& id,
                  const std::vector<double>& attrs) {
  Index u = s.users.find(id);
  if (u >= 0) return u;
  const VectorXd g = attr_vector(attrs, s.user_attr_width, "user");
  u = s.users.insert(id);
  s.user_attrs.push_back(g);
  const Index m = s.user_count();
  s.scalers.user_deg.conservativeResize(m);
  s.scalers.user_deg(m - 1) = 1.0;

  auto& f = s.factorizations;
  f.user_item = extend_dims(f.user_item, m, f.user_item.cols());
  f.user_item_attr = extend_dims(f.user_item_attr, m, f.user_item_attr.cols());
  f.user_attr = extend_dims(f.user_attr, m, f.user_attr.cols());
  s.snapshot = extend_dims(s.snapshot, m, s.snapshot.cols());
  if (nonzero(g) && f.user_attr.rank_budget() > 0) {
    f.user_attr = brand_update(f.user_attr, unit(m, u, 1.0), g, 1.0);
  }
  return u;
}

Index ensure_item(StageState& s, const std::string& id,
                  const std::vector<double>& attrs) {
  Index i = s.items.find(id);
  if (i >= 0) return i;
  const VectorXd h = attr_vector(attrs, s.item_attr_width, "item");
  i = s.items.insert(id);
  s.item_attrs.push_back(h);
  const Index n = s.item_count();
  s.scalers.item_deg.conservativeResize(n);
  s.scalers.item_deg(n - 1) = 1.0;

  auto& f = s.factorizations;
  f.user_item = extend_dims(f.user_item, f.user_item.rows(), n);
  f.user_attr_item = extend_dims(f.user_attr_item, f.user_attr_item.rows(), n);
  f.item_attr = extend_dims(f.item_attr, n, f.item_attr.cols());
  s.snapshot = extend_dims(s.snapshot, s.snapshot.rows(), n);
  if (nonzero(h) && f.item_attr.rank_budget() > 0) {
    f.item_attr = brand_update(f.item_attr, unit(n, i, 1.0), h, 1.0);
  }
  return i;
}

void ingest_event(StageState& s, const EventRecord& e) {
  double t = e.timestamp;
  if (t < s.last_timestamp) {
    if (!s.config.clamp_out_of_order) {
      throw OrderError("ingest_event: timestamp " + std::to_string(t) +
                       " precedes " + std::to_string(s.last_timestamp));
    }
    t = s.last_timestamp;
  }
  const Index u = ensure_user(s, e.user_id, e.user_attrs);
  const Index i = ensure_item(s, e.item_id, e.item_attrs);
  const double w = s.weight(t);
  const Index m = s.user_count();
  const Index n = s.item_count();
  const VectorXd eu = unit(m, u, s.scalers.user_factor(u));
  const VectorXd ei = unit(n, i, s.scalers.item_factor(i));
  const VectorXd& g = s.user_attrs[static_cast<std::size_t>(u)];
  const VectorXd& h = s.item_attrs[static_cast<std::size_t>(i)];

  auto& f = s.factorizations;
  f.user_item = brand_update(f.user_item, eu, ei, w, s.snapshot, s.monitor_gram);
  if (nonzero(g) && f.user_attr_item.rank_budget() > 0) {
    f.user_attr_item = brand_update(f.user_attr_item, g, ei, w);
  }
  if (nonzero(h) && f.user_item_attr.rank_budget() > 0) {
    f.user_item_attr = brand_update(f.user_item_attr, eu, h, w);
  }
  if (nonzero(g) && nonzero(h) && f.user_attr_item_attr.rank_budget() > 0) {
    f.user_attr_item_attr = brand_update(f.user_attr_item_attr, g, h, w);
  }

  s.history.push_back({u, i, t});
  s.last_timestamp = t;
  ++s.events_in_stage;
  s.monitor_distance =
      factored_frobenius_distance(f.user_item, s.snapshot, s.monitor_gram);
}

bool should_restart(const StageState& s, const RestartPolicy& policy,
                    double now) {
  return std::visit(
      [&](const auto& p) -> bool {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, MonitorThreshold>) {
          return s.monitor_distance > p.max_distance;
        } else if constexpr (std::is_same_v<P, FixedTime>) {
          return now - s.stage_start >= p.interval;
        } else {
          return s.events_in_stage >= p.events;
        }
      },
      policy);
}

void restart(StageState& s, double now) {
  ++s.stage_index;
  rebuild(s, now);
}

Engine::Engine(StageState state, RestartPolicy policy, std::ostream* trace)
    : state_(std::move(state)), policy_(policy), trace_(trace) {
  if (trace_) *trace_ << "event_idx,t,stage,distance,restarted\n";
}

bool Engine::process(const EventRecord& e) {
  ingest_event(state_, e);
  const double now = state_.last_timestamp;
  const double distance = state_.monitor_distance;
  const bool fire = should_restart(state_, policy_, now);
  if (fire) {
    restart(state_, now);
    ++restarts_;
  }
  if (trace_) {
    *trace_ << event_index_ << ',' << format_double(now) << ','
            << state_.stage_index << ',' << format_double(distance) << ','
            << (fire ? 1 : 0) << '\n';
  }
  ++event_index_;
  return fire;
}

}  // namespace incgraph
