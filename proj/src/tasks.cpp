#include "incgraph/tasks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "incgraph/engine.hpp"
#include "incgraph/errors.hpp"
#include "incgraph/metrics.hpp"
#include "incgraph/predictor.hpp"

namespace incgraph {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_group_value(double v) { return format_double(v); }

// Group label of a user, or "" when no grouping is configured.
struct Grouper {
  std::string mode;
  std::size_t column = 0;
  std::unordered_set<std::string> known_users;

  explicit Grouper(const RunConfig& cfg) : mode(cfg.group_by) {
    if (mode.rfind("user_attr:", 0) == 0) {
      const std::string col = mode.substr(10);
      try {
        column = static_cast<std::size_t>(std::stoul(col));
      } catch (const std::exception&) {
        throw ConfigError("config field 'group_by': bad column '" + col + "'");
      }
      mode = "user_attr";
    }
  }

  std::string label(const EventRecord& e) const {
    if (mode == "cold_start") return known_users.count(e.user_id) ? "warm" : "cold";
    if (mode == "user_attr") {
      if (column >= e.user_attrs.size()) {
        throw ConfigError("config field 'group_by': user attribute column " +
                          std::to_string(column) + " out of range");
      }
      return "user_attr" + std::to_string(column) + "=" +
             format_group_value(e.user_attrs[column]);
    }
    return "";
  }
};

std::unique_ptr<std::ofstream> open_trace(const RunConfig& cfg) {
  if (cfg.trace.empty()) return nullptr;
  auto out = std::make_unique<std::ofstream>(cfg.trace);
  if (!*out) throw DataError("cannot write trace " + cfg.trace);
  return out;
}

PreferenceParams preference_params(const RunConfig& cfg) {
  return {cfg.a, cfg.b, cfg.lambda};
}

// Scoring view: embeddings plus item multipliers, either live or frozen.
struct ScoringView {
  TableFactorizations factors;
  DegreeScalers scalers;
  MatrixXd item_emb;
  VectorXd multipliers;
  Index items = -1;

  void freeze(const StageState& s) {
    factors = s.factorizations;
    scalers = s.scalers;
    items = -1;
  }

  // Pads to the live item count: items unseen by the frozen model get zero
  // embeddings and unit multipliers.
  void refresh(const StageState& s) {
    if (items == s.item_count()) return;
    const MatrixXd base = item_embedding_matrix(factors, s.config.path_weights,
                                                s.config.gamma);
    const VectorXd mult = scalers.item_multipliers();
    item_emb = MatrixXd::Zero(s.item_count(), base.cols());
    item_emb.topRows(base.rows()) = base;
    multipliers = VectorXd::Ones(s.item_count());
    multipliers.head(mult.size()) = mult;
    items = s.item_count();
  }

  VectorXd user_row(const StageState& s, Index u) const {
    if (u < 0 || u >= factors.users()) return VectorXd::Zero(item_emb.cols());
    return user_embedding_row(factors, s.config.path_weights, s.config.gamma, u);
  }
};

void require_events(const std::vector<EventRecord>& v, const char* what) {
  if (v.empty()) throw DataError(std::string(what) + " split is empty");
}

}  // namespace

void apply_time_origin(Dataset& data, const std::string& origin) {
  if (origin == "raw" || data.events.empty()) return;
  if (origin != "first") throw ConfigError("config field 'time_origin': unknown value");
  const double t0 = data.events.front().timestamp;
  for (auto& e : data.events) e.timestamp -= t0;
}

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("config field 'dataset': not set");
  Dataset d = read_canonical(std::filesystem::path(cfg.dataset));
  apply_time_origin(d, cfg.time_origin);
  return d;
}

std::string primary_metric(const RunConfig& cfg) {
  return cfg.task == Task::FutureItem ? "recall@" + std::to_string(cfg.top_k) : "mrr";
}

EvalReport run_next_interaction(const RunConfig& cfg, const Dataset& data) {
  validate(cfg);
  const auto start = Clock::now();
  const SplitEvents split = chronological_split(data.events, cfg.split);
  require_events(split.train, "train");
  const bool eval_valid = cfg.eval_split == "valid";
  std::vector<EventRecord> stream = split.valid;
  if (!eval_valid) stream.insert(stream.end(), split.test.begin(), split.test.end());
  const std::size_t first_eval = eval_valid ? 0 : split.valid.size();
  if (stream.size() == first_eval) throw DataError(cfg.eval_split + " split is empty");

  auto trace = open_trace(cfg);
  const RestartPolicy policy = cfg.online_updates ? restart_policy(cfg) : never_restart();
  Engine engine(init_stage(split.train, engine_config(cfg)), policy, trace.get());
  StageState& s = engine.state();

  const bool frozen = !cfg.online_updates || cfg.predict_from_stage_start;
  ScoringView view;
  if (frozen) view.freeze(s);

  const PreferenceParams params = preference_params(cfg);
  const bool exclude = excludes_seen(cfg);
  std::unordered_map<std::string, UserHistory> histories;
  std::unordered_map<std::string, std::unordered_set<Index>> seen;
  auto history_of = [&](const std::string& id) -> UserHistory& {
    return histories.try_emplace(id, params.a, params.b).first->second;
  };
  for (const auto& e : split.train) {
    history_of(e.user_id).record_item(s.items.find(e.item_id), e.timestamp);
    if (exclude) seen[e.user_id].insert(s.items.find(e.item_id));
  }
  for (auto& [id, h] : histories) h.record_snapshot(s.user_embedding(s.users.find(id)));

  Grouper grouper(cfg);
  for (const auto& e : split.train) grouper.known_users.insert(e.user_id);
  if (!eval_valid) {
    for (const auto& e : split.valid) grouper.known_users.insert(e.user_id);
  }

  std::vector<std::size_t> ranks;
  std::map<std::string, std::vector<std::size_t>> group_ranks;
  MatrixXd live_items;
  bool live_stale = true;
  const auto weight = [&](double t) { return s.weight(t); };
  int seen_restarts = 0;

  for (std::size_t j = 0; j < stream.size(); ++j) {
    const EventRecord& e = stream[j];
    if (j >= first_eval) {
      const MatrixXd* item_emb;
      const VectorXd* multipliers;
      VectorXd live_mult;
      const Index u = s.users.find(e.user_id);
      VectorXd row;
      if (frozen) {
        view.refresh(s);
        item_emb = &view.item_emb;
        multipliers = &view.multipliers;
        row = view.user_row(s, u);
      } else {
        if (live_stale) {
          live_items = s.item_embeddings();
          live_stale = false;
        }
        live_mult = s.scalers.item_multipliers();
        item_emb = &live_items;
        multipliers = &live_mult;
        row = u >= 0 ? s.user_embedding(u) : VectorXd::Zero(live_items.cols());
      }
      auto hit = histories.find(e.user_id);
      const UserHistory* hist = hit == histories.end() ? nullptr : &hit->second;
      VectorXd pref = row;
      if (cfg.pattern_modeller) {
        pref = user_preference(hist, row, *item_emb, weight, params).e;
      }
      const Index target = s.items.find(e.item_id);
      std::size_t rank = 0;
      if (target >= 0) {
        auto sit = seen.find(e.user_id);
        const std::unordered_set<Index>* ex =
            exclude && sit != seen.end() ? &sit->second : nullptr;
        if (!(ex && ex->count(target))) {
          rank = rank_of(*item_emb, pref, *multipliers, target, ex);
        }
      }
      ranks.push_back(rank);
      const std::string g = grouper.label(e);
      if (!g.empty()) group_ranks[g].push_back(rank);
    }

    if (cfg.online_updates) {
      engine.process(e);
    } else {
      ensure_user(s, e.user_id, e.user_attrs);
      ensure_item(s, e.item_id, e.item_attrs);
    }
    live_stale = true;
    if (cfg.predict_from_stage_start && engine.restarts() != seen_restarts) {
      view.freeze(s);
      seen_restarts = engine.restarts();
    }
    const Index u = s.users.find(e.user_id);
    const Index i = s.items.find(e.item_id);
    VectorXd snap;
    if (frozen) {
      view.refresh(s);
      snap = view.user_row(s, u);
    } else {
      snap = s.user_embedding(u);
    }
    history_of(e.user_id).record(i, e.timestamp, std::move(snap));
    if (exclude) seen[e.user_id].insert(i);
  }

  EvalReport r;
  r.task = task_name(Task::NextInteraction);
  const RankSummary all = mrr_and_hit(ranks, cfg.top_k);
  const RankSummary top1 = mrr_and_hit(ranks, 1);
  r.set_metric("mrr", all.mrr);
  r.set_metric("hit@" + std::to_string(cfg.top_k), all.hit);
  r.set_metric("hit@1", top1.hit);
  r.set_stat("events_evaluated", static_cast<double>(all.count));
  r.set_stat("users", static_cast<double>(s.user_count()));
  r.set_stat("items", static_cast<double>(s.item_count()));
  for (const auto& [g, gr] : group_ranks) {
    const RankSummary gs = mrr_and_hit(gr, cfg.top_k);
    r.groups[g] = {{"mrr", gs.mrr},
                   {"hit@" + std::to_string(cfg.top_k), gs.hit},
                   {"events", static_cast<double>(gs.count)}};
  }
  r.restarts = engine.restarts();
  r.config_text = to_text(cfg);
  r.wall_seconds = seconds_since(start);
  return r;
}

EvalReport run_future_item(const RunConfig& cfg, const Dataset& data) {
  validate(cfg);
  const auto start = Clock::now();
  const SplitEvents split = chronological_split(data.events, cfg.split);
  require_events(split.train, "train");
  const bool eval_valid = cfg.eval_split == "valid";
  const std::vector<EventRecord>& eval = eval_valid ? split.valid : split.test;
  require_events(eval, cfg.eval_split.c_str());

  auto trace = open_trace(cfg);
  const RestartPolicy policy = cfg.online_updates ? restart_policy(cfg) : never_restart();
  Engine engine(init_stage(split.train, engine_config(cfg)), policy, trace.get());
  StageState& s = engine.state();

  const PreferenceParams params = preference_params(cfg);
  std::unordered_map<std::string, UserHistory> histories;
  std::unordered_map<std::string, std::unordered_set<Index>> seen;
  auto history_of = [&](const std::string& id) -> UserHistory& {
    return histories.try_emplace(id, params.a, params.b).first->second;
  };
  for (const auto& e : split.train) {
    const Index i = s.items.find(e.item_id);
    history_of(e.user_id).record_item(i, e.timestamp);
    seen[e.user_id].insert(i);
  }
  for (auto& [id, h] : histories) h.record_snapshot(s.user_embedding(s.users.find(id)));

  Grouper grouper(cfg);
  for (const auto& e : split.train) grouper.known_users.insert(e.user_id);

  // Validation interactions update the model before the frozen test phase.
  if (!eval_valid) {
    for (const auto& e : split.valid) {
      if (cfg.online_updates) {
        engine.process(e);
      } else {
        ensure_user(s, e.user_id, e.user_attrs);
        ensure_item(s, e.item_id, e.item_attrs);
      }
      const Index u = s.users.find(e.user_id);
      const Index i = s.items.find(e.item_id);
      history_of(e.user_id).record(i, e.timestamp, s.user_embedding(u));
      seen[e.user_id].insert(i);
      grouper.known_users.insert(e.user_id);
    }
  }

  // Ground truth per user, in first-appearance order so output is stable.
  std::vector<std::string> users;
  std::unordered_map<std::string, std::vector<std::string>> truth;
  std::unordered_map<std::string, std::string> group_of;
  for (const auto& e : eval) {
    auto [it, added] = truth.try_emplace(e.user_id);
    if (added) {
      users.push_back(e.user_id);
      group_of[e.user_id] = grouper.label(e);
      // Cold users enter through their attribute row only.
      ensure_user(s, e.user_id, e.user_attrs);
    }
    it->second.push_back(e.item_id);
  }

  const MatrixXd item_emb = s.item_embeddings();
  const VectorXd multipliers = s.scalers.item_multipliers();
  const bool exclude = excludes_seen(cfg);
  const auto weight = [&](double t) { return s.weight(t); };
  std::unordered_map<std::string, std::vector<std::string>> top;
  for (const auto& id : users) {
    const Index u = s.users.find(id);
    const VectorXd row = s.user_embedding(u);
    auto hit = histories.find(id);
    const UserHistory* hist = hit == histories.end() ? nullptr : &hit->second;
    VectorXd pref = row;
    if (cfg.pattern_modeller) pref = user_preference(hist, row, item_emb, weight, params).e;
    auto sit = seen.find(id);
    const std::unordered_set<Index>* ex = exclude && sit != seen.end() ? &sit->second : nullptr;
    std::vector<std::string> names;
    for (Index i : top_k_items(item_emb, pref, multipliers, cfg.top_k, ex)) {
      names.push_back(s.items.id(i));
    }
    top[id] = std::move(names);
  }

  EvalReport r;
  r.task = task_name(Task::FutureItem);
  const std::string key = "recall@" + std::to_string(cfg.top_k);
  r.set_metric(key, recall_at_k(top, truth, cfg.top_k));
  r.set_stat("users_evaluated", static_cast<double>(users.size()));
  r.set_stat("users", static_cast<double>(s.user_count()));
  r.set_stat("items", static_cast<double>(s.item_count()));
  std::map<std::string, std::unordered_map<std::string, std::vector<std::string>>> group_truth;
  for (const auto& id : users) {
    if (!group_of[id].empty()) group_truth[group_of[id]][id] = truth[id];
  }
  for (const auto& [g, gt] : group_truth) {
    r.groups[g] = {{key, recall_at_k(top, gt, cfg.top_k)},
                   {"users", static_cast<double>(gt.size())}};
  }
  r.restarts = engine.restarts();
  r.config_text = to_text(cfg);
  r.wall_seconds = seconds_since(start);
  return r;
}

EvalReport run_task(const RunConfig& cfg, const Dataset& data) {
  return cfg.task == Task::FutureItem ? run_future_item(cfg, data)
                                      : run_next_interaction(cfg, data);
}

EvalReport run_last_k(const RunConfig& cfg, const Dataset& data,
                      const std::vector<std::size_t>& ks) {
  validate(cfg);
  const auto start = Clock::now();
  const SplitEvents split = chronological_split(data.events, cfg.split);
  std::vector<EventRecord> history = split.train;
  std::vector<EventRecord> eval = split.valid;
  if (cfg.eval_split == "test") {
    history.insert(history.end(), split.valid.begin(), split.valid.end());
    eval = split.test;
  }
  require_events(eval, cfg.eval_split.c_str());
  EvalReport r;
  r.task = "baseline";
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("Last-k needs k >= 1");
    const auto ranks = last_k_ranks(history, eval, k);
    const RankSummary s = mrr_and_hit(ranks, cfg.top_k);
    const RankSummary s1 = mrr_and_hit(ranks, 1);
    r.groups["last-" + std::to_string(k)] = {
        {"mrr", s.mrr}, {"hit@1", s1.hit}, {"hit@" + std::to_string(cfg.top_k), s.hit}};
  }
  r.set_stat("events_evaluated", static_cast<double>(eval.size()));
  r.config_text = to_text(cfg);
  r.wall_seconds = seconds_since(start);
  return r;
}

std::vector<Variant> ablation_variants(const RunConfig& cfg) {
  std::vector<Variant> out;
  auto add = [&](const char* label, auto&& edit) {
    RunConfig c = cfg;
    edit(c);
    out.push_back({label, c});
  };
  if (cfg.task == Task::NextInteraction) {
    auto plain = [](RunConfig& c) {
      c.decay = false;
      c.lambda = 0.0;
    };
    add("D", [&](RunConfig& c) {
      plain(c);
      c.online_updates = false;
      c.restart = RestartKind::None;
    });
    add("E", [&](RunConfig& c) {
      plain(c);
      c.predict_from_stage_start = true;
    });
    add("F", [&](RunConfig& c) {
      plain(c);
      c.restart = RestartKind::None;
    });
    add("G", plain);
    add("H", [](RunConfig& c) { c.lambda = 0.0; });
    add("I", [](RunConfig& c) { c.decay = false; });
    add("full", [](RunConfig&) {});
  } else {
    add("A", [](RunConfig& c) {
      c.pattern_modeller = false;
      c.gamma = 0.5;
    });
    add("B", [](RunConfig& c) { c.pattern_modeller = false; });
    add("C", [](RunConfig& c) { c.gamma = 0.5; });
    add("full", [](RunConfig&) {});
  }
  return out;
}

EvalReport run_ablation(const RunConfig& cfg, const Dataset& data) {
  const auto start = Clock::now();
  EvalReport r;
  r.task = "ablation-" + task_name(cfg.task);
  for (const auto& v : ablation_variants(cfg)) {
    RunConfig c = v.config;
    c.trace.clear();
    const EvalReport sub = run_task(c, data);
    MetricList row = sub.metrics;
    row.emplace_back("restarts", sub.restarts);
    r.groups[v.label] = row;
  }
  r.config_text = to_text(cfg);
  r.wall_seconds = seconds_since(start);
  return r;
}

EvalReport run_robustness(const RunConfig& cfg, const Dataset& data) {
  const auto start = Clock::now();
  EvalReport r;
  r.task = "robustness";
  Curve curve{{"train_frac", "mrr", "hit@" + std::to_string(cfg.top_k)}, {}};
  double lo = 1.0, hi = 0.0;
  for (int step = 1; step <= 8; ++step) {
    RunConfig c = cfg;
    c.task = Task::NextInteraction;
    c.trace.clear();
    c.split = {step / 10.0, 0.1, 0.1};
    c.eval_split = "test";
    const EvalReport sub = run_next_interaction(c, data);
    const double mrr = sub.metric("mrr");
    curve.rows.push_back({c.split.train, mrr, sub.metric("hit@" + std::to_string(cfg.top_k))});
    lo = std::min(lo, mrr);
    hi = std::max(hi, mrr);
  }
  r.curves["robustness"] = curve;
  r.set_stat("mrr_range", hi - lo);
  r.config_text = to_text(cfg);
  r.wall_seconds = seconds_since(start);
  return r;
}

}  // namespace incgraph
