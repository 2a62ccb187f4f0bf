#include <gtest/gtest.h>

#include <cmath>

#include "incgraph/errors.hpp"
#include "incgraph/metrics.hpp"
#include "incgraph/report.hpp"
#include "incgraph/studies.hpp"
#include "incgraph/tasks.hpp"
#include "incgraph/tune.hpp"
#include "support/oracles.hpp"
#include "support/toy_data.hpp"

using namespace incgraph;

TEST(Split, Sizes) {
  const auto d = toy::uniform_stream(10, 3, 3, 1);
  const auto s = chronological_split(d.events, {0.8, 0.1, 0.1});
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.valid.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.valid[0].timestamp, d.events[8].timestamp);

  const auto r = chronological_split(d.events, {0.1, 0.1, 0.1});
  EXPECT_EQ(r.train.size(), 1u);
  EXPECT_EQ(r.valid[0].item_id, d.events[1].item_id);
  EXPECT_EQ(r.test[0].item_id, d.events[2].item_id);
  EXPECT_THROW(chronological_split(d.events, {0.9, 0.2, 0.0}), ConfigError);
}

TEST(Split, TiesKeepOriginalOrder) {
  std::vector<EventRecord> e;
  for (int j = 0; j < 10; ++j) e.push_back({"u", "i" + std::to_string(j), 1.0, {}, {}});
  const auto s = chronological_split(e, {0.5, 0.2, 0.3});
  EXPECT_EQ(s.train.back().item_id, "i4");
  EXPECT_EQ(s.valid.front().item_id, "i5");
  EXPECT_EQ(s.test.front().item_id, "i7");
}

TEST(Recall, Examples) {
  using M = std::unordered_map<std::string, std::vector<std::string>>;
  M top{{"a", {"1", "2"}}, {"b", {"3", "4"}}, {"c", {"5"}}};
  EXPECT_DOUBLE_EQ(recall_at_k(top, M{{"a", {"1"}}, {"b", {"4", "3"}}}, 10), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(top, M{{"a", {"1", "9"}}}, 10), 0.5);
  // Three users: 1/2, 0/1, 1/1 -> mean 0.5; an empty truth list is skipped.
  const M truth{{"a", {"2", "7"}}, {"b", {"9"}}, {"c", {"5"}}, {"d", {}}};
  EXPECT_DOUBLE_EQ(recall_at_k(top, truth, 10), (0.5 + 0.0 + 1.0) / 3.0);
  EXPECT_DOUBLE_EQ(recall_at_k(top, M{{"a", {"2"}}}, 1), 0.0);
  EXPECT_THROW(recall_at_k(top, M{}, 10), InputError);
}

TEST(MrrHit, Examples) {
  const std::vector<std::size_t> ones(5, 1);
  const auto a = mrr_and_hit(ones, 10);
  EXPECT_DOUBLE_EQ(a.mrr, 1.0);
  EXPECT_DOUBLE_EQ(a.hit, 1.0);
  const std::vector<std::size_t> mixed{1, 2, 10, 11};
  const auto b = mrr_and_hit(mixed, 10);
  EXPECT_NEAR(b.mrr, (1 + 0.5 + 0.1 + 1.0 / 11) / 4, 1e-15);
  EXPECT_NEAR(b.mrr, 0.4227, 1e-4);
  EXPECT_DOUBLE_EQ(b.hit, 0.75);
  const std::vector<std::size_t> miss{0, 1};
  EXPECT_DOUBLE_EQ(mrr_and_hit(miss, 10).mrr, 0.5);
  EXPECT_THROW(mrr_and_hit(std::vector<std::size_t>{}, 10), InputError);
}

TEST(Correlation, Coefficients) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 4, 9, 16, 25};
  EXPECT_DOUBLE_EQ(spearman(x, y), 1.0);
  EXPECT_LT(pearson(x, y), 1.0);
  const std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(x, rev), -1.0, 1e-15);
  const std::vector<double> tied{1, 1, 2, 2, 3};
  EXPECT_NEAR(spearman(tied, x), 0.9486832980505138, 1e-12);
}

TEST(LastK, RepeaterAlwaysHits) {
  std::vector<EventRecord> train{{"u", "x", 1, {}, {}}};
  std::vector<EventRecord> eval(20, EventRecord{"u", "x", 2, {}, {}});
  const auto ranks = last_k_ranks(train, eval, 1);
  EXPECT_DOUBLE_EQ(mrr_and_hit(ranks, 10).hit, 1.0);
}

TEST(LastK, DistinctRecentItems) {
  std::vector<EventRecord> train{{"u", "a", 1, {}, {}}, {"u", "b", 2, {}, {}},
                                 {"u", "a", 3, {}, {}}};
  std::vector<EventRecord> eval{{"u", "b", 4, {}, {}}, {"u", "c", 5, {}, {}},
                                {"v", "a", 6, {}, {}}};
  const auto ranks = last_k_ranks(train, eval, 2);
  EXPECT_EQ(ranks, (std::vector<std::size_t>{2, 0, 0}));
}

TEST(NextInteraction, ToyStreamMatchesEnumeration) {
  RunConfig cfg = toy::count_config();
  const Dataset d = toy::repeat_stream();
  cfg.split = {18.0 / 23.0, 0.0, 5.0 / 23.0};
  const auto r = run_next_interaction(cfg, d);
  // Hand-enumerated ranks: 2, 3, 3, 1, 1.
  EXPECT_NEAR(r.metric("mrr"), (0.5 + 1.0 / 3 + 1.0 / 3 + 1 + 1) / 5, 1e-12);
  EXPECT_DOUBLE_EQ(r.metric("hit@1"), 0.4);
  EXPECT_DOUBLE_EQ(r.stat("events_evaluated"), 5.0);
}

TEST(FutureItem, ToyRecallMatchesEnumeration) {
  const Dataset d = toy::three_user_set();
  RunConfig cfg = toy::count_config();
  cfg.task = Task::FutureItem;
  cfg.ranks[0] = 1;
  cfg.top_k = 2;
  cfg.split = {0.75, 0.0, 0.25};
  const auto split = chronological_split(d.events, cfg.split);

  // Oracle: best rank-1 approximation of the training count matrix, unseen
  // items only, top-2 by brute force.
  std::map<std::string, Index> uidx, iidx;
  for (const auto& e : split.train) {
    uidx.try_emplace(e.user_id, static_cast<Index>(uidx.size()));
    iidx.try_emplace(e.item_id, static_cast<Index>(iidx.size()));
  }
  MatrixXd r = MatrixXd::Zero(static_cast<Index>(uidx.size()), static_cast<Index>(iidx.size()));
  for (const auto& e : split.train) r(uidx[e.user_id], iidx[e.item_id]) += 1.0;
  const MatrixXd scores = oracle::best_rank_k(r, 1);
  std::vector<std::string> names(iidx.size());
  for (const auto& [n, j] : iidx) names[static_cast<std::size_t>(j)] = n;
  std::unordered_map<std::string, std::vector<std::string>> top, truth;
  for (const auto& e : split.test) truth[e.user_id].push_back(e.item_id);
  for (const auto& [u, row] : uidx) {
    std::vector<double> s;
    for (Index j = 0; j < scores.cols(); ++j) {
      s.push_back(r(row, j) > 0 ? -1e300 : scores(row, j));
    }
    for (Index j : oracle::brute_force_ranking(s)) {
      if (r(row, j) > 0 || top[u].size() == 2) continue;
      top[u].push_back(names[static_cast<std::size_t>(j)]);
    }
  }
  const auto rep = run_future_item(cfg, d);
  EXPECT_NEAR(rep.metric("recall@2"), recall_at_k(top, truth, 2), 1e-12);
}

TEST(FutureItem, GroupsCoverAllUsers) {
  const Dataset d = toy::uniform_stream(300, 12, 15, 5, true);
  RunConfig cfg;
  cfg.task = Task::FutureItem;
  cfg.ranks = {3, 1, 1, 1, 1, 0};
  cfg.path_weights = {1, 1, 1};
  cfg.restart = RestartKind::None;
  cfg.group_by = "user_attr:0";
  const auto r = run_future_item(cfg, d);
  double weighted = 0, users = 0;
  for (const auto& [g, list] : r.groups) {
    weighted += list[0].second * list[1].second;
    users += list[1].second;
  }
  EXPECT_DOUBLE_EQ(users, r.stat("users_evaluated"));
  EXPECT_NEAR(weighted / users, r.metric("recall@10"), 1e-12);
}

TEST(FutureItem, ColdStartUsersUseAttributes) {
  Dataset d = toy::uniform_stream(200, 10, 12, 6, true);
  // Two users appear only in the test window.
  const double t = d.events.back().timestamp;
  d.events.push_back({"cold1", "i1", t + 1, {1, 0}, d.events[1].item_attrs});
  d.events.push_back({"cold2", "i2", t + 2, {0, 1}, d.events[2].item_attrs});
  RunConfig cfg;
  cfg.task = Task::FutureItem;
  cfg.ranks = {2, 1, 1, 1, 1, 0};
  cfg.path_weights = {1, 1, 1};
  cfg.restart = RestartKind::None;
  cfg.group_by = "cold_start";
  const auto r = run_future_item(cfg, d);
  ASSERT_TRUE(r.groups.count("cold"));
  EXPECT_DOUBLE_EQ(r.groups.at("cold")[1].second, 2.0);
}

TEST(Reports, DeterministicBodies) {
  const Dataset d = toy::uniform_stream(400, 15, 12, 9);
  RunConfig cfg;
  cfg.ranks[0] = 4;
  cfg.a = 2;
  cfg.b = 2;
  cfg.lambda = 0.5;
  cfg.restart_threshold = 0.05;
  const auto a = run_next_interaction(cfg, d);
  const auto b = run_next_interaction(cfg, d);
  EXPECT_EQ(report_body(a), report_body(b));
  for (const auto& [k, v] : a.metrics) {
    EXPECT_GE(v, 0.0) << k;
    EXPECT_LE(v, 1.0) << k;
  }
  EXPECT_LE(a.metric("hit@1"), a.metric("hit@10"));
  EXPECT_GE(a.metric("mrr"), a.metric("hit@1"));
  EXPECT_EQ(report_body(a).find("wall_seconds"), std::string::npos);
  EXPECT_NE(report_json(a).find("wall_seconds"), std::string::npos);
}

TEST(Reports, CurveCsvAndHash) {
  Curve c{{"x", "y"}, {{1, 0.5}, {2, 0.25}}};
  EXPECT_EQ(curve_csv(c), "x,y\n1,0.5\n2,0.25\n");
  EXPECT_EQ(content_hash(""), "cbf29ce484222325");
  EXPECT_NE(content_hash("a=1\n"), content_hash("a=2\n"));
}

TEST(Ablation, LabelsAndSchema) {
  RunConfig cfg;
  const auto next = ablation_variants(cfg);
  std::vector<std::string> labels;
  for (const auto& v : next) labels.push_back(v.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"D", "E", "F", "G", "H", "I", "full"}));
  cfg.task = Task::FutureItem;
  labels.clear();
  for (const auto& v : ablation_variants(cfg)) labels.push_back(v.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"A", "B", "C", "full"}));

  const Dataset d = toy::uniform_stream(300, 10, 10, 4);
  RunConfig n;
  n.ranks[0] = 3;
  n.lambda = 0.5;
  n.restart_threshold = 0.05;
  const auto r = run_ablation(n, d);
  ASSERT_EQ(r.groups.size(), 7u);
  for (const auto& [label, row] : r.groups) {
    EXPECT_EQ(row.size(), r.groups.at("full").size()) << label;
  }
}

TEST(Baseline, LastOneIsHitAtOne) {
  const Dataset d = toy::uniform_stream(300, 8, 6, 2);
  RunConfig cfg;
  const auto r = run_last_k(cfg, d, {1, 10});
  const auto& one = r.groups.at("last-1");
  EXPECT_DOUBLE_EQ(one[0].second, one[1].second);  // mrr == hit@1
  EXPECT_DOUBLE_EQ(one[1].second, one[2].second);  // hit@1 == hit@10
}

TEST(RestartStudy, ZeroRestartsGiveIdenticalPolicies) {
  const Dataset d = toy::uniform_stream(200, 8, 8, 3);
  RunConfig cfg;
  cfg.ranks[0] = 3;
  cfg.study_intervals = 10;
  cfg.study_fractions = {1e9};
  const auto r = restart_policy_study(cfg, d);
  const auto& g = r.groups.begin()->second;
  EXPECT_EQ(g[0].second, 0.0);
  EXPECT_EQ(g[1].second, g[2].second);
  EXPECT_EQ(g[1].second, g[3].second);
}

TEST(RestartStudy, MatchedIntervals) {
  EXPECT_EQ(match_count_interval(100, 4), 21u);  // 20 would restart five times
  EXPECT_EQ(97 / match_count_interval(97, 3), 3u);
  EXPECT_EQ(100 / match_count_interval(97, 3), 4u);
  std::vector<double> times;
  for (int j = 1; j <= 100; ++j) times.push_back(j);
  for (int n = 1; n <= 9; ++n) {
    const double iv = match_time_interval(times, 0.0, n);
    EXPECT_EQ(time_policy_restarts(times, 0.0, iv), n);
  }
}

TEST(CorrelationStudy, MonotoneStream) {
  // Every event hits a fresh item row pair so both distance and error grow
  // with the interval gap.
  const Dataset d = toy::growing_stream(400);
  RunConfig cfg;
  cfg.ranks[0] = 2;
  cfg.decay = false;
  cfg.study_intervals = 20;
  cfg.study_max_delta = 6;
  const auto r = correlation_study(cfg, d);
  EXPECT_DOUBLE_EQ(r.stat("spearman"), 1.0);
}

TEST(Tune, SingletonAndBestOfTwo) {
  const Dataset d = toy::uniform_stream(400, 12, 10, 5);
  RunConfig base;
  base.restart_threshold = 0.05;
  const auto one = grid_search(base, d, parse_search_space("k1 = 2\n"), "", 1);
  EXPECT_EQ(one.leaderboard.size(), 1u);
  EXPECT_EQ(one.best.ranks[0], 2);
  EXPECT_EQ(one.best.eval_split, "test");

  const auto two = grid_search(base, d, parse_search_space("k1 = 1 6\n"), "mrr", 2);
  double s1, s6;
  {
    RunConfig c = base;
    c.eval_split = "valid";
    c.ranks[0] = 1;
    s1 = run_next_interaction(c, d).metric("mrr");
    c.ranks[0] = 6;
    s6 = run_next_interaction(c, d).metric("mrr");
  }
  EXPECT_EQ(two.best.ranks[0], s6 > s1 ? 6 : 1);
  EXPECT_DOUBLE_EQ(two.leaderboard[0].objective, s1);
  EXPECT_DOUBLE_EQ(two.leaderboard[1].objective, s6);
}

TEST(Tune, GridOrder) {
  const auto pts = grid_points(parse_search_space("a = 1 3\nb = 1 2 3\n"));
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(assignment_text(pts[0]), "a=1 b=1");
  EXPECT_EQ(assignment_text(pts[1]), "a=1 b=2");
  EXPECT_EQ(assignment_text(pts[5]), "a=3 b=3");
  EXPECT_THROW(parse_search_space("nope = 1\n"), ConfigError);
  EXPECT_THROW(parse_search_space("a =\n"), ConfigError);
}
