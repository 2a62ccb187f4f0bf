// incgraph command-line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 data error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "incgraph/config.hpp"
#include "incgraph/engine.hpp"
#include "incgraph/errors.hpp"
#include "incgraph/events.hpp"
#include "incgraph/metrics.hpp"
#include "incgraph/report.hpp"
#include "incgraph/studies.hpp"
#include "incgraph/tasks.hpp"
#include "incgraph/tune.hpp"

namespace {

using namespace incgraph;

struct CommonOpts {
  std::string config;
  std::vector<std::string> sets;
  std::string task;
  std::string dataset;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "reports";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("-c,--config", o.config, "key=value config file");
  cmd->add_option("--set", o.sets, "override, key=value (repeatable)");
  cmd->add_option("--task", o.task, "future-item | next-interaction");
  cmd->add_option("--dataset", o.dataset, "canonical event CSV");
  cmd->add_option("--seed", o.seed, "accepted and echoed; runs are deterministic")
      ->each([&o](const std::string&) { o.seed_given = true; });
  cmd->add_option("-o,--out", o.out, "report directory")->capture_default_str();
}

RunConfig resolve(const CommonOpts& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.task.empty()) set_config_value(cfg, "task", o.task);
  if (!o.dataset.empty()) cfg.dataset = o.dataset;
  if (o.seed_given) cfg.seed = o.seed;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

void emit(const EvalReport& r, const CommonOpts& o, const RunConfig& cfg) {
  const auto path = write_report(r, o.out);
  std::cout << "seed " << cfg.seed << '\n';
  for (const auto& [k, v] : r.metrics) std::cout << k << ' ' << format_double(v) << '\n';
  for (const auto& [k, v] : r.stats) std::cout << k << ' ' << format_double(v) << '\n';
  for (const auto& [g, list] : r.groups) {
    std::cout << g;
    for (const auto& [k, v] : list) std::cout << ' ' << k << '=' << format_double(v);
    std::cout << '\n';
  }
  std::cout << "restarts " << r.restarts << '\n'
            << "wall_seconds " << format_double(r.wall_seconds) << '\n'
            << "report " << path.string() << '\n';
}

EvalReport stream_only(const RunConfig& cfg, const Dataset& data) {
  const auto start = std::chrono::steady_clock::now();
  const SplitEvents split = chronological_split(data.events, {cfg.split.train, 0.0, 0.0});
  if (split.train.empty()) throw DataError("train split is empty");
  std::unique_ptr<std::ofstream> trace;
  if (!cfg.trace.empty()) {
    trace = std::make_unique<std::ofstream>(cfg.trace);
    if (!*trace) throw DataError("cannot write trace " + cfg.trace);
  }
  Engine engine(init_stage(split.train, engine_config(cfg)), restart_policy(cfg), trace.get());
  for (std::size_t j = split.train.size(); j < data.events.size(); ++j) {
    engine.process(data.events[j]);
  }
  EvalReport r;
  r.task = "run";
  r.set_stat("events_streamed", static_cast<double>(engine.events_processed()));
  r.set_stat("final_distance", engine.state().monitor_distance);
  r.set_stat("users", static_cast<double>(engine.state().user_count()));
  r.set_stat("items", static_cast<double>(engine.state().item_count()));
  r.set_stat("embedding_width", static_cast<double>(engine.state().embedding_width()));
  r.restarts = engine.restarts();
  r.config_text = to_text(cfg);
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental graph-embedding recommender: conversion, evaluation and studies"};
  app.require_subcommand(1);

  // convert
  auto* convert_cmd = app.add_subcommand("convert", "convert a raw dataset to the canonical event CSV");
  std::string input, output, format = "generic";
  ConvertOptions copts;
  bool no_attrs = false;
  convert_cmd->add_option("input", input, "raw input file")->required();
  convert_cmd->add_option("output", output, "canonical output file")->required();
  convert_cmd->add_option("-f,--format", format,
                          "canonical | generic | movielens-100k | movielens-1m | jodie")
      ->capture_default_str();
  convert_cmd->add_option("--user-attr-cols", copts.user_attr_cols, "generic: user attribute columns");
  convert_cmd->add_option("--item-attr-cols", copts.item_attr_cols, "generic: item attribute columns");
  convert_cmd->add_flag("--no-attributes", no_attrs, "skip MovieLens side files");
  convert_cmd->add_option("--min-item-interactions", copts.min_item_interactions,
                          "drop items with fewer interactions");

  CommonOpts run_o, eval_o, ablate_o, mon_o, corr_o, rob_o, base_o, tune_o;
  auto* run_cmd = app.add_subcommand("run", "stream a dataset through the engine (trace + restarts)");
  add_common(run_cmd, run_o);
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a task on the configured split");
  add_common(eval_cmd, eval_o);
  auto* ablate_cmd = app.add_subcommand("ablate", "run the ablation variants of the task");
  add_common(ablate_cmd, ablate_o);
  auto* mon_cmd = app.add_subcommand("study-monitor", "compare monitor, count and time restart policies");
  add_common(mon_cmd, mon_o);
  auto* corr_cmd = app.add_subcommand("study-correlation", "distance/error correlation over interval gaps");
  add_common(corr_cmd, corr_o);
  auto* rob_cmd = app.add_subcommand("study-robustness", "next-interaction MRR across training fractions");
  add_common(rob_cmd, rob_o);
  auto* base_cmd = app.add_subcommand("baseline", "Last-k baseline for next-interaction");
  add_common(base_cmd, base_o);
  std::vector<std::size_t> ks{1, 10};
  base_cmd->add_option("--k", ks, "k values")->capture_default_str();
  auto* tune_cmd = app.add_subcommand("tune", "grid search on validation, final run on test");
  add_common(tune_cmd, tune_o);
  std::string space_path, objective;
  std::size_t jobs = 1;
  tune_cmd->add_option("--space", space_path, "search-space file")->required();
  tune_cmd->add_option("--objective", objective, "metric to maximize (default: task headline)");
  tune_cmd->add_option("-j,--jobs", jobs, "parallel worker runs")->capture_default_str();
  auto* keys_cmd = app.add_subcommand("keys", "list config keys with defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*convert_cmd) {
      copts.format = parse_source_format(format);
      copts.with_attributes = !no_attrs;
      const Dataset d = convert(input, copts);
      write_canonical(std::filesystem::path(output), d);
      std::cout << "events " << d.events.size() << '\n' << "output " << output << '\n';
      return 0;
    }
    if (*keys_cmd) {
      for (const auto& k : config_keys()) {
        std::cout << k.name << '=' << k.default_value << "  # " << k.doc << '\n';
      }
      return 0;
    }
    auto go = [&](const CommonOpts& o, auto&& fn) {
      const RunConfig cfg = resolve(o);
      const Dataset data = load_dataset(cfg);
      emit(fn(cfg, data), o, cfg);
      return 0;
    };
    if (*run_cmd) return go(run_o, stream_only);
    if (*eval_cmd) return go(eval_o, run_task);
    if (*ablate_cmd) return go(ablate_o, run_ablation);
    if (*mon_cmd) return go(mon_o, restart_policy_study);
    if (*corr_cmd) return go(corr_o, correlation_study);
    if (*rob_cmd) return go(rob_o, run_robustness);
    if (*base_cmd) {
      return go(base_o, [&](const RunConfig& c, const Dataset& d) { return run_last_k(c, d, ks); });
    }
    if (*tune_cmd) {
      const SearchSpace space = load_search_space(space_path);
      return go(tune_o, [&](const RunConfig& c, const Dataset& d) {
        return tune_report(grid_search(c, d, space, objective, jobs), c);
      });
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
