#include "commands.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "causalepp/checkpoint.hpp"
#include "causalepp/error.hpp"
#include "causalepp/evaluation.hpp"
#include "causalepp/popstats.hpp"
#include "dataset_io.hpp"

namespace causalepp::cli {

namespace {

void emit(const std::filesystem::path& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

int window_steps(const RunConfig& config, const TimeGrid& grid) {
  if (config.window_steps > 0) return std::min(config.window_steps, grid.num_steps);
  return window_steps_for(grid, config.window_months * kSecondsPerMonth);
}

ForecastConfig forecast_config(const RunConfig& config, const TimeGrid& grid) {
  return {ma_window_for(grid, config.ma_fraction), config.delta_item, config.delta_user, config.slope};
}

const std::string& meta_value(const Metadata& meta, const std::string& key, const std::filesystem::path& model) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ParseError(metadata_path(model).string(), 0, "metadata lacks '" + key + "'");
  return it->second;
}

// Dataset, statistics and frozen model wired together for scoring.
struct Loaded {
  PreparedData data;
  PopularityStats stats;
  Checkpoint ckpt;
  BipartiteGraph graph;
  PropagatedEmbeddings prop;
  ScoringOptions options;
  InterventionPlan plan;
};

Loaded load_model(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& model) {
  Loaded l;
  l.data = read_prepared(data_dir);
  l.ckpt = load_checkpoint(model);
  const auto& split = l.data.split;
  if (l.ckpt.params.num_users() != split.num_users || l.ckpt.params.num_items() != split.num_items) {
    throw InvalidArgument("model " + model.string() + " was trained on a dataset of a different shape");
  }
  // Statistics must be rebuilt exactly as during training.
  const auto& meta = l.ckpt.meta;
  StatsConfig sc;
  sc.window_steps = std::stoi(meta_value(meta, "window_steps", model));
  sc.quantile = std::stod(meta_value(meta, "quantile", model));
  l.stats = compute_stats(split, sc);
  l.graph = BipartiteGraph(split.train, split.num_users, split.num_items);
  l.prop = propagate(l.ckpt.params, l.graph);
  l.options.mode = parse_train_mode(meta_value(meta, "mode", model));
  l.options.alpha = std::stod(meta_value(meta, "alpha", model));
  l.options.no_consistency = meta_value(meta, "no_consistency", model) == "true";
  l.plan = build_intervention(l.stats.pop, l.stats.personal, forecast_config(config, split.grid));
  return l;
}

const std::vector<Interaction>& held_out(const SplitDataset& split, EvalSplit which) {
  return which == EvalSplit::kTest ? split.test : split.validation;
}

std::string split_name(EvalSplit which) { return which == EvalSplit::kTest ? "test" : "validation"; }

struct Evaluation {
  MetricsReport metrics;
  BiasReport bias;
};

Evaluation evaluate_with(const Loaded& l, const Scorer& scorer, const Intervention& intervention, EvalSplit which,
                         int k) {
  const auto& split = l.data.split;
  const TruthSets truth = group_by_user(held_out(split, which), split.num_users);
  const auto users = users_with_truth(truth);
  const auto rankings = recommend(scorer, l.graph, users, k, intervention);
  return {metrics(rankings, truth, k), bias_report(rankings, l.stats.pop.global, truth)};
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// Step-major rows `step,id,value` over a row-major id x step table.
std::string step_csv(const std::string& header, int rows, int steps, const std::vector<double>& values) {
  std::string out = header;
  for (int t = 0; t < steps; ++t) {
    for (int r = 0; r < rows; ++r) {
      const auto idx = static_cast<std::size_t>(r) * static_cast<std::size_t>(steps) + static_cast<std::size_t>(t);
      out += std::to_string(t) + "," + std::to_string(r) + "," + format_double(values[idx]) + "\n";
    }
  }
  return out;
}

}  // namespace

EvalSplit parse_eval_split(const std::string& name) {
  if (name == "test") return EvalSplit::kTest;
  if (name == "validation") return EvalSplit::kValidation;
  throw InvalidArgument("unknown split '" + name + "' (expected validation or test)");
}

void cmd_prepare(const RunConfig& config, const KeyValues& settings, const std::filesystem::path& input,
                 const std::filesystem::path& out_dir, bool synthetic) {
  PreparedData d;
  if (synthetic) {
    auto result = generate_synthetic(config.synth, config.seed());
    d.split = std::move(result.split);
    for (int u = 0; u < d.split.num_users; ++u) d.user_ids.push_back(std::to_string(u));
    for (int i = 0; i < d.split.num_items; ++i) d.item_ids.push_back(std::to_string(i));
    d.manifest["source"] = "synthetic";
    d.manifest["seed"] = std::to_string(config.seed());
    for (const auto& [k, v] : settings) {
      if (k.rfind("synth_", 0) == 0) d.manifest[k] = v;
    }
    write_ground_truth(out_dir, result.truth);
  } else {
    if (input.empty()) throw InvalidArgument("prepare needs --input (or --synth)");
    Corpus corpus = load_interactions(input, config.k_core);
    d.split = chronological_split(corpus.interactions, config.num_parts, config.num_steps,
                                  corpus.num_users(), corpus.num_items());
    d.user_ids = std::move(corpus.user_ids);
    d.item_ids = std::move(corpus.item_ids);
    d.manifest["source"] = input.filename().string();
    d.manifest["k_core"] = std::to_string(config.k_core);
  }
  d.manifest["num_parts"] = std::to_string(config.num_parts);
  write_prepared(out_dir, d);
  std::cerr << "prepared " << d.split.train.size() << " train / " << d.split.validation.size() << " validation / "
            << d.split.test.size() << " test interactions (" << d.split.num_users << " users, "
            << d.split.num_items << " items) in " << out_dir.string() << "\n";
}

void cmd_stats(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& out_dir) {
  const auto data = read_prepared(data_dir);
  const auto& split = data.split;
  const StatsConfig sc{window_steps(config, split.grid), config.quantile};
  const auto stats = compute_stats(split, sc);
  const int steps = split.grid.num_steps;

  write_text_file(out_dir / "local_popularity.csv",
                  step_csv("step,item_id,local_pop\n", split.num_items, steps, stats.pop.local));
  write_text_file(out_dir / "personal_popularity.csv",
                  step_csv("step,user_id,personal_pop\n", split.num_users, steps, stats.personal.personal));

  std::string thr = "step,threshold\n";
  for (int t = 0; t < steps; ++t) {
    const double v = stats.personal.threshold[static_cast<std::size_t>(t)];
    thr += std::to_string(t) + "," + (std::isinf(v) ? std::string("inf") : format_double(v)) + "\n";
  }
  write_text_file(out_dir / "thresholds.csv", thr);

  std::string items = "item_id,global_count,avg_local_pop\n";
  for (ItemId i = 0; i < split.num_items; ++i) {
    const auto k = static_cast<std::size_t>(i);
    items += std::to_string(i) + "," + std::to_string(stats.pop.global[k]) + "," +
             format_double(stats.pop.avg_local[k]) + "\n";
  }
  write_text_file(out_dir / "item_popularity.csv", items);

  const auto plan = build_intervention(stats.pop, stats.personal, forecast_config(config, split.grid));
  std::string pi = "item_id,p_T,slope,p_star\n";
  for (ItemId i = 0; i < split.num_items; ++i) {
    const auto k = static_cast<std::size_t>(i);
    pi += std::to_string(i) + "," + format_double(plan.p_last[k]) + "," + format_double(plan.p_slope[k]) + "," +
          format_double(plan.p_star[k]) + "\n";
  }
  write_text_file(out_dir / "plan_items.csv", pi);
  std::string pu = "user_id,s_T,slope,s_star\n";
  for (UserId u = 0; u < split.num_users; ++u) {
    const auto k = static_cast<std::size_t>(u);
    pu += std::to_string(u) + "," + format_double(plan.s_last[k]) + "," + format_double(plan.s_slope[k]) + "," +
          format_double(plan.s_star[k]) + "\n";
  }
  write_text_file(out_dir / "plan_users.csv", pu);
  std::cerr << "window " << sc.window_steps << " steps, moving average over " << plan.ma_window
            << " steps; tables written to " << out_dir.string() << "\n";
}

void cmd_train(const RunConfig& config, const KeyValues& settings, const std::filesystem::path& data_dir,
               const std::filesystem::path& model, const std::filesystem::path& report) {
  const auto data = read_prepared(data_dir);
  const auto& split = data.split;
  const StatsConfig sc{window_steps(config, split.grid), config.quantile};
  const auto stats = compute_stats(split, sc);
  const auto result = train(split, stats, config.train);

  Metadata meta;
  for (const char* key : {"seed", "alpha", "lambda", "dim", "lr", "epochs", "batch_size", "negatives", "mode",
                          "ips_cap", "backbone", "num_layers", "patience", "eval_every", "k"}) {
    meta[key] = settings.at(key);
  }
  meta["no_quality"] = bool_text(config.train.ablation.no_quality);
  meta["no_consistency"] = bool_text(config.train.ablation.no_consistency);
  meta["window_steps"] = std::to_string(sc.window_steps);
  meta["quantile"] = format_double(sc.quantile);
  meta["best_epoch"] = std::to_string(result.report.best_epoch);
  save_checkpoint(model, result.params, meta);
  write_text_file(report, format_report(result.report, config.train));

  const auto& r = result.report;
  if (config.train.mode == TrainMode::kIPS) {
    std::cerr << "ips weights: min " << r.ips_weight_min << ", max " << r.ips_weight_max << ", mean "
              << r.ips_weight_mean << "\n";
  }
  if (!r.epochs.empty()) {
    std::cerr << "trained " << r.epochs.size() << " epochs in " << r.wall_seconds << " s; loss "
              << r.epochs.front().total_loss << " -> " << r.epochs.back().total_loss << ", best epoch "
              << r.best_epoch << (r.stopped_early ? " (stopped early)" : "") << "\n";
  }
}

void cmd_recommend(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& model,
                   const std::filesystem::path& out, std::optional<EvalSplit> users_from) {
  const auto l = load_model(config, data_dir, model);
  const auto& split = l.data.split;
  std::vector<UserId> users;
  if (users_from) {
    users = users_with_truth(group_by_user(held_out(split, *users_from), split.num_users));
  } else {
    for (UserId u = 0; u < split.num_users; ++u) users.push_back(u);
  }
  const Scorer scorer(l.ckpt.params, l.prop, l.stats, l.options, &l.plan);
  const auto rankings = recommend(scorer, l.graph, users, config.k, config.intervention);
  std::string text = "user_id\trank\titem_id\tscore\n";
  for (const auto& r : rankings) {
    for (std::size_t k = 0; k < r.items.size(); ++k) {
      text += l.data.user_ids[static_cast<std::size_t>(r.user)] + "\t" + std::to_string(k + 1) + "\t" +
              l.data.item_ids[static_cast<std::size_t>(r.items[k])] + "\t" + format_double(r.scores[k]) + "\n";
    }
  }
  emit(out, text);
}

void cmd_evaluate(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& model,
                  const std::filesystem::path& out, EvalSplit split, bool csv) {
  const auto l = load_model(config, data_dir, model);
  const Scorer scorer(l.ckpt.params, l.prop, l.stats, l.options, &l.plan);
  const auto e = evaluate_with(l, scorer, config.intervention, split, config.k);
  const std::string intervention(to_string(config.intervention.mode));
  if (csv) {
    std::ostringstream o;
    o << "split,intervention,k,recall,precision,ndcg,users_evaluated,popular_ratio_recommended,"
         "popular_ratio_ground_truth\n"
      << split_name(split) << "," << intervention << "," << e.metrics.k << "," << format_double(e.metrics.recall)
      << "," << format_double(e.metrics.precision) << "," << format_double(e.metrics.ndcg) << ","
      << e.metrics.num_users_evaluated << "," << format_double(e.bias.popular_ratio_recommended) << ","
      << format_double(e.bias.popular_ratio_ground_truth) << "\n";
    emit(out, o.str());
    return;
  }
  KeyValues kv;
  kv["split"] = split_name(split);
  kv["intervention"] = intervention;
  kv["k"] = std::to_string(e.metrics.k);
  kv["recall"] = format_double(e.metrics.recall);
  kv["precision"] = format_double(e.metrics.precision);
  kv["ndcg"] = format_double(e.metrics.ndcg);
  kv["users_evaluated"] = std::to_string(e.metrics.num_users_evaluated);
  kv["popular_items"] = std::to_string(e.bias.popular_items.size());
  kv["popular_ratio_recommended"] = format_double(e.bias.popular_ratio_recommended);
  kv["popular_ratio_ground_truth"] = format_double(e.bias.popular_ratio_ground_truth);
  kv["recommended_slots"] = std::to_string(e.bias.recommended_slots);
  kv["truth_interactions"] = std::to_string(e.bias.truth_interactions);
  emit(out, format_key_values(kv, "causalepp evaluation"));
}

void cmd_bias_report(const RunConfig& config, const std::filesystem::path& data_dir,
                     const std::filesystem::path& model, const std::filesystem::path& out, EvalSplit split,
                     bool csv) {
  const auto l = load_model(config, data_dir, model);
  const Scorer scorer(l.ckpt.params, l.prop, l.stats, l.options, &l.plan);
  const auto b = evaluate_with(l, scorer, config.intervention, split, config.k).bias;
  if (csv) {
    std::ostringstream o;
    o << "group,recommended_share,ground_truth_share\n"
      << "popular," << format_double(b.popular_ratio_recommended) << ","
      << format_double(b.popular_ratio_ground_truth) << "\n"
      << "other," << format_double(1.0 - b.popular_ratio_recommended) << ","
      << format_double(1.0 - b.popular_ratio_ground_truth) << "\n";
    emit(out, o.str());
    return;
  }
  KeyValues kv;
  kv["split"] = split_name(split);
  kv["intervention"] = std::string(to_string(config.intervention.mode));
  kv["k"] = std::to_string(config.k);
  std::string items;
  for (auto i : b.popular_items) items += (items.empty() ? "" : ",") + l.data.item_ids[static_cast<std::size_t>(i)];
  kv["popular_items"] = items;
  kv["popular_ratio_recommended"] = format_double(b.popular_ratio_recommended);
  kv["popular_ratio_ground_truth"] = format_double(b.popular_ratio_ground_truth);
  kv["recommended_slots"] = std::to_string(b.recommended_slots);
  kv["truth_interactions"] = std::to_string(b.truth_interactions);
  emit(out, format_key_values(kv, "causalepp bias report"));
}

void cmd_sweep(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& model,
               const std::filesystem::path& out, const SweepGrid& grid, EvalSplit split) {
  auto l = load_model(config, data_dir, model);
  const auto& sp = l.data.split;
  std::string text = "delta_item,delta_user,alpha,recall,precision,ndcg,popular_ratio_recommended\n";
  for (int di : grid.delta_items) {
    for (int du : grid.delta_users) {
      if (di < 0 || du < 0) throw InvalidArgument("sweep deltas must be non-negative");
      ForecastConfig fc = forecast_config(config, sp.grid);
      fc.delta_item = di;
      fc.delta_user = du;
      const auto plan = build_intervention(l.stats.pop, l.stats.personal, fc);
      for (double alpha : grid.alphas) {
        if (!(alpha >= 0.0)) throw InvalidArgument("sweep alphas must be >= 0");
        ScoringOptions options = l.options;
        options.alpha = alpha;
        const Scorer scorer(l.ckpt.params, l.prop, l.stats, options, &plan);
        const auto e = evaluate_with(l, scorer, {InterventionMode::kIntervened, 0.0, 0.0}, split, config.k);
        text += std::to_string(di) + "," + std::to_string(du) + "," + format_double(alpha) + "," +
                format_double(e.metrics.recall) + "," + format_double(e.metrics.precision) + "," +
                format_double(e.metrics.ndcg) + "," + format_double(e.bias.popular_ratio_recommended) + "\n";
      }
    }
  }
  emit(out, text);
}

void cmd_plotdata(const RunConfig& config, const std::filesystem::path& data_dir,
                  const std::optional<std::filesystem::path>& model, const std::filesystem::path& out_dir) {
  std::optional<Loaded> loaded;
  PopularityStats stats;
  if (model) {
    loaded = load_model(config, data_dir, *model);
    stats = loaded->stats;
  } else {
    const auto data = read_prepared(data_dir);
    stats = compute_stats(data.split, {window_steps(config, data.split.grid), config.quantile});
  }
  const auto& pop = stats.pop;
  const int steps = pop.num_steps();
  write_text_file(out_dir / "timeline.csv",
                  step_csv("step,item_id,local_pop\n", pop.num_items, steps, pop.local));

  const int w2 = ma_window_for(pop.grid, config.ma_fraction);
  std::string ma = "item_id,step,local_pop,moving_average\n";
  for (ItemId i = 0; i < pop.num_items; ++i) {
    const auto series = pop.series(i);
    for (int t = 0; t < steps; ++t) {
      ma += std::to_string(i) + "," + std::to_string(t) + "," + format_double(series[static_cast<std::size_t>(t)]) +
            "," + format_double(moving_average(series, w2, t)) + "\n";
    }
  }
  write_text_file(out_dir / "moving_average.csv", ma);

  if (!loaded) {
    std::cerr << "no --model given; skipping quality.csv and bias.csv\n";
    return;
  }
  const auto& params = loaded->ckpt.params;
  std::string q = "item_id,global_count,avg_local_pop,quality\n";
  for (ItemId i = 0; i < pop.num_items; ++i) {
    const auto k = static_cast<std::size_t>(i);
    q += std::to_string(i) + "," + std::to_string(pop.global[k]) + "," + format_double(pop.avg_local[k]) + "," +
         format_double(params.quality[i]) + "\n";
  }
  write_text_file(out_dir / "quality.csv", q);

  std::string bias = "intervention,group,recommended_share,ground_truth_share\n";
  const Scorer scorer(params, loaded->prop, loaded->stats, loaded->options, &loaded->plan);
  for (auto mode : {InterventionMode::kNoIntervention, InterventionMode::kIntervened, InterventionMode::kEliminateP}) {
    if (loaded->options.mode != TrainMode::kCausalEPP && mode != InterventionMode::kNoIntervention) continue;
    const auto b = evaluate_with(*loaded, scorer, {mode, 0.0, 0.0}, EvalSplit::kTest, config.k).bias;
    const std::string name(to_string(mode));
    bias += name + ",popular," + format_double(b.popular_ratio_recommended) + "," +
            format_double(b.popular_ratio_ground_truth) + "\n";
    bias += name + ",other," + format_double(1.0 - b.popular_ratio_recommended) + "," +
            format_double(1.0 - b.popular_ratio_ground_truth) + "\n";
  }
  write_text_file(out_dir / "bias.csv", bias);
}

}  // namespace causalepp::cli
