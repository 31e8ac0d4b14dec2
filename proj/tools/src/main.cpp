#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>

#include "causalepp/error.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace cli = causalepp::cli;

namespace {

std::string dashed(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

// Registers --config and one option per configuration key on `sub`.
void add_config_options(CLI::App* sub, std::string& config_path, causalepp::KeyValues& overrides) {
  sub->add_option("--config", config_path, "key = value settings file (default: $" + std::string(cli::kConfigEnv) + ")");
  auto* group = sub->add_option_group("Settings", "override configuration keys");
  for (const auto& key : cli::config_keys()) {
    const std::string name = key.name;
    if (key.is_flag) {
      group->add_flag_callback("--" + dashed(name), [&overrides, name] { overrides[name] = "true"; }, key.help);
    } else {
      group->add_option_function<std::string>(
               "--" + dashed(name), [&overrides, name](const std::string& v) { overrides[name] = v; }, key.help)
          ->default_str(key.default_value);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Popularity-debiased recommendation with conformity-aware training and forecast intervention",
               "causalepp"};
  app.require_subcommand(1);

  std::string config_path;
  causalepp::KeyValues overrides;
  std::string input, out, data, model, report, users = "all", split_name;
  bool synth_flag = false;
  bool csv = false;
  std::vector<int> delta_items, delta_users;
  std::vector<double> alphas;

  auto* prepare = app.add_subcommand("prepare", "load a log (or generate one) and write the chronological split");
  prepare->add_option("--input", input, "interaction log: user_id, item_id, rating, timestamp");
  prepare->add_option("--out", out, "output directory")->required();
  prepare->add_flag("--synth", synth_flag, "generate a synthetic corpus instead of reading --input");

  auto* synth = app.add_subcommand("synth", "same as prepare --synth");
  synth->add_option("--out", out, "output directory")->required();

  auto* stats = app.add_subcommand("stats", "write popularity tables and the forecast plan as CSV");
  stats->add_option("--data", data, "prepared dataset directory")->required();
  stats->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model and write its checkpoint");
  train->add_option("--data", data, "prepared dataset directory")->required();
  train->add_option("--out", model, "checkpoint path")->required();
  train->add_option("--report", report, "training report path (default: <checkpoint>.report.txt)");

  auto* rec = app.add_subcommand("recommend", "write top-k recommendations as TSV");
  rec->add_option("--data", data, "prepared dataset directory")->required();
  rec->add_option("--model", model, "checkpoint path")->required();
  rec->add_option("--out", out, "output file (default: standard output)");
  rec->add_option("--users", users, "all, validation or test (users with held-out interactions)")
      ->check(CLI::IsMember({"all", "validation", "test"}));

  std::map<CLI::App*, std::string> default_split{};
  const auto add_eval = [&](const char* name, const char* help, const char* split_default) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--data", data, "prepared dataset directory")->required();
    sub->add_option("--model", model, "checkpoint path")->required();
    sub->add_option("--out", out, "output file (default: standard output)");
    sub->add_option("--split", split_name, "validation or test")
        ->check(CLI::IsMember({"validation", "test"}))
        ->default_str(split_default);
    default_split[sub] = split_default;
    return sub;
  };
  auto* evaluate = add_eval("evaluate", "Recall/Precision/NDCG@k and popularity shares", "test");
  evaluate->add_flag("--csv", csv, "flat CSV instead of key = value text");
  auto* bias = add_eval("bias-report", "share of recommendations on the top-20% items", "test");
  bias->add_flag("--csv", csv, "flat CSV instead of key = value text");
  auto* sweep = add_eval("sweep", "grid over forecast horizons and alpha with intervened scoring", "validation");
  sweep->add_option("--delta-items", delta_items, "item forecast horizons, comma separated")->delimiter(',');
  sweep->add_option("--delta-users", delta_users, "user forecast horizons, comma separated")->delimiter(',');
  sweep->add_option("--alphas", alphas, "consistency sharpness values, comma separated")->delimiter(',');

  auto* plot = app.add_subcommand("plotdata", "CSV inputs for timeline, moving-average, quality and bias plots");
  plot->add_option("--data", data, "prepared dataset directory")->required();
  plot->add_option("--model", model, "checkpoint path (enables quality.csv and bias.csv)");
  plot->add_option("--out", out, "output directory")->required();

  for (auto* sub : app.get_subcommands({})) add_config_options(sub, config_path, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv(cli::kConfigEnv); env != nullptr) config_path = env;
    }
    const causalepp::KeyValues file_values =
        config_path.empty() ? causalepp::KeyValues{} : causalepp::read_key_values(config_path);
    const auto settings = cli::merged_values(file_values, overrides);
    const auto config = cli::resolve_config(file_values, overrides);

    auto* sub = app.get_subcommands().front();
    const auto split_for = [&] {
      return cli::parse_eval_split(split_name.empty() ? default_split.at(sub) : split_name);
    };
    if (sub == prepare || sub == synth) {
      cli::cmd_prepare(config, settings, input, out, synth_flag || sub == synth);
    } else if (sub == stats) {
      cli::cmd_stats(config, data, out);
    } else if (sub == train) {
      cli::cmd_train(config, settings, data, model, report.empty() ? model + ".report.txt" : report);
    } else if (sub == rec) {
      std::optional<cli::EvalSplit> from;
      if (users != "all") from = cli::parse_eval_split(users);
      cli::cmd_recommend(config, data, model, out, from);
    } else if (sub == evaluate) {
      cli::cmd_evaluate(config, data, model, out, split_for(), csv);
    } else if (sub == bias) {
      cli::cmd_bias_report(config, data, model, out, split_for(), csv);
    } else if (sub == sweep) {
      cli::SweepGrid grid;
      grid.delta_items = delta_items.empty() ? std::vector<int>{config.delta_item} : delta_items;
      grid.delta_users = delta_users.empty() ? std::vector<int>{config.delta_user} : delta_users;
      grid.alphas = alphas.empty() ? std::vector<double>{config.train.alpha} : alphas;
      cli::cmd_sweep(config, data, model, out, grid, split_for());
    } else if (sub == plot) {
      std::optional<std::filesystem::path> m;
      if (!model.empty()) m = model;
      cli::cmd_plotdata(config, data, m, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "causalepp: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
