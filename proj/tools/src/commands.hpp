#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace causalepp::cli {

// Which held-out part a command ranks against.
enum class EvalSplit { kValidation, kTest };
EvalSplit parse_eval_split(const std::string& name);

// `out` empty means standard output throughout.
struct SweepGrid {
  std::vector<int> delta_items;
  std::vector<int> delta_users;
  std::vector<double> alphas;
};

void cmd_prepare(const RunConfig& config, const KeyValues& settings, const std::filesystem::path& input,
                 const std::filesystem::path& out_dir, bool synthetic);
void cmd_stats(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& out_dir);
void cmd_train(const RunConfig& config, const KeyValues& settings, const std::filesystem::path& data_dir,
               const std::filesystem::path& model, const std::filesystem::path& report);
void cmd_recommend(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& model,
                   const std::filesystem::path& out, std::optional<EvalSplit> users_from);
void cmd_evaluate(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& model,
                  const std::filesystem::path& out, EvalSplit split, bool csv);
void cmd_bias_report(const RunConfig& config, const std::filesystem::path& data_dir,
                     const std::filesystem::path& model, const std::filesystem::path& out, EvalSplit split,
                     bool csv);
void cmd_sweep(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& model,
               const std::filesystem::path& out, const SweepGrid& grid, EvalSplit split);
void cmd_plotdata(const RunConfig& config, const std::filesystem::path& data_dir,
                  const std::optional<std::filesystem::path>& model, const std::filesystem::path& out_dir);

}  // namespace causalepp::cli
