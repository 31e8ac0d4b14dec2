#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "causalepp/error.hpp"

namespace causalepp::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"seed", "0", "random seed for sampling, initialisation and the generator"},
      {"k_core", "5", "drop users/items with fewer interactions, repeatedly (0 disables)"},
      {"num_parts", "10", "chronological parts; the last one is halved into validation and test"},
      {"num_steps", "100", "time steps covering the training range"},
      {"window_months", "6", "local popularity window in months"},
      {"window_steps", "0", "local popularity window in steps; overrides window_months when > 0"},
      {"quantile", "0.2", "share of nonzero-popularity items counted as popular at each step"},
      {"ma_fraction", "0.1", "moving-average window as a fraction of num_steps"},
      {"delta_item", "5", "steps ahead for the item popularity forecast"},
      {"delta_user", "10", "steps ahead for the personal popularity forecast"},
      {"slope", "backward", "slope estimator: backward or regression"},
      {"alpha", "0.5", "consistency sharpness"},
      {"lambda", "0.2", "quality loss weight"},
      {"dim", "64", "embedding size"},
      {"lr", "0.001", "Adam learning rate"},
      {"epochs", "100", "maximum training epochs"},
      {"batch_size", "8192", "positives per batch"},
      {"negatives", "1", "negatives sampled per positive"},
      {"mode", "causalepp", "training objective: causalepp, plain or ips"},
      {"no_quality", "false", "freeze item quality at zero and drop its loss", true},
      {"no_consistency", "false", "pin the consistency factor to 1", true},
      {"ips_cap", "10", "upper bound on inverse propensity weights"},
      {"backbone", "mf", "matching backbone: mf or lightgcn"},
      {"num_layers", "2", "LightGCN propagation depth"},
      {"patience", "10", "validation rounds without improvement before stopping"},
      {"eval_every", "1", "epochs between validation rounds"},
      {"k", "20", "ranking cutoff"},
      {"intervention", "intervened", "inference substitution: none, intervened, eliminate-p or grid"},
      {"grid_p", "0", "popularity used by the grid intervention"},
      {"grid_s", "0", "personal popularity used by the grid intervention"},
      {"synth_users", "200", "synthetic users"},
      {"synth_items", "300", "synthetic items"},
      {"synth_steps", "100", "synthetic time steps"},
      {"synth_per_step", "200", "synthetic interactions per step"},
      {"synth_exponent", "1.5", "long-tail exponent of true item quality"},
      {"synth_latent_dim", "8", "latent taste dimensions"},
      {"synth_conformity", "0.6", "mean conformity weight"},
      {"synth_conformity_spread", "0", "per-user spread of the conformity weight"},
      {"synth_conformity_drift", "0", "linear drift of the conformity weight over time"},
      {"synth_popularity_window", "5", "steps the simulator uses for its own local popularity"},
      {"synth_trend_items", "0", "items given a late popularity ramp"},
      {"synth_trend_steps", "20", "length of the ramp in steps"},
      {"synth_trend_gain", "0", "appeal multiplier reached at the end of the ramp, minus 1"},
      {"synth_step_seconds", "86400", "seconds per synthetic step"},
  };
  return keys;
}

namespace {

class Reader {
 public:
  explicit Reader(const KeyValues& values) : values_(values) {}

  const std::string& raw(const std::string& key) const { return values_.at(key); }

  std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi) const {
    const auto& s = raw(key);
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) fail(key, "expected an integer");
    if (v < lo || v > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  int int32(const std::string& key, int lo, int hi = std::numeric_limits<int>::max()) const {
    return static_cast<int>(integer(key, lo, hi));
  }

  double real(const std::string& key) const {
    const auto& s = raw(key);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) fail(key, "expected a finite number");
    return v;
  }

  bool boolean(const std::string& key) const {
    const auto& s = raw(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(key, "expected true or false");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw InvalidArgument("config key '" + key + "' = '" + raw(key) + "': " + why);
  }

 private:
  const KeyValues& values_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace

KeyValues merged_values(const KeyValues& file_values, const KeyValues& overrides) {
  KeyValues merged;
  for (const auto& key : config_keys()) merged[key.name] = key.default_value;
  for (const auto* layer : {&file_values, &overrides}) {
    for (const auto& [k, v] : *layer) {
      if (!merged.contains(k)) throw InvalidArgument("unknown config key '" + k + "'");
      merged[k] = v;
    }
  }
  return merged;
}

RunConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides) {
  const KeyValues merged = merged_values(file_values, overrides);
  const Reader r(merged);
  RunConfig c;

  c.train.seed = static_cast<std::uint64_t>(r.integer("seed", 0, std::numeric_limits<std::int64_t>::max()));
  c.k_core = r.int32("k_core", 0);
  c.num_parts = r.int32("num_parts", 2);
  c.num_steps = r.int32("num_steps", 1);

  c.window_months = r.real("window_months");
  require(c.window_months > 0.0, "config key 'window_months' must be > 0");
  c.window_steps = r.int32("window_steps", 0);
  c.quantile = r.real("quantile");
  require(c.quantile > 0.0 && c.quantile < 1.0, "config key 'quantile' must lie in (0, 1)");

  c.ma_fraction = r.real("ma_fraction");
  require(c.ma_fraction > 0.0 && c.ma_fraction <= 1.0, "config key 'ma_fraction' must lie in (0, 1]");
  c.delta_item = r.int32("delta_item", 0);
  c.delta_user = r.int32("delta_user", 0);
  const auto& slope = r.raw("slope");
  if (slope == "backward") {
    c.slope = SlopeEstimator::kBackwardDifference;
  } else if (slope == "regression") {
    c.slope = SlopeEstimator::kRegression;
  } else {
    r.fail("slope", "expected backward or regression");
  }

  auto& t = c.train;
  t.alpha = r.real("alpha");
  t.lambda = r.real("lambda");
  t.dim = r.int32("dim", 1);
  t.lr = r.real("lr");
  t.epochs = r.int32("epochs", 0);
  t.batch_size = r.int32("batch_size", 1);
  t.negatives_per_positive = r.int32("negatives", 1);
  t.mode = parse_train_mode(r.raw("mode"));
  t.ablation.no_quality = r.boolean("no_quality");
  t.ablation.no_consistency = r.boolean("no_consistency");
  t.ips_cap = r.real("ips_cap");
  t.backbone = parse_backbone(r.raw("backbone"));
  t.num_layers = r.int32("num_layers", 0);
  t.patience = r.int32("patience", 1);
  t.eval_every = r.int32("eval_every", 1);

  c.k = r.int32("k", 1);
  t.eval_k = c.k;
  c.intervention.mode = parse_intervention(r.raw("intervention"));
  c.intervention.grid_p = r.real("grid_p");
  c.intervention.grid_s = r.real("grid_s");
  require(c.intervention.grid_p >= 0.0, "config key 'grid_p' must be >= 0");
  require(c.intervention.grid_s >= 0.0 && c.intervention.grid_s <= 1.0, "config key 'grid_s' must lie in [0, 1]");
  t.validate();

  auto& s = c.synth;
  s.num_users = r.int32("synth_users", 1);
  s.num_items = r.int32("synth_items", 2);
  s.num_steps = r.int32("synth_steps", 1);
  s.interactions_per_step = r.int32("synth_per_step", 1);
  s.long_tail_exponent = r.real("synth_exponent");
  s.latent_dim = r.int32("synth_latent_dim", 1);
  s.conformity_weight = r.real("synth_conformity");
  s.conformity_spread = r.real("synth_conformity_spread");
  s.conformity_drift = r.real("synth_conformity_drift");
  s.popularity_window = r.int32("synth_popularity_window", 1);
  s.trend_items = r.int32("synth_trend_items", 0);
  s.trend_steps = r.int32("synth_trend_steps", 1);
  s.trend_gain = r.real("synth_trend_gain");
  s.step_seconds = r.integer("synth_step_seconds", 1, std::numeric_limits<std::int32_t>::max());
  s.num_parts = c.num_parts;
  s.grid_steps = c.num_steps;
  require(s.conformity_weight >= 0.0 && s.conformity_weight <= 1.0,
          "config key 'synth_conformity' must lie in [0, 1]");
  return c;
}

}  // namespace causalepp::cli
