#include "causalepp/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "causalepp/error.hpp"

namespace causalepp {

double moving_average(std::span<const double> series, int w2, int t) {
  if (series.empty()) throw InvalidArgument("moving average of an empty series");
  if (w2 < 1) throw InvalidArgument("moving-average window must be at least 1");
  if (t < 0 || static_cast<std::size_t>(t) >= series.size()) throw InvalidArgument("moving-average index out of range");
  const int first = std::max(0, t - w2 + 1);
  double sum = 0.0;
  for (int k = first; k <= t; ++k) sum += series[static_cast<std::size_t>(k)];
  return sum / static_cast<double>(t - first + 1);
}

double ma_slope(std::span<const double> series, int w2, int t, SlopeEstimator estimator) {
  if (t <= 0 || series.size() <= 1) return 0.0;
  if (estimator == SlopeEstimator::kBackwardDifference) {
    return moving_average(series, w2, t) - moving_average(series, w2, t - 1);
  }
  // Ordinary least squares over the points (k, MA_k), k in [t - w2 + 1, t].
  const int first = std::max(0, t - w2 + 1);
  const int n = t - first + 1;
  if (n < 2) return moving_average(series, w2, t) - moving_average(series, w2, t - 1);
  const double x_mean = 0.5 * static_cast<double>(first + t);
  double y_mean = 0.0;
  std::vector<double> ma(static_cast<std::size_t>(n));
  for (int k = first; k <= t; ++k) {
    ma[static_cast<std::size_t>(k - first)] = moving_average(series, w2, k);
    y_mean += ma[static_cast<std::size_t>(k - first)];
  }
  y_mean /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int k = first; k <= t; ++k) {
    const double dx = static_cast<double>(k) - x_mean;
    sxy += dx * (ma[static_cast<std::size_t>(k - first)] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

InterventionPlan build_intervention(const PopularityTable& pop, const PersonalPopularityTable& personal,
                                    const ForecastConfig& config) {
  if (config.ma_window < 1) throw InvalidArgument("ma_window must be at least 1");
  if (personal.num_steps != pop.num_steps()) throw InvalidArgument("popularity tables disagree on the grid");
  const int at = pop.grid.last_train_step;

  InterventionPlan plan;
  plan.ma_window = config.ma_window;
  plan.delta_item = config.delta_item;
  plan.delta_user = config.delta_user;
  plan.at_step = at;

  const auto items = static_cast<std::size_t>(pop.num_items);
  plan.p_last.resize(items);
  plan.p_slope.resize(items);
  plan.p_star.resize(items);
  for (ItemId i = 0; i < pop.num_items; ++i) {
    const auto series = pop.series(i);
    const auto k = static_cast<std::size_t>(i);
    plan.p_last[k] = series[static_cast<std::size_t>(at)];
    plan.p_slope[k] = ma_slope(series, config.ma_window, at, config.estimator);
    plan.p_star[k] = std::max(0.0, plan.p_last[k] + plan.p_slope[k] * config.delta_item);
  }

  const auto users = static_cast<std::size_t>(personal.num_users);
  plan.s_last.resize(users);
  plan.s_slope.resize(users);
  plan.s_star.resize(users);
  for (UserId u = 0; u < personal.num_users; ++u) {
    const auto series = personal.series(u);
    const auto k = static_cast<std::size_t>(u);
    plan.s_last[k] = series[static_cast<std::size_t>(at)];
    plan.s_slope[k] = ma_slope(series, config.ma_window, at, config.estimator);
    plan.s_star[k] = std::clamp(plan.s_last[k] + plan.s_slope[k] * config.delta_user, 0.0, 1.0);
  }
  return plan;
}

int ma_window_for(const TimeGrid& grid, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("moving-average fraction must lie in (0, 1]");
  return std::max(1, static_cast<int>(std::lround(fraction * grid.num_steps)));
}

}  // namespace causalepp
