#pragma once

#include <span>
#include <vector>

#include "causalepp/popstats.hpp"

namespace causalepp {

enum class SlopeEstimator {
  kBackwardDifference,  // MA_t - MA_{t-1}
  kRegression,          // least-squares slope through the last w2 MA points
};

// Mean of the last min(w2, t + 1) values ending at index t.
double moving_average(std::span<const double> series, int w2, int t);

// Gradient of the moving-average line at t. 0 at t = 0.
double ma_slope(std::span<const double> series, int w2, int t,
                SlopeEstimator estimator = SlopeEstimator::kBackwardDifference);

// Forecast values substituted for p_i and s_u at inference.
struct InterventionPlan {
  int ma_window = 1;
  int delta_item = 0;
  int delta_user = 0;
  int at_step = 0;
  std::vector<double> p_last;   // p_i^T
  std::vector<double> p_slope;
  std::vector<double> p_star;   // >= 0
  std::vector<double> s_last;   // s_u^T
  std::vector<double> s_slope;
  std::vector<double> s_star;   // in [0, 1]
};

struct ForecastConfig {
  int ma_window = 10;
  int delta_item = 5;
  int delta_user = 10;
  SlopeEstimator estimator = SlopeEstimator::kBackwardDifference;
};

// p* = p^T + slope * delta_item (clamped >= 0), s* = s^T + slope * delta_user
// (clamped to [0, 1]), with T the grid's last training step.
InterventionPlan build_intervention(const PopularityTable& pop, const PersonalPopularityTable& personal,
                                    const ForecastConfig& config);

// w2 given as a fraction of the grid length, rounded, at least 1 step.
int ma_window_for(const TimeGrid& grid, double fraction);

}  // namespace causalepp
