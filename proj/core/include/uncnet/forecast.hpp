#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "uncnet/network.hpp"

namespace uncnet {

enum class Frequency { monthly, quarterly };
enum class Transform { level, diff, log_diff, growth };

Transform parse_transform(const std::string& name);

/// Regular-frequency series keyed by month or quarter index.
struct MacroSeries {
  std::string id;
  Frequency frequency = Frequency::monthly;
  std::vector<std::pair<std::int32_t, double>> observations;  // strictly increasing
  Transform transform = Transform::level;

  void validate() const;
};

/// Returns the transformed series (diff / log_diff / growth drop the first
/// observation; missing interior periods break the chain there).
MacroSeries apply_transform(const MacroSeries& s);

/// Calendar-period mean of the daily median total-connectedness series.
MacroSeries aggregate_connectedness(const ConnectednessSeries& series,
                                    Frequency freq, std::string id);
MacroSeries monthly_aggregate(const ConnectednessSeries& series,
                              std::string id = "C");

/// Censors at tau: expansion keeps movement above the threshold, recession
/// below; expansion + recession - tau reproduces the input exactly.
std::pair<MacroSeries, MacroSeries> threshold_decompose(const MacroSeries& y, double tau);

struct RegressionTerm {
  std::string name;
  double coef = 0;
  double se = 0;       // classical, or HAC when requested
  double t_stat = 0;
  double p_value = 0;  // two-sided, Student t
};

struct RegressionResult {
  int horizon = 0;
  std::vector<RegressionTerm> terms;  // intercept first
  double r2 = 0;
  double adj_r2 = 0;
  int n_obs = 0;
  bool hac = false;
};

struct RegressionOptions {
  bool hac = false;  // Bartlett-kernel HAC with lag = horizon
};

/// OLS of y_{t+h} on an intercept plus the predictors at t. Predictors and
/// target must share a frequency; rows require every predictor present.
RegressionResult predictive_regression(const MacroSeries& y,
                                       const std::vector<MacroSeries>& predictors,
                                       int horizon, const RegressionOptions& opts = {});

std::vector<RegressionResult> horizon_suite(const MacroSeries& y,
                                            const std::vector<MacroSeries>& predictors,
                                            const std::vector<int>& horizons = {1, 3, 6, 9, 12},
                                            const RegressionOptions& opts = {});

/// g_t = log(gdp_{t+1}/gdp_t); one observation shorter than the input.
MacroSeries gdp_growth(const MacroSeries& gdp);

/// Rolling sample standard deviation of growth over `window` quarters,
/// annualized (x2 for quarterly data), indexed at the window end.
MacroSeries gdp_volatility(const MacroSeries& growth, int window = 4);

/// Significance stars at the 10/5/1 percent levels.
std::string significance_stars(double p_value);

// Long-format macro csv: id, period (YYYY-MM or YYYY-Qn), value.
std::map<std::string, MacroSeries> read_macro_csv(const std::filesystem::path& path);

std::string write_regression_csv(const std::string& target,
                                 const std::vector<RegressionResult>& results);
std::string write_regression_json(const std::string& target,
                                  const std::vector<RegressionResult>& results);

}  // namespace uncnet
