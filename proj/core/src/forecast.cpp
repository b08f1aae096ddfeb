#include "uncnet/forecast.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"

namespace uncnet {
namespace {

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
/// good to ~1e-14. Used for the Student-t tail.
double incomplete_beta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const bool swap = x > (a + 1) / (a + b + 2);
  if (swap) return 1.0 - incomplete_beta(b, a, 1.0 - x);

  const double tiny = 1e-300;
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    f *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(ln_front) * f / a;
}

double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return incomplete_beta(0.5 * dof, 0.5, x);
}

std::int32_t period_of(Date d, Frequency f) {
  return f == Frequency::monthly ? d.month_index() : d.quarter_index();
}

}  // namespace

Transform parse_transform(const std::string& name) {
  if (name == "level") return Transform::level;
  if (name == "diff") return Transform::diff;
  if (name == "log_diff") return Transform::log_diff;
  if (name == "growth") return Transform::growth;
  throw ConfigError("unknown transform '" + name + "'");
}

void MacroSeries::validate() const {
  for (std::size_t i = 1; i < observations.size(); ++i)
    if (observations[i].first <= observations[i - 1].first)
      throw InputError("series '" + id + "' has non-increasing periods");
}

MacroSeries apply_transform(const MacroSeries& s) {
  s.validate();
  if (s.transform == Transform::level) return s;
  MacroSeries out;
  out.id = s.id;
  out.frequency = s.frequency;
  out.transform = Transform::level;
  for (std::size_t i = 1; i < s.observations.size(); ++i) {
    const auto& [p0, v0] = s.observations[i - 1];
    const auto& [p1, v1] = s.observations[i];
    if (p1 != p0 + 1) continue;  // gap: no change is defined here
    double v = 0;
    switch (s.transform) {
      case Transform::diff: v = v1 - v0; break;
      case Transform::log_diff:
        if (!(v0 > 0) || !(v1 > 0))
          throw NonPositiveLevel("log_diff of '" + s.id + "' needs positive levels");
        v = std::log(v1 / v0);
        break;
      case Transform::growth:
        if (v0 == 0) throw NonPositiveLevel("growth of '" + s.id + "' divides by zero");
        v = (v1 - v0) / v0;
        break;
      case Transform::level: break;
    }
    out.observations.emplace_back(p1, v);
  }
  return out;
}

MacroSeries aggregate_connectedness(const ConnectednessSeries& series,
                                    Frequency freq, std::string id) {
  if (series.points.empty()) throw EmptyInput("connectedness series is empty");
  std::map<std::int32_t, std::pair<double, int>> bins;
  for (const auto& pt : series.points) {
    auto& [sum, count] = bins[period_of(pt.date, freq)];
    sum += pt.total.median;
    ++count;
  }
  MacroSeries out;
  out.id = std::move(id);
  out.frequency = freq;
  for (const auto& [period, bin] : bins)
    out.observations.emplace_back(period, bin.first / bin.second);
  return out;
}

MacroSeries monthly_aggregate(const ConnectednessSeries& series, std::string id) {
  return aggregate_connectedness(series, Frequency::monthly, std::move(id));
}

std::pair<MacroSeries, MacroSeries> threshold_decompose(const MacroSeries& y, double tau) {
  MacroSeries expansion = y, recession = y;
  expansion.id = y.id + "_expansion";
  recession.id = y.id + "_recession";
  for (std::size_t i = 0; i < y.observations.size(); ++i) {
    expansion.observations[i].second = std::max(y.observations[i].second, tau);
    recession.observations[i].second = std::min(y.observations[i].second, tau);
  }
  return {std::move(expansion), std::move(recession)};
}

RegressionResult predictive_regression(const MacroSeries& y,
                                       const std::vector<MacroSeries>& predictors,
                                       int horizon, const RegressionOptions& opts) {
  if (predictors.empty()) throw InputError("no predictors given");
  if (horizon < 0) throw InputError("horizon must be nonnegative");
  for (const auto& p : predictors) {
    p.validate();
    if (p.frequency != y.frequency)
      throw InputError("predictor '" + p.id + "' frequency differs from the target");
  }
  y.validate();

  std::map<std::int32_t, double> target;
  for (const auto& [period, value] : y.observations) target[period] = value;

  // Rows: periods where every predictor exists and the target exists at t+h.
  std::vector<std::map<std::int32_t, double>> pred_maps;
  for (const auto& p : predictors) {
    std::map<std::int32_t, double> m;
    for (const auto& [period, value] : p.observations) m[period] = value;
    pred_maps.push_back(std::move(m));
  }
  std::vector<std::int32_t> rows;
  for (const auto& [period, value] : pred_maps.front()) {
    bool all = true;
    for (const auto& m : pred_maps)
      if (!m.count(period)) { all = false; break; }
    if (all && target.count(period + horizon)) rows.push_back(period);
  }

  const int k = static_cast<int>(predictors.size());
  const int n = static_cast<int>(rows.size());
  if (n < k + 2)
    throw InsufficientSample("horizon " + std::to_string(horizon) + " leaves " +
                             std::to_string(n) + " rows for " + std::to_string(k) +
                             " predictors");

  Eigen::MatrixXd x(n, k + 1);
  Eigen::VectorXd yy(n);
  for (int r = 0; r < n; ++r) {
    x(r, 0) = 1.0;
    for (int c = 0; c < k; ++c) x(r, c + 1) = pred_maps[c].at(rows[r]);
    yy[r] = target.at(rows[r] + horizon);
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond = svd.singularValues()(0) /
                      svd.singularValues()(svd.singularValues().size() - 1);
  if (!(cond < 1e10))
    throw CollinearDesign("design condition number " + csv::format_double(cond));

  const Eigen::MatrixXd xtx_inv =
      (x.transpose() * x).llt().solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
  const Eigen::VectorXd beta = xtx_inv * (x.transpose() * yy);
  const Eigen::VectorXd resid = yy - x * beta;
  const double rss = resid.squaredNorm();
  const double mean_y = yy.mean();
  const double tss = (yy.array() - mean_y).matrix().squaredNorm();
  const int dof = n - k - 1;

  Eigen::VectorXd se(k + 1);
  if (opts.hac) {
    // Newey-West with Bartlett weights, lag order = horizon.
    const int lag = horizon;
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int t = 0; t < n; ++t)
      meat += resid[t] * resid[t] * x.row(t).transpose() * x.row(t);
    for (int l = 1; l <= lag; ++l) {
      const double w = 1.0 - static_cast<double>(l) / (lag + 1);
      for (int t = l; t < n; ++t) {
        const Eigen::MatrixXd cross =
            resid[t] * resid[t - l] * x.row(t).transpose() * x.row(t - l);
        meat += w * (cross + cross.transpose());
      }
    }
    const Eigen::MatrixXd cov = xtx_inv * meat * xtx_inv;
    se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    const double s2 = dof > 0 ? rss / dof : 0.0;
    se = (s2 * xtx_inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
  }

  RegressionResult out;
  out.horizon = horizon;
  out.n_obs = n;
  out.hac = opts.hac;
  out.r2 = tss > 0 ? 1.0 - rss / tss : 1.0;
  out.adj_r2 = dof > 0 ? 1.0 - (1.0 - out.r2) * (n - 1) / static_cast<double>(dof) : out.r2;
  for (int c = 0; c <= k; ++c) {
    RegressionTerm term;
    term.name = c == 0 ? "intercept" : predictors[c - 1].id;
    term.coef = beta[c];
    term.se = se[c];
    term.t_stat = se[c] > 0 ? beta[c] / se[c] : (beta[c] == 0 ? 0.0
                              : std::numeric_limits<double>::infinity());
    term.p_value = se[c] > 0 ? student_t_two_sided_p(term.t_stat, dof)
                             : (beta[c] == 0 ? 1.0 : 0.0);
    out.terms.push_back(std::move(term));
  }
  return out;
}

std::vector<RegressionResult> horizon_suite(const MacroSeries& y,
                                            const std::vector<MacroSeries>& predictors,
                                            const std::vector<int>& horizons,
                                            const RegressionOptions& opts) {
  std::vector<RegressionResult> out;
  out.reserve(horizons.size());
  for (int h : horizons) out.push_back(predictive_regression(y, predictors, h, opts));
  return out;
}

MacroSeries gdp_growth(const MacroSeries& gdp) {
  gdp.validate();
  MacroSeries out;
  out.id = gdp.id + "_growth";
  out.frequency = gdp.frequency;
  for (std::size_t i = 0; i + 1 < gdp.observations.size(); ++i) {
    const auto& [p0, v0] = gdp.observations[i];
    const auto& [p1, v1] = gdp.observations[i + 1];
    if (p1 != p0 + 1) continue;
    if (!(v0 > 0) || !(v1 > 0))
      throw NonPositiveLevel("gdp levels must be positive");
    out.observations.emplace_back(p0, std::log(v1 / v0));
  }
  return out;
}

MacroSeries gdp_volatility(const MacroSeries& growth, int window) {
  growth.validate();
  if (window < 2) throw InputError("volatility window must be at least 2");
  const auto& obs = growth.observations;
  if (static_cast<int>(obs.size()) < window)
    throw InsufficientSample("need " + std::to_string(window) + " growth observations, have " +
                             std::to_string(obs.size()));
  MacroSeries out;
  out.id = growth.id + "_vol";
  out.frequency = growth.frequency;
  for (std::size_t end = window - 1; end < obs.size(); ++end) {
    // Window must be contiguous in periods.
    bool contiguous = true;
    for (std::size_t i = end - window + 2; i <= end; ++i)
      contiguous = contiguous && obs[i].first == obs[i - 1].first + 1;
    if (!contiguous) continue;
    double mean = 0;
    for (std::size_t i = end - window + 1; i <= end; ++i) mean += obs[i].second;
    mean /= window;
    double ss = 0;
    for (std::size_t i = end - window + 1; i <= end; ++i)
      ss += (obs[i].second - mean) * (obs[i].second - mean);
    const double sd = std::sqrt(ss / (window - 1));
    out.observations.emplace_back(obs[end].first, 2.0 * sd);
  }
  return out;
}

std::string significance_stars(double p_value) {
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.10) return "*";
  return "";
}

std::map<std::string, MacroSeries> read_macro_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_id = table.column("id");
  const std::size_t c_period = table.column("period");
  const std::size_t c_value = table.column("value");

  std::map<std::string, MacroSeries> out;
  for (const auto& row : table.rows) {
    const std::string& id = row.fields.at(c_id);
    const std::string& period = row.fields.at(c_period);
    const double value = csv::parse_double(row.fields.at(c_value));
    const bool quarterly = period.size() == 7 && period[5] == 'Q';
    const std::int32_t idx =
        quarterly ? parse_quarter_index(period) : parse_month_index(period);
    auto [it, fresh] = out.try_emplace(id);
    MacroSeries& s = it->second;
    if (fresh) {
      s.id = id;
      s.frequency = quarterly ? Frequency::quarterly : Frequency::monthly;
    } else if ((s.frequency == Frequency::quarterly) != quarterly) {
      throw InputError("series '" + id + "' mixes monthly and quarterly periods (line " +
                       std::to_string(row.line) + ")");
    }
    s.observations.emplace_back(idx, value);
  }
  for (auto& [id, s] : out) {
    std::sort(s.observations.begin(), s.observations.end());
    for (std::size_t i = 1; i < s.observations.size(); ++i)
      if (s.observations[i].first == s.observations[i - 1].first)
        throw InputError("series '" + id + "' has duplicate periods");
  }
  return out;
}

std::string write_regression_csv(const std::string& target,
                                 const std::vector<RegressionResult>& results) {
  std::vector<std::string> header{"stat"};
  for (const auto& r : results) header.push_back("h=" + std::to_string(r.horizon));
  csv::Writer w(std::move(header));
  if (results.empty()) return w.str();

  const std::size_t n_terms = results.front().terms.size();
  for (std::size_t t = 0; t < n_terms; ++t) {
    std::vector<std::string> coef_row{results.front().terms[t].name};
    std::vector<std::string> se_row{results.front().terms[t].name + "_se"};
    for (const auto& r : results) {
      const auto& term = r.terms.at(t);
      coef_row.push_back(csv::format_double(term.coef) + significance_stars(term.p_value));
      se_row.push_back("(" + csv::format_double(term.se) + ")");
    }
    w.add_row(std::move(coef_row));
    w.add_row(std::move(se_row));
  }
  std::vector<std::string> r2_row{"adj_r2"}, n_row{"obs"};
  for (const auto& r : results) {
    r2_row.push_back(csv::format_double(r.adj_r2));
    n_row.push_back(std::to_string(r.n_obs));
  }
  w.add_row(std::move(r2_row));
  w.add_row(std::move(n_row));
  (void)target;
  return w.str();
}

std::string write_regression_json(const std::string& target,
                                  const std::vector<RegressionResult>& results) {
  nlohmann::json j;
  j["target"] = target;
  j["horizons"] = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json h;
    h["h"] = r.horizon;
    h["n"] = r.n_obs;
    h["r2"] = r.r2;
    h["adj_r2"] = r.adj_r2;
    h["hac"] = r.hac;
    h["terms"] = nlohmann::json::array();
    for (const auto& term : r.terms)
      h["terms"].push_back({{"name", term.name},
                            {"coef", term.coef},
                            {"se", term.se},
                            {"t", term.t_stat},
                            {"p", term.p_value}});
    j["horizons"].push_back(std::move(h));
  }
  return j.dump(2) + "\n";
}

}  // namespace uncnet
