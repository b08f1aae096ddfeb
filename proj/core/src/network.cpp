#include "uncnet/network.hpp"

#include <algorithm>
#include <cmath>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"

namespace uncnet {

VmaCoeffs vma_from_lags(const std::vector<Eigen::MatrixXd>& lag_matrices, int horizon) {
  if (horizon < 1) throw InputError("vma horizon must be at least 1");
  if (lag_matrices.empty()) throw InputError("no lag matrices");
  const Eigen::Index n = lag_matrices.front().rows();
  const int p = static_cast<int>(lag_matrices.size());
  VmaCoeffs out;
  out.psi.reserve(horizon + 1);
  out.psi.push_back(Eigen::MatrixXd::Identity(n, n));
  for (int h = 1; h <= horizon; ++h) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (int l = 1; l <= std::min(h, p); ++l) acc += lag_matrices[l - 1] * out.psi[h - l];
    out.psi.push_back(std::move(acc));
  }
  return out;
}

VmaCoeffs vma_coefficients(const PosteriorDraw& draw, int horizon) {
  std::vector<Eigen::MatrixXd> lags;
  lags.reserve(draw.n_lags());
  for (int l = 1; l <= draw.n_lags(); ++l) lags.push_back(draw.lag_matrix(l));
  return vma_from_lags(lags, horizon);
}

Gfevd gfevd(const VmaCoeffs& vma, const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = sigma.rows();
  if (sigma.cols() != n || vma.psi.front().rows() != n)
    throw InputError("sigma and vma dimensions disagree");
  Eigen::MatrixXd numer = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd denom = Eigen::VectorXd::Zero(n);
  for (const auto& psi : vma.psi) {
    const Eigen::MatrixXd ps = psi * sigma;
    numer += ps.cwiseProduct(ps);
    denom += (ps * psi.transpose()).diagonal();
  }
  Gfevd out;
  out.horizon = vma.horizon();
  out.theta.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(denom[j] > 0))
      throw ZeroDenominator("forecast-error variance of variable " + std::to_string(j) +
                            " is not positive");
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!(sigma(k, k) > 0))
        throw ZeroDenominator("sigma has a nonpositive diagonal");
      out.theta(j, k) = numer(j, k) / (sigma(k, k) * denom[j]);
    }
  }
  return out;
}

AdjacencyMatrix row_normalize(const Gfevd& g, std::vector<std::string> labels) {
  AdjacencyMatrix adj;
  adj.horizon = g.horizon;
  adj.theta_tilde = g.theta;
  for (Eigen::Index j = 0; j < g.theta.rows(); ++j) {
    const double row_sum = g.theta.row(j).sum();
    if (!(row_sum > 0)) throw ZeroRow("row " + std::to_string(j) + " sums to zero");
    adj.theta_tilde.row(j) /= row_sum;
  }
  adj.labels = std::move(labels);
  return adj;
}

double total_connectedness(const AdjacencyMatrix& adj) {
  const Eigen::Index n = adj.size();
  double off = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    off += adj.theta_tilde.row(j).sum() - adj.theta_tilde(j, j);
  return 100.0 * off / static_cast<double>(n);
}

ConnectednessStats directional(const AdjacencyMatrix& adj) {
  const Eigen::Index n = adj.size();
  ConnectednessStats s;
  s.to.resize(n);
  s.from.resize(n);
  s.net.resize(n);
  s.agg.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    s.from[j] = 100.0 * (adj.theta_tilde.row(j).sum() - adj.theta_tilde(j, j)) /
                static_cast<double>(n);
    s.to[j] = 100.0 * (adj.theta_tilde.col(j).sum() - adj.theta_tilde(j, j)) /
              static_cast<double>(n);
    s.net[j] = s.to[j] - s.from[j];
    s.agg[j] = s.to[j] + s.from[j];
  }
  s.total = s.from.sum();
  return s;
}

BandSummary summarize(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("no values to summarize");
  BandSummary out;
  const std::size_t n = values.size();
  out.mean = 0;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(n);
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    if (n == 1) return values[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  out.median = quantile(0.5);
  out.p2_5 = quantile(0.025);
  out.p97_5 = quantile(0.975);
  return out;
}

ConnectednessPoint summarize_draws(Date date, const PosteriorDrawSet& set, int horizon) {
  if (set.draws.empty()) throw EmptyInput("draw set is empty");
  const int n = set.draws.front().n_vars();
  std::size_t stable = 0;
  for (const auto& d : set.draws) stable += d.stable ? 1 : 0;
  const bool keep_all = 2 * stable < set.draws.size();

  std::vector<double> totals;
  std::vector<std::vector<double>> to(n), from(n), net(n), agg(n);
  for (const auto& draw : set.draws) {
    if (!keep_all && !draw.stable) continue;
    const ConnectednessStats s =
        directional(row_normalize(gfevd(vma_coefficients(draw, horizon), draw.sigma)));
    totals.push_back(s.total);
    for (int j = 0; j < n; ++j) {
      to[j].push_back(s.to[j]);
      from[j].push_back(s.from[j]);
      net[j].push_back(s.net[j]);
      agg[j].push_back(s.agg[j]);
    }
  }

  ConnectednessPoint pt;
  pt.date = date;
  pt.draws_total = static_cast<int>(set.draws.size());
  pt.draws_used = static_cast<int>(totals.size());
  pt.unstable_warning = keep_all;
  pt.total = summarize(std::move(totals));
  for (int j = 0; j < n; ++j) {
    pt.to.push_back(summarize(std::move(to[j])));
    pt.from.push_back(summarize(std::move(from[j])));
    pt.net.push_back(summarize(std::move(net[j])));
    pt.agg.push_back(summarize(std::move(agg[j])));
  }
  return pt;
}

ConnectednessSeries network_series(const IndustryPanel& panel,
                                   const std::map<int, PosteriorDrawSet>& draw_sets,
                                   int horizon) {
  ConnectednessSeries series;
  series.industries = panel.industries;
  series.horizon = horizon;
  for (const auto& [t_index, set] : draw_sets) {
    if (t_index < 0 || t_index >= static_cast<int>(panel.n_dates()))
      throw InputError("draw set index outside the panel");
    series.points.push_back(summarize_draws(panel.dates[t_index], set, horizon));
  }
  return series;
}

AdjacencyMatrix median_adjacency(const PosteriorDrawSet& set, int horizon,
                                 std::vector<std::string> labels) {
  if (set.draws.empty()) throw EmptyInput("draw set is empty");
  const Eigen::Index n = set.draws.front().sigma.rows();
  std::size_t stable = 0;
  for (const auto& d : set.draws) stable += d.stable ? 1 : 0;
  const bool keep_all = 2 * stable < set.draws.size();

  std::vector<Eigen::MatrixXd> mats;
  for (const auto& draw : set.draws) {
    if (!keep_all && !draw.stable) continue;
    mats.push_back(row_normalize(gfevd(vma_coefficients(draw, horizon), draw.sigma))
                       .theta_tilde);
  }
  Eigen::MatrixXd med(n, n);
  std::vector<double> cell(mats.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (std::size_t d = 0; d < mats.size(); ++d) cell[d] = mats[d](i, j);
      med(i, j) = summarize(cell).median;
    }
  Gfevd g{std::move(med), horizon};
  return row_normalize(g, std::move(labels));
}

ConnectednessSeries rolling_window_baseline(const IndustryPanel& panel, int window,
                                            int horizon, int lags) {
  const int t = static_cast<int>(panel.n_dates());
  const int n = static_cast<int>(panel.n_industries());
  if (window < 10 * n)
    throw InputError("baseline window must be at least 10x the variable count");
  if (window > t) throw InputError("baseline window exceeds the sample");

  ConnectednessSeries series;
  series.industries = panel.industries;
  series.horizon = horizon;
  for (int end = window - 1; end < t; ++end) {
    const Eigen::MatrixXd slice = panel.values.middleRows(end - window + 1, window);
    const RegressionData design = lag_design(slice, lags);
    const Eigen::MatrixXd gram = design.regressors.transpose() * design.regressors;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw SingularDesign("window ending " + panel.dates[end].to_string() +
                           " is rank deficient");
    PosteriorDraw fit;
    fit.coefs = llt.solve(design.regressors.transpose() * design.targets);
    const Eigen::MatrixXd resid = design.targets - design.regressors * fit.coefs;
    const int dof = static_cast<int>(design.targets.rows()) -
                    static_cast<int>(design.regressors.cols());
    if (dof <= 0) throw SingularDesign("window too short for the lag order");
    fit.sigma = resid.transpose() * resid / static_cast<double>(dof);
    fit.stable = companion_spectral_radius(fit.coefs, n, lags) < 1.0;

    PosteriorDrawSet single;
    single.draws.push_back(std::move(fit));
    series.points.push_back(summarize_draws(panel.dates[end], single, horizon));
  }
  return series;
}

std::string write_connectedness_csv(const ConnectednessSeries& series) {
  std::vector<std::string> header{"date", "C_median", "C_mean", "C_sd", "C_p2.5", "C_p97.5"};
  for (const auto& ind : series.industries)
    for (const char* stat : {"to_", "from_", "net_", "agg_"})
      header.push_back(stat + ind);
  csv::Writer w(std::move(header));
  for (const auto& pt : series.points) {
    std::vector<std::string> row{pt.date.to_string(),
                                 csv::format_double(pt.total.median),
                                 csv::format_double(pt.total.mean),
                                 csv::format_double(pt.total.sd),
                                 csv::format_double(pt.total.p2_5),
                                 csv::format_double(pt.total.p97_5)};
    for (std::size_t j = 0; j < series.industries.size(); ++j) {
      row.push_back(csv::format_double(pt.to[j].median));
      row.push_back(csv::format_double(pt.from[j].median));
      row.push_back(csv::format_double(pt.net[j].median));
      row.push_back(csv::format_double(pt.agg[j].median));
    }
    w.add_row(std::move(row));
  }
  return w.str();
}

ConnectednessSeries read_connectedness_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t fixed = 6;
  if (table.header.size() < fixed || table.header[0] != "date")
    throw InputError("not a connectedness csv: '" + path.string() + "'");
  if ((table.header.size() - fixed) % 4 != 0)
    throw InputError("per-industry column block is incomplete");

  ConnectednessSeries series;
  const std::size_t n = (table.header.size() - fixed) / 4;
  for (std::size_t j = 0; j < n; ++j) {
    const std::string& to_col = table.header[fixed + 4 * j];
    if (to_col.rfind("to_", 0) != 0)
      throw InputError("expected a to_<industry> column, got '" + to_col + "'");
    series.industries.push_back(to_col.substr(3));
  }
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size())
      throw InputError("wrong field count (line " + std::to_string(row.line) + ")");
    ConnectednessPoint pt;
    pt.date = Date::parse(row.fields[0]);
    pt.total.median = csv::parse_double(row.fields[1]);
    pt.total.mean = csv::parse_double(row.fields[2]);
    pt.total.sd = csv::parse_double(row.fields[3]);
    pt.total.p2_5 = csv::parse_double(row.fields[4]);
    pt.total.p97_5 = csv::parse_double(row.fields[5]);
    for (std::size_t j = 0; j < n; ++j) {
      BandSummary to, from, net, agg;
      to.median = csv::parse_double(row.fields[fixed + 4 * j]);
      from.median = csv::parse_double(row.fields[fixed + 4 * j + 1]);
      net.median = csv::parse_double(row.fields[fixed + 4 * j + 2]);
      agg.median = csv::parse_double(row.fields[fixed + 4 * j + 3]);
      pt.to.push_back(to);
      pt.from.push_back(from);
      pt.net.push_back(net);
      pt.agg.push_back(agg);
    }
    series.points.push_back(std::move(pt));
  }
  return series;
}

std::string write_adjacency_csv(const AdjacencyMatrix& adj) {
  const Eigen::Index n = adj.size();
  std::vector<std::string> names = adj.labels;
  if (names.empty())
    for (Eigen::Index i = 0; i < n; ++i) names.push_back("v" + std::to_string(i + 1));
  std::vector<std::string> header{"industry"};
  header.insert(header.end(), names.begin(), names.end());
  csv::Writer w(std::move(header));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::string> row{names[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < n; ++j)
      row.push_back(csv::format_double(adj.theta_tilde(i, j)));
    w.add_row(std::move(row));
  }
  return w.str();
}

}  // namespace uncnet
