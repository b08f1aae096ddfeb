#include "uncnet/tvp_var.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <thread>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"
#include "uncnet/rng.hpp"

namespace uncnet {

KernelWeights kernel_weights(int n_obs, int target_index, double bandwidth) {
  if (n_obs < 1 || target_index < 1 || target_index > n_obs)
    throw InputError("kernel target index out of range");
  if (!(bandwidth > 0)) throw InputError("kernel bandwidth must be positive");
  Eigen::VectorXd w(n_obs);
  for (int t = 1; t <= n_obs; ++t) {
    const double z = (target_index - t) / bandwidth;
    w[t - 1] = std::exp(-0.5 * z * z);
  }
  // Normalized so the total mass equals the kernel's effective sample size
  // (sum w)^2 / sum w^2. The weighted-likelihood information then matches
  // the information the kernel window actually carries, which is what makes
  // the quasi-posterior bands cover at their nominal rate. A flat kernel
  // degenerates to unit weights and the plain full-sample likelihood.
  const double ess = w.sum() * w.sum() / w.squaredNorm();
  w *= ess / w.sum();
  return {target_index, std::move(w)};
}

MinnesotaPrior minnesota_prior(const Eigen::MatrixXd& data, const TvpVarSpec& spec) {
  const int p = spec.lags;
  const int n = static_cast<int>(data.cols());
  const int t = static_cast<int>(data.rows());
  if (p < 1) throw InputError("lag order must be at least 1");
  if (t < 2 * p + 3) throw DegeneratePanel("panel too short to fit AR residual scales");

  // Univariate AR(p) residual variances set the cross-variable scales.
  Eigen::VectorXd s2(n);
  for (int i = 0; i < n; ++i) {
    const int rows = t - p;
    Eigen::MatrixXd x(rows, p + 1);
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
      x(r, 0) = 1.0;
      for (int l = 1; l <= p; ++l) x(r, l) = data(r + p - l, i);
      y[r] = data(r + p, i);
    }
    const Eigen::VectorXd beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    const double rss = (y - x * beta).squaredNorm();
    const int dof = rows - (p + 1);
    s2[i] = dof > 0 ? rss / dof : rss;
    if (!(s2[i] > 0))
      throw DegeneratePanel("variable " + std::to_string(i) + " has zero AR residual scale");
  }

  const int k = n * p + 1;
  MinnesotaPrior prior;
  prior.coef_mean = Eigen::MatrixXd::Zero(k, n);
  for (int i = 0; i < n; ++i) prior.coef_mean(1 + i, i) = spec.own_lag_prior_mean;

  // Diagonal precision: variance 100*s_i^2 for intercepts (the shared
  // regressor factor is 100, the equation factor s_i^2 comes from Sigma),
  // shrinkage/lag^2 on own lags, scaled by s_j^-2 on cross lags.
  prior.coef_precision.resize(k);
  prior.coef_precision[0] = 1.0 / 100.0;
  for (int l = 1; l <= p; ++l)
    for (int j = 0; j < n; ++j)
      prior.coef_precision[1 + (l - 1) * n + j] =
          (l * l) * s2[j] / spec.shrinkage;

  prior.wishart_dof = n + 2;
  prior.wishart_scale =
      (prior.wishart_dof - n - 1) * s2.asDiagonal().toDenseMatrix();
  return prior;
}

MinnesotaPrior minnesota_prior(const IndustryPanel& panel, const TvpVarSpec& spec) {
  return minnesota_prior(panel.values, spec);
}

RegressionData lag_design(const Eigen::MatrixXd& data, int lags) {
  const int t = static_cast<int>(data.rows());
  const int n = static_cast<int>(data.cols());
  if (lags < 1 || t <= lags) throw InputError("not enough rows for the lag design");
  const int rows = t - lags;
  RegressionData out;
  out.regressors.resize(rows, n * lags + 1);
  out.targets = data.bottomRows(rows);
  for (int r = 0; r < rows; ++r) {
    out.regressors(r, 0) = 1.0;
    for (int l = 1; l <= lags; ++l)
      out.regressors.block(r, 1 + (l - 1) * n, 1, n) = data.row(r + lags - l);
  }
  return out;
}

PosteriorParams posterior_update(const RegressionData& data,
                                 const Eigen::VectorXd& weights,
                                 const MinnesotaPrior& prior, int lags) {
  const Eigen::Index rows = data.regressors.rows();
  const Eigen::Index k = data.regressors.cols();
  const Eigen::Index n = data.targets.cols();
  if (weights.size() != rows) throw InputError("weight vector does not match the sample");
  if (prior.coef_mean.rows() != k || prior.coef_mean.cols() != n)
    throw InputError("prior shape does not match the design");

  const Eigen::MatrixXd aw = data.regressors.transpose() * weights.asDiagonal();
  Eigen::MatrixXd precision = aw * data.regressors;
  precision += Eigen::MatrixXd(prior.coef_precision.asDiagonal());
  precision = 0.5 * (precision + precision.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw SingularDesign("weighted regressor matrix is rank deficient");

  const Eigen::MatrixXd rhs =
      aw * data.targets + prior.coef_precision.asDiagonal() * prior.coef_mean;
  const Eigen::MatrixXd coef_mean = llt.solve(rhs);

  // Scale update in residual form, which keeps it positive definite:
  //   Gamma0 + (Y-AB)' D (Y-AB) + (B-B0)' Xi0 (B-B0)
  const Eigen::MatrixXd resid = data.targets - data.regressors * coef_mean;
  const Eigen::MatrixXd shift = coef_mean - prior.coef_mean;
  Eigen::MatrixXd scale = prior.wishart_scale;
  scale += resid.transpose() * weights.asDiagonal() * resid;
  scale += shift.transpose() * prior.coef_precision.asDiagonal() * shift;
  scale = 0.5 * (scale + scale.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> scale_llt(scale);
  if (scale_llt.info() != Eigen::Success) {
    scale += 1e-10 * scale.trace() * Eigen::MatrixXd::Identity(n, n);
    scale_llt.compute(scale);
    if (scale_llt.info() != Eigen::Success)
      throw NonPosDefScale("posterior scale failed Cholesky even after jitter");
  }

  PosteriorParams out;
  out.coef_mean = coef_mean;
  out.coef_precision = std::move(precision);
  out.wishart_dof = prior.wishart_dof + weights.sum();
  out.wishart_scale = std::move(scale);
  out.lags = lags;
  return out;
}

Eigen::MatrixXd PosteriorDraw::lag_matrix(int l) const {
  const int n = n_vars();
  if (l < 1 || l > n_lags()) throw InputError("lag index out of range");
  return coefs.block(1 + (l - 1) * n, 0, n, n).transpose();
}

double companion_spectral_radius(const Eigen::MatrixXd& coefs, int n_vars, int lags) {
  const int dim = n_vars * lags;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(dim, dim);
  for (int l = 1; l <= lags; ++l)
    companion.block(0, (l - 1) * n_vars, n_vars, n_vars) =
        coefs.block(1 + (l - 1) * n_vars, 0, n_vars, n_vars).transpose();
  if (lags > 1)
    companion.block(n_vars, 0, dim - n_vars, dim - n_vars) =
        Eigen::MatrixXd::Identity(dim - n_vars, dim - n_vars);
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, /*computeEigenvectors=*/false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

PosteriorDrawSet sample_posterior(const PosteriorParams& params,
                                  const TvpVarSpec& spec, std::uint64_t seed) {
  const Eigen::Index n = params.wishart_scale.rows();
  const Eigen::Index k = params.coef_mean.rows();
  if (spec.n_draws < 1) throw InputError("draw count must be at least 1");
  if (!(spec.stability_cap > 0) || !(spec.stability_cap < 1))
    throw InputError("stability cap must lie in (0, 1)");
  if (params.wishart_dof <= static_cast<double>(n) - 1)
    throw InputError("wishart dof must exceed n_vars - 1");

  const Eigen::LLT<Eigen::MatrixXd> scale_llt(params.wishart_scale);
  if (scale_llt.info() != Eigen::Success)
    throw NonPosDefScale("wishart scale is not positive definite");
  const Eigen::MatrixXd scale_chol = scale_llt.matrixL();

  const Eigen::LLT<Eigen::MatrixXd> prec_llt(params.coef_precision);
  if (prec_llt.info() != Eigen::Success)
    throw SingularDesign("coefficient precision is not positive definite");
  const Eigen::MatrixXd prec_chol_t = Eigen::MatrixXd(prec_llt.matrixL()).transpose();

  Rng rng(seed);
  PosteriorDrawSet out;
  out.draws.reserve(spec.n_draws);
  const long max_attempts = 10L * spec.n_draws;
  long attempts = 0;
  long rejected = 0;

  Eigen::MatrixXd bartlett(n, n);
  Eigen::MatrixXd z(k, n);
  while (static_cast<int>(out.draws.size()) < spec.n_draws) {
    ++attempts;
    // Bartlett factor of a Wishart(dof, I) draw.
    bartlett.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      bartlett(i, i) = std::sqrt(rng.chi2(params.wishart_dof - static_cast<double>(i)));
      for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    }
    // Sigma = (L_Gamma A^-T)(L_Gamma A^-T)' inverts the Wishart precision
    // draw without forming it.
    const Eigen::MatrixXd bartlett_t = bartlett.transpose();
    const Eigen::MatrixXd m =
        bartlett_t.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(scale_chol);
    PosteriorDraw draw;
    draw.sigma = m * m.transpose();
    draw.sigma = 0.5 * (draw.sigma + draw.sigma.transpose()).eval();

    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < k; ++r) z(r, c) = rng.normal();
    draw.coefs = params.coef_mean +
                 prec_chol_t.triangularView<Eigen::Upper>().solve(z) * m.transpose();
    draw.stable = companion_spectral_radius(draw.coefs, static_cast<int>(n), params.lags) <
                  spec.stability_cap;
    if (!draw.stable && attempts < max_attempts) {
      ++rejected;
      continue;
    }
    if (!draw.stable) ++out.n_unstable_kept;
    out.draws.push_back(std::move(draw));
  }
  out.rejection_rate = attempts > 0 ? static_cast<double>(rejected) / attempts : 0.0;
  return out;
}

double effective_bandwidth(const TvpVarSpec& spec, int n_obs) {
  if (spec.kernel_bandwidth > 0) return spec.kernel_bandwidth;
  return std::ceil(std::sqrt(static_cast<double>(n_obs)));
}

PosteriorDrawSet estimate_point(const Eigen::MatrixXd& data, const TvpVarSpec& spec,
                                int t_index, const MinnesotaPrior& prior) {
  const int t = static_cast<int>(data.rows());
  if (t_index < spec.lags || t_index >= t)
    throw InputError("time index " + std::to_string(t_index) +
                     " outside the estimable range");
  const RegressionData design = lag_design(data, spec.lags);
  const int rows = static_cast<int>(design.targets.rows());
  const KernelWeights w =
      kernel_weights(rows, t_index - spec.lags + 1, effective_bandwidth(spec, rows));
  const PosteriorParams post = posterior_update(design, w.weights, prior, spec.lags);
  return sample_posterior(post, spec, derive_seed(spec.seed, static_cast<std::uint64_t>(t_index)));
}

PosteriorDrawSet estimate_point(const Eigen::MatrixXd& data, const TvpVarSpec& spec,
                                int t_index) {
  return estimate_point(data, spec, t_index, minnesota_prior(data, spec));
}

PathEstimate estimate_path(const IndustryPanel& panel, const TvpVarSpec& spec,
                           const std::vector<int>& time_indices) {
  const MinnesotaPrior prior = minnesota_prior(panel.values, spec);
  const RegressionData design = lag_design(panel.values, spec.lags);
  const int rows = static_cast<int>(design.targets.rows());
  const double bandwidth = effective_bandwidth(spec, rows);

  std::vector<int> indices = time_indices;
  const std::size_t n_jobs = indices.size();
  std::vector<PosteriorDrawSet> results(n_jobs);
  std::vector<std::string> errors(n_jobs);
  std::vector<char> ok(n_jobs, 0);

  auto run_one = [&](std::size_t j) {
    const int t_index = indices[j];
    try {
      if (t_index < spec.lags || t_index >= static_cast<int>(panel.n_dates()))
        throw InputError("time index " + std::to_string(t_index) +
                         " outside the estimable range");
      const KernelWeights w = kernel_weights(rows, t_index - spec.lags + 1, bandwidth);
      const PosteriorParams post = posterior_update(design, w.weights, prior, spec.lags);
      results[j] = sample_posterior(post, spec,
                                    derive_seed(spec.seed, static_cast<std::uint64_t>(t_index)));
      ok[j] = 1;
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  };

  int workers = spec.workers > 0
                    ? spec.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers == 1 || n_jobs <= 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) run_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<std::size_t>(workers, n_jobs);
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < n_jobs; j = next.fetch_add(1))
          run_one(j);
      });
    for (auto& th : pool) th.join();
  }

  PathEstimate out;
  for (std::size_t j = 0; j < n_jobs; ++j) {
    if (ok[j])
      out.results[indices[j]] = std::move(results[j]);
    else
      out.errors[indices[j]] = std::move(errors[j]);
  }
  return out;
}

std::string write_draws_csv(const PosteriorDrawSet& set,
                            const std::vector<std::string>& var_names) {
  if (set.draws.empty()) throw EmptyInput("draw set is empty");
  const int n = set.draws.front().n_vars();
  const int p = set.draws.front().n_lags();
  std::vector<std::string> header{"draw_id"};
  auto var = [&](int i) {
    return i < static_cast<int>(var_names.size()) ? var_names[i]
                                                  : "v" + std::to_string(i + 1);
  };
  for (int eq = 0; eq < n; ++eq) {
    header.push_back("coef_" + var(eq) + "_intercept");
    for (int l = 1; l <= p; ++l)
      for (int j = 0; j < n; ++j)
        header.push_back("coef_" + var(eq) + "_l" + std::to_string(l) + "_" + var(j));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      header.push_back("sigma_" + var(i) + "_" + var(j));
  header.push_back("stable");

  csv::Writer w(std::move(header));
  for (std::size_t d = 0; d < set.draws.size(); ++d) {
    const auto& draw = set.draws[d];
    std::vector<std::string> row{std::to_string(d)};
    for (int eq = 0; eq < n; ++eq)
      for (int r = 0; r < draw.coefs.rows(); ++r)
        row.push_back(csv::format_double(draw.coefs(r, eq)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        row.push_back(csv::format_double(draw.sigma(i, j)));
    row.push_back(draw.stable ? "1" : "0");
    w.add_row(std::move(row));
  }
  return w.str();
}

}  // namespace uncnet
