#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uncnet/industry_panel.hpp"

namespace uncnet {

struct TvpVarSpec {
  int lags = 2;
  double kernel_bandwidth = 0;      // in observations; <= 0 picks ceil(sqrt(T))
  double shrinkage = 0.05;          // Minnesota tightness
  double own_lag_prior_mean = 0.1;  // prior mean of each first own lag
  int n_draws = 500;
  double stability_cap = 0.999;     // spectral-radius bound for kept draws
  std::uint64_t seed = 0;
  int workers = 0;                  // 0 = hardware concurrency
};

struct KernelWeights {
  int target_index = 0;       // 1-based position inside the weighted sample
  Eigen::VectorXd weights;    // nonnegative; total = effective sample size
};

/// Gaussian kernel weights centered on the target observation, rescaled so
/// their total equals the kernel's effective sample size (sum w)^2/sum w^2.
/// A flat kernel weights every observation by exactly one, so the posterior
/// collapses to the full-sample conjugate update.
KernelWeights kernel_weights(int n_obs, int target_index, double bandwidth);

/// Normal-Wishart prior in regression form. The coefficient matrix is
/// (N*p+1) x N with the intercept row first; coef_precision holds the
/// diagonal of the (shared) regressor precision.
struct MinnesotaPrior {
  Eigen::MatrixXd coef_mean;
  Eigen::VectorXd coef_precision;
  double wishart_dof = 0;
  Eigen::MatrixXd wishart_scale;
};

/// Minnesota moments: own first lag centered on `own_lag_prior_mean`, lag
/// decay 1/lag^2, cross-variable scaling by AR residual variances, loose
/// intercepts, Wishart prior matching the AR residual scales in mean.
MinnesotaPrior minnesota_prior(const Eigen::MatrixXd& data, const TvpVarSpec& spec);
MinnesotaPrior minnesota_prior(const IndustryPanel& panel, const TvpVarSpec& spec);

/// Lagged design: row t holds (1, x'_{t-1}, ..., x'_{t-p}); targets drop the
/// first p rows of the data.
struct RegressionData {
  Eigen::MatrixXd regressors;  // (T-p) x (N*p+1)
  Eigen::MatrixXd targets;     // (T-p) x N
};
RegressionData lag_design(const Eigen::MatrixXd& data, int lags);

struct PosteriorParams {
  Eigen::MatrixXd coef_mean;       // (N*p+1) x N
  Eigen::MatrixXd coef_precision;  // (N*p+1) x (N*p+1), positive definite
  double wishart_dof = 0;
  Eigen::MatrixXd wishart_scale;   // N x N, positive definite
  int lags = 0;
};

/// Conjugate update under the kernel-weighted likelihood.
PosteriorParams posterior_update(const RegressionData& data,
                                 const Eigen::VectorXd& weights,
                                 const MinnesotaPrior& prior, int lags);

struct PosteriorDraw {
  Eigen::MatrixXd coefs;  // (N*p+1) x N, intercept row first
  Eigen::MatrixXd sigma;  // N x N innovation covariance
  bool stable = false;

  int n_vars() const { return static_cast<int>(sigma.rows()); }
  int n_lags() const {
    return static_cast<int>((coefs.rows() - 1) / sigma.rows());
  }
  /// Lag-l coefficient matrix Phi_l with (i,j) = effect of variable j's
  /// l-th lag on variable i.
  Eigen::MatrixXd lag_matrix(int l) const;
  Eigen::VectorXd intercept() const { return coefs.row(0).transpose(); }
};

struct PosteriorDrawSet {
  std::vector<PosteriorDraw> draws;
  double rejection_rate = 0;  // share of attempts discarded as unstable
  int n_unstable_kept = 0;
};

/// Draws (Sigma, Phi) pairs from the quasi posterior: Sigma has an
/// inverse-Wishart law with scale `wishart_scale` (so its posterior mean is
/// roughly scale/dof), coefficients are conditionally matrix normal.
/// Unstable draws are redrawn up to 10x the requested count, then kept and
/// flagged.
PosteriorDrawSet sample_posterior(const PosteriorParams& params,
                                  const TvpVarSpec& spec, std::uint64_t seed);

/// Spectral radius of the VAR companion matrix built from `coefs`.
double companion_spectral_radius(const Eigen::MatrixXd& coefs, int n_vars, int lags);

/// One-shot estimation at a 0-based panel row index in [lags, T).
/// The sampling seed is derive_seed(spec.seed, t_index).
PosteriorDrawSet estimate_point(const Eigen::MatrixXd& data, const TvpVarSpec& spec,
                                int t_index, const MinnesotaPrior& prior);
PosteriorDrawSet estimate_point(const Eigen::MatrixXd& data, const TvpVarSpec& spec,
                                int t_index);

struct PathEstimate {
  std::map<int, PosteriorDrawSet> results;
  std::map<int, std::string> errors;  // per-index failures, run continues
};

/// Independent per-index estimation, parallel across `spec.workers` threads.
/// Results do not depend on worker count or execution order.
PathEstimate estimate_path(const IndustryPanel& panel, const TvpVarSpec& spec,
                           const std::vector<int>& time_indices);

/// Bandwidth actually used for a weighted sample of n_obs rows.
double effective_bandwidth(const TvpVarSpec& spec, int n_obs);

std::string write_draws_csv(const PosteriorDrawSet& set,
                            const std::vector<std::string>& var_names);

}  // namespace uncnet
