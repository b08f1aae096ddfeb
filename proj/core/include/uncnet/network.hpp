#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "uncnet/dates.hpp"
#include "uncnet/industry_panel.hpp"
#include "uncnet/tvp_var.hpp"

namespace uncnet {

struct VmaCoeffs {
  std::vector<Eigen::MatrixXd> psi;  // psi[0] = I, ..., psi[horizon]
  int horizon() const { return static_cast<int>(psi.size()) - 1; }
};

/// Truncated moving-average representation: Psi_0 = I and
/// Psi_h = sum_{l=1..min(h,p)} Phi_l Psi_{h-l}. Intercepts do not enter.
VmaCoeffs vma_coefficients(const PosteriorDraw& draw, int horizon);
VmaCoeffs vma_from_lags(const std::vector<Eigen::MatrixXd>& lag_matrices, int horizon);

struct Gfevd {
  Eigen::MatrixXd theta;  // unnormalized, nonnegative
  int horizon = 0;
};

/// Generalized decomposition: entry (j,k) is
///   sigma_kk^-1 sum_h ([Psi_h Sigma]_{j,k})^2 / sum_h [Psi_h Sigma Psi_h']_{j,j}.
/// Ordering-free; rows need not sum to one.
Gfevd gfevd(const VmaCoeffs& vma, const Eigen::MatrixXd& sigma);

struct AdjacencyMatrix {
  Eigen::MatrixXd theta_tilde;  // row-stochastic
  int horizon = 0;
  std::vector<std::string> labels;
  Eigen::Index size() const { return theta_tilde.rows(); }
};

AdjacencyMatrix row_normalize(const Gfevd& g, std::vector<std::string> labels = {});

/// Off-diagonal share of the whole matrix, in percent.
double total_connectedness(const AdjacencyMatrix& adj);

struct ConnectednessStats {
  double total = 0;
  Eigen::VectorXd to, from, net, agg;  // percent units
};

/// FROM_j averages row j's off-diagonal mass, TO_j column j's; NET and AGG
/// are their difference and sum. Denominator N makes total = sum FROM =
/// sum TO hold by construction.
ConnectednessStats directional(const AdjacencyMatrix& adj);

struct BandSummary {
  double median = 0, mean = 0, sd = 0, p2_5 = 0, p97_5 = 0;
};

/// Summary over a sample of draws: median/mean/sd plus the 2.5 and 97.5
/// percentiles (linear interpolation between order statistics).
BandSummary summarize(std::vector<double> values);

struct ConnectednessPoint {
  Date date;
  BandSummary total;
  std::vector<BandSummary> to, from, net, agg;  // per industry
  int draws_used = 0;
  int draws_total = 0;
  bool unstable_warning = false;  // fewer than half the draws were stable
};

struct ConnectednessSeries {
  std::vector<std::string> industries;
  int horizon = 0;
  std::vector<ConnectednessPoint> points;
};

/// Per-draw network statistics summarized with posterior bands. Unstable
/// draws are dropped when at least half the set is stable; otherwise all
/// draws are used and the point is flagged.
ConnectednessPoint summarize_draws(Date date, const PosteriorDrawSet& set, int horizon);

ConnectednessSeries network_series(const IndustryPanel& panel,
                                   const std::map<int, PosteriorDrawSet>& draw_sets,
                                   int horizon);

/// Median adjacency matrix (entrywise across retained draws, rows renormalized).
AdjacencyMatrix median_adjacency(const PosteriorDrawSet& set, int horizon,
                                 std::vector<std::string> labels);

/// Constant-coefficient VAR refit on each trailing window by least squares,
/// pushed through the same decomposition. Bands collapse to the point value.
ConnectednessSeries rolling_window_baseline(const IndustryPanel& panel, int window,
                                            int horizon, int lags);

std::string write_connectedness_csv(const ConnectednessSeries& series);
ConnectednessSeries read_connectedness_csv(const std::filesystem::path& path);
std::string write_adjacency_csv(const AdjacencyMatrix& adj);

}  // namespace uncnet
