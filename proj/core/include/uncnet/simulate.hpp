#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "uncnet/dates.hpp"
#include "uncnet/industry_panel.hpp"
#include "uncnet/network.hpp"
#include "uncnet/options_iv.hpp"

namespace uncnet {

/// One coefficient regime of a simulated time-varying VAR, active while the
/// rescaled time t/T is at most `until`.
struct VarRegime {
  std::vector<Eigen::MatrixXd> lag_coefs;  // Phi_1..Phi_p, each N x N
  Eigen::VectorXd intercept;               // length N
  Eigen::MatrixXd sigma;                   // N x N innovation covariance
  double until = 1.0;
};

struct VarSimSpec {
  int n_obs = 500;
  std::vector<VarRegime> regimes;  // ordered by `until`; last must reach 1.0
  int burn_in = 200;
  std::uint64_t seed = 1;
  Date start_date = Date::from_ymd(2000, 1, 3);
  double level_shift = 0.3;  // recentering so panel values stay positive
  std::vector<std::string> names;  // defaults to IND1..INDn
};

/// Truth at a reference date: the generating parameters pushed through the
/// same decomposition used for estimates.
struct TruthPoint {
  Date date;
  double u = 0;  // rescaled time
  std::vector<Eigen::MatrixXd> lag_coefs;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd theta_tilde;
  ConnectednessStats stats;
};

struct VarSimResult {
  IndustryPanel panel;
  std::vector<TruthPoint> truth;  // one per regime midpoint
};

/// Simulates the locally stationary VAR on a weekday calendar and evaluates
/// the truth network per regime. Throws UnstableSpec when any regime's
/// companion radius reaches one.
VarSimResult simulate_var(const VarSimSpec& spec, int gfevd_horizon);

// Built-in coefficient layouts used by tests and the CLI.
VarSimSpec preset_constant(int n_vars, int n_obs, std::uint64_t seed);
VarSimSpec preset_regime_shift(int n_vars, int n_obs, std::uint64_t seed);
VarSimSpec preset_oneway(int n_vars, int n_obs, std::uint64_t seed);
VarSimSpec preset_white_noise(int n_vars, int n_obs, std::uint64_t seed);
VarSimSpec make_preset(const std::string& name, int n_vars, int n_obs, std::uint64_t seed);

std::string write_truth_json(const VarSimResult& sim);

// ---------------------------------------------------------------------------
// Synthetic option chains
// ---------------------------------------------------------------------------

struct ChainSimSpec {
  int n_firms = 12;
  int n_industries = 6;
  int n_days = 600;
  double base_vol = 0.2;
  double vol_log_sd = 0.15;      // dispersion of the slow-moving log-vol path
  double vol_mean_revert = 0.02; // pull of log vol back to its base level
  double spot0 = 100.0;
  double rate = 0.02;
  int expiry_days = 30;
  double strike_width_sds = 6.0;   // half-width of the grid in vol units
  double strike_step_frac = 0.01;  // strike step as a fraction of spot0
  double spread = 0.02;            // full bid-ask spread, absolute
  double zero_bid_beyond_sds = 4.5;  // wings quoted with a zero bid
  std::uint64_t seed = 1;
  Date start_date = Date::from_ymd(2000, 1, 3);
};

struct ChainSimResult {
  std::vector<OptionChain> chains;          // one per firm and day
  std::vector<CapObservation> caps;         // daily market caps
  std::vector<MembershipInterval> membership;
  std::vector<FirmVixPoint> true_vols;      // the generating vol path
};

/// Black-Scholes quote sheets on a regular strike grid with a configurable
/// spread and zero-bid wings, plus matching caps and industry membership
/// so the whole pipeline can run on simulated data.
ChainSimResult simulate_chains(const ChainSimSpec& spec);

std::string write_chains_csv(const std::vector<OptionChain>& chains);
std::string write_caps_csv(const std::vector<CapObservation>& caps);
std::string write_membership_csv(const std::vector<MembershipInterval>& membership);

/// Weekday calendar of the given length.
std::vector<Date> weekday_calendar(Date start, int n_days);

}  // namespace uncnet
