#include "uncnet/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"
#include "uncnet/rng.hpp"
#include "uncnet/tvp_var.hpp"

namespace uncnet {
namespace {

Eigen::MatrixXd stack_coefs(const VarRegime& regime) {
  const Eigen::Index n = regime.sigma.rows();
  const int p = static_cast<int>(regime.lag_coefs.size());
  Eigen::MatrixXd coefs = Eigen::MatrixXd::Zero(n * p + 1, n);
  coefs.row(0) = regime.intercept.transpose();
  for (int l = 1; l <= p; ++l)
    coefs.block(1 + (l - 1) * n, 0, n, n) = regime.lag_coefs[l - 1].transpose();
  return coefs;
}

void validate_regime(const VarRegime& regime) {
  if (regime.lag_coefs.empty()) throw InputError("regime has no lag matrices");
  const Eigen::Index n = regime.sigma.rows();
  for (const auto& m : regime.lag_coefs)
    if (m.rows() != n || m.cols() != n)
      throw InputError("regime lag matrix shape mismatch");
  const double radius = companion_spectral_radius(
      stack_coefs(regime), static_cast<int>(n), static_cast<int>(regime.lag_coefs.size()));
  if (!(radius < 1.0))
    throw UnstableSpec("regime companion spectral radius " + csv::format_double(radius));
  Eigen::LLT<Eigen::MatrixXd> llt(regime.sigma);
  if (llt.info() != Eigen::Success)
    throw InputError("regime sigma is not positive definite");
}

}  // namespace

std::vector<Date> weekday_calendar(Date start, int n_days) {
  std::vector<Date> out;
  out.reserve(n_days);
  Date d = start;
  while (static_cast<int>(out.size()) < n_days) {
    if (d.weekday() < 5) out.push_back(d);
    d = d.plus_days(1);
  }
  return out;
}

VarSimResult simulate_var(const VarSimSpec& spec, int gfevd_horizon) {
  if (spec.regimes.empty()) throw InputError("no regimes specified");
  if (spec.n_obs < 10) throw InputError("simulation too short");
  for (const auto& r : spec.regimes) validate_regime(r);
  if (!(spec.regimes.back().until >= 1.0))
    throw InputError("last regime must extend to u = 1");

  const Eigen::Index n = spec.regimes.front().sigma.rows();
  const int p = static_cast<int>(spec.regimes.front().lag_coefs.size());
  for (const auto& r : spec.regimes)
    if (r.sigma.rows() != n || static_cast<int>(r.lag_coefs.size()) != p)
      throw InputError("all regimes must share dimensions");

  std::vector<Eigen::MatrixXd> sigma_chol;
  for (const auto& r : spec.regimes)
    sigma_chol.push_back(Eigen::LLT<Eigen::MatrixXd>(r.sigma).matrixL());

  Rng rng(spec.seed);
  auto draw_shock = [&](std::size_t regime_idx) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    return (sigma_chol[regime_idx] * z).eval();
  };

  // Deviations around zero; the level shift is added afterwards and does
  // not touch the network truth.
  std::vector<Eigen::VectorXd> history(p, Eigen::VectorXd::Zero(n));
  auto step = [&](double u) {
    std::size_t idx = 0;
    while (idx + 1 < spec.regimes.size() && u > spec.regimes[idx].until) ++idx;
    const VarRegime& reg = spec.regimes[idx];
    Eigen::VectorXd next = draw_shock(idx);
    for (int l = 1; l <= p; ++l) next += reg.lag_coefs[l - 1] * history[l - 1];
    for (int l = p - 1; l >= 1; --l) history[l] = history[l - 1];
    history[0] = next;
    return next;
  };

  for (int b = 0; b < spec.burn_in; ++b) step(0.0);

  Eigen::MatrixXd values(spec.n_obs, n);
  for (int t = 1; t <= spec.n_obs; ++t)
    values.row(t - 1) = step(static_cast<double>(t) / spec.n_obs).transpose();

  double shift = spec.level_shift;
  const double min_val = values.minCoeff();
  if (min_val + shift <= 0.01) shift = 0.01 - min_val;
  values.array() += shift;

  VarSimResult out;
  out.panel.dates = weekday_calendar(spec.start_date, spec.n_obs);
  out.panel.values = values;
  for (Eigen::Index j = 0; j < n; ++j)
    out.panel.industries.push_back(
        j < static_cast<Eigen::Index>(spec.names.size())
            ? spec.names[j]
            : "IND" + std::to_string(j + 1));

  // Truth at each regime midpoint.
  double lower = 0.0;
  for (const auto& reg : spec.regimes) {
    const double upper = std::min(reg.until, 1.0);
    const double mid = 0.5 * (lower + upper);
    lower = upper;
    TruthPoint truth;
    truth.u = mid;
    int t_index = static_cast<int>(mid * spec.n_obs);
    t_index = std::clamp(t_index, 0, spec.n_obs - 1);
    truth.date = out.panel.dates[t_index];
    truth.lag_coefs = reg.lag_coefs;
    truth.sigma = reg.sigma;
    const AdjacencyMatrix adj = row_normalize(
        gfevd(vma_from_lags(reg.lag_coefs, gfevd_horizon), reg.sigma), out.panel.industries);
    truth.theta_tilde = adj.theta_tilde;
    truth.stats = directional(adj);
    out.truth.push_back(std::move(truth));
  }
  return out;
}

namespace {

Eigen::MatrixXd uniform_cross_matrix(int n, double own, double cross) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, cross);
  m.diagonal().setConstant(own);
  return m;
}

Eigen::MatrixXd correlated_sigma(int n, double rho, double scale) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, rho * scale);
  s.diagonal().setConstant(scale);
  return s;
}

}  // namespace

VarSimSpec preset_constant(int n_vars, int n_obs, std::uint64_t seed) {
  VarSimSpec spec;
  spec.n_obs = n_obs;
  spec.seed = seed;
  VarRegime reg;
  // Largest eigenvalue is own + (n-1)*cross; scaling the cross terms keeps
  // the system stable at any dimension.
  reg.lag_coefs = {uniform_cross_matrix(n_vars, 0.35, 0.24 / n_vars)};
  reg.intercept = Eigen::VectorXd::Zero(n_vars);
  reg.sigma = correlated_sigma(n_vars, 0.3, 4e-4);
  reg.until = 1.0;
  spec.regimes = {std::move(reg)};
  return spec;
}

VarSimSpec preset_regime_shift(int n_vars, int n_obs, std::uint64_t seed) {
  VarSimSpec spec;
  spec.n_obs = n_obs;
  spec.seed = seed;
  VarRegime low;
  low.lag_coefs = {uniform_cross_matrix(n_vars, 0.45, 0.0)};
  low.intercept = Eigen::VectorXd::Zero(n_vars);
  low.sigma = Eigen::MatrixXd::Identity(n_vars, n_vars) * 4e-4;
  low.until = 0.5;
  VarRegime high;
  const double cross = 0.55 / n_vars;
  high.lag_coefs = {uniform_cross_matrix(n_vars, 0.30, cross)};
  high.intercept = Eigen::VectorXd::Zero(n_vars);
  high.sigma = correlated_sigma(n_vars, 0.6, 4e-4);
  high.until = 1.0;
  spec.regimes = {std::move(low), std::move(high)};
  return spec;
}

VarSimSpec preset_oneway(int n_vars, int n_obs, std::uint64_t seed) {
  VarSimSpec spec;
  spec.n_obs = n_obs;
  spec.seed = seed;
  VarRegime reg;
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n_vars, n_vars) * 0.5;
  phi.col(0).tail(n_vars - 1).setConstant(0.7);  // variable 1 drives the rest
  reg.lag_coefs = {phi};
  reg.intercept = Eigen::VectorXd::Zero(n_vars);
  reg.sigma = Eigen::MatrixXd::Identity(n_vars, n_vars) * 4e-4;
  reg.until = 1.0;
  spec.regimes = {std::move(reg)};
  return spec;
}

VarSimSpec preset_white_noise(int n_vars, int n_obs, std::uint64_t seed) {
  VarSimSpec spec;
  spec.n_obs = n_obs;
  spec.seed = seed;
  VarRegime reg;
  reg.lag_coefs = {Eigen::MatrixXd::Zero(n_vars, n_vars)};
  reg.intercept = Eigen::VectorXd::Zero(n_vars);
  reg.sigma = Eigen::MatrixXd::Identity(n_vars, n_vars) * 4e-4;
  reg.until = 1.0;
  spec.regimes = {std::move(reg)};
  return spec;
}

VarSimSpec make_preset(const std::string& name, int n_vars, int n_obs, std::uint64_t seed) {
  if (name == "constant") return preset_constant(n_vars, n_obs, seed);
  if (name == "regime-shift") return preset_regime_shift(n_vars, n_obs, seed);
  if (name == "oneway") return preset_oneway(n_vars, n_obs, seed);
  if (name == "white-noise") return preset_white_noise(n_vars, n_obs, seed);
  throw ConfigError("unknown preset '" + name +
                    "' (expected constant, regime-shift, oneway or white-noise)");
}

std::string write_truth_json(const VarSimResult& sim) {
  nlohmann::json j;
  j["industries"] = sim.panel.industries;
  j["points"] = nlohmann::json::array();
  auto matrix_to_json = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  for (const auto& pt : sim.truth) {
    nlohmann::json p;
    p["date"] = pt.date.to_string();
    p["u"] = pt.u;
    p["lag_coefs"] = nlohmann::json::array();
    for (const auto& m : pt.lag_coefs) p["lag_coefs"].push_back(matrix_to_json(m));
    p["sigma"] = matrix_to_json(pt.sigma);
    p["theta_tilde"] = matrix_to_json(pt.theta_tilde);
    p["total"] = pt.stats.total;
    p["to"] = std::vector<double>(pt.stats.to.data(), pt.stats.to.data() + pt.stats.to.size());
    p["from"] =
        std::vector<double>(pt.stats.from.data(), pt.stats.from.data() + pt.stats.from.size());
    p["net"] =
        std::vector<double>(pt.stats.net.data(), pt.stats.net.data() + pt.stats.net.size());
    p["agg"] =
        std::vector<double>(pt.stats.agg.data(), pt.stats.agg.data() + pt.stats.agg.size());
    j["points"].push_back(std::move(p));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Synthetic option chains
// ---------------------------------------------------------------------------

ChainSimResult simulate_chains(const ChainSimSpec& spec) {
  if (spec.n_firms < 1 || spec.n_industries < 1 || spec.n_days < 1)
    throw InputError("chain simulation needs firms, industries and days");
  if (spec.n_firms < spec.n_industries)
    throw InputError("need at least one firm per industry");
  if (!(spec.base_vol > 0)) throw InputError("base vol must be positive");

  const std::vector<Date> calendar = weekday_calendar(spec.start_date, spec.n_days);
  ChainSimResult out;

  for (int f = 0; f < spec.n_firms; ++f) {
    char firm_buf[16];
    std::snprintf(firm_buf, sizeof(firm_buf), "F%02d", f + 1);
    const std::string firm = firm_buf;
    const std::string industry = "IND" + std::to_string(f % spec.n_industries + 1);
    out.membership.push_back(
        {firm, industry, calendar.front(), calendar.back()});

    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(f)));
    double log_vol = std::log(spec.base_vol);
    double spot = spec.spot0 * (1.0 + 0.05 * (f % 5));
    double cap = 1e10 * (1.0 + f);

    const double t_years = spec.expiry_days / 365.0;
    for (int d = 0; d < spec.n_days; ++d) {
      const Date date = calendar[d];
      const double vol = std::exp(log_vol);

      OptionChain chain;
      chain.underlying_id = firm;
      chain.quote_date = date;
      chain.expiry_date = date.plus_days(spec.expiry_days);
      chain.spot = spot;
      chain.risk_free_rate = spec.rate;

      const double sd_step = vol * std::sqrt(t_years);
      const double step = spec.spot0 * spec.strike_step_frac;
      const double lo = spot * std::exp(-spec.strike_width_sds * sd_step);
      const double hi = spot * std::exp(spec.strike_width_sds * sd_step);
      for (double k = std::max(step, std::floor(lo / step) * step); k <= hi; k += step) {
        const double moneyness = std::abs(std::log(k / spot)) / sd_step;
        for (OptionKind kind : {OptionKind::call, OptionKind::put}) {
          const double price = bs_price(spot, k, spec.rate, t_years, vol, kind);
          OptionQuote q;
          q.strike = k;
          q.kind = kind;
          q.bid = std::max(0.0, price - 0.5 * spec.spread);
          q.ask = price + 0.5 * spec.spread;
          if (moneyness > spec.zero_bid_beyond_sds) q.bid = 0.0;
          chain.quotes.push_back(q);
        }
      }
      out.chains.push_back(std::move(chain));
      out.caps.push_back({firm, date, cap});
      out.true_vols.push_back({firm, date, vol});

      // Next day: mean-reverting log vol, lognormal spot and cap drift.
      log_vol += spec.vol_mean_revert * (std::log(spec.base_vol) - log_vol) +
                 spec.vol_log_sd / std::sqrt(252.0) * rng.normal();
      spot *= std::exp(vol / std::sqrt(252.0) * rng.normal());
      cap *= std::exp(0.01 * rng.normal());
    }
  }
  return out;
}

std::string write_chains_csv(const std::vector<OptionChain>& chains) {
  csv::Writer w({"quote_date", "expiry_date", "firm_id", "spot", "rate", "strike",
                 "kind", "bid", "ask"});
  for (const auto& chain : chains)
    for (const auto& q : chain.quotes)
      w.add_row({chain.quote_date.to_string(), chain.expiry_date.to_string(),
                 chain.underlying_id, csv::format_double(chain.spot),
                 csv::format_double(chain.risk_free_rate), csv::format_double(q.strike),
                 q.kind == OptionKind::call ? "call" : "put", csv::format_double(q.bid),
                 csv::format_double(q.ask)});
  return w.str();
}

std::string write_caps_csv(const std::vector<CapObservation>& caps) {
  csv::Writer w({"firm_id", "date", "market_cap"});
  for (const auto& c : caps)
    w.add_row({c.firm_id, c.date.to_string(), csv::format_double(c.market_cap)});
  return w.str();
}

std::string write_membership_csv(const std::vector<MembershipInterval>& membership) {
  csv::Writer w({"firm_id", "industry_id", "start", "end"});
  for (const auto& m : membership)
    w.add_row({m.firm_id, m.industry_id, m.start.to_string(), m.end.to_string()});
  return w.str();
}

}  // namespace uncnet
