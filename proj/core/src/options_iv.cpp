#include "uncnet/options_iv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"

namespace uncnet {
namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Per-strike view of a chain after dedup: at most one call and one put.
struct StrikeRow {
  double strike = 0;
  std::optional<OptionQuote> call;
  std::optional<OptionQuote> put;
};

std::vector<StrikeRow> strike_ladder(const OptionChain& chain) {
  std::vector<OptionQuote> quotes = chain.quotes;
  // Canonical order makes dedup independent of input row order.
  std::sort(quotes.begin(), quotes.end(), [](const OptionQuote& a, const OptionQuote& b) {
    return std::tie(a.strike, a.kind, a.bid, a.ask) < std::tie(b.strike, b.kind, b.bid, b.ask);
  });
  std::vector<StrikeRow> ladder;
  for (const auto& q : quotes) {
    if (!(q.strike > 0)) throw DomainError("strike must be positive");
    if (q.bid < 0 || q.ask < q.bid) throw InputError("crossed or negative quote at strike " +
                                                     csv::format_double(q.strike));
    if (ladder.empty() || ladder.back().strike != q.strike)
      ladder.push_back(StrikeRow{q.strike, {}, {}});
    auto& slot = q.kind == OptionKind::call ? ladder.back().call : ladder.back().put;
    if (!slot) slot = q;  // duplicates beyond the first are dropped
  }
  return ladder;
}

}  // namespace

double bs_price(double spot, double strike, double rate, double years,
                double vol, OptionKind kind) {
  if (!(spot > 0) || !(strike > 0) || !(vol > 0) || !(years > 0))
    throw DomainError("bs_price requires positive spot, strike, vol and maturity");
  const double st = vol * std::sqrt(years);
  const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * years) / st;
  const double d2 = d1 - st;
  const double disc = std::exp(-rate * years);
  if (kind == OptionKind::call)
    return spot * norm_cdf(d1) - strike * disc * norm_cdf(d2);
  return strike * disc * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

double forward_price(const OptionChain& chain) {
  if (!(chain.expiry_date > chain.quote_date))
    throw InputError("expiry must be after the quote date");
  const auto ladder = strike_ladder(chain);
  double best_gap = 0, best_strike = 0, best_diff = 0;
  bool found = false;
  for (const auto& row : ladder) {
    if (!row.call || !row.put) continue;
    const double c = row.call->mid(), p = row.put->mid();
    if (!(c > 0) || !(p > 0)) continue;
    const double gap = std::abs(c - p);
    if (!found || gap < best_gap) {
      found = true;
      best_gap = gap;
      best_strike = row.strike;
      best_diff = c - p;
    }
  }
  if (!found)
    throw NoParityStrike("no strike quotes both a call and a put with positive mids");
  const double t = chain.years_to_expiry();
  return std::exp(chain.risk_free_rate * t) * best_diff + best_strike;
}

OtmSelection select_otm_quotes(const OptionChain& chain, double forward,
                               const IvConfig& cfg) {
  const auto ladder = strike_ladder(chain);
  if (ladder.empty()) throw EmptySelection("chain has no quotes");

  // k0: largest strike at or below the forward.
  std::ptrdiff_t i0 = -1;
  for (std::size_t i = 0; i < ladder.size(); ++i)
    if (ladder[i].strike <= forward) i0 = static_cast<std::ptrdiff_t>(i);
  if (i0 < 0) throw NoK0("all strikes exceed the forward level");

  OtmSelection sel;
  sel.k0 = ladder[i0].strike;

  std::vector<OtmQuote> below, above;

  // Put wing, walking down from k0. Missing quotes count like zero bids
  // toward the stop run.
  int zero_run = 0;
  for (std::ptrdiff_t i = i0 - 1; i >= 0 && zero_run < cfg.zero_bid_stop_run; --i) {
    const auto& put = ladder[i].put;
    if (put && put->bid > 0) {
      zero_run = 0;
      below.push_back({ladder[i].strike, put->mid()});
    } else {
      ++zero_run;
    }
  }
  std::reverse(below.begin(), below.end());

  // Call wing, walking up from k0.
  zero_run = 0;
  for (std::size_t i = static_cast<std::size_t>(i0) + 1;
       i < ladder.size() && zero_run < cfg.zero_bid_stop_run; ++i) {
    const auto& call = ladder[i].call;
    if (call && call->bid > 0) {
      zero_run = 0;
      above.push_back({ladder[i].strike, call->mid()});
    } else {
      ++zero_run;
    }
  }

  // At k0 both sides are averaged; with one side quoted, that mid is used.
  const auto& at = ladder[i0];
  const bool call_live = at.call && at.call->bid > 0;
  const bool put_live = at.put && at.put->bid > 0;
  std::optional<double> k0_quote;
  if (call_live && put_live)
    k0_quote = 0.5 * (at.call->mid() + at.put->mid());
  else if (call_live)
    k0_quote = at.call->mid();
  else if (put_live)
    k0_quote = at.put->mid();

  sel.quotes = std::move(below);
  if (k0_quote) sel.quotes.push_back({sel.k0, *k0_quote});
  sel.quotes.insert(sel.quotes.end(), above.begin(), above.end());
  if (sel.quotes.empty())
    throw EmptySelection("no strike survived the zero-bid filter");
  return sel;
}

double implied_variance(const OptionChain& chain, const IvConfig& cfg) {
  const double forward = forward_price(chain);
  const OtmSelection sel = select_otm_quotes(chain, forward, cfg);
  const std::size_t n = sel.quotes.size();
  if (n < static_cast<std::size_t>(cfg.min_strikes))
    throw EmptySelection("only " + std::to_string(n) + " strikes survive, need " +
                         std::to_string(cfg.min_strikes));

  const double growth = std::exp(chain.risk_free_rate * chain.years_to_expiry());
  double strip = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = sel.quotes[i].strike;
    double dk;
    if (i == 0)
      dk = sel.quotes[1].strike - k;
    else if (i == n - 1)
      dk = k - sel.quotes[n - 2].strike;
    else
      dk = 0.5 * (sel.quotes[i + 1].strike - sel.quotes[i - 1].strike);
    strip += dk / (k * k) * growth * sel.quotes[i].quote;
  }
  const double moneyness = forward / sel.k0 - 1.0;
  const double sigma2 = 2.0 * strip - moneyness * moneyness;
  if (!(sigma2 > 0))
    throw NegativeVariance("strip variance is not positive (corrupt quotes?)");
  return sigma2;
}

double annualize_vix(double sigma2, int horizon_days) {
  if (sigma2 < 0) throw NegativeInput("variance must be nonnegative");
  if (horizon_days <= 0) throw NegativeInput("horizon must be positive");
  return std::sqrt(365.0 / horizon_days * sigma2);
}

double chain_vix(const OptionChain& chain, const IvConfig& cfg) {
  return annualize_vix(implied_variance(chain, cfg), cfg.target_days);
}

// ---------------------------------------------------------------------------
// File interfaces
// ---------------------------------------------------------------------------

ChainFile read_chain_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_qdate = table.column("quote_date");
  const std::size_t c_edate = table.column("expiry_date");
  const std::size_t c_firm = table.column("firm_id");
  const std::size_t c_spot = table.column("spot");
  const std::size_t c_rate = table.column("rate");
  const std::size_t c_strike = table.column("strike");
  const std::size_t c_kind = table.column("kind");
  const std::size_t c_bid = table.column("bid");
  const std::size_t c_ask = table.column("ask");

  ChainFile out;
  if (table.rows.empty()) throw EmptyInput("'" + path.string() + "' has no data rows");

  using Key = std::tuple<std::string, Date, Date>;
  std::map<Key, OptionChain> groups;
  for (const auto& row : table.rows) {
    try {
      if (row.fields.size() != table.header.size())
        throw InputError("wrong field count");
      const Date qd = Date::parse(row.fields[c_qdate]);
      const Date ed = Date::parse(row.fields[c_edate]);
      if (!(ed > qd)) throw InputError("expiry not after quote date");
      const std::string firm = row.fields[c_firm];
      if (firm.empty()) throw InputError("empty firm_id");
      const double spot = csv::parse_double(row.fields[c_spot]);
      if (!(spot > 0)) throw InputError("spot must be positive");
      const double rate = csv::parse_double(row.fields[c_rate]);
      OptionQuote q;
      q.strike = csv::parse_double(row.fields[c_strike]);
      if (!(q.strike > 0)) throw InputError("strike must be positive");
      const std::string& kind = row.fields[c_kind];
      if (kind == "call")
        q.kind = OptionKind::call;
      else if (kind == "put")
        q.kind = OptionKind::put;
      else
        throw InputError("kind must be 'call' or 'put'");
      q.bid = csv::parse_double(row.fields[c_bid]);
      q.ask = csv::parse_double(row.fields[c_ask]);
      if (q.bid < 0 || q.ask < q.bid) throw InputError("crossed or negative quote");

      auto [it, fresh] = groups.try_emplace(Key{firm, qd, ed});
      OptionChain& chain = it->second;
      if (fresh) {
        chain.underlying_id = firm;
        chain.quote_date = qd;
        chain.expiry_date = ed;
        chain.spot = spot;
        chain.risk_free_rate = rate;
      } else if (chain.spot != spot || chain.risk_free_rate != rate) {
        throw InputError("spot/rate disagree within one chain");
      }
      chain.quotes.push_back(q);
    } catch (const InputError& e) {
      out.issues.push_back({row.line, e.what()});
    }
  }
  out.chains.reserve(groups.size());
  for (auto& [key, chain] : groups) out.chains.push_back(std::move(chain));
  return out;
}

VixRunResult compute_firm_vix(const std::vector<OptionChain>& chains,
                              const IvConfig& cfg) {
  // Keep one expiry per (firm, date): closest to target, ties to the longer.
  using Key = std::pair<std::string, Date>;
  std::map<Key, const OptionChain*> chosen;
  for (const auto& chain : chains) {
    const Key key{chain.underlying_id, chain.quote_date};
    auto [it, fresh] = chosen.try_emplace(key, &chain);
    if (fresh) continue;
    const int incumbent = it->second->days_to_expiry();
    const int candidate = chain.days_to_expiry();
    const int gap_i = std::abs(incumbent - cfg.target_days);
    const int gap_c = std::abs(candidate - cfg.target_days);
    if (gap_c < gap_i || (gap_c == gap_i && candidate > incumbent))
      it->second = &chain;
  }

  VixRunResult out;
  for (const auto& [key, chain] : chosen) {
    try {
      out.points.push_back({key.first, key.second, chain_vix(*chain, cfg)});
    } catch (const Error& e) {
      out.issues.push_back({0, key.first + " " + key.second.to_string() + ": " + e.what()});
    }
  }
  return out;
}

std::string write_firm_vix_csv(const std::vector<FirmVixPoint>& points) {
  csv::Writer w({"firm_id", "date", "vix"});
  for (const auto& p : points)
    w.add_row({p.firm_id, p.date.to_string(), csv::format_double(p.vix)});
  return w.str();
}

std::vector<FirmVixPoint> read_firm_vix_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_firm = table.column("firm_id");
  const std::size_t c_date = table.column("date");
  const std::size_t c_vix = table.column("vix");
  std::vector<FirmVixPoint> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    FirmVixPoint p;
    p.firm_id = row.fields.at(c_firm);
    p.date = Date::parse(row.fields.at(c_date));
    p.vix = csv::parse_double(row.fields.at(c_vix));
    if (!(p.vix > 0) || !std::isfinite(p.vix))
      throw InputError("vix must be positive and finite (line " +
                       std::to_string(row.line) + ")");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace uncnet
