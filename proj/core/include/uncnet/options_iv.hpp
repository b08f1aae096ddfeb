#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uncnet/dates.hpp"

namespace uncnet {

enum class OptionKind { call, put };

struct OptionQuote {
  double strike = 0;
  double bid = 0;
  double ask = 0;
  OptionKind kind = OptionKind::call;

  double mid() const { return 0.5 * (bid + ask); }
};

/// All quotes for one underlying, one quote date, one expiry.
struct OptionChain {
  std::string underlying_id;
  Date quote_date;
  Date expiry_date;
  double spot = 0;
  double risk_free_rate = 0;
  std::vector<OptionQuote> quotes;

  int days_to_expiry() const { return expiry_date - quote_date; }
  double years_to_expiry() const { return days_to_expiry() / 365.0; }
};

struct FirmVixPoint {
  std::string firm_id;
  Date date;
  double vix = 0;  // annualized decimal, e.g. 0.25
};

/// Quote-filtering knobs. Defaults follow the CBOE white-paper rules.
struct IvConfig {
  int min_strikes = 3;       // minimum surviving strikes for a variance
  int zero_bid_stop_run = 2; // consecutive zero-bid strikes that end a wing
  int target_days = 30;      // preferred days-to-expiry and vol horizon
};

/// Closed-form European option price. Doubles as the test oracle for the
/// whole module.
double bs_price(double spot, double strike, double rate, double years,
                double vol, OptionKind kind);

/// Forward level implied by put-call parity at the strike where call and
/// put mids are closest. Throws NoParityStrike when no strike carries both.
double forward_price(const OptionChain& chain);

struct OtmQuote {
  double strike = 0;
  double quote = 0;  // mid, or the call/put mid average at k0
};

struct OtmSelection {
  double k0 = 0;  // largest strike <= forward
  std::vector<OtmQuote> quotes;  // ascending strikes
};

/// Out-of-the-money strip: puts below k0, calls above, both averaged at k0.
/// Zero-bid quotes are dropped and each wing stops after
/// `zero_bid_stop_run` consecutive zero bids.
OtmSelection select_otm_quotes(const OptionChain& chain, double forward,
                               const IvConfig& cfg = {});

/// Discretized strip variance cumulated over the chain horizon (not
/// annualized):
///   2 sum dK_i/K_i^2 e^(rT) Q(K_i) - (F/K0 - 1)^2
/// with central strike steps inside the strip and one-sided at the wings.
double implied_variance(const OptionChain& chain, const IvConfig& cfg = {});

/// sqrt((365/horizon_days) * sigma2); sigma2 >= 0 required.
double annualize_vix(double sigma2, int horizon_days = 30);

/// Convenience: forward -> selection -> variance -> annualized vol.
double chain_vix(const OptionChain& chain, const IvConfig& cfg = {});

// ---------------------------------------------------------------------------
// File interfaces
// ---------------------------------------------------------------------------

struct RowIssue {
  std::size_t line = 0;  // 0 when the issue is not tied to one row
  std::string message;
};

struct ChainFile {
  std::vector<OptionChain> chains;  // grouped by (firm, quote date, expiry)
  std::vector<RowIssue> issues;     // malformed rows, skipped
};

/// Reads the option-chain CSV (columns: quote_date, expiry_date, firm_id,
/// spot, rate, strike, kind, bid, ask). Malformed rows are reported in
/// `issues` and skipped; chains are sorted by (firm, quote date, expiry).
ChainFile read_chain_csv(const std::filesystem::path& path);

struct VixRunResult {
  std::vector<FirmVixPoint> points;
  std::vector<RowIssue> issues;
};

/// Per (firm, date): keeps the expiry closest to cfg.target_days (ties to
/// the longer one) and computes the annualized vol. Chains that fail are
/// reported and skipped.
VixRunResult compute_firm_vix(const std::vector<OptionChain>& chains,
                              const IvConfig& cfg = {});

std::string write_firm_vix_csv(const std::vector<FirmVixPoint>& points);
std::vector<FirmVixPoint> read_firm_vix_csv(const std::filesystem::path& path);

}  // namespace uncnet
