#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "uncnet/dates.hpp"
#include "uncnet/options_iv.hpp"

namespace uncnet {

struct MembershipInterval {
  std::string firm_id;
  std::string industry_id;
  Date start;
  Date end;  // inclusive
};

struct CapObservation {
  std::string firm_id;
  Date date;
  double market_cap = 0;
};

/// Daily industry uncertainty panel: T dates by N industries, no holes.
struct IndustryPanel {
  std::vector<Date> dates;
  std::vector<std::string> industries;
  Eigen::MatrixXd values;  // T x N

  std::size_t n_dates() const { return dates.size(); }
  std::size_t n_industries() const { return industries.size(); }
  std::size_t industry_index(const std::string& id) const;
};

/// Normalizes positive caps into weights summing to one.
std::vector<double> cap_weights(const std::vector<double>& caps);

/// Cap-weighted average of member vols; both maps must cover the same firms.
double aggregate_industry(const std::map<std::string, double>& firm_vix,
                          const std::map<std::string, double>& weights);
double aggregate_industry(const std::vector<double>& vix,
                          const std::vector<double>& weights);

struct PanelPolicy {
  int fill_limit = 5;  // max trading days a firm vol or cap may be carried
};

/// Assembles the panel: membership intervals select firms per date, caps are
/// turned into weights, firm vols are averaged. Firm vols and caps are
/// forward-filled along the trading calendar up to the fill limit. Dates
/// before every industry has data are dropped; a hole after that throws
/// UnfillableGap.
IndustryPanel build_panel(const std::vector<FirmVixPoint>& firm_vix,
                          const std::vector<CapObservation>& caps,
                          const std::vector<MembershipInterval>& membership,
                          const PanelPolicy& policy = {});

std::vector<CapObservation> read_caps_csv(const std::filesystem::path& path);
std::vector<MembershipInterval> read_membership_csv(const std::filesystem::path& path);
std::string write_panel_csv(const IndustryPanel& panel);
IndustryPanel read_panel_csv(const std::filesystem::path& path);

}  // namespace uncnet
