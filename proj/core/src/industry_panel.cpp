#include "uncnet/industry_panel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"

namespace uncnet {

std::size_t IndustryPanel::industry_index(const std::string& id) const {
  for (std::size_t i = 0; i < industries.size(); ++i)
    if (industries[i] == id) return i;
  throw InputError("unknown industry '" + id + "'");
}

std::vector<double> cap_weights(const std::vector<double>& caps) {
  if (caps.empty()) throw EmptyIndustryDay("no member firm has a market cap");
  double total = 0;
  for (double c : caps) {
    if (!(c > 0)) throw InputError("market caps must be positive");
    total += c;
  }
  std::vector<double> w(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) w[i] = caps[i] / total;
  return w;
}

double aggregate_industry(const std::vector<double>& vix,
                          const std::vector<double>& weights) {
  if (vix.size() != weights.size())
    throw MismatchedFirms("vol and weight vectors differ in length");
  double out = 0;
  for (std::size_t i = 0; i < vix.size(); ++i) out += weights[i] * vix[i];
  return out;
}

double aggregate_industry(const std::map<std::string, double>& firm_vix,
                          const std::map<std::string, double>& weights) {
  if (firm_vix.size() != weights.size())
    throw MismatchedFirms("vol and weight maps cover different firm sets");
  double out = 0;
  for (const auto& [firm, w] : weights) {
    auto it = firm_vix.find(firm);
    if (it == firm_vix.end())
      throw MismatchedFirms("no vol for weighted firm '" + firm + "'");
    out += w * it->second;
  }
  return out;
}

namespace {

/// Forward-fills per-firm observations onto the calendar: filled[i] holds
/// the latest value observed within `limit` calendar steps back of date i.
std::vector<double> forward_fill(const std::vector<Date>& calendar,
                                 const std::map<Date, double>& obs, int limit) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> filled(calendar.size(), nan);
  int staleness = limit + 1;
  double last = nan;
  for (std::size_t i = 0; i < calendar.size(); ++i) {
    auto it = obs.find(calendar[i]);
    if (it != obs.end()) {
      last = it->second;
      staleness = 0;
    } else {
      ++staleness;
    }
    if (staleness <= limit) filled[i] = last;
  }
  return filled;
}

}  // namespace

IndustryPanel build_panel(const std::vector<FirmVixPoint>& firm_vix,
                          const std::vector<CapObservation>& caps,
                          const std::vector<MembershipInterval>& membership,
                          const PanelPolicy& policy) {
  if (firm_vix.empty()) throw EmptyInput("no firm vol observations");
  if (membership.empty()) throw EmptyInput("no membership intervals");

  // Validate membership: intervals per firm must not overlap.
  std::map<std::string, std::vector<const MembershipInterval*>> by_firm;
  for (const auto& m : membership) {
    if (m.start > m.end)
      throw InputError("membership interval for '" + m.firm_id + "' has start after end");
    by_firm[m.firm_id].push_back(&m);
  }
  for (auto& [firm, spans] : by_firm) {
    std::sort(spans.begin(), spans.end(),
              [](const MembershipInterval* a, const MembershipInterval* b) {
                return a->start < b->start;
              });
    for (std::size_t i = 1; i < spans.size(); ++i)
      if (spans[i]->start <= spans[i - 1]->end)
        throw OverlappingMembership("firm '" + firm + "' has overlapping intervals");
  }

  // Trading calendar = union of firm vol dates.
  std::set<Date> date_set;
  std::map<std::string, std::map<Date, double>> vol_obs;
  for (const auto& p : firm_vix) {
    if (!(p.vix > 0) || !std::isfinite(p.vix))
      throw InputError("firm vol must be positive and finite");
    date_set.insert(p.date);
    vol_obs[p.firm_id][p.date] = p.vix;
  }
  const std::vector<Date> calendar(date_set.begin(), date_set.end());

  std::map<std::string, std::map<Date, double>> cap_obs;
  for (const auto& c : caps) {
    if (!(c.market_cap > 0)) throw InputError("market caps must be positive");
    cap_obs[c.firm_id][c.date] = c.market_cap;
  }

  std::set<std::string> industry_set;
  for (const auto& m : membership) industry_set.insert(m.industry_id);
  const std::vector<std::string> industries(industry_set.begin(), industry_set.end());

  // Filled series for every firm that can ever matter.
  std::map<std::string, std::vector<double>> vol_filled, cap_filled;
  for (const auto& [firm, obs] : vol_obs)
    vol_filled[firm] = forward_fill(calendar, obs, policy.fill_limit);
  for (const auto& [firm, obs] : cap_obs)
    cap_filled[firm] = forward_fill(calendar, obs, policy.fill_limit);

  // Per date and industry, the contributing firms.
  const std::size_t n_ind = industries.size();
  Eigen::MatrixXd raw(calendar.size(), n_ind);
  std::vector<std::vector<bool>> computable(n_ind, std::vector<bool>(calendar.size(), false));

  for (std::size_t j = 0; j < n_ind; ++j) {
    for (std::size_t i = 0; i < calendar.size(); ++i) {
      const Date d = calendar[i];
      std::vector<double> member_caps, member_vols;
      for (const auto& m : membership) {
        if (m.industry_id != industries[j] || d < m.start || d > m.end) continue;
        auto vit = vol_filled.find(m.firm_id);
        auto cit = cap_filled.find(m.firm_id);
        if (vit == vol_filled.end() || cit == cap_filled.end()) continue;
        const double vol = vit->second[i];
        const double cap = cit->second[i];
        if (std::isnan(vol) || std::isnan(cap)) continue;
        member_vols.push_back(vol);
        member_caps.push_back(cap);
      }
      if (member_vols.empty()) continue;
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          aggregate_industry(member_vols, cap_weights(member_caps));
      computable[j][i] = true;
    }
  }

  // Leading dates before every industry has data are trimmed; any hole
  // after that is a data problem the caller has to fix explicitly.
  std::size_t start = 0;
  while (start < calendar.size()) {
    bool all = true;
    for (std::size_t j = 0; j < n_ind; ++j) all = all && computable[j][start];
    if (all) break;
    ++start;
  }
  if (start == calendar.size())
    throw UnfillableGap("no date has all industries computable");
  for (std::size_t i = start; i < calendar.size(); ++i)
    for (std::size_t j = 0; j < n_ind; ++j)
      if (!computable[j][i])
        throw UnfillableGap("industry '" + industries[j] + "' not computable on " +
                            calendar[i].to_string() + " (fill limit " +
                            std::to_string(policy.fill_limit) + ")");

  IndustryPanel panel;
  panel.dates.assign(calendar.begin() + static_cast<std::ptrdiff_t>(start), calendar.end());
  panel.industries = industries;
  panel.values = raw.bottomRows(raw.rows() - static_cast<Eigen::Index>(start));
  return panel;
}

std::vector<CapObservation> read_caps_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_firm = table.column("firm_id");
  const std::size_t c_date = table.column("date");
  const std::size_t c_cap = table.column("market_cap");
  std::vector<CapObservation> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    CapObservation c;
    c.firm_id = row.fields.at(c_firm);
    c.date = Date::parse(row.fields.at(c_date));
    c.market_cap = csv::parse_double(row.fields.at(c_cap));
    if (!(c.market_cap > 0))
      throw InputError("market_cap must be positive (line " + std::to_string(row.line) + ")");
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<MembershipInterval> read_membership_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_firm = table.column("firm_id");
  const std::size_t c_ind = table.column("industry_id");
  const std::size_t c_start = table.column("start");
  const std::size_t c_end = table.column("end");
  std::vector<MembershipInterval> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    MembershipInterval m;
    m.firm_id = row.fields.at(c_firm);
    m.industry_id = row.fields.at(c_ind);
    m.start = Date::parse(row.fields.at(c_start));
    m.end = Date::parse(row.fields.at(c_end));
    if (m.start > m.end)
      throw InputError("interval start after end (line " + std::to_string(row.line) + ")");
    out.push_back(std::move(m));
  }
  return out;
}

std::string write_panel_csv(const IndustryPanel& panel) {
  std::vector<std::string> header{"date"};
  header.insert(header.end(), panel.industries.begin(), panel.industries.end());
  csv::Writer w(std::move(header));
  for (std::size_t i = 0; i < panel.n_dates(); ++i) {
    std::vector<std::string> row{panel.dates[i].to_string()};
    for (std::size_t j = 0; j < panel.n_industries(); ++j)
      row.push_back(csv::format_double(
          panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    w.add_row(std::move(row));
  }
  return w.str();
}

IndustryPanel read_panel_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header.empty() || table.header[0] != "date")
    throw InputError("panel csv must start with a 'date' column");
  if (table.header.size() < 2) throw InputError("panel csv has no industries");
  IndustryPanel panel;
  panel.industries.assign(table.header.begin() + 1, table.header.end());
  panel.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                      static_cast<Eigen::Index>(panel.industries.size()));
  Date prev;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.fields.size() != table.header.size())
      throw InputError("wrong field count (line " + std::to_string(row.line) + ")");
    const Date d = Date::parse(row.fields[0]);
    if (i > 0 && !(d > prev))
      throw InputError("panel dates must be strictly increasing (line " +
                       std::to_string(row.line) + ")");
    prev = d;
    panel.dates.push_back(d);
    for (std::size_t j = 0; j < panel.industries.size(); ++j) {
      const double v = csv::parse_double(row.fields[j + 1]);
      if (!(v > 0) || !std::isfinite(v))
        throw InputError("panel values must be positive (line " +
                         std::to_string(row.line) + ")");
      panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  if (panel.dates.empty()) throw EmptyInput("panel csv has no rows");
  return panel;
}

}  // namespace uncnet
