#include "uncnet/cycles.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"

namespace uncnet {

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::inversion: return "inversion";
    case Phase::recession: return "recession";
    case Phase::expansion: return "expansion";
  }
  throw InputError("unknown phase");
}

Phase parse_phase(const std::string& name) {
  if (name == "inversion") return Phase::inversion;
  if (name == "recession") return Phase::recession;
  if (name == "expansion") return Phase::expansion;
  throw InputError("phase must be inversion, recession or expansion, got '" + name + "'");
}

void PhaseCalendar::validate() const {
  if (intervals.empty()) throw EmptyInput("phase calendar has no intervals");
  std::vector<PhaseInterval> sorted = intervals;
  std::sort(sorted.begin(), sorted.end(),
            [](const PhaseInterval& a, const PhaseInterval& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].start > sorted[i].end)
      throw InputError("calendar interval starts after it ends");
    if (i > 0 && sorted[i].start <= sorted[i - 1].end)
      throw InputError("calendar intervals overlap at " + sorted[i].start.to_string());
  }
}

Phase PhaseCalendar::phase_at(Date d) const {
  for (const auto& iv : intervals)
    if (d >= iv.start && d <= iv.end) return iv.phase;
  throw InputError("date " + d.to_string() + " is outside the phase calendar");
}

PhaseCalendar default_us_calendar(Date sample_start, Date sample_end) {
  if (sample_start > sample_end) throw InputError("sample start after end");
  struct Fixed { int y0, m0, d0, y1, m1, d1; Phase phase; };
  // Feb 2020 onward is a recession with no dated end; it absorbs the rest
  // of the sample.
  const std::vector<Fixed> fixed = {
      {2000, 7, 1, 2001, 3, 31, Phase::inversion},
      {2001, 4, 1, 2001, 11, 30, Phase::recession},
      {2006, 9, 1, 2007, 12, 31, Phase::inversion},
      {2008, 1, 1, 2009, 6, 30, Phase::recession},
      {2020, 2, 1, 9999, 12, 31, Phase::recession},
  };
  PhaseCalendar cal;
  Date cursor = sample_start;
  for (const auto& f : fixed) {
    const Date s = Date::from_ymd(f.y0, f.m0, f.d0);
    const Date e = Date::from_ymd(f.y1, f.m1, f.d1);
    if (e < sample_start || s > sample_end) continue;
    const Date clip_s = std::max(s, sample_start);
    const Date clip_e = std::min(e, sample_end);
    if (cursor < clip_s)
      cal.intervals.push_back({cursor, clip_s.plus_days(-1), Phase::expansion});
    cal.intervals.push_back({clip_s, clip_e, f.phase});
    cursor = clip_e.plus_days(1);
    if (cursor > sample_end) break;
  }
  if (cursor <= sample_end)
    cal.intervals.push_back({cursor, sample_end, Phase::expansion});
  cal.validate();
  return cal;
}

PhaseCalendar read_calendar_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_start = table.column("start");
  const std::size_t c_end = table.column("end");
  const std::size_t c_phase = table.column("phase");
  PhaseCalendar cal;
  for (const auto& row : table.rows) {
    PhaseInterval iv;
    iv.start = Date::parse(row.fields.at(c_start));
    iv.end = Date::parse(row.fields.at(c_end));
    iv.phase = parse_phase(row.fields.at(c_phase));
    cal.intervals.push_back(iv);
  }
  cal.validate();
  return cal;
}

std::string write_calendar_csv(const PhaseCalendar& cal) {
  csv::Writer w({"start", "end", "phase"});
  for (const auto& iv : cal.intervals)
    w.add_row({iv.start.to_string(), iv.end.to_string(), phase_name(iv.phase)});
  return w.str();
}

const PhaseAverages::Row& PhaseAverages::total_row() const {
  for (const auto& row : rows)
    if (row.phase == "total") return row;
  throw InputError("phase table has no total row");
}

PhaseAverages phase_averages(const ConnectednessSeries& series, const PhaseCalendar& cal) {
  if (series.points.empty()) throw EmptyInput("connectedness series is empty");
  cal.validate();
  const std::size_t n = series.industries.size();

  struct Acc {
    std::size_t days = 0;
    std::vector<double> net, agg;
  };
  std::vector<Acc> acc(4);  // inversion, recession, expansion, total
  for (auto& a : acc) {
    a.net.assign(n, 0.0);
    a.agg.assign(n, 0.0);
  }
  for (const auto& pt : series.points) {
    const std::size_t slot = static_cast<std::size_t>(cal.phase_at(pt.date));
    for (std::size_t which : {slot, std::size_t{3}}) {
      ++acc[which].days;
      for (std::size_t j = 0; j < n; ++j) {
        acc[which].net[j] += pt.net[j].median;
        acc[which].agg[j] += pt.agg[j].median;
      }
    }
  }
  const char* names[4] = {"inversion", "recession", "expansion", "total"};
  for (std::size_t s = 0; s < 3; ++s)
    if (acc[s].days == 0)
      throw EmptyPhase(std::string(names[s]) + " phase has no observations");

  PhaseAverages table;
  table.industries = series.industries;
  for (std::size_t s = 0; s < 4; ++s) {
    PhaseAverages::Row row;
    row.phase = names[s];
    row.n_days = acc[s].days;
    row.net.resize(n);
    row.agg.resize(n);
    row.agg_share.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      row.net[j] = acc[s].net[j] / static_cast<double>(acc[s].days);
      row.agg[j] = acc[s].agg[j] / static_cast<double>(acc[s].days);
    }
    const double agg_total = std::accumulate(row.agg.begin(), row.agg.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      row.agg_share[j] = agg_total > 0 ? 100.0 * row.agg[j] / agg_total : 0.0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string write_phase_averages_csv(const PhaseAverages& table) {
  csv::Writer w({"phase", "industry", "net", "agg", "agg_share"});
  for (const auto& row : table.rows)
    for (std::size_t j = 0; j < table.industries.size(); ++j)
      w.add_row({row.phase, table.industries[j], csv::format_double(row.net[j]),
                 csv::format_double(row.agg[j]), csv::format_double(row.agg_share[j])});
  return w.str();
}

HubClassification classify_hubs(const std::vector<std::string>& industries,
                                const std::vector<double>& total_agg,
                                const HubRule& rule) {
  const std::size_t n = industries.size();
  if (total_agg.size() != n) throw InputError("agg vector does not match industries");
  if (rule.top_k < 0 || rule.bottom_k < 0 ||
      rule.top_k + rule.bottom_k > static_cast<int>(n))
    throw RuleExceedsUniverse("top_k + bottom_k exceeds the industry count");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (total_agg[a] != total_agg[b]) return total_agg[a] > total_agg[b];
    return industries[a] < industries[b];
  });

  HubClassification cls;
  cls.rule = rule;
  for (std::size_t r = 0; r < n; ++r) {
    const std::string& id = industries[order[r]];
    if (r < static_cast<std::size_t>(rule.top_k))
      cls.hubs.push_back(id);
    else if (r >= n - static_cast<std::size_t>(rule.bottom_k))
      cls.non_hubs.push_back(id);
    else
      cls.middle.push_back(id);
  }
  std::sort(cls.hubs.begin(), cls.hubs.end());
  std::sort(cls.non_hubs.begin(), cls.non_hubs.end());
  std::sort(cls.middle.begin(), cls.middle.end());
  return cls;
}

HubClassification classify_hubs(const PhaseAverages& table, const HubRule& rule) {
  return classify_hubs(table.industries, table.total_row().agg, rule);
}

IndustryPanel subnetwork_panel(const IndustryPanel& panel,
                               const HubClassification& cls, HubSide side) {
  const auto& keep = side == HubSide::hubs ? cls.hubs : cls.non_hubs;
  if (keep.empty()) throw EmptySelection("selected hub side is empty");
  IndustryPanel out;
  out.dates = panel.dates;
  out.industries = keep;
  out.values.resize(panel.values.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    out.values.col(static_cast<Eigen::Index>(j)) =
        panel.values.col(static_cast<Eigen::Index>(panel.industry_index(keep[j])));
  return out;
}

std::string write_classification_json(const HubClassification& cls) {
  nlohmann::json j;
  j["rule"] = {{"metric", "agg"}, {"top_k", cls.rule.top_k}, {"bottom_k", cls.rule.bottom_k}};
  j["hubs"] = cls.hubs;
  j["non_hubs"] = cls.non_hubs;
  j["middle"] = cls.middle;
  return j.dump(2) + "\n";
}

HubClassification read_classification_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad classification json: " + std::string(e.what()));
  }
  HubClassification cls;
  cls.rule.top_k = j.at("rule").at("top_k").get<int>();
  cls.rule.bottom_k = j.at("rule").at("bottom_k").get<int>();
  cls.hubs = j.at("hubs").get<std::vector<std::string>>();
  cls.non_hubs = j.at("non_hubs").get<std::vector<std::string>>();
  cls.middle = j.at("middle").get<std::vector<std::string>>();
  return cls;
}

}  // namespace uncnet
