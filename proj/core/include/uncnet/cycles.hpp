#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uncnet/dates.hpp"
#include "uncnet/industry_panel.hpp"
#include "uncnet/network.hpp"

namespace uncnet {

enum class Phase { inversion, recession, expansion };

std::string phase_name(Phase p);
Phase parse_phase(const std::string& name);

struct PhaseInterval {
  Date start;
  Date end;  // inclusive
  Phase phase = Phase::expansion;
};

struct PhaseCalendar {
  std::vector<PhaseInterval> intervals;

  /// Throws when intervals overlap or are malformed.
  void validate() const;
  /// Phase covering the date; throws when the date is uncovered.
  Phase phase_at(Date d) const;
};

/// The default U.S. calendar: yield-curve inversions Jul 2000 - Mar 2001 and
/// Sep 2006 - Dec 2007; recessions Apr 2001 - Nov 2001, Jan 2008 - Jun 2009
/// and Feb 2020 onward; expansion elsewhere. Clipped to the given span.
PhaseCalendar default_us_calendar(Date sample_start, Date sample_end);

PhaseCalendar read_calendar_csv(const std::filesystem::path& path);
std::string write_calendar_csv(const PhaseCalendar& cal);

/// Per-phase means of the NET and AGG medians plus each industry's share of
/// total AGG, with a whole-sample row appended.
struct PhaseAverages {
  struct Row {
    std::string phase;  // "inversion", "recession", "expansion", "total"
    std::size_t n_days = 0;
    std::vector<double> net, agg, agg_share;
  };
  std::vector<std::string> industries;
  std::vector<Row> rows;

  const Row& total_row() const;
};

PhaseAverages phase_averages(const ConnectednessSeries& series, const PhaseCalendar& cal);

std::string write_phase_averages_csv(const PhaseAverages& table);

struct HubRule {
  int top_k = 5;
  int bottom_k = 4;
};

inline HubRule strict_hub_rule() { return {3, 3}; }

struct HubClassification {
  std::vector<std::string> hubs;      // alphabetical
  std::vector<std::string> non_hubs;  // alphabetical
  std::vector<std::string> middle;    // alphabetical
  HubRule rule;
};

/// Ranks industries by whole-sample AGG (descending, ties broken by symbol):
/// top_k become hubs, bottom_k non-hubs, the rest middle.
HubClassification classify_hubs(const std::vector<std::string>& industries,
                                const std::vector<double>& total_agg,
                                const HubRule& rule = {});
HubClassification classify_hubs(const PhaseAverages& table, const HubRule& rule = {});

enum class HubSide { hubs, non_hubs };

/// Column subset of the panel restricted to the chosen side.
IndustryPanel subnetwork_panel(const IndustryPanel& panel,
                               const HubClassification& cls, HubSide side);

std::string write_classification_json(const HubClassification& cls);
HubClassification read_classification_json(const std::filesystem::path& path);

}  // namespace uncnet
