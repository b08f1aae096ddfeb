#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uncnet/cycles.hpp"
#include "uncnet/forecast.hpp"
#include "uncnet/network.hpp"
#include "uncnet/tvp_var.hpp"

namespace uncnet {

/// FNV-1a over bytes; good enough to fingerprint inputs and outputs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::uint64_t digest);
std::string file_digest(const std::filesystem::path& path);

/// Flat key=value configuration with INI-style [section] prefixes and '#'
/// comments. Keys are validated against the known set so typos fail fast.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::filesystem::path& path);
  static KeyValueConfig from_text(std::string_view text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  /// Canonical "key=value\n" dump in sorted key order.
  std::string canonical_text() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct ForecastTarget {
  std::string id;
  std::optional<double> threshold;  // censoring split when present
};

struct PipelineConfig {
  // Entry points; panel wins over firm_vix wins over chains.
  std::filesystem::path chains, firm_vix, panel, caps, membership, calendar, macro;

  IvConfig iv;
  PanelPolicy panel_policy;
  TvpVarSpec tvp;
  int gfevd_horizon = 10;
  HubRule hub_rule;
  bool strict_rule_preset = false;

  std::vector<int> horizons = {1, 3, 6, 9, 12};
  std::vector<ForecastTarget> targets;
  std::vector<std::string> controls;
  std::map<std::string, Transform> transforms;
  bool hac = false;
  std::string gdp_id;  // quarterly level series; growth and vol targets
  std::vector<std::string> gdp_controls;  // quarterly macro ids
  std::vector<int> gdp_horizons = {1, 2, 3, 4};

  std::filesystem::path output_dir = "out";

  static PipelineConfig from_config(const KeyValueConfig& kv);
  /// Existence checks for every referenced input file.
  void validate() const;
};

struct StageRecord {
  std::string name;
  std::size_t rows_out = 0;
  std::vector<std::string> warnings;
};

struct RunManifest {
  std::string tool;
  std::string config_digest;
  std::string created_utc;
  std::map<std::string, std::string> input_digests;
  std::vector<StageRecord> stages;
  std::map<std::string, std::string> output_digests;
  std::string error;  // nonempty when the run aborted

  std::string to_json() const;
};

/// Kernel-weighted estimation fused with the network summaries, one time
/// index at a time; memory stays bounded by one draw set.
ConnectednessSeries estimate_network_series(const IndustryPanel& panel,
                                            const TvpVarSpec& spec, int horizon);

/// Runs every stage, writing outputs (and finally manifest.json) under
/// config.output_dir. On a stage failure the partial manifest is still
/// written and the error rethrown.
RunManifest run_pipeline(const PipelineConfig& config, const KeyValueConfig& raw);

}  // namespace uncnet
