#include "uncnet/pipeline.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "uncnet/csv.hpp"
#include "uncnet/errors.hpp"
#include "uncnet/rng.hpp"
#include "uncnet/version.hpp"

namespace uncnet {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "' for digest");
  std::ostringstream buf;
  buf << in.rdbuf();
  return digest_hex(fnv1a64(buf.str()));
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kKnownKeys = {
    "inputs.chains", "inputs.firm_vix", "inputs.panel", "inputs.caps",
    "inputs.membership", "inputs.calendar", "inputs.macro",
    "iv.target_days", "iv.min_strikes", "iv.zero_bid_run",
    "panel.fill_limit",
    "tvp.lags", "tvp.bandwidth", "tvp.shrinkage", "tvp.own_lag_mean",
    "tvp.draws", "tvp.stability_cap", "tvp.seed",
    "network.horizon",
    "classify.top_k", "classify.bottom_k", "classify.strict",
    "forecast.horizons", "forecast.targets", "forecast.controls", "forecast.hac",
    "forecast.gdp", "forecast.gdp_controls", "forecast.gdp_horizons",
    "run.output_dir", "run.workers",
};

bool known_key(const std::string& key) {
  if (kKnownKeys.count(key)) return true;
  return key.rfind("forecast.transform.", 0) == 0;
}

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find(',', start);
    std::string item = trim(pos == std::string::npos ? text.substr(start)
                                                     : text.substr(start, pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    try {
      out.push_back(static_cast<int>(csv::parse_int(item)));
    } catch (const InputError&) {
      throw ConfigError("bad integer '" + item + "' in " + key);
    }
  }
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_text(std::string_view text) {
  KeyValueConfig cfg;
  std::string section;
  std::size_t start = 0, line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string line = trim(end == std::string_view::npos
                                ? text.substr(start)
                                : text.substr(start, end - start));
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("bad section header at line " + std::to_string(line_no));
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key=value at line " + std::to_string(line_no));
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    cfg.set(key, trim(std::string_view(line).substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
  entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return csv::parse_double(it->second);
  } catch (const InputError&) {
    throw ConfigError("key '" + key + "' is not a number: '" + it->second + "'");
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return static_cast<int>(csv::parse_int(it->second));
  } catch (const InputError&) {
    throw ConfigError("key '" + key + "' is not an integer: '" + it->second + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("key '" + key + "' is not a boolean: '" + it->second + "'");
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(),
                                   it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size())
    throw ConfigError("key '" + key + "' is not an unsigned integer: '" + it->second + "'");
  return v;
}

std::string KeyValueConfig::canonical_text() const {
  std::string out;
  for (const auto& [key, value] : entries_) out += key + "=" + value + "\n";
  return out;
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  PipelineConfig cfg;
  cfg.chains = kv.get("inputs.chains", "");
  cfg.firm_vix = kv.get("inputs.firm_vix", "");
  cfg.panel = kv.get("inputs.panel", "");
  cfg.caps = kv.get("inputs.caps", "");
  cfg.membership = kv.get("inputs.membership", "");
  cfg.calendar = kv.get("inputs.calendar", "");
  cfg.macro = kv.get("inputs.macro", "");

  cfg.iv.target_days = kv.get_int("iv.target_days", cfg.iv.target_days);
  cfg.iv.min_strikes = kv.get_int("iv.min_strikes", cfg.iv.min_strikes);
  cfg.iv.zero_bid_stop_run = kv.get_int("iv.zero_bid_run", cfg.iv.zero_bid_stop_run);
  cfg.panel_policy.fill_limit = kv.get_int("panel.fill_limit", cfg.panel_policy.fill_limit);

  cfg.tvp.lags = kv.get_int("tvp.lags", cfg.tvp.lags);
  cfg.tvp.kernel_bandwidth = kv.get_double("tvp.bandwidth", cfg.tvp.kernel_bandwidth);
  cfg.tvp.shrinkage = kv.get_double("tvp.shrinkage", cfg.tvp.shrinkage);
  cfg.tvp.own_lag_prior_mean = kv.get_double("tvp.own_lag_mean", cfg.tvp.own_lag_prior_mean);
  cfg.tvp.n_draws = kv.get_int("tvp.draws", cfg.tvp.n_draws);
  cfg.tvp.stability_cap = kv.get_double("tvp.stability_cap", cfg.tvp.stability_cap);
  cfg.tvp.seed = kv.get_u64("tvp.seed", cfg.tvp.seed);
  cfg.tvp.workers = kv.get_int("run.workers", 0);

  cfg.gfevd_horizon = kv.get_int("network.horizon", cfg.gfevd_horizon);
  cfg.hub_rule.top_k = kv.get_int("classify.top_k", cfg.hub_rule.top_k);
  cfg.hub_rule.bottom_k = kv.get_int("classify.bottom_k", cfg.hub_rule.bottom_k);
  if (kv.get_bool("classify.strict", false)) {
    cfg.hub_rule = strict_hub_rule();
    cfg.strict_rule_preset = true;
  }

  if (kv.has("forecast.horizons"))
    cfg.horizons = parse_int_list(kv.get("forecast.horizons", ""), "forecast.horizons");
  for (const auto& item : split_list(kv.get("forecast.targets", ""))) {
    ForecastTarget target;
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      target.id = item;
    } else {
      target.id = trim(std::string_view(item).substr(0, colon));
      try {
        target.threshold = csv::parse_double(trim(std::string_view(item).substr(colon + 1)));
      } catch (const InputError&) {
        throw ConfigError("bad threshold in forecast target '" + item + "'");
      }
    }
    cfg.targets.push_back(std::move(target));
  }
  cfg.controls = split_list(kv.get("forecast.controls", ""));
  for (const auto& [key, value] : kv.entries())
    if (key.rfind("forecast.transform.", 0) == 0)
      cfg.transforms[key.substr(std::string("forecast.transform.").size())] =
          parse_transform(value);
  cfg.hac = kv.get_bool("forecast.hac", false);
  cfg.gdp_id = kv.get("forecast.gdp", "");
  cfg.gdp_controls = split_list(kv.get("forecast.gdp_controls", ""));
  if (kv.has("forecast.gdp_horizons"))
    cfg.gdp_horizons =
        parse_int_list(kv.get("forecast.gdp_horizons", ""), "forecast.gdp_horizons");

  cfg.output_dir = kv.get("run.output_dir", "out");
  return cfg;
}

void PipelineConfig::validate() const {
  const bool have_panel = !panel.empty();
  const bool have_vix = !firm_vix.empty();
  const bool have_chains = !chains.empty();
  if (!have_panel && !have_vix && !have_chains)
    throw ConfigError("need inputs.panel, inputs.firm_vix or inputs.chains");
  if (!have_panel && (caps.empty() || membership.empty()))
    throw ConfigError("panel construction needs inputs.caps and inputs.membership");
  if (calendar.empty()) throw ConfigError("inputs.calendar is required");
  if ((!targets.empty() || !gdp_id.empty()) && macro.empty())
    throw ConfigError("forecast targets need inputs.macro");

  std::vector<std::filesystem::path> referenced{calendar};
  if (have_panel)
    referenced.push_back(panel);
  else if (have_vix)
    referenced.insert(referenced.end(), {firm_vix, caps, membership});
  else
    referenced.insert(referenced.end(), {chains, caps, membership});
  if (!macro.empty()) referenced.push_back(macro);
  for (const auto& path : referenced)
    if (!std::filesystem::exists(path))
      throw ConfigError("input file does not exist: '" + path.string() + "'");

  if (tvp.lags < 1 || tvp.n_draws < 1) throw ConfigError("tvp.lags and tvp.draws must be >= 1");
  if (!(tvp.stability_cap > 0) || !(tvp.stability_cap < 1))
    throw ConfigError("tvp.stability_cap must lie in (0, 1)");
  if (gfevd_horizon < 1) throw ConfigError("network.horizon must be >= 1");
}

// ---------------------------------------------------------------------------
// Fused estimation + network summaries
// ---------------------------------------------------------------------------

ConnectednessSeries estimate_network_series(const IndustryPanel& panel,
                                            const TvpVarSpec& spec, int horizon) {
  const int t = static_cast<int>(panel.n_dates());
  if (t <= spec.lags) throw InputError("panel too short for the lag order");
  const MinnesotaPrior prior = minnesota_prior(panel.values, spec);
  const RegressionData design = lag_design(panel.values, spec.lags);
  const int rows = static_cast<int>(design.targets.rows());
  const double bandwidth = effective_bandwidth(spec, rows);

  const int n_jobs = rows;
  std::vector<ConnectednessPoint> points(n_jobs);
  std::vector<std::string> failures(n_jobs);

  auto run_one = [&](int j) {
    const int t_index = spec.lags + j;
    try {
      const KernelWeights w = kernel_weights(rows, j + 1, bandwidth);
      const PosteriorParams post = posterior_update(design, w.weights, prior, spec.lags);
      const PosteriorDrawSet set = sample_posterior(
          post, spec, derive_seed(spec.seed, static_cast<std::uint64_t>(t_index)));
      points[j] = summarize_draws(panel.dates[t_index], set, horizon);
    } catch (const std::exception& e) {
      failures[j] = e.what();
    }
  };

  int workers = spec.workers > 0 ? spec.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers == 1) {
    for (int j = 0; j < n_jobs; ++j) run_one(j);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n_jobs); ++w)
      pool.emplace_back([&] {
        for (int j = next.fetch_add(1); j < n_jobs; j = next.fetch_add(1)) run_one(j);
      });
    for (auto& th : pool) th.join();
  }
  for (int j = 0; j < n_jobs; ++j)
    if (!failures[j].empty())
      throw NumericalError("estimation failed at " +
                           panel.dates[spec.lags + j].to_string() + ": " + failures[j]);

  ConnectednessSeries series;
  series.industries = panel.industries;
  series.horizon = horizon;
  series.points = std::move(points);
  return series;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class OutputTracker {
 public:
  explicit OutputTracker(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path write(const std::string& name, std::string_view bytes,
                              RunManifest& manifest) {
    const std::filesystem::path path = dir_ / name;
    csv::write_file_atomic(path, bytes);
    manifest.output_digests[name] = digest_hex(fnv1a64(bytes));
    return path;
  }

 private:
  std::filesystem::path dir_;
};

MacroSeries prepared_series(const std::map<std::string, MacroSeries>& bank,
                            const std::string& id,
                            const std::map<std::string, Transform>& transforms) {
  auto it = bank.find(id);
  if (it == bank.end()) throw InputError("macro series '" + id + "' not found");
  MacroSeries s = it->second;
  auto tr = transforms.find(id);
  if (tr != transforms.end()) s.transform = tr->second;
  return apply_transform(s);
}

}  // namespace

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = tool;
  j["config_digest"] = config_digest;
  j["created_utc"] = created_utc;
  j["inputs"] = input_digests;
  j["outputs"] = output_digests;
  j["stages"] = nlohmann::json::array();
  for (const auto& stage : stages)
    j["stages"].push_back({{"name", stage.name},
                           {"rows_out", stage.rows_out},
                           {"warnings", stage.warnings}});
  if (!error.empty()) j["error"] = error;
  return j.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& config, const KeyValueConfig& raw) {
  RunManifest manifest;
  manifest.tool = std::string("uncnet ") + kVersion;
  manifest.config_digest = digest_hex(fnv1a64(raw.canonical_text()));
  manifest.created_utc = utc_now();

  OutputTracker out(config.output_dir);
  auto finish = [&](const std::string& error) {
    manifest.error = error;
    csv::write_file_atomic(config.output_dir / "manifest.json", manifest.to_json());
  };

  try {
    config.validate();
    for (const auto& path : {config.chains, config.firm_vix, config.panel, config.caps,
                             config.membership, config.calendar, config.macro})
      if (!path.empty() && std::filesystem::exists(path))
        manifest.input_digests[path.string()] = file_digest(path);

    const PhaseCalendar calendar = read_calendar_csv(config.calendar);

    // Stage 1-2: firm vols and the industry panel, unless given directly.
    IndustryPanel panel;
    if (!config.panel.empty()) {
      panel = read_panel_csv(config.panel);
      manifest.stages.push_back({"panel(read)", panel.n_dates(), {}});
    } else {
      std::vector<FirmVixPoint> vix_points;
      StageRecord vix_stage{"vix", 0, {}};
      if (!config.firm_vix.empty()) {
        vix_points = read_firm_vix_csv(config.firm_vix);
      } else {
        const ChainFile chains = read_chain_csv(config.chains);
        VixRunResult run = compute_firm_vix(chains.chains, config.iv);
        for (const auto& issue : chains.issues)
          vix_stage.warnings.push_back("line " + std::to_string(issue.line) + ": " +
                                       issue.message);
        for (const auto& issue : run.issues) vix_stage.warnings.push_back(issue.message);
        vix_points = std::move(run.points);
        if (vix_points.empty()) throw EmptyInput("no usable option chains");
        out.write("firm_vix.csv", write_firm_vix_csv(vix_points), manifest);
      }
      vix_stage.rows_out = vix_points.size();
      manifest.stages.push_back(std::move(vix_stage));

      panel = build_panel(vix_points, read_caps_csv(config.caps),
                          read_membership_csv(config.membership), config.panel_policy);
      manifest.stages.push_back({"panel", panel.n_dates(), {}});
    }
    out.write("panel.csv", write_panel_csv(panel), manifest);

    // Stage 3-4: kernel-weighted estimation and network statistics.
    const ConnectednessSeries series =
        estimate_network_series(panel, config.tvp, config.gfevd_horizon);
    out.write("connectedness.csv", write_connectedness_csv(series), manifest);
    std::size_t flagged = 0;
    for (const auto& pt : series.points) flagged += pt.unstable_warning ? 1 : 0;
    StageRecord net_stage{"network", series.points.size(), {}};
    if (flagged > 0)
      net_stage.warnings.push_back(std::to_string(flagged) +
                                   " dates kept unstable draws (majority unstable)");
    manifest.stages.push_back(std::move(net_stage));

    // Stage 5: business-cycle phases and hub classification.
    const PhaseAverages phases = phase_averages(series, calendar);
    out.write("phase_averages.csv", write_phase_averages_csv(phases), manifest);
    const HubClassification cls = classify_hubs(phases, config.hub_rule);
    out.write("classification.json", write_classification_json(cls), manifest);
    manifest.stages.push_back({"classify", cls.hubs.size() + cls.non_hubs.size(), {}});

    // Stage 6: hub / non-hub subnetworks, re-estimated from scratch.
    std::optional<ConnectednessSeries> hub_series, nonhub_series;
    if (static_cast<std::size_t>(config.tvp.lags) + 2 <= panel.n_dates()) {
      if (cls.hubs.size() >= 2) {
        hub_series = estimate_network_series(
            subnetwork_panel(panel, cls, HubSide::hubs), config.tvp, config.gfevd_horizon);
        out.write("connectedness_hubs.csv", write_connectedness_csv(*hub_series), manifest);
      }
      if (cls.non_hubs.size() >= 2) {
        nonhub_series =
            estimate_network_series(subnetwork_panel(panel, cls, HubSide::non_hubs),
                                    config.tvp, config.gfevd_horizon);
        out.write("connectedness_nonhubs.csv", write_connectedness_csv(*nonhub_series),
                  manifest);
      }
    }
    manifest.stages.push_back(
        {"subnetworks", (hub_series ? 1u : 0u) + (nonhub_series ? 1u : 0u), {}});

    // Stage 7: predictive regressions.
    if (!config.targets.empty() || !config.gdp_id.empty()) {
      const auto macro = read_macro_csv(config.macro);
      const MacroSeries c_monthly = monthly_aggregate(series, "C");
      std::optional<MacroSeries> c_hub, c_nonhub;
      if (hub_series) c_hub = monthly_aggregate(*hub_series, "C_hub");
      if (nonhub_series) c_nonhub = monthly_aggregate(*nonhub_series, "C_nonhub");

      std::vector<MacroSeries> controls;
      for (const auto& id : config.controls)
        controls.push_back(prepared_series(macro, id, config.transforms));

      StageRecord stage{"predict", 0, {}};
      RegressionOptions opts{config.hac};
      auto run_target = [&](const std::string& label, const MacroSeries& target,
                            const std::vector<MacroSeries>& predictors,
                            const std::vector<int>& horizons) {
        const auto results = horizon_suite(target, predictors, horizons, opts);
        out.write("predict_" + label + ".csv", write_regression_csv(label, results), manifest);
        out.write("predict_" + label + ".json", write_regression_json(label, results),
                  manifest);
        ++stage.rows_out;
      };

      for (const auto& target_cfg : config.targets) {
        const MacroSeries y = prepared_series(macro, target_cfg.id, config.transforms);
        std::vector<MacroSeries> preds{c_monthly};
        preds.insert(preds.end(), controls.begin(), controls.end());
        run_target(target_cfg.id, y, preds, config.horizons);
        if (target_cfg.threshold) {
          const auto [expansion, recession] = threshold_decompose(y, *target_cfg.threshold);
          run_target(target_cfg.id + "_expansion", expansion, preds, config.horizons);
          run_target(target_cfg.id + "_recession", recession, preds, config.horizons);
        }
        if (c_hub && c_nonhub) {
          std::vector<MacroSeries> joint{*c_hub, *c_nonhub};
          joint.insert(joint.end(), controls.begin(), controls.end());
          run_target(target_cfg.id + "_hubs", y, joint, config.horizons);
        }
      }

      if (!config.gdp_id.empty()) {
        const MacroSeries gdp = prepared_series(macro, config.gdp_id, {});
        if (gdp.frequency != Frequency::quarterly)
          throw InputError("gdp series must be quarterly");
        const MacroSeries growth = gdp_growth(gdp);
        const MacroSeries vol = gdp_volatility(growth);
        std::vector<MacroSeries> gdp_preds{
            aggregate_connectedness(series, Frequency::quarterly, "C")};
        for (const auto& id : config.gdp_controls)
          gdp_preds.push_back(prepared_series(macro, id, config.transforms));
        run_target(config.gdp_id + "_growth", growth, gdp_preds, config.gdp_horizons);
        run_target(config.gdp_id + "_vol", vol, gdp_preds, config.gdp_horizons);
      }
      manifest.stages.push_back(std::move(stage));
    }
  } catch (const std::exception& e) {
    finish(e.what());
    throw;
  }
  finish("");
  return manifest;
}

}  // namespace uncnet
