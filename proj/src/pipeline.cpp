#include "depriv/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "depriv/acs.hpp"
#include "depriv/csv.hpp"
#include "depriv/ingest.hpp"
#include "depriv/json_io.hpp"
#include "depriv/parallel.hpp"
#include "depriv/report.hpp"
#include "depriv/scoring.hpp"

namespace depriv::pipeline {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::set<std::string> kConfigKeys = {
    "attributes",       "geometry",       "column_map",
    "covariate_overrides", "out_dir",     "weights",
    "threshold",        "contiguity",     "snap_precision",
    "within_city_only", "sweep_direction", "sweep_step",
    "include_noncontiguous", "large_city_population", "place_min_population",
    "bin_width",        "hc_flavor",      "geoid_property",
    "threads",          "acs_endpoint",   "acs_variables",
    "acs_states"};

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    throw DeprivError(ErrorFamily::Io, "BAD_OUT_DIR",
                      "cannot create output directory " + cfg.out_dir);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DeprivError(ErrorFamily::Io, "UNWRITABLE_FILE", "cannot write " + path);
  return out;
}

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DeprivError(ErrorFamily::Io, "UNREADABLE_FILE",
                      std::string(what) + " not found: " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DeprivError(ErrorFamily::Schema, "BAD_JSON",
                      std::string(what) + " parse error: " + e.what());
  }
}

double parse_num(const std::string& s, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DeprivError(ErrorFamily::Schema, "BAD_NUMBER",
                      "cannot parse number '" + s + "' in " + context);
  }
  return v;
}

ingest::Dataset load_attributes(const RunConfig& cfg) {
  if (cfg.attributes.empty()) {
    throw DeprivError(ErrorFamily::Config, "MISSING_ATTRIBUTES",
                      "no attributes CSV configured");
  }
  ingest::ParseOptions opts;
  opts.include_noncontiguous = cfg.include_noncontiguous;
  if (!cfg.column_map.empty()) {
    opts.columns = ingest::ColumnMap::from_json_file(cfg.column_map);
  }
  if (fs::is_directory(cfg.attributes)) {
    return ingest::parse_attributes_dir(cfg.attributes, opts);
  }
  return ingest::parse_attributes_csv(cfg.attributes, opts);
}

struct WeightFile {
  WeightVector weights;
  std::optional<double> raw_min;
  std::optional<double> raw_max;
  json extra;  // pca metadata when present
};

WeightFile read_weight_file(const std::string& path) {
  const json j = read_json_file(path, "weight file");
  WeightFile wf;
  wf.weights = j.get<WeightVector>();
  if (j.contains("rescale") && j["rescale"].is_object()) {
    wf.raw_min = j["rescale"].value("raw_min", 0.0);
    wf.raw_max = j["rescale"].value("raw_max", 0.0);
  }
  return wf;
}

void write_weight_file(const std::string& path, const WeightVector& weights,
                       double raw_min, double raw_max, const json* pca_extra) {
  json j = weights;
  j["rescale"] = json{{"raw_min", raw_min}, {"raw_max", raw_max}};
  if (pca_extra) j["pca"] = *pca_extra;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::vector<ScoredBlockGroup> read_score_csv(const std::string& path, bool with_high) {
  auto rows = csv::read_file(path);
  if (rows.empty()) {
    throw DeprivError(ErrorFamily::Schema, "MISSING_HEADER", path + ": empty score file");
  }
  const std::size_t expected = with_high ? 4 : 3;
  std::vector<ScoredBlockGroup> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() < expected) {
      throw DeprivError(ErrorFamily::Schema, "BAD_ROW",
                        path + ": row " + std::to_string(rows[r].line) + " is short");
    }
    ScoredBlockGroup s;
    s.geoid = f[0];
    s.raw_score = parse_num(f[1], path);
    s.score = parse_num(f[2], path);
    if (with_high) s.high_deprivation = f[3] == "1";
    out.push_back(std::move(s));
  }
  return out;
}

void write_score_csv(const std::string& path,
                     const std::vector<ScoredBlockGroup>& scored, bool with_high) {
  auto out = open_out(path);
  out << (with_high ? "geoid,raw_score,score,high\n" : "geoid,raw_score,score\n");
  for (const auto& s : scored) {
    out << s.geoid << ',' << csv::fixed(s.raw_score, 6) << ',' << csv::fixed(s.score, 6);
    if (with_high) out << ',' << (s.high_deprivation ? '1' : '0');
    out << '\n';
  }
}

constexpr const char* kSummaryHeader =
    "region_id,region_kind,n_bg,median_score,pct_high,dispersion,percpov,popdens,"
    "percblk,percwht,population";

std::string opt_fixed(const std::optional<double>& v, int decimals) {
  return v ? csv::fixed(*v, decimals) : "";
}

void write_region_summary_csv(const std::string& path,
                              const std::vector<RegionSummary>& summaries) {
  auto out = open_out(path);
  out << kSummaryHeader << "\n";
  for (const auto& r : summaries) {
    out << csv::escape(r.region_id) << ',' << to_string(r.region_kind) << ',' << r.n_bg
        << ',' << csv::fixed(r.median_score, 3) << ',' << csv::fixed(r.pct_high, 3)
        << ',' << opt_fixed(r.dispersion, 3) << ',' << opt_fixed(r.percpov, 3) << ','
        << opt_fixed(r.popdens, 3) << ',' << opt_fixed(r.percblk, 3) << ','
        << opt_fixed(r.percwht, 3) << ',' << r.population << '\n';
  }
}

std::vector<RegionSummary> read_region_summary_csv(const std::string& path) {
  auto rows = csv::read_file(path);
  if (rows.empty() || rows[0].raw != kSummaryHeader) {
    throw DeprivError(ErrorFamily::Schema, "BAD_SUMMARY",
                      path + ": unexpected region summary header");
  }
  std::vector<RegionSummary> out;
  auto opt_of = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return parse_num(s, path);
  };
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != 11) {
      throw DeprivError(ErrorFamily::Schema, "BAD_ROW",
                        path + ": row " + std::to_string(rows[r].line) + " malformed");
    }
    RegionSummary rs;
    rs.region_id = f[0];
    rs.region_kind = region_kind_from_string(f[1]);
    rs.n_bg = static_cast<std::int64_t>(parse_num(f[2], path));
    rs.median_score = parse_num(f[3], path);
    rs.pct_high = parse_num(f[4], path);
    rs.dispersion = opt_of(f[5]);
    rs.percpov = opt_of(f[6]);
    rs.popdens = opt_of(f[7]);
    rs.percblk = opt_of(f[8]);
    rs.percwht = opt_of(f[9]);
    rs.population = static_cast<std::int64_t>(parse_num(f[10], path));
    rs.suspect_complete = rs.n_bg > 0 && rs.pct_high == 100.0;
    out.push_back(std::move(rs));
  }
  return out;
}

classify::AggregateOptions load_overrides(const RunConfig& cfg) {
  classify::AggregateOptions opts;
  if (cfg.covariate_overrides.empty()) return opts;
  auto rows = csv::read_file(cfg.covariate_overrides);
  if (rows.empty()) return opts;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) col[rows[0].fields[i]] = i;
  for (const char* required : {"region_id"}) {
    if (!col.count(required)) {
      throw DeprivError(ErrorFamily::Schema, "MISSING_COLUMN",
                        cfg.covariate_overrides + " lacks column " + required);
    }
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    auto get = [&](const char* name) -> std::optional<double> {
      auto it = col.find(name);
      if (it == col.end() || it->second >= f.size() || f[it->second].empty()) {
        return std::nullopt;
      }
      return parse_num(f[it->second], cfg.covariate_overrides);
    };
    classify::CovariateOverride ov;
    ov.percpov = get("percpov");
    ov.popdens = get("popdens");
    ov.percblk = get("percblk");
    ov.percwht = get("percwht");
    opts.overrides[f[col["region_id"]]] = ov;
  }
  return opts;
}

// Scores and membership must describe the same block-group set.
void check_consistency(const std::vector<ScoredBlockGroup>& scored,
                       const std::vector<BlockGroupRecord>& records,
                       const std::string& score_path) {
  if (scored.size() != records.size()) {
    throw DeprivError(ErrorFamily::Validation, "STAGE_MISMATCH",
                      score_path + " has " + std::to_string(scored.size()) +
                          " rows but attributes have " + std::to_string(records.size()));
  }
}

json fit_to_json(const stats::Response response, const RegressionFit& fit,
                 std::int64_t dropped_missing, std::int64_t dropped_log_domain) {
  json j;
  j["model"] = to_string(fit.model);
  j["response"] = stats::to_string(response);
  j["columns"] = fit.names;
  j["coef"] = fit.coef;
  j["se"] = fit.standard_errors();
  j["p"] = fit.p_values;
  j[fit.model == ModelKind::Logistic ? "pseudo_r2" : "r2"] = fit.r2;
  j["n"] = fit.n_obs;
  j["dropped"] = json{{"missing", dropped_missing}, {"log_domain", dropped_log_domain}};
  j["converged"] = fit.converged;
  if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
  return j;
}

}  // namespace

classify::ThresholdSpec parse_threshold_arg(const std::string& arg) {
  classify::ThresholdSpec spec;
  if (arg.starts_with("region:")) {
    spec.mode = classify::ThresholdMode::BenchmarkRegionMedian;
    spec.region_id = arg.substr(7);
    if (spec.region_id.empty()) {
      throw DeprivError(ErrorFamily::Config, "BAD_THRESHOLD", "empty region id");
    }
  } else if (arg.starts_with("value:")) {
    spec.mode = classify::ThresholdMode::ExplicitValue;
    spec.value = parse_num(arg.substr(6), "threshold");
  } else {
    throw DeprivError(ErrorFamily::Config, "BAD_THRESHOLD",
                      "threshold must be region:<id> or value:<x>");
  }
  return spec;
}

RunConfig load_config(const std::string& path) {
  const json j = read_json_file(path, "config");
  if (!j.is_object()) {
    throw DeprivError(ErrorFamily::Config, "BAD_CONFIG", "config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.count(key)) {
      throw DeprivError(ErrorFamily::Config, "UNKNOWN_KEY",
                        "unknown config key: " + key);
    }
  }

  RunConfig cfg;
  cfg.attributes = j.value("attributes", cfg.attributes);
  cfg.geometry = j.value("geometry", cfg.geometry);
  cfg.column_map = j.value("column_map", cfg.column_map);
  cfg.covariate_overrides = j.value("covariate_overrides", cfg.covariate_overrides);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);

  if (j.contains("weights")) {
    const std::string w = j["weights"].get<std::string>();
    if (w == "sd") cfg.weights = WeightsChoice::SD;
    else if (w == "pca") cfg.weights = WeightsChoice::PCA;
    else {
      cfg.weights = WeightsChoice::File;
      cfg.weights_file = w;
    }
  }
  if (j.contains("threshold")) {
    if (j["threshold"].is_string()) {
      cfg.threshold = parse_threshold_arg(j["threshold"].get<std::string>());
    } else if (j["threshold"].is_object()) {
      const auto& t = j["threshold"];
      const std::string mode = t.value("mode", "value");
      if (mode == "region") {
        cfg.threshold.mode = classify::ThresholdMode::BenchmarkRegionMedian;
        cfg.threshold.region_id = t.value("region_id", "");
      } else if (mode == "value") {
        cfg.threshold.mode = classify::ThresholdMode::ExplicitValue;
        cfg.threshold.value = t.value("value", 0.0);
      } else {
        throw DeprivError(ErrorFamily::Config, "BAD_THRESHOLD",
                          "threshold mode must be region or value");
      }
    } else {
      throw DeprivError(ErrorFamily::Config, "BAD_THRESHOLD",
                        "threshold must be a string or object");
    }
    cfg.threshold_set = true;
  }
  if (j.contains("contiguity")) {
    const std::string c = j["contiguity"].get<std::string>();
    if (c == "queen") cfg.contiguity = spatial::Contiguity::Queen;
    else if (c == "rook") cfg.contiguity = spatial::Contiguity::Rook;
    else throw DeprivError(ErrorFamily::Config, "BAD_CONTIGUITY", "contiguity: " + c);
  }
  cfg.snap_precision = j.value("snap_precision", cfg.snap_precision);
  if (cfg.snap_precision <= 0.0) {
    throw DeprivError(ErrorFamily::Config, "BAD_PRECISION", "snap_precision must be > 0");
  }
  cfg.within_city_only = j.value("within_city_only", cfg.within_city_only);
  if (j.contains("sweep_direction")) {
    const std::string s = j["sweep_direction"].get<std::string>();
    if (s == "concentrating") cfg.sweep_direction = classify::SweepDirection::Concentrating;
    else if (s == "diluting") cfg.sweep_direction = classify::SweepDirection::Diluting;
    else throw DeprivError(ErrorFamily::Config, "BAD_SWEEP", "sweep_direction: " + s);
  }
  cfg.sweep_step = j.value("sweep_step", cfg.sweep_step);
  cfg.include_noncontiguous = j.value("include_noncontiguous", cfg.include_noncontiguous);
  cfg.large_city_population = j.value("large_city_population", cfg.large_city_population);
  cfg.place_min_population = j.value("place_min_population", cfg.place_min_population);
  cfg.bin_width = j.value("bin_width", cfg.bin_width);
  if (j.contains("hc_flavor")) {
    const std::string h = j["hc_flavor"].get<std::string>();
    if (h == "hc0") cfg.hc_flavor = stats::HcFlavor::HC0;
    else if (h == "hc1") cfg.hc_flavor = stats::HcFlavor::HC1;
    else throw DeprivError(ErrorFamily::Config, "BAD_HC", "hc_flavor: " + h);
  }
  cfg.geoid_property = j.value("geoid_property", cfg.geoid_property);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.acs_endpoint = j.value("acs_endpoint", cfg.acs_endpoint);
  if (j.contains("acs_variables")) {
    cfg.acs_variables = j["acs_variables"].get<std::vector<std::string>>();
  }
  if (j.contains("acs_states")) {
    cfg.acs_states = j["acs_states"].get<std::vector<std::string>>();
  }
  return cfg;
}

void cmd_score(const RunConfig& cfg) {
  set_worker_count(cfg.threads);
  ensure_out_dir(cfg);

  auto ds = load_attributes(cfg);
  if (ds.records.empty()) {
    ingest::write_quarantine_jsonl(out_path(cfg, "quarantine.jsonl"), ds.quarantine);
    throw DeprivError(ErrorFamily::Validation, "EMPTY_INPUT",
                      "no valid records in " + cfg.attributes);
  }

  WeightVector weights;
  std::optional<double> fixed_min, fixed_max;
  json pca_extra;
  const json* pca_extra_ptr = nullptr;
  switch (cfg.weights) {
    case WeightsChoice::SD:
      weights = scoring::sd_weights(scoring::compute_sd_stats(ds.records));
      break;
    case WeightsChoice::PCA: {
      const auto pca = scoring::pca_weights(ds.records);
      if (pca.degenerate_eigenspace) {
        std::cerr << "warning: DEGENERATE_EIGENSPACE: top eigenvalue is not isolated\n";
      }
      weights = scoring::pca_weight_vector(pca);
      pca_extra = json{{"explained_share", pca.explained_share},
                       {"sign_flipped", pca.sign_flipped},
                       {"degenerate_eigenspace", pca.degenerate_eigenspace}};
      pca_extra_ptr = &pca_extra;
      break;
    }
    case WeightsChoice::File: {
      const auto wf = read_weight_file(cfg.weights_file);
      weights = wf.weights;
      fixed_min = wf.raw_min;
      fixed_max = wf.raw_max;
      break;
    }
  }

  const auto raw = scoring::raw_scores(ds.records, weights);
  std::vector<double> raw_values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw_values[i] = raw[i].second;

  std::vector<double> rescaled;
  double raw_min = 0.0, raw_max = 0.0;
  if (fixed_min && fixed_max) {
    raw_min = *fixed_min;
    raw_max = *fixed_max;
    rescaled = scoring::rescale_with(raw_values, raw_min, raw_max);
  } else {
    auto rr = scoring::rescale_0_100(raw_values);
    raw_min = rr.raw_min;
    raw_max = rr.raw_max;
    rescaled = std::move(rr.scores);
  }

  std::vector<ScoredBlockGroup> scored(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    scored[i].geoid = raw[i].first;
    scored[i].raw_score = raw[i].second;
    scored[i].score = rescaled[i];
  }

  write_score_csv(out_path(cfg, "scores.csv"), scored, false);
  write_weight_file(out_path(cfg, "weights.json"), weights, raw_min, raw_max,
                    pca_extra_ptr);
  ingest::write_quarantine_jsonl(out_path(cfg, "quarantine.jsonl"), ds.quarantine);
}

void cmd_classify(const RunConfig& cfg) {
  set_worker_count(cfg.threads);
  ensure_out_dir(cfg);
  if (!cfg.threshold_set) {
    throw DeprivError(ErrorFamily::Config, "MISSING_THRESHOLD",
                      "classify needs --threshold region:<id> or value:<x>");
  }

  auto ds = load_attributes(cfg);
  auto scored = read_score_csv(out_path(cfg, "scores.csv"), false);
  check_consistency(scored, ds.records, out_path(cfg, "scores.csv"));
  const auto membership = classify::Membership::from_records(ds.records);

  const double threshold = classify::resolve_threshold(cfg.threshold, scored, membership);
  auto classified = classify::classify_high(std::move(scored), threshold);

  write_score_csv(out_path(cfg, "classified.csv"), classified, true);

  const auto agg_opts = load_overrides(cfg);
  const auto places = classify::pct_high_by_region(classified, membership,
                                                   RegionKind::Place, agg_opts);
  const auto states = classify::pct_high_by_region(classified, membership,
                                                   RegionKind::State, agg_opts);
  write_region_summary_csv(out_path(cfg, "region_summary_place.csv"), places);
  write_region_summary_csv(out_path(cfg, "region_summary_state.csv"), states);

  // Threshold and summary metadata for downstream stages.
  json tj;
  tj["mode"] = cfg.threshold.mode == classify::ThresholdMode::ExplicitValue ? "value"
                                                                            : "region";
  if (cfg.threshold.mode == classify::ThresholdMode::BenchmarkRegionMedian) {
    tj["region_id"] = cfg.threshold.region_id;
  }
  tj["resolved"] = threshold;
  {
    auto out = open_out(out_path(cfg, "threshold.json"));
    out << tj.dump(2) << "\n";
  }

  std::vector<double> all_scores(classified.size());
  std::int64_t high_total = 0;
  for (std::size_t i = 0; i < classified.size(); ++i) {
    all_scores[i] = classified[i].score;
    if (classified[i].high_deprivation) ++high_total;
  }
  const auto st = classify::summary_stats(all_scores);

  std::set<std::string> large_places;
  for (const auto& p : places) {
    if (p.population >= cfg.large_city_population) large_places.insert(p.region_id);
  }
  std::vector<double> large_scores;
  for (const auto& s : classified) {
    auto it = membership.place_of.find(s.geoid);
    if (it != membership.place_of.end() && large_places.count(it->second)) {
      large_scores.push_back(s.score);
    }
  }

  json sj;
  sj["all"] = json{{"min", st.min},   {"mean", st.mean}, {"median", st.median},
                   {"max", st.max},   {"sd", st.sd},     {"n", classified.size()},
                   {"high", high_total},
                   {"pct_high", 100.0 * static_cast<double>(high_total) /
                                    static_cast<double>(classified.size())}};
  if (!large_scores.empty()) {
    const auto lt = classify::summary_stats(large_scores);
    std::int64_t large_high = 0;
    for (const auto& s : classified) {
      auto it = membership.place_of.find(s.geoid);
      if (it != membership.place_of.end() && large_places.count(it->second) &&
          s.high_deprivation) {
        ++large_high;
      }
    }
    sj["large_cities"] =
        json{{"min", lt.min},   {"mean", lt.mean}, {"median", lt.median},
             {"max", lt.max},   {"sd", lt.sd},     {"n", large_scores.size()},
             {"high", large_high},
             {"pct_high", 100.0 * static_cast<double>(large_high) /
                              static_cast<double>(large_scores.size())}};
  }
  {
    auto out = open_out(out_path(cfg, "summary_stats.json"));
    out << sj.dump(2) << "\n";
  }
}

void cmd_dispersion(const RunConfig& cfg) {
  set_worker_count(cfg.threads);
  ensure_out_dir(cfg);
  if (cfg.geometry.empty()) {
    throw DeprivError(ErrorFamily::Config, "MISSING_GEOMETRY",
                      "dispersion needs a geometry GeoJSON");
  }

  auto ds = load_attributes(cfg);
  auto classified = read_score_csv(out_path(cfg, "classified.csv"), true);
  check_consistency(classified, ds.records, out_path(cfg, "classified.csv"));

  auto gp = ingest::parse_geometry_geojson(cfg.geometry, cfg.geoid_property);
  ds = ingest::join(ds, gp.geometries);

  const spatial::SnapGrid snap{cfg.snap_precision};
  const auto graph = spatial::build_adjacency(ds.geometries, snap, cfg.contiguity);
  spatial::write_adjacency_csv(out_path(cfg, "adjacency.csv"), graph);

  std::map<std::string, bool> high_by_geoid;
  for (const auto& s : classified) high_by_geoid[s.geoid] = s.high_deprivation;

  std::map<std::string, std::vector<std::string>> members_by_place;
  for (const auto& r : ds.records) {
    if (!r.place_id.empty()) members_by_place[r.place_id].push_back(r.geoid);
  }

  auto summaries = read_region_summary_csv(out_path(cfg, "region_summary_place.csv"));
  std::int64_t warnings = 0;
  for (auto& rs : summaries) {
    auto it = members_by_place.find(rs.region_id);
    if (it == members_by_place.end()) {
      ++warnings;
      continue;
    }
    const auto& members = it->second;
    const bool full_coverage = std::all_of(
        members.begin(), members.end(),
        [&](const std::string& g) { return ds.geometries.count(g) > 0; });
    if (!full_coverage) {
      ++warnings;
      rs.dispersion.reset();
      continue;
    }
    const auto d = spatial::dispersion(members, high_by_geoid, graph, cfg.within_city_only);
    rs.dispersion = d.value;
  }
  if (warnings > 0) {
    std::cerr << "warning: dispersion unavailable for " << warnings
              << " place(s) lacking full geometry coverage\n";
  }
  write_region_summary_csv(out_path(cfg, "region_summary_place.csv"), summaries);
}

void cmd_regress(const RunConfig& cfg) {
  set_worker_count(cfg.threads);
  ensure_out_dir(cfg);
  auto places = read_region_summary_csv(out_path(cfg, "region_summary_place.csv"));

  std::vector<RegionSummary> eligible_places;
  for (const auto& p : places) {
    if (p.population >= cfg.place_min_population) eligible_places.push_back(p);
  }
  std::vector<RegionSummary> nonzero_places;
  for (const auto& p : eligible_places) {
    if (p.pct_high > 0.0) nonzero_places.push_back(p);
  }
  std::vector<RegionSummary> large_cities;
  for (const auto& p : places) {
    if (p.population >= cfg.large_city_population) large_cities.push_back(p);
  }

  const std::vector<std::vector<std::string>> specs = {
      {"percpov"},
      {"percpov", "log(popdens)"},
      {"percpov", "log(popdens)", "percblk"},
      {"percpov", "log(popdens)", "percwht"}};

  struct ModelRun {
    std::string file;
    std::string title;
    ModelKind model;
    stats::Response response;
    const std::vector<RegionSummary>* sample;
  };
  // pct_high responses are in percent units (0-100), not proportions.
  const std::vector<ModelRun> runs = {
      {"regress_logistic_places.json", "Logistic: P(pct_high > 0), places",
       ModelKind::Logistic, stats::Response::HD_POSITIVE, &eligible_places},
      {"regress_ols_nonzero_places.json",
       "OLS: pct_high (percent units 0-100), places with pct_high > 0",
       ModelKind::OLS, stats::Response::PCT_HD, &nonzero_places},
      {"regress_ols_large_cities.json",
       "OLS: pct_high (percent units 0-100), large cities",
       ModelKind::OLS, stats::Response::PCT_HD, &large_cities},
      {"regress_ols_dispersion.json", "OLS: dispersion, large cities",
       ModelKind::OLS, stats::Response::DISPERSION, &large_cities}};

  std::string tables;
  for (const auto& run : runs) {
    json file_json;
    file_json["model"] = to_string(run.model);
    file_json["response"] = stats::to_string(run.response);
    if (run.response == stats::Response::PCT_HD) {
      file_json["response_units"] = "percent_0_100";
    }
    file_json["specs"] = json::array();

    std::vector<std::optional<RegressionFit>> fits;
    std::vector<std::string> errors;
    for (const auto& spec : specs) {
      try {
        auto built = stats::build_design(*run.sample, spec, run.response);
        RegressionFit fit = run.model == ModelKind::Logistic
                                ? stats::logistic_fit(built.design)
                                : stats::ols_fit(built.design, cfg.hc_flavor);
        file_json["specs"].push_back(fit_to_json(run.response, fit,
                                                 built.dropped_missing,
                                                 built.dropped_log_domain));
        fits.push_back(std::move(fit));
        errors.emplace_back();
      } catch (const DeprivError& e) {
        file_json["specs"].push_back(json{{"error", json{{"code", e.code()},
                                                         {"message", e.what()}}}});
        fits.push_back(std::nullopt);
        errors.push_back(e.code());
        std::cerr << "warning: " << run.title << ": spec failed: " << e.what() << "\n";
      }
    }

    auto out = open_out(out_path(cfg, run.file));
    out << file_json.dump(2) << "\n";
    tables += report::fits_table(run.title, fits, errors) + "\n";
  }

  auto out = open_out(out_path(cfg, "regress_tables.txt"));
  out << tables;
}

void cmd_report(const RunConfig& cfg) {
  set_worker_count(cfg.threads);
  ensure_out_dir(cfg);

  auto warn_skip = [](const std::string& artifact, const std::string& missing) {
    std::cerr << "warning: skipping " << artifact << " (" << missing << " absent)\n";
  };

  // Classified scores when available, plain scores otherwise.
  std::vector<ScoredBlockGroup> scored;
  bool have_high = false;
  if (fs::exists(out_path(cfg, "classified.csv"))) {
    scored = read_score_csv(out_path(cfg, "classified.csv"), true);
    have_high = true;
  } else if (fs::exists(out_path(cfg, "scores.csv"))) {
    scored = read_score_csv(out_path(cfg, "scores.csv"), false);
    std::cerr << "warning: classification absent; report covers scores only\n";
  } else {
    warn_skip("all report artifacts", "scores.csv");
    return;
  }

  std::optional<double> threshold;
  if (fs::exists(out_path(cfg, "threshold.json"))) {
    threshold = read_json_file(out_path(cfg, "threshold.json"), "threshold")
                    .value("resolved", 0.0);
  }

  std::vector<double> scores(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) scores[i] = scored[i].score;
  const auto bins = classify::histogram(scores, cfg.bin_width);
  {
    auto out = open_out(out_path(cfg, "histogram.svg"));
    out << report::histogram_svg(bins, cfg.bin_width, threshold);
  }

  if (!cfg.geometry.empty() && fs::exists(cfg.geometry)) {
    std::ifstream in(cfg.geometry, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::map<std::string, double> score_by_geoid;
    std::map<std::string, bool> high_by_geoid;
    for (const auto& s : scored) {
      score_by_geoid[s.geoid] = s.score;
      high_by_geoid[s.geoid] = s.high_deprivation;
    }
    auto out = open_out(out_path(cfg, "scored.geojson"));
    out << report::annotate_geojson(buf.str(), score_by_geoid,
                                    have_high ? &high_by_geoid : nullptr,
                                    cfg.geoid_property);
  } else {
    warn_skip("scored.geojson", "geometry");
  }

  if (fs::exists(out_path(cfg, "region_summary_place.csv"))) {
    const auto places = read_region_summary_csv(out_path(cfg, "region_summary_place.csv"));
    {
      auto out = open_out(out_path(cfg, "top_places.txt"));
      out << report::top_places_table(places);
    }
    auto out = open_out(out_path(cfg, "places_scatter.csv"));
    out << "region_id,population,log_population,pct_high\n";
    for (const auto& p : places) {
      if (p.population < cfg.place_min_population || p.pct_high <= 0.0) continue;
      out << csv::escape(p.region_id) << ',' << p.population << ','
          << csv::fixed(std::log(static_cast<double>(p.population)), 3) << ','
          << csv::fixed(p.pct_high, 3) << '\n';
    }
  } else {
    warn_skip("top_places.txt and places_scatter.csv", "region_summary_place.csv");
  }

  if (have_high && !cfg.attributes.empty()) {
    auto ds = load_attributes(cfg);
    const auto membership = classify::Membership::from_records(ds.records);
    auto write_sweep = [&](classify::SweepGroup group, const std::string& name) {
      const auto entries = classify::cumulative_group_sweep(
          scored, membership, group, cfg.sweep_step, cfg.sweep_direction);
      auto out = open_out(out_path(cfg, name));
      out << "t,median_score,sd,population_share_pct\n";
      for (const auto& e : entries) {
        out << csv::fixed(e.t, 0) << ',' << opt_fixed(e.median_score, 3) << ','
            << opt_fixed(e.sd, 3) << ',' << csv::fixed(e.population_share_pct, 3)
            << '\n';
      }
    };
    write_sweep(classify::SweepGroup::Black, "sweep_black.csv");
    write_sweep(classify::SweepGroup::White, "sweep_white.csv");
  } else if (!have_high) {
    warn_skip("sweep CSVs", "classified.csv");
  }
}

void cmd_fetch(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  acs::FetchOptions opts;
  opts.endpoint = cfg.acs_endpoint;
  opts.variable_ids = cfg.acs_variables;
  opts.state_fips = cfg.acs_states;
  opts.out_dir = cfg.out_dir;
  const auto written = acs::fetch_acs(opts);
  for (const auto& path : written) std::cerr << "fetched " << path << "\n";
}

}  // namespace depriv::pipeline
