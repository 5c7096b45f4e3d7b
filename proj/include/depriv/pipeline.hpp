#pragma once

// Library side of the CLI: run configuration and the subcommand entry points.
// Each stage reads its inputs from files and writes files, so stages are
// independently testable and resumable, and every output is recomputable
// from the files alone.

#include <optional>
#include <string>
#include <vector>

#include "depriv/classify.hpp"
#include "depriv/spatial.hpp"
#include "depriv/stats.hpp"
#include "depriv/types.hpp"

namespace depriv::pipeline {

enum class WeightsChoice { SD, PCA, File };

struct RunConfig {
  std::string attributes;           // attribute CSV path
  std::string geometry;             // boundary GeoJSON path (optional)
  std::string column_map;           // mapping JSON path (optional)
  std::string covariate_overrides;  // region covariate CSV path (optional)
  std::string out_dir = "out";

  WeightsChoice weights = WeightsChoice::SD;
  std::string weights_file;  // when weights == File

  classify::ThresholdSpec threshold;
  bool threshold_set = false;

  spatial::Contiguity contiguity = spatial::Contiguity::Queen;
  double snap_precision = 1e-7;
  bool within_city_only = false;

  classify::SweepDirection sweep_direction = classify::SweepDirection::Concentrating;
  int sweep_step = 10;

  bool include_noncontiguous = false;
  std::int64_t large_city_population = 250000;
  std::int64_t place_min_population = 500;
  double bin_width = 1.0;
  stats::HcFlavor hc_flavor = stats::HcFlavor::HC1;
  std::string geoid_property = "GEOID";
  int threads = 0;  // 0 = library default

  // fetch
  std::string acs_endpoint = "https://api.census.gov/data/2019/acs/acs5";
  std::vector<std::string> acs_variables;
  std::vector<std::string> acs_states;
};

// Parses the JSON config; unknown keys are rejected (Config error).
RunConfig load_config(const std::string& path);

// Parses "region:<id>" / "value:<x>" threshold syntax.
classify::ThresholdSpec parse_threshold_arg(const std::string& arg);

// score: per-block-group scores CSV (geoid,raw_score,score), weight JSON,
// quarantine JSONL. Byte-identical across runs and worker counts.
void cmd_score(const RunConfig& cfg);

// classify: classified CSV (adds `high`), place/state region summary CSVs,
// summary JSON, threshold JSON.
void cmd_classify(const RunConfig& cfg);

// dispersion: adjacency CSV export and the place summary rewritten with the
// dispersion column filled.
void cmd_dispersion(const RunConfig& cfg);

// regress: the four model families (logistic HD>0 on places, OLS on
// nonzero-%HD places, OLS on large cities, dispersion-response OLS), four
// nested specs each. Per-model errors isolate.
void cmd_regress(const RunConfig& cfg);

// report: histogram SVG, score-annotated GeoJSON, top-places tables, place
// scatter CSV, cumulative sweep CSVs.
void cmd_report(const RunConfig& cfg);

// fetch: raw ACS tables, one CSV per state.
void cmd_fetch(const RunConfig& cfg);

}  // namespace depriv::pipeline
