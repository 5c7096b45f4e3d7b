// depriv: block-group deprivation index pipeline.
// Subcommands hand results between stages through files in --out, so each
// stage is independently runnable and resumable.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "depriv/pipeline.hpp"

namespace {

using depriv::pipeline::RunConfig;

void add_common_options(CLI::App* cmd, RunConfig& cfg, std::string& config_path,
                        std::string& weights_arg, std::string& threshold_arg,
                        std::string& contiguity_arg, std::string& sweep_arg,
                        std::string& hc_arg) {
  cmd->add_option("--config", config_path, "JSON run configuration");
  cmd->add_option("--attributes", cfg.attributes, "attribute CSV path");
  cmd->add_option("--geometry", cfg.geometry, "boundary GeoJSON path");
  cmd->add_option("--column-map", cfg.column_map, "column mapping JSON");
  cmd->add_option("--covariates", cfg.covariate_overrides,
                  "region covariate override CSV");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--weights", weights_arg, "sd | pca | <weight file>");
  cmd->add_option("--threshold", threshold_arg, "region:<id> | value:<x>");
  cmd->add_option("--contiguity", contiguity_arg, "queen | rook");
  cmd->add_flag("--within-city-only", cfg.within_city_only,
                "restrict high-deprivation neighbors to city members");
  cmd->add_option("--sweep-direction", sweep_arg, "concentrating | diluting");
  cmd->add_option("--sweep-step", cfg.sweep_step, "cumulative sweep step (divides 100)");
  cmd->add_option("--bin-width", cfg.bin_width, "histogram bin width");
  cmd->add_option("--hc", hc_arg, "robust covariance flavor: hc0 | hc1");
  cmd->add_option("--snap-precision", cfg.snap_precision,
                  "vertex snap grid in decimal degrees");
  cmd->add_option("--geoid-property", cfg.geoid_property,
                  "GeoJSON property holding the GEOID");
  cmd->add_flag("--include-noncontiguous", cfg.include_noncontiguous,
                "keep records outside the lower 48 + DC");
  cmd->add_option("--threads", cfg.threads, "worker count (0 = default)");
  cmd->add_option("--large-city-population", cfg.large_city_population,
                  "large-city population cutoff");
  cmd->add_option("--place-min-population", cfg.place_min_population,
                  "minimum place population for regressions");
}

RunConfig resolve_config(const std::string& config_path, const RunConfig& flags,
                         const std::string& weights_arg, const std::string& threshold_arg,
                         const std::string& contiguity_arg, const std::string& sweep_arg,
                         const std::string& hc_arg, const CLI::App* cmd) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : depriv::pipeline::load_config(config_path);

  // Flags override config values when explicitly given.
  auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--attributes")) cfg.attributes = flags.attributes;
  if (given("--geometry")) cfg.geometry = flags.geometry;
  if (given("--column-map")) cfg.column_map = flags.column_map;
  if (given("--covariates")) cfg.covariate_overrides = flags.covariate_overrides;
  if (given("--out")) cfg.out_dir = flags.out_dir;
  if (given("--within-city-only")) cfg.within_city_only = flags.within_city_only;
  if (given("--sweep-step")) cfg.sweep_step = flags.sweep_step;
  if (given("--bin-width")) cfg.bin_width = flags.bin_width;
  if (given("--snap-precision")) cfg.snap_precision = flags.snap_precision;
  if (given("--geoid-property")) cfg.geoid_property = flags.geoid_property;
  if (given("--include-noncontiguous")) cfg.include_noncontiguous = flags.include_noncontiguous;
  if (given("--threads")) cfg.threads = flags.threads;
  if (given("--large-city-population")) cfg.large_city_population = flags.large_city_population;
  if (given("--place-min-population")) cfg.place_min_population = flags.place_min_population;

  if (!weights_arg.empty()) {
    if (weights_arg == "sd") {
      cfg.weights = depriv::pipeline::WeightsChoice::SD;
    } else if (weights_arg == "pca") {
      cfg.weights = depriv::pipeline::WeightsChoice::PCA;
    } else {
      cfg.weights = depriv::pipeline::WeightsChoice::File;
      cfg.weights_file = weights_arg;
    }
  }
  if (!threshold_arg.empty()) {
    cfg.threshold = depriv::pipeline::parse_threshold_arg(threshold_arg);
    cfg.threshold_set = true;
  }
  if (!contiguity_arg.empty()) {
    if (contiguity_arg == "queen") cfg.contiguity = depriv::spatial::Contiguity::Queen;
    else if (contiguity_arg == "rook") cfg.contiguity = depriv::spatial::Contiguity::Rook;
    else throw depriv::DeprivError(depriv::ErrorFamily::Config, "BAD_CONTIGUITY",
                                   "contiguity: " + contiguity_arg);
  }
  if (!sweep_arg.empty()) {
    if (sweep_arg == "concentrating")
      cfg.sweep_direction = depriv::classify::SweepDirection::Concentrating;
    else if (sweep_arg == "diluting")
      cfg.sweep_direction = depriv::classify::SweepDirection::Diluting;
    else throw depriv::DeprivError(depriv::ErrorFamily::Config, "BAD_SWEEP",
                                   "sweep direction: " + sweep_arg);
  }
  if (!hc_arg.empty()) {
    if (hc_arg == "hc0") cfg.hc_flavor = depriv::stats::HcFlavor::HC0;
    else if (hc_arg == "hc1") cfg.hc_flavor = depriv::stats::HcFlavor::HC1;
    else throw depriv::DeprivError(depriv::ErrorFamily::Config, "BAD_HC",
                                   "hc flavor: " + hc_arg);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block-group deprivation index toolkit"};
  app.require_subcommand(1);

  struct SubState {
    CLI::App* cmd = nullptr;
    RunConfig flags;
    std::string config_path, weights, threshold, contiguity, sweep, hc;
    std::vector<std::string> fetch_vars, fetch_states;
    std::string fetch_endpoint;
  };

  std::map<std::string, SubState> subs;
  for (const char* name : {"score", "classify", "dispersion", "regress", "report", "fetch"}) {
    auto& st = subs[name];
    st.cmd = app.add_subcommand(name, "");
    add_common_options(st.cmd, st.flags, st.config_path, st.weights, st.threshold,
                       st.contiguity, st.sweep, st.hc);
    if (std::string(name) == "fetch") {
      st.cmd->add_option("--endpoint", st.fetch_endpoint, "ACS API base URL");
      st.cmd->add_option("--vars", st.fetch_vars, "ACS variable ids")->delimiter(',');
      st.cmd->add_option("--states", st.fetch_states, "state FIPS codes")->delimiter(',');
    }
  }
  subs["score"].cmd->description("compute weights and scores");
  subs["classify"].cmd->description("apply the high-deprivation threshold and aggregate");
  subs["dispersion"].cmd->description("build contiguity graph and dispersion scores");
  subs["regress"].cmd->description("fit the logistic and OLS model families");
  subs["report"].cmd->description("emit histogram, annotated GeoJSON, and tables");
  subs["fetch"].cmd->description("download raw ACS 5-year tables");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, st] : subs) {
      if (!st.cmd->parsed()) continue;
      RunConfig cfg = resolve_config(st.config_path, st.flags, st.weights, st.threshold,
                                     st.contiguity, st.sweep, st.hc, st.cmd);
      if (name == "fetch") {
        if (!st.fetch_endpoint.empty()) cfg.acs_endpoint = st.fetch_endpoint;
        if (!st.fetch_vars.empty()) cfg.acs_variables = st.fetch_vars;
        if (!st.fetch_states.empty()) cfg.acs_states = st.fetch_states;
      }
      if (name == "score") depriv::pipeline::cmd_score(cfg);
      else if (name == "classify") depriv::pipeline::cmd_classify(cfg);
      else if (name == "dispersion") depriv::pipeline::cmd_dispersion(cfg);
      else if (name == "regress") depriv::pipeline::cmd_regress(cfg);
      else if (name == "report") depriv::pipeline::cmd_report(cfg);
      else if (name == "fetch") depriv::pipeline::cmd_fetch(cfg);
    }
  } catch (const depriv::DeprivError& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return static_cast<int>(e.family());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
