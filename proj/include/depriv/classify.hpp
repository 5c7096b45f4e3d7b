#pragma once

// High-deprivation threshold, per-region aggregation (%HD, medians,
// population-weighted covariates), summary statistics, the score histogram,
// and the cumulative racial-share sweep.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depriv/types.hpp"

namespace depriv::classify {

enum class ThresholdMode { BenchmarkRegionMedian, ExplicitValue };

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::ExplicitValue;
  std::string region_id;  // used when mode == BenchmarkRegionMedian
  double value = 0.0;     // used when mode == ExplicitValue
};

// Odd n: middle order statistic; even n: mean of the two middle ones.
// Throws EMPTY_REGION on empty input.
double region_median(std::vector<double> scores);

// Region membership: geoid -> region id. Used to resolve benchmark regions
// and to aggregate. A geoid maps to its place_id (possibly empty) and state.
struct Membership {
  std::map<std::string, std::string> place_of;  // geoid -> place_id ("" = none)
  std::map<std::string, std::string> state_of;  // geoid -> state fips
  std::map<std::string, const BlockGroupRecord*> record_of;

  static Membership from_records(const std::vector<BlockGroupRecord>& records);
};

// Returns the benchmark region's median score or the explicit value.
// region_id resolves as a place_id first, then a state fips.
double resolve_threshold(const ThresholdSpec& spec,
                         const std::vector<ScoredBlockGroup>& scored,
                         const Membership& membership);

// high <=> score > threshold, strictly.
std::vector<ScoredBlockGroup> classify_high(std::vector<ScoredBlockGroup> scored,
                                            double threshold);

// Per-region covariate override rows (e.g. published place-level Census figures).
struct CovariateOverride {
  std::optional<double> percpov, popdens, percblk, percwht;
};

struct AggregateOptions {
  std::map<std::string, CovariateOverride> overrides;  // region_id -> values
};

// One summary per region of the requested kind, sorted descending by
// pct_high with region_id tiebreak. Place aggregation skips records with an
// empty place_id.
std::vector<RegionSummary> pct_high_by_region(
    const std::vector<ScoredBlockGroup>& classified, const Membership& membership,
    RegionKind kind, const AggregateOptions& opts = {});

struct SummaryStats {
  double min = 0, mean = 0, median = 0, max = 0, sd = 0;  // sd population-form
};

SummaryStats summary_stats(const std::vector<double>& scores);

// Half-open bins [k*w, (k+1)*w); only non-empty bins, sorted by lower edge.
std::vector<std::pair<double, std::int64_t>> histogram(
    const std::vector<double>& scores, double bin_width);

enum class SweepGroup { Black, White };
enum class SweepDirection {
  Concentrating,  // subset: group share >= (100 - t); t = 100 is the full sample
  Diluting,       // opposite reading: group share <= (100 - t)
};

struct SweepEntry {
  double t = 0.0;  // cumulative percentage step
  std::optional<double> median_score;
  std::optional<double> sd;
  double population_share_pct = 0.0;  // subset population / total, in percent
};

// For t = step, 2*step, ..., 100 reports median/sd of scores and the subset's
// population share. Records lacking the group share are excluded up front.
// step must divide 100 evenly.
std::vector<SweepEntry> cumulative_group_sweep(
    const std::vector<ScoredBlockGroup>& scored, const Membership& membership,
    SweepGroup group, int step,
    SweepDirection direction = SweepDirection::Concentrating);

}  // namespace depriv::classify
