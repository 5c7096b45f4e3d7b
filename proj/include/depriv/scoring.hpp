#pragma once

// Index weighting schemes (inverse-SD and first-component PCA), raw and
// rescaled deprivation scores, per-city local weights, and the three-variant
// correlation comparison.
//
// The hot paths (component extraction, scoring map) are OpenMP-parallel with
// serial references kept for testing; all reductions run through the
// deterministic pairwise tree, so results are bit-identical at any worker
// count.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "depriv/types.hpp"

namespace depriv::scoring {

struct SdStats {
  std::array<double, 4> sds{};  // population SDs, order percpov/percvac/unemp/nohs
  std::int64_t n = 0;           // records used (zero_pop excluded)
};

struct PcaResult {
  std::array<double, 4> loadings{};  // unit Euclidean norm
  double explained_share = 0.0;      // lambda_1 / sum(lambda)
  bool sign_flipped = false;         // loadings negated to make percpov positive
  bool degenerate_eigenspace = false;  // top eigenvalue not isolated
};

// Population standard deviation (divide by n) of the four components over
// records with population > 0. Throws DEGENERATE_VARIANCE naming the variable
// when one is constant; requires >= 2 usable records.
SdStats compute_sd_stats(const std::vector<BlockGroupRecord>& records);
SdStats compute_sd_stats_serial(const std::vector<BlockGroupRecord>& records);

// w[k] = 1 / sds[k], scheme InverseSD, source_sds retained.
WeightVector sd_weights(const SdStats& stats);

// First principal component of the 4x4 correlation matrix via cyclic Jacobi
// sweeps. Sign-normalized so the percpov loading is positive. Requires >= 5
// usable records.
PcaResult pca_weights(const std::vector<BlockGroupRecord>& records);

WeightVector pca_weight_vector(const PcaResult& pca);

// raw_score_i = sum_k w[k] * x_i[k]; output sorted by geoid.
std::vector<std::pair<std::string, double>> raw_scores(
    const std::vector<BlockGroupRecord>& records, const WeightVector& weights);
std::vector<std::pair<std::string, double>> raw_scores_serial(
    const std::vector<BlockGroupRecord>& records, const WeightVector& weights);

struct RescaleResult {
  std::vector<double> scores;  // same order as input
  double raw_min = 0.0;
  double raw_max = 0.0;
};

// Linear min-max map onto [0,100]. Throws DEGENERATE_RANGE when all scores
// are equal. The constants are persisted so subsets reuse identical scaling.
RescaleResult rescale_0_100(const std::vector<double>& raw);

// Rescale with previously persisted constants (subsets, later vintages).
std::vector<double> rescale_with(const std::vector<double>& raw, double raw_min,
                                 double raw_max);

// compute_sd_stats + sd_weights restricted to one city's records.
WeightVector city_local_weights(const std::vector<BlockGroupRecord>& city_records);

// Pearson correlations between the three per-city score variants
// (city-weights median, national-weights median, place-level computation).
// Requires >= 3 cities; symmetric with unit diagonal.
std::array<std::array<double, 3>, 3> variant_correlations(
    const std::vector<std::array<double, 3>>& city_variant_scores);

// Same formula as raw_scores applied to one place-level record.
double place_level_score(const std::array<double, 4>& components,
                         const WeightVector& weights);

}  // namespace depriv::scoring
