#include "depriv/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depriv/linalg.hpp"
#include "depriv/parallel.hpp"
#include "depriv/stats.hpp"

namespace depriv::scoring {

namespace {

double component(const BlockGroupRecord& r, std::size_t k) {
  switch (k) {
    case 0: return r.percpov;
    case 1: return r.percvac;
    case 2: return r.unemp;
    default: return r.nohs;
  }
}

// Indices of the records that enter weight estimation (zero_pop excluded).
std::vector<std::size_t> weight_basis(const std::vector<BlockGroupRecord>& records) {
  std::vector<std::size_t> idx;
  idx.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].zero_pop) idx.push_back(i);
  }
  return idx;
}

SdStats sd_stats_impl(const std::vector<BlockGroupRecord>& records, bool parallel) {
  const auto idx = weight_basis(records);
  const auto n = static_cast<std::ptrdiff_t>(idx.size());
  if (n < 2) {
    throw DeprivError(ErrorFamily::Validation, "TOO_FEW_RECORDS",
                      "need >= 2 records with population > 0 for SD weights");
  }

  SdStats stats;
  stats.n = n;
  std::vector<double> column(idx.size());
  std::vector<double> sq_dev(idx.size());
  for (std::size_t k = 0; k < 4; ++k) {
#pragma omp parallel for if (parallel) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) column[i] = component(records[idx[i]], k);

    const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
    if (*mn == *mx) {
      throw DeprivError(ErrorFamily::Degenerate, "DEGENERATE_VARIANCE",
                        std::string("variable is constant: ") + kComponentNames[k]);
    }
    const double mean = pairwise_sum(column) / static_cast<double>(n);
#pragma omp parallel for if (parallel) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double d = column[i] - mean;
      sq_dev[i] = d * d;
    }
    stats.sds[k] = std::sqrt(pairwise_sum(sq_dev) / static_cast<double>(n));
  }
  return stats;
}

std::vector<std::pair<std::string, double>> raw_scores_impl(
    const std::vector<BlockGroupRecord>& records, const WeightVector& weights,
    bool parallel) {
  for (double w : weights.w) {
    if (!std::isfinite(w)) {
      throw DeprivError(ErrorFamily::Validation, "BAD_WEIGHTS", "weights must be finite");
    }
  }
  std::vector<std::pair<std::string, double>> out(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for if (parallel) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    out[i].first = r.geoid;
    out[i].second = weights.w[0] * r.percpov + weights.w[1] * r.percvac +
                    weights.w[2] * r.unemp + weights.w[3] * r.nohs;
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace

SdStats compute_sd_stats(const std::vector<BlockGroupRecord>& records) {
  return sd_stats_impl(records, true);
}

SdStats compute_sd_stats_serial(const std::vector<BlockGroupRecord>& records) {
  return sd_stats_impl(records, false);
}

WeightVector sd_weights(const SdStats& stats) {
  WeightVector wv;
  wv.scheme = WeightScheme::InverseSD;
  wv.source_sds = stats.sds;
  for (std::size_t k = 0; k < 4; ++k) wv.w[k] = 1.0 / stats.sds[k];
  return wv;
}

PcaResult pca_weights(const std::vector<BlockGroupRecord>& records) {
  const auto idx = weight_basis(records);
  const auto n = static_cast<std::ptrdiff_t>(idx.size());
  if (n < 5) {
    throw DeprivError(ErrorFamily::Validation, "TOO_FEW_RECORDS",
                      "need >= 5 records with population > 0 for PCA weights");
  }

  // Deviation columns for the four components.
  std::array<std::vector<double>, 4> dev;
  std::array<double, 4> sd{};
  std::vector<double> buf(idx.size());
  for (std::size_t k = 0; k < 4; ++k) {
    dev[k].resize(idx.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) dev[k][i] = component(records[idx[i]], k);
    const auto [mn, mx] = std::minmax_element(dev[k].begin(), dev[k].end());
    if (*mn == *mx) {
      throw DeprivError(ErrorFamily::Degenerate, "DEGENERATE_VARIANCE",
                        std::string("variable is constant: ") + kComponentNames[k]);
    }
    const double mean = pairwise_sum(dev[k]) / static_cast<double>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) dev[k][i] -= mean;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) buf[i] = dev[k][i] * dev[k][i];
    sd[k] = std::sqrt(pairwise_sum(buf) / static_cast<double>(n));
  }

  // Correlation matrix of the standardized variables.
  linalg::Matrix corr(4, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    corr(j, j) = 1.0;
    for (std::size_t k = j + 1; k < 4; ++k) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) buf[i] = dev[j][i] * dev[k][i];
      const double cov = pairwise_sum(buf) / static_cast<double>(n);
      const double c = cov / (sd[j] * sd[k]);
      if (!std::isfinite(c)) {
        throw DeprivError(ErrorFamily::Validation, "NON_FINITE",
                          "correlation matrix has non-finite entries");
      }
      corr(j, k) = c;
      corr(k, j) = c;
    }
  }

  const auto eig = linalg::jacobi_eigen(corr, 10000);

  PcaResult result;
  double total = 0.0;
  for (double v : eig.values) total += v;
  result.explained_share = eig.values[0] / total;
  result.degenerate_eigenspace =
      eig.values[0] - eig.values[1] <= 1e-8 * std::max(1.0, std::fabs(eig.values[0]));
  for (std::size_t k = 0; k < 4; ++k) result.loadings[k] = eig.vectors[0][k];
  if (result.loadings[0] < 0.0) {
    for (auto& l : result.loadings) l = -l;
    result.sign_flipped = true;
  }
  return result;
}

WeightVector pca_weight_vector(const PcaResult& pca) {
  WeightVector wv;
  wv.scheme = WeightScheme::PCA;
  wv.w = pca.loadings;
  return wv;
}

std::vector<std::pair<std::string, double>> raw_scores(
    const std::vector<BlockGroupRecord>& records, const WeightVector& weights) {
  return raw_scores_impl(records, weights, true);
}

std::vector<std::pair<std::string, double>> raw_scores_serial(
    const std::vector<BlockGroupRecord>& records, const WeightVector& weights) {
  return raw_scores_impl(records, weights, false);
}

RescaleResult rescale_0_100(const std::vector<double>& raw) {
  if (raw.size() < 2) {
    throw DeprivError(ErrorFamily::Validation, "TOO_FEW_RECORDS",
                      "need >= 2 scores to rescale");
  }
  const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
  if (*mn == *mx) {
    throw DeprivError(ErrorFamily::Degenerate, "DEGENERATE_RANGE",
                      "all raw scores are equal");
  }
  RescaleResult out;
  out.raw_min = *mn;
  out.raw_max = *mx;
  out.scores = rescale_with(raw, out.raw_min, out.raw_max);
  return out;
}

std::vector<double> rescale_with(const std::vector<double>& raw, double raw_min,
                                 double raw_max) {
  if (!(raw_max > raw_min)) {
    throw DeprivError(ErrorFamily::Degenerate, "DEGENERATE_RANGE",
                      "raw_max must exceed raw_min");
  }
  const double span = raw_max - raw_min;
  std::vector<double> out(raw.size());
  const auto n = static_cast<std::ptrdiff_t>(raw.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = 100.0 * (raw[i] - raw_min) / span;
  return out;
}

WeightVector city_local_weights(const std::vector<BlockGroupRecord>& city_records) {
  return sd_weights(compute_sd_stats(city_records));
}

std::array<std::array<double, 3>, 3> variant_correlations(
    const std::vector<std::array<double, 3>>& city_variant_scores) {
  if (city_variant_scores.size() < 3) {
    throw DeprivError(ErrorFamily::Validation, "TOO_FEW_RECORDS",
                      "need >= 3 cities for the variant comparison");
  }
  std::array<std::vector<double>, 3> cols;
  for (const auto& row : city_variant_scores) {
    for (std::size_t v = 0; v < 3; ++v) cols[v].push_back(row[v]);
  }
  std::array<std::array<double, 3>, 3> corr{};
  for (std::size_t a = 0; a < 3; ++a) {
    corr[a][a] = 1.0;
    for (std::size_t b = a + 1; b < 3; ++b) {
      const double c = stats::pearson_corr(cols[a], cols[b]);
      corr[a][b] = c;
      corr[b][a] = c;
    }
  }
  return corr;
}

double place_level_score(const std::array<double, 4>& components,
                         const WeightVector& weights) {
  return weights.w[0] * components[0] + weights.w[1] * components[1] +
         weights.w[2] * components[2] + weights.w[3] * components[3];
}

}  // namespace depriv::scoring
