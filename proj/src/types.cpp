#include "depriv/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace depriv {

const char* to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::InverseSD: return "inverse_sd";
    case WeightScheme::PCA: return "pca";
    case WeightScheme::Explicit: return "explicit";
  }
  return "explicit";
}

WeightScheme weight_scheme_from_string(const std::string& s) {
  if (s == "inverse_sd") return WeightScheme::InverseSD;
  if (s == "pca") return WeightScheme::PCA;
  if (s == "explicit") return WeightScheme::Explicit;
  throw DeprivError(ErrorFamily::Schema, "BAD_SCHEME", "unknown weight scheme: " + s);
}

const char* to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Place: return "place";
    case RegionKind::State: return "state";
    case RegionKind::CustomCity: return "custom_city";
  }
  return "place";
}

RegionKind region_kind_from_string(const std::string& s) {
  if (s == "place") return RegionKind::Place;
  if (s == "state") return RegionKind::State;
  if (s == "custom_city") return RegionKind::CustomCity;
  throw DeprivError(ErrorFamily::Schema, "BAD_REGION_KIND", "unknown region kind: " + s);
}

const char* to_string(ModelKind m) {
  return m == ModelKind::OLS ? "ols" : "logistic";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "ols") return ModelKind::OLS;
  if (s == "logistic") return ModelKind::Logistic;
  throw DeprivError(ErrorFamily::Schema, "BAD_MODEL", "unknown model kind: " + s);
}

void AdjacencyGraph::finalize() {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const auto n = static_cast<std::uint32_t>(nodes.size());
  std::vector<std::uint32_t> degree(n, 0);
  for (const auto& [a, b] : edges) {
    ++degree[a];
    ++degree[b];
  }
  offsets.assign(n + 1, 0);
  for (std::uint32_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + degree[i];
  neighbors_flat.assign(offsets[n], 0);
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [a, b] : edges) {
    neighbors_flat[cursor[a]++] = b;
    neighbors_flat[cursor[b]++] = a;
  }
}

std::optional<std::uint32_t> AdjacencyGraph::index_of(const std::string& geoid) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), geoid);
  if (it == nodes.end() || *it != geoid) return std::nullopt;
  return static_cast<std::uint32_t>(it - nodes.begin());
}

std::vector<double> RegressionFit::standard_errors() const {
  std::vector<double> se(coef.size(), 0.0);
  for (std::size_t k = 0; k < coef.size(); ++k) se[k] = std::sqrt(cov[k][k]);
  return se;
}

bool is_contiguous_state_fips(const std::string& fips) {
  // The 48 contiguous states plus DC (11). Excludes AK (02), HI (15),
  // territories, and unassigned codes.
  static const std::array<const char*, 49> kContiguous = {
      "01", "04", "05", "06", "08", "09", "10", "11", "12", "13", "16", "17",
      "18", "19", "20", "21", "22", "23", "24", "25", "26", "27", "28", "29",
      "30", "31", "32", "33", "34", "35", "36", "37", "38", "39", "40", "41",
      "42", "44", "45", "46", "47", "48", "49", "50", "51", "53", "54", "55",
      "56"};
  return std::any_of(kContiguous.begin(), kContiguous.end(),
                     [&](const char* f) { return fips == f; });
}

bool is_valid_geoid(const std::string& geoid) {
  if (geoid.size() != 12) return false;
  return std::all_of(geoid.begin(), geoid.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace depriv
