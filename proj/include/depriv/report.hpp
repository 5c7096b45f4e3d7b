#pragma once

// Report artifacts: SVG histogram, score-annotated GeoJSON, ranking tables,
// scatter data, and the text rendering of regression fits.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depriv/classify.hpp"
#include "depriv/types.hpp"

namespace depriv::report {

// Histogram of scores with an optional vertical threshold marker. One rect
// per non-empty bin; output is well-formed XML.
std::string histogram_svg(const std::vector<std::pair<double, std::int64_t>>& bins,
                          double bin_width, std::optional<double> threshold);

// Copies the input GeoJSON adding `score` (and `high`, when classification is
// present) to each feature's properties, matched by the GEOID property.
// Features without a score are passed through unchanged.
std::string annotate_geojson(const std::string& geojson_text,
                             const std::map<std::string, double>& score_by_geoid,
                             const std::map<std::string, bool>* high_by_geoid,
                             const std::string& geoid_property = "GEOID");

// Two panels (pct_high >= 50, pct_high == 100), each the top `limit` places
// by population, descending.
std::string top_places_table(const std::vector<RegionSummary>& places, int limit = 20);

// Text rendering of a regression table: one column per spec,
// coefficients at 3 decimals with p-values in parentheses.
std::string fits_table(const std::string& title,
                       const std::vector<std::optional<RegressionFit>>& fits,
                       const std::vector<std::string>& spec_errors);

}  // namespace depriv::report
