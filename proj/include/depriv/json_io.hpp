#pragma once

// Canonical JSON forms for the domain types. Serializing and re-parsing any
// of these yields a field-by-field equal value.

#include <json.hpp>

#include "depriv/types.hpp"

namespace depriv {

using nlohmann::json;

void to_json(json& j, const QuarantineEntry& q);
void from_json(const json& j, QuarantineEntry& q);

void to_json(json& j, const BlockGroupRecord& r);
void from_json(const json& j, BlockGroupRecord& r);

void to_json(json& j, const Geometry& g);
void from_json(const json& j, Geometry& g);

void to_json(json& j, const WeightVector& w);
void from_json(const json& j, WeightVector& w);

void to_json(json& j, const ScoredBlockGroup& s);
void from_json(const json& j, ScoredBlockGroup& s);

void to_json(json& j, const AdjacencyGraph& g);
void from_json(const json& j, AdjacencyGraph& g);

void to_json(json& j, const RegionSummary& r);
void from_json(const json& j, RegionSummary& r);

void to_json(json& j, const RegressionFit& f);
void from_json(const json& j, RegressionFit& f);

}  // namespace depriv
