#include "depriv/json_io.hpp"

namespace depriv {

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v.has_value()) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) {
    v = j.at(key).get<T>();
  } else {
    v.reset();
  }
}

json ring_to_json(const Ring& ring) {
  json arr = json::array();
  for (const auto& p : ring) arr.push_back(json::array({p.lon, p.lat}));
  return arr;
}

Ring ring_from_json(const json& arr) {
  Ring ring;
  ring.reserve(arr.size());
  for (const auto& p : arr) ring.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return ring;
}

}  // namespace

void to_json(json& j, const QuarantineEntry& q) {
  j = json{{"source", q.source}, {"line", q.line}, {"reason", q.reason}, {"raw", q.raw}};
}

void from_json(const json& j, QuarantineEntry& q) {
  j.at("source").get_to(q.source);
  j.at("line").get_to(q.line);
  j.at("reason").get_to(q.reason);
  j.at("raw").get_to(q.raw);
}

void to_json(json& j, const BlockGroupRecord& r) {
  j = json{{"geoid", r.geoid},
           {"state_fips", r.state_fips},
           {"place_id", r.place_id},
           {"percpov", r.percpov},
           {"percvac", r.percvac},
           {"unemp", r.unemp},
           {"nohs", r.nohs},
           {"population", r.population},
           {"zero_pop", r.zero_pop},
           {"noncontiguous", r.noncontiguous}};
  put_optional(j, "popdens", r.popdens);
  put_optional(j, "percblk", r.percblk);
  put_optional(j, "percwht", r.percwht);
}

void from_json(const json& j, BlockGroupRecord& r) {
  j.at("geoid").get_to(r.geoid);
  j.at("state_fips").get_to(r.state_fips);
  j.at("place_id").get_to(r.place_id);
  j.at("percpov").get_to(r.percpov);
  j.at("percvac").get_to(r.percvac);
  j.at("unemp").get_to(r.unemp);
  j.at("nohs").get_to(r.nohs);
  j.at("population").get_to(r.population);
  j.at("zero_pop").get_to(r.zero_pop);
  j.at("noncontiguous").get_to(r.noncontiguous);
  get_optional(j, "popdens", r.popdens);
  get_optional(j, "percblk", r.percblk);
  get_optional(j, "percwht", r.percwht);
}

void to_json(json& j, const Geometry& g) {
  json polys = json::array();
  for (const auto& poly : g.polygons) {
    json rings = json::array();
    rings.push_back(ring_to_json(poly.outer));
    for (const auto& hole : poly.holes) rings.push_back(ring_to_json(hole));
    polys.push_back(rings);
  }
  j = json{{"geoid", g.geoid}, {"polygons", polys}};
}

void from_json(const json& j, Geometry& g) {
  j.at("geoid").get_to(g.geoid);
  g.polygons.clear();
  for (const auto& rings : j.at("polygons")) {
    PolygonShape poly;
    poly.outer = ring_from_json(rings.at(0));
    for (std::size_t k = 1; k < rings.size(); ++k) {
      poly.holes.push_back(ring_from_json(rings.at(k)));
    }
    g.polygons.push_back(std::move(poly));
  }
}

void to_json(json& j, const WeightVector& w) {
  j = json{{"scheme", to_string(w.scheme)}, {"weights", w.w}};
  if (w.source_sds) j["source_sds"] = *w.source_sds;
}

void from_json(const json& j, WeightVector& w) {
  w.scheme = weight_scheme_from_string(j.at("scheme").get<std::string>());
  j.at("weights").get_to(w.w);
  if (j.contains("source_sds") && !j.at("source_sds").is_null()) {
    std::array<double, 4> sds{};
    j.at("source_sds").get_to(sds);
    w.source_sds = sds;
  } else {
    w.source_sds.reset();
  }
}

void to_json(json& j, const ScoredBlockGroup& s) {
  j = json{{"geoid", s.geoid},
           {"raw_score", s.raw_score},
           {"score", s.score},
           {"high_deprivation", s.high_deprivation}};
}

void from_json(const json& j, ScoredBlockGroup& s) {
  j.at("geoid").get_to(s.geoid);
  j.at("raw_score").get_to(s.raw_score);
  j.at("score").get_to(s.score);
  j.at("high_deprivation").get_to(s.high_deprivation);
}

void to_json(json& j, const AdjacencyGraph& g) {
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back(json::array({a, b}));
  j = json{{"nodes", g.nodes}, {"edges", edges}};
}

void from_json(const json& j, AdjacencyGraph& g) {
  j.at("nodes").get_to(g.nodes);
  g.edges.clear();
  for (const auto& e : j.at("edges")) {
    g.edges.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
  }
  g.finalize();
}

void to_json(json& j, const RegionSummary& r) {
  j = json{{"region_id", r.region_id},
           {"region_kind", to_string(r.region_kind)},
           {"n_bg", r.n_bg},
           {"median_score", r.median_score},
           {"pct_high", r.pct_high},
           {"population", r.population},
           {"suspect_complete", r.suspect_complete}};
  put_optional(j, "dispersion", r.dispersion);
  put_optional(j, "percpov", r.percpov);
  put_optional(j, "popdens", r.popdens);
  put_optional(j, "percblk", r.percblk);
  put_optional(j, "percwht", r.percwht);
}

void from_json(const json& j, RegionSummary& r) {
  j.at("region_id").get_to(r.region_id);
  r.region_kind = region_kind_from_string(j.at("region_kind").get<std::string>());
  j.at("n_bg").get_to(r.n_bg);
  j.at("median_score").get_to(r.median_score);
  j.at("pct_high").get_to(r.pct_high);
  j.at("population").get_to(r.population);
  j.at("suspect_complete").get_to(r.suspect_complete);
  get_optional(j, "dispersion", r.dispersion);
  get_optional(j, "percpov", r.percpov);
  get_optional(j, "popdens", r.popdens);
  get_optional(j, "percblk", r.percblk);
  get_optional(j, "percwht", r.percwht);
}

void to_json(json& j, const RegressionFit& f) {
  j = json{{"model", to_string(f.model)},
           {"names", f.names},
           {"coef", f.coef},
           {"cov", f.cov},
           {"p_values", f.p_values},
           {"r2", f.r2},
           {"n_obs", f.n_obs},
           {"converged", f.converged},
           {"warnings", f.warnings}};
}

void from_json(const json& j, RegressionFit& f) {
  f.model = model_kind_from_string(j.at("model").get<std::string>());
  j.at("names").get_to(f.names);
  j.at("coef").get_to(f.coef);
  j.at("cov").get_to(f.cov);
  j.at("p_values").get_to(f.p_values);
  j.at("r2").get_to(f.r2);
  j.at("n_obs").get_to(f.n_obs);
  j.at("converged").get_to(f.converged);
  j.at("warnings").get_to(f.warnings);
}

}  // namespace depriv
