#include "depriv/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "depriv/csv.hpp"
#include "depriv/json_io.hpp"

namespace depriv::ingest {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& field) {
  const std::string t = trim(field);
  if (t.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct RowError {
  std::string reason;
};

class RowReader {
 public:
  RowReader(const csv::Row& row, const std::map<std::string, std::size_t>& index)
      : row_(row), index_(index) {}

  std::string raw_field(const std::string& column) const {
    auto it = index_.find(column);
    if (it == index_.end() || it->second >= row_.fields.size()) return "";
    return row_.fields[it->second];
  }

  // Direct value or derived percentage per the column source.
  std::optional<double> numeric(const ColumnSource& src, bool* zero_denominator) const {
    if (!src.derived()) {
      return parse_double(raw_field(src.columns.front()));
    }
    double num = 0.0, den = 0.0;
    for (const auto& c : src.numerators) {
      auto v = parse_double(raw_field(c));
      if (!v) return std::nullopt;
      num += *v;
    }
    for (const auto& c : src.denominators) {
      auto v = parse_double(raw_field(c));
      if (!v) return std::nullopt;
      den += *v;
    }
    if (den == 0.0) {
      *zero_denominator = true;
      return std::nullopt;
    }
    return 100.0 * num / den;
  }

 private:
  const csv::Row& row_;
  const std::map<std::string, std::size_t>& index_;
};

bool percent_in_range(double v) { return v >= 0.0 && v <= 100.0; }

}  // namespace

ColumnMap ColumnMap::default_map() {
  ColumnMap m;
  for (const char* name : {"geoid", "percpov", "percvac", "unemp", "nohs",
                           "population", "popdens", "percblk", "percwht", "place_id"}) {
    m.sources[name] = ColumnSource{{name}, {}, {}};
  }
  return m;
}

ColumnMap ColumnMap::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DeprivError(ErrorFamily::Io, "UNREADABLE_FILE", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DeprivError(ErrorFamily::Schema, "BAD_COLUMN_MAP",
                      std::string("column map parse error: ") + e.what());
  }
  ColumnMap m = default_map();
  for (const auto& [logical, spec] : j.items()) {
    if (!m.sources.count(logical)) {
      throw DeprivError(ErrorFamily::Schema, "BAD_COLUMN_MAP",
                        "unknown logical column: " + logical);
    }
    ColumnSource src;
    if (spec.is_string()) {
      src.columns = {spec.get<std::string>()};
    } else if (spec.is_object()) {
      for (const auto& c : spec.at("numerators")) src.numerators.push_back(c.get<std::string>());
      for (const auto& c : spec.at("denominators"))
        src.denominators.push_back(c.get<std::string>());
    } else if (spec.is_null()) {
      src.columns = {};  // column absent from this CSV (optional logicals only)
    } else {
      throw DeprivError(ErrorFamily::Schema, "BAD_COLUMN_MAP",
                        "column spec must be a string or {numerators, denominators}");
    }
    m.sources[logical] = std::move(src);
  }
  return m;
}

Dataset parse_attributes_string(const std::string& text, const std::string& source,
                                const ParseOptions& opts) {
  auto rows = csv::read_string(text, source);
  if (rows.empty()) {
    throw DeprivError(ErrorFamily::Schema, "MISSING_HEADER", source + ": no header row");
  }

  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    col_index.emplace(trim(rows[0].fields[i]), i);
  }

  if (!opts.columns.sources.count("geoid") ||
      opts.columns.sources.at("geoid").columns.empty()) {
    throw DeprivError(ErrorFamily::Schema, "BAD_COLUMN_MAP",
                      "geoid must map to a direct column");
  }

  // Every physically mapped column must exist in the header.
  for (const auto& [logical, src] : opts.columns.sources) {
    std::vector<std::string> needed = src.columns;
    needed.insert(needed.end(), src.numerators.begin(), src.numerators.end());
    needed.insert(needed.end(), src.denominators.begin(), src.denominators.end());
    const bool optional_logical =
        logical == "popdens" || logical == "percblk" || logical == "percwht" ||
        logical == "place_id";
    for (const auto& col : needed) {
      if (!col_index.count(col)) {
        if (optional_logical && !src.derived()) continue;  // treated as absent
        throw DeprivError(ErrorFamily::Schema, "MISSING_COLUMN",
                          source + ": header lacks mapped column '" + col + "'");
      }
    }
  }

  Dataset ds;
  ds.provenance = source;
  std::set<std::string> seen_geoids;

  const auto& sources = opts.columns.sources;
  auto src_of = [&](const char* logical) -> const ColumnSource& {
    return sources.at(logical);
  };

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    RowReader reader(row, col_index);
    auto quarantine = [&](const char* reason) {
      ds.quarantine.push_back(QuarantineEntry{source, row.line, reason, row.raw});
    };

    const std::string geoid = trim(reader.raw_field(src_of("geoid").columns.front()));
    if (!is_valid_geoid(geoid)) {
      quarantine(reason::kBadGeoid);
      continue;
    }
    if (seen_geoids.count(geoid)) {
      quarantine(reason::kDuplicateGeoid);
      continue;
    }

    BlockGroupRecord rec;
    rec.geoid = geoid;
    rec.state_fips = geoid.substr(0, 2);
    rec.noncontiguous = !is_contiguous_state_fips(rec.state_fips);
    if (rec.noncontiguous && !opts.include_noncontiguous) {
      quarantine(reason::kNoncontiguousState);
      continue;
    }

    bool zero_den = false;
    bool non_numeric = false;
    auto required = [&](const char* logical) {
      auto v = reader.numeric(src_of(logical), &zero_den);
      if (!v) non_numeric = true;
      return v.value_or(0.0);
    };
    rec.percpov = required("percpov");
    rec.percvac = required("percvac");
    rec.unemp = required("unemp");
    rec.nohs = required("nohs");

    const auto pop = reader.numeric(src_of("population"), &zero_den);
    if (!pop || *pop != std::floor(*pop)) non_numeric = true;

    if (zero_den) {
      quarantine(reason::kZeroDenominator);
      continue;
    }
    if (non_numeric) {
      quarantine(reason::kNonNumeric);
      continue;
    }
    rec.population = static_cast<std::int64_t>(*pop);

    auto optional_of = [&](const char* logical) -> std::optional<double> {
      const auto& src = src_of(logical);
      if (!src.derived() &&
          (src.columns.empty() || !col_index.count(src.columns.front()))) {
        return std::nullopt;  // column not present in this file
      }
      bool zd = false;
      auto v = reader.numeric(src, &zd);
      if (zd) return std::nullopt;  // optional covariate with empty denominator
      return v;
    };
    rec.popdens = optional_of("popdens");
    rec.percblk = optional_of("percblk");
    rec.percwht = optional_of("percwht");
    if (sources.count("place_id") && !src_of("place_id").columns.empty()) {
      rec.place_id = trim(reader.raw_field(src_of("place_id").columns.front()));
    }

    const bool out_of_range =
        !percent_in_range(rec.percpov) || !percent_in_range(rec.percvac) ||
        !percent_in_range(rec.unemp) || !percent_in_range(rec.nohs) ||
        rec.population < 0 || (rec.popdens && *rec.popdens < 0.0) ||
        (rec.percblk && !percent_in_range(*rec.percblk)) ||
        (rec.percwht && !percent_in_range(*rec.percwht));
    if (out_of_range) {
      quarantine(reason::kOutOfRange);
      continue;
    }

    rec.zero_pop = rec.population == 0;
    seen_geoids.insert(rec.geoid);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset parse_attributes_csv(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DeprivError(ErrorFamily::Io, "UNREADABLE_FILE", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_attributes_string(buf.str(), path, opts);
}

Dataset merge_datasets(std::vector<Dataset> parts) {
  std::sort(parts.begin(), parts.end(),
            [](const Dataset& a, const Dataset& b) { return a.provenance < b.provenance; });

  Dataset out;
  std::set<std::string> seen;
  std::string provenance;
  for (auto& part : parts) {
    if (!provenance.empty()) provenance += " + ";
    provenance += part.provenance;
    for (auto& q : part.quarantine) out.quarantine.push_back(std::move(q));
    for (auto& rec : part.records) {
      if (!seen.insert(rec.geoid).second) {
        out.quarantine.push_back(
            QuarantineEntry{part.provenance, 0, reason::kDuplicateGeoid, rec.geoid});
        continue;
      }
      out.records.push_back(std::move(rec));
    }
    for (auto& [geoid, geom] : part.geometries) out.geometries.emplace(geoid, geom);
  }
  out.provenance = provenance;
  std::sort(out.records.begin(), out.records.end(),
            [](const BlockGroupRecord& a, const BlockGroupRecord& b) {
              return a.geoid < b.geoid;
            });
  std::sort(out.quarantine.begin(), out.quarantine.end(),
            [](const QuarantineEntry& a, const QuarantineEntry& b) {
              return std::tie(a.source, a.line, a.reason, a.raw) <
                     std::tie(b.source, b.line, b.reason, b.raw);
            });
  return out;
}

Dataset parse_attributes_dir(const std::string& dir_path, const ParseOptions& opts) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_path, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      paths.push_back(entry.path().string());
    }
  }
  if (ec) {
    throw DeprivError(ErrorFamily::Io, "UNREADABLE_FILE", "cannot list " + dir_path);
  }
  if (paths.empty()) {
    throw DeprivError(ErrorFamily::Validation, "EMPTY_INPUT",
                      "no .csv files under " + dir_path);
  }
  std::sort(paths.begin(), paths.end());

  std::vector<Dataset> parts(paths.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(paths.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      parts[i] = parse_attributes_csv(paths[i], opts);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return merge_datasets(std::move(parts));
}

namespace {

// Parses one GeoJSON ring; throws RowError on structural problems.
Ring parse_ring(const json& arr) {
  if (!arr.is_array() || arr.size() < 4) throw RowError{reason::kBadRing};
  Ring ring;
  ring.reserve(arr.size());
  for (const auto& pt : arr) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw RowError{reason::kBadRing};
    }
    const double lon = pt[0].get<double>();
    const double lat = pt[1].get<double>();
    if (lon < -180.0 || lon > 180.0 || lat < -90.0 || lat > 90.0) {
      throw RowError{reason::kOutOfRange};
    }
    ring.push_back({lon, lat});
  }
  if (!(ring.front() == ring.back())) throw RowError{reason::kBadRing};
  return ring;
}

PolygonShape parse_polygon(const json& rings) {
  if (!rings.is_array() || rings.empty()) throw RowError{reason::kBadRing};
  PolygonShape poly;
  poly.outer = parse_ring(rings.at(0));
  for (std::size_t k = 1; k < rings.size(); ++k) poly.holes.push_back(parse_ring(rings.at(k)));
  return poly;
}

}  // namespace

GeometryParse parse_geometry_string(const std::string& text, const std::string& source,
                                    const std::string& geoid_property) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DeprivError(ErrorFamily::Schema, "BAD_GEOJSON",
                      source + ": malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!root.is_object() || root.value("type", "") != "FeatureCollection" ||
      !root.contains("features") || !root["features"].is_array()) {
    throw DeprivError(ErrorFamily::Schema, "BAD_GEOJSON",
                      source + ": not a FeatureCollection");
  }

  GeometryParse out;
  long index = 0;
  for (const auto& feature : root["features"]) {
    ++index;
    auto quarantine = [&](const char* code, const std::string& raw) {
      out.quarantine.push_back(QuarantineEntry{source, index, code, raw});
    };

    std::string geoid;
    if (feature.contains("properties") && feature["properties"].is_object()) {
      const auto& props = feature["properties"];
      if (props.contains(geoid_property)) {
        const auto& g = props.at(geoid_property);
        if (g.is_string()) {
          geoid = g.get<std::string>();
        } else if (g.is_number_integer()) {
          char buf[16];
          std::snprintf(buf, sizeof(buf), "%012lld",
                        static_cast<long long>(g.get<std::int64_t>()));
          geoid = buf;
        }
      }
    }
    if (geoid.empty()) {
      quarantine(reason::kMissingGeoid, "feature " + std::to_string(index));
      continue;
    }
    if (out.geometries.count(geoid)) {
      quarantine(reason::kDuplicateGeoid, geoid);
      continue;
    }

    if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
      quarantine(reason::kBadGeometryType, geoid);
      continue;
    }
    const auto& geom = feature["geometry"];
    const std::string type = geom.value("type", "");

    Geometry g;
    g.geoid = geoid;
    try {
      if (type == "Polygon") {
        g.polygons.push_back(parse_polygon(geom.at("coordinates")));
      } else if (type == "MultiPolygon") {
        for (const auto& rings : geom.at("coordinates")) {
          g.polygons.push_back(parse_polygon(rings));
        }
      } else {
        quarantine(reason::kBadGeometryType, geoid);
        continue;
      }
    } catch (const RowError& e) {
      quarantine(e.reason.c_str(), geoid);
      continue;
    } catch (const json::exception&) {
      quarantine(reason::kBadRing, geoid);
      continue;
    }
    out.geometries.emplace(geoid, std::move(g));
  }
  return out;
}

GeometryParse parse_geometry_geojson(const std::string& path,
                                     const std::string& geoid_property) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DeprivError(ErrorFamily::Io, "UNREADABLE_FILE", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_geometry_string(buf.str(), path, geoid_property);
}

Dataset join(const Dataset& attrs, const std::map<std::string, Geometry>& geoms) {
  Dataset out = attrs;
  out.geometries.clear();

  std::set<std::string> record_geoids;
  for (const auto& r : out.records) record_geoids.insert(r.geoid);

  std::size_t attached = 0;
  std::vector<QuarantineEntry> orphan_entries;
  for (const auto& [geoid, geom] : geoms) {
    if (record_geoids.count(geoid)) {
      out.geometries.emplace(geoid, geom);
      ++attached;
    } else {
      orphan_entries.push_back(QuarantineEntry{"join", 0, reason::kOrphanGeometry, geoid});
    }
  }

  // Deduplicate so that joining the same geometries twice is a no-op.
  std::set<std::tuple<std::string, long, std::string, std::string>> seen;
  for (const auto& q : out.quarantine) seen.insert({q.source, q.line, q.reason, q.raw});
  for (auto& q : orphan_entries) {
    if (seen.insert({q.source, q.line, q.reason, q.raw}).second) {
      out.quarantine.push_back(std::move(q));
    }
  }

  // Replace (not append) any previous join note so re-joining is idempotent.
  const std::string marker = " | join:";
  const auto pos = out.provenance.find(marker);
  if (pos != std::string::npos) out.provenance.resize(pos);
  out.provenance += marker + " attached " + std::to_string(attached) + " of " +
                    std::to_string(geoms.size()) + " geometries";
  return out;
}

void write_quarantine_jsonl(const std::string& path,
                            const std::vector<QuarantineEntry>& entries) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw DeprivError(ErrorFamily::Io, "UNWRITABLE_FILE", "cannot write " + path);
  for (const auto& q : entries) {
    json j = q;
    outf << j.dump() << "\n";
  }
}

}  // namespace depriv::ingest
