#pragma once

// Attribute CSV and boundary GeoJSON parsing, GEOID join, quarantine report.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depriv/types.hpp"

namespace depriv::ingest {

// Maps a logical column either directly to a CSV column or to a derived
// percentage 100 * sum(numerators) / sum(denominators).
struct ColumnSource {
  std::vector<std::string> columns;       // direct: exactly one entry
  std::vector<std::string> numerators;    // derivation mode
  std::vector<std::string> denominators;  // derivation mode
  bool derived() const { return !numerators.empty(); }
};

struct ColumnMap {
  // logical name -> source; logical names: geoid, percpov, percvac, unemp,
  // nohs, population, popdens, percblk, percwht, place_id
  std::map<std::string, ColumnSource> sources;

  // Identity mapping for CSVs that already use the logical names.
  static ColumnMap default_map();
  // Loaded from a JSON file {"logical": "column"} or
  // {"logical": {"numerators": [...], "denominators": [...]}}.
  static ColumnMap from_json_file(const std::string& path);
};

struct Dataset {
  std::vector<BlockGroupRecord> records;
  std::map<std::string, Geometry> geometries;  // geoid -> geometry, subset of records
  std::string provenance;
  std::vector<QuarantineEntry> quarantine;
};

struct ParseOptions {
  ColumnMap columns = ColumnMap::default_map();
  bool include_noncontiguous = false;  // keep AK/HI/territory records, flagged
};

// One BlockGroupRecord per valid row; invalid rows quarantined with reason in
// {BAD_GEOID, OUT_OF_RANGE, NON_NUMERIC, DUPLICATE_GEOID, NONCONTIGUOUS_STATE,
// ZERO_DENOMINATOR}. accepted + quarantined == data rows, always.
Dataset parse_attributes_csv(const std::string& path, const ParseOptions& opts = {});

// Same contract over in-memory text (tests, fetched buffers).
Dataset parse_attributes_string(const std::string& text, const std::string& source,
                                const ParseOptions& opts = {});

// Parses every *.csv under a directory (per-state fetch output). Files parse
// concurrently; the merged Dataset is identical to sequential processing.
Dataset parse_attributes_dir(const std::string& dir_path, const ParseOptions& opts = {});

// Order-insensitive merge keyed by geoid: records sorted by geoid, quarantine
// sorted by (source, line, reason), duplicate geoids across parts quarantined
// DUPLICATE_GEOID (the part with the lexicographically first provenance wins).
Dataset merge_datasets(std::vector<Dataset> parts);

struct GeometryParse {
  std::map<std::string, Geometry> geometries;
  std::vector<QuarantineEntry> quarantine;
};

// FeatureCollection with Polygon/MultiPolygon features carrying a GEOID
// property. Unclosed rings -> BAD_RING; other geometry types ->
// BAD_GEOMETRY_TYPE; malformed JSON -> fatal Schema error with byte offset.
GeometryParse parse_geometry_geojson(const std::string& path,
                                     const std::string& geoid_property = "GEOID");
GeometryParse parse_geometry_string(const std::string& text, const std::string& source,
                                    const std::string& geoid_property = "GEOID");

// Attaches geometries by exact geoid match. Records without geometry remain;
// geometries without records are quarantined ORPHAN_GEOMETRY. Idempotent:
// join(join(d, g), g) == join(d, g).
Dataset join(const Dataset& attrs, const std::map<std::string, Geometry>& geoms);

// JSON-lines quarantine report, one {source, line, reason, raw} per entry.
void write_quarantine_jsonl(const std::string& path,
                            const std::vector<QuarantineEntry>& entries);

}  // namespace depriv::ingest
