#pragma once

// Core domain types shared by every stage of the pipeline. All of them are
// immutable value types once constructed and safe to share across threads.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace depriv {

// Error families map 1:1 onto CLI exit codes (see tools/depriv.cpp).
enum class ErrorFamily {
  Config = 2,      // bad config file / flags / unknown keys
  Io = 3,          // unreadable or missing file
  Schema = 4,      // malformed input structure (missing column, bad JSON)
  Validation = 5,  // empty or unusable input
  Degenerate = 6,  // degenerate variance/range/eigenspace
  Region = 7,      // unknown or empty region
  Stats = 8,       // singular design, one-class response
  Network = 9,     // fetch failures
};

class DeprivError : public std::runtime_error {
 public:
  DeprivError(ErrorFamily family, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message),
        family_(family),
        code_(std::move(code)) {}

  ErrorFamily family() const { return family_; }
  const std::string& code() const { return code_; }

 private:
  ErrorFamily family_;
  std::string code_;
};

// Machine-readable quarantine reason codes.
namespace reason {
inline constexpr const char* kBadGeoid = "BAD_GEOID";
inline constexpr const char* kOutOfRange = "OUT_OF_RANGE";
inline constexpr const char* kNonNumeric = "NON_NUMERIC";
inline constexpr const char* kDuplicateGeoid = "DUPLICATE_GEOID";
inline constexpr const char* kNoncontiguousState = "NONCONTIGUOUS_STATE";
inline constexpr const char* kZeroDenominator = "ZERO_DENOMINATOR";
inline constexpr const char* kBadRing = "BAD_RING";
inline constexpr const char* kBadGeometryType = "BAD_GEOMETRY_TYPE";
inline constexpr const char* kMissingGeoid = "MISSING_GEOID";
inline constexpr const char* kOrphanGeometry = "ORPHAN_GEOMETRY";
}  // namespace reason

struct QuarantineEntry {
  std::string source;  // file the row came from
  long line = 0;       // 1-based line (or feature index for GeoJSON)
  std::string reason;  // one of reason::k*
  std::string raw;     // offending raw row / feature id

  friend bool operator==(const QuarantineEntry&, const QuarantineEntry&) = default;
};

// One block group's identifiers, index components, and covariates.
// Percent fields are 0-100 values, never fractions. Missing covariates are
// absent optionals, never 0.
struct BlockGroupRecord {
  std::string geoid;       // 12 decimal digits: state 2 + county 3 + tract 6 + bg 1
  std::string state_fips;  // first two digits of geoid
  std::string place_id;    // empty when the block group lies in no Census place

  double percpov = 0.0;
  double percvac = 0.0;
  double unemp = 0.0;
  double nohs = 0.0;

  std::int64_t population = 0;
  std::optional<double> popdens;  // persons per square mile
  std::optional<double> percblk;
  std::optional<double> percwht;

  bool zero_pop = false;       // population == 0; excluded from weight estimation
  bool noncontiguous = false;  // outside the lower 48 + DC (kept only under override)

  friend bool operator==(const BlockGroupRecord&, const BlockGroupRecord&) = default;
};

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
  friend bool operator==(const LonLat&, const LonLat&) = default;
};

using Ring = std::vector<LonLat>;  // closed: front() == back(), size >= 4

struct PolygonShape {
  Ring outer;
  std::vector<Ring> holes;
  friend bool operator==(const PolygonShape&, const PolygonShape&) = default;
};

struct Geometry {
  std::string geoid;
  std::vector<PolygonShape> polygons;
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

enum class WeightScheme { InverseSD, PCA, Explicit };

const char* to_string(WeightScheme s);
WeightScheme weight_scheme_from_string(const std::string& s);

// The four index weights in component order (percpov, percvac, unemp, nohs).
struct WeightVector {
  std::array<double, 4> w{};
  WeightScheme scheme = WeightScheme::Explicit;
  std::optional<std::array<double, 4>> source_sds;  // set when scheme == InverseSD

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

inline constexpr std::array<const char*, 4> kComponentNames = {
    "percpov", "percvac", "unemp", "nohs"};

struct ScoredBlockGroup {
  std::string geoid;
  double raw_score = 0.0;
  double score = 0.0;  // rescaled to [0,100] under the producing context
  bool high_deprivation = false;

  friend bool operator==(const ScoredBlockGroup&, const ScoredBlockGroup&) = default;
};

// Undirected queen/rook contiguity graph. Nodes are sorted geoids; edges are
// index pairs with first < second, sorted. Symmetry and irreflexivity hold by
// construction.
struct AdjacencyGraph {
  std::vector<std::string> nodes;                       // sorted lexicographically
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // a < b, sorted

  // CSR neighbor access, built lazily by finalize().
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> neighbors_flat;

  void finalize();  // sorts/dedups edges and builds the CSR arrays
  std::optional<std::uint32_t> index_of(const std::string& geoid) const;
  // neighbors of node i; valid after finalize()
  const std::uint32_t* neighbors_begin(std::uint32_t i) const {
    return neighbors_flat.data() + offsets[i];
  }
  const std::uint32_t* neighbors_end(std::uint32_t i) const {
    return neighbors_flat.data() + offsets[i + 1];
  }

  friend bool operator==(const AdjacencyGraph& a, const AdjacencyGraph& b) {
    return a.nodes == b.nodes && a.edges == b.edges;
  }
};

enum class RegionKind { Place, State, CustomCity };

const char* to_string(RegionKind k);
RegionKind region_kind_from_string(const std::string& s);

struct RegionSummary {
  std::string region_id;
  RegionKind region_kind = RegionKind::Place;
  std::int64_t n_bg = 0;
  double median_score = 0.0;
  double pct_high = 0.0;                 // share of members classified high, %
  std::optional<double> dispersion;      // only for Place/CustomCity with geometry
  std::optional<double> percpov;         // population-weighted covariates
  std::optional<double> popdens;
  std::optional<double> percblk;
  std::optional<double> percwht;
  std::int64_t population = 0;
  bool suspect_complete = false;  // pct_high == 100, flagged for verification

  friend bool operator==(const RegionSummary&, const RegionSummary&) = default;
};

enum class ModelKind { OLS, Logistic };

const char* to_string(ModelKind m);
ModelKind model_kind_from_string(const std::string& s);

struct RegressionFit {
  ModelKind model = ModelKind::OLS;
  std::vector<std::string> names;      // column labels, intercept first
  std::vector<double> coef;            // intercept first
  std::vector<std::vector<double>> cov;  // robust (OLS) or inverse-information (logistic)
  std::vector<double> p_values;
  double r2 = 0.0;  // R^2 for OLS, McFadden pseudo-R^2 for logistic
  std::int64_t n_obs = 0;
  bool converged = true;
  std::vector<std::string> warnings;  // e.g. SEPARATION

  std::vector<double> standard_errors() const;

  friend bool operator==(const RegressionFit&, const RegressionFit&) = default;
};

// True for the 48 contiguous states plus DC.
bool is_contiguous_state_fips(const std::string& fips);

// Structural GEOID check: exactly 12 decimal digits.
bool is_valid_geoid(const std::string& geoid);

}  // namespace depriv
