#pragma once

// Queen/rook contiguity over block-group polygons and the dispersion score.
// Contiguity is vertex sharing after snapping to a fixed grid: census
// boundary files share exact vertices along common borders, and snapping
// absorbs last-digit noise. Construction hashes snapped vertices, so it is
// O(total vertices), not all-pairs.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "depriv/types.hpp"

namespace depriv::spatial {

struct SnapGrid {
  double precision = 1e-7;  // decimal degrees
};

enum class Contiguity {
  Queen,  // share >= 1 snapped boundary vertex
  Rook,   // share >= 1 snapped boundary segment
};

// Parallel (sharded) vertex-hash construction; edge set is a set union, so
// output is independent of sharding. The serial variant is the reference the
// tests compare against.
AdjacencyGraph build_adjacency(const std::map<std::string, Geometry>& geometries,
                               const SnapGrid& snap = {},
                               Contiguity contiguity = Contiguity::Queen);
AdjacencyGraph build_adjacency_serial(const std::map<std::string, Geometry>& geometries,
                                      const SnapGrid& snap = {},
                                      Contiguity contiguity = Contiguity::Queen);

// Brute-force all-pairs comparison with the identical snap rule. Testing
// oracle; intended for <= 500 geometries.
AdjacencyGraph adjacency_oracle(const std::map<std::string, Geometry>& geometries,
                                const SnapGrid& snap = {},
                                Contiguity contiguity = Contiguity::Queen);

enum class DispersionFlag { None, AllHigh, NoHigh };

struct DispersionResult {
  double value = 0.0;  // in [0,1]
  DispersionFlag flag = DispersionFlag::None;
  std::int64_t low_members = 0;        // N
  std::int64_t untouched_low = 0;      // A: low members with no high neighbor
};

// 1 - A/N over a city's members. N = low-deprivation members; A = low members
// with no high-deprivation neighbor. By default the high neighbor may be any
// block group in the graph scope; within_city_only restricts it to members.
// All members high -> 1 with AllHigh; no high anywhere in scope -> 0 with
// NoHigh.
DispersionResult dispersion(const std::vector<std::string>& member_geoids,
                            const std::map<std::string, bool>& high_by_geoid,
                            const AdjacencyGraph& graph,
                            bool within_city_only = false);

// CSV of `geoid_a,geoid_b` with geoid_a < geoid_b, sorted.
void write_adjacency_csv(const std::string& path, const AdjacencyGraph& graph);

}  // namespace depriv::spatial
