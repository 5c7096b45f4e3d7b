#include "depriv/spatial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <unordered_set>

namespace depriv::spatial {

namespace {

struct VertexKey {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const VertexKey&, const VertexKey&) = default;
  friend auto operator<=>(const VertexKey&, const VertexKey&) = default;
};

// Queen features are single snapped vertices encoded as degenerate segments
// (a == b); rook features are normalized snapped boundary segments. One key
// type keeps a single build path for both rules.
struct FeatureKey {
  VertexKey a, b;
  friend bool operator==(const FeatureKey&, const FeatureKey&) = default;
  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
};

std::size_t hash_key(const FeatureKey& k) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint64_t v : {static_cast<std::uint64_t>(k.a.x), static_cast<std::uint64_t>(k.a.y),
                          static_cast<std::uint64_t>(k.b.x), static_cast<std::uint64_t>(k.b.y)}) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

VertexKey snap_vertex(const LonLat& p, double precision) {
  return {static_cast<std::int64_t>(std::llround(p.lon / precision)),
          static_cast<std::int64_t>(std::llround(p.lat / precision))};
}

// Snapped, deduplicated feature keys of one geometry's boundary.
std::vector<FeatureKey> feature_keys(const Geometry& g, const SnapGrid& snap,
                                     Contiguity contiguity) {
  std::vector<FeatureKey> keys;
  auto add_ring = [&](const Ring& ring) {
    if (ring.empty()) return;
    if (contiguity == Contiguity::Queen) {
      // The closing vertex duplicates the first; dedup below handles it.
      for (const auto& p : ring) {
        const VertexKey v = snap_vertex(p, snap.precision);
        keys.push_back({v, v});
      }
    } else {
      for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        VertexKey u = snap_vertex(ring[i], snap.precision);
        VertexKey v = snap_vertex(ring[i + 1], snap.precision);
        if (u == v) continue;  // segment collapsed by snapping
        if (v < u) std::swap(u, v);
        keys.push_back({u, v});
      }
    }
  };
  for (const auto& poly : g.polygons) {
    add_ring(poly.outer);
    for (const auto& hole : poly.holes) add_ring(hole);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

AdjacencyGraph build_impl(const std::map<std::string, Geometry>& geometries,
                          const SnapGrid& snap, Contiguity contiguity, bool parallel) {
  AdjacencyGraph graph;
  graph.nodes.reserve(geometries.size());
  std::vector<const Geometry*> geoms;
  geoms.reserve(geometries.size());
  for (const auto& [geoid, g] : geometries) {
    graph.nodes.push_back(geoid);  // map iteration is sorted
    geoms.push_back(&g);
  }
  const auto n = static_cast<std::ptrdiff_t>(geoms.size());

  // Phase 1: per-geometry snapped keys, embarrassingly parallel.
  std::vector<std::vector<FeatureKey>> per_node(geoms.size());
#pragma omp parallel for if (parallel) schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    per_node[i] = feature_keys(*geoms[i], snap, contiguity);
  }

  // Phase 2: flatten to (key, node) tuples and bucket by key hash into a
  // fixed shard count. Shard contents do not depend on thread count.
  struct Tuple {
    FeatureKey key;
    std::uint32_t node;
  };
  constexpr std::size_t kShards = 64;
  std::array<std::vector<Tuple>, kShards> shards;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (const auto& key : per_node[i]) {
      shards[hash_key(key) % kShards].push_back({key, static_cast<std::uint32_t>(i)});
    }
    per_node[i].clear();
    per_node[i].shrink_to_fit();
  }

  // Phase 3: per shard, group tuples by key and emit all owner pairs. The
  // edge set is a union over shards, so sharding order is irrelevant.
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, kShards> shard_edges;
#pragma omp parallel for if (parallel) schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(kShards); ++s) {
    auto& tuples = shards[s];
    std::sort(tuples.begin(), tuples.end(), [](const Tuple& a, const Tuple& b) {
      if (a.key != b.key) return a.key < b.key;
      return a.node < b.node;
    });
    auto& edges = shard_edges[s];
    std::size_t i = 0;
    while (i < tuples.size()) {
      std::size_t j = i + 1;
      while (j < tuples.size() && tuples[j].key == tuples[i].key) ++j;
      for (std::size_t p = i; p < j; ++p) {
        for (std::size_t q = p + 1; q < j; ++q) {
          if (tuples[p].node != tuples[q].node) {
            edges.emplace_back(tuples[p].node, tuples[q].node);
          }
        }
      }
      i = j;
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  std::size_t total = 0;
  for (const auto& e : shard_edges) total += e.size();
  graph.edges.reserve(total);
  for (const auto& e : shard_edges) {
    graph.edges.insert(graph.edges.end(), e.begin(), e.end());
  }
  graph.finalize();
  return graph;
}

}  // namespace

AdjacencyGraph build_adjacency(const std::map<std::string, Geometry>& geometries,
                               const SnapGrid& snap, Contiguity contiguity) {
  return build_impl(geometries, snap, contiguity, true);
}

AdjacencyGraph build_adjacency_serial(const std::map<std::string, Geometry>& geometries,
                                      const SnapGrid& snap, Contiguity contiguity) {
  return build_impl(geometries, snap, contiguity, false);
}

AdjacencyGraph adjacency_oracle(const std::map<std::string, Geometry>& geometries,
                                const SnapGrid& snap, Contiguity contiguity) {
  AdjacencyGraph graph;
  std::vector<std::vector<FeatureKey>> keys;
  for (const auto& [geoid, g] : geometries) {
    graph.nodes.push_back(geoid);
    keys.push_back(feature_keys(g, snap, contiguity));
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = i + 1; j < keys.size(); ++j) {
      // Sorted-vector intersection test.
      auto a = keys[i].begin();
      auto b = keys[j].begin();
      bool touch = false;
      while (a != keys[i].end() && b != keys[j].end()) {
        if (*a == *b) {
          touch = true;
          break;
        }
        if (*a < *b) ++a;
        else ++b;
      }
      if (touch) {
        graph.edges.emplace_back(static_cast<std::uint32_t>(i),
                                 static_cast<std::uint32_t>(j));
      }
    }
  }
  graph.finalize();
  return graph;
}

DispersionResult dispersion(const std::vector<std::string>& member_geoids,
                            const std::map<std::string, bool>& high_by_geoid,
                            const AdjacencyGraph& graph, bool within_city_only) {
  if (member_geoids.empty()) {
    throw DeprivError(ErrorFamily::Region, "EMPTY_REGION",
                      "dispersion of empty member list");
  }

  std::unordered_set<std::string> member_set(member_geoids.begin(), member_geoids.end());
  auto is_high = [&](const std::string& geoid) {
    auto it = high_by_geoid.find(geoid);
    return it != high_by_geoid.end() && it->second;
  };
  auto is_high_in_scope = [&](const std::string& geoid) {
    if (within_city_only && !member_set.count(geoid)) return false;
    return is_high(geoid);
  };

  std::vector<std::string> low_members;
  std::int64_t high_members = 0;
  for (const auto& geoid : member_geoids) {
    if (is_high(geoid)) ++high_members;
    else low_members.push_back(geoid);
  }

  DispersionResult result;
  result.low_members = static_cast<std::int64_t>(low_members.size());

  if (low_members.empty()) {
    result.value = 1.0;
    result.flag = DispersionFlag::AllHigh;
    return result;
  }

  bool scope_has_high = false;
  if (within_city_only) {
    scope_has_high = high_members > 0;
  } else {
    for (const auto& [geoid, high] : high_by_geoid) {
      if (high) {
        scope_has_high = true;
        break;
      }
    }
  }
  if (!scope_has_high) {
    result.value = 0.0;
    result.flag = DispersionFlag::NoHigh;
    result.untouched_low = result.low_members;
    return result;
  }

  const auto n_low = static_cast<std::ptrdiff_t>(low_members.size());
  std::int64_t untouched = 0;
#pragma omp parallel for schedule(static) reduction(+ : untouched)
  for (std::ptrdiff_t i = 0; i < n_low; ++i) {
    bool touches_high = false;
    if (auto idx = graph.index_of(low_members[i])) {
      for (const auto* p = graph.neighbors_begin(*idx); p != graph.neighbors_end(*idx);
           ++p) {
        if (is_high_in_scope(graph.nodes[*p])) {
          touches_high = true;
          break;
        }
      }
    }
    if (!touches_high) ++untouched;
  }

  result.untouched_low = untouched;
  result.value = 1.0 - static_cast<double>(untouched) / static_cast<double>(n_low);
  return result;
}

void write_adjacency_csv(const std::string& path, const AdjacencyGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DeprivError(ErrorFamily::Io, "UNWRITABLE_FILE", "cannot write " + path);
  out << "geoid_a,geoid_b\n";
  // Nodes are sorted lexicographically, so index order is lexicographic order.
  for (const auto& [a, b] : graph.edges) {
    out << graph.nodes[a] << ',' << graph.nodes[b] << '\n';
  }
}

}  // namespace depriv::spatial
