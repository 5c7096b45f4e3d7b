// Benchmark comparing the OpenMP kernels against their serial references:
// scoring map, SD-stats reduction, and adjacency construction on a synthetic
// square grid. Also verifies the outputs agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "depriv/parallel.hpp"
#include "depriv/scoring.hpp"
#include "depriv/spatial.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<depriv::BlockGroupRecord> synth_records(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  std::vector<depriv::BlockGroupRecord> records(n);
  for (int i = 0; i < n; ++i) {
    auto& r = records[i];
    char geoid[16];
    std::snprintf(geoid, sizeof(geoid), "26%010d", i);
    r.geoid = geoid;
    r.state_fips = "26";
    r.percpov = pct(rng);
    r.percvac = pct(rng);
    r.unemp = pct(rng);
    r.nohs = pct(rng);
    r.population = 500 + i % 1000;
  }
  return records;
}

// side x side unit squares sharing edges and corners.
std::map<std::string, depriv::Geometry> synth_grid(int side) {
  std::map<std::string, depriv::Geometry> geoms;
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const double x = col * 1e-3;
      const double y = row * 1e-3;
      const double s = 1e-3;
      depriv::Geometry g;
      char geoid[24];
      std::snprintf(geoid, sizeof(geoid), "26%04d%06d", row % 10000, col % 1000000);
      g.geoid = geoid;
      depriv::PolygonShape poly;
      poly.outer = {{x, y}, {x + s, y}, {x + s, y + s}, {x, y + s}, {x, y}};
      g.polygons.push_back(poly);
      geoms.emplace(g.geoid, std::move(g));
    }
  }
  return geoms;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depriv kernel benchmark: serial reference vs OpenMP"};
  int n_records = 250000;
  int grid_side = 500;
  int threads = 0;
  app.add_option("--records", n_records, "record count for scoring/SD kernels");
  app.add_option("--grid", grid_side, "grid side length for adjacency kernel");
  app.add_option("--threads", threads, "OpenMP thread count (0 = default)");
  CLI11_PARSE(app, argc, argv);

  depriv::set_worker_count(threads);
  std::printf("workers: %d\n", depriv::worker_count());

  const auto records = synth_records(n_records, 12345);

  auto t0 = Clock::now();
  const auto stats_serial = depriv::scoring::compute_sd_stats_serial(records);
  const double sd_serial_s = seconds_since(t0);
  t0 = Clock::now();
  const auto stats_parallel = depriv::scoring::compute_sd_stats(records);
  const double sd_parallel_s = seconds_since(t0);
  const bool sd_match = stats_serial.sds == stats_parallel.sds;

  const auto weights = depriv::scoring::sd_weights(stats_parallel);
  t0 = Clock::now();
  const auto scores_serial = depriv::scoring::raw_scores_serial(records, weights);
  const double score_serial_s = seconds_since(t0);
  t0 = Clock::now();
  const auto scores_parallel = depriv::scoring::raw_scores(records, weights);
  const double score_parallel_s = seconds_since(t0);
  const bool score_match = scores_serial == scores_parallel;

  const auto grid = synth_grid(grid_side);
  t0 = Clock::now();
  const auto adj_serial = depriv::spatial::build_adjacency_serial(grid);
  const double adj_serial_s = seconds_since(t0);
  t0 = Clock::now();
  const auto adj_parallel = depriv::spatial::build_adjacency(grid);
  const double adj_parallel_s = seconds_since(t0);
  const bool adj_match = adj_serial == adj_parallel;

  std::printf("%-22s %10s %10s %8s %s\n", "kernel", "serial(s)", "openmp(s)", "speedup",
              "bit-identical");
  std::printf("%-22s %10.3f %10.3f %7.2fx %s\n", "sd_stats", sd_serial_s, sd_parallel_s,
              sd_serial_s / sd_parallel_s, sd_match ? "yes" : "NO");
  std::printf("%-22s %10.3f %10.3f %7.2fx %s\n", "raw_scores", score_serial_s,
              score_parallel_s, score_serial_s / score_parallel_s,
              score_match ? "yes" : "NO");
  std::printf("%-22s %10.3f %10.3f %7.2fx %s (%zu polygons, %zu edges)\n",
              "build_adjacency", adj_serial_s, adj_parallel_s,
              adj_serial_s / adj_parallel_s, adj_match ? "yes" : "NO", grid.size(),
              adj_parallel.edges.size());

  return (sd_match && score_match && adj_match) ? 0 : 1;
}
