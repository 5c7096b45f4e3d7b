#include "depriv/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "depriv/parallel.hpp"

namespace depriv::classify {

namespace {

double population_sd(const std::vector<double>& values, double mean) {
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    sq[i] = d * d;
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(values.size()));
}

}  // namespace

double region_median(std::vector<double> scores) {
  if (scores.empty()) {
    throw DeprivError(ErrorFamily::Region, "EMPTY_REGION", "median of empty region");
  }
  std::sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  if (n % 2 == 1) return scores[n / 2];
  return 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
}

Membership Membership::from_records(const std::vector<BlockGroupRecord>& records) {
  Membership m;
  for (const auto& r : records) {
    m.place_of[r.geoid] = r.place_id;
    m.state_of[r.geoid] = r.state_fips;
    m.record_of[r.geoid] = &r;
  }
  return m;
}

double resolve_threshold(const ThresholdSpec& spec,
                         const std::vector<ScoredBlockGroup>& scored,
                         const Membership& membership) {
  if (spec.mode == ThresholdMode::ExplicitValue) return spec.value;

  std::vector<double> members;
  bool region_exists = false;
  for (const auto& s : scored) {
    auto it = membership.place_of.find(s.geoid);
    if (it != membership.place_of.end() && it->second == spec.region_id &&
        !spec.region_id.empty()) {
      members.push_back(s.score);
      region_exists = true;
    }
  }
  if (!region_exists) {
    for (const auto& s : scored) {
      auto it = membership.state_of.find(s.geoid);
      if (it != membership.state_of.end() && it->second == spec.region_id) {
        members.push_back(s.score);
        region_exists = true;
      }
    }
  }
  if (!region_exists) {
    throw DeprivError(ErrorFamily::Region, "UNKNOWN_REGION",
                      "benchmark region not found: " + spec.region_id);
  }
  return region_median(std::move(members));
}

std::vector<ScoredBlockGroup> classify_high(std::vector<ScoredBlockGroup> scored,
                                            double threshold) {
  for (auto& s : scored) s.high_deprivation = s.score > threshold;
  return scored;
}

std::vector<RegionSummary> pct_high_by_region(
    const std::vector<ScoredBlockGroup>& classified, const Membership& membership,
    RegionKind kind, const AggregateOptions& opts) {
  struct Accum {
    std::vector<double> scores;
    std::int64_t high = 0;
    std::int64_t population = 0;
    double w_percpov = 0, w_popdens = 0, w_percblk = 0, w_percwht = 0;
    double wsum_percpov = 0, wsum_popdens = 0, wsum_percblk = 0, wsum_percwht = 0;
    // Unweighted fallbacks for regions whose total population is zero.
    double u_percpov = 0, u_popdens = 0, u_percblk = 0, u_percwht = 0;
    std::int64_t n_percpov = 0, n_popdens = 0, n_percblk = 0, n_percwht = 0;
  };

  std::map<std::string, Accum> groups;
  for (const auto& s : classified) {
    auto rec_it = membership.record_of.find(s.geoid);
    if (rec_it == membership.record_of.end()) {
      throw DeprivError(ErrorFamily::Validation, "UNKNOWN_GEOID",
                        "scored geoid missing from attributes: " + s.geoid);
    }
    const BlockGroupRecord& rec = *rec_it->second;
    std::string key;
    if (kind == RegionKind::State) {
      key = rec.state_fips;
    } else {
      if (rec.place_id.empty()) continue;  // not in any Census place
      key = rec.place_id;
    }
    auto& acc = groups[key];
    acc.scores.push_back(s.score);
    if (s.high_deprivation) ++acc.high;
    acc.population += rec.population;
    const double w = static_cast<double>(rec.population);

    acc.w_percpov += w * rec.percpov;
    acc.wsum_percpov += w;
    acc.u_percpov += rec.percpov;
    ++acc.n_percpov;
    if (rec.popdens) {
      acc.w_popdens += w * *rec.popdens;
      acc.wsum_popdens += w;
      acc.u_popdens += *rec.popdens;
      ++acc.n_popdens;
    }
    if (rec.percblk) {
      acc.w_percblk += w * *rec.percblk;
      acc.wsum_percblk += w;
      acc.u_percblk += *rec.percblk;
      ++acc.n_percblk;
    }
    if (rec.percwht) {
      acc.w_percwht += w * *rec.percwht;
      acc.wsum_percwht += w;
      acc.u_percwht += *rec.percwht;
      ++acc.n_percwht;
    }
  }

  std::vector<RegionSummary> out;
  out.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    RegionSummary rs;
    rs.region_id = key;
    rs.region_kind = kind;
    rs.n_bg = static_cast<std::int64_t>(acc.scores.size());
    rs.median_score = region_median(acc.scores);
    rs.pct_high = 100.0 * static_cast<double>(acc.high) / static_cast<double>(rs.n_bg);
    rs.population = acc.population;
    rs.suspect_complete = acc.high == rs.n_bg && rs.n_bg > 0;

    auto weighted = [](double wsum_v, double wsum, double usum, std::int64_t n)
        -> std::optional<double> {
      if (n == 0) return std::nullopt;
      if (wsum > 0) return wsum_v / wsum;
      return usum / static_cast<double>(n);
    };
    rs.percpov = weighted(acc.w_percpov, acc.wsum_percpov, acc.u_percpov, acc.n_percpov);
    rs.popdens = weighted(acc.w_popdens, acc.wsum_popdens, acc.u_popdens, acc.n_popdens);
    rs.percblk = weighted(acc.w_percblk, acc.wsum_percblk, acc.u_percblk, acc.n_percblk);
    rs.percwht = weighted(acc.w_percwht, acc.wsum_percwht, acc.u_percwht, acc.n_percwht);

    auto ov = opts.overrides.find(key);
    if (ov != opts.overrides.end()) {
      if (ov->second.percpov) rs.percpov = ov->second.percpov;
      if (ov->second.popdens) rs.popdens = ov->second.popdens;
      if (ov->second.percblk) rs.percblk = ov->second.percblk;
      if (ov->second.percwht) rs.percwht = ov->second.percwht;
    }
    out.push_back(std::move(rs));
  }

  std::sort(out.begin(), out.end(), [](const RegionSummary& a, const RegionSummary& b) {
    if (a.pct_high != b.pct_high) return a.pct_high > b.pct_high;
    return a.region_id < b.region_id;
  });
  return out;
}

SummaryStats summary_stats(const std::vector<double>& scores) {
  if (scores.empty()) {
    throw DeprivError(ErrorFamily::Validation, "EMPTY_INPUT",
                      "summary statistics of empty score list");
  }
  SummaryStats st;
  const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
  st.min = *mn;
  st.max = *mx;
  st.mean = pairwise_sum(scores) / static_cast<double>(scores.size());
  st.median = region_median(scores);
  st.sd = population_sd(scores, st.mean);
  return st;
}

std::vector<std::pair<double, std::int64_t>> histogram(
    const std::vector<double>& scores, double bin_width) {
  if (!(bin_width > 0.0)) {
    throw DeprivError(ErrorFamily::Validation, "BAD_BIN_WIDTH", "bin width must be > 0");
  }
  std::map<std::int64_t, std::int64_t> counts;
  for (double s : scores) {
    const auto k = static_cast<std::int64_t>(std::floor(s / bin_width));
    ++counts[k];
  }
  std::vector<std::pair<double, std::int64_t>> out;
  out.reserve(counts.size());
  for (const auto& [k, c] : counts) {
    out.emplace_back(static_cast<double>(k) * bin_width, c);
  }
  return out;
}

std::vector<SweepEntry> cumulative_group_sweep(
    const std::vector<ScoredBlockGroup>& scored, const Membership& membership,
    SweepGroup group, int step, SweepDirection direction) {
  if (step <= 0 || 100 % step != 0) {
    throw DeprivError(ErrorFamily::Validation, "BAD_STEP",
                      "sweep step must divide 100 evenly");
  }

  struct Item {
    double share;
    double score;
    std::int64_t population;
  };
  std::vector<Item> items;
  items.reserve(scored.size());
  double total_pop = 0.0;
  for (const auto& s : scored) {
    auto it = membership.record_of.find(s.geoid);
    if (it == membership.record_of.end()) continue;
    const auto& rec = *it->second;
    const auto& share = group == SweepGroup::Black ? rec.percblk : rec.percwht;
    if (!share) continue;  // no group share available for this record
    items.push_back({*share, s.score, rec.population});
    total_pop += static_cast<double>(rec.population);
  }

  std::vector<SweepEntry> out;
  for (int t = step; t <= 100; t += step) {
    const double cutoff = 100.0 - t;
    std::vector<double> subset_scores;
    double subset_pop = 0.0;
    for (const auto& item : items) {
      const bool in_subset = direction == SweepDirection::Concentrating
                                 ? item.share >= cutoff
                                 : item.share <= cutoff;
      if (in_subset) {
        subset_scores.push_back(item.score);
        subset_pop += static_cast<double>(item.population);
      }
    }
    SweepEntry entry;
    entry.t = t;
    if (!subset_scores.empty()) {
      entry.median_score = region_median(subset_scores);
      const double mean = pairwise_sum(subset_scores) / static_cast<double>(subset_scores.size());
      entry.sd = population_sd(subset_scores, mean);
      entry.population_share_pct = total_pop > 0 ? 100.0 * subset_pop / total_pop : 0.0;
    }
    out.push_back(entry);
  }
  return out;
}

}  // namespace depriv::classify
