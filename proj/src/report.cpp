#include "depriv/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "depriv/csv.hpp"

namespace depriv::report {

namespace {

using nlohmann::json;

constexpr int kSvgWidth = 720;
constexpr int kSvgHeight = 420;
constexpr int kMarginLeft = 50;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 20;
constexpr int kMarginBottom = 40;

}  // namespace

std::string histogram_svg(const std::vector<std::pair<double, std::int64_t>>& bins,
                          double bin_width, std::optional<double> threshold) {
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth
      << "\" height=\"" << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << " "
      << kSvgHeight << "\">\n";

  if (bins.empty()) {
    svg << "  <text x=\"" << kSvgWidth / 2 << "\" y=\"" << kSvgHeight / 2
        << "\" text-anchor=\"middle\">no data</text>\n</svg>\n";
    return svg.str();
  }

  double x_min = bins.front().first;
  double x_max = bins.back().first + bin_width;
  if (threshold) {
    x_min = std::min(x_min, *threshold);
    x_max = std::max(x_max, *threshold);
  }
  std::int64_t y_max = 1;
  for (const auto& [edge, count] : bins) y_max = std::max(y_max, count);

  const double plot_w = kSvgWidth - kMarginLeft - kMarginRight;
  const double plot_h = kSvgHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) { return kMarginLeft + plot_w * (x - x_min) / (x_max - x_min); };
  auto sy = [&](double c) {
    return kMarginTop + plot_h * (1.0 - c / static_cast<double>(y_max));
  };

  // Axes.
  svg << "  <line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h
      << "\" x2=\"" << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
      << kMarginLeft << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";

  for (const auto& [edge, count] : bins) {
    const double x0 = sx(edge);
    const double x1 = sx(edge + bin_width);
    const double y = sy(static_cast<double>(count));
    svg << "  <rect x=\"" << csv::fixed(x0, 2) << "\" y=\"" << csv::fixed(y, 2)
        << "\" width=\"" << csv::fixed(std::max(x1 - x0, 0.5), 2) << "\" height=\""
        << csv::fixed(kMarginTop + plot_h - y, 2)
        << "\" fill=\"#4878a8\" stroke=\"none\"/>\n";
  }

  if (threshold) {
    const double xt = sx(*threshold);
    svg << "  <line x1=\"" << csv::fixed(xt, 2) << "\" y1=\"" << kMarginTop
        << "\" x2=\"" << csv::fixed(xt, 2) << "\" y2=\"" << kMarginTop + plot_h
        << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    svg << "  <text x=\"" << csv::fixed(xt + 4, 2) << "\" y=\"" << kMarginTop + 14
        << "\" font-size=\"11\">threshold " << csv::fixed(*threshold, 3)
        << "</text>\n";
  }

  // Axis labels: min, max, count.
  svg << "  <text x=\"" << kMarginLeft << "\" y=\"" << kSvgHeight - 12
      << "\" font-size=\"11\">" << csv::fixed(x_min, 1) << "</text>\n";
  svg << "  <text x=\"" << kMarginLeft + plot_w << "\" y=\"" << kSvgHeight - 12
      << "\" text-anchor=\"end\" font-size=\"11\">" << csv::fixed(x_max, 1)
      << "</text>\n";
  svg << "  <text x=\"" << kMarginLeft - 6 << "\" y=\"" << kMarginTop + 10
      << "\" text-anchor=\"end\" font-size=\"11\">" << y_max << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string annotate_geojson(const std::string& geojson_text,
                             const std::map<std::string, double>& score_by_geoid,
                             const std::map<std::string, bool>* high_by_geoid,
                             const std::string& geoid_property) {
  json root;
  try {
    root = json::parse(geojson_text);
  } catch (const json::parse_error& e) {
    throw DeprivError(ErrorFamily::Schema, "BAD_GEOJSON",
                      std::string("malformed GeoJSON at byte ") + std::to_string(e.byte));
  }
  if (!root.contains("features") || !root["features"].is_array()) {
    throw DeprivError(ErrorFamily::Schema, "BAD_GEOJSON", "not a FeatureCollection");
  }
  for (auto& feature : root["features"]) {
    if (!feature.contains("properties") || !feature["properties"].is_object()) continue;
    auto& props = feature["properties"];
    if (!props.contains(geoid_property) || !props[geoid_property].is_string()) continue;
    const std::string geoid = props[geoid_property].get<std::string>();
    auto it = score_by_geoid.find(geoid);
    if (it == score_by_geoid.end()) continue;
    // 3-decimal rounding to match the report formatting convention.
    props["score"] = std::round(it->second * 1000.0) / 1000.0;
    if (high_by_geoid) {
      auto hit = high_by_geoid->find(geoid);
      if (hit != high_by_geoid->end()) props["high"] = hit->second;
    }
  }
  return root.dump();
}

std::string top_places_table(const std::vector<RegionSummary>& places, int limit) {
  auto panel = [&](const std::string& title, auto pred) {
    std::vector<const RegionSummary*> subset;
    for (const auto& p : places) {
      if (pred(p)) subset.push_back(&p);
    }
    std::sort(subset.begin(), subset.end(), [](const RegionSummary* a, const RegionSummary* b) {
      if (a->population != b->population) return a->population > b->population;
      return a->region_id < b->region_id;
    });
    if (static_cast<int>(subset.size()) > limit) subset.resize(limit);

    std::ostringstream out;
    out << title << "\n";
    out << "place_id      population  pct_high\n";
    for (const auto* p : subset) {
      out << p->region_id;
      for (std::size_t k = p->region_id.size(); k < 14; ++k) out << ' ';
      std::string pop = std::to_string(p->population);
      for (std::size_t k = pop.size(); k < 10; ++k) out << ' ';
      out << pop << "  " << csv::fixed(p->pct_high, 3);
      if (p->suspect_complete) out << "  [suspect_complete]";
      out << "\n";
    }
    return out.str();
  };

  std::string text = panel("Places with pct_high >= 50 (largest first)",
                           [](const RegionSummary& p) { return p.pct_high >= 50.0; });
  text += "\n";
  text += panel("Places with pct_high = 100 (largest first)",
                [](const RegionSummary& p) { return p.pct_high == 100.0; });
  return text;
}

std::string fits_table(const std::string& title,
                       const std::vector<std::optional<RegressionFit>>& fits,
                       const std::vector<std::string>& spec_errors) {
  const std::vector<std::string> row_order = {"intercept", "percpov", "log(popdens)",
                                              "percblk", "percwht"};
  constexpr int kCol = 22;

  std::ostringstream out;
  out << title << "\n";
  auto pad = [&](const std::string& s, int w) {
    std::string r = s;
    while (static_cast<int>(r.size()) < w) r += ' ';
    return r;
  };

  out << pad("", 14);
  for (std::size_t s = 0; s < fits.size(); ++s) {
    out << pad("(" + std::to_string(s + 1) + ")", kCol);
  }
  out << "\n";

  for (const auto& name : row_order) {
    bool any = false;
    for (const auto& f : fits) {
      if (f && std::find(f->names.begin(), f->names.end(), name) != f->names.end()) {
        any = true;
      }
    }
    if (!any) continue;
    out << pad(name, 14);
    for (std::size_t s = 0; s < fits.size(); ++s) {
      if (!fits[s]) {
        out << pad("-", kCol);
        continue;
      }
      const auto& f = *fits[s];
      auto it = std::find(f.names.begin(), f.names.end(), name);
      if (it == f.names.end()) {
        out << pad("", kCol);
        continue;
      }
      const auto k = static_cast<std::size_t>(it - f.names.begin());
      out << pad(csv::fixed(f.coef[k], 3) + " (" + csv::fixed(f.p_values[k], 3) + ")",
                 kCol);
    }
    out << "\n";
  }

  out << pad("R2", 14);
  for (std::size_t s = 0; s < fits.size(); ++s) {
    out << pad(fits[s] ? csv::fixed(fits[s]->r2, 3) : "-", kCol);
  }
  out << "\n" << pad("n", 14);
  for (std::size_t s = 0; s < fits.size(); ++s) {
    out << pad(fits[s] ? std::to_string(fits[s]->n_obs) : "-", kCol);
  }
  out << "\n";

  bool any_error = false;
  for (std::size_t s = 0; s < fits.size(); ++s) {
    if (!fits[s] && s < spec_errors.size() && !spec_errors[s].empty()) any_error = true;
    if (fits[s] && !fits[s]->converged) any_error = true;
  }
  if (any_error) {
    out << pad("note", 14);
    for (std::size_t s = 0; s < fits.size(); ++s) {
      std::string note;
      if (!fits[s]) note = s < spec_errors.size() ? spec_errors[s] : "error";
      else if (!fits[s]->converged) note = "not converged";
      out << pad(note, kCol);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace depriv::report
