#include "ideaspace/plots.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "ideaspace/error.hpp"

namespace ideaspace::plots {
namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                  "#9467bd", "#8c564b", "#e377c2", "#bcbd22",
                                                  "#17becf", "#393b79"};
constexpr const char* kNoiseColor = "#9e9e9e";

std::string num(double v) {
  char buf[32];
  const double rounded = std::round(v * 1000.0) / 1000.0;
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, rounded == 0.0 ? 0.0 : rounded,
                                 std::chars_format::general, 8);
  return ec == std::errc() ? std::string(buf, end) : "0";
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Control characters are not allowed in XML 1.0 text.
        if (static_cast<unsigned char>(c) >= 0x20 || c == '\t' || c == '\n') out.push_back(c);
    }
  }
  return out;
}

class Svg {
 public:
  Svg(double width, double height) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
         << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  std::ostringstream& raw() { return out_; }
  void text(double x, double y, const std::string& s, const char* anchor = "middle",
            int size = 12) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" "
         << "font-size=\"" << size << "\" text-anchor=\"" << anchor << "\">" << escape(s)
         << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke,
            const char* extra = "") {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
         << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\"" << extra << "/>\n";
  }
  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

std::string points_attr(const std::vector<geometry::Point2>& pts) {
  std::string s;
  for (const auto& p : pts) {
    if (!s.empty()) s.push_back(' ');
    s += num(p.x) + "," + num(p.y);
  }
  return s;
}

// Linear map from data bounds to a pixel box with y pointing up.
struct Frame {
  double x0, y0, x1, y1;  // data bounds
  double left, top, width, height;

  geometry::Point2 map(const geometry::Point2& p) const {
    const double sx = x1 > x0 ? (p.x - x0) / (x1 - x0) : 0.5;
    const double sy = y1 > y0 ? (p.y - y0) / (y1 - y0) : 0.5;
    return {left + sx * width, top + (1.0 - sy) * height};
  }
};

}  // namespace

std::string cluster_color(int label) {
  if (label < 0) return kNoiseColor;
  return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

double spider_fill_opacity(double cluster_sparsity) {
  return 0.1 + 0.85 * std::clamp(cluster_sparsity, 0.0, 1.0);
}

std::string scatter_svg(const report::AnalysisReport& r) {
  constexpr double kSize = 640.0;
  constexpr double kMargin = 40.0;
  Svg svg(kSize, kSize + 30.0);
  svg.text(kSize / 2, 24, "Idea map: " + r.set_id, "middle", 16);

  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& p : r.projection) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  // Equal aspect ratio so hull areas read correctly.
  const double span = std::max({x1 - x0, y1 - y0, 1e-12}) * 1.05;
  const double cx = 0.5 * (x0 + x1);
  const double cy = 0.5 * (y0 + y1);
  const Frame f{cx - span / 2, cy - span / 2, cx + span / 2, cy + span / 2,
                kMargin, kMargin, kSize - 2 * kMargin, kSize - 2 * kMargin};

  auto& out = svg.raw();
  out << "<g class=\"hulls\">\n";
  for (const auto& c : r.metrics.clusters) {
    if (c.cluster_id < 0 || c.hull.degenerate) continue;
    out << "<path class=\"hull\" data-cluster=\"" << c.cluster_id << "\" d=\"";
    for (std::size_t i = 0; i < c.hull.vertices.size(); ++i) {
      const auto p = f.map(c.hull.vertices[i]);
      out << (i == 0 ? "M" : " L") << num(p.x) << ' ' << num(p.y);
    }
    out << " Z\" fill=\"none\" stroke=\"" << cluster_color(c.cluster_id)
        << "\" stroke-width=\"1.5\" stroke-dasharray=\"2 3\"/>\n";
  }
  out << "</g>\n<g class=\"points\">\n";
  for (std::size_t i = 0; i < r.projection.size(); ++i) {
    const auto p = f.map(r.projection[i]);
    const int label = r.labels[i];
    const auto& entry = r.catalog[i];
    out << "<circle class=\"point" << (label < 0 ? " noise" : "") << "\" data-id=\""
        << escape(entry.id) << "\" data-cluster=\"" << label << "\" cx=\"" << num(p.x)
        << "\" cy=\"" << num(p.y) << "\" r=\"4\" fill=\"" << cluster_color(label)
        << "\"><title>" << escape(entry.title) << "</title></circle>\n";
  }
  out << "</g>\n";
  std::ostringstream footer;
  const auto n_clusters = std::count_if(r.metrics.clusters.begin(), r.metrics.clusters.end(),
                                        [](const auto& c) { return c.cluster_id >= 0; });
  footer << n_clusters << " clusters, CS="
         << num(r.metrics.cluster_sparsity);
  if (r.metrics.distribution) footer << ", DS=" << num(r.metrics.distribution->score);
  svg.text(kSize / 2, kSize + 16, footer.str());
  return svg.finish();
}

std::string heatmap_svg(const RowMatrix& similarity, std::span<const std::string> labels) {
  const auto n = similarity.rows();
  if (n == 0 || similarity.cols() != n) throw PreconditionError("heatmap: matrix must be square");
  constexpr double kGrid = 600.0;
  constexpr double kLeft = 80.0;
  constexpr double kTop = 40.0;
  const double cell = kGrid / static_cast<double>(n);
  const double lo = similarity.minCoeff();
  const double hi = similarity.maxCoeff();
  Svg svg(kLeft + kGrid + 90.0, kTop + kGrid + 80.0);
  svg.text(kLeft + kGrid / 2, 24, "Similarity matrix", "middle", 16);
  auto& out = svg.raw();

  // Sequential white-to-blue ramp.
  auto color = [&](double v) {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 1.0;
    const auto ch = [t](double from, double to) {
      return static_cast<int>(std::lround(from + (to - from) * t));
    };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", ch(247, 8), ch(251, 48), ch(255, 107));
    return std::string(buf);
  };
  out << "<g class=\"cells\">\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out << "<rect class=\"cell\" x=\"" << num(kLeft + cell * static_cast<double>(j))
          << "\" y=\"" << num(kTop + cell * static_cast<double>(i)) << "\" width=\""
          << num(cell) << "\" height=\"" << num(cell) << "\" fill=\""
          << color(similarity(i, j)) << "\"><title>" << num(similarity(i, j))
          << "</title></rect>\n";
    }
  }
  out << "</g>\n";
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) == n && n <= 40) {
    for (Eigen::Index i = 0; i < n; ++i) {
      svg.text(kLeft - 4, kTop + cell * (static_cast<double>(i) + 0.6),
               labels[static_cast<std::size_t>(i)], "end", 10);
    }
  }
  // Color bar.
  for (int k = 0; k < 20; ++k) {
    const double v = hi - (hi - lo) * k / 19.0;
    out << "<rect class=\"legend\" x=\"" << num(kLeft + kGrid + 20) << "\" y=\""
        << num(kTop + k * kGrid / 20.0) << "\" width=\"20\" height=\"" << num(kGrid / 20.0)
        << "\" fill=\"" << color(v) << "\"/>\n";
  }
  svg.text(kLeft + kGrid + 46, kTop + 10, num(hi), "start", 10);
  svg.text(kLeft + kGrid + 46, kTop + kGrid, num(lo), "start", 10);
  return svg.finish();
}

std::string spider_svg(const metrics::IdeaSpaceMetrics& m, const std::string& title) {
  constexpr double kSize = 520.0;
  constexpr double kRadius = 190.0;
  const geometry::Point2 center{kSize / 2, kSize / 2 + 10};
  Svg svg(kSize, kSize + 30.0);
  svg.text(kSize / 2, 24, title.empty() ? "Idea sparsity per cluster" : title, "middle", 16);
  auto& out = svg.raw();

  std::vector<double> spokes;
  std::vector<std::string> names;
  for (const auto& c : m.clusters) {
    spokes.push_back(m.per_cluster_sparsity.at(c.cluster_id));
    names.push_back(c.cluster_id < 0 ? "noise" : "C" + std::to_string(c.cluster_id));
  }
  if (spokes.empty()) return svg.finish();
  const double longest = *std::max_element(spokes.begin(), spokes.end());
  const double scale = longest > 0.0 ? kRadius / longest : 0.0;
  auto to_px = [&](const geometry::Point2& p) {
    return geometry::Point2{center.x + p.x * scale, center.y - p.y * scale};
  };

  const auto c = spokes.size();
  for (std::size_t k = 0; k < c; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c);
    const double ex = center.x + kRadius * std::cos(angle);
    const double ey = center.y - kRadius * std::sin(angle);
    svg.line(center.x, center.y, ex, ey, "#bbbbbb", " class=\"spoke\"");
    svg.text(center.x + (kRadius + 18) * std::cos(angle),
             center.y - (kRadius + 18) * std::sin(angle) + 4, names[k]);
  }
  if (c >= 3) {
    std::vector<geometry::Point2> regular;
    std::vector<geometry::Point2> actual;
    const std::vector<double> equal(c, longest);
    for (const auto& p : geometry::spider_vertices(equal)) regular.push_back(to_px(p));
    for (const auto& p : geometry::spider_vertices(spokes)) actual.push_back(to_px(p));
    out << "<polygon class=\"regular-outline\" points=\"" << points_attr(regular)
        << "\" fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
    out << "<polygon class=\"spider-fill\" points=\"" << points_attr(actual)
        << "\" fill=\"#1f77b4\" fill-opacity=\"" << num(spider_fill_opacity(m.cluster_sparsity))
        << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  }
  std::ostringstream footer;
  footer << "CS=" << num(m.cluster_sparsity);
  if (m.distribution) {
    footer << "  AIP=" << num(m.distribution->spider_area)
           << "  ARP=" << num(m.distribution->regular_polygon_area)
           << "  DS=" << num(m.distribution->score);
  }
  svg.text(kSize / 2, kSize + 18, footer.str());
  return svg.finish();
}

std::string eigen_svg(std::span<const NamedSpectrum> spectra, int top_k) {
  constexpr double kPanelW = 400.0;
  constexpr double kPanelH = 300.0;
  constexpr double kLeft = 60.0;
  constexpr double kTop = 50.0;
  constexpr double kGap = 80.0;
  Svg svg(kLeft + 2 * kPanelW + kGap + 160.0, kTop + kPanelH + 60.0);
  svg.text(kLeft + kPanelW / 2, 30, "Top eigenvalues", "middle", 14);
  svg.text(kLeft + kPanelW + kGap + kPanelW / 2, 30, "Differences between eigenvalues", "middle",
           14);
  auto& out = svg.raw();

  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> gaps;
  double vmax = 0.0;
  double gmax = 0.0;
  for (const auto& s : spectra) {
    const auto k = std::min(s.spectrum.values.size(), static_cast<std::size_t>(top_k));
    std::vector<double> v(s.spectrum.values.begin(),
                          s.spectrum.values.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<double> g;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) g.push_back(std::abs(v[i] - v[i + 1]));
    for (double x : v) vmax = std::max(vmax, x);
    for (double x : g) gmax = std::max(gmax, x);
    values.push_back(std::move(v));
    gaps.push_back(std::move(g));
  }

  auto panel = [&](double left, double ymax, const std::vector<std::vector<double>>& series,
                   const char* cls) {
    svg.line(left, kTop + kPanelH, left + kPanelW, kTop + kPanelH, "#333333");
    svg.line(left, kTop, left, kTop + kPanelH, "#333333");
    svg.text(left - 6, kTop + 4, num(ymax), "end", 10);
    svg.text(left - 6, kTop + kPanelH, "0", "end", 10);
    for (int i = 1; i <= top_k; ++i) {
      svg.text(left + kPanelW * (i - 1) / std::max(1, top_k - 1), kTop + kPanelH + 16,
               std::to_string(i), "middle", 10);
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
      std::vector<geometry::Point2> pts;
      for (std::size_t i = 0; i < series[s].size(); ++i) {
        const double x = left + kPanelW * static_cast<double>(i) / std::max(1, top_k - 1);
        const double y = kTop + kPanelH * (1.0 - (ymax > 0.0 ? series[s][i] / ymax : 0.0));
        pts.push_back({x, y});
      }
      const auto color = cluster_color(static_cast<int>(s));
      out << "<polyline class=\"" << cls << "\" data-series=\"" << escape(spectra[s].name)
          << "\" points=\"" << points_attr(pts) << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
    }
  };
  panel(kLeft, vmax, values, "eigen-values");
  panel(kLeft + kPanelW + kGap, gmax, gaps, "eigen-gaps");

  const double legend_x = kLeft + 2 * kPanelW + kGap + 20;
  for (std::size_t s = 0; s < spectra.size(); ++s) {
    const double y = kTop + 16.0 * static_cast<double>(s);
    svg.line(legend_x, y, legend_x + 18, y, cluster_color(static_cast<int>(s)).c_str(),
             " stroke-width=\"3\"");
    svg.text(legend_x + 24, y + 4, spectra[s].name, "start", 11);
  }
  return svg.finish();
}

}  // namespace ideaspace::plots
