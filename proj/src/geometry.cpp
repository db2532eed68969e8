#include "ideaspace/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ideaspace/detail/random.hpp"
#include "ideaspace/error.hpp"

namespace ideaspace::geometry {
namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DomainError("cosine_similarity: vectors differ in length (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

SimilarityMatrix similarity_matrix(const embed::EmbeddingMatrix& m, bool normalize) {
  const auto n = m.vectors.rows();
  if (n < 2) throw PreconditionError("similarity_matrix: need at least 2 rows");
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    norms[static_cast<std::size_t>(i)] = m.vectors.row(i).norm();
    if (norms[static_cast<std::size_t>(i)] == 0.0) {
      const std::string id = static_cast<std::size_t>(i) < m.row_ids.size()
                                 ? m.row_ids[static_cast<std::size_t>(i)]
                                 : std::to_string(i);
      throw DomainError("similarity_matrix: zero vector in row '" + id + "'");
    }
  }
  SimilarityMatrix s;
  s.row_ids = m.row_ids;
  s.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::clamp(m.vectors.row(i).dot(m.vectors.row(j)) /
                                      (norms[static_cast<std::size_t>(i)] *
                                       norms[static_cast<std::size_t>(j)]),
                                  -1.0, 1.0);
      s.values(i, j) = c;
      s.values(j, i) = c;
    }
  }
  return normalize ? normalize_similarity(s) : s;
}

SimilarityMatrix normalize_similarity(const SimilarityMatrix& raw) {
  SimilarityMatrix s = raw;
  const auto n = s.values.rows();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      lo = std::min(lo, raw.values(i, j));
      hi = std::max(hi, raw.values(i, j));
    }
  }
  const double range = hi - lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s.values(i, j) = i == j ? 1.0 : range > 0.0 ? (raw.values(i, j) - lo) / range : 1.0;
    }
  }
  s.normalized = true;
  return s;
}

Polygon2D convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  Polygon2D hull;
  if (pts.size() < 3) {
    hull.vertices = pts;
    hull.degenerate = true;
    return hull;
  }
  std::vector<Point2> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0.0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  hull.vertices = std::move(h);
  hull.degenerate = hull.vertices.size() < 3;
  return hull;
}

double polygon_area(const Polygon2D& polygon) {
  if (polygon.degenerate || polygon.vertices.size() < 3) return 0.0;
  const auto& v = polygon.vertices;
  double twice = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) * 0.5;
}

double spider_polygon_area(std::span<const double> spokes) {
  const auto c = spokes.size();
  if (c < 3) throw DomainError("spider_polygon_area: need at least 3 spokes, got " +
                               std::to_string(c));
  double sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) sum += spokes[k] * spokes[(k + 1) % c];
  return 0.5 * sum * std::sin(2.0 * std::numbers::pi / static_cast<double>(c));
}

std::vector<Point2> spider_vertices(std::span<const double> spokes) {
  std::vector<Point2> out;
  const auto c = static_cast<double>(spokes.size());
  for (std::size_t k = 0; k < spokes.size(); ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / c;
    out.push_back({spokes[k] * std::cos(angle), spokes[k] * std::sin(angle)});
  }
  return out;
}

bool contains(const Polygon2D& convex, const Point2& p, double tolerance) {
  const auto& v = convex.vertices;
  if (v.empty()) return false;
  if (v.size() == 1) return std::hypot(p.x - v[0].x, p.y - v[0].y) <= tolerance;
  if (v.size() == 2) {
    const double len = std::hypot(v[1].x - v[0].x, v[1].y - v[0].y);
    if (std::abs(cross(v[0], v[1], p)) > tolerance * std::max(1.0, len)) return false;
    const double t = ((p.x - v[0].x) * (v[1].x - v[0].x) + (p.y - v[0].y) * (v[1].y - v[0].y)) /
                     (len * len);
    return t >= -tolerance && t <= 1.0 + tolerance;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (cross(v[i], v[(i + 1) % v.size()], p) < -tolerance) return false;
  }
  return true;
}

Scenario parse_scenario(std::string_view name) {
  if (name == "HD-UD") return Scenario::kHighDispersionUniform;
  if (name == "HD-NUD") return Scenario::kHighDispersionNonUniform;
  if (name == "LD-UD") return Scenario::kLowDispersionUniform;
  if (name == "LD-NUD") return Scenario::kLowDispersionNonUniform;
  throw ParameterError("unknown scenario '" + std::string(name) + "'");
}

std::string_view scenario_name(Scenario kind) {
  switch (kind) {
    case Scenario::kHighDispersionUniform: return "HD-UD";
    case Scenario::kHighDispersionNonUniform: return "HD-NUD";
    case Scenario::kLowDispersionUniform: return "LD-UD";
    case Scenario::kLowDispersionNonUniform: return "LD-NUD";
  }
  return "";
}

std::vector<Point2> synthesize_point_scenario(Scenario kind, int n, std::uint64_t seed) {
  if (n < 10) throw PreconditionError("synthesize_point_scenario: n must be >= 10");
  const bool high = kind == Scenario::kHighDispersionUniform ||
                    kind == Scenario::kHighDispersionNonUniform;
  const bool uniform = kind == Scenario::kHighDispersionUniform ||
                       kind == Scenario::kLowDispersionUniform;
  const double half = high ? 10.0 : 1.0;
  detail::Rng rng(seed);
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  if (uniform) {
    for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(-half, half), rng.uniform(-half, half)});
    return pts;
  }
  constexpr int kBlobs = 5;
  const double sigma = 0.06 * half;
  // Centers are kept apart (rejection sampling) so blobs stay distinguishable.
  const double min_separation = 0.4 * half;
  std::vector<Point2> centers;
  while (static_cast<int>(centers.size()) < kBlobs) {
    const Point2 c{rng.uniform(-0.8 * half, 0.8 * half), rng.uniform(-0.8 * half, 0.8 * half)};
    const bool clear = std::all_of(centers.begin(), centers.end(), [&](const Point2& o) {
      return std::hypot(c.x - o.x, c.y - o.y) >= min_separation;
    });
    if (clear) centers.push_back(c);
  }
  for (int i = 0; i < n; ++i) {
    const auto& c = centers[static_cast<std::size_t>(i % kBlobs)];
    pts.push_back({c.x + sigma * rng.gaussian(), c.y + sigma * rng.gaussian()});
  }
  return pts;
}

}  // namespace ideaspace::geometry
