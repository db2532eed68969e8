#pragma once

// Slow, independent reference implementations used to check the library.
// None of these call into ideaspace algorithms; they only share the point
// and matrix types.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "ideaspace/embed.hpp"
#include "ideaspace/geometry.hpp"

namespace oracle {

using ideaspace::RowMatrix;
using ideaspace::geometry::Point2;

inline double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool in_closed_triangle(const Point2& p, const Point2& a, const Point2& b,
                               const Point2& c) {
  const double d1 = orient(a, b, p);
  const double d2 = orient(b, c, p);
  const double d3 = orient(c, a, p);
  const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(has_neg && has_pos);
}

inline bool on_closed_segment(const Point2& p, const Point2& a, const Point2& b) {
  if (orient(a, b, p) != 0.0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Indices of the strictly extreme points: a point is dropped when some
// triangle of three other points, or some segment between two other points,
// contains it. O(n^4); inputs must be free of duplicates and the triangle
// test is only meaningful for non-degenerate triangles.
inline std::vector<std::size_t> brute_force_hull(const std::vector<Point2>& pts) {
  const auto n = pts.size();
  std::vector<std::size_t> extreme;
  for (std::size_t p = 0; p < n; ++p) {
    bool inside = false;
    for (std::size_t i = 0; i < n && !inside; ++i) {
      if (i == p) continue;
      for (std::size_t j = i + 1; j < n && !inside; ++j) {
        if (j == p) continue;
        if (on_closed_segment(pts[p], pts[i], pts[j])) {
          inside = true;
          break;
        }
        for (std::size_t k = j + 1; k < n; ++k) {
          if (k == p || orient(pts[i], pts[j], pts[k]) == 0.0) continue;
          if (in_closed_triangle(pts[p], pts[i], pts[j], pts[k])) {
            inside = true;
            break;
          }
        }
      }
    }
    if (!inside) extreme.push_back(p);
  }
  return extreme;
}

// Heron's formula in Kahan's numerically stable arrangement.
inline double triangle_area(const Point2& a, const Point2& b, const Point2& c) {
  double s[3] = {std::hypot(b.x - a.x, b.y - a.y), std::hypot(c.x - b.x, c.y - b.y),
                 std::hypot(a.x - c.x, a.y - c.y)};
  std::sort(s, s + 3, std::greater<>());
  const double x = s[0], y = s[1], z = s[2];
  const double q = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
  return q > 0.0 ? 0.25 * std::sqrt(q) : 0.0;
}

// Area of a convex polygon by fanning triangles out from its first vertex.
inline double fan_area(const std::vector<Point2>& convex) {
  double area = 0.0;
  for (std::size_t i = 1; i + 1 < convex.size(); ++i) {
    area += triangle_area(convex[0], convex[i], convex[i + 1]);
  }
  return area;
}

// Textbook DBSCAN by components: neighbor lists, union-find over core
// points, component ids ordered by their smallest core index, and border
// points given to the smallest id among their core neighbors.
inline std::vector<int> brute_force_dbscan(const std::vector<Point2>& pts, double eps,
                                           int min_pts) {
  const auto n = pts.size();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= eps) nb[i].push_back(j);
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = static_cast<int>(nb[i].size()) >= min_pts;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (auto j : nb[i]) {
      if (core[j]) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, int> id_of_root;
  std::vector<int> labels(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const auto root = find(i);
    auto it = id_of_root.find(root);
    if (it == id_of_root.end()) {
      it = id_of_root.emplace(root, static_cast<int>(id_of_root.size())).first;
    }
    labels[i] = it->second;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (auto j : nb[i]) {
      if (core[j] && (best < 0 || labels[j] < best)) best = labels[j];
    }
    labels[i] = best;
  }
  return labels;
}

// Relabels clusters by order of first appearance so that two labelings that
// agree up to renaming compare equal. Noise stays -1.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> rename;
  std::vector<int> out;
  for (int l : labels) {
    if (l < 0) {
      out.push_back(-1);
      continue;
    }
    auto it = rename.emplace(l, static_cast<int>(rename.size())).first;
    out.push_back(it->second);
  }
  return out;
}

// Cyclic Jacobi rotations; eigenvalues of a symmetric matrix, descending.
inline std::vector<double> jacobi_eigenvalues(RowMatrix a) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

// Eigenvalues of the centered d x d scatter matrix via Jacobi.
inline std::vector<double> covariance_route_spectrum(const RowMatrix& data) {
  RowMatrix centered = data.rowwise() - data.colwise().mean();
  const RowMatrix scatter = centered.transpose() * centered;
  auto ev = jacobi_eigenvalues(scatter);
  for (double& v : ev) v = std::max(v, 0.0);
  return ev;
}

// Trustworthiness written directly from its definition, with ties broken by
// index. `high` and `low` are full distance matrices.
inline double trustworthiness(const RowMatrix& high, const RowMatrix& low, int k) {
  const auto n = static_cast<std::size_t>(high.rows());
  auto order_from = [n](const RowMatrix& d, std::size_t i) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) idx.push_back(j);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) <
             d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
    });
    return idx;
  };
  double penalty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = order_from(high, i);
    const auto lo = order_from(low, i);
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t r = 0; r < hi.size(); ++r) rank[hi[r]] = r + 1;
    for (int r = 0; r < k; ++r) {
      const auto j = lo[static_cast<std::size_t>(r)];
      if (rank[j] > static_cast<std::size_t>(k)) penalty += static_cast<double>(rank[j]) - k;
    }
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 2.0 / (nn * k * (2.0 * nn - 3.0 * k - 1.0)) * penalty;
}

}  // namespace oracle
