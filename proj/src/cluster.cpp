#include "ideaspace/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "ideaspace/error.hpp"

namespace ideaspace::cluster {
namespace {

using Neighborhoods = std::vector<std::vector<int>>;

void check_params(double eps, int min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("dbscan: eps must be finite and > 0");
  if (min_pts < 1) throw DomainError("dbscan: min_pts must be >= 1");
}

// Expansion over precomputed eps-neighborhoods (each includes the point
// itself). Clusters are grown one at a time in index order of their seed.
Clustering expand(const Neighborhoods& nbrs, double eps, int min_pts) {
  const auto n = nbrs.size();
  Clustering c;
  c.eps = eps;
  c.min_pts = min_pts;
  c.labels.assign(n, kNoise);
  std::vector<bool> assigned(n, false);
  int next_id = 0;
  std::deque<int> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (assigned[seed] || static_cast<int>(nbrs[seed].size()) < min_pts) continue;
    const int id = next_id++;
    c.cluster_ids.push_back(id);
    assigned[seed] = true;
    c.labels[seed] = id;
    queue.push_back(static_cast<int>(seed));
    while (!queue.empty()) {
      const auto p = static_cast<std::size_t>(queue.front());
      queue.pop_front();
      if (static_cast<int>(nbrs[p].size()) < min_pts) continue;  // border point
      for (int q : nbrs[p]) {
        const auto uq = static_cast<std::size_t>(q);
        if (assigned[uq]) continue;
        assigned[uq] = true;
        c.labels[uq] = id;
        queue.push_back(q);
      }
    }
  }
  return c;
}

void check_finite(std::span<const geometry::Point2> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw DomainError("dbscan: non-finite coordinates at point " + std::to_string(i));
    }
  }
}

// eps-neighborhoods via a hash grid with cell size eps; each list is sorted.
Neighborhoods grid_neighborhoods(std::span<const geometry::Point2> points, double eps) {
  const double eps2 = eps * eps;
  auto cell_of = [eps](double v) { return static_cast<long long>(std::floor(v / eps)); };
  auto key = [](long long cx, long long cy) {
    return static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(cy);
  };
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  for (std::size_t i = 0; i < points.size(); ++i) {
    grid[key(cell_of(points[i].x), cell_of(points[i].y))].push_back(static_cast<int>(i));
  }
  Neighborhoods nbrs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const long long cx = cell_of(points[i].x);
    const long long cy = cell_of(points[i].y);
    auto& out = nbrs[i];
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (int j : it->second) {
          const auto& q = points[static_cast<std::size_t>(j)];
          const double ddx = points[i].x - q.x;
          const double ddy = points[i].y - q.y;
          if (ddx * ddx + ddy * ddy <= eps2) out.push_back(j);
        }
      }
    }
    // Hash collisions between distinct cells can list a point twice.
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return nbrs;
}

}  // namespace

std::size_t Clustering::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

Clustering dbscan(std::span<const geometry::Point2> points, double eps, int min_pts) {
  check_params(eps, min_pts);
  check_finite(points);
  return expand(grid_neighborhoods(points, eps), eps, min_pts);
}

Clustering dbscan(const RowMatrix& rows, double eps, int min_pts) {
  check_params(eps, min_pts);
  if (!rows.allFinite()) throw DomainError("dbscan: non-finite coordinates");
  const double eps2 = eps * eps;
  Neighborhoods nbrs(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.rows(); ++j) {
      if ((rows.row(i) - rows.row(j)).squaredNorm() <= eps2) {
        nbrs[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
      }
    }
  }
  return expand(nbrs, eps, min_pts);
}

std::vector<double> k_distances(std::span<const geometry::Point2> points, int k) {
  const auto n = points.size();
  if (k < 1 || n <= static_cast<std::size_t>(k)) {
    throw DomainError("k-distance: need n > k >= 1 (n=" + std::to_string(n) +
                      ", k=" + std::to_string(k) + ")");
  }
  check_finite(points);
  std::vector<double> out(n);
  std::vector<double> d;
  d.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(std::hypot(points[i].x - points[j].x, points[i].y - points[j].y));
    }
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    out[i] = d[static_cast<std::size_t>(k - 1)];
  }
  return out;
}

double suggest_eps(std::span<const geometry::Point2> points, int k) {
  auto kd = k_distances(points, k);
  std::sort(kd.begin(), kd.end(), std::greater<>());
  if (kd.size() < 3) return kd.front();
  std::size_t best = 1;
  double best_curv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < kd.size(); ++i) {
    const double curv = kd[i - 1] - 2.0 * kd[i] + kd[i + 1];
    if (curv > best_curv) {
      best_curv = curv;
      best = i;
    }
  }
  return kd[best];
}

}  // namespace ideaspace::cluster
