#pragma once

#include <span>
#include <vector>

#include "ideaspace/embed.hpp"
#include "ideaspace/geometry.hpp"

namespace ideaspace::cluster {

inline constexpr int kNoise = -1;

struct Clustering {
  std::vector<int> labels;   // kNoise or a cluster id
  double eps = 0.0;
  int min_pts = 1;
  std::vector<int> cluster_ids;  // sorted distinct non-negative labels

  std::size_t noise_count() const;
  bool has_noise() const { return noise_count() > 0; }
};

// Classical DBSCAN under the Euclidean metric. A point is core when at least
// min_pts points (itself included) lie within eps. Cluster ids follow the
// index of each cluster's first core point, starting at 0; a border point
// reachable from several clusters joins the lowest id. Region queries use a
// uniform grid with cell size eps.
// Throws DomainError for non-finite coordinates, eps <= 0 or min_pts < 1.
Clustering dbscan(std::span<const geometry::Point2> points, double eps, int min_pts);

// Same semantics over the rows of an arbitrary-dimension matrix, with
// brute-force region queries.
Clustering dbscan(const RowMatrix& rows, double eps, int min_pts);

// Distance from every point to its k-th nearest other point.
std::vector<double> k_distances(std::span<const geometry::Point2> points, int k);

// k-distance elbow heuristic for eps: the k-distances sorted descending, read
// at the index with the largest discrete second difference.
// Throws DomainError when n <= k.
double suggest_eps(std::span<const geometry::Point2> points, int k);

}  // namespace ideaspace::cluster
