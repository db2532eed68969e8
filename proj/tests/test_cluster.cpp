#include <gtest/gtest.h>

#include <cmath>

#include "ideaspace/cluster.hpp"
#include "ideaspace/detail/random.hpp"
#include "ideaspace/error.hpp"
#include "oracles/oracles.hpp"

using namespace ideaspace;
using geometry::Point2;

namespace {

std::vector<Point2> blob(detail::Rng& rng, Point2 center, double radius, int n) {
  std::vector<Point2> pts;
  while (static_cast<int>(pts.size()) < n) {
    const double x = rng.uniform(-radius, radius), y = rng.uniform(-radius, radius);
    if (x * x + y * y <= radius * radius) pts.push_back({center.x + x, center.y + y});
  }
  return pts;
}

// Mixture of blobs and background noise in [0, 10]^2, sometimes snapped to a
// coarse grid so that distances tie with eps exactly.
std::vector<Point2> random_instance(detail::Rng& rng, int n) {
  std::vector<Point2> pts;
  const int blobs = 1 + static_cast<int>(rng.below(4));
  for (int b = 0; b < blobs; ++b) {
    const Point2 c{rng.uniform(1, 9), rng.uniform(1, 9)};
    auto part = blob(rng, c, rng.uniform(0.3, 1.5), n / (blobs + 1));
    pts.insert(pts.end(), part.begin(), part.end());
  }
  while (static_cast<int>(pts.size()) < n) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
  if (rng.below(4) == 0) {
    for (auto& p : pts) {
      p.x = std::round(p.x * 4) / 4;
      p.y = std::round(p.y * 4) / 4;
    }
  }
  return pts;
}

}  // namespace

TEST(Dbscan, MatchesBruteForceOracle) {
  detail::Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(200));
    const auto pts = random_instance(rng, n);
    const double eps = rng.uniform(0.1, 1.2);
    const int min_pts = 1 + static_cast<int>(rng.below(8));
    const auto got = cluster::dbscan(pts, eps, min_pts);
    const auto want = oracle::brute_force_dbscan(pts, eps, min_pts);
    ASSERT_EQ(oracle::canonical_labels(got.labels), oracle::canonical_labels(want))
        << "trial " << trial << " n=" << n << " eps=" << eps << " min_pts=" << min_pts;
    // Ids follow first core point order, so the labels agree exactly too.
    ASSERT_EQ(got.labels, want) << "trial " << trial;
  }
}

TEST(Dbscan, MatrixOverloadAgreesWithPlanar) {
  detail::Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_instance(rng, 80);
    RowMatrix m(80, 2);
    for (int i = 0; i < 80; ++i) {
      m(i, 0) = pts[static_cast<std::size_t>(i)].x;
      m(i, 1) = pts[static_cast<std::size_t>(i)].y;
    }
    EXPECT_EQ(cluster::dbscan(m, 0.6, 4).labels, cluster::dbscan(pts, 0.6, 4).labels);
  }
}

TEST(Dbscan, TwoSeparatedBlobs) {
  detail::Rng rng(1);
  auto pts = blob(rng, {0, 0}, 0.5, 20);
  const auto other = blob(rng, {10, 0}, 0.5, 20);
  pts.insert(pts.end(), other.begin(), other.end());
  const auto c = cluster::dbscan(pts, 1.0, 4);
  EXPECT_EQ(c.cluster_ids, (std::vector<int>{0, 1}));
  EXPECT_EQ(c.noise_count(), 0u);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(c.labels[static_cast<std::size_t>(i)], 0);
  for (int i = 20; i < 40; ++i) EXPECT_EQ(c.labels[static_cast<std::size_t>(i)], 1);
}

TEST(Dbscan, AllNoiseWhenSparse) {
  const std::vector<Point2> pts = {{0, 0}, {5, 0}, {0, 5}, {5, 5}};
  const auto c = cluster::dbscan(pts, 1.0, 2);
  EXPECT_TRUE(c.cluster_ids.empty());
  EXPECT_EQ(c.noise_count(), 4u);
}

TEST(Dbscan, SinglePointSelfCounts) {
  const std::vector<Point2> pts = {{3, 3}};
  const auto c = cluster::dbscan(pts, 1.0, 1);
  EXPECT_EQ(c.labels, std::vector<int>{0});
  EXPECT_EQ(c.cluster_ids, std::vector<int>{0});
}

TEST(Dbscan, BorderJoinsEarliestCluster) {
  // Cores at (0,0) and (2,0) both reach the border point (1,0), which has
  // only three points (itself included) within eps and so is not core.
  std::vector<Point2> pts = {{-0.5, 0}, {-0.3, 0.3}, {0, 0}, {1, 0}, {2, 0}, {2.5, 0}, {2.3, 0.3}};
  auto c = cluster::dbscan(pts, 1.0, 4);
  EXPECT_EQ(c.labels, (std::vector<int>{0, 0, 0, 0, 1, 1, 1}));
  // Reversed index order: the right-hand cluster is found first and keeps it.
  std::reverse(pts.begin(), pts.end());
  c = cluster::dbscan(pts, 1.0, 4);
  EXPECT_EQ(c.labels, (std::vector<int>{0, 0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(pts[3], (Point2{1, 0}));
}

TEST(Dbscan, InvalidParameters) {
  const std::vector<Point2> pts = {{0, 0}};
  EXPECT_THROW(cluster::dbscan(pts, 0.0, 1), DomainError);
  EXPECT_THROW(cluster::dbscan(pts, 1.0, 0), DomainError);
  const std::vector<Point2> bad = {{0, std::nan("")}};
  EXPECT_THROW(cluster::dbscan(bad, 1.0, 1), DomainError);
}

TEST(Dbscan, NoiseShrinksAsEpsGrows) {
  detail::Rng rng(9);
  const auto pts = random_instance(rng, 150);
  std::size_t previous = pts.size() + 1;
  for (double eps = 0.05; eps < 3.0; eps += 0.1) {
    const auto noise = cluster::dbscan(pts, eps, 5).noise_count();
    EXPECT_LE(noise, previous) << "eps " << eps;
    previous = noise;
  }
}

TEST(SuggestEps, UniformGridWithinBracket) {
  for (double s : {0.5, 1.0, 2.5}) {
    std::vector<Point2> pts;
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) pts.push_back({i * s, j * s});
    }
    const double eps = cluster::suggest_eps(pts, 4);
    EXPECT_GE(eps, s - 1e-12) << "s=" << s;
    EXPECT_LE(eps, 2 * s + 1e-12) << "s=" << s;
  }
}

TEST(SuggestEps, BelowInterBlobDistance) {
  detail::Rng rng(4);
  auto pts = blob(rng, {0, 0}, 1.0, 60);
  const auto other = blob(rng, {20, 0}, 1.0, 60);
  pts.insert(pts.end(), other.begin(), other.end());
  for (int i = 0; i < 10; ++i) pts.push_back({rng.uniform(-5, 25), rng.uniform(8, 15)});
  const double eps = cluster::suggest_eps(pts, 4);
  EXPECT_LT(eps, 18.0);
  EXPECT_GE(cluster::dbscan(pts, eps, 5).cluster_ids.size(), 2u);
}

TEST(SuggestEps, TooFewPoints) {
  const std::vector<Point2> pts = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(cluster::suggest_eps(pts, 5), DomainError);
}

TEST(KDistances, MatchesDirectComputation) {
  const std::vector<Point2> pts = {{0, 0}, {1, 0}, {3, 0}, {6, 0}};
  EXPECT_EQ(cluster::k_distances(pts, 1), (std::vector<double>{1, 1, 2, 3}));
  EXPECT_EQ(cluster::k_distances(pts, 2), (std::vector<double>{3, 2, 3, 5}));
}
