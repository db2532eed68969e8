#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ideaspace/embed.hpp"

namespace ideaspace::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

// Counter-clockwise polygon in projection units. `degenerate` marks hulls of
// fewer than three distinct, non-collinear points; their area is exactly 0.
struct Polygon2D {
  std::vector<Point2> vertices;
  bool degenerate = false;

  bool operator==(const Polygon2D&) const = default;
};

struct SimilarityMatrix {
  RowMatrix values;
  bool normalized = false;
  std::vector<std::string> row_ids;
};

// Cosine of the angle between a and b, clamped to [-1, 1].
// Throws DomainError on length mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Pairwise cosine similarities. With `normalize`, off-diagonal entries are
// min-max rescaled to [0, 1] and the diagonal is set to 1. Needs n >= 2.
SimilarityMatrix similarity_matrix(const embed::EmbeddingMatrix& m, bool normalize);

// Min-max rescaling of a raw matrix's off-diagonal entries to [0, 1]
// (constant off-diagonals map to 1); the diagonal becomes 1.
SimilarityMatrix normalize_similarity(const SimilarityMatrix& raw);

// Andrew's monotone chain. Collinear boundary points are dropped.
Polygon2D convex_hull(std::span<const Point2> points);

// Shoelace area (absolute value). Degenerate polygons have area 0.
double polygon_area(const Polygon2D& polygon);

// Area of the radar polygon whose k-th vertex sits at radius spokes[k] and
// angle 2*pi*k/C. Throws DomainError for fewer than three spokes.
double spider_polygon_area(std::span<const double> spokes);

// Vertex positions of the same radar polygon, starting at angle 0.
std::vector<Point2> spider_vertices(std::span<const double> spokes);

// True when `p` is inside or on the boundary of the convex polygon, with an
// absolute tolerance on the edge cross products.
bool contains(const Polygon2D& convex, const Point2& p, double tolerance = 1e-9);

// The four dispersion/distribution quadrants used as metric fixtures.
enum class Scenario { kHighDispersionUniform, kHighDispersionNonUniform,
                      kLowDispersionUniform, kLowDispersionNonUniform };

Scenario parse_scenario(std::string_view name);  // "HD-UD", "HD-NUD", "LD-UD", "LD-NUD"
std::string_view scenario_name(Scenario kind);

// Deterministic planar fixture. HD-* spans [-10,10]^2 and LD-* spans [-1,1]^2;
// *-UD is uniform and *-NUD is five Gaussian blobs (sigma 0.06 of the half
// width) whose centers lie inside the square, at least 0.4 half widths apart.
// Throws PreconditionError for n < 10.
std::vector<Point2> synthesize_point_scenario(Scenario kind, int n, std::uint64_t seed);

}  // namespace ideaspace::geometry
