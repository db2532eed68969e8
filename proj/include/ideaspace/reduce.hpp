#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ideaspace/embed.hpp"
#include "ideaspace/geometry.hpp"

namespace ideaspace::reduce {

enum class Metric { kCosine, kEuclidean };

Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

struct UmapParams {
  int n_neighbors = 15;
  double min_dist = 0.1;
  int n_epochs = 400;
  double learning_rate = 1.0;
  int negative_samples = 5;
  std::uint64_t seed = 42;
  Metric metric = Metric::kCosine;

  // Throws ParameterError for non-positive values or n_neighbors < 2.
  void validate() const;
  bool operator==(const UmapParams&) const = default;
};

struct Projection {
  std::vector<geometry::Point2> points;
  UmapParams params;
  std::string source_digest;
};

// Descending, non-negative, centered scatter-matrix eigenvalues.
struct EigenSpectrum {
  std::vector<double> values;
  bool centered = true;
  int n_points = 0;

  bool operator==(const EigenSpectrum&) const = default;
};

// Parameters (a, b) of the low-dimensional similarity 1 / (1 + a r^(2b)),
// least-squares fitted (Levenberg-Marquardt) to 1 for r < min_dist and
// exp(-(r - min_dist)) beyond, sampled at 300 points over [0, 3].
struct KernelCurve {
  double a;
  double b;
};
KernelCurve fit_kernel_curve(double min_dist);

// UMAP to two dimensions: exact kNN, smooth-kNN calibration, fuzzy union,
// PCA initialization and negative-sampling SGD. Serial and bit-reproducible
// for a fixed (data, params). Throws ParameterError if rows <= n_neighbors.
Projection umap_fit(const RowMatrix& data, const UmapParams& params);
Projection umap_fit(const embed::EmbeddingMatrix& m, const UmapParams& params);

// Top-k principal coordinates (scores) of the centered rows.
RowMatrix pca_scores(const RowMatrix& data, int k);

enum class PcaRoute { kAuto, kGram, kCovariance };

// Eigenvalues of the centered scatter matrix (no 1/(n-1) factor), top
// min(k, n-1), descending. kAuto uses the n x n Gram matrix when d > n.
EigenSpectrum pca_eigenvalues(const RowMatrix& data, int k, PcaRoute route = PcaRoute::kAuto);
EigenSpectrum pca_eigenvalues(const embed::EmbeddingMatrix& m, int k,
                              PcaRoute route = PcaRoute::kAuto);

// |s[i] - s[i+1]|. Throws DomainError for fewer than two values.
std::vector<double> eigen_gaps(const EigenSpectrum& spectrum);

// Rank-based neighborhood preservation of `embedded` relative to `data`, in
// [0, 1]. Requires k < n/2.
double trustworthiness(const RowMatrix& data, const std::vector<geometry::Point2>& embedded,
                       int k, Metric metric = Metric::kEuclidean);

// Full pairwise distance matrix under `metric` (cosine distance is 1 - cos).
RowMatrix pairwise_distances(const RowMatrix& data, Metric metric);

}  // namespace ideaspace::reduce
