#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ideaspace/cluster.hpp"
#include "ideaspace/geometry.hpp"
#include "ideaspace/reduce.hpp"

namespace ideaspace::metrics {

// Hull and area of one cluster (cluster_id may be the noise label).
struct ClusterGeometry {
  int cluster_id = 0;
  int n_ideas = 0;
  geometry::Polygon2D hull;
  double area = 0.0;
};

struct DistributionScore {
  double score;                 // AIP / ARP
  double spider_area;           // AIP
  double regular_polygon_area;  // ARP
};

struct IdeaSpaceMetrics {
  std::vector<ClusterGeometry> clusters;          // ascending cluster id, noise first
  std::map<int, double> per_cluster_sparsity;     // IS, noise included
  double cluster_sparsity = 0.0;                  // CS, noise excluded
  double total_area = 0.0;                        // A_t
  // Absent when fewer than three clusters (noise counted) exist, or when
  // every spoke is zero; the reason is recorded alongside.
  std::optional<DistributionScore> distribution;
  std::string distribution_absent_reason;
  reduce::EigenSpectrum eigen_spectrum;
  std::vector<double> eigen_gaps;
};

struct SelectionRecord {
  std::string participant_id;
  std::string plot_id;
  std::set<std::string> selected_idea_ids;
};

struct Triad {
  std::string same_cluster;      // A
  std::string neighbor_cluster;  // B
  std::string distant_cluster;   // C
};

struct DispersionProfile {
  std::vector<double> top_k;
  std::vector<double> gaps;
  double flatness = 1.0;
};

// (A_c / N_i) * exp(-A_c / N_i). Maximum e^-1 at A_c = N_i.
// Throws DomainError for n_ideas < 1 or a negative/non-finite area.
double idea_sparsity(double area, int n_ideas);

// 1 - sum(A_i) / A_t over non-noise clusters. Values pushed outside [0, 1]
// by overlapping hulls are clamped with a warning.
// Throws DomainError when total_area <= 0.
double cluster_sparsity(std::span<const double> cluster_areas, double total_area);

// AIP = spider_polygon_area(spokes); ARP = area of the regular C-gon with
// every spoke at max(spokes). Throws DomainError for fewer than three
// spokes and UndefinedScoreError when every spoke is zero.
DistributionScore distribution_score(std::span<const double> spokes);

// Composes the above for one projection. Throws PreconditionError when the
// row counts disagree and DomainError when the total hull has zero area.
IdeaSpaceMetrics compute_idea_space_metrics(std::span<const geometry::Point2> points,
                                            const cluster::Clustering& clustering,
                                            const reduce::EigenSpectrum& spectrum);
IdeaSpaceMetrics compute_idea_space_metrics(const reduce::Projection& projection,
                                            const cluster::Clustering& clustering,
                                            const reduce::EigenSpectrum& spectrum);

// Number of distinct participants with at least one selected idea in each
// cluster. Every cluster id appears (never-selected ones map to 0), and the
// noise label appears when the clustering has noise points.
// Throws ValidationError for unknown idea ids or records from other plots.
std::map<int, int> selection_index(std::span<const SelectionRecord> records,
                                   const cluster::Clustering& clustering,
                                   std::span<const std::string> row_ids);

// Fraction of non-noise clusters selected by all x_participants. The noise
// entry of `si`, if any, is ignored. Throws PreconditionError when
// x_participants < 1 or n_clusters < 1.
double sampling_score(const std::map<int, int>& si, int x_participants, int n_clusters);

// Reference idea plus one idea from its own cluster (A), from the cluster
// with the nearest centroid (B) and from the cluster with the farthest
// centroid (C). Members are drawn with a seeded generator.
// Throws PreconditionError naming the failing condition.
Triad triad_sample(const cluster::Clustering& clustering,
                   std::span<const geometry::Point2> points,
                   std::span<const std::string> row_ids, const std::string& reference_id,
                   std::uint64_t seed);

// Top-k eigenvalues, their gaps and a flatness score
//   1 - gap_1 / (lambda_1 - lambda_k), or 1 when lambda_1 == lambda_k.
// Throws DomainError for fewer than two eigenvalues.
DispersionProfile dispersion_profile(const reduce::EigenSpectrum& spectrum, int top_k = 10);

}  // namespace ideaspace::metrics
