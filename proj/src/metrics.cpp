#include "ideaspace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "ideaspace/detail/random.hpp"
#include "ideaspace/diagnostics.hpp"
#include "ideaspace/error.hpp"

namespace ideaspace::metrics {

double idea_sparsity(double area, int n_ideas) {
  if (n_ideas < 1) throw DomainError("idea_sparsity: n_ideas must be >= 1");
  if (!(area >= 0.0) || !std::isfinite(area)) {
    throw DomainError("idea_sparsity: area must be finite and >= 0");
  }
  const double ratio = area / static_cast<double>(n_ideas);
  return ratio * std::exp(-ratio);
}

double cluster_sparsity(std::span<const double> cluster_areas, double total_area) {
  if (!(total_area > 0.0)) throw DomainError("cluster_sparsity: total_area must be > 0");
  double covered = 0.0;
  for (double a : cluster_areas) covered += a;
  const double cs = 1.0 - covered / total_area;
  if (cs < 0.0 || cs > 1.0) {
    warn("cluster_sparsity: raw value " + std::to_string(cs) +
         " outside [0,1] (overlapping cluster hulls); clamped");
    return std::clamp(cs, 0.0, 1.0);
  }
  return cs;
}

DistributionScore distribution_score(std::span<const double> spokes) {
  if (spokes.size() < 3) {
    throw DomainError("distribution_score: need at least 3 clusters, got " +
                      std::to_string(spokes.size()));
  }
  const double longest = *std::max_element(spokes.begin(), spokes.end());
  if (!(longest > 0.0)) throw UndefinedScoreError("distribution_score: every spoke is zero");
  const auto c = static_cast<double>(spokes.size());
  DistributionScore ds;
  ds.spider_area = geometry::spider_polygon_area(spokes);
  ds.regular_polygon_area = 0.5 * c * longest * longest * std::sin(2.0 * std::numbers::pi / c);
  ds.score = ds.spider_area / ds.regular_polygon_area;
  return ds;
}

IdeaSpaceMetrics compute_idea_space_metrics(std::span<const geometry::Point2> points,
                                            const cluster::Clustering& clustering,
                                            const reduce::EigenSpectrum& spectrum) {
  if (points.size() != clustering.labels.size()) {
    throw PreconditionError("compute_idea_space_metrics: projection has " +
                            std::to_string(points.size()) + " rows but clustering has " +
                            std::to_string(clustering.labels.size()));
  }
  IdeaSpaceMetrics m;
  m.total_area = geometry::polygon_area(geometry::convex_hull(points));
  if (!(m.total_area > 0.0)) {
    throw DomainError("compute_idea_space_metrics: all points are collinear (total area 0)");
  }

  std::map<int, std::vector<geometry::Point2>> members;
  for (std::size_t i = 0; i < points.size(); ++i) members[clustering.labels[i]].push_back(points[i]);

  std::vector<double> spokes;
  std::vector<double> dense_areas;
  for (const auto& [id, pts] : members) {
    ClusterGeometry g;
    g.cluster_id = id;
    g.n_ideas = static_cast<int>(pts.size());
    g.hull = geometry::convex_hull(pts);
    g.area = geometry::polygon_area(g.hull);
    const double is = idea_sparsity(g.area, g.n_ideas);
    m.per_cluster_sparsity[id] = is;
    spokes.push_back(is);
    if (id != cluster::kNoise) dense_areas.push_back(g.area);
    m.clusters.push_back(std::move(g));
  }
  m.cluster_sparsity = cluster_sparsity(dense_areas, m.total_area);

  if (spokes.size() < 3) {
    m.distribution_absent_reason =
        "fewer than 3 clusters (" + std::to_string(spokes.size()) + ", noise included)";
  } else {
    try {
      m.distribution = distribution_score(spokes);
    } catch (const UndefinedScoreError& e) {
      m.distribution_absent_reason = e.what();
    }
  }
  m.eigen_spectrum = spectrum;
  if (spectrum.values.size() >= 2) m.eigen_gaps = reduce::eigen_gaps(spectrum);
  return m;
}

IdeaSpaceMetrics compute_idea_space_metrics(const reduce::Projection& projection,
                                            const cluster::Clustering& clustering,
                                            const reduce::EigenSpectrum& spectrum) {
  return compute_idea_space_metrics(projection.points, clustering, spectrum);
}

std::map<int, int> selection_index(std::span<const SelectionRecord> records,
                                   const cluster::Clustering& clustering,
                                   std::span<const std::string> row_ids) {
  if (row_ids.size() != clustering.labels.size()) {
    throw PreconditionError("selection_index: row ids and labels differ in length");
  }
  std::unordered_map<std::string, int> label_of;
  for (std::size_t i = 0; i < row_ids.size(); ++i) label_of[row_ids[i]] = clustering.labels[i];

  std::map<int, int> si;
  for (int id : clustering.cluster_ids) si[id] = 0;
  if (clustering.has_noise()) si[cluster::kNoise] = 0;

  if (records.empty()) return si;
  const std::string& plot = records.front().plot_id;
  std::map<int, std::set<std::string>> participants;
  for (const auto& rec : records) {
    if (rec.plot_id != plot) {
      throw ValidationError("selection_index: records mix plots '" + plot + "' and '" +
                            rec.plot_id + "'");
    }
    for (const auto& idea : rec.selected_idea_ids) {
      auto it = label_of.find(idea);
      if (it == label_of.end()) {
        throw ValidationError("selection_index: participant '" + rec.participant_id +
                              "' selected unknown idea id '" + idea + "'");
      }
      participants[it->second].insert(rec.participant_id);
    }
  }
  for (const auto& [label, who] : participants) si[label] = static_cast<int>(who.size());
  return si;
}

double sampling_score(const std::map<int, int>& si, int x_participants, int n_clusters) {
  if (x_participants < 1) throw PreconditionError("sampling_score: x_participants must be >= 1");
  if (n_clusters < 1) throw PreconditionError("sampling_score: n_clusters must be >= 1");
  int full = 0;
  for (const auto& [id, count] : si) {
    if (id != cluster::kNoise && count == x_participants) ++full;
  }
  return static_cast<double>(full) / static_cast<double>(n_clusters);
}

Triad triad_sample(const cluster::Clustering& clustering,
                   std::span<const geometry::Point2> points,
                   std::span<const std::string> row_ids, const std::string& reference_id,
                   std::uint64_t seed) {
  const auto n = clustering.labels.size();
  if (points.size() != n || row_ids.size() != n) {
    throw PreconditionError("triad_sample: points, ids and labels differ in length");
  }
  const auto ref_it = std::find(row_ids.begin(), row_ids.end(), reference_id);
  if (ref_it == row_ids.end()) {
    throw PreconditionError("triad_sample: unknown reference idea '" + reference_id + "'");
  }
  const auto ref = static_cast<std::size_t>(ref_it - row_ids.begin());
  const int ref_cluster = clustering.labels[ref];
  if (ref_cluster == cluster::kNoise) {
    throw PreconditionError("triad_sample: reference idea '" + reference_id + "' is noise");
  }
  if (clustering.cluster_ids.size() < 3) {
    throw PreconditionError("triad_sample: need at least 3 non-noise clusters, got " +
                            std::to_string(clustering.cluster_ids.size()));
  }

  std::map<int, std::vector<std::size_t>> members;
  std::map<int, geometry::Point2> centroid;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = clustering.labels[i];
    if (label == cluster::kNoise) continue;
    members[label].push_back(i);
    centroid[label].x += points[i].x;
    centroid[label].y += points[i].y;
  }
  for (auto& [label, c] : centroid) {
    const auto size = static_cast<double>(members[label].size());
    c.x /= size;
    c.y /= size;
  }
  if (members[ref_cluster].size() < 2) {
    throw PreconditionError("triad_sample: reference cluster " + std::to_string(ref_cluster) +
                            " is a singleton");
  }

  int nearest = -1;
  int farthest = -1;
  double best_near = std::numeric_limits<double>::infinity();
  double best_far = -1.0;
  const auto& rc = centroid[ref_cluster];
  for (const auto& [label, c] : centroid) {
    if (label == ref_cluster) continue;
    const double d = std::hypot(c.x - rc.x, c.y - rc.y);
    if (d < best_near) {
      best_near = d;
      nearest = label;
    }
    if (d > best_far) {
      best_far = d;
      farthest = label;
    }
  }

  detail::Rng rng(seed);
  auto pick = [&](const std::vector<std::size_t>& pool) {
    return row_ids[pool[rng.below(pool.size())]];
  };
  std::vector<std::size_t> own;
  for (std::size_t i : members[ref_cluster]) {
    if (i != ref) own.push_back(i);
  }
  Triad t;
  t.same_cluster = pick(own);
  t.neighbor_cluster = pick(members[nearest]);
  t.distant_cluster = pick(members[farthest]);
  return t;
}

DispersionProfile dispersion_profile(const reduce::EigenSpectrum& spectrum, int top_k) {
  if (spectrum.values.size() < 2) {
    throw DomainError("dispersion_profile: need at least 2 eigenvalues");
  }
  if (top_k < 2) throw DomainError("dispersion_profile: top_k must be >= 2");
  DispersionProfile p;
  const auto k = std::min(spectrum.values.size(), static_cast<std::size_t>(top_k));
  p.top_k.assign(spectrum.values.begin(), spectrum.values.begin() + static_cast<std::ptrdiff_t>(k));
  for (std::size_t i = 0; i + 1 < k; ++i) p.gaps.push_back(std::abs(p.top_k[i] - p.top_k[i + 1]));
  const double span = p.top_k.front() - p.top_k.back();
  p.flatness = span > 0.0 ? 1.0 - p.gaps.front() / span : 1.0;
  return p;
}

}  // namespace ideaspace::metrics
