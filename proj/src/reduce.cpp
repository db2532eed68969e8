#include "ideaspace/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include <Eigen/Eigenvalues>

#include "ideaspace/detail/random.hpp"
#include "ideaspace/error.hpp"

namespace ideaspace::reduce {
namespace {

constexpr int kBisectionSteps = 64;
constexpr double kBisectionTolerance = 1e-5;
constexpr double kMinSigmaScale = 1e-3;
constexpr double kGradientClip = 4.0;
constexpr double kInitScale = 1e-2;
constexpr double kInitJitter = 1e-4;

RowMatrix centered(const RowMatrix& data) {
  const Eigen::RowVectorXd mean = data.colwise().mean();
  return data.rowwise() - mean;
}

// Indices of the k nearest points to i (self excluded), ties by index.
std::vector<int> nearest(const RowMatrix& dist, int i, int k) {
  const auto n = static_cast<int>(dist.rows());
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(n - 1));
  for (int j = 0; j < n; ++j) {
    if (j != i) idx.push_back(j);
  }
  auto closer = [&](int a, int b) {
    const double da = dist(i, a);
    const double db = dist(i, b);
    return da < db || (da == db && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), closer);
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

struct Edge {
  int head;
  int tail;
  double weight;
};

// Fuzzy simplicial set of the kNN graph, symmetrized with the probabilistic
// union a + b - ab. Both directions of every edge are returned.
std::vector<Edge> fuzzy_graph(const RowMatrix& dist, int k) {
  const auto n = static_cast<int>(dist.rows());
  const double target = std::log2(static_cast<double>(k));
  const double mean_all = dist.mean();

  RowMatrix directed = RowMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto nbrs = nearest(dist, i, k);
    double rho = 0.0;
    for (int j : nbrs) {
      if (dist(i, j) > 0.0) {
        rho = dist(i, j);
        break;
      }
    }
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = 1.0;
    for (int step = 0; step < kBisectionSteps; ++step) {
      double psum = 0.0;
      for (int j : nbrs) {
        const double d = dist(i, j) - rho;
        psum += d > 0.0 ? std::exp(-d / mid) : 1.0;
      }
      if (std::abs(psum - target) < kBisectionTolerance) break;
      if (psum > target) {
        hi = mid;
        mid = 0.5 * (lo + hi);
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
      }
    }
    double mean_i = 0.0;
    for (int j : nbrs) mean_i += dist(i, j);
    mean_i /= static_cast<double>(k);
    const double floor = kMinSigmaScale * (rho > 0.0 ? mean_i : mean_all);
    const double sigma = std::max(mid, floor);
    for (int j : nbrs) {
      directed(i, j) = std::exp(-std::max(0.0, dist(i, j) - rho) / sigma);
    }
  }

  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = directed(i, j);
      const double b = directed(j, i);
      const double w = a + b - a * b;
      if (w > 0.0) edges.push_back({i, j, w});
    }
  }
  return edges;
}

double clip(double v) { return std::clamp(v, -kGradientClip, kGradientClip); }

void optimize_layout(std::vector<geometry::Point2>& y, const std::vector<Edge>& graph,
                     const UmapParams& p, KernelCurve ab) {
  const auto n = static_cast<std::uint64_t>(y.size());
  double max_w = 0.0;
  for (const auto& e : graph) max_w = std::max(max_w, e.weight);

  std::vector<Edge> edges;
  const double cutoff = max_w / static_cast<double>(p.n_epochs);
  for (const auto& e : graph) {
    if (e.weight >= cutoff) edges.push_back(e);
  }
  const std::size_t m = edges.size();
  std::vector<double> per_sample(m);
  std::vector<double> per_negative(m);
  std::vector<double> next_sample(m);
  std::vector<double> next_negative(m);
  for (std::size_t e = 0; e < m; ++e) {
    per_sample[e] = max_w / edges[e].weight;
    per_negative[e] = per_sample[e] / static_cast<double>(p.negative_samples);
    next_sample[e] = per_sample[e];
    next_negative[e] = per_negative[e];
  }

  detail::Rng rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
  const double a = ab.a;
  const double b = ab.b;
  for (int epoch = 0; epoch < p.n_epochs; ++epoch) {
    const double alpha =
        p.learning_rate * (1.0 - static_cast<double>(epoch) / static_cast<double>(p.n_epochs));
    const auto now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < m; ++e) {
      if (next_sample[e] > now) continue;
      auto& cur = y[static_cast<std::size_t>(edges[e].head)];
      auto& other = y[static_cast<std::size_t>(edges[e].tail)];
      double dx = cur.x - other.x;
      double dy = cur.y - other.y;
      double d2 = dx * dx + dy * dy;
      if (d2 > 0.0) {
        const double coeff =
            -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
        const double gx = clip(coeff * dx);
        const double gy = clip(coeff * dy);
        cur.x += gx * alpha;
        cur.y += gy * alpha;
        other.x -= gx * alpha;
        other.y -= gy * alpha;
      }
      next_sample[e] += per_sample[e];

      const auto n_neg = static_cast<int>((now - next_negative[e]) / per_negative[e]);
      for (int s = 0; s < n_neg; ++s) {
        const auto k = static_cast<int>(rng.below(n));
        if (k == edges[e].head) continue;
        const auto& neg = y[static_cast<std::size_t>(k)];
        dx = cur.x - neg.x;
        dy = cur.y - neg.y;
        d2 = dx * dx + dy * dy;
        if (d2 <= 0.0) continue;
        const double coeff = 2.0 * b / ((0.001 + d2) * (a * std::pow(d2, b) + 1.0));
        cur.x += clip(coeff * dx) * alpha;
        cur.y += clip(coeff * dy) * alpha;
      }
      next_negative[e] += static_cast<double>(std::max(n_neg, 0)) * per_negative[e];
    }
  }
}

// Symmetric eigen-decomposition, eigenvalues descending.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigh_desc(const Eigen::MatrixXd& sym, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sym, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("eigen-decomposition did not converge");
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vecs;
  if (vectors) vecs = solver.eigenvectors().rowwise().reverse();
  return {values, vecs};
}

}  // namespace

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  throw ParameterError("unknown metric '" + std::string(name) + "'");
}

std::string_view metric_name(Metric metric) {
  return metric == Metric::kCosine ? "cosine" : "euclidean";
}

void UmapParams::validate() const {
  if (n_neighbors < 2) throw ParameterError("umap: n_neighbors must be >= 2");
  if (!(min_dist > 0.0)) throw ParameterError("umap: min_dist must be > 0");
  if (n_epochs < 1) throw ParameterError("umap: n_epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ParameterError("umap: learning_rate must be > 0");
  if (negative_samples < 1) throw ParameterError("umap: negative_samples must be >= 1");
}

KernelCurve fit_kernel_curve(double min_dist) {
  if (!(min_dist > 0.0)) throw ParameterError("fit_kernel_curve: min_dist must be > 0");
  constexpr int kSamples = 300;
  std::vector<double> xs(kSamples);
  std::vector<double> ys(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = 3.0 * i / (kSamples - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist));
  }
  auto sse = [&](double a, double b) {
    double s = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      s += r * r;
    }
    return s;
  };

  double a = 1.0;
  double b = 1.0;
  double lambda = 1e-3;
  double cost = sse(a, b);
  for (int iter = 0; iter < 500; ++iter) {
    // Normal equations J^T J and J^T r for the two parameters.
    double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double x = xs[i];
      const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double den = 1.0 + a * p;
      const double r = 1.0 / den - ys[i];
      const double da = -p / (den * den);
      const double db = x > 0.0 ? -a * p * 2.0 * std::log(x) / (den * den) : 0.0;
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    bool improved = false;
    while (lambda < 1e12) {
      const double m00 = jaa * (1.0 + lambda);
      const double m11 = jbb * (1.0 + lambda);
      const double det = m00 * m11 - jab * jab;
      const double step_a = -(m11 * ga - jab * gb) / det;
      const double step_b = -(m00 * gb - jab * ga) / det;
      const double na = a + step_a;
      const double nb = b + step_b;
      const double ncost = na > 0.0 && nb > 0.0 ? sse(na, nb) : std::numeric_limits<double>::infinity();
      if (ncost < cost) {
        const double rel = (cost - ncost) / std::max(cost, 1e-300);
        a = na;
        b = nb;
        cost = ncost;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = rel > 1e-15;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return {a, b};
}

RowMatrix pairwise_distances(const RowMatrix& data, Metric metric) {
  const Eigen::MatrixXd gram = data * data.transpose();
  const auto n = data.rows();
  RowMatrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        d(i, j) = 0.0;
      } else if (metric == Metric::kEuclidean) {
        d(i, j) = std::sqrt(std::max(0.0, gram(i, i) + gram(j, j) - 2.0 * gram(i, j)));
      } else {
        const double denom = std::sqrt(gram(i, i) * gram(j, j));
        if (denom == 0.0) throw DomainError("cosine distance: zero vector in row " +
                                            std::to_string(denom == gram(i, i) ? i : j));
        d(i, j) = std::max(0.0, 1.0 - std::clamp(gram(i, j) / denom, -1.0, 1.0));
      }
    }
  }
  // Enforce exact symmetry regardless of floating-point evaluation order.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  }
  return d;
}

RowMatrix pca_scores(const RowMatrix& data, int k) {
  const auto n = data.rows();
  const auto d = data.cols();
  if (n < 2) throw DomainError("pca_scores: need at least 2 rows");
  const RowMatrix xc = centered(data);
  const auto kk = static_cast<Eigen::Index>(std::min<Eigen::Index>(k, std::min(n, d)));
  RowMatrix scores(n, kk);
  if (d > n) {
    const auto [values, vecs] = eigh_desc(xc * xc.transpose(), true);
    for (Eigen::Index c = 0; c < kk; ++c) {
      scores.col(c) = vecs.col(c) * std::sqrt(std::max(0.0, values(c)));
    }
  } else {
    const auto [values, vecs] = eigh_desc(xc.transpose() * xc, true);
    scores = xc * vecs.leftCols(kk);
  }
  // Fix each component's sign: its largest-magnitude score is positive.
  for (Eigen::Index c = 0; c < kk; ++c) {
    Eigen::Index arg = 0;
    scores.col(c).cwiseAbs().maxCoeff(&arg);
    if (scores(arg, c) < 0.0) scores.col(c) *= -1.0;
  }
  return scores;
}

Projection umap_fit(const RowMatrix& data, const UmapParams& params) {
  params.validate();
  const auto n = static_cast<int>(data.rows());
  if (n <= params.n_neighbors) {
    throw ParameterError("umap: need more than n_neighbors=" + std::to_string(params.n_neighbors) +
                         " points, got " + std::to_string(n));
  }
  if (!data.allFinite()) throw DomainError("umap: input has non-finite entries");

  const RowMatrix dist = pairwise_distances(data, params.metric);
  const auto graph = fuzzy_graph(dist, params.n_neighbors);

  std::vector<geometry::Point2> y(static_cast<std::size_t>(n));
  const RowMatrix init = pca_scores(data, 2);
  detail::Rng rng(params.seed);
  for (Eigen::Index c = 0; c < init.cols(); ++c) {
    const double mean = init.col(c).mean();
    const double sd = std::sqrt((init.col(c).array() - mean).square().mean());
    for (int i = 0; i < n; ++i) {
      const double v = sd > 0.0 ? (init(i, c) - mean) / sd * kInitScale : 0.0;
      (c == 0 ? y[static_cast<std::size_t>(i)].x : y[static_cast<std::size_t>(i)].y) = v;
    }
  }
  for (auto& p : y) {
    p.x += kInitJitter * rng.gaussian();
    p.y += kInitJitter * rng.gaussian();
  }

  optimize_layout(y, graph, params, fit_kernel_curve(params.min_dist));

  Projection out;
  out.points = std::move(y);
  out.params = params;
  return out;
}

Projection umap_fit(const embed::EmbeddingMatrix& m, const UmapParams& params) {
  Projection p = umap_fit(m.vectors, params);
  p.source_digest = m.digest();
  return p;
}

EigenSpectrum pca_eigenvalues(const RowMatrix& data, int k, PcaRoute route) {
  const auto n = data.rows();
  const auto d = data.cols();
  if (n < 2) throw DomainError("pca_eigenvalues: need at least 2 rows");
  if (k < 1) throw DomainError("pca_eigenvalues: k must be >= 1");
  const RowMatrix xc = centered(data);
  const bool gram = route == PcaRoute::kGram || (route == PcaRoute::kAuto && d > n);
  const Eigen::VectorXd values =
      eigh_desc(gram ? Eigen::MatrixXd(xc * xc.transpose()) : Eigen::MatrixXd(xc.transpose() * xc),
                false)
          .first;
  const auto count = std::min<Eigen::Index>({static_cast<Eigen::Index>(k), n - 1, d});
  EigenSpectrum s;
  s.n_points = static_cast<int>(n);
  s.centered = true;
  for (Eigen::Index i = 0; i < count; ++i) s.values.push_back(std::max(0.0, values(i)));
  return s;
}

EigenSpectrum pca_eigenvalues(const embed::EmbeddingMatrix& m, int k, PcaRoute route) {
  return pca_eigenvalues(m.vectors, k, route);
}

std::vector<double> eigen_gaps(const EigenSpectrum& spectrum) {
  const auto& v = spectrum.values;
  if (v.size() < 2) throw DomainError("eigen_gaps: need at least 2 eigenvalues");
  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) gaps.push_back(std::abs(v[i] - v[i + 1]));
  return gaps;
}

double trustworthiness(const RowMatrix& data, const std::vector<geometry::Point2>& embedded,
                       int k, Metric metric) {
  const auto n = static_cast<int>(data.rows());
  if (static_cast<int>(embedded.size()) != n) {
    throw PreconditionError("trustworthiness: row counts differ");
  }
  if (k < 1 || 2 * k >= n) throw PreconditionError("trustworthiness: need 1 <= k < n/2");

  const RowMatrix high = pairwise_distances(data, metric);
  RowMatrix low(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      low(i, j) = std::hypot(embedded[static_cast<std::size_t>(i)].x - embedded[static_cast<std::size_t>(j)].x,
                             embedded[static_cast<std::size_t>(i)].y - embedded[static_cast<std::size_t>(j)].y);
    }
  }
  double penalty = 0.0;
  std::vector<int> rank(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto order = nearest(high, i, n - 1);
    for (int r = 0; r < n - 1; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r + 1;
    for (int j : nearest(low, i, k)) penalty += std::max(0, rank[static_cast<std::size_t>(j)] - k);
  }
  const double nn = n;
  const double kk = k;
  return 1.0 - 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0)) * penalty;
}

}  // namespace ideaspace::reduce
