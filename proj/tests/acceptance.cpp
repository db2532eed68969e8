// Acceptance run: one PASS/FAIL line per criterion with its runtime budget.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "ideaspace/cluster.hpp"
#include "ideaspace/detail/random.hpp"
#include "ideaspace/error.hpp"
#include "ideaspace/geometry.hpp"
#include "ideaspace/metrics.hpp"
#include "ideaspace/reduce.hpp"
#include "ideaspace/report.hpp"
#include "oracles/oracles.hpp"

using namespace ideaspace;
using geometry::Point2;

namespace {

// Collects the first few failed conditions of one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failed_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& s) { info_ += (info_.empty() ? "" : ", ") + s; }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream out;
    out << total_ - failed_ << "/" << total_ << " checks";
    if (!info_.empty()) out << ", " << info_;
    if (!notes_.empty()) out << "; failed: " << notes_;
    return out.str();
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::string notes_;
  std::string info_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

int failures = 0;

void criterion(const char* name, double budget_s, const std::function<void(Checks&)>& body) {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs < budget_s, "runtime " + fmt(secs) + " s over budget");
  const bool pass = c.ok();
  if (!pass) ++failures;
  std::printf("%s  %-22s %7.2f s (budget %g s)  %s\n", pass ? "PASS" : "FAIL", name, secs,
              budget_s, c.summary().c_str());
  std::fflush(stdout);
}

std::vector<Point2> random_disc(detail::Rng& rng, int n) {
  std::vector<Point2> pts;
  while (static_cast<int>(pts.size()) < n) {
    const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
    if (x * x + y * y <= 1.0) pts.push_back({x, y});
  }
  return pts;
}

std::vector<Point2> dbscan_instance(detail::Rng& rng, int n) {
  std::vector<Point2> pts;
  const int blobs = 1 + static_cast<int>(rng.below(4));
  for (int b = 0; b < blobs; ++b) {
    const Point2 c{rng.uniform(1, 9), rng.uniform(1, 9)};
    const double r = rng.uniform(0.3, 1.5);
    for (int k = 0; k < n / (blobs + 1); ++k) {
      const double a = rng.uniform(0, 2 * std::numbers::pi), d = r * std::sqrt(rng.uniform(0, 1));
      pts.push_back({c.x + d * std::cos(a), c.y + d * std::sin(a)});
    }
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

RowMatrix gaussian_matrix(detail::Rng& rng, int n, int d) {
  RowMatrix m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) m(i, k) = rng.gaussian();
  }
  return m;
}

void metric_formulas(Checks& c) {
  const double e1 = std::exp(-1.0);
  c.expect(near(metrics::idea_sparsity(5, 5), e1, 1e-12), "IS(a=n) != e^-1");
  c.expect(metrics::idea_sparsity(0, 3) == 0.0, "IS(0) != 0");
  c.expect(near(metrics::idea_sparsity(8, 4), 2 * std::exp(-2.0), 1e-12), "IS(8,4) != 2e^-2");
  double best = -1, best_ratio = -1;
  for (int i = 0; i <= 10000; ++i) {
    const double v = metrics::idea_sparsity(i * 1e-3 * 10.0, 10);
    if (v > best) {
      best = v;
      best_ratio = i * 1e-3;
    }
  }
  c.expect(near(best_ratio, 1.0, 1e-12) && near(best, e1, 1e-12), "IS sweep maximum not at ratio 1");

  const std::vector<double> full = {12}, none, three = {1, 2, 3};
  c.expect(near(metrics::cluster_sparsity(full, 12), 0.0, 1e-12), "CS full hull != 0");
  c.expect(metrics::cluster_sparsity(none, 12) == 1.0, "CS degenerate != 1");
  c.expect(near(metrics::cluster_sparsity(three, 12), 0.5, 1e-12), "CS (1,2,3)/12 != 0.5");

  for (int k = 3; k <= 12; ++k) {
    const std::vector<double> eq(static_cast<std::size_t>(k), 0.7);
    c.expect(near(metrics::distribution_score(eq).score, 1.0, 1e-12), "DS equal spokes != 1");
  }
  double prev = 2.0;
  for (int i = 100; i >= 0; --i) {
    const std::vector<double> s = {1, 1, 1, 1, i / 100.0};
    const double v = metrics::distribution_score(s).score;
    c.expect(v < prev && v > 0 && v <= 1 + 1e-12, "DS not monotone in (0,1]");
    prev = v;
  }
  const std::vector<double> s = {0.1, 0.3, 0.2, 0.05}, s2 = {1, 3, 2, 0.5};
  c.expect(near(metrics::distribution_score(s).score, metrics::distribution_score(s2).score, 1e-12),
           "DS not scale invariant");

  c.expect(metrics::sampling_score({{0, 3}, {1, 3}, {2, 3}}, 3, 3) == 1.0, "SS all full != 1");
  c.expect(metrics::sampling_score({{0, 2}, {1, 1}, {2, 0}}, 3, 3) == 0.0, "SS none full != 0");
  c.expect(near(metrics::sampling_score({{0, 2}, {1, 2}, {2, 2}, {3, 2}, {4, 1}}, 2, 5), 0.8, 1e-12),
           "SS 4/5 != 0.8");
}

void geometry_oracle(Checks& c) {
  detail::Rng rng(11);
  int max_n = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(48));
    max_n = std::max(max_n, n);
    const auto pts = random_disc(rng, n);
    const auto hull = geometry::convex_hull(pts);
    std::set<std::pair<double, double>> got, want;
    for (const auto& v : hull.vertices) got.insert({v.x, v.y});
    for (auto i : oracle::brute_force_hull(pts)) want.insert({pts[i].x, pts[i].y});
    c.expect(got == want, "hull mismatch trial " + std::to_string(trial));
    c.expect(near(geometry::polygon_area(hull), oracle::fan_area(hull.vertices), 1e-12),
             "area mismatch trial " + std::to_string(trial));
  }
  c.note("max n " + std::to_string(max_n));
}

void dbscan_oracle(Checks& c) {
  detail::Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(200));
    const auto pts = dbscan_instance(rng, n);
    const double eps = rng.uniform(0.1, 1.2);
    const int min_pts = 1 + static_cast<int>(rng.below(8));
    const auto got = cluster::dbscan(pts, eps, min_pts).labels;
    const auto want = oracle::brute_force_dbscan(pts, eps, min_pts);
    c.expect(oracle::canonical_labels(got) == oracle::canonical_labels(want),
             "labels differ trial " + std::to_string(trial));
  }
}

void pca_suite(Checks& c) {
  detail::Rng rng(31);
  for (auto [n, d] : {std::pair{20, 6}, {8, 40}, {50, 50}, {3, 100}}) {
    const auto m = gaussian_matrix(rng, n, d);
    const RowMatrix centered = m.rowwise() - m.colwise().mean();
    const double total = centered.squaredNorm();
    double sum = 0;
    for (double v : reduce::pca_eigenvalues(m, std::max(n, d)).values) sum += v;
    c.expect(std::abs(sum - total) <= 1e-8 * total, "trace identity " + std::to_string(n) + "x" + std::to_string(d));
  }
  RowMatrix line(10, 5);
  const double dir[5] = {1, -2, 0.5, 3, 0};
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 5; ++k) line(i, k) = 4.0 + (i * 0.7 - 2) * dir[k];
  }
  const auto s = reduce::pca_eigenvalues(line, 10).values;
  int nonzero = 0;
  for (double v : s) nonzero += v > 1e-9 ? 1 : 0;
  c.expect(nonzero == 1, "rank-1 line has " + std::to_string(nonzero) + " nonzero eigenvalues");

  detail::Rng rng2(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng2.below(20));
    const int d = 2 + static_cast<int>(rng2.below(10));
    const auto m = gaussian_matrix(rng2, n, d);
    const auto gram = reduce::pca_eigenvalues(m, d, reduce::PcaRoute::kGram).values;
    const auto ref = oracle::covariance_route_spectrum(m);
    bool same = gram.size() <= ref.size();
    for (std::size_t i = 0; same && i < gram.size(); ++i) {
      same = std::abs(gram[i] - ref[i]) <= 1e-9 * std::max(1.0, ref[0]);
    }
    c.expect(same, "gram vs covariance trial " + std::to_string(trial));
  }
}

void umap_suite(Checks& c) {
  // Frozen least-squares (a, b) for the kernel curve.
  struct Case {
    double min_dist, a, b;
  };
  for (const auto& k : {Case{0.1, 1.5769434602697652, 0.8950608778515733},
                        Case{0.5, 0.5830300203414425, 1.3341669924314914},
                        Case{0.01, 1.8956058664339035, 0.8006378442860499}}) {
    const auto fit = reduce::fit_kernel_curve(k.min_dist);
    c.expect(std::abs(fit.a - k.a) <= 0.02 * k.a && std::abs(fit.b - k.b) <= 0.02 * k.b,
             "(a,b) off for min_dist " + fmt(k.min_dist));
  }

  detail::Rng rng(7);
  RowMatrix centers = gaussian_matrix(rng, 3, 64) * 3.0;
  RowMatrix x(300, 64);
  for (Eigen::Index i = 0; i < 300; ++i) {
    for (Eigen::Index k = 0; k < 64; ++k) x(i, k) = centers(i / 100, k) + rng.gaussian();
  }
  reduce::UmapParams p;
  p.seed = 7;
  p.metric = reduce::Metric::kEuclidean;
  const auto a = reduce::umap_fit(x, p);
  const auto b = reduce::umap_fit(x, p);
  c.expect(a.points.size() == b.points.size() &&
               std::memcmp(a.points.data(), b.points.data(), a.points.size() * sizeof(Point2)) == 0,
           "two seeded runs differ");

  double intra = 0, inter = 0;
  int ni = 0, nx = 0;
  for (std::size_t i = 0; i < 300; ++i) {
    for (std::size_t j = i + 1; j < 300; ++j) {
      const double d = std::hypot(a.points[i].x - a.points[j].x, a.points[i].y - a.points[j].y);
      (i / 100 == j / 100 ? intra : inter) += d;
      ++(i / 100 == j / 100 ? ni : nx);
    }
  }
  const double ratio = (intra / ni) / (inter / nx);
  const double tw = reduce::trustworthiness(x, a.points, 15);
  c.note("trustworthiness " + fmt(tw) + ", intra/inter " + fmt(ratio));
  c.expect(tw >= 0.80, "trustworthiness below 0.80");
  c.expect(ratio < 1.0, "intra/inter ratio not below 1");
}

void end_to_end(Checks& c) {
  report::PipelineConfig cfg;
  cfg.embedder.backend = embed::Backend::kOffline;
  cfg.embedder.dim = 512;
  cfg.union_report = true;
  const auto run = report::run_pipeline(corpus::synthesize_corpus(6, 100, 1), cfg);
  c.expect(run.errors.empty(), "pipeline reported stage errors");
  c.expect(run.reports.size() == 6, "expected 6 reports");
  c.expect(run.union_report.has_value(), "union report missing");

  double worst = 0;
  auto check_report = [&](const report::AnalysisReport& r) {
    const auto back = report::parse(report::emit(r));
    worst = std::max(worst, report::recompute_deviation(back));
    const double cs = r.metrics.cluster_sparsity;
    c.expect(cs >= 0 && cs <= 1, r.set_id + " CS outside [0,1]");
  };
  for (const auto& r : run.reports) {
    check_report(r);
    const auto& ds = r.metrics.distribution;
    c.expect(ds.has_value() && ds->score > 0 && ds->score <= 1, r.set_id + " DS outside (0,1]");
  }
  if (run.union_report) check_report(*run.union_report);
  c.expect(worst <= 1e-9, "recomputed metrics deviate by " + fmt(worst));
  c.note("max recompute deviation " + fmt(worst));

  // Matched DBSCAN parameters on both planar fixtures.
  reduce::EigenSpectrum spectrum;
  spectrum.values = {1, 0};
  for (double eps : {0.3, 0.5, 0.8, 1.0, 1.5}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto hd = geometry::synthesize_point_scenario(geometry::Scenario::kHighDispersionUniform, 100, seed);
      const auto ld = geometry::synthesize_point_scenario(geometry::Scenario::kLowDispersionNonUniform, 100, seed);
      const double cs_hd = metrics::compute_idea_space_metrics(hd, cluster::dbscan(hd, eps, 5), spectrum).cluster_sparsity;
      const double cs_ld = metrics::compute_idea_space_metrics(ld, cluster::dbscan(ld, eps, 5), spectrum).cluster_sparsity;
      c.expect(cs_hd > cs_ld, "HD-UD CS <= LD-NUD CS at eps " + fmt(eps) + " seed " + std::to_string(seed));
    }
  }
}

// Returns false when the live check did not run.
bool live_word_similarity(Checks& c) {
  const char* key = std::getenv("EMBED_API_KEY");
  if (key == nullptr || *key == '\0') return false;
  const std::vector<std::string> words = {"chair", "seat", "sofa",  "bench",   "desk",
                                          "table", "cushion", "light", "monitor", "fan"};
  embed::EmbedderConfig cfg;
  cfg.backend = embed::Backend::kRemote;
  if (const char* url = std::getenv("EMBED_ENDPOINT")) cfg.endpoint_url = url;
  const auto m = embed::embed_texts(words, cfg);
  const auto sim = geometry::similarity_matrix(m, true).values;
  double mean[3] = {0, 0, 0};
  for (int s = 0; s < 3; ++s) {
    for (int k = 0; k < 3; ++k) mean[s] += sim(0, 1 + 3 * s + k) / 3.0;
  }
  c.note("chair means " + fmt(mean[0]) + " / " + fmt(mean[1]) + " / " + fmt(mean[2]));
  c.expect(mean[0] > mean[1] && mean[1] > mean[2], "chair similarity ordering violated");
  return true;
}

}  // namespace

int main() {
  criterion("metric-formulas", 1, metric_formulas);
  criterion("geometry-oracle", 10, geometry_oracle);
  criterion("dbscan-oracle", 30, dbscan_oracle);
  criterion("pca", 5, pca_suite);
  criterion("umap", 120, umap_suite);
  criterion("end-to-end", 60, end_to_end);

  Checks live;
  bool ran = false;
  try {
    ran = live_word_similarity(live);
  } catch (const std::exception& e) {
    ran = true;
    live.expect(false, std::string("exception: ") + e.what());
  }
  if (!ran) {
    std::printf("SKIP  %-22s reference score tables need the original vectors; "
                "live ordering check needs EMBED_API_KEY\n",
                "reference-values");
  } else {
    if (!live.ok()) ++failures;
    std::printf("%s  %-22s %s\n", live.ok() ? "PASS" : "FAIL", "reference-values", live.summary().c_str());
  }
  return failures == 0 ? 0 : 1;
}
