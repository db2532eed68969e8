#include "ideaspace/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ideaspace/error.hpp"

namespace ideaspace::report {
namespace {

using nlohmann::json;

json point_array(const std::vector<geometry::Point2>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(json::array({p.x, p.y}));
  return a;
}

std::vector<geometry::Point2> points_from(const json& a) {
  std::vector<geometry::Point2> pts;
  pts.reserve(a.size());
  for (const auto& p : a) {
    if (!p.is_array() || p.size() != 2) throw ValidationError("report: point must be [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

std::string cluster_space_name(ClusterSpace s) {
  return s == ClusterSpace::kProjection ? "projection" : "embedding";
}

ClusterSpace parse_cluster_space(const std::string& s) {
  if (s == "projection") return ClusterSpace::kProjection;
  if (s == "embedding") return ClusterSpace::kEmbedding;
  throw ValidationError("report: unknown cluster space '" + s + "'");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Runs `fn`, rethrowing any failure as a StageFailure tagged with `stage`.
template <typename Fn>
auto stage(const char* name, const std::string& set_id, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageFailure&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure(name, e.kind(),
                       "set '" + set_id + "', stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageFailure(name, "error", "set '" + set_id + "', stage " + name + ": " + e.what());
  }
}

SimilaritySummary summarize(const geometry::SimilarityMatrix& raw) {
  SimilaritySummary s;
  const auto n = raw.values.rows();
  std::string bytes;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = raw.values(i, j);
      bytes.append(reinterpret_cast<const char*>(&v), sizeof v);
      if (i != j) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
      }
    }
  }
  s.raw_sha256 = sha256_hex(bytes);
  s.raw_min = lo;
  s.raw_max = hi;
  s.raw_mean = sum / static_cast<double>(n * (n - 1));
  s.normalized = geometry::normalize_similarity(raw).values;
  return s;
}

double max_deviation(const metrics::IdeaSpaceMetrics& a, const metrics::IdeaSpaceMetrics& b) {
  constexpr double kMismatch = std::numeric_limits<double>::infinity();
  if (a.clusters.size() != b.clusters.size()) return kMismatch;
  if (a.distribution.has_value() != b.distribution.has_value()) return kMismatch;
  double dev = 0.0;
  auto track = [&dev](double x, double y) { dev = std::max(dev, std::abs(x - y)); };
  track(a.cluster_sparsity, b.cluster_sparsity);
  track(a.total_area, b.total_area);
  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    const auto& ca = a.clusters[i];
    const auto& cb = b.clusters[i];
    if (ca.cluster_id != cb.cluster_id || ca.n_ideas != cb.n_ideas ||
        ca.hull.vertices.size() != cb.hull.vertices.size()) {
      return kMismatch;
    }
    track(ca.area, cb.area);
    track(a.per_cluster_sparsity.at(ca.cluster_id), b.per_cluster_sparsity.at(cb.cluster_id));
    for (std::size_t v = 0; v < ca.hull.vertices.size(); ++v) {
      track(ca.hull.vertices[v].x, cb.hull.vertices[v].x);
      track(ca.hull.vertices[v].y, cb.hull.vertices[v].y);
    }
  }
  if (a.distribution) {
    track(a.distribution->score, b.distribution->score);
    track(a.distribution->spider_area, b.distribution->spider_area);
    track(a.distribution->regular_polygon_area, b.distribution->regular_polygon_area);
  }
  return dev;
}

}  // namespace

std::vector<std::string> AnalysisReport::idea_ids() const {
  std::vector<std::string> ids;
  ids.reserve(catalog.size());
  for (const auto& c : catalog) ids.push_back(c.id);
  return ids;
}

cluster::Clustering AnalysisReport::clustering() const {
  cluster::Clustering c;
  c.labels = labels;
  c.eps = params.eps;
  c.min_pts = params.min_pts;
  for (int l : labels) {
    if (l != cluster::kNoise) c.cluster_ids.push_back(l);
  }
  std::sort(c.cluster_ids.begin(), c.cluster_ids.end());
  c.cluster_ids.erase(std::unique(c.cluster_ids.begin(), c.cluster_ids.end()), c.cluster_ids.end());
  return c;
}

json to_json(const AnalysisReport& r) {
  const auto& p = r.params;
  json params = {
      {"embedder",
       {{"backend", p.backend},
        {"model_id", p.model_id},
        {"dim", p.dim},
        {"seed", p.embed_seed},
        {"text_template", p.text_template},
        {"include_problem_statement", p.include_problem_statement}}},
      {"umap",
       {{"n_neighbors", p.umap.n_neighbors},
        {"min_dist", p.umap.min_dist},
        {"n_epochs", p.umap.n_epochs},
        {"learning_rate", p.umap.learning_rate},
        {"negative_samples", p.umap.negative_samples},
        {"seed", p.umap.seed},
        {"metric", std::string(reduce::metric_name(p.umap.metric))}}},
      {"dbscan",
       {{"eps", p.eps},
        {"min_pts", p.min_pts},
        {"eps_suggested", p.eps_suggested},
        {"space", cluster_space_name(p.cluster_space)}}},
      {"spectrum_k", p.spectrum_k}};

  json clusters = json::array();
  for (const auto& c : r.metrics.clusters) {
    clusters.push_back({{"cluster_id", c.cluster_id},
                        {"n_ideas", c.n_ideas},
                        {"area", c.area},
                        {"idea_sparsity", r.metrics.per_cluster_sparsity.at(c.cluster_id)},
                        {"degenerate", c.hull.degenerate},
                        {"hull", point_array(c.hull.vertices)}});
  }
  json distribution = nullptr;
  if (r.metrics.distribution) {
    distribution = {{"score", r.metrics.distribution->score},
                    {"spider_area", r.metrics.distribution->spider_area},
                    {"regular_polygon_area", r.metrics.distribution->regular_polygon_area}};
  }
  json metrics = {
      {"clusters", clusters},
      {"cluster_sparsity", r.metrics.cluster_sparsity},
      {"total_area", r.metrics.total_area},
      {"distribution", distribution},
      {"distribution_absent_reason", r.metrics.distribution_absent_reason},
      {"eigen",
       {{"values", r.metrics.eigen_spectrum.values},
        {"gaps", r.metrics.eigen_gaps},
        {"centered", r.metrics.eigen_spectrum.centered},
        {"n_points", r.metrics.eigen_spectrum.n_points}}},
      {"dispersion",
       {{"top_k", r.dispersion.top_k},
        {"gaps", r.dispersion.gaps},
        {"flatness", r.dispersion.flatness}}}};

  json sim_rows = json::array();
  for (Eigen::Index i = 0; i < r.similarity.normalized.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.similarity.normalized.cols(); ++j) {
      row.push_back(r.similarity.normalized(i, j));
    }
    sim_rows.push_back(std::move(row));
  }
  json catalog = json::array();
  for (const auto& c : r.catalog) catalog.push_back({{"id", c.id}, {"title", c.title}});

  return {{"set_id", r.set_id},
          {"problem_statement", r.problem_statement},
          {"params", params},
          {"projection", point_array(r.projection)},
          {"labels", r.labels},
          {"metrics", metrics},
          {"similarity",
           {{"raw_sha256", r.similarity.raw_sha256},
            {"raw_min", r.similarity.raw_min},
            {"raw_max", r.similarity.raw_max},
            {"raw_mean", r.similarity.raw_mean},
            {"normalized", sim_rows}}},
          {"catalog", catalog},
          {"created_at", r.created_at},
          {"tool_version", r.tool_version},
          {"input_digests", r.input_digests}};
}

AnalysisReport from_json(const json& doc) {
  try {
    AnalysisReport r;
    r.set_id = doc.at("set_id").get<std::string>();
    r.problem_statement = doc.at("problem_statement").get<std::string>();
    const json& params = doc.at("params");
    const json& emb = params.at("embedder");
    r.params.backend = emb.at("backend").get<std::string>();
    r.params.model_id = emb.at("model_id").get<std::string>();
    r.params.dim = emb.at("dim").get<int>();
    r.params.embed_seed = emb.at("seed").get<std::uint64_t>();
    r.params.text_template = emb.at("text_template").get<std::string>();
    r.params.include_problem_statement = emb.at("include_problem_statement").get<bool>();
    const json& um = params.at("umap");
    r.params.umap.n_neighbors = um.at("n_neighbors").get<int>();
    r.params.umap.min_dist = um.at("min_dist").get<double>();
    r.params.umap.n_epochs = um.at("n_epochs").get<int>();
    r.params.umap.learning_rate = um.at("learning_rate").get<double>();
    r.params.umap.negative_samples = um.at("negative_samples").get<int>();
    r.params.umap.seed = um.at("seed").get<std::uint64_t>();
    r.params.umap.metric = reduce::parse_metric(um.at("metric").get<std::string>());
    const json& db = params.at("dbscan");
    r.params.eps = db.at("eps").get<double>();
    r.params.min_pts = db.at("min_pts").get<int>();
    r.params.eps_suggested = db.at("eps_suggested").get<bool>();
    r.params.cluster_space = parse_cluster_space(db.at("space").get<std::string>());
    r.params.spectrum_k = params.at("spectrum_k").get<int>();

    r.projection = points_from(doc.at("projection"));
    r.labels = doc.at("labels").get<std::vector<int>>();
    if (r.labels.size() != r.projection.size()) {
      throw ValidationError("report: labels and projection differ in length");
    }

    const json& m = doc.at("metrics");
    for (const auto& jc : m.at("clusters")) {
      metrics::ClusterGeometry g;
      g.cluster_id = jc.at("cluster_id").get<int>();
      g.n_ideas = jc.at("n_ideas").get<int>();
      g.area = jc.at("area").get<double>();
      g.hull.degenerate = jc.at("degenerate").get<bool>();
      g.hull.vertices = points_from(jc.at("hull"));
      r.metrics.per_cluster_sparsity[g.cluster_id] = jc.at("idea_sparsity").get<double>();
      r.metrics.clusters.push_back(std::move(g));
    }
    r.metrics.cluster_sparsity = m.at("cluster_sparsity").get<double>();
    r.metrics.total_area = m.at("total_area").get<double>();
    if (const json& d = m.at("distribution"); !d.is_null()) {
      r.metrics.distribution = metrics::DistributionScore{
          d.at("score").get<double>(), d.at("spider_area").get<double>(),
          d.at("regular_polygon_area").get<double>()};
    }
    r.metrics.distribution_absent_reason = m.at("distribution_absent_reason").get<std::string>();
    const json& eig = m.at("eigen");
    r.metrics.eigen_spectrum.values = eig.at("values").get<std::vector<double>>();
    r.metrics.eigen_spectrum.centered = eig.at("centered").get<bool>();
    r.metrics.eigen_spectrum.n_points = eig.at("n_points").get<int>();
    r.metrics.eigen_gaps = eig.at("gaps").get<std::vector<double>>();
    const json& disp = m.at("dispersion");
    r.dispersion.top_k = disp.at("top_k").get<std::vector<double>>();
    r.dispersion.gaps = disp.at("gaps").get<std::vector<double>>();
    r.dispersion.flatness = disp.at("flatness").get<double>();

    const json& sim = doc.at("similarity");
    r.similarity.raw_sha256 = sim.at("raw_sha256").get<std::string>();
    r.similarity.raw_min = sim.at("raw_min").get<double>();
    r.similarity.raw_max = sim.at("raw_max").get<double>();
    r.similarity.raw_mean = sim.at("raw_mean").get<double>();
    const json& rows = sim.at("normalized");
    const auto n = static_cast<Eigen::Index>(rows.size());
    r.similarity.normalized.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const json& row = rows[static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != n) {
        throw ValidationError("report: similarity matrix is not square");
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        r.similarity.normalized(i, j) = row[static_cast<std::size_t>(j)].get<double>();
      }
    }
    for (const auto& c : doc.at("catalog")) {
      r.catalog.push_back({c.at("id").get<std::string>(), c.at("title").get<std::string>()});
    }
    if (r.catalog.size() != r.labels.size()) {
      throw ValidationError("report: catalog and labels differ in length");
    }
    r.created_at = doc.at("created_at").get<std::string>();
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.input_digests = doc.at("input_digests").get<std::map<std::string, std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  } catch (const ParameterError& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
}

std::string emit(const AnalysisReport& report) { return to_json(report).dump(2) + "\n"; }

AnalysisReport parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what(), 0, static_cast<int>(e.byte));
  }
  return from_json(doc);
}

AnalysisReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void save_report(const AnalysisReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write report '" + tmp.string() + "'");
    out << emit(report);
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string report_file_name(const std::string& set_id) {
  std::string safe;
  for (char c : set_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    safe.push_back(ok ? c : '_');
  }
  return safe + ".report.json";
}

double recompute_deviation(const AnalysisReport& report) {
  const auto fresh = metrics::compute_idea_space_metrics(report.projection, report.clustering(),
                                                         report.metrics.eigen_spectrum);
  return max_deviation(fresh, report.metrics);
}

corpus::IdeaSet union_set(const std::vector<corpus::IdeaSet>& sets) {
  corpus::IdeaSet u;
  u.set_id = kUnionSetId;
  for (const auto& s : sets) {
    for (auto idea : s.ideas) {
      idea.id = s.set_id + "/" + idea.id;
      u.ideas.push_back(std::move(idea));
    }
  }
  return u;
}

AnalysisReport analyze_set(const corpus::IdeaSet& set, const PipelineConfig& config,
                           embed::EmbeddingCache* cache) {
  const std::string& id = set.set_id;
  const corpus::TextTemplate tmpl =
      stage("embed", id, [&] { return corpus::TextTemplate(config.text_template); });
  std::vector<std::string> texts;
  std::vector<std::string> row_ids;
  for (const auto& idea : set.ideas) {
    std::string text = corpus::render_idea_text(idea, tmpl);
    if (config.include_problem_statement && !set.problem_statement.empty()) {
      text = set.problem_statement + " " + text;
    }
    texts.push_back(std::move(text));
    row_ids.push_back(idea.id);
  }

  const auto emb = stage("embed", id,
                         [&] { return embed::embed_texts(texts, config.embedder, cache, row_ids); });
  const auto sim = stage("similarity", id, [&] { return geometry::similarity_matrix(emb, false); });
  const auto proj = stage("umap", id, [&] { return reduce::umap_fit(emb, config.umap); });

  bool suggested = false;
  const auto clustering = stage("cluster", id, [&] {
    if (config.cluster_space == ClusterSpace::kEmbedding) {
      if (!config.eps) throw ParameterError("clustering in embedding space needs an explicit eps");
      return cluster::dbscan(emb.vectors, *config.eps, config.min_pts);
    }
    double eps = 0.0;
    if (config.eps) {
      eps = *config.eps;
    } else {
      eps = cluster::suggest_eps(proj.points, std::max(1, config.min_pts - 1));
      suggested = true;
    }
    return cluster::dbscan(proj.points, eps, config.min_pts);
  });

  AnalysisReport r;
  stage("metrics", id, [&] {
    const auto spectrum = reduce::pca_eigenvalues(emb, config.spectrum_k);
    r.metrics = metrics::compute_idea_space_metrics(proj, clustering, spectrum);
    r.dispersion = metrics::dispersion_profile(spectrum, config.dispersion_top_k);
  });

  r.set_id = id;
  r.problem_statement = set.problem_statement;
  r.params.backend = config.embedder.backend == embed::Backend::kOffline ? "offline" : "remote";
  r.params.model_id = emb.model_id;
  r.params.dim = config.embedder.dim;
  r.params.embed_seed = config.embedder.seed;
  r.params.text_template = tmpl.source();
  r.params.include_problem_statement = config.include_problem_statement;
  r.params.umap = config.umap;
  r.params.eps = clustering.eps;
  r.params.min_pts = clustering.min_pts;
  r.params.eps_suggested = suggested;
  r.params.cluster_space = config.cluster_space;
  r.params.spectrum_k = config.spectrum_k;
  r.projection = proj.points;
  r.labels = clustering.labels;
  r.similarity = summarize(sim);
  for (const auto& idea : set.ideas) r.catalog.push_back({idea.id, idea.title});
  r.created_at = config.created_at.empty() ? utc_now() : config.created_at;
  std::string all_text;
  for (const auto& t : texts) all_text += t + '\n';
  r.input_digests = {{"corpus_set_sha256", sha256_hex(corpus::serialize_corpus({set}))},
                     {"texts_sha256", sha256_hex(all_text)},
                     {"embedding_sha256", proj.source_digest}};
  return r;
}

PipelineResult run_pipeline(const std::vector<corpus::IdeaSet>& sets,
                            const PipelineConfig& config) {
  std::optional<embed::EmbeddingCache> cache;
  if (config.cache_path) cache.emplace(*config.cache_path);
  embed::EmbeddingCache* cache_ptr = cache ? &*cache : nullptr;

  using Outcome = std::pair<std::optional<AnalysisReport>, std::optional<StageError>>;
  auto run_one = [&](const corpus::IdeaSet& set) -> Outcome {
    try {
      return {analyze_set(set, config, cache_ptr), std::nullopt};
    } catch (const StageFailure& f) {
      return {std::nullopt, StageError{set.set_id, f.stage(), f.kind(), f.what()}};
    } catch (const std::exception& e) {
      return {std::nullopt, StageError{set.set_id, "report", "error", e.what()}};
    }
  };

  std::vector<Outcome> outcomes;
  if (config.parallel) {
    std::vector<std::future<Outcome>> futures;
    for (const auto& set : sets) {
      futures.push_back(std::async(std::launch::async, run_one, std::cref(set)));
    }
    for (auto& f : futures) outcomes.push_back(f.get());
  } else {
    for (const auto& set : sets) outcomes.push_back(run_one(set));
  }

  PipelineResult result;
  for (auto& [report, error] : outcomes) {
    if (report) result.reports.push_back(std::move(*report));
    if (error) result.errors.push_back(std::move(*error));
  }
  if (config.union_report && !sets.empty()) {
    auto [report, error] = run_one(union_set(sets));
    if (report) result.union_report = std::move(*report);
    if (error) result.errors.push_back(std::move(*error));
  }
  return result;
}

PipelineResult run_pipeline(const std::string& corpus_path, const PipelineConfig& config) {
  return run_pipeline(corpus::load_corpus(corpus_path), config);
}

}  // namespace ideaspace::report
