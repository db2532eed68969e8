#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "ideaspace/cluster.hpp"
#include "ideaspace/corpus.hpp"
#include "ideaspace/embed.hpp"
#include "ideaspace/error.hpp"
#include "ideaspace/geometry.hpp"
#include "ideaspace/metrics.hpp"
#include "ideaspace/reduce.hpp"
#include "ideaspace/report.hpp"

namespace py = pybind11;
using namespace ideaspace;
using geometry::Point2;

namespace {

std::vector<Point2> to_points(const RowMatrix& m) {
  if (m.cols() != 2) throw PreconditionError("expected an (n, 2) array of points");
  std::vector<Point2> pts(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) pts[static_cast<std::size_t>(i)] = {m(i, 0), m(i, 1)};
  return pts;
}

RowMatrix from_points(const std::vector<Point2>& pts) {
  RowMatrix m(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = pts[i].x;
    m(static_cast<Eigen::Index>(i), 1) = pts[i].y;
  }
  return m;
}

cluster::Clustering clustering_from(const std::vector<int>& labels) {
  cluster::Clustering c;
  c.labels = labels;
  for (int l : labels) {
    if (l >= 0) c.cluster_ids.push_back(l);
  }
  std::sort(c.cluster_ids.begin(), c.cluster_ids.end());
  c.cluster_ids.erase(std::unique(c.cluster_ids.begin(), c.cluster_ids.end()), c.cluster_ids.end());
  return c;
}

// Reports cross the boundary as JSON text; the Python side decodes it.
std::string report_text(const report::AnalysisReport& r) { return report::emit(r); }

}  // namespace

PYBIND11_MODULE(_ideaspace, m) {
  m.doc() = "Embedding-space analytics for ideation sets";
  m.attr("__version__") = report::kToolVersion;

  auto base = py::register_exception<Error>(m, "IdeaspaceError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<UndefinedScoreError>(m, "UndefinedScoreError", base.ptr());
  py::register_exception<TransportError>(m, "TransportError", base.ptr());

  m.def("offline_embed", &embed::offline_embed, py::arg("text"), py::arg("dim") = 512,
        py::arg("seed") = 42);
  m.def(
      "embed_offline",
      [](const std::vector<std::string>& texts, int dim, std::uint64_t seed) {
        embed::EmbedderConfig cfg;
        cfg.backend = embed::Backend::kOffline;
        cfg.dim = dim;
        cfg.seed = seed;
        return embed::embed_texts(texts, cfg).vectors;
      },
      py::arg("texts"), py::arg("dim") = 512, py::arg("seed") = 42);

  m.def(
      "similarity_matrix",
      [](const RowMatrix& vectors, bool normalize) {
        embed::EmbeddingMatrix e;
        e.vectors = vectors;
        return geometry::similarity_matrix(e, normalize).values;
      },
      py::arg("vectors"), py::arg("normalize") = true);
  m.def(
      "convex_hull", [](const RowMatrix& pts) { return from_points(geometry::convex_hull(to_points(pts)).vertices); },
      py::arg("points"));
  m.def(
      "polygon_area",
      [](const RowMatrix& vertices) {
        geometry::Polygon2D p;
        p.vertices = to_points(vertices);
        p.degenerate = p.vertices.size() < 3;
        return geometry::polygon_area(p);
      },
      py::arg("vertices"));
  m.def(
      "spider_polygon_area",
      [](const std::vector<double>& spokes) { return geometry::spider_polygon_area(spokes); },
      py::arg("spokes"));

  m.def(
      "dbscan",
      [](const RowMatrix& pts, double eps, int min_pts) {
        return cluster::dbscan(to_points(pts), eps, min_pts).labels;
      },
      py::arg("points"), py::arg("eps"), py::arg("min_pts") = 5);
  m.def(
      "suggest_eps", [](const RowMatrix& pts, int k) { return cluster::suggest_eps(to_points(pts), k); },
      py::arg("points"), py::arg("k") = 4);

  m.def(
      "umap",
      [](const RowMatrix& data, int n_neighbors, double min_dist, int n_epochs, std::uint64_t seed,
         const std::string& metric) {
        reduce::UmapParams p;
        p.n_neighbors = n_neighbors;
        p.min_dist = min_dist;
        p.n_epochs = n_epochs;
        p.seed = seed;
        p.metric = reduce::parse_metric(metric);
        py::gil_scoped_release release;
        return from_points(reduce::umap_fit(data, p).points);
      },
      py::arg("data"), py::arg("n_neighbors") = 15, py::arg("min_dist") = 0.1,
      py::arg("n_epochs") = 400, py::arg("seed") = 42, py::arg("metric") = "cosine");
  m.def(
      "pca_eigenvalues",
      [](const RowMatrix& data, int k) { return reduce::pca_eigenvalues(data, k).values; },
      py::arg("data"), py::arg("k") = 50);
  m.def(
      "trustworthiness",
      [](const RowMatrix& data, const RowMatrix& embedded, int k) {
        return reduce::trustworthiness(data, to_points(embedded), k);
      },
      py::arg("data"), py::arg("embedded"), py::arg("k") = 15);

  m.def("idea_sparsity", &metrics::idea_sparsity, py::arg("area"), py::arg("n_ideas"));
  m.def(
      "cluster_sparsity",
      [](const std::vector<double>& areas, double total) { return metrics::cluster_sparsity(areas, total); },
      py::arg("cluster_areas"), py::arg("total_area"));
  m.def(
      "distribution_score",
      [](const std::vector<double>& spokes) { return metrics::distribution_score(spokes).score; },
      py::arg("spokes"));
  m.def("sampling_score", &metrics::sampling_score, py::arg("si"), py::arg("x_participants"),
        py::arg("n_clusters"));
  m.def(
      "flatness",
      [](const std::vector<double>& eigenvalues, int top_k) {
        reduce::EigenSpectrum s;
        s.values = eigenvalues;
        return metrics::dispersion_profile(s, top_k).flatness;
      },
      py::arg("eigenvalues"), py::arg("top_k") = 10);
  m.def(
      "idea_space_metrics",
      [](const RowMatrix& pts, const std::vector<int>& labels) {
        const auto r = metrics::compute_idea_space_metrics(to_points(pts), clustering_from(labels),
                                                           reduce::EigenSpectrum{});
        py::dict out;
        out["cluster_sparsity"] = r.cluster_sparsity;
        out["total_area"] = r.total_area;
        out["idea_sparsity"] = r.per_cluster_sparsity;
        out["distribution_score"] =
            r.distribution ? py::object(py::float_(r.distribution->score)) : py::object(py::none());
        return out;
      },
      py::arg("points"), py::arg("labels"));

  m.def(
      "_analyze",
      [](const std::string& corpus_path, int dim, std::uint64_t seed, bool union_report) {
        report::PipelineConfig cfg;
        cfg.embedder.backend = embed::Backend::kOffline;
        cfg.embedder.dim = dim;
        cfg.embedder.seed = seed;
        cfg.umap.seed = seed;
        cfg.union_report = union_report;
        report::PipelineResult run;
        {
          py::gil_scoped_release release;
          run = report::run_pipeline(corpus_path, cfg);
        }
        std::vector<std::string> texts;
        for (const auto& r : run.reports) texts.push_back(report_text(r));
        if (run.union_report) texts.push_back(report_text(*run.union_report));
        std::vector<py::dict> errors;
        for (const auto& e : run.errors) {
          py::dict d;
          d["set_id"] = e.set_id;
          d["stage"] = e.stage;
          d["kind"] = e.kind;
          d["message"] = e.message;
          errors.push_back(d);
        }
        return py::make_tuple(texts, errors);
      },
      py::arg("corpus_path"), py::arg("dim"), py::arg("seed"), py::arg("union_report"));
  m.def(
      "_recompute_deviation",
      [](const std::string& text) { return report::recompute_deviation(report::parse(text)); },
      py::arg("report_json"));
  m.def(
      "_synthesize_corpus",
      [](int n_sets, int ideas, std::uint64_t seed) {
        return corpus::serialize_corpus(corpus::synthesize_corpus(n_sets, ideas, seed));
      },
      py::arg("n_sets"), py::arg("ideas_per_set"), py::arg("seed"));
}
