// ideaspace command-line front end: ingest, analyze, plot, serve, synth.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "ideaspace/corpus.hpp"
#include "ideaspace/error.hpp"
#include "ideaspace/plots.hpp"
#include "ideaspace/report.hpp"
#include "ideaspace/server.hpp"

namespace fs = std::filesystem;
using namespace ideaspace;

namespace {

server::ReportServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const std::filesystem::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path(), ec);
  std::ofstream out(target, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

int cmd_ingest(const std::string& input, const std::string& output) {
  const auto sets = corpus::load_corpus(input);
  std::size_t total = 0;
  for (const auto& s : sets) {
    std::cerr << s.set_id << ": " << s.ideas.size() << " ideas\n";
    total += s.ideas.size();
  }
  std::cerr << sets.size() << " sets, " << total << " ideas\n";
  if (!output.empty()) write_text(output, corpus::serialize_corpus(sets));
  return 0;
}

struct AnalyzeOptions {
  std::string corpus;
  std::string out_dir = "reports";
  std::string backend = "offline";
  std::uint64_t seed = 42;
  std::uint64_t embed_seed = 42;
  std::optional<double> eps;
  int min_pts = 5;
  int neighbors = 15;
  double min_dist = 0.1;
  int epochs = 400;
  std::string metric = "cosine";
  bool union_report = false;
  int dim = 0;
  std::string model;
  std::string endpoint;
  std::string cache;
  std::string text_template;
  bool include_problem = false;
  std::string cluster_space = "projection";
  bool sequential = false;
};

int cmd_analyze(const AnalyzeOptions& o) {
  report::PipelineConfig config;
  auto& e = config.embedder;
  if (o.backend == "offline") {
    e.backend = embed::Backend::kOffline;
    e.dim = o.dim > 0 ? o.dim : 512;
  } else if (o.backend == "remote") {
    e.backend = embed::Backend::kRemote;
    if (o.dim > 0) e.dim = o.dim;
  } else {
    throw ParameterError("unknown backend '" + o.backend + "'");
  }
  e.seed = o.embed_seed;
  if (!o.model.empty()) e.model_id = o.model;
  if (!o.endpoint.empty()) e.endpoint_url = o.endpoint;
  if (!o.cache.empty()) config.cache_path = o.cache;
  if (!o.text_template.empty()) config.text_template = o.text_template;
  config.include_problem_statement = o.include_problem;
  config.umap.n_neighbors = o.neighbors;
  config.umap.min_dist = o.min_dist;
  config.umap.n_epochs = o.epochs;
  config.umap.seed = o.seed;
  config.umap.metric = reduce::parse_metric(o.metric);
  config.eps = o.eps;
  config.min_pts = o.min_pts;
  config.cluster_space = o.cluster_space == "embedding" ? report::ClusterSpace::kEmbedding
                                                        : report::ClusterSpace::kProjection;
  config.union_report = o.union_report;
  config.parallel = !o.sequential;

  const auto result = report::run_pipeline(o.corpus, config);
  fs::create_directories(o.out_dir);
  auto save = [&](const report::AnalysisReport& r) {
    const auto path = fs::path(o.out_dir) / report::report_file_name(r.set_id);
    report::save_report(r, path);
    std::cout << path.string() << "  clusters=" << r.clustering().cluster_ids.size()
              << " CS=" << r.metrics.cluster_sparsity;
    if (r.metrics.distribution) std::cout << " DS=" << r.metrics.distribution->score;
    std::cout << '\n';
  };
  for (const auto& r : result.reports) save(r);
  if (result.union_report) save(*result.union_report);
  for (const auto& err : result.errors) {
    std::cerr << "error: set '" << err.set_id << "' failed in stage " << err.stage << " ("
              << err.kind << "): " << err.message << '\n';
  }
  return result.errors.empty() ? 0 : 1;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& kind,
             const std::string& output) {
  std::vector<report::AnalysisReport> reports;
  for (const auto& path : inputs) reports.push_back(report::load_report(path));
  if (kind != "eigen" && reports.size() != 1) {
    throw ParameterError("--kind " + kind + " takes exactly one report");
  }
  std::string svg;
  if (kind == "scatter") {
    svg = plots::scatter_svg(reports[0]);
  } else if (kind == "heatmap") {
    const auto ids = reports[0].idea_ids();
    svg = plots::heatmap_svg(reports[0].similarity.normalized, ids);
  } else if (kind == "spider") {
    svg = plots::spider_svg(reports[0].metrics, "Idea sparsity: " + reports[0].set_id);
  } else if (kind == "eigen") {
    std::vector<plots::NamedSpectrum> spectra;
    for (const auto& r : reports) spectra.push_back({r.set_id, r.metrics.eigen_spectrum});
    svg = plots::eigen_svg(spectra);
  } else {
    throw ParameterError("unknown plot kind '" + kind + "'");
  }
  write_text(output, svg);
  return 0;
}

int cmd_serve(const std::string& dir, const std::string& bind_addr) {
  const auto [host, port] = server::parse_bind_address(bind_addr);
  server::ReportServer srv(dir);
  const int bound = srv.bind(host, port);
  std::cerr << "serving " << srv.set_ids().size() << " reports from " << dir << " on http://"
            << host << ':' << bound << '\n';
  g_server = &srv;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  srv.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedding-space analytics for ideation exercises"};
  app.require_subcommand(1);

  std::string ingest_in, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Validate a corpus file and print a summary");
  ingest->add_option("file", ingest_in, "Corpus (.json or .csv)")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--output", ingest_out, "Write the canonical JSON corpus here");

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Run the analysis pipeline and write reports");
  analyze->add_option("corpus", ao.corpus, "Corpus (.json or .csv)")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", ao.out_dir, "Output directory for *.report.json")->capture_default_str();
  analyze->add_option("--backend", ao.backend, "offline | remote")
      ->check(CLI::IsMember({"offline", "remote"}))->capture_default_str();
  analyze->add_option("--seed", ao.seed, "UMAP seed")->capture_default_str();
  analyze->add_option("--embed-seed", ao.embed_seed, "Offline embedder seed")->capture_default_str();
  analyze->add_option("--eps", ao.eps, "DBSCAN radius (default: k-distance elbow)");
  analyze->add_option("--min-pts", ao.min_pts, "DBSCAN minimum points")->capture_default_str();
  analyze->add_option("--umap-neighbors", ao.neighbors, "UMAP n_neighbors")->capture_default_str();
  analyze->add_option("--min-dist", ao.min_dist, "UMAP min_dist")->capture_default_str();
  analyze->add_option("--epochs", ao.epochs, "UMAP epochs")->capture_default_str();
  analyze->add_option("--metric", ao.metric, "UMAP input metric")
      ->check(CLI::IsMember({"cosine", "euclidean"}))->capture_default_str();
  analyze->add_flag("--union", ao.union_report, "Also analyze the union of all sets");
  analyze->add_option("--dim", ao.dim, "Embedding dimension (offline default 512)");
  analyze->add_option("--model", ao.model, "Remote model id");
  analyze->add_option("--endpoint", ao.endpoint, "Remote endpoint base URL");
  analyze->add_option("--cache", ao.cache, "Embedding cache file");
  analyze->add_option("--template", ao.text_template, "Idea text template");
  analyze->add_flag("--include-problem-statement", ao.include_problem,
                    "Prefix each idea text with its problem statement");
  analyze->add_option("--cluster-space", ao.cluster_space, "projection | embedding")
      ->check(CLI::IsMember({"projection", "embedding"}))->capture_default_str();
  analyze->add_flag("--sequential", ao.sequential, "Analyze sets one at a time");

  std::vector<std::string> plot_in;
  std::string plot_kind, plot_out;
  auto* plot = app.add_subcommand("plot", "Render a report as SVG");
  plot->add_option("report", plot_in, "Report file(s); eigen accepts several")->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--kind", plot_kind, "scatter | heatmap | spider | eigen")->required()
      ->check(CLI::IsMember({"scatter", "heatmap", "spider", "eigen"}));
  plot->add_option("-o,--output", plot_out, "Output file (default stdout)");

  std::string serve_dir, serve_bind = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Serve reports and collect selections over HTTP");
  serve->add_option("dir", serve_dir, "Directory of *.report.json")->required()
      ->check(CLI::ExistingDirectory);
  serve->add_option("--bind", serve_bind, "host:port")->capture_default_str();

  int synth_sets = 6, synth_ideas = 100;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  synth->add_option("--sets", synth_sets)->capture_default_str();
  synth->add_option("--ideas", synth_ideas, "Ideas per set")->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("-o,--output", synth_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(ingest_in, ingest_out);
    if (*analyze) return cmd_analyze(ao);
    if (*plot) return cmd_plot(plot_in, plot_kind, plot_out);
    if (*serve) return cmd_serve(serve_dir, serve_bind);
    if (*synth) {
      write_text(synth_out, corpus::serialize_corpus(
                                corpus::synthesize_corpus(synth_sets, synth_ideas, synth_seed)));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
