#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ideaspace/cluster.hpp"
#include "ideaspace/corpus.hpp"
#include "ideaspace/embed.hpp"
#include "ideaspace/error.hpp"
#include "ideaspace/geometry.hpp"
#include "ideaspace/metrics.hpp"
#include "ideaspace/reduce.hpp"

namespace ideaspace::report {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kUnionSetId = "union";

enum class ClusterSpace { kProjection, kEmbedding };

struct ReportParams {
  std::string backend;  // "offline" | "remote"
  std::string model_id;
  int dim = 0;
  std::uint64_t embed_seed = 0;
  std::string text_template;
  bool include_problem_statement = false;
  reduce::UmapParams umap;
  double eps = 0.0;
  int min_pts = 0;
  bool eps_suggested = false;
  ClusterSpace cluster_space = ClusterSpace::kProjection;
  int spectrum_k = 0;
};

struct CatalogEntry {
  std::string id;
  std::string title;
};

// Normalized similarity matrix plus a digest of the raw cosine values.
struct SimilaritySummary {
  std::string raw_sha256;
  double raw_min = 0.0;   // off-diagonal
  double raw_max = 0.0;   // off-diagonal
  double raw_mean = 0.0;  // off-diagonal
  RowMatrix normalized;
};

struct AnalysisReport {
  std::string set_id;
  std::string problem_statement;
  ReportParams params;
  std::vector<geometry::Point2> projection;
  std::vector<int> labels;
  metrics::IdeaSpaceMetrics metrics;
  metrics::DispersionProfile dispersion;
  SimilaritySummary similarity;
  std::vector<CatalogEntry> catalog;
  std::string created_at;
  std::string tool_version = kToolVersion;
  std::map<std::string, std::string> input_digests;

  std::vector<std::string> idea_ids() const;
  cluster::Clustering clustering() const;
};

nlohmann::json to_json(const AnalysisReport& report);
AnalysisReport from_json(const nlohmann::json& doc);

// Canonical text form (2-space indented JSON, trailing newline). Doubles
// use the shortest representation that parses back to the same value.
std::string emit(const AnalysisReport& report);
// Throws ParseError for malformed JSON and ValidationError for schema errors.
AnalysisReport parse(const std::string& text);

AnalysisReport load_report(const std::filesystem::path& path);
void save_report(const AnalysisReport& report, const std::filesystem::path& path);
std::string report_file_name(const std::string& set_id);

// Recomputes the metrics from the stored projection and labels and returns
// the largest absolute difference from the stored values.
double recompute_deviation(const AnalysisReport& report);

struct PipelineConfig {
  embed::EmbedderConfig embedder;
  std::optional<std::filesystem::path> cache_path;
  std::string text_template = std::string(corpus::TextTemplate::kDefault);
  bool include_problem_statement = false;
  reduce::UmapParams umap;
  std::optional<double> eps;  // suggested from the k-distance elbow when unset
  int min_pts = 5;
  ClusterSpace cluster_space = ClusterSpace::kProjection;
  int spectrum_k = 50;
  int dispersion_top_k = 10;
  bool union_report = false;
  bool parallel = true;
  // Fixed creation timestamp; the current UTC time is used when empty.
  std::string created_at;
};

struct StageError {
  std::string set_id;
  std::string stage;  // embed | similarity | umap | cluster | metrics | report
  std::string kind;
  std::string message;
};

struct PipelineResult {
  std::vector<AnalysisReport> reports;
  std::optional<AnalysisReport> union_report;
  std::vector<StageError> errors;
};

// embed -> similarity -> UMAP -> DBSCAN -> metrics -> report, per idea set
// (sets run concurrently when `parallel`). A failing set is reported in
// `errors` with its stage; the other sets still produce reports.
PipelineResult run_pipeline(const std::vector<corpus::IdeaSet>& sets,
                            const PipelineConfig& config);
PipelineResult run_pipeline(const std::string& corpus_path, const PipelineConfig& config);

// Analyzes a single set; errors propagate as StageFailure.
AnalysisReport analyze_set(const corpus::IdeaSet& set, const PipelineConfig& config,
                           embed::EmbeddingCache* cache);

// Concatenation of all sets with ids "<set_id>/<idea id>" and no problem
// statement, for whole-corpus clustering.
corpus::IdeaSet union_set(const std::vector<corpus::IdeaSet>& sets);

class StageFailure : public Error {
 public:
  StageFailure(std::string stage, std::string inner_kind, const std::string& what)
      : Error(what), stage_(std::move(stage)), inner_kind_(std::move(inner_kind)) {}
  const char* kind() const noexcept override { return inner_kind_.c_str(); }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
  std::string inner_kind_;
};

}  // namespace ideaspace::report
