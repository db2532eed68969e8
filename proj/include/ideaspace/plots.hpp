#pragma once

#include <span>
#include <string>
#include <vector>

#include "ideaspace/report.hpp"

namespace ideaspace::plots {

// Standalone SVG documents. Structural hooks used by tests and the explorer:
//   scatter: <circle class="point">, <path class="hull"> (dotted, one per
//            non-degenerate cluster hull), noise drawn in gray
//   heatmap: <rect class="cell"> per matrix entry
//   spider:  <polygon class="spider-fill">, fill-opacity grows with CS
//   eigen:   <polyline class="eigen-values"> and <polyline class="eigen-gaps">
//            per spectrum (top ten values, nine gaps)

std::string scatter_svg(const report::AnalysisReport& report);

std::string heatmap_svg(const RowMatrix& similarity, std::span<const std::string> labels = {});

// Spider plot of per-cluster idea sparsity, noise spoke first.
std::string spider_svg(const metrics::IdeaSpaceMetrics& metrics, const std::string& title = "");

struct NamedSpectrum {
  std::string name;
  reduce::EigenSpectrum spectrum;
};
std::string eigen_svg(std::span<const NamedSpectrum> spectra, int top_k = 10);

// Opacity of the spider fill for a given cluster sparsity; monotone increasing.
double spider_fill_opacity(double cluster_sparsity);

// Fill color for a cluster label; noise maps to a gray no cluster uses.
std::string cluster_color(int label);

}  // namespace ideaspace::plots
