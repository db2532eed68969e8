#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ideaspace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Lowercase hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace ideaspace

namespace ideaspace::embed {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view bytes);
std::string to_hex(const Digest& digest);

// n x d embedding vectors with provenance. Rows are aligned with `row_ids`.
struct EmbeddingMatrix {
  RowMatrix vectors;
  std::string model_id;
  std::vector<std::string> row_ids;
  bool normalized = false;

  Eigen::Index rows() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }

  // Throws ValidationError on non-finite entries, misaligned row ids,
  // duplicate ids, or (when normalized) rows off the unit sphere by > 1e-6.
  void validate() const;

  // SHA-256 over the model id, row ids and the little-endian doubles.
  std::string digest() const;
};

enum class Backend { kRemote, kOffline };

struct EmbedderConfig {
  Backend backend = Backend::kOffline;
  std::string endpoint_url = "https://api.openai.com";
  // The 3072-dimensional OpenAI model; offline runs ignore it and use
  // offline_model_id() instead.
  std::string model_id = "text-embedding-3-large";
  int dim = 3072;
  int batch_size = 64;
  int max_retries = 3;
  int max_in_flight = 4;
  std::uint64_t seed = 42;
  // Initial backoff; doubles after each failed attempt.
  double backoff_seconds = 0.5;
  double timeout_seconds = 60.0;
  // Bearer token. When empty, EMBED_API_KEY is read from the environment.
  std::string api_key;

  void validate() const;
  // Model id recorded in matrices and cache keys for this configuration.
  std::string effective_model_id() const;
};

std::string offline_model_id(int dim, std::uint64_t seed);

// Deterministic hash embedder. Text is split on non-alphanumerics and
// lowercased; every token maps (via a seed-salted 64-bit hash) to a
// Gaussian direction in R^dim; token vectors are summed and L2-normalized.
// Throws DomainError("unembeddable text") when no tokens remain.
std::vector<double> offline_embed(std::string_view text, int dim, std::uint64_t seed);

std::vector<std::string> tokenize(std::string_view text);

// Append-only, content-addressed vector cache keyed by (model_id, SHA-256
// of the text). Record layout, all little-endian:
//   u32 magic 'IDEC' | u16 model_len | model bytes | 32-byte digest |
//   u32 dim | dim x f32 | u32 FNV-1a checksum of everything after magic
// Damaged records are skipped with a warning; the rest stay usable.
class EmbeddingCache {
 public:
  // Opens (creating if absent) the cache file at `path`.
  explicit EmbeddingCache(std::filesystem::path path);

  std::optional<std::vector<float>> lookup(const Digest& text_digest,
                                           const std::string& model_id) const;
  void store(const Digest& text_digest, const std::string& model_id,
             const std::vector<float>& vector);

  std::size_t size() const;
  // Number of damaged records skipped while loading.
  std::size_t skipped_records() const noexcept { return skipped_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void load();

  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, Digest>, std::vector<float>> entries_;
  std::size_t skipped_ = 0;
};

// Embeds `texts` in order. Rows are L2-normalized and rounded to float32 so
// that cached and freshly computed vectors are bit-identical. The cache, if
// given, is consulted before any backend call and updated afterwards.
// Remote errors: TransportError after max_retries, ProtocolError on a row
// count or dimension mismatch.
EmbeddingMatrix embed_texts(const std::vector<std::string>& texts, const EmbedderConfig& config,
                            EmbeddingCache* cache = nullptr,
                            std::vector<std::string> row_ids = {});

// One call to {endpoint}/v1/embeddings for a batch; rows come back ordered by
// the response's `index` field and unnormalized. Exposed for tests.
std::vector<std::vector<float>> fetch_remote_batch(const std::vector<std::string>& texts,
                                                   const EmbedderConfig& config);

}  // namespace ideaspace::embed
