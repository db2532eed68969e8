#include "ideaspace/embed.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideaspace/detail/random.hpp"
#include "ideaspace/diagnostics.hpp"
#include "ideaspace/error.hpp"

namespace ideaspace {

std::string sha256_hex(std::string_view bytes) { return embed::to_hex(embed::sha256(bytes)); }

}  // namespace ideaspace

namespace ideaspace::embed {
namespace {

constexpr std::uint32_t kRecordMagic = 0x43454449;  // "IDEC" read as little-endian

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

template <typename T>
T get_le(const char* p) {
  std::array<unsigned char, sizeof(T)> bits;
  std::memcpy(bits.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

std::uint32_t checksum(std::string_view bytes) {
  const std::uint64_t h = detail::fnv1a64(bytes.data(), bytes.size());
  return static_cast<std::uint32_t>(h ^ (h >> 32));
}

bool is_alnum_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::vector<float> normalize_to_float(const std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ProtocolError("embedding vector has zero or non-finite norm");
  }
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

std::string api_key_for(const EmbedderConfig& config) {
  if (!config.api_key.empty()) return config.api_key;
  if (const char* env = std::getenv("EMBED_API_KEY")) return env;
  return {};
}

// Splits "scheme://host:port/prefix" into the client base and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

}  // namespace

Digest sha256(std::string_view bytes) {
  Digest d{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, d.data(), &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  return d;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint8_t b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

void EmbeddingMatrix::validate() const {
  if (static_cast<std::size_t>(vectors.rows()) != row_ids.size()) {
    throw ValidationError("embedding matrix has " + std::to_string(vectors.rows()) + " rows but " +
                          std::to_string(row_ids.size()) + " row ids");
  }
  std::vector<std::string> sorted = row_ids;
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
    throw ValidationError("embedding matrix has duplicate row id '" + *dup + "'");
  }
  if (!vectors.allFinite()) throw ValidationError("embedding matrix has non-finite entries");
  if (normalized) {
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors.row(i).norm() - 1.0) > 1e-6) {
        throw ValidationError("embedding row '" + row_ids[static_cast<std::size_t>(i)] +
                              "' is not unit-norm");
      }
    }
  }
}

std::string EmbeddingMatrix::digest() const {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(vectors.size()) * 8 + 256);
  bytes += model_id;
  bytes.push_back('\0');
  for (const auto& id : row_ids) {
    bytes += id;
    bytes.push_back('\0');
  }
  put_le<std::uint64_t>(bytes, static_cast<std::uint64_t>(vectors.rows()));
  put_le<std::uint64_t>(bytes, static_cast<std::uint64_t>(vectors.cols()));
  for (Eigen::Index i = 0; i < vectors.size(); ++i) put_le<double>(bytes, vectors.data()[i]);
  return sha256_hex(bytes);
}

void EmbedderConfig::validate() const {
  if (dim < 2) throw ParameterError("embedder: dim must be >= 2");
  if (batch_size < 1) throw ParameterError("embedder: batch_size must be >= 1");
  if (max_retries < 0) throw ParameterError("embedder: max_retries must be >= 0");
  if (max_in_flight < 1) throw ParameterError("embedder: max_in_flight must be >= 1");
}

std::string EmbedderConfig::effective_model_id() const {
  return backend == Backend::kOffline ? offline_model_id(dim, seed) : model_id;
}

std::string offline_model_id(int dim, std::uint64_t seed) {
  return "offline-hash-d" + std::to_string(dim) + "-s" + std::to_string(seed);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_alnum_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<double> offline_embed(std::string_view text, int dim, std::uint64_t seed) {
  if (dim < 2) throw ParameterError("offline_embed: dim must be >= 2");
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw DomainError("unembeddable text");

  std::string salt;
  put_le<std::uint64_t>(salt, seed);
  const std::uint64_t basis = detail::fnv1a64(salt.data(), salt.size());

  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  for (const auto& tok : tokens) {
    detail::Rng rng(detail::fnv1a64(tok.data(), tok.size(), basis));
    for (double& x : v) x += rng.gaussian();
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  load();
}

void EmbeddingCache::load() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  std::size_t pos = 0;
  auto skip = [&](const std::string& why) {
    ++skipped_;
    warn("embedding cache " + path_.string() + ": skipping damaged record at byte " +
         std::to_string(pos) + " (" + why + ")");
  };
  while (pos < data.size()) {
    if (data.size() - pos < 4 || get_le<std::uint32_t>(data.data() + pos) != kRecordMagic) {
      // Resynchronize on the next magic marker.
      const char magic[4] = {'I', 'D', 'E', 'C'};
      const auto next = data.find(std::string_view(magic, 4), pos + 1);
      skip("bad record marker");
      if (next == std::string::npos) break;
      pos = next;
      continue;
    }
    const std::size_t start = pos;
    std::size_t p = pos + 4;
    auto need = [&](std::size_t n) { return data.size() - p >= n; };
    if (!need(2)) {
      skip("truncated record");
      break;
    }
    const auto model_len = get_le<std::uint16_t>(data.data() + p);
    p += 2;
    if (!need(model_len + 32 + 4)) {
      skip("truncated record");
      break;
    }
    std::string model(data.data() + p, model_len);
    p += model_len;
    Digest digest;
    std::memcpy(digest.data(), data.data() + p, 32);
    p += 32;
    const auto dim = get_le<std::uint32_t>(data.data() + p);
    p += 4;
    if (!need(static_cast<std::size_t>(dim) * 4 + 4)) {
      skip("truncated record");
      break;
    }
    std::vector<float> vec(dim);
    for (std::uint32_t k = 0; k < dim; ++k) vec[k] = get_le<float>(data.data() + p + 4 * k);
    p += static_cast<std::size_t>(dim) * 4;
    const auto stored_sum = get_le<std::uint32_t>(data.data() + p);
    const auto actual_sum = checksum(std::string_view(data.data() + start + 4, p - start - 4));
    p += 4;
    if (stored_sum != actual_sum) {
      skip("checksum mismatch");
    } else {
      entries_[{std::move(model), digest}] = std::move(vec);
    }
    pos = p;
  }
}

std::optional<std::vector<float>> EmbeddingCache::lookup(const Digest& text_digest,
                                                         const std::string& model_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find({model_id, text_digest});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::store(const Digest& text_digest, const std::string& model_id,
                           const std::vector<float>& vector) {
  if (model_id.size() > 0xFFFF) throw ParameterError("cache: model id too long");
  std::string rec;
  put_le<std::uint32_t>(rec, kRecordMagic);
  put_le<std::uint16_t>(rec, static_cast<std::uint16_t>(model_id.size()));
  rec += model_id;
  rec.append(reinterpret_cast<const char*>(text_digest.data()), text_digest.size());
  put_le<std::uint32_t>(rec, static_cast<std::uint32_t>(vector.size()));
  for (float x : vector) put_le<float>(rec, x);
  put_le<std::uint32_t>(rec, checksum(std::string_view(rec).substr(4)));

  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to embedding cache '" + path_.string() + "'");
  out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  out.flush();
  if (!out) throw IoError("write to embedding cache '" + path_.string() + "' failed");
  entries_[{model_id, text_digest}] = vector;
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

std::vector<std::vector<float>> fetch_remote_batch(const std::vector<std::string>& texts,
                                                   const EmbedderConfig& config) {
  const auto [base, prefix] = split_endpoint(config.endpoint_url);
  const std::string path = prefix + "/v1/embeddings";
  const std::string body =
      nlohmann::json{{"model", config.model_id}, {"input", texts}}.dump();
  const std::string key = api_key_for(config);

  int last_status = 0;
  std::string last_error;
  double backoff = config.backoff_seconds;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0 && backoff > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    httplib::Client client(base);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(config.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (!retryable(res->status)) break;
      continue;
    }

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("embeddings response is not valid JSON: ") + e.what());
    }
    if (!doc.contains("data") || !doc["data"].is_array()) {
      throw ProtocolError("embeddings response lacks a 'data' array");
    }
    const auto& data = doc["data"];
    if (data.size() != texts.size()) {
      throw ProtocolError("embeddings response has " + std::to_string(data.size()) +
                          " rows for " + std::to_string(texts.size()) + " inputs");
    }
    std::vector<std::vector<float>> rows(texts.size());
    std::vector<bool> filled(texts.size(), false);
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto& item = data[k];
      const std::size_t index =
          item.contains("index") ? item["index"].get<std::size_t>() : k;
      if (index >= texts.size() || filled[index]) {
        throw ProtocolError("embeddings response has an invalid or repeated index " +
                            std::to_string(index));
      }
      if (!item.contains("embedding") || !item["embedding"].is_array()) {
        throw ProtocolError("embeddings response row " + std::to_string(index) +
                            " lacks an 'embedding' array");
      }
      rows[index] = item["embedding"].get<std::vector<float>>();
      filled[index] = true;
      if (static_cast<int>(rows[index].size()) != config.dim) {
        throw ProtocolError("embeddings response row " + std::to_string(index) + " has dim " +
                            std::to_string(rows[index].size()) + ", expected " +
                            std::to_string(config.dim));
      }
    }
    return rows;
  }
  throw TransportError("embeddings request to " + config.endpoint_url + path + " failed after " +
                           std::to_string(config.max_retries + 1) + " attempt(s): " + last_error,
                       last_status);
}

EmbeddingMatrix embed_texts(const std::vector<std::string>& texts, const EmbedderConfig& config,
                            EmbeddingCache* cache, std::vector<std::string> row_ids) {
  config.validate();
  if (texts.empty()) throw PreconditionError("embed_texts: no texts");
  if (row_ids.empty()) {
    for (std::size_t i = 0; i < texts.size(); ++i) row_ids.push_back(std::to_string(i));
  }
  if (row_ids.size() != texts.size()) {
    throw PreconditionError("embed_texts: row_ids and texts differ in length");
  }

  const std::string model = config.effective_model_id();
  const auto n = texts.size();
  std::vector<Digest> digests(n);
  std::vector<std::vector<float>> rows(n);
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < n; ++i) {
    digests[i] = sha256(texts[i]);
    std::optional<std::vector<float>> hit;
    if (cache != nullptr) hit = cache->lookup(digests[i], model);
    if (hit && static_cast<int>(hit->size()) == config.dim) {
      rows[i] = std::move(*hit);
    } else {
      missing.push_back(i);
    }
  }

  if (config.backend == Backend::kOffline) {
    for (std::size_t i : missing) {
      rows[i] = normalize_to_float(offline_embed(texts[i], config.dim, config.seed));
    }
  } else if (!missing.empty()) {
    // Fetch uncached texts in batches, with up to max_in_flight concurrent requests.
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t k = 0; k < missing.size(); k += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(missing.size(), k + static_cast<std::size_t>(config.batch_size));
      batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(k),
                           missing.begin() + static_cast<std::ptrdiff_t>(end));
    }
    for (std::size_t b = 0; b < batches.size(); b += static_cast<std::size_t>(config.max_in_flight)) {
      const auto wave_end =
          std::min(batches.size(), b + static_cast<std::size_t>(config.max_in_flight));
      std::vector<std::future<std::vector<std::vector<float>>>> wave;
      for (std::size_t w = b; w < wave_end; ++w) {
        std::vector<std::string> batch_texts;
        for (std::size_t i : batches[w]) batch_texts.push_back(texts[i]);
        wave.push_back(std::async(std::launch::async, [batch_texts, &config] {
          return fetch_remote_batch(batch_texts, config);
        }));
      }
      // Collect every future before rethrowing so no request outlives this frame.
      std::exception_ptr first_error;
      for (std::size_t w = b; w < wave_end; ++w) {
        try {
          auto result = wave[w - b].get();
          for (std::size_t k = 0; k < batches[w].size(); ++k) {
            std::vector<double> raw(result[k].begin(), result[k].end());
            rows[batches[w][k]] = normalize_to_float(raw);
          }
        } catch (...) {
          if (!first_error) first_error = std::current_exception();
        }
      }
      if (first_error) std::rethrow_exception(first_error);
    }
  }
  if (cache != nullptr) {
    for (std::size_t i : missing) cache->store(digests[i], model, rows[i]);
  }

  EmbeddingMatrix m;
  m.vectors.resize(static_cast<Eigen::Index>(n), config.dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < config.dim; ++k) {
      m.vectors(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    }
  }
  m.model_id = model;
  m.row_ids = std::move(row_ids);
  m.normalized = true;
  m.validate();
  return m;
}

}  // namespace ideaspace::embed
