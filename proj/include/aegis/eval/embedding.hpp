#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aegis/net/http.hpp"

namespace aegis::eval {

using Vector = std::vector<double>;

inline constexpr std::size_t kReferenceDimension = 1024;
inline constexpr const char* kReferenceEmbeddingModel = "sentence-transformers/stsb-roberta-large";

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// One vector per text, each of dimension().
  virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string model_id() const = 0;
};

/// Deterministic offline embedder: signed feature hashing of lowercase word
/// unigrams and bigrams (FNV-1a), L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = kReferenceDimension);
  std::vector<Vector> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::string model_id() const override { return "hashing-" + std::to_string(dimension_); }

 private:
  std::size_t dimension_;
};

/// Returns stored vectors; unknown texts raise Error(NotFound).
class LookupEmbedder final : public Embedder {
 public:
  LookupEmbedder(std::size_t dimension, std::map<std::string, Vector> table);
  std::vector<Vector> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::string model_id() const override { return "lookup"; }
  std::size_t calls() const { return calls_; }

 private:
  std::size_t dimension_;
  std::map<std::string, Vector> table_;
  std::size_t calls_ = 0;
};

struct EmbedConfig {
  std::string base_url = "http://localhost:8080/v1";
  std::string api_key;
  std::string model = kReferenceEmbeddingModel;
  std::size_t dimension = kReferenceDimension;
  std::size_t batch_size = 64;

  /// AEGIS_EMBED_BASE_URL, AEGIS_EMBED_API_KEY, AEGIS_EMBED_MODEL,
  /// AEGIS_EMBED_DIMENSION.
  static EmbedConfig from_env();
};

/// OpenAI-compatible POST {base_url}/embeddings. Vectors whose length differs
/// from the configured dimension raise Error(DimensionMismatch).
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::shared_ptr<net::HttpClient> http, EmbedConfig config);
  std::vector<Vector> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return config_.dimension; }
  std::string model_id() const override { return config_.model; }

 private:
  std::shared_ptr<net::HttpClient> http_;
  EmbedConfig config_;
};

/// Throws Error(EmptyText) naming the first blank text's index. Provider
/// failures propagate (Transport, ...).
std::vector<Vector> embed_texts(const std::vector<std::string>& texts, Embedder& embedder);

/// dot(u,v)/(|u||v|), clamped to [-1,1].
/// Throws Error(DimensionMismatch) or Error(ZeroVector).
double cosine_similarity(const Vector& u, const Vector& v);

}  // namespace aegis::eval
