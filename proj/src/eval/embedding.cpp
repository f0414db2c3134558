#include "aegis/eval/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>

#include "aegis/error.hpp"
#include "aegis/util.hpp"

namespace aegis::eval {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(Errc::BadInput, "embedding dimension must be >= 1");
}

std::vector<Vector> HashingEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Vector v(dimension_, 0.0);
    const auto toks = tokens(text);
    auto add = [&](std::string_view feature, double weight) {
      const std::uint64_t h = fnv1a(feature);
      v[h % dimension_] += (h >> 63) ? -weight : weight;
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
      add(toks[i], 1.0);
      if (i + 1 < toks.size()) add(toks[i] + " " + toks[i + 1], 0.5);
    }
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    // Text without any token still gets a fixed nonzero direction.
    if (norm == 0) v[0] = 1.0;
    else
      for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

LookupEmbedder::LookupEmbedder(std::size_t dimension, std::map<std::string, Vector> table)
    : dimension_(dimension), table_(std::move(table)) {
  for (const auto& [text, v] : table_)
    if (v.size() != dimension_) throw Error(Errc::DimensionMismatch, "vector for '" + text + "'");
}

std::vector<Vector> LookupEmbedder::embed(const std::vector<std::string>& texts) {
  ++calls_;
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) throw Error(Errc::NotFound, "no embedding for '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

EmbedConfig EmbedConfig::from_env() {
  EmbedConfig c;
  if (const char* v = std::getenv("AEGIS_EMBED_BASE_URL"); v && *v) c.base_url = v;
  if (const char* v = std::getenv("AEGIS_EMBED_API_KEY"); v && *v) c.api_key = v;
  if (const char* v = std::getenv("AEGIS_EMBED_MODEL"); v && *v) c.model = v;
  if (const char* v = std::getenv("AEGIS_EMBED_DIMENSION"); v && *v) {
    const long d = std::strtol(v, nullptr, 10);
    if (d < 1) throw Error(Errc::BadInput, "AEGIS_EMBED_DIMENSION must be a positive integer");
    c.dimension = static_cast<std::size_t>(d);
  }
  return c;
}

HttpEmbedder::HttpEmbedder(std::shared_ptr<net::HttpClient> http, EmbedConfig config)
    : http_(std::move(http)), config_(std::move(config)) {
  if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<Vector> HttpEmbedder::embed(const std::vector<std::string>& texts) {
  std::string base = config_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
    const std::size_t end = std::min(texts.size(), start + config_.batch_size);
    json input = json::array();
    for (std::size_t i = start; i < end; ++i) input.push_back(texts[i]);
    net::HttpRequest req;
    req.method = "POST";
    req.url = base + "/embeddings";
    req.body = json{{"model", config_.model}, {"input", std::move(input)}}.dump();
    if (!config_.api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + config_.api_key);
    const auto resp = http_->send(req);
    if (auto code = net::classify_status(resp.status))
      throw Error(*code, "embedding request failed with HTTP " + std::to_string(resp.status));
    const json parsed = json::parse(resp.body, nullptr, false);
    if (!parsed.is_object() || !parsed.contains("data") || !parsed["data"].is_array())
      throw Error(Errc::Transport, "embedding response has no data array");
    std::vector<Vector> chunk(end - start);
    for (const auto& item : parsed["data"]) {
      const std::size_t idx = item.value("index", std::size_t{0});
      if (idx >= chunk.size() || !item.contains("embedding"))
        throw Error(Errc::Transport, "embedding response has a bad item");
      chunk[idx] = item["embedding"].get<Vector>();
    }
    for (auto& v : chunk) {
      if (v.size() != config_.dimension)
        throw Error(Errc::DimensionMismatch, "provider returned dimension " + std::to_string(v.size()) +
                                                 ", expected " + std::to_string(config_.dimension));
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<Vector> embed_texts(const std::vector<std::string>& texts, Embedder& embedder) {
  for (std::size_t i = 0; i < texts.size(); ++i)
    if (util::trim(texts[i]).empty())
      throw Error(Errc::EmptyText, "text at index " + std::to_string(i) + " is empty");
  if (texts.empty()) return {};
  auto vectors = embedder.embed(texts);
  if (vectors.size() != texts.size())
    throw Error(Errc::Transport, "embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                                     std::to_string(texts.size()) + " texts");
  for (const auto& v : vectors)
    if (v.size() != embedder.dimension())
      throw Error(Errc::DimensionMismatch, "vector of dimension " + std::to_string(v.size()));
  return vectors;
}

double cosine_similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw Error(Errc::DimensionMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(Errc::ZeroVector, nu == 0.0 ? "first vector is zero" : "second vector is zero");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return c > 1.0 ? 1.0 : c < -1.0 ? -1.0 : c;
}

}  // namespace aegis::eval
