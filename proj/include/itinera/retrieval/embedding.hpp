#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

namespace itinera::retrieval {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Throws ValidationError when empty or containing non-finite values.
void validate(const EmbeddingVector& v);

class Embedder {
public:
    virtual ~Embedder() = default;
    /// One vector per text, same order. Provider failures throw ProviderError with the failed indices.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    virtual std::size_t dim() const = 0;
};

/// Deterministic offline embedder: character trigrams and words of the folded text are
/// hashed (seeded) into signed buckets, then L2-normalized.
class MockEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDim = 64;

    explicit MockEmbedder(std::uint64_t seed = 0x5eed) : seed_(seed) {}
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::size_t dim() const override { return kDim; }

    EmbeddingVector embed_one(const std::string& text) const;

private:
    std::uint64_t seed_;
};

enum class EmbeddingApi { cohere, openai };

struct HttpEmbedderConfig {
    EmbeddingApi api = EmbeddingApi::cohere;
    std::string base_url = "https://api.cohere.com";
    std::string model = "embed-multilingual-v3.0";
    std::string api_key;
    std::string input_type = "search_document";
    std::size_t dim = 1024;
    std::size_t batch_size = 32;
    int timeout_ms = 15'000;
    int max_attempts = 3;
};

/// Embedding provider over HTTP. Field mapping per API lives in the parse_* adapters.
class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {}
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::size_t dim() const override { return config_.dim; }

private:
    HttpEmbedderConfig config_;
};

/// `{"embeddings": [[...], ...]}` or `{"embeddings": {"float": [[...]]}}`.
std::vector<EmbeddingVector> parse_cohere_embeddings(const nlohmann::json& payload);
/// `{"data": [{"index": i, "embedding": [...]}, ...]}`, reordered by index.
std::vector<EmbeddingVector> parse_openai_embeddings(const nlohmann::json& payload);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace itinera::retrieval
