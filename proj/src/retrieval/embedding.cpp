#include "itinera/retrieval/embedding.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/http_client.hpp"
#include "itinera/common/text.hpp"

#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace itinera::retrieval {

void validate(const EmbeddingVector& v) {
    if (v.values.empty()) {
        throw ValidationError("dim", "embedding must have at least one dimension");
    }
    for (double x : v.values) {
        if (!std::isfinite(x)) {
            throw ValidationError("values", "embedding contains a non-finite value");
        }
    }
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("dim", "dimension mismatch");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingVector MockEmbedder::embed_one(const std::string& input) const {
    EmbeddingVector v;
    v.values.assign(kDim, 0.0);
    const auto add = [&](std::string_view feature, double weight) {
        const auto h = text::fnv1a64(feature, seed_ ^ 0xcbf29ce484222325ULL);
        const auto bucket = static_cast<std::size_t>(h % kDim);
        const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
        v.values[bucket] += sign * weight;
    };
    const auto words = text::words(input);
    for (const auto& w : words) {
        add("w:" + w, 1.0);
        const std::string padded = " " + w + " ";
        const auto cps = text::decode_utf8(padded);
        for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
            std::string gram;
            for (std::size_t k = 0; k < 3; ++k) {
                text::append_utf8(gram, cps[i + k]);
            }
            add("g:" + gram, 0.5);
        }
    }
    double norm = 0.0;
    for (double x : v.values) {
        norm += x * x;
    }
    if (norm == 0.0) {
        // No word characters at all; fall back to the raw bytes so the vector stays usable.
        add("raw:" + input, 1.0);
        norm = 1.0;
    }
    norm = std::sqrt(norm);
    for (double& x : v.values) {
        x /= norm;
    }
    return v;
}

std::vector<EmbeddingVector> MockEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw ValidationError("texts", "nothing to embed");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(embed_one(t));
    }
    return out;
}

namespace {

std::vector<EmbeddingVector> rows_to_vectors(const nlohmann::json& rows) {
    std::vector<EmbeddingVector> out;
    for (const auto& row : rows) {
        EmbeddingVector v;
        row.get_to(v.values);
        validate(v);
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

std::vector<EmbeddingVector> parse_cohere_embeddings(const nlohmann::json& payload) {
    const auto& e = payload.at("embeddings");
    if (e.is_object()) {
        return rows_to_vectors(e.at("float"));
    }
    return rows_to_vectors(e);
}

std::vector<EmbeddingVector> parse_openai_embeddings(const nlohmann::json& payload) {
    const auto& data = payload.at("data");
    std::vector<EmbeddingVector> out(data.size());
    for (const auto& item : data) {
        const auto index = item.at("index").get<std::size_t>();
        if (index >= out.size()) {
            throw ValidationError("index", "embedding index out of range");
        }
        item.at("embedding").get_to(out[index].values);
        validate(out[index]);
    }
    return out;
}

std::vector<EmbeddingVector> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw ValidationError("texts", "nothing to embed");
    }
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::size_t> failed;
    std::string last_error;
    const std::size_t batch = std::max<std::size_t>(1, config_.batch_size);
    for (std::size_t start = 0; start < texts.size(); start += batch) {
        const std::size_t end = std::min(texts.size(), start + batch);
        const std::vector<std::string> slice(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                             texts.begin() + static_cast<std::ptrdiff_t>(end));
        http::Request req;
        req.method = "POST";
        req.timeout_ms = config_.timeout_ms;
        req.headers["Authorization"] = "Bearer " + config_.api_key;
        if (config_.api == EmbeddingApi::cohere) {
            req.url = config_.base_url + "/v1/embed";
            req.body = nlohmann::json{{"texts", slice}, {"model", config_.model}, {"input_type", config_.input_type}}.dump();
        } else {
            req.url = config_.base_url + "/v1/embeddings";
            req.body = nlohmann::json{{"input", slice}, {"model", config_.model}}.dump();
        }
        bool ok = false;
        for (int attempt = 0; attempt < std::max(1, config_.max_attempts) && !ok; ++attempt) {
            try {
                const auto resp = http::send(req);
                if (resp.status < 200 || resp.status >= 300) {
                    last_error = fmt::format("HTTP {}", resp.status);
                    continue;
                }
                const auto payload = nlohmann::json::parse(resp.body);
                auto vectors = config_.api == EmbeddingApi::cohere ? parse_cohere_embeddings(payload)
                                                                   : parse_openai_embeddings(payload);
                if (vectors.size() != slice.size()) {
                    last_error = "provider returned a different number of vectors";
                    continue;
                }
                for (std::size_t i = 0; i < vectors.size(); ++i) {
                    if (vectors[i].dim() != config_.dim) {
                        throw ValidationError("dim", fmt::format("expected {} dims, got {}", config_.dim, vectors[i].dim()));
                    }
                    out[start + i] = std::move(vectors[i]);
                }
                ok = true;
            } catch (const ProviderError& e) {
                last_error = e.what();
            } catch (const nlohmann::json::exception& e) {
                last_error = e.what();
            }
        }
        if (!ok) {
            spdlog::warn("embedding batch [{}, {}) failed: {}", start, end, last_error);
            for (std::size_t i = start; i < end; ++i) {
                failed.push_back(i);
            }
        }
    }
    if (!failed.empty()) {
        throw ProviderError("embedding provider failed: " + last_error, true, std::move(failed));
    }
    return out;
}

}  // namespace itinera::retrieval
