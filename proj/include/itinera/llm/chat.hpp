#pragma once

#include "itinera/common/clock.hpp"

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace itinera::llm {

struct ChatMessage {
    std::string role;  // "user" or "assistant"
    std::string content;
};

struct CompletionRequest {
    std::string system;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 512;
    std::string language = "it";
};

/// Throws ValidationError: messages non-empty, temperature within [0, 2], known roles.
void validate(const CompletionRequest& req);

/// Chat completion. Failures throw ProviderError; callers treat that as degraded mode and fall back.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const CompletionRequest& req) = 0;
    virtual std::string name() const = 0;
};

/// Marker the mock uses to recognise extraction prompts.
inline constexpr std::string_view kExtractionMarker = "Return exactly one JSON object";
/// Marker the mock uses to recognise narration prompts.
inline constexpr std::string_view kFactsMarker = "Itinerary facts:";

struct MockOptions {
    std::uint64_t seed = 7;
    /// Appended to narrations to exercise the grounding fallback.
    std::string inject_entity;
    /// When set, returned verbatim for extraction prompts.
    std::optional<std::string> extraction_reply;
    bool fail = false;
};

/// Offline, deterministic provider: templates keyed on the prompt kind and the last user message.
class MockChatProvider final : public ChatProvider {
public:
    explicit MockChatProvider(MockOptions options = {}) : options_(std::move(options)) {}
    std::string complete(const CompletionRequest& req) override;
    std::string name() const override { return "mock"; }

    MockOptions& options() { return options_; }

private:
    MockOptions options_;
};

struct OpenAiConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string api_key;
    int timeout_ms = 30'000;
    int max_attempts = 3;
    int backoff_ms = 500;
    int max_concurrency = 4;
};

/// OpenAI-compatible `POST {base_url}/chat/completions` with bounded, jittered retries.
class OpenAiChatProvider final : public ChatProvider {
public:
    explicit OpenAiChatProvider(OpenAiConfig config, std::shared_ptr<Clock> clock = std::make_shared<SystemClock>());
    std::string complete(const CompletionRequest& req) override;
    std::string name() const override { return "openai:" + config_.model; }

private:
    OpenAiConfig config_;
    std::shared_ptr<Clock> clock_;
    std::counting_semaphore<1024> slots_;
};

nlohmann::json build_chat_body(const CompletionRequest& req, const std::string& model);
/// `choices[0].message.content`; throws ProviderError (not retryable) when absent.
std::string parse_chat_completion(const nlohmann::json& payload);

}  // namespace itinera::llm
