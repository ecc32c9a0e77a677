#include "itinera/llm/chat.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/http_client.hpp"
#include "itinera/common/text.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <random>
#include <regex>
#include <spdlog/spdlog.h>

namespace itinera::llm {

void validate(const CompletionRequest& req) {
    if (req.messages.empty()) {
        throw ValidationError("messages", "at least one message");
    }
    if (!(req.temperature >= 0.0 && req.temperature <= 2.0)) {
        throw ValidationError("temperature", "must be within [0, 2]");
    }
    for (const auto& m : req.messages) {
        if (m.role != "user" && m.role != "assistant") {
            throw ValidationError("messages", "unknown role '" + m.role + "'");
        }
    }
}

namespace {

std::string last_user(const CompletionRequest& req) {
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
        if (it->role == "user") {
            return it->content;
        }
    }
    return {};
}

std::string mock_extract(const std::string& message) {
    nlohmann::json out = nlohmann::json::object();
    std::smatch m;
    const auto lower = text::fold(message);
    if (std::regex_search(lower, m, std::regex(R"((\d+)\s*(nights?|notti|notte))"))) {
        out["nights"] = std::stoi(m[1]);
    } else if (std::regex_search(lower, m, std::regex(R"((\d+)\s*(days?|giorni|giorno))"))) {
        out["nights"] = std::max(0, std::stoi(m[1]) - 1);
    }
    if (std::regex_search(message, m, std::regex(R"((?:\bin|\ba|\bto)\s+([A-Z][\w']+(?:\s+[A-Z][\w']+)*))"))) {
        out["destination"] = m[1].str();
    }
    if (std::regex_search(lower, m, std::regex(R"((\d+)\s*(adults?|adulti|people|persone))"))) {
        out["adults"] = std::stoi(m[1]);
    }
    if (std::regex_search(lower, m, std::regex(R"((\d+)\s*(children|child|kids|bambini|bambino|figli))"))) {
        out["children"] = std::stoi(m[1]);
    }
    if (std::regex_search(lower, m, std::regex(R"((\d+(?:[.,]\d+)?)\s*(euro|eur|€))"))) {
        std::string n = m[1];
        std::replace(n.begin(), n.end(), ',', '.');
        out["budget_total"] = std::stod(n);
    }
    return out.dump();
}

struct Fact {
    std::string day;
    std::string time;
    std::string name;
};

std::vector<Fact> parse_facts(const std::string& prompt) {
    std::vector<Fact> facts;
    const auto start = prompt.find(kFactsMarker);
    for (const auto& line : text::split(prompt.substr(start), '\n')) {
        if (!line.starts_with("- ")) {
            continue;
        }
        auto parts = text::split(line.substr(2), '|');
        if (parts.size() < 4) {
            continue;
        }
        for (auto& p : parts) {
            p = text::trim(p);
        }
        facts.push_back(Fact{parts[0], parts[2].substr(0, 5), parts[3]});
    }
    return facts;
}

// Latest user turn carrying itinerary facts; correction turns follow it without repeating them.
std::string facts_prompt(const CompletionRequest& req) {
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
        if (it->role == "user" && it->content.find(kFactsMarker) != std::string::npos) {
            return it->content;
        }
    }
    return {};
}

std::string mock_narrate(const CompletionRequest& req, const MockOptions& opt) {
    const bool it = req.language == "it";
    const std::vector<std::string> openers = it ? std::vector<std::string>{"Allora, tesoro!", "Senti la zia:", "Ascolta bene:"}
                                                : std::vector<std::string>{"Well, dear!", "Listen to your auntie:", "So, my dear:"};
    const auto prompt = facts_prompt(req);
    std::string out = openers[text::fnv1a64(prompt, opt.seed) % openers.size()];
    std::string current_day;
    bool first_of_day = true;
    for (const auto& f : parse_facts(prompt)) {
        if (f.day != current_day) {
            if (!current_day.empty()) {
                out += ".";
            }
            current_day = f.day;
            out += fmt::format("\n{} {}: ", it ? "Giorno" : "Day", f.day);
            first_of_day = true;
        }
        out += first_of_day ? fmt::format(fmt::runtime(it ? "si parte alle {} con {}" : "you start at {} with {}"), f.time, f.name)
                            : fmt::format(fmt::runtime(it ? ", poi alle {} {}" : ", then at {} {}"), f.time, f.name);
        first_of_day = false;
    }
    if (!current_day.empty()) {
        out += ".";
    }
    if (!opt.inject_entity.empty()) {
        out += fmt::format(fmt::runtime(it ? "\nNon perdere {}!" : "\nDo not miss {}!"), opt.inject_entity);
    }
    return out;
}

std::string mock_answer(const CompletionRequest& req) {
    const bool it = req.language == "it";
    const auto prompt = last_user(req);
    const auto pos = prompt.find("Context:\n[1] ");
    if (pos == std::string::npos) {
        return it ? "Su questo non ho notizie sicure, tesoro. Chiedimi dei luoghi da visitare!"
                  : "I have no reliable news about that, dear. Ask me about places to visit!";
    }
    auto block = prompt.substr(pos + 9);
    block = block.substr(0, block.find('\n'));
    const auto close = block.find(") ");
    const auto source = block.substr(0, close + 1);
    auto body = close == std::string::npos ? block : block.substr(close + 2);
    const auto stop = body.find(". ");
    if (stop != std::string::npos) {
        body = body.substr(0, stop + 1);
    }
    return fmt::format(fmt::runtime(it ? "Ecco cosa so {}: {}" : "Here is what I know {}: {}"), source, body);
}

}  // namespace

std::string MockChatProvider::complete(const CompletionRequest& req) {
    validate(req);
    if (options_.fail) {
        throw ProviderError("mock provider configured to fail", true);
    }
    if (req.system.find(kExtractionMarker) != std::string::npos) {
        return options_.extraction_reply ? *options_.extraction_reply : mock_extract(last_user(req));
    }
    if (!facts_prompt(req).empty()) {
        return mock_narrate(req, options_);
    }
    return mock_answer(req);
}

nlohmann::json build_chat_body(const CompletionRequest& req, const std::string& model) {
    nlohmann::json messages = nlohmann::json::array();
    if (!req.system.empty()) {
        messages.push_back({{"role", "system"}, {"content", req.system}});
    }
    for (const auto& m : req.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    return nlohmann::json{{"model", model},
                          {"messages", messages},
                          {"temperature", req.temperature},
                          {"max_tokens", req.max_tokens}};
}

std::string parse_chat_completion(const nlohmann::json& payload) {
    try {
        const auto& content = payload.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) {
            throw ProviderError("completion has no text content", false);
        }
        return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed completion payload: ") + e.what(), false);
    }
}

OpenAiChatProvider::OpenAiChatProvider(OpenAiConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), clock_(std::move(clock)), slots_(std::clamp(config_.max_concurrency, 1, 1024)) {}

std::string OpenAiChatProvider::complete(const CompletionRequest& req) {
    validate(req);
    http::Request http_req;
    http_req.method = "POST";
    http_req.url = config_.base_url + "/chat/completions";
    http_req.timeout_ms = config_.timeout_ms;
    if (!config_.api_key.empty()) {
        http_req.headers["Authorization"] = "Bearer " + config_.api_key;
    }
    http_req.body = build_chat_body(req, config_.model).dump();

    std::mt19937_64 jitter(static_cast<std::uint64_t>(clock_->now_ms()));
    std::string last_error;
    const int attempts = std::max(1, config_.max_attempts);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const double factor = std::uniform_real_distribution<double>(0.5, 1.5)(jitter);
            clock_->sleep_ms(static_cast<std::int64_t>(config_.backoff_ms * (1 << (attempt - 1)) * factor));
        }
        http::Response resp;
        try {
            slots_.acquire();
            struct Release {
                std::counting_semaphore<1024>& sem;
                ~Release() { sem.release(); }
            } guard{slots_};
            resp = http::send(http_req);
        } catch (const ProviderError& e) {
            last_error = e.what();
            spdlog::warn("chat completion attempt {} failed: {}", attempt + 1, last_error);
            continue;
        }
        if (resp.status >= 200 && resp.status < 300) {
            try {
                return parse_chat_completion(nlohmann::json::parse(resp.body));
            } catch (const nlohmann::json::exception& e) {
                throw ProviderError(std::string("malformed completion payload: ") + e.what(), false);
            }
        }
        last_error = fmt::format("HTTP {}", resp.status);
        if (resp.status != 429 && resp.status < 500) {
            throw ProviderError("chat provider rejected the request: " + last_error, false);
        }
        spdlog::warn("chat completion attempt {} failed: {}", attempt + 1, last_error);
    }
    throw ProviderError("chat provider unavailable: " + last_error, true);
}

}  // namespace itinera::llm
