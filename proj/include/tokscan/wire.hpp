#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tokscan/metrics.hpp"

namespace tokscan::wire {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ProbeKind { Repeat, Explain };

inline constexpr std::string_view kRepeatSystemPrompt =
    "Repeat user message exactly";
inline constexpr std::string_view kExplainSystemPrompt =
    "Explain user message. Respond with JSON "
    "{text: <user message>, meaning: <meaning>}";

struct ChatRequest {
    std::string model;
    ProbeKind kind = ProbeKind::Repeat;
    std::string token_text;  // sent verbatim as the entire user message
    double temperature = 0.0;
    int max_tokens = 1;
    bool want_logprobs = false;
    int top_logprobs = 5;
};

/// Serializes a chat-completions request body. Field order is fixed so the
/// same request always produces byte-identical payloads.
inline std::string build_request_body(const ChatRequest& req) {
    ordered_json body;
    body["model"] = req.model;
    body["messages"] = ordered_json::array(
        {{{"role", "system"},
          {"content", req.kind == ProbeKind::Repeat ? kRepeatSystemPrompt
                                                    : kExplainSystemPrompt}},
         {{"role", "user"}, {"content", req.token_text}}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (req.want_logprobs) {
        body["logprobs"] = true;
        body["top_logprobs"] = req.top_logprobs;
    }
    return body.dump();
}

struct Usage {
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
};

struct ChatResponse {
    std::string completion_text;
    // Present iff the response carried a logprobs object; an empty
    // distribution inside means the API returned no logprob entries for the
    // first position (the no-result signature).
    std::optional<PredictionDistribution> distribution;
    Usage usage;
};

namespace detail {
inline const json& at_path(const json& node, std::string_view key,
                           const std::string& path) {
    auto it = node.find(key);
    if (it == node.end()) {
        throw WireError("chat response: missing " + path);
    }
    return *it;
}
} // namespace detail

/// Extracts the first-position top-logprob list from a chat-completion
/// response document. An empty `logprobs.content` array yields an empty
/// distribution; a missing or malformed logprobs object is a parse error
/// naming the offending path.
inline PredictionDistribution parse_top_logprobs(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw WireError(std::string("chat response: invalid JSON: ") + e.what());
    }

    const json& choices = detail::at_path(doc, "choices", "choices");
    if (!choices.is_array() || choices.empty()) {
        throw WireError("chat response: choices[0] absent");
    }
    const json& logprobs =
        detail::at_path(choices[0], "logprobs", "choices[0].logprobs");
    if (logprobs.is_null()) {
        throw WireError("chat response: choices[0].logprobs is null");
    }
    const json& content =
        detail::at_path(logprobs, "content", "choices[0].logprobs.content");
    if (!content.is_array()) {
        throw WireError("chat response: choices[0].logprobs.content not an array");
    }
    if (content.empty()) return PredictionDistribution{};

    const json& top = detail::at_path(content[0], "top_logprobs",
                                      "choices[0].logprobs.content[0].top_logprobs");
    if (!top.is_array()) {
        throw WireError(
            "chat response: choices[0].logprobs.content[0].top_logprobs not an array");
    }
    std::vector<PredictionDistribution::Entry> entries;
    entries.reserve(top.size());
    for (size_t i = 0; i < top.size(); ++i) {
        const std::string path =
            "choices[0].logprobs.content[0].top_logprobs[" + std::to_string(i) + "]";
        const json& tok = detail::at_path(top[i], "token", path + ".token");
        const json& lp = detail::at_path(top[i], "logprob", path + ".logprob");
        if (!tok.is_string() || !lp.is_number()) {
            throw WireError("chat response: malformed " + path);
        }
        entries.push_back({tok.get<std::string>(), lp.get<double>()});
    }
    return PredictionDistribution{std::move(entries)};
}

/// Parses completion text, usage, and (when present) the first-position
/// distribution from a chat-completion response.
inline ChatResponse parse_chat_response(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw WireError(std::string("chat response: invalid JSON: ") + e.what());
    }

    ChatResponse out;
    const json& choices = detail::at_path(doc, "choices", "choices");
    if (!choices.is_array() || choices.empty()) {
        throw WireError("chat response: choices[0] absent");
    }
    const json& message =
        detail::at_path(choices[0], "message", "choices[0].message");
    const json& content =
        detail::at_path(message, "content", "choices[0].message.content");
    if (content.is_string()) out.completion_text = content.get<std::string>();

    if (auto lp = choices[0].find("logprobs");
        lp != choices[0].end() && !lp->is_null()) {
        out.distribution = parse_top_logprobs(body);
    }

    const json& usage = detail::at_path(doc, "usage", "usage");
    out.usage.prompt_tokens =
        detail::at_path(usage, "prompt_tokens", "usage.prompt_tokens")
            .get<uint64_t>();
    out.usage.completion_tokens =
        detail::at_path(usage, "completion_tokens", "usage.completion_tokens")
            .get<uint64_t>();
    return out;
}

} // namespace tokscan::wire
