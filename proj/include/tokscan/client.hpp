#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tokscan/cost.hpp"
#include "tokscan/metrics.hpp"
#include "tokscan/rate_limit.hpp"
#include "tokscan/wire.hpp"

namespace tokscan {

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds backoff_base{250};
    std::chrono::milliseconds backoff_cap{8000};
    // 400 is retryable on purpose: anomalous tokens trigger spurious
    // BadRequest responses that sometimes clear on retry.
    std::set<int> retryable_statuses{400, 429, 500, 502, 503};

    std::chrono::milliseconds delay(int attempt) const {
        auto d = backoff_base * (1LL << std::min(attempt, 20));
        return std::min(d, backoff_cap);
    }
};

enum class FinishStatus { Ok, ApiError, EmptyLogprobs };

/// Outcome of one probe. `status == ApiError` means retries were exhausted;
/// the failing HTTP status (or 0 for a transport failure) is in error_code.
struct ProbeResult {
    FinishStatus status = FinishStatus::Ok;
    int error_code = 0;
    PredictionDistribution distribution;
    std::string completion_text;
    wire::Usage usage;
};

struct ExplainResult {
    FinishStatus status = FinishStatus::Ok;
    int error_code = 0;
    std::string completion_text;
    bool json_wellformed = false;
    bool echo_match = false;  // does the JSON `text` field reproduce the input?
};

struct ClientConfig {
    std::string endpoint = "http://127.0.0.1:8080";
    std::string model = "gpt-4-1106-preview";
    std::string api_key_env = "OPENAI_API_KEY";
    RetryPolicy retry;
    int connect_timeout_s = 5;
    int read_timeout_s = 120;
    int confirm_max_tokens = 20;
    int explain_max_tokens = 256;
};

/// Chat-completions client. Shareable across workers: each request uses its
/// own connection, the ledger uses atomic counters, and the rate limiter
/// serializes issuance.
class LlmClient {
public:
    LlmClient(ClientConfig config, CostLedger& ledger, RateLimiter& limiter)
        : config_(std::move(config)), ledger_(&ledger), limiter_(&limiter) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) {
            api_key_ = key;
        }
    }

    /// Scan-pass probe: REPEAT prompt, single-token completion, top-5
    /// logprobs requested.
    ProbeResult repeat_probe(const std::string& token_text,
                             double temperature = 0.0) const {
        wire::ChatRequest req;
        req.model = config_.model;
        req.kind = wire::ProbeKind::Repeat;
        req.token_text = token_text;
        req.temperature = temperature;
        req.max_tokens = 1;
        req.want_logprobs = true;
        req.top_logprobs = 5;
        return run_probe(req);
    }

    /// Confirmation-pass probe: REPEAT prompt at temperature 1.0 with enough
    /// output budget to observe multi-token mis-repetitions.
    ProbeResult confirm_probe(const std::string& token_text) const {
        wire::ChatRequest req;
        req.model = config_.model;
        req.kind = wire::ProbeKind::Repeat;
        req.token_text = token_text;
        req.temperature = 1.0;
        req.max_tokens = config_.confirm_max_tokens;
        req.want_logprobs = false;
        return run_probe(req);
    }

    /// Manual-investigation probe: EXPLAIN prompt, raw completion returned
    /// with JSON-wellformedness and echo-match flags attached.
    ExplainResult explain_probe(const std::string& token_text,
                                double temperature) const {
        wire::ChatRequest req;
        req.model = config_.model;
        req.kind = wire::ProbeKind::Explain;
        req.token_text = token_text;
        req.temperature = temperature;
        req.max_tokens = config_.explain_max_tokens;
        req.want_logprobs = false;
        ProbeResult pr = run_probe(req);

        ExplainResult out;
        out.status = pr.status;
        out.error_code = pr.error_code;
        out.completion_text = pr.completion_text;
        if (pr.status != FinishStatus::ApiError) {
            auto doc = nlohmann::json::parse(pr.completion_text, nullptr,
                                             /*allow_exceptions=*/false);
            if (!doc.is_discarded() && doc.is_object()) {
                out.json_wellformed = true;
                auto it = doc.find("text");
                out.echo_match = it != doc.end() && it->is_string() &&
                                 it->get<std::string>() == token_text;
            }
        }
        return out;
    }

    const ClientConfig& config() const { return config_; }

private:
    ProbeResult run_probe(const wire::ChatRequest& req) const {
        const std::string body = wire::build_request_body(req);
        int last_status = 0;

        for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(config_.retry.delay(attempt - 1));
            }
            limiter_->acquire();

            httplib::Client cli(config_.endpoint);
            cli.set_connection_timeout(config_.connect_timeout_s, 0);
            cli.set_read_timeout(config_.read_timeout_s, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) {
                headers.emplace("Authorization", "Bearer " + api_key_);
            }
            auto res = cli.Post("/v1/chat/completions", headers, body,
                                "application/json");
            if (!res) {
                last_status = 0;  // transport failure
                continue;
            }
            last_status = res->status;
            if (res->status == 200) {
                return finish_ok(*res);
            }
            if (!config_.retry.retryable_statuses.count(res->status)) break;
        }

        ProbeResult out;
        out.status = FinishStatus::ApiError;
        out.error_code = last_status;
        return out;
    }

    ProbeResult finish_ok(const httplib::Response& res) const {
        wire::ChatResponse parsed = wire::parse_chat_response(res.body);
        ledger_->add_usage(parsed.usage.prompt_tokens,
                           parsed.usage.completion_tokens);

        ProbeResult out;
        out.completion_text = parsed.completion_text;
        out.usage = parsed.usage;
        if (parsed.distribution) {
            out.distribution = *parsed.distribution;
            if (out.distribution.empty()) {
                out.status = FinishStatus::EmptyLogprobs;
            }
        }
        return out;
    }

    ClientConfig config_;
    std::string api_key_;
    CostLedger* ledger_;
    RateLimiter* limiter_;
};

} // namespace tokscan
