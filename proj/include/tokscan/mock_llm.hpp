#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tokscan/wire.hpp"

namespace tokscan::mock {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class BehaviorKind {
    Normal,
    MinorAnomalous,
    MajorAnomalous,
    NoResult,
    Unspeakable,
    Error400,
    SchemaViolating,
};

/// Per-token behavior descriptor. See AnomalyProfile for the file format.
struct Behavior {
    BehaviorKind kind = BehaviorKind::Normal;
    double top_prob = 0.99;                // Normal: echo probability
    double off_target_rate = 0.3;          // MinorAnomalous: fraction of bad runs
    std::vector<std::string> variants;     // MinorAnomalous: off-target strings
    int flat_k = 5;                        // MajorAnomalous: uniform width (3..5)
    double error_rate = 1.0;               // Error400: fraction of 400 responses
};

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t hash64(uint64_t seed, std::string_view token, uint64_t ordinal,
                       std::string_view salt) {
    uint64_t h = 0xCBF29CE484222325ull ^ seed;
    auto mix = [&](std::string_view s) {
        for (unsigned char c : s) h = (h ^ c) * 0x100000001B3ull;
        h = (h ^ 0xFF) * 0x100000001B3ull;
    };
    mix(token);
    mix(salt);
    return splitmix64(h ^ splitmix64(ordinal));
}

inline double hash01(uint64_t seed, std::string_view token, uint64_t ordinal,
                     std::string_view salt) {
    return static_cast<double>(hash64(seed, token, ordinal, salt) >> 11) *
           0x1.0p-53;
}

// whitespace-split word count + 1; the declared usage convention.
inline uint64_t token_count(std::string_view s) {
    uint64_t words = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        bool ws = std::isspace(c) != 0;
        if (!ws && !in_word) ++words;
        in_word = !ws;
    }
    return words + 1;
}

inline const std::vector<std::string>& unrelated_pool() {
    static const std::vector<std::string> pool = {
        "renderContext",  "parseBuffer",   "dispatchQueue", "mutexGuard",
        "tensorSlice",    "configLoader",  "byteStream",    "hashBucket",
        "frameScheduler", "socketPoller",  "cacheEvictor",  "regexMatcher",
        "heapSnapshot",   "traceEmitter",  "quotaTracker",  "shardRouter",
    };
    return pool;
}

} // namespace detail

/// Behavior map driving the mock server. All randomness is a pure function
/// of (seed, token_text, per-token request ordinal), so identical request
/// sequences produce identical responses byte for byte.
///
/// File format:
///   {
///     "seed": 42,
///     "default": {"kind": "normal", "top_prob": 0.99},
///     "overrides": {
///       "sometoken": {"kind": "major", "flat_k": 5},
///       "other":     {"kind": "minor", "off_target_rate": 0.3,
///                     "variants": ["othr", "othre"]}
///     }
///   }
class AnomalyProfile {
public:
    Behavior default_behavior;
    std::map<std::string, Behavior> overrides;
    uint64_t seed = 1;

    const Behavior& behavior_for(const std::string& token_text) const {
        auto it = overrides.find(token_text);
        return it == overrides.end() ? default_behavior : it->second;
    }

    static BehaviorKind kind_from_string(const std::string& s) {
        if (s == "normal") return BehaviorKind::Normal;
        if (s == "minor") return BehaviorKind::MinorAnomalous;
        if (s == "major") return BehaviorKind::MajorAnomalous;
        if (s == "no_result") return BehaviorKind::NoResult;
        if (s == "unspeakable") return BehaviorKind::Unspeakable;
        if (s == "error400") return BehaviorKind::Error400;
        if (s == "schema_violation") return BehaviorKind::SchemaViolating;
        throw std::runtime_error("mock profile: unknown behavior kind: " + s);
    }

    static Behavior behavior_from_json(const json& j) {
        Behavior b;
        b.kind = kind_from_string(j.value("kind", std::string("normal")));
        b.top_prob = j.value("top_prob", b.top_prob);
        b.off_target_rate = j.value("off_target_rate", b.off_target_rate);
        b.flat_k = j.value("flat_k", b.flat_k);
        b.error_rate = j.value("error_rate", b.error_rate);
        if (auto it = j.find("variants"); it != j.end()) {
            b.variants = it->get<std::vector<std::string>>();
        }
        if (b.kind == BehaviorKind::MajorAnomalous &&
            (b.flat_k < 3 || b.flat_k > 5)) {
            throw std::runtime_error(
                "mock profile: flat_k must be in [3,5] to keep entropy above 1");
        }
        return b;
    }

    static AnomalyProfile from_json(const json& doc) {
        AnomalyProfile p;
        p.seed = doc.value("seed", uint64_t{1});
        if (auto it = doc.find("default"); it != doc.end()) {
            p.default_behavior = behavior_from_json(*it);
        }
        if (auto it = doc.find("overrides"); it != doc.end()) {
            for (const auto& [tok, spec] : it->items()) {
                p.overrides.emplace(tok, behavior_from_json(spec));
            }
        }
        return p;
    }

    static AnomalyProfile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("mock profile: cannot open " + path);
        return from_json(json::parse(in));
    }
};

struct MockLedger {
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
    uint64_t request_count = 0;
};

/// Deterministic chat-completions server. Speaks the same wire schema the
/// client consumes and keeps its own usage ledger for conservation checks.
class MockServer {
public:
    explicit MockServer(AnomalyProfile profile, int port = 0, int delay_ms = 0)
        : profile_(std::move(profile)), requested_port_(port),
          delay_ms_(delay_ms) {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         handle_chat(req, res);
                     });
        server_.Get("/__mock/ledger",
                    [this](const httplib::Request&, httplib::Response& res) {
                        ordered_json j;
                        j["prompt_tokens"] = prompt_tokens_.load();
                        j["completion_tokens"] = completion_tokens_.load();
                        j["request_count"] = request_count_.load();
                        res.set_content(j.dump(), "application/json");
                    });
    }

    ~MockServer() { stop(); }

    /// Binds (an ephemeral port when constructed with port 0) and serves on a
    /// background thread. Throws on bind failure.
    void start() {
        if (requested_port_ == 0) {
            port_ = server_.bind_to_any_port("127.0.0.1");
            if (port_ < 0) throw std::runtime_error("mock server: bind failed");
        } else {
            if (!server_.bind_to_port("127.0.0.1", requested_port_)) {
                throw std::runtime_error("mock server: bind failed on port " +
                                         std::to_string(requested_port_));
            }
            port_ = requested_port_;
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        for (int i = 0; i < 1000 && !server_.is_running(); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
        if (!server_.is_running()) {
            throw std::runtime_error("mock server: failed to start");
        }
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_);
    }

    MockLedger ledger() const {
        return {prompt_tokens_.load(), completion_tokens_.load(),
                request_count_.load()};
    }

private:
    struct Entry {
        std::string text;
        double prob;
    };

    void handle_chat(const httplib::Request& req, httplib::Response& res) {
        request_count_.fetch_add(1);
        if (delay_ms_ > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
        }

        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.contains("messages") ||
            !body["messages"].is_array() || body["messages"].size() < 2) {
            fail(res, 400, "malformed request body");
            return;
        }
        const std::string system =
            body["messages"][0].value("content", std::string());
        const std::string token_text =
            body["messages"][1].value("content", std::string());
        const double temperature = body.value("temperature", 0.0);
        const bool want_logprobs = body.value("logprobs", false);
        const bool is_explain = system.rfind("Explain", 0) == 0;
        const std::string model =
            body.value("model", std::string("mock-model"));

        const Behavior& b = profile_.behavior_for(token_text);
        const uint64_t ordinal = next_ordinal(token_text);

        if (b.kind == BehaviorKind::Error400 &&
            detail::hash01(profile_.seed, token_text, ordinal, "e400") <
                b.error_rate) {
            fail(res, 400, "the server had a problem processing this request");
            return;
        }

        std::string completion;
        std::vector<Entry> dist;
        bool no_result = false;

        if (is_explain) {
            completion = explain_completion(b, token_text, ordinal);
        } else {
            dist = repeat_distribution(b, token_text);
            no_result = b.kind == BehaviorKind::NoResult;
            completion = no_result
                             ? std::string()
                             : repeat_completion(b, token_text, ordinal,
                                                 temperature, dist);
        }

        const uint64_t prompt_toks =
            detail::token_count(system) + detail::token_count(token_text);
        const uint64_t completion_toks = detail::token_count(completion);
        prompt_tokens_.fetch_add(prompt_toks);
        completion_tokens_.fetch_add(completion_toks);

        ordered_json out;
        out["id"] =
            "chatcmpl-mock-" +
            std::to_string(detail::hash64(profile_.seed, token_text, ordinal, "id"));
        out["object"] = "chat.completion";
        out["model"] = model;
        ordered_json choice;
        choice["index"] = 0;
        choice["message"] = {{"role", "assistant"}, {"content", completion}};
        if (want_logprobs) {
            ordered_json lp;
            lp["content"] = ordered_json::array();
            if (!dist.empty()) {
                ordered_json top = ordered_json::array();
                for (const Entry& e : dist) {
                    top.push_back({{"token", e.text},
                                   {"logprob", std::log(e.prob)}});
                }
                lp["content"].push_back({{"token", dist.front().text},
                                         {"logprob", std::log(dist.front().prob)},
                                         {"top_logprobs", top}});
            }
            choice["logprobs"] = lp;
        } else {
            choice["logprobs"] = nullptr;
        }
        choice["finish_reason"] = "stop";
        out["choices"] = ordered_json::array({choice});
        out["usage"] = {{"prompt_tokens", prompt_toks},
                        {"completion_tokens", completion_toks},
                        {"total_tokens", prompt_toks + completion_toks}};
        res.set_content(out.dump(), "application/json");
    }

    static void fail(httplib::Response& res, int status, const std::string& msg) {
        res.status = status;
        ordered_json err;
        err["error"] = {{"message", msg},
                        {"type", "invalid_request_error"},
                        {"code", status}};
        res.set_content(err.dump(), "application/json");
    }

    uint64_t next_ordinal(const std::string& token_text) {
        std::lock_guard lock(ordinal_mu_);
        return ordinals_[token_text]++;
    }

    // Whitespace-prefixed variants: distinct strings that normalize to the
    // same canonical text, the mechanism behind the false-positive class.
    static std::vector<std::string> equivalent_variants(const std::string& t) {
        return {" " + t, "\t" + t, "\n" + t, "  " + t};
    }

    std::string pool_pick(const std::string& token_text, uint64_t n) const {
        const auto& pool = detail::unrelated_pool();
        uint64_t base = detail::hash64(profile_.seed, token_text, 0, "pool");
        return pool[(base + n) % pool.size()];
    }

    std::vector<Entry> repeat_distribution(const Behavior& b,
                                           const std::string& t) const {
        switch (b.kind) {
            case BehaviorKind::Normal: {
                auto vars = equivalent_variants(t);
                double rest = (1.0 - b.top_prob) / 4.0;
                return {{t, b.top_prob},
                        {vars[0], rest},
                        {vars[1], rest},
                        {vars[2], rest},
                        {vars[3], rest}};
            }
            case BehaviorKind::MinorAnomalous: {
                auto vars = minor_variants(b, t);
                return {{t, 0.55},
                        {vars[0], 0.35},
                        {vars[1], 0.06},
                        {" " + t, 0.03},
                        {"\t" + t, 0.01}};
            }
            case BehaviorKind::MajorAnomalous:
            case BehaviorKind::Error400:
            case BehaviorKind::SchemaViolating: {
                int k = b.kind == BehaviorKind::MajorAnomalous ? b.flat_k : 5;
                std::vector<Entry> out;
                for (int i = 0; i < k; ++i) {
                    out.push_back({pool_pick(t, static_cast<uint64_t>(i)),
                                   1.0 / k});
                }
                return out;
            }
            case BehaviorKind::Unspeakable:
                return {{" ", 0.2}, {"\n", 0.2}, {"\t", 0.2},
                        {"  ", 0.2}, {"\r\n", 0.2}};
            case BehaviorKind::NoResult:
                return {};
        }
        return {};
    }

    std::vector<std::string> minor_variants(const Behavior& b,
                                            const std::string& t) const {
        if (b.variants.size() >= 2) return b.variants;
        if (b.variants.size() == 1) return {b.variants[0], t + "s"};
        // fallback typos; appending letters never normalizes back to t
        return {t + "s", "un" + t};
    }

    std::string repeat_completion(const Behavior& b, const std::string& t,
                                  uint64_t ordinal, double temperature,
                                  const std::vector<Entry>& dist) const {
        if (temperature <= 0.0) return dist.front().text;
        switch (b.kind) {
            case BehaviorKind::Normal:
            case BehaviorKind::Unspeakable: {
                double u = detail::hash01(profile_.seed, t, ordinal, "sample");
                double acc = 0.0;
                for (const Entry& e : dist) {
                    acc += e.prob;
                    if (u < acc) return e.text;
                }
                return dist.back().text;
            }
            case BehaviorKind::MinorAnomalous: {
                // Evenly spaced off-target schedule: any N consecutive
                // ordinals contain exactly rate*N off-target completions
                // (exact when rate*N is integral), so planted rates survive
                // the scan pass consuming ordinal 0.
                double r = b.off_target_rate;
                bool off = std::floor(static_cast<double>(ordinal + 1) * r) -
                               std::floor(static_cast<double>(ordinal) * r) >=
                           1.0;
                if (!off) return t;
                auto vars = minor_variants(b, t);
                return vars[detail::hash64(profile_.seed, t, ordinal, "var") %
                            vars.size()];
            }
            case BehaviorKind::MajorAnomalous:
            case BehaviorKind::Error400:
            case BehaviorKind::SchemaViolating:
                return pool_pick(t, ordinal);
            case BehaviorKind::NoResult:
                return {};
        }
        return {};
    }

    std::string explain_completion(const Behavior& b, const std::string& t,
                                   uint64_t ordinal) const {
        switch (b.kind) {
            case BehaviorKind::Normal:
            case BehaviorKind::MinorAnomalous: {
                ordered_json j;
                j["text"] = t;
                j["meaning"] = "an identifier-like fragment";
                return j.dump();
            }
            case BehaviorKind::MajorAnomalous:
            case BehaviorKind::Error400: {
                ordered_json j;
                j["text"] = pool_pick(t, ordinal);
                j["meaning"] = "uncertain";
                return j.dump();
            }
            case BehaviorKind::SchemaViolating:
                return "{text: " + pool_pick(t, ordinal) + ", meaning";
            case BehaviorKind::Unspeakable:
                return " ";
            case BehaviorKind::NoResult:
                return {};
        }
        return {};
    }

    AnomalyProfile profile_;
    int requested_port_;
    int delay_ms_;
    int port_ = -1;
    httplib::Server server_;
    std::thread thread_;
    std::mutex ordinal_mu_;
    std::map<std::string, uint64_t> ordinals_;
    std::atomic<uint64_t> prompt_tokens_{0};
    std::atomic<uint64_t> completion_tokens_{0};
    std::atomic<uint64_t> request_count_{0};
};

} // namespace tokscan::mock
