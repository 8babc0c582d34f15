#pragma once

#include <atomic>
#include <cstdint>

namespace tokscan {

struct PriceTable {
    double prompt_per_1k = 0.0;
    double completion_per_1k = 0.0;
};

/// Accumulated API usage. Counters only grow; increments from concurrent
/// probe completions are atomic so none are lost.
class CostLedger {
public:
    CostLedger() = default;
    explicit CostLedger(PriceTable prices) : prices_(prices) {}

    void add_usage(uint64_t prompt_tokens, uint64_t completion_tokens) {
        prompt_tokens_.fetch_add(prompt_tokens, std::memory_order_relaxed);
        completion_tokens_.fetch_add(completion_tokens,
                                     std::memory_order_relaxed);
    }

    uint64_t prompt_tokens() const {
        return prompt_tokens_.load(std::memory_order_relaxed);
    }
    uint64_t completion_tokens() const {
        return completion_tokens_.load(std::memory_order_relaxed);
    }

    const PriceTable& prices() const { return prices_; }

    double total_cost() const {
        return static_cast<double>(prompt_tokens()) / 1000.0 *
                   prices_.prompt_per_1k +
               static_cast<double>(completion_tokens()) / 1000.0 *
                   prices_.completion_per_1k;
    }

private:
    std::atomic<uint64_t> prompt_tokens_{0};
    std::atomic<uint64_t> completion_tokens_{0};
    PriceTable prices_;
};

} // namespace tokscan
