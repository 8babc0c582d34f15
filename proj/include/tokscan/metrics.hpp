#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tokscan {

struct EmptyDistributionError : std::runtime_error {
    EmptyDistributionError()
        : std::runtime_error("metrics: empty prediction distribution") {}
};

/// Top-5 predictions for one completion position, ordered by descending
/// log-probability. An empty distribution is valid and marks a no-result
/// probe; it must be routed around compute_metrics().
class PredictionDistribution {
public:
    struct Entry {
        std::string token_text;
        double logprob = 0.0;
    };

    PredictionDistribution() = default;

    explicit PredictionDistribution(std::vector<Entry> entries)
        : entries_(std::move(entries)) {
        std::stable_sort(entries_.begin(), entries_.end(),
                         [](const Entry& a, const Entry& b) {
                             return a.logprob > b.logprob;
                         });
    }

    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Probability of entry i, exp(logprob) clamped into [0, 1].
    double probability(size_t i) const {
        return std::exp(std::min(entries_[i].logprob, 0.0));
    }

private:
    std::vector<Entry> entries_;
};

/// The three low-confidence indicators plus the top probability itself.
struct ConfidenceMetrics {
    double entropy = 0.0;    // nats, over the raw top-5 probabilities
    double tail_prob = 0.0;  // 1 - sum(top-5), clamped to [0, 1]
    double margin = 0.0;     // p1 - p2 (p2 = 0 when fewer than 2 entries)
    double top_prob = 0.0;
};

struct ThresholdConfig {
    double entropy_max = 1.0;
    double tail_max = 0.1;
    double margin_min = 0.5;
};

/// Plug-in entropy and companions from one probe's top-5 distribution.
/// Probabilities are used as returned, without renormalization; mass beyond
/// the top 5 shows up in tail_prob, not in the entropy term.
inline ConfidenceMetrics compute_metrics(const PredictionDistribution& dist) {
    if (dist.empty()) throw EmptyDistributionError();

    ConfidenceMetrics m;
    double sum = 0.0;
    for (size_t i = 0; i < dist.size(); ++i) {
        double p = dist.probability(i);
        sum += p;
        if (p > 1e-300) m.entropy -= p * std::log(p);
    }
    if (m.entropy < 0.0) m.entropy = 0.0;  // -0.0 from a lone p == 1
    m.tail_prob = std::clamp(1.0 - sum, 0.0, 1.0);
    m.top_prob = dist.probability(0);
    m.margin = m.top_prob - (dist.size() > 1 ? dist.probability(1) : 0.0);
    return m;
}

/// The detection predicate: strict comparisons, logical OR.
inline bool is_candidate(const ConfidenceMetrics& m, const ThresholdConfig& t) {
    return m.entropy > t.entropy_max || m.tail_prob > t.tail_max ||
           m.margin < t.margin_min;
}

struct BaselineSummary {
    double mean_top_prob = 0.0;
    double mean_margin = 0.0;
    double mean_entropy = 0.0;
    double mean_tail = 0.0;
    size_t count = 0;
};

/// Accumulates per-token metrics into the scan report's baseline block.
class BaselineAccumulator {
public:
    void add(const ConfidenceMetrics& m) {
        sum_top_ += m.top_prob;
        sum_margin_ += m.margin;
        sum_entropy_ += m.entropy;
        sum_tail_ += m.tail_prob;
        ++count_;
    }

    size_t count() const { return count_; }

    BaselineSummary summary() const {
        if (count_ == 0) {
            throw std::runtime_error("metrics: baseline over empty stream");
        }
        double n = static_cast<double>(count_);
        return {sum_top_ / n, sum_margin_ / n, sum_entropy_ / n, sum_tail_ / n,
                count_};
    }

private:
    double sum_top_ = 0.0;
    double sum_margin_ = 0.0;
    double sum_entropy_ = 0.0;
    double sum_tail_ = 0.0;
    size_t count_ = 0;
};

} // namespace tokscan
