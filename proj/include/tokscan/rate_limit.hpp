#pragma once

#include <chrono>
#include <mutex>
#include <thread>

namespace tokscan {

/// Token-bucket limiter shared by all scanning workers. A rate of 0 disables
/// limiting. Burst capacity is one minute's worth of requests, matching how
/// per-minute API quotas behave.
class RateLimiter {
public:
    explicit RateLimiter(unsigned requests_per_minute)
        : per_second_(requests_per_minute / 60.0),
          capacity_(requests_per_minute > 0 ? requests_per_minute : 0),
          tokens_(static_cast<double>(capacity_)),
          last_(Clock::now()) {}

    /// Blocks until a request slot is available.
    void acquire() {
        if (capacity_ == 0) return;
        for (;;) {
            std::unique_lock lock(mu_);
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            double deficit = 1.0 - tokens_;
            auto wait = std::chrono::duration<double>(deficit / per_second_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
        }
    }

private:
    using Clock = std::chrono::steady_clock;

    void refill() {
        auto now = Clock::now();
        std::chrono::duration<double> dt = now - last_;
        last_ = now;
        tokens_ += dt.count() * per_second_;
        if (tokens_ > static_cast<double>(capacity_)) {
            tokens_ = static_cast<double>(capacity_);
        }
    }

    double per_second_;
    unsigned capacity_;
    double tokens_;
    Clock::time_point last_;
    std::mutex mu_;
};

} // namespace tokscan
