#include "wikitables/source.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace wikitables {

RateLimiter::RateLimiter(int max_concurrent, std::chrono::milliseconds min_interval)
    : max_concurrent_(std::max(1, max_concurrent)), min_interval_(min_interval) {}

RateLimiter::Permit RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < max_concurrent_; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
    slot = std::max(std::chrono::steady_clock::now(), next_start_);
    next_start_ = slot + min_interval_;
  }
  std::this_thread::sleep_until(slot);
  return Permit(this);
}

void RateLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_one();
}

int RateLimiter::peak_in_flight() const {
  std::lock_guard lock(mutex_);
  return peak_;
}

Backoff::Backoff(std::chrono::milliseconds base, std::uint64_t seed)
    : base_(base), rng_(seed) {}

std::chrono::milliseconds Backoff::delay(int attempt) {
  double jitter;
  {
    std::lock_guard lock(mutex_);
    jitter = std::uniform_real_distribution<double>(0.8, 1.2)(rng_);
  }
  const double ms = static_cast<double>(base_.count()) *
                    std::ldexp(1.0, std::min(attempt, 30)) * jitter;
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

}  // namespace wikitables
