#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

namespace tcmbench::modelclient {

using Millis = std::chrono::milliseconds;
using Sleeper = std::function<void(Millis)>;

inline Sleeper real_sleeper() {
  return [](Millis d) { std::this_thread::sleep_for(d); };
}

struct RetryPolicy {
  int max_attempts = 5;
  Millis base_delay{1000};
  double factor = 2.0;
  Millis max_delay{60000};

  /// Full jitter: uniform in [0, min(max_delay, base * factor^retry)].
  template <class Rng>
  Millis delay(int retry, Rng& rng) const {
    double cap = static_cast<double>(base_delay.count());
    for (int i = 0; i < retry; ++i) cap *= factor;
    cap = std::min(cap, static_cast<double>(max_delay.count()));
    std::uniform_real_distribution<double> d(0.0, cap);
    return Millis(static_cast<std::int64_t>(d(rng)));
  }
};

/// Counting semaphore bounding requests in flight.
class Semaphore {
 public:
  explicit Semaphore(int permits) : free_(permits) {}

  void acquire() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return free_ > 0; });
    --free_;
  }
  void release() {
    {
      std::lock_guard lk(mu_);
      ++free_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int free_;
};

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(Semaphore& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  Semaphore& s_;
};

/// Spaces request starts at least 60/rpm seconds apart, which keeps any
/// 60-second window within the cap.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(int rpm) : interval_(rpm > 0 ? Millis(60000 / rpm) : Millis(0)) {}

  void acquire() {
    if (interval_.count() == 0) return;
    Clock::time_point slot;
    {
      std::lock_guard lk(mu_);
      const auto now = Clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  Millis interval_;
  std::mutex mu_;
  Clock::time_point next_{};
};

}  // namespace tcmbench::modelclient
