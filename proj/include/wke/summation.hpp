#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace wke {

// Neumaier's variant of compensated summation; unlike plain Kahan it also
// keeps the low-order bits when |term| > |sum|.
class Accum {
 public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

inline double neumaier_sum(const std::vector<double>& xs) {
  Accum a;
  for (double x : xs) a.add(x);
  return a.value();
}

// For totals with heavy cancellation: accumulate small magnitudes first so
// they are not swallowed before the large terms cancel each other.
inline double sorted_sum(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  return neumaier_sum(xs);
}

// Deterministic parallel map: every index writes its own output slot, so the
// result is independent of the thread count.  Reductions over the outputs are
// then done serially in index order.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&body, t, nt, n]() {
      for (std::size_t i = t; i < n; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace wke
