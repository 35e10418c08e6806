#pragma once

#include <algorithm>
#include <chrono>
#include <type_traits>
#include <vector>

namespace romlab {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Runs fn `repeats` times on the monotonic clock and returns the median wall
// time in seconds. The result of the last call is stored in *last if given.
template <class F, class R = std::invoke_result_t<F&>>
double measure_timing(F&& fn, int repeats = 3, R* last = nullptr) {
  std::vector<double> t;
  for (int k = 0; k < std::max(repeats, 1); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<R>) {
      fn();
    } else if (last) {
      *last = fn();
    } else {
      (void)fn();
    }
    t.push_back(seconds_since(t0));
  }
  return median(std::move(t));
}

}  // namespace romlab
