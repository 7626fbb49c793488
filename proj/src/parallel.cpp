#include "abc/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace abc {

namespace {

int resolve_max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const char* env = std::getenv("ABC_THREADS");
  if (env != nullptr) {
    try {
      const int requested = std::stoi(env);
      if (requested >= 1) return requested;
    } catch (...) {
    }
  }
  return hw;
}

}  // namespace

int max_threads() {
  static const int cached = resolve_max_threads();
  return cached;
}

double pairwise_sum(const double* x, std::int64_t n) {
  if (n <= 0) return 0.0;
  if (n <= 64) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::int64_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), static_cast<std::int64_t>(x.size()));
}

}  // namespace abc
