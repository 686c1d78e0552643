#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace outgen {

uint64_t fnv1a64(std::string_view bytes, uint64_t h = 14695981039346656037ull);

// Deterministic splitmix64 stream. All pipeline randomness flows through
// streams derived from (global_seed, name, index), so outputs do not depend
// on worker scheduling, platform, or standard-library distribution details.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(seed) {}

  static RngStream derive(uint64_t global_seed, std::string_view name,
                          uint64_t index = 0);

  uint64_t next_u64();

  // [0, 1)
  double uniform();
  // [lo, hi); returns lo when the interval is empty
  double uniform(double lo, double hi);
  // [0, bound), unbiased; bound must be > 0
  uint64_t uniform_int(uint64_t bound);

  size_t pick_index(size_t n) { return static_cast<size_t>(uniform_int(n)); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace outgen
