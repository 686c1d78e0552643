#include "outgen/rng.hpp"

#include <stdexcept>

namespace outgen {

uint64_t fnv1a64(std::string_view bytes, uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t mix_u64(uint64_t h, uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(v >> (8 * i));
  return fnv1a64(std::string_view(buf, 8), h);
}

}  // namespace

RngStream RngStream::derive(uint64_t global_seed, std::string_view name,
                            uint64_t index) {
  uint64_t h = mix_u64(14695981039346656037ull, global_seed);
  h = fnv1a64(name, h);
  h = mix_u64(h, index);
  // one warmup round decorrelates nearby hashes
  splitmix64(h);
  return RngStream(h);
}

uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!(hi > lo)) return lo;
  return lo + uniform() * (hi - lo);
}

uint64_t RngStream::uniform_int(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_int: zero bound");
  uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace outgen
