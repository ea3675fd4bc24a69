#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace mcs {

// (seed, stream) pair. Every random draw in the library is a pure function
// of one of these, so results never depend on evaluation order or on the
// number of worker threads.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return splitmix64(h ^ splitmix64(v + 0x632be59bd9b4e019ULL));
}

}  // namespace detail

// Child seed for a labelled sub-task, e.g. derive(seed, {split, tag}).
inline RngSeed derive(const RngSeed& parent, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::hash_combine(parent.seed, parent.stream);
  for (auto v : path) h = detail::hash_combine(h, v);
  return RngSeed{parent.seed, h};
}

// Small tag values keep derived streams for different roles apart.
enum class StreamTag : std::uint64_t {
  dataset = 1,
  split = 2,
  fit = 3,
  noise = 4,
  replicate = 5,
  tree = 6,
};

inline RngSeed derive(const RngSeed& parent, StreamTag tag,
                      std::initializer_list<std::uint64_t> path = {}) {
  RngSeed s = derive(parent, {static_cast<std::uint64_t>(tag)});
  return path.size() == 0 ? s : derive(s, path);
}

// Deterministic generator. std::mt19937_64 is bit-specified by the standard;
// the distributions below are hand-rolled because the standard library's
// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(const RngSeed& s)
      : engine_(detail::hash_combine(detail::splitmix64(s.seed), s.stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, bound) via Lemire's rejection method.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const unsigned __int128 m =
          static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(bound);
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mcs
