#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace pdmp {

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream_id, counter), so replicates can run on disjoint streams
/// and any run can be replayed bit-for-bit from its (seed, stream_id).
///
/// The generator is the splitmix64 output function applied to a Weyl
/// sequence keyed by (seed, stream_id). Gaussian variates use Box-Muller
/// on explicit 53-bit uniforms, so the stream of reals is fixed by this
/// header alone, not by the standard library's distribution internals.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(derive_key(seed, stream_id)), seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1): 53-bit mantissa, never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * pi() * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Exponential with unit rate.
  double exponential() { return -std::log(uniform()); }

  /// UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

 private:
  static constexpr double pi() { return 3.14159265358979323846; }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
    auto mix = [](std::uint64_t z) {
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      return z ^ (z >> 31);
    };
    return mix(seed + 0x9E3779B97F4A7C15ULL) ^ mix(stream_id + 0xD1B54A32D192ED03ULL);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pdmp
