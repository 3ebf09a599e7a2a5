#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace modeclust
{
/// SplitMix64 finalizer. Used to expand seeds and to derive independent
/// stream seeds from (seed, index, ...) tuples.
constexpr uint64_t splitmix64(uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive a child seed from a parent seed and a path of stream indices.
/// derive_seed(s, {a, b}) != derive_seed(s, {b, a}) in general.
constexpr uint64_t derive_seed(uint64_t seed,
                               std::initializer_list<uint64_t> path) noexcept
{
  uint64_t h = splitmix64(seed);
  for (const uint64_t p : path)
  {
    h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  }
  return h;
}

/// xoshiro256** generator with portable distributions.
///
/// All distributions are implemented here rather than through <random> so
/// that tables and runs are bit-identical across standard libraries.
class Rng
{
public:
  using result_type = uint64_t;

  explicit Rng(uint64_t seed = 0) noexcept { reseed(seed); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max()
  {
    return std::numeric_limits<result_type>::max();
  }

  void reseed(uint64_t seed) noexcept
  {
    uint64_t x = seed;
    for (auto& word : state_)
    {
      x += 0x9e3779b97f4a7c15ULL;
      word = splitmix64(x);
    }
    has_spare_ = false;
  }

  /// A generator for the stream identified by `path` under this seed.
  static Rng stream(uint64_t seed, std::initializer_list<uint64_t> path)
  {
    return Rng(derive_seed(seed, path));
  }

  result_type operator()() noexcept
  {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept
  {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept
  {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer on [0, bound). bound must be positive.
  uint64_t below(uint64_t bound) noexcept
  {
    // Lemire's nearly-divisionless method.
    __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
    auto low = static_cast<uint64_t>(m);
    if (low < bound)
    {
      const uint64_t threshold = (0 - bound) % bound;
      while (low < threshold)
      {
        m = static_cast<__uint128_t>((*this)()) * bound;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept
  {
    if (has_spare_)
    {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do
    {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  /// Chi-square with an integer number of degrees of freedom.
  double chi_square(int dof) noexcept
  {
    double acc = 0.0;
    for (int i = 0; i < dof; ++i)
    {
      const double z = normal();
      acc += z * z;
    }
    return acc;
  }

private:
  static constexpr uint64_t rotl(uint64_t x, int k) noexcept
  {
    return (x << k) | (x >> (64 - k));
  }

  std::array<uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace modeclust
