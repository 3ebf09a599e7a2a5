#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "modeclust/matrix.hpp"

namespace modeclust
{
/// Hubert-Arabie adjusted Rand index. Two trivial partitions of the same
/// kind (both one cluster, or both all singletons) score 1.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Variation of information H(a|b) + H(b|a), in nats.
double vi_distance(std::span<const int> a, std::span<const int> b);

/// The same distance in bits, for comparison with log2-based reports.
inline double vi_distance_bits(std::span<const int> a, std::span<const int> b)
{
  return vi_distance(a, b) / std::log(2.0);
}

enum class ComponentKind
{
  gaussian,
  student_t,  // multivariate t with 5 degrees of freedom
};

struct MixtureComponent
{
  ComponentKind kind = ComponentKind::gaussian;
  double weight = 1.0;
  std::vector<double> mean;
  /// Row-major dims x dims covariance (scale matrix for the t).
  std::vector<double> cov;
};

struct MixtureSpec
{
  std::size_t dims = 0;
  std::vector<MixtureComponent> components;
  /// Draw exactly round(weight * n) rows per component (largest remainders
  /// settle rounding) instead of multinomial counts.
  bool exact_counts = false;

  void validate() const;
};

struct SimulatedData
{
  DataMatrix data;
  std::vector<int> labels;  // generating component of each row
};

/// Rows come out grouped by component unless `shuffle` is set.
SimulatedData simulate_mixture(const MixtureSpec& spec, std::size_t n,
                               uint64_t seed, bool shuffle = true);

/// Ten Gaussian components in 20 dimensions with sizes 1000, 500, 4 x 250
/// and 4 x 125 out of 3000. Mean entries are 0 or 6, distinct across
/// components; covariances have a random correlation structure and
/// variances drawn from [0.5, 3].
MixtureSpec scenario1_spec(uint64_t seed);
inline constexpr std::size_t kScenario1Rows = 3000;

}  // namespace modeclust
