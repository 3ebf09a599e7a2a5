#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "modeclust/matrix.hpp"
#include "modeclust/rng.hpp"

namespace modeclust
{
struct NoiseConfig
{
  /// Divisor of the Gaussian spread; larger values perturb less.
  double gamma = 4.0;
  uint64_t seed = 0;

  void validate() const;
};

/// Replaces every tied entry by a uniform draw between the midpoints to its
/// neighbouring distinct values. A tied minimum (maximum) uses the minimum
/// (maximum) itself as the outer bound. Unique entries are returned as is.
std::vector<double> break_ties_uniform(std::span<const double> column, Rng& rng);

/// Spread of the Gaussian perturbation for the entry at rank r (0-based) of
/// the sorted, distinct values: half the gap between its neighbours over
/// gamma, with the one-sided gap at the two ends.
double gaussian_noise_sd(std::span<const double> sorted, std::size_t r,
                         double gamma);

/// Replaces each entry by a normal draw centred on it, with the spread from
/// gaussian_noise_sd. Columns with fewer than three values are unchanged.
std::vector<double> perturb_gaussian(std::span<const double> column, double gamma,
                                     Rng& rng);

/// Both noise stages on every column. Column j of iteration `iteration`
/// draws from its own stream derived from (seed, iteration, key_j), where
/// key_j defaults to j. Passing permuted keys along with permuted columns
/// gives the permuted result.
DataMatrix add_noise(const DataMatrix& m, const NoiseConfig& cfg,
                     uint64_t iteration,
                     std::span<const uint64_t> column_keys = {});

}  // namespace modeclust
