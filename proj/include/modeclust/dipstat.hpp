#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace modeclust
{
/// Sup-norm distance from an empirical df to the nearest unimodal (k = 1) or
/// k-modal df.
struct DipResult
{
  double statistic = 0.0;
  std::size_t n = 0;
};

/// Hartigan's dip of a sorted sample, O(n).
///
/// Ties are permitted. The statistic is floored at 1/(2n), which is the value
/// for n equally spaced points; for n >= 2 it never exceeds 1/4.
DipResult dip_statistic(std::span<const double> sorted);

/// Departure from k-modality, k in {2, 3}.
///
/// The sorted sample is split exhaustively into k contiguous segments of at
/// least two points each. A segment holding n_j of the n points contributes
/// (n_j / n) * dip(segment); the statistic is the smallest achievable maximum
/// contribution over all splits. Exhaustive splitting costs O(n^k); the k = 3
/// search is pruned with prefix/suffix bounds and returns the same minimum.
DipResult kdip_statistic(std::span<const double> sorted, int k);

namespace detail
{
// Unchecked dip on a sorted, finite span (n >= 1).
double dip_unchecked(std::span<const double> sorted);
}

/// Monte-Carlo null distribution of the k-dip under uniform(0, 1) sampling.
struct CritTable
{
  int k = 1;
  uint64_t trials = 0;
  uint64_t seed = 0;
  std::vector<std::size_t> n_grid;
  /// null_stats[g] holds `trials` statistics for n = n_grid[g], ascending.
  std::vector<std::vector<double>> null_stats;

  /// Fraction of null statistics >= `statistic` at sample size `n`.
  ///
  /// Off-grid sizes rescale the statistic by sqrt(n / n_g) onto the two
  /// bracketing grid sizes and interpolate the tail fractions linearly in
  /// log n. Sizes above the grid use the largest grid size. Sizes below the
  /// grid are rejected.
  double pvalue(double statistic, std::size_t n) const;

  void validate() const;

  friend bool operator==(const CritTable&, const CritTable&) = default;
};

/// Default sample-size grids for the bundled tables.
std::vector<std::size_t> default_n_grid(int k);
uint64_t default_trials(int k);
inline constexpr uint64_t kDefaultTableSeed = 20190611;

/// Simulate the k-dip null at each n in `n_grid`. Trial t at grid size n is
/// driven by its own stream derived from (seed, k, n, t), so the result does
/// not depend on `threads`.
CritTable build_crit_table(int k, std::vector<std::size_t> n_grid,
                           uint64_t trials, uint64_t seed,
                           unsigned threads = 1);

double dip_pvalue(const DipResult& d, const CritTable& table);
double kdip_pvalue(const DipResult& d, const CritTable& table);

void to_json(nlohmann::json& j, const CritTable& t);
void from_json(const nlohmann::json& j, CritTable& t);
void save_table(const CritTable& t, const std::filesystem::path& path);
CritTable load_table(const std::filesystem::path& path);

/// The three null tables the search consumes.
struct TableSet
{
  CritTable dip;    // k = 1
  CritTable dip2;   // k = 2
  CritTable dip3;   // k = 3

  const CritTable& for_k(int k) const;

  /// Loads dip_k1.json, dip_k2.json and dip_k3.json from `dir`.
  static TableSet load(const std::filesystem::path& dir);

  /// Tables shipped with the project. Looked up in $MODECLUST_TABLES, then
  /// in the source tree's data/tables directory. Loaded once per process.
  static const TableSet& bundled();
};

/// Directory holding the bundled table files.
std::filesystem::path bundled_table_dir();

/// Sequentially estimated mode count for a sample the plain dip has already
/// flagged as multimodal.
struct ModalEstimate
{
  int k_hat = 2;
  /// p-values of the 2-dip and (if reached) 3-dip stages.
  std::vector<double> pvalues;
};

/// 2-dip at level alpha/2, then 3-dip at alpha/3; rejecting both gives 4.
/// A stage is skipped (estimate stops at the previous k) when the sample is
/// too small to give every segment two points.
ModalEstimate estimate_num_modes(std::span<const double> sorted, double alpha,
                                 const TableSet& tables);

}  // namespace modeclust
