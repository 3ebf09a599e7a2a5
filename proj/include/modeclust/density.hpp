#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

namespace modeclust
{
inline constexpr int kDefaultKappa = 19;

/// A run of consecutive data gaps [sample[first], sample[last]] on which the
/// fitted density is constant and forms a local extremum.
struct ModalInterval
{
  std::size_t first = 0;  // sample index of the left end
  std::size_t last = 0;   // sample index of the right end
  double lo = 0.0;
  double hi = 0.0;
};

struct TautStringFit
{
  /// Knots of the string: x positions (data points) and heights.
  std::vector<double> knot_x;
  std::vector<double> knot_y;
  /// density[i] is the fitted density on [sample[i], sample[i + 1]].
  std::vector<double> density;
  std::vector<ModalInterval> modes;
  std::vector<ModalInterval> antimodes;
  /// Half-width of the tube the string was threaded through.
  double tube = 0.0;
  int kappa = kDefaultKappa;
};

/// Contiguous groups of a sorted sample, separated at `cutpoints`.
struct ModalSplit
{
  std::vector<double> cutpoints;
  /// Half-open index ranges [begin, end) into the sorted sample.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
};

/// Largest sums of |increments| of the difference of two distribution
/// functions over j disjoint intervals, for j = 1..kappa. `diff` lists the
/// difference at its successive extreme points (one-sided limits included).
std::vector<double> kuiper_distances(std::span<const double> diff, int kappa);

/// Scaled quantiles sqrt(n) * q_j of the j-Kuiper distances between the edf
/// of a uniform sample and the uniform df, calibrated jointly so that all
/// kappa distances stay below their bounds with probability `level`.
struct KuiperTable
{
  int kappa = kDefaultKappa;
  double level = 0.95;
  uint64_t trials = 0;
  uint64_t seed = 0;
  std::vector<std::size_t> n_grid;
  /// scaled[g][j - 1] for n = n_grid[g].
  std::vector<std::vector<double>> scaled;

  /// Bounds q_1..q_kappa at sample size n (log-n interpolation, clamped at
  /// the ends of the grid).
  std::vector<double> bounds(std::size_t n) const;

  void validate() const;
  friend bool operator==(const KuiperTable&, const KuiperTable&) = default;

  static const KuiperTable& bundled();
};

KuiperTable build_kuiper_table(std::vector<std::size_t> n_grid, uint64_t trials,
                               uint64_t seed, int kappa = kDefaultKappa,
                               double level = 0.95);
std::vector<std::size_t> default_kuiper_grid();

void to_json(nlohmann::json& j, const KuiperTable& t);
void from_json(const nlohmann::json& j, KuiperTable& t);
void save_kuiper_table(const KuiperTable& t, const std::filesystem::path& path);
KuiperTable load_kuiper_table(const std::filesystem::path& path);

/// Taut string through a tube of half-width `tube` around the edf of a sorted
/// sample of distinct values. The string is pinned to 0 at the minimum and 1
/// at the maximum, so the density integrates to one over the sample range.
TautStringFit taut_string_at(std::span<const double> sorted, double tube);

/// Taut-string density with the tube chosen by the kappa-Kuiper criterion:
/// the tube is shrunk geometrically from the straight line until the fit is
/// adequate for all j-Kuiper distances, j <= kappa.
TautStringFit taut_string(std::span<const double> sorted,
                          int kappa = kDefaultKappa);
TautStringFit taut_string(std::span<const double> sorted, int kappa,
                          const KuiperTable& table);

/// One cut-point per antimodal component: the mean of the sample values
/// inside it. Groups are formed between neighbouring cut-points.
ModalSplit antimode_cutpoints(const TautStringFit& fit,
                              std::span<const double> sorted);

/// Optimal partition of a sorted sample into k contiguous groups under total
/// absolute deviation from each group's medoid. Among equal-cost partitions
/// the one with the leftmost first cut is returned.
struct MedoidPartition
{
  ModalSplit split;
  std::vector<double> medoids;
  double cost = 0.0;
};
MedoidPartition kmedoids_1d(std::span<const double> sorted, std::size_t k);

}  // namespace modeclust
