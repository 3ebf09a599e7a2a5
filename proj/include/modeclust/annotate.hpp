#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modeclust/forest.hpp"
#include "modeclust/matrix.hpp"

namespace modeclust
{
/// Exact non-negative fraction, kept unreduced until asked.
struct Fraction
{
  int64_t num = 0;
  int64_t den = 1;

  Fraction reduced() const;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Equal as rational numbers.
  bool same_value(const Fraction& o) const { return num * o.den == o.num * den; }
  std::string str() const;
};

/// (a d + b c) / (2 b d), unreduced.
Fraction combine_labels(const Fraction& first, const Fraction& second);

/// Word for a fraction: lowest, low, medium-low, medium, medium-high, high,
/// highest for 0, 1/3, 1/4, 1/2, 3/4, 2/3, 1; "level n/d" otherwise.
std::string fraction_word(const Fraction& f);

/// Median cut-points per coordinate; an empty vector marks a coordinate
/// that was never split.
struct AnnotationBoundaries
{
  std::vector<std::vector<double>> coords;

  bool annotated(std::size_t j) const { return !coords.at(j).empty(); }
};

/// For each coordinate, takes the cut-point count with the most recorded
/// vectors (smallest count on ties) and the component-wise medians of those
/// vectors.
AnnotationBoundaries derive_boundaries(const CutPointLog& log);

struct LabelingConfig
{
  /// Percentile offset: labels compare the (50 - epsilon)th, median and
  /// (50 + epsilon)th percentiles with the boundaries.
  double epsilon = 17.0;

  void validate() const;
};

/// Per-coordinate description of a cluster, ordered by coordinate.
struct ClusterLabel
{
  std::vector<std::pair<std::size_t, Fraction>> parts;

  /// Canonical vote key built from reduced fractions.
  std::string key() const;
  /// "name word; name word" in coordinate order.
  std::string render(const std::vector<std::string>& names) const;
  const Fraction* find(std::size_t coord) const;
};

/// Linear interpolation between order statistics; q in [0, 100].
double percentile(std::span<const double> sorted, double q);

/// Labels for the rows of one cluster, in the order of `rows`. Rows share
/// one label unless a single-boundary coordinate straddles its boundary, in
/// which case rows below it get 0/1 and the rest 1/1 on that coordinate.
std::vector<ClusterLabel> label_cluster(const RowSet& rows, const DataMatrix& m,
                                        const AnnotationBoundaries& boundaries,
                                        const LabelingConfig& cfg);

/// Per-row label counts across iterations.
struct VoteLedger
{
  std::vector<std::map<std::string, uint32_t>> counts;
  std::map<std::string, ClusterLabel> labels;
  uint32_t iterations = 0;

  explicit VoteLedger(std::size_t rows = 0) : counts(rows) {}
  void add_iteration(std::span<const ClusterLabel> row_labels);
  /// Labels of one row by decreasing count (ties by key).
  std::vector<std::pair<std::string, uint32_t>> ranked(std::size_t row) const;
};

enum class VoteMode
{
  max,
  runoff,
};

/// Final label of every row. Run-off: over half the votes wins outright;
/// a top share in (30%, 50%] with the runner-up above 20% combines the two;
/// a top share in [20%, 30%] with the next two above 15% combines all three
/// left to right; anything else falls back to the most frequent label.
std::vector<ClusterLabel> vote(const VoteLedger& ledger, VoteMode mode);

/// Coordinate-wise combination; coordinates missing from `top` are dropped.
ClusterLabel combine(const ClusterLabel& top, const ClusterLabel& other);

/// Integer cluster ids, numbered by first appearance of each label key.
std::vector<int> clustering_from_labels(std::span<const ClusterLabel> labels);

}  // namespace modeclust
