#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace modeclust
{
/// Column-major numeric matrix. Sub-matrices are described by row-index
/// lists into the original, so row identities survive sub-setting.
struct DataMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;      // values[j * rows + i]
  std::vector<std::string> names;  // one per column

  DataMatrix() = default;
  DataMatrix(std::size_t r, std::size_t c);

  double& at(std::size_t i, std::size_t j) { return values[j * rows + i]; }
  double at(std::size_t i, std::size_t j) const { return values[j * rows + i]; }

  std::span<double> column(std::size_t j)
  {
    return {values.data() + j * rows, rows};
  }
  std::span<const double> column(std::size_t j) const
  {
    return {values.data() + j * rows, rows};
  }

  const std::string& name(std::size_t j) const { return names[j]; }
};

/// Reads a CSV whose first line holds column names and whose other cells are
/// all numeric. Empty, NA and non-numeric cells are rejected with the row and
/// column named.
DataMatrix read_csv(std::istream& in, const std::string& source = "<input>");
DataMatrix read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const DataMatrix& m);

/// Centres each column and scales it to unit sample (n - 1) variance.
/// Columns with fewer than two distinct values are an input error naming
/// every offending column.
DataMatrix standardize(const DataMatrix& m);

/// Scores on the top-k principal directions, from a symmetric eigensolve of
/// the column covariance. Component signs are fixed so that the largest
/// absolute loading of each direction is positive.
DataMatrix pca_rotate(const DataMatrix& m, std::size_t k);

}  // namespace modeclust
