#include "modeclust/matrix.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "modeclust/errors.hpp"

namespace modeclust
{
namespace
{
std::vector<std::string> split_line(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ','))
  {
    // Trim blanks and optional quotes.
    const auto b = cell.find_first_not_of(" \t\r\"");
    const auto e = cell.find_last_not_of(" \t\r\"");
    cells.push_back(b == std::string::npos ? std::string{}
                                           : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',')
  {
    cells.emplace_back();
  }
  return cells;
}
}  // namespace

DataMatrix::DataMatrix(std::size_t r, std::size_t c)
    : rows(r), cols(c), values(r * c, 0.0), names(c)
{
  for (std::size_t j = 0; j < c; ++j)
  {
    names[j] = "V" + std::to_string(j + 1);
  }
}

DataMatrix read_csv(std::istream& in, const std::string& source)
{
  std::string line;
  if (!std::getline(in, line))
  {
    throw InputError(source + ": empty file");
  }
  const auto header = split_line(line);
  if (header.empty())
  {
    throw InputError(source + ": no columns in header");
  }
  std::vector<std::vector<double>> columns(header.size());
  std::size_t row = 0;
  while (std::getline(in, line))
  {
    if (line.find_first_not_of(" \t\r") == std::string::npos)
    {
      continue;
    }
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
    {
      throw InputError(source + ": row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j)
    {
      const std::string& c = cells[j];
      double v = 0.0;
      std::size_t used = 0;
      bool ok = !c.empty();
      if (ok)
      {
        try
        {
          v = std::stod(c, &used);
        }
        catch (const std::exception&)
        {
          ok = false;
        }
      }
      if (!ok || used != c.size() || !std::isfinite(v))
      {
        throw InputError(source + ": row " + std::to_string(row) + ", column '" +
                         header[j] + "': '" + c +
                         "' is not a finite number (missing values are not "
                         "supported)");
      }
      columns[j].push_back(v);
    }
  }
  if (row == 0)
  {
    throw InputError(source + ": no data rows");
  }
  DataMatrix m(row, header.size());
  m.names = header;
  for (std::size_t j = 0; j < header.size(); ++j)
  {
    std::copy(columns[j].begin(), columns[j].end(), m.column(j).begin());
  }
  return m;
}

DataMatrix read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw InputError("cannot read " + path.string());
  }
  return read_csv(in, path.string());
}

void write_csv(std::ostream& out, const DataMatrix& m)
{
  for (std::size_t j = 0; j < m.cols; ++j)
  {
    out << (j ? "," : "") << m.names[j];
  }
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.rows; ++i)
  {
    for (std::size_t j = 0; j < m.cols; ++j)
    {
      std::snprintf(buf, sizeof buf, "%.17g", m.at(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

DataMatrix standardize(const DataMatrix& m)
{
  if (m.rows < 2)
  {
    throw InputError("standardize: need at least two rows");
  }
  DataMatrix out = m;
  std::vector<std::string> constant;
  for (std::size_t j = 0; j < m.cols; ++j)
  {
    const auto col = m.column(j);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (*lo == *hi)
    {
      constant.push_back(m.names[j]);
      continue;
    }
    double mean = 0.0;
    for (const double v : col)
    {
      mean += v;
    }
    mean /= static_cast<double>(m.rows);
    double ss = 0.0;
    for (const double v : col)
    {
      ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(m.rows - 1));
    auto dst = out.column(j);
    for (std::size_t i = 0; i < m.rows; ++i)
    {
      dst[i] = (col[i] - mean) / sd;
    }
  }
  if (!constant.empty())
  {
    std::string list;
    for (const auto& c : constant)
    {
      list += (list.empty() ? "" : ", ") + c;
    }
    throw InputError("constant column(s) cannot be standardized: " + list);
  }
  return out;
}

DataMatrix pca_rotate(const DataMatrix& m, std::size_t k)
{
  if (k == 0 || k > std::min(m.rows, m.cols))
  {
    throw InputError("pca_rotate: component count " + std::to_string(k) +
                     " outside 1.." + std::to_string(std::min(m.rows, m.cols)));
  }
  Eigen::Map<const Eigen::MatrixXd> x(m.values.data(),
                                      static_cast<Eigen::Index>(m.rows),
                                      static_cast<Eigen::Index>(m.cols));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centred = x.rowwise() - mean;
  const Eigen::MatrixXd cov =
      (centred.transpose() * centred) / static_cast<double>(m.rows - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
  {
    throw InputError("pca_rotate: eigendecomposition failed");
  }
  // Eigen sorts ascending.
  Eigen::MatrixXd dirs(m.cols, k);
  for (std::size_t c = 0; c < k; ++c)
  {
    Eigen::VectorXd v = eig.eigenvectors().col(
        static_cast<Eigen::Index>(m.cols - 1 - c));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0)
    {
      v = -v;
    }
    dirs.col(static_cast<Eigen::Index>(c)) = v;
  }
  DataMatrix out(m.rows, k);
  for (std::size_t c = 0; c < k; ++c)
  {
    out.names[c] = "PC" + std::to_string(c + 1);
  }
  Eigen::Map<Eigen::MatrixXd>(out.values.data(),
                              static_cast<Eigen::Index>(m.rows),
                              static_cast<Eigen::Index>(k)) = centred * dirs;
  return out;
}

}  // namespace modeclust
