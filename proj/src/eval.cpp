#include "modeclust/eval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "modeclust/errors.hpp"
#include "modeclust/rng.hpp"

namespace modeclust
{
namespace
{
std::vector<int> compact(std::span<const int> labels, int& k)
{
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    out[i] = ids.try_emplace(labels[i], static_cast<int>(ids.size())).first->second;
  }
  k = static_cast<int>(ids.size());
  return out;
}

struct Contingency
{
  std::vector<double> table;  // ka x kb
  std::vector<double> rows, cols;
  int ka = 0, kb = 0;
  double n = 0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b)
{
  if (a.size() != b.size())
  {
    throw InputError("clusterings have different lengths (" +
                     std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                     ")");
  }
  if (a.empty())
  {
    throw InputError("clusterings are empty");
  }
  Contingency c;
  const auto ca = compact(a, c.ka);
  const auto cb = compact(b, c.kb);
  c.table.assign(static_cast<std::size_t>(c.ka) * c.kb, 0.0);
  c.rows.assign(c.ka, 0.0);
  c.cols.assign(c.kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    c.table[static_cast<std::size_t>(ca[i]) * c.kb + cb[i]] += 1;
    c.rows[ca[i]] += 1;
    c.cols[cb[i]] += 1;
  }
  c.n = static_cast<double>(a.size());
  return c;
}

double pairs(double x) { return x * (x - 1) / 2; }
}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b)
{
  const Contingency c = contingency(a, b);
  if (c.n < 2)
  {
    return 1.0;
  }
  double index = 0;
  for (const double v : c.table)
  {
    index += pairs(v);
  }
  double sa = 0;
  for (const double v : c.rows)
  {
    sa += pairs(v);
  }
  double sb = 0;
  for (const double v : c.cols)
  {
    sb += pairs(v);
  }
  const double expected = sa * sb / pairs(c.n);
  const double max = 0.5 * (sa + sb);
  if (max == expected)
  {
    return 1.0;
  }
  return (index - expected) / (max - expected);
}

double vi_distance(std::span<const int> a, std::span<const int> b)
{
  const Contingency c = contingency(a, b);
  // VI = sum_ij p_ij (2 log p_ij - log p_i - log p_j) with a sign flip.
  double vi = 0;
  for (int i = 0; i < c.ka; ++i)
  {
    for (int j = 0; j < c.kb; ++j)
    {
      const double nij = c.table[static_cast<std::size_t>(i) * c.kb + j];
      if (nij > 0)
      {
        vi -= nij / c.n *
              (2 * std::log(nij) - std::log(c.rows[i]) - std::log(c.cols[j]));
      }
    }
  }
  return std::max(0.0, vi);
}

void MixtureSpec::validate() const
{
  if (dims == 0 || components.empty())
  {
    throw ConfigError("mixture needs at least one component and one dimension");
  }
  double total = 0;
  for (const auto& c : components)
  {
    if (!(c.weight >= 0 && c.weight <= 1))
    {
      throw ConfigError("mixture weights must lie in [0, 1]");
    }
    if (c.mean.size() != dims || c.cov.size() != dims * dims)
    {
      throw ConfigError("component mean/covariance sizes do not match dims");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
  {
    throw ConfigError("mixture weights must sum to 1");
  }
}

SimulatedData simulate_mixture(const MixtureSpec& spec, std::size_t n,
                               uint64_t seed, bool shuffle)
{
  spec.validate();
  const std::size_t g = spec.components.size();
  const std::size_t p = spec.dims;
  Rng rng = Rng::stream(seed, {0x73696d});

  std::vector<std::size_t> counts(g, 0);
  if (spec.exact_counts)
  {
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < g; ++c)
    {
      const double want = spec.components[c].weight * static_cast<double>(n);
      counts[c] = static_cast<std::size_t>(std::floor(want));
      assigned += counts[c];
      rem.emplace_back(-(want - std::floor(want)), c);
    }
    std::sort(rem.begin(), rem.end());
    for (std::size_t k = 0; assigned < n; ++k, ++assigned)
    {
      ++counts[rem[k % g].second];
    }
  }
  else
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      double u = rng.uniform();
      std::size_t c = 0;
      while (c + 1 < g && u >= spec.components[c].weight)
      {
        u -= spec.components[c].weight;
        ++c;
      }
      ++counts[c];
    }
  }

  SimulatedData out;
  out.data = DataMatrix(n, p);
  out.labels.reserve(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < g; ++c)
  {
    const auto& comp = spec.components[c];
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>
        cov(comp.cov.data(), static_cast<Eigen::Index>(p),
            static_cast<Eigen::Index>(p));
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
    {
      throw ConfigError("component " + std::to_string(c) +
                        " covariance is not positive definite");
    }
    const Eigen::MatrixXd chol = llt.matrixL();
    Rng crng = Rng::stream(seed, {0x636f6d70, c});
    Eigen::VectorXd z(static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < counts[c]; ++k, ++row)
    {
      for (auto& v : z)
      {
        v = crng.normal();
      }
      Eigen::VectorXd x = chol * z;
      if (comp.kind == ComponentKind::student_t)
      {
        x *= std::sqrt(5.0 / crng.chi_square(5));
      }
      for (std::size_t j = 0; j < p; ++j)
      {
        out.data.at(row, j) = comp.mean[j] + x(static_cast<Eigen::Index>(j));
      }
      out.labels.push_back(static_cast<int>(c));
    }
  }

  if (shuffle)
  {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i)
    {
      std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    SimulatedData shuffled;
    shuffled.data = DataMatrix(n, p);
    shuffled.data.names = out.data.names;
    for (std::size_t i = 0; i < n; ++i)
    {
      for (std::size_t j = 0; j < p; ++j)
      {
        shuffled.data.at(i, j) = out.data.at(perm[i], j);
      }
      shuffled.labels.push_back(out.labels[perm[i]]);
    }
    return shuffled;
  }
  return out;
}

MixtureSpec scenario1_spec(uint64_t seed)
{
  constexpr std::size_t p = 20;
  const std::vector<double> sizes{1000, 500, 250, 250, 250, 250, 125, 125, 125, 125};
  Rng rng = Rng::stream(seed, {0x7363656e31});
  MixtureSpec spec;
  spec.dims = p;
  spec.exact_counts = true;
  std::set<std::vector<double>> means;
  for (const double size : sizes)
  {
    MixtureComponent c;
    c.weight = size / static_cast<double>(kScenario1Rows);
    do
    {
      c.mean.assign(p, 0.0);
      for (auto& v : c.mean)
      {
        v = rng.below(2) ? 6.0 : 0.0;
      }
    } while (!means.insert(c.mean).second);

    // Random correlation from a normalized Gram matrix of Gaussian rows.
    Eigen::MatrixXd a(p, p);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
    {
      for (Eigen::Index j = 0; j < a.cols(); ++j)
      {
        a(i, j) = rng.normal();
      }
    }
    const Eigen::MatrixXd gram = a * a.transpose();
    Eigen::VectorXd sd(p);
    for (auto& v : sd)
    {
      v = std::sqrt(rng.uniform(0.5, 3.0));
    }
    c.cov.resize(p * p);
    for (std::size_t i = 0; i < p; ++i)
    {
      for (std::size_t j = 0; j < p; ++j)
      {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        const double corr = gram(ii, jj) / std::sqrt(gram(ii, ii) * gram(jj, jj));
        c.cov[i * p + j] = corr * sd(ii) * sd(jj);
      }
    }
    spec.components.push_back(std::move(c));
  }
  return spec;
}

}  // namespace modeclust
