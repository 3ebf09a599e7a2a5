#include "modeclust/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "modeclust/errors.hpp"

namespace modeclust
{
void NoiseConfig::validate() const
{
  if (!(gamma > 0.0) || !std::isfinite(gamma))
  {
    throw ConfigError("gamma must be a positive finite number");
  }
}

namespace
{
void check_finite(std::span<const double> xs, const char* what)
{
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    if (!std::isfinite(xs[i]))
    {
      throw InputError(std::string(what) + ": non-finite value at index " +
                       std::to_string(i));
    }
  }
}
}  // namespace

std::vector<double> break_ties_uniform(std::span<const double> column, Rng& rng)
{
  check_finite(column, "break_ties_uniform");
  std::vector<double> out(column.begin(), column.end());
  std::vector<double> distinct(column.begin(), column.end());
  std::sort(distinct.begin(), distinct.end());
  std::vector<std::size_t> counts;
  {
    std::size_t w = 0;
    for (std::size_t i = 0; i < distinct.size(); ++i)
    {
      if (w > 0 && distinct[i] == distinct[w - 1])
      {
        ++counts.back();
        continue;
      }
      distinct[w++] = distinct[i];
      counts.push_back(1);
    }
    distinct.resize(w);
  }
  const std::size_t q = distinct.size();
  for (double& v : out)
  {
    const auto n = static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin());
    if (counts[n] == 1)
    {
      continue;
    }
    const double lo = n == 0 ? distinct[0] : 0.5 * (distinct[n] + distinct[n - 1]);
    const double hi =
        n + 1 == q ? distinct[q - 1] : 0.5 * (distinct[n] + distinct[n + 1]);
    v = rng.uniform(lo, hi);
  }
  return out;
}

double gaussian_noise_sd(std::span<const double> sorted, std::size_t r,
                         double gamma)
{
  const std::size_t n = sorted.size();
  if (n < 2)
  {
    return 0.0;
  }
  if (r == 0)
  {
    return (sorted[1] - sorted[0]) / (2.0 * gamma);
  }
  if (r + 1 == n)
  {
    return (sorted[n - 1] - sorted[n - 2]) / (2.0 * gamma);
  }
  return (sorted[r + 1] - sorted[r - 1]) / (2.0 * gamma);
}

std::vector<double> perturb_gaussian(std::span<const double> column, double gamma,
                                     Rng& rng)
{
  check_finite(column, "perturb_gaussian");
  NoiseConfig{gamma, 0}.validate();
  std::vector<double> out(column.begin(), column.end());
  const std::size_t n = column.size();
  if (n < 3)
  {
    return out;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> sorted(n);
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r)
  {
    sorted[r] = column[order[r]];
    rank[order[r]] = r;
  }
  for (std::size_t r = 1; r < n; ++r)
  {
    if (sorted[r] == sorted[r - 1])
    {
      throw InputError("perturb_gaussian: column has ties; break them first");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    out[i] = rng.normal(column[i], gaussian_noise_sd(sorted, rank[i], gamma));
  }
  return out;
}

DataMatrix add_noise(const DataMatrix& m, const NoiseConfig& cfg,
                     uint64_t iteration, std::span<const uint64_t> column_keys)
{
  cfg.validate();
  if (!column_keys.empty() && column_keys.size() != m.cols)
  {
    throw InputError("add_noise: one key per column required");
  }
  DataMatrix out = m;
  for (std::size_t j = 0; j < m.cols; ++j)
  {
    const uint64_t key = column_keys.empty() ? j : column_keys[j];
    Rng rng = Rng::stream(cfg.seed, {0x6e6f697365, iteration, key});
    const auto untied = break_ties_uniform(m.column(j), rng);
    const auto noisy = perturb_gaussian(untied, cfg.gamma, rng);
    std::copy(noisy.begin(), noisy.end(), out.column(j).begin());
  }
  return out;
}

}  // namespace modeclust
