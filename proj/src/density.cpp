#include "modeclust/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "modeclust/dipstat.hpp"
#include "modeclust/errors.hpp"
#include "modeclust/rng.hpp"

namespace modeclust
{
namespace
{
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTubeShrink = 0.9;

void check_distinct_sorted(std::span<const double> xs, const char* what)
{
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    if (!std::isfinite(xs[i]))
    {
      throw InputError(std::string(what) + ": non-finite value at index " +
                       std::to_string(i));
    }
    if (i > 0 && !(xs[i] > xs[i - 1]))
    {
      throw InputError(std::string(what) +
                       ": values must be sorted and distinct (run the noise "
                       "phase first)");
    }
  }
}

// Differences F_n - F at every extreme point: the left limit and the value
// at each data point, plus the zeros outside the range.
std::vector<double> edf_differences(std::span<const double> model_at_points)
{
  const std::size_t n = model_at_points.size();
  const double dn = static_cast<double>(n);
  std::vector<double> diff;
  diff.reserve(2 * n + 2);
  diff.push_back(0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    diff.push_back(static_cast<double>(i) / dn - model_at_points[i]);
    diff.push_back(static_cast<double>(i + 1) / dn - model_at_points[i]);
  }
  diff.push_back(0.0);
  return diff;
}

double interp_log(double n, double n0, double n1, double v0, double v1)
{
  const double w = (std::log(n) - std::log(n0)) / (std::log(n1) - std::log(n0));
  return (1.0 - w) * v0 + w * v1;
}

}  // namespace

std::vector<double> kuiper_distances(std::span<const double> diff, int kappa)
{
  if (kappa < 1)
  {
    throw ConfigError("kuiper_distances: kappa must be positive");
  }
  const auto k = static_cast<std::size_t>(kappa);
  // closed[j]: best total over j finished intervals. up/down[j]: the same
  // with interval j + 1 open, started at a low / high point.
  std::vector<double> closed(k + 1, kNegInf);
  std::vector<double> up(k, kNegInf);
  std::vector<double> down(k, kNegInf);
  closed[0] = 0.0;
  for (const double v : diff)
  {
    for (std::size_t j = k; j-- > 0;)
    {
      closed[j + 1] = std::max({closed[j + 1], up[j] + v, down[j] - v});
    }
    for (std::size_t j = 0; j < k; ++j)
    {
      up[j] = std::max(up[j], closed[j] - v);
      down[j] = std::max(down[j], closed[j] + v);
    }
  }
  std::vector<double> out(k);
  double best = 0.0;
  for (std::size_t j = 1; j <= k; ++j)
  {
    best = std::max(best, closed[j]);
    out[j - 1] = best;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kuiper table

std::vector<std::size_t> default_kuiper_grid()
{
  return {4, 6, 10, 20, 50, 100, 200, 400, 1000, 2000, 5000, 10000};
}

KuiperTable build_kuiper_table(std::vector<std::size_t> n_grid, uint64_t trials,
                               uint64_t seed, int kappa, double level)
{
  if (kappa < 1 || trials < 1000 || !(level > 0.0 && level < 1.0))
  {
    throw ConfigError("build_kuiper_table: need kappa >= 1, trials >= 1000 "
                      "and level in (0, 1)");
  }
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  if (n_grid.empty() || n_grid.front() < 2)
  {
    throw ConfigError("build_kuiper_table: grid sizes must be at least 2");
  }

  KuiperTable table;
  table.kappa = kappa;
  table.level = level;
  table.trials = trials;
  table.seed = seed;
  table.n_grid = n_grid;
  const auto k = static_cast<std::size_t>(kappa);
  for (const std::size_t n : n_grid)
  {
    // stats[j][t]: scaled j-Kuiper distance of trial t.
    std::vector<std::vector<double>> stats(k, std::vector<double>(trials));
    std::vector<double> u(n);
    for (uint64_t t = 0; t < trials; ++t)
    {
      Rng rng = Rng::stream(seed, {0x4b75, n, t});
      for (auto& v : u)
      {
        v = rng.uniform();
      }
      std::sort(u.begin(), u.end());
      const auto d = kuiper_distances(edf_differences(u), kappa);
      for (std::size_t j = 0; j < k; ++j)
      {
        stats[j][t] = std::sqrt(static_cast<double>(n)) * d[j];
      }
    }
    // Joint calibration: a trial is covered at marginal level b when each of
    // its distances ranks at or below b within its own column. Pick the
    // smallest b covering `level` of the trials.
    std::vector<std::vector<double>> sorted = stats;
    for (auto& col : sorted)
    {
      std::sort(col.begin(), col.end());
    }
    std::vector<std::size_t> worst_rank(trials, 0);
    for (std::size_t j = 0; j < k; ++j)
    {
      for (uint64_t t = 0; t < trials; ++t)
      {
        const auto rank = static_cast<std::size_t>(
            std::upper_bound(sorted[j].begin(), sorted[j].end(), stats[j][t]) -
            sorted[j].begin());
        worst_rank[t] = std::max(worst_rank[t], rank);
      }
    }
    std::sort(worst_rank.begin(), worst_rank.end());
    const auto pos = static_cast<std::size_t>(
        std::ceil(level * static_cast<double>(trials))) - 1;
    const std::size_t rank = std::max<std::size_t>(1, worst_rank[pos]);
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j)
    {
      row[j] = sorted[j][rank - 1];
    }
    table.scaled.push_back(std::move(row));
  }
  return table;
}

std::vector<double> KuiperTable::bounds(std::size_t n) const
{
  if (n_grid.empty())
  {
    throw InputError("Kuiper table is empty");
  }
  const double dn = static_cast<double>(n);
  std::vector<double> row;
  if (n <= n_grid.front())
  {
    row = scaled.front();
  }
  else if (n >= n_grid.back())
  {
    row = scaled.back();
  }
  else
  {
    const auto it = std::upper_bound(n_grid.begin(), n_grid.end(), n);
    const auto g = static_cast<std::size_t>(it - n_grid.begin());
    row.resize(scaled[g].size());
    for (std::size_t j = 0; j < row.size(); ++j)
    {
      row[j] = interp_log(dn, static_cast<double>(n_grid[g - 1]),
                          static_cast<double>(n_grid[g]), scaled[g - 1][j],
                          scaled[g][j]);
    }
  }
  for (auto& v : row)
  {
    v /= std::sqrt(dn);
  }
  return row;
}

void KuiperTable::validate() const
{
  if (kappa < 1 || trials < 1000 || n_grid.empty() ||
      scaled.size() != n_grid.size() ||
      !std::is_sorted(n_grid.begin(), n_grid.end()))
  {
    throw InputError("malformed Kuiper table");
  }
  for (const auto& row : scaled)
  {
    if (row.size() != static_cast<std::size_t>(kappa) ||
        !std::is_sorted(row.begin(), row.end()))
    {
      throw InputError("malformed Kuiper table row");
    }
  }
}

void to_json(nlohmann::json& j, const KuiperTable& t)
{
  j = nlohmann::json{{"format", "modeclust-kuiper"}, {"version", 1},
                     {"kappa", t.kappa},            {"level", t.level},
                     {"trials", t.trials},          {"seed", t.seed},
                     {"n_grid", t.n_grid},          {"scaled", t.scaled}};
}

void from_json(const nlohmann::json& j, KuiperTable& t)
{
  if (j.value("format", std::string{}) != "modeclust-kuiper" ||
      j.value("version", 0) != 1)
  {
    throw InputError("not a version-1 Kuiper table file");
  }
  j.at("kappa").get_to(t.kappa);
  j.at("level").get_to(t.level);
  j.at("trials").get_to(t.trials);
  j.at("seed").get_to(t.seed);
  j.at("n_grid").get_to(t.n_grid);
  j.at("scaled").get_to(t.scaled);
  t.validate();
}

void save_kuiper_table(const KuiperTable& t, const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw InputError("cannot write " + path.string());
  }
  out << nlohmann::json(t).dump() << '\n';
}

KuiperTable load_kuiper_table(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw InputError("cannot read Kuiper table " + path.string());
  }
  nlohmann::json j;
  try
  {
    in >> j;
  }
  catch (const nlohmann::json::exception& e)
  {
    throw InputError(path.string() + ": " + e.what());
  }
  return j.get<KuiperTable>();
}

const KuiperTable& KuiperTable::bundled()
{
  static const KuiperTable table =
      load_kuiper_table(bundled_table_dir() / "kuiper_k19.json");
  return table;
}

// ---------------------------------------------------------------------------
// Taut string

TautStringFit taut_string_at(std::span<const double> x, double tube)
{
  const std::size_t n = x.size();
  if (n < 2)
  {
    throw InputError("taut_string: need at least two points");
  }
  const double dn = static_cast<double>(n);
  const auto lower = [&](std::size_t i) {
    if (i == 0) return 0.0;
    if (i == n - 1) return 1.0;
    return static_cast<double>(i + 1) / dn - tube;
  };
  const auto upper = [&](std::size_t i) {
    if (i == 0) return 0.0;
    if (i == n - 1) return 1.0;
    return static_cast<double>(i) / dn + tube;
  };

  TautStringFit fit;
  fit.tube = tube;
  std::vector<std::size_t> knots{0};
  fit.knot_y.push_back(0.0);

  // Shoot from the current apex, narrowing the cone of feasible slopes,
  // until a bound falls outside it; the string then bends at the point that
  // last narrowed the cone on the opposite side.
  std::size_t a = 0;
  double ya = 0.0;
  while (a < n - 1)
  {
    double smax = std::numeric_limits<double>::infinity();
    double smin = kNegInf;
    std::size_t imax = a;
    std::size_t imin = a;
    std::size_t next = n - 1;
    double ynext = 1.0;
    for (std::size_t j = a + 1; j < n; ++j)
    {
      const double dx = x[j] - x[a];
      const double su = (upper(j) - ya) / dx;
      const double sl = (lower(j) - ya) / dx;
      if (sl > smax)
      {
        next = imax;
        ynext = upper(imax);
        break;
      }
      if (su < smin)
      {
        next = imin;
        ynext = lower(imin);
        break;
      }
      if (su <= smax)
      {
        smax = su;
        imax = j;
      }
      if (sl >= smin)
      {
        smin = sl;
        imin = j;
      }
    }
    knots.push_back(next);
    fit.knot_y.push_back(ynext);
    a = next;
    ya = ynext;
  }

  fit.density.resize(n - 1);
  for (std::size_t s = 0; s + 1 < knots.size(); ++s)
  {
    const double slope = (fit.knot_y[s + 1] - fit.knot_y[s]) /
                         (x[knots[s + 1]] - x[knots[s]]);
    for (std::size_t i = knots[s]; i < knots[s + 1]; ++i)
    {
      fit.density[i] = std::max(0.0, slope);
    }
  }
  for (const std::size_t k : knots)
  {
    fit.knot_x.push_back(x[k]);
  }

  // Pieces of constant density, merging neighbours with equal values.
  struct Piece
  {
    std::size_t first, last;
    double value;
  };
  std::vector<Piece> pieces;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s)
  {
    const double v = fit.density[knots[s]];
    if (!pieces.empty() &&
        std::abs(pieces.back().value - v) <=
            1e-12 * std::max(std::abs(v), std::abs(pieces.back().value)))
    {
      pieces.back().last = knots[s + 1];
      continue;
    }
    pieces.push_back({knots[s], knots[s + 1], v});
  }
  const auto interval = [&](const Piece& p) {
    return ModalInterval{p.first, p.last, x[p.first], x[p.last]};
  };
  for (std::size_t p = 0; p < pieces.size(); ++p)
  {
    const double left = p > 0 ? pieces[p - 1].value : kNegInf;
    const double right = p + 1 < pieces.size() ? pieces[p + 1].value : kNegInf;
    const double v = pieces[p].value;
    if (v > left && v > right)
    {
      fit.modes.push_back(interval(pieces[p]));
    }
    else if (p > 0 && p + 1 < pieces.size() && v < left && v < right)
    {
      fit.antimodes.push_back(interval(pieces[p]));
    }
  }
  return fit;
}

TautStringFit taut_string(std::span<const double> sorted, int kappa)
{
  return taut_string(sorted, kappa, KuiperTable::bundled());
}

TautStringFit taut_string(std::span<const double> x, int kappa,
                          const KuiperTable& table)
{
  const std::size_t n = x.size();
  if (n < 4)
  {
    throw InputError("taut_string: need at least 4 points, got " +
                     std::to_string(n));
  }
  check_distinct_sorted(x, "taut_string");
  if (kappa < 1 || kappa > table.kappa)
  {
    throw ConfigError("taut_string: kappa must be in 1.." +
                      std::to_string(table.kappa));
  }
  const double dn = static_cast<double>(n);
  const auto bounds = table.bounds(n);

  // Widest useful tube: the straight line between the pins fits inside it.
  double tube = 0.5 / dn;
  for (std::size_t i = 1; i + 1 < n; ++i)
  {
    const double line = (x[i] - x[0]) / (x[n - 1] - x[0]);
    tube = std::max({tube, static_cast<double>(i + 1) / dn - line,
                     line - static_cast<double>(i) / dn});
  }
  tube *= 1.0 + 1e-12;

  const double floor = 0.5 / dn;
  std::vector<double> model(n);
  for (;;)
  {
    TautStringFit fit = taut_string_at(x, tube);
    fit.kappa = kappa;
    if (tube <= floor)
    {
      return fit;
    }
    // Fitted df at the data points.
    std::size_t s = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
      while (s + 2 < fit.knot_x.size() && fit.knot_x[s + 1] <= x[i])
      {
        ++s;
      }
      const double w =
          (x[i] - fit.knot_x[s]) / (fit.knot_x[s + 1] - fit.knot_x[s]);
      model[i] = fit.knot_y[s] + w * (fit.knot_y[s + 1] - fit.knot_y[s]);
    }
    const auto d = kuiper_distances(edf_differences(model), kappa);
    bool adequate = true;
    for (std::size_t j = 0; j < d.size(); ++j)
    {
      adequate = adequate && d[j] <= bounds[j];
    }
    if (adequate)
    {
      return fit;
    }
    tube = std::max(floor, tube * kTubeShrink);
  }
}

ModalSplit antimode_cutpoints(const TautStringFit& fit,
                              std::span<const double> sorted)
{
  if (fit.modes.size() < 2)
  {
    throw std::logic_error("antimode_cutpoints: fit is unimodal");
  }
  ModalSplit split;
  for (const auto& am : fit.antimodes)
  {
    if (am.last >= sorted.size())
    {
      throw InputError("antimode_cutpoints: fit does not match the sample");
    }
    double sum = 0.0;
    for (std::size_t i = am.first; i <= am.last; ++i)
    {
      sum += sorted[i];
    }
    split.cutpoints.push_back(sum / static_cast<double>(am.last - am.first + 1));
  }
  std::size_t begin = 0;
  for (const double c : split.cutpoints)
  {
    const auto end = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
    split.groups.emplace_back(begin, end);
    begin = end;
  }
  split.groups.emplace_back(begin, sorted.size());
  return split;
}

// ---------------------------------------------------------------------------
// k-medoids

MedoidPartition kmedoids_1d(std::span<const double> x, std::size_t k)
{
  const std::size_t n = x.size();
  if (k == 0 || k > n)
  {
    throw InputError("kmedoids_1d: need 1 <= k <= n (k = " + std::to_string(k) +
                     ", n = " + std::to_string(n) + ")");
  }
  for (std::size_t i = 1; i < n; ++i)
  {
    if (!(x[i] >= x[i - 1]))
    {
      throw InputError("kmedoids_1d: sample must be sorted and finite");
    }
  }
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    prefix[i + 1] = prefix[i] + x[i];
  }
  // Cost of [i, j) around its lower median.
  const auto cost = [&](std::size_t i, std::size_t j) {
    const std::size_t m = i + (j - i - 1) / 2;
    const double xm = x[m];
    return (prefix[j] - prefix[m]) - static_cast<double>(j - m) * xm +
           static_cast<double>(m - i) * xm - (prefix[m] - prefix[i]);
  };

  // best[g][i]: cost of splitting x[i, n) into g + 1 groups; cut[g][i] the
  // end of the first of them. Scanning cuts left to right with a strict
  // comparison keeps the leftmost first cut on ties.
  std::vector<std::vector<double>> best(k, std::vector<double>(n + 1, 0.0));
  std::vector<std::vector<std::size_t>> cut(k, std::vector<std::size_t>(n + 1, n));
  for (std::size_t i = 0; i < n; ++i)
  {
    best[0][i] = cost(i, n);
  }
  for (std::size_t g = 1; g < k; ++g)
  {
    for (std::size_t i = 0; i + g < n; ++i)
    {
      double b = std::numeric_limits<double>::infinity();
      std::size_t arg = i + 1;
      for (std::size_t j = i + 1; j + g <= n; ++j)
      {
        const double c = cost(i, j) + best[g - 1][j];
        if (c < b)
        {
          b = c;
          arg = j;
        }
      }
      best[g][i] = b;
      cut[g][i] = arg;
    }
  }

  MedoidPartition out;
  std::size_t i = 0;
  for (std::size_t g = k; g-- > 0;)
  {
    const std::size_t j = g == 0 ? n : cut[g][i];
    out.split.groups.emplace_back(i, j);
    i = j;
  }
  for (std::size_t g = 0; g < out.split.groups.size(); ++g)
  {
    const auto [b, e] = out.split.groups[g];
    const double medoid = x[b + (e - b - 1) / 2];
    out.medoids.push_back(medoid);
    for (std::size_t t = b; t < e; ++t)
    {
      out.cost += std::abs(x[t] - medoid);
    }
    if (g > 0)
    {
      out.split.cutpoints.push_back(0.5 * (x[b - 1] + x[b]));
    }
  }
  return out;
}

}  // namespace modeclust
