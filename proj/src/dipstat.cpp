#include "modeclust/dipstat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

#include "modeclust/errors.hpp"
#include "modeclust/rng.hpp"

namespace modeclust
{
namespace
{
void check_sorted_finite(std::span<const double> xs, const char* what)
{
  if (xs.empty())
  {
    throw InputError(std::string(what) + ": empty sample");
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    if (!std::isfinite(xs[i]))
    {
      throw InputError(std::string(what) + ": non-finite value at index " +
                       std::to_string(i));
    }
    if (i > 0 && xs[i] < xs[i - 1])
    {
      throw InputError(std::string(what) + ": sample is not sorted");
    }
  }
}

// Scratch index arrays reused across calls on the same thread.
struct DipWorkspace
{
  std::vector<int> mn, mj, gcm, lcm;

  void resize(std::size_t n)
  {
    if (mn.size() < n + 2)
    {
      mn.resize(n + 2);
      mj.resize(n + 2);
      gcm.resize(n + 2);
      lcm.resize(n + 2);
    }
  }
};

}  // namespace

// Hartigan & Hartigan (1985) / AS 217, working with n * distance so the
// running values are integers plus interpolation terms. Indices are 1-based.
double detail::dip_unchecked(std::span<const double> xs)
{
  const int n = static_cast<int>(xs.size());
  const double two_n = 2.0 * n;
  if (n < 2 || xs[n - 1] == xs[0])
  {
    return 1.0 / two_n;
  }

  thread_local DipWorkspace ws;
  ws.resize(xs.size());
  int* mn = ws.mn.data();
  int* mj = ws.mj.data();
  int* gcm = ws.gcm.data();
  int* lcm = ws.lcm.data();
  const double* x = xs.data() - 1;

  // Indices over which combination is necessary for the convex minorant.
  mn[1] = 1;
  for (int j = 2; j <= n; ++j)
  {
    mn[j] = j - 1;
    for (;;)
    {
      const int mnj = mn[j];
      const int mnmnj = mn[mnj];
      if (mnj == 1 || (x[j] - x[mnj]) * (mnj - mnmnj) <
                          (x[mnj] - x[mnmnj]) * (j - mnj))
      {
        break;
      }
      mn[j] = mnmnj;
    }
  }
  // ... and for the concave majorant.
  mj[n] = n;
  for (int k = n - 1; k >= 1; --k)
  {
    mj[k] = k + 1;
    for (;;)
    {
      const int mjk = mj[k];
      const int mjmjk = mj[mjk];
      if (mjk == n || (x[k] - x[mjk]) * (mjk - mjmjk) <
                          (x[mjk] - x[mjmjk]) * (k - mjk))
      {
        break;
      }
      mj[k] = mjmjk;
    }
  }

  int low = 1;
  int high = n;
  double dip = 1.0;
  for (;;)
  {
    // Change points of the GCM from high down to low.
    int ic = 1;
    gcm[1] = high;
    do
    {
      const int igcm1 = gcm[ic];
      ++ic;
      gcm[ic] = mn[igcm1];
    } while (gcm[ic] > low);
    const int icx = ic;

    // Change points of the LCM from low up to high.
    ic = 1;
    lcm[1] = low;
    do
    {
      const int lcm1 = lcm[ic];
      ++ic;
      lcm[ic] = mj[lcm1];
    } while (lcm[ic] < high);
    const int icv = ic;

    int ig = icx;
    int ih = icv;
    int ix = icx - 1;
    int iv = 2;
    double d = 0.0;
    if (icx != 2 || icv != 2)
    {
      do
      {
        const int igcmx = gcm[ix];
        const int lcmiv = lcm[iv];
        if (igcmx > lcmiv)
        {
          // Next point comes from the GCM.
          const int igcm = gcm[ix];
          const int igcm1 = gcm[ix + 1];
          const double a = lcmiv - igcm1 + 1;
          const double b = igcm - igcm1;
          const double dx =
              a - ((x[lcmiv] - x[igcm1]) * b) / (x[igcm] - x[igcm1]);
          ++iv;
          if (dx >= d)
          {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        }
        else
        {
          // Next point comes from the LCM.
          const int lcmiv1 = lcm[iv - 1];
          const double a = lcmiv - lcmiv1;
          const double b = igcmx - lcmiv1 - 1;
          const double dx =
              (x[igcmx] - x[lcmiv1]) * a / (x[lcmiv] - x[lcmiv1]) - b;
          --ix;
          if (dx >= d)
          {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        if (ix < 1)
        {
          ix = 1;
        }
        if (iv > icv)
        {
          iv = icv;
        }
      } while (gcm[ix] != lcm[iv]);
    }
    else
    {
      d = 1.0;
    }

    if (d < dip)
    {
      break;
    }

    double dl = 0.0;
    for (int j = ig; j < icx; ++j)
    {
      double temp = 1.0;
      const int jb = gcm[j + 1];
      const int je = gcm[j];
      if (je - jb > 1 && x[je] != x[jb])
      {
        const double slope = (je - jb) / (x[je] - x[jb]);
        for (int jr = jb; jr <= je; ++jr)
        {
          const double t = (jr - jb + 1) - (x[jr] - x[jb]) * slope;
          temp = std::max(temp, t);
        }
      }
      dl = std::max(dl, temp);
    }

    double du = 0.0;
    for (int k = ih; k < icv; ++k)
    {
      double temp = 1.0;
      const int kb = lcm[k];
      const int ke = lcm[k + 1];
      if (ke - kb > 1 && x[ke] != x[kb])
      {
        const double slope = (ke - kb) / (x[ke] - x[kb]);
        for (int kr = kb; kr <= ke; ++kr)
        {
          const double t = (x[kr] - x[kb]) * slope - (kr - kb - 1);
          temp = std::max(temp, t);
        }
      }
      du = std::max(du, temp);
    }

    dip = std::max(dip, std::max(dl, du));
    const int new_low = gcm[ig];
    const int new_high = lcm[ih];
    if (new_low == low && new_high == high)
    {
      break;
    }
    low = new_low;
    high = new_high;
  }
  return dip / two_n;
}

DipResult dip_statistic(std::span<const double> sorted)
{
  check_sorted_finite(sorted, "dip_statistic");
  return {detail::dip_unchecked(sorted), sorted.size()};
}

namespace
{
// prefix[s] = s * dip(x[0, s)) / n, suffix[s] = (n - s) * dip(x[s, n)) / n,
// filled for the split positions the k-dip can use.
void weighted_end_dips(std::span<const double> x, std::size_t lo_split,
                       std::size_t hi_split, std::vector<double>& prefix,
                       std::vector<double>& suffix)
{
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  prefix.assign(n + 1, std::numeric_limits<double>::infinity());
  suffix.assign(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t s = 2; s <= hi_split; ++s)
  {
    prefix[s] = s * detail::dip_unchecked(x.first(s)) / dn;
  }
  for (std::size_t s = lo_split; s + 2 <= n; ++s)
  {
    suffix[s] = (n - s) * detail::dip_unchecked(x.subspan(s)) / dn;
  }
}

double two_dip(std::span<const double> x)
{
  const std::size_t n = x.size();
  std::vector<double> prefix;
  std::vector<double> suffix;
  weighted_end_dips(x, 2, n - 2, prefix, suffix);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 2; s + 2 <= n; ++s)
  {
    best = std::min(best, std::max(prefix[s], suffix[s]));
  }
  return best;
}

double three_dip(std::span<const double> x)
{
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  std::vector<double> prefix;
  std::vector<double> suffix;
  weighted_end_dips(x, 4, n - 4, prefix, suffix);

  struct Pair
  {
    double bound;
    uint32_t s1;
    uint32_t s2;
  };
  std::vector<Pair> pairs;
  pairs.reserve((n - 4) * (n - 4) / 2);
  for (std::size_t s1 = 2; s1 + 4 <= n; ++s1)
  {
    for (std::size_t s2 = s1 + 2; s2 + 2 <= n; ++s2)
    {
      pairs.push_back({std::max(prefix[s1], suffix[s2]),
                       static_cast<uint32_t>(s1), static_cast<uint32_t>(s2)});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.bound, a.s1, a.s2) < std::tie(b.bound, b.s1, b.s2);
  });

  double best = std::numeric_limits<double>::infinity();
  for (const Pair& p : pairs)
  {
    if (p.bound >= best)
    {
      break;
    }
    const std::size_t len = p.s2 - p.s1;
    const double middle =
        len * detail::dip_unchecked(x.subspan(p.s1, len)) / dn;
    best = std::min(best, std::max(p.bound, middle));
  }
  return best;
}

}  // namespace

DipResult kdip_statistic(std::span<const double> sorted, int k)
{
  if (k != 2 && k != 3)
  {
    throw UnsupportedError("kdip_statistic: only k = 2 and k = 3 are supported");
  }
  check_sorted_finite(sorted, "kdip_statistic");
  if (sorted.size() < static_cast<std::size_t>(2 * k))
  {
    throw InputError("kdip_statistic: need at least 2k observations");
  }
  const double stat = (k == 2) ? two_dip(sorted) : three_dip(sorted);
  return {stat, sorted.size()};
}

// ---------------------------------------------------------------------------
// Critical-value tables

double CritTable::pvalue(double statistic, std::size_t n) const
{
  if (n_grid.empty())
  {
    throw InputError("CritTable: empty n grid");
  }
  if (n < n_grid.front())
  {
    throw InputError("CritTable: n = " + std::to_string(n) +
                     " is below the smallest tabulated size " +
                     std::to_string(n_grid.front()));
  }
  const auto tail = [&](std::size_t g) {
    const double scaled =
        statistic * std::sqrt(static_cast<double>(n) / n_grid[g]);
    const auto& stats = null_stats[g];
    const auto it = std::lower_bound(stats.begin(), stats.end(), scaled);
    return static_cast<double>(stats.end() - it) / stats.size();
  };

  const auto upper = std::lower_bound(n_grid.begin(), n_grid.end(), n);
  if (upper == n_grid.end())
  {
    return tail(n_grid.size() - 1);
  }
  const auto hi = static_cast<std::size_t>(upper - n_grid.begin());
  if (*upper == n)
  {
    return tail(hi);
  }
  const std::size_t lo = hi - 1;
  const double t = (std::log(static_cast<double>(n)) -
                    std::log(static_cast<double>(n_grid[lo]))) /
                   (std::log(static_cast<double>(n_grid[hi])) -
                    std::log(static_cast<double>(n_grid[lo])));
  return (1.0 - t) * tail(lo) + t * tail(hi);
}

void CritTable::validate() const
{
  if (k < 1 || k > 3)
  {
    throw InputError("CritTable: k must be 1, 2 or 3");
  }
  if (trials < 1000)
  {
    throw InputError("CritTable: at least 1000 trials required");
  }
  if (n_grid.empty() || null_stats.size() != n_grid.size())
  {
    throw InputError("CritTable: n grid and statistics disagree");
  }
  for (std::size_t g = 0; g < n_grid.size(); ++g)
  {
    if (g > 0 && n_grid[g] <= n_grid[g - 1])
    {
      throw InputError("CritTable: n grid must be strictly increasing");
    }
    if (null_stats[g].size() != trials ||
        !std::is_sorted(null_stats[g].begin(), null_stats[g].end()))
    {
      throw InputError("CritTable: statistics for n = " +
                       std::to_string(n_grid[g]) +
                       " are missing or unsorted");
    }
  }
}

std::vector<std::size_t> default_n_grid(int k)
{
  switch (k)
  {
    case 1:
      return {4, 6, 8, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
    case 2:
      return {4, 6, 10, 20, 50, 100, 200, 399};
    case 3:
      return {6, 10, 20, 50, 100, 200, 399};
    default:
      throw UnsupportedError("no critical-value tables for k > 3");
  }
}

uint64_t default_trials(int k) { return k == 1 ? 10000 : 2000; }

CritTable build_crit_table(int k, std::vector<std::size_t> n_grid,
                           uint64_t trials, uint64_t seed, unsigned threads)
{
  if (k < 1 || k > 3)
  {
    throw UnsupportedError("no critical-value tables for k > 3");
  }
  if (trials < 1000)
  {
    throw ConfigError("build_crit_table: trials must be at least 1000");
  }
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  if (n_grid.empty() || n_grid.front() < static_cast<std::size_t>(2 * k))
  {
    throw ConfigError("build_crit_table: grid sizes must be at least 2k");
  }

  CritTable table;
  table.k = k;
  table.trials = trials;
  table.seed = seed;
  table.n_grid = n_grid;
  table.null_stats.resize(n_grid.size());

  threads = std::max(1U, threads);
  for (std::size_t g = 0; g < n_grid.size(); ++g)
  {
    const std::size_t n = n_grid[g];
    auto& stats = table.null_stats[g];
    stats.assign(trials, 0.0);
    const auto work = [&](uint64_t begin, uint64_t end) {
      std::vector<double> sample(n);
      for (uint64_t t = begin; t < end; ++t)
      {
        Rng rng = Rng::stream(seed, {static_cast<uint64_t>(k), n, t});
        for (auto& v : sample)
        {
          v = rng.uniform();
        }
        std::sort(sample.begin(), sample.end());
        stats[t] = (k == 1) ? detail::dip_unchecked(sample)
                            : kdip_statistic(sample, k).statistic;
      }
    };
    if (threads == 1)
    {
      work(0, trials);
    }
    else
    {
      std::vector<std::jthread> pool;
      const uint64_t chunk = (trials + threads - 1) / threads;
      for (uint64_t b = 0; b < trials; b += chunk)
      {
        pool.emplace_back(work, b, std::min(trials, b + chunk));
      }
    }
    std::sort(stats.begin(), stats.end());
  }
  return table;
}

double dip_pvalue(const DipResult& d, const CritTable& table)
{
  if (table.k != 1)
  {
    throw InputError("dip_pvalue: table is for the " +
                     std::to_string(table.k) + "-dip, not the plain dip");
  }
  return table.pvalue(d.statistic, d.n);
}

double kdip_pvalue(const DipResult& d, const CritTable& table)
{
  return table.pvalue(d.statistic, d.n);
}

void to_json(nlohmann::json& j, const CritTable& t)
{
  j = nlohmann::json{{"format", "modeclust-crittable"},
                     {"version", 1},
                     {"k", t.k},
                     {"trials", t.trials},
                     {"seed", t.seed},
                     {"n_grid", t.n_grid},
                     {"null_stats", t.null_stats}};
}

void from_json(const nlohmann::json& j, CritTable& t)
{
  if (j.value("format", std::string{}) != "modeclust-crittable")
  {
    throw InputError("not a critical-value table file");
  }
  if (j.at("version").get<int>() != 1)
  {
    throw InputError("unsupported critical-value table version");
  }
  j.at("k").get_to(t.k);
  j.at("trials").get_to(t.trials);
  j.at("seed").get_to(t.seed);
  j.at("n_grid").get_to(t.n_grid);
  j.at("null_stats").get_to(t.null_stats);
  t.validate();
}

void save_table(const CritTable& t, const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw InputError("cannot write " + path.string());
  }
  out << nlohmann::json(t).dump() << '\n';
}

CritTable load_table(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw InputError("cannot read critical-value table " + path.string());
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
  return j.get<CritTable>();
}

const CritTable& TableSet::for_k(int k) const
{
  switch (k)
  {
    case 1:
      return dip;
    case 2:
      return dip2;
    case 3:
      return dip3;
    default:
      throw UnsupportedError("no critical-value tables for k > 3");
  }
}

TableSet TableSet::load(const std::filesystem::path& dir)
{
  TableSet set;
  set.dip = load_table(dir / "dip_k1.json");
  set.dip2 = load_table(dir / "dip_k2.json");
  set.dip3 = load_table(dir / "dip_k3.json");
  if (set.dip.k != 1 || set.dip2.k != 2 || set.dip3.k != 3)
  {
    throw InputError("table files in " + dir.string() +
                     " have the wrong mode counts");
  }
  return set;
}

std::filesystem::path bundled_table_dir()
{
  if (const char* env = std::getenv("MODECLUST_TABLES"); env && *env)
  {
    return env;
  }
  return std::filesystem::path(MODECLUST_DATA_DIR) / "tables";
}

const TableSet& TableSet::bundled()
{
  static const TableSet set = TableSet::load(bundled_table_dir());
  return set;
}

ModalEstimate estimate_num_modes(std::span<const double> sorted, double alpha,
                                 const TableSet& tables)
{
  ModalEstimate est;
  est.k_hat = 2;
  if (sorted.size() < 4)
  {
    return est;
  }
  const double p2 = kdip_pvalue(kdip_statistic(sorted, 2), tables.dip2);
  est.pvalues.push_back(p2);
  if (p2 > alpha / 2.0 || sorted.size() < 6)
  {
    return est;
  }
  const double p3 = kdip_pvalue(kdip_statistic(sorted, 3), tables.dip3);
  est.pvalues.push_back(p3);
  est.k_hat = (p3 > alpha / 3.0) ? 3 : 4;
  return est;
}

}  // namespace modeclust
