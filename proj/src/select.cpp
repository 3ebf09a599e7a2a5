#include "modeclust/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "modeclust/errors.hpp"

namespace modeclust
{
namespace
{
double binom(double n, int k)
{
  if (k < 0 || n < k)
  {
    return 0.0;
  }
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
  {
    r *= (n - k + i) / i;
  }
  return r;
}
}  // namespace

LMoments trimmed_lmoments(std::span<const double> sample, int trim)
{
  const std::size_t n = sample.size();
  if (trim < 0)
  {
    throw ConfigError("trimmed_lmoments: negative trimming");
  }
  if (n < static_cast<std::size_t>(4 + 2 * trim))
  {
    throw InputError("trimmed_lmoments: need at least " +
                     std::to_string(4 + 2 * trim) + " values, got " +
                     std::to_string(n));
  }
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double dn = static_cast<double>(n);
  const int t = trim;
  double l[5] = {0, 0, 0, 0, 0};
  for (int r = 2; r <= 4; ++r)
  {
    const double total = binom(dn, r + 2 * t);
    double acc = 0.0;
    for (int k = 0; k < r; ++k)
    {
      double inner = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
      {
        inner += binom(static_cast<double>(i - 1), r + t - k - 1) *
                 binom(static_cast<double>(n - i), t + k) * x[i - 1];
      }
      acc += ((k % 2) ? -1.0 : 1.0) * binom(r - 1, k) * inner;
    }
    l[r] = acc / (r * total);
  }
  LMoments out;
  out.scale = l[2];
  out.skewness = l[2] > 0 ? l[3] / l[2] : 0.0;
  out.kurtosis = l[2] > 0 ? l[4] / l[2] : 0.0;
  return out;
}

LMoments cluster_lmoments(std::span<const double> sample)
{
  return trimmed_lmoments(sample, sample.size() >= 6 ? 1 : 0);
}

CandidateSummary summarize(const CandidateCluster& c, const DataMatrix& m)
{
  CandidateSummary s;
  s.pvalues = c.pvalues;
  std::vector<double> v(c.rows.size());
  for (std::size_t j = 0; j < m.cols; ++j)
  {
    const auto col = m.column(j);
    for (std::size_t i = 0; i < c.rows.size(); ++i)
    {
      v[i] = col[c.rows[i]];
    }
    s.moments.push_back(cluster_lmoments(v));
  }
  return s;
}

std::vector<ClusterScore> score_candidates(
    std::span<const CandidateSummary> candidates)
{
  if (candidates.empty())
  {
    throw InputError("score_candidates: no candidates");
  }
  std::vector<ClusterScore> scores(candidates.size());
  for (std::size_t r = 0; r < candidates.size(); ++r)
  {
    const auto& c = candidates[r];
    ClusterScore& s = scores[r];
    s.delta = c.pvalues.empty() ? 1.0
                                : *std::min_element(c.pvalues.begin(), c.pvalues.end());
    for (const auto& mo : c.moments)
    {
      const double a = std::abs(mo.scale);
      const double b = std::abs(mo.skewness);
      const double d = std::abs(mo.kurtosis);
      s.sigma_max = std::max(s.sigma_max, a);
      s.sigma_sum += a;
      s.tau_max = std::max(s.tau_max, b);
      s.tau_sum += b;
      s.phi_max = std::max(s.phi_max, d);
      s.phi_sum += d;
    }
  }
  ClusterScore top;
  for (const auto& s : scores)
  {
    top.sigma_max = std::max(top.sigma_max, s.sigma_max);
    top.sigma_sum = std::max(top.sigma_sum, s.sigma_sum);
    top.tau_max = std::max(top.tau_max, s.tau_max);
    top.tau_sum = std::max(top.tau_sum, s.tau_sum);
    top.phi_max = std::max(top.phi_max, s.phi_max);
    top.phi_sum = std::max(top.phi_sum, s.phi_sum);
  }
  const auto norm = [](double v, double max) {
    return max > 0.0 ? 1.0 - v / max : 1.0;
  };
  for (auto& s : scores)
  {
    s.sigma_nm = norm(s.sigma_max, top.sigma_max);
    s.sigma_ns = norm(s.sigma_sum, top.sigma_sum);
    s.tau_nm = norm(s.tau_max, top.tau_max);
    s.tau_ns = norm(s.tau_sum, top.tau_sum);
    s.phi_nm = norm(s.phi_max, top.phi_max);
    s.phi_ns = norm(s.phi_sum, top.phi_sum);
    s.preference = s.delta + (s.sigma_nm + s.sigma_ns) / 2 +
                   (s.tau_nm + s.tau_ns) / 2 + (s.phi_nm + s.phi_ns) / 2;
  }
  return scores;
}

bool OverlapGraph::connected(std::size_t a, std::size_t b) const
{
  const auto& nb = adjacent.at(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

OverlapGraph overlap_graph(std::span<const RowSet> clusters)
{
  OverlapGraph g;
  g.adjacent.resize(clusters.size());
  uint32_t max_row = 0;
  for (const auto& c : clusters)
  {
    if (!c.empty())
    {
      max_row = std::max(max_row, c.back());
    }
  }
  const std::size_t words = max_row / 64 + 1;
  std::vector<std::vector<uint64_t>> bits(clusters.size(),
                                          std::vector<uint64_t>(words, 0));
  for (std::size_t a = 0; a < clusters.size(); ++a)
  {
    for (const uint32_t r : clusters[a])
    {
      bits[a][r / 64] |= uint64_t{1} << (r % 64);
    }
  }
  for (std::size_t a = 0; a < clusters.size(); ++a)
  {
    for (std::size_t b = a + 1; b < clusters.size(); ++b)
    {
      for (std::size_t w = 0; w < words; ++w)
      {
        if (bits[a][w] & bits[b][w])
        {
          g.adjacent[a].push_back(b);
          g.adjacent[b].push_back(a);
          break;
        }
      }
    }
  }
  // Neighbours of b were appended in increasing a, then increasing b.
  for (auto& nb : g.adjacent)
  {
    std::sort(nb.begin(), nb.end());
  }
  return g;
}

std::vector<std::size_t> greedy_mwis(const OverlapGraph& g,
                                     std::span<const double> weights)
{
  if (weights.size() != g.size())
  {
    throw InputError("greedy_mwis: one weight per node required");
  }
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return weights[a] > weights[b];
  });
  std::vector<bool> gone(g.size(), false);
  std::vector<std::size_t> picked;
  for (const std::size_t v : order)
  {
    if (gone[v])
    {
      continue;
    }
    picked.push_back(v);
    gone[v] = true;
    for (const std::size_t u : g.adjacent[v])
    {
      gone[u] = true;
    }
  }
  return picked;
}

IterationClusters cluster_matrix(const DataMatrix& noised, const SearchConfig& cfg,
                                 const TableSet& tables)
{
  ForestSearch search(noised, cfg, tables);
  IterationClusters out;
  out.log = CutPointLog(noised.cols);
  RowSet rows = all_rows(noised.rows);
  for (uint64_t pass = 0; !rows.empty(); ++pass)
  {
    if (rows.size() < cfg.m)
    {
      break;
    }
    ForestSample sample = sample_forest(search, rows, pass);
    out.candidates_per_pass.push_back(sample.candidates.size());
    out.trees_per_pass.push_back(sample.trees);
    if (pass == 0)
    {
      out.log = std::move(sample.log);
    }
    if (sample.candidates.empty())
    {
      break;
    }
    // Lexicographic row order settles preference ties.
    auto& cands = sample.candidates;
    std::sort(cands.begin(), cands.end(),
              [](const CandidateCluster& a, const CandidateCluster& b) {
                return a.rows < b.rows;
              });
    std::vector<CandidateSummary> summaries;
    std::vector<RowSet> sets;
    for (const auto& c : cands)
    {
      summaries.push_back(summarize(c, noised));
      sets.push_back(c.rows);
    }
    const auto scores = score_candidates(summaries);
    std::vector<double> weights;
    for (const auto& s : scores)
    {
      weights.push_back(s.preference);
    }
    const auto picked = greedy_mwis(overlap_graph(sets), weights);
    std::vector<bool> taken(noised.rows, false);
    for (const std::size_t i : picked)
    {
      for (const uint32_t r : sets[i])
      {
        taken[r] = true;
      }
      out.selected.push_back(std::move(sets[i]));
    }
    RowSet rest;
    for (const uint32_t r : rows)
    {
      if (!taken[r])
      {
        rest.push_back(r);
      }
    }
    rows = std::move(rest);
  }
  out.residual = std::move(rows);
  return out;
}

}  // namespace modeclust
