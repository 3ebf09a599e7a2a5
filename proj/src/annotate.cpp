#include "modeclust/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "modeclust/errors.hpp"

namespace modeclust
{
Fraction Fraction::reduced() const
{
  if (num == 0)
  {
    return {0, 1};
  }
  const int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

std::string Fraction::str() const
{
  return std::to_string(num) + "/" + std::to_string(den);
}

Fraction combine_labels(const Fraction& a, const Fraction& b)
{
  if (a.den <= 0 || b.den <= 0)
  {
    throw InputError("combine_labels: non-positive denominator");
  }
  return {a.num * b.den + a.den * b.num, 2 * a.den * b.den};
}

std::string fraction_word(const Fraction& f)
{
  const Fraction r = f.reduced();
  if (r.num == 0) return "lowest";
  if (r.num == r.den) return "highest";
  if (r.num == 1 && r.den == 2) return "medium";
  if (r.num == 1 && r.den == 4) return "medium-low";
  if (r.num == 3 && r.den == 4) return "medium-high";
  if (r.num == 1 && r.den == 3) return "low";
  if (r.num == 2 && r.den == 3) return "high";
  return "level " + r.str();
}

AnnotationBoundaries derive_boundaries(const CutPointLog& log)
{
  AnnotationBoundaries out;
  out.coords.resize(log.coords.size());
  for (std::size_t j = 0; j < log.coords.size(); ++j)
  {
    const auto& sets = log.coords[j];
    if (sets.empty())
    {
      continue;
    }
    // The map is ordered by count, so the first maximum is the smallest a.
    std::size_t a = 0;
    std::size_t best = 0;
    for (const auto& [count, vectors] : sets)
    {
      if (vectors.size() > best)
      {
        best = vectors.size();
        a = count;
      }
    }
    const auto& chosen = sets.at(a);
    std::vector<double> column(chosen.size());
    for (std::size_t b = 0; b < a; ++b)
    {
      std::size_t i = 0;
      for (const auto& v : chosen)
      {
        column[i++] = v[b];
      }
      std::sort(column.begin(), column.end());
      const std::size_t h = column.size() / 2;
      out.coords[j].push_back(column.size() % 2 ? column[h]
                                                : 0.5 * (column[h - 1] + column[h]));
    }
  }
  return out;
}

void LabelingConfig::validate() const
{
  if (!(epsilon >= 0.0 && epsilon < 50.0))
  {
    throw ConfigError("epsilon must lie in [0, 50)");
  }
}

std::string ClusterLabel::key() const
{
  std::string k;
  for (const auto& [j, f] : parts)
  {
    if (!k.empty())
    {
      k += ';';
    }
    k += std::to_string(j) + ':' + f.reduced().str();
  }
  return k;
}

std::string ClusterLabel::render(const std::vector<std::string>& names) const
{
  if (parts.empty())
  {
    return "unannotated";
  }
  std::string s;
  for (const auto& [j, f] : parts)
  {
    if (!s.empty())
    {
      s += "; ";
    }
    s += (j < names.size() ? names[j] : "V" + std::to_string(j + 1)) + ' ' +
         fraction_word(f);
  }
  return s;
}

const Fraction* ClusterLabel::find(std::size_t coord) const
{
  for (const auto& [j, f] : parts)
  {
    if (j == coord)
    {
      return &f;
    }
  }
  return nullptr;
}

double percentile(std::span<const double> sorted, double q)
{
  if (sorted.empty())
  {
    throw InputError("percentile: empty sample");
  }
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<ClusterLabel> label_cluster(const RowSet& rows, const DataMatrix& m,
                                        const AnnotationBoundaries& boundaries,
                                        const LabelingConfig& cfg)
{
  cfg.validate();
  std::vector<ClusterLabel> out(rows.size());
  if (rows.empty())
  {
    return out;
  }
  std::vector<double> v(rows.size());
  for (std::size_t j = 0; j < boundaries.coords.size() && j < m.cols; ++j)
  {
    const auto& k = boundaries.coords[j];
    if (k.empty())
    {
      continue;
    }
    const auto col = m.column(j);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
      v[i] = col[rows[i]];
    }
    std::sort(v.begin(), v.end());
    const auto a = static_cast<int64_t>(k.size());
    if (a == 1)
    {
      const double ql = percentile(v, 50.0 - cfg.epsilon);
      const double qu = percentile(v, 50.0 + cfg.epsilon);
      for (std::size_t i = 0; i < rows.size(); ++i)
      {
        int64_t num = 0;
        if (ql >= k[0])
        {
          num = 1;
        }
        else if (qu <= k[0])
        {
          num = 0;
        }
        else
        {
          num = col[rows[i]] < k[0] ? 0 : 1;
        }
        out[i].parts.emplace_back(j, Fraction{num, 1});
      }
    }
    else
    {
      const double qm = percentile(v, 50.0);
      const auto num = static_cast<int64_t>(
          std::upper_bound(k.begin(), k.end(), qm) - k.begin());
      for (auto& lab : out)
      {
        lab.parts.emplace_back(j, Fraction{num, a});
      }
    }
  }
  return out;
}

void VoteLedger::add_iteration(std::span<const ClusterLabel> row_labels)
{
  if (row_labels.size() != counts.size())
  {
    throw InputError("VoteLedger: expected " + std::to_string(counts.size()) +
                     " labels, got " + std::to_string(row_labels.size()));
  }
  for (std::size_t i = 0; i < row_labels.size(); ++i)
  {
    const std::string k = row_labels[i].key();
    ++counts[i][k];
    labels.try_emplace(k, row_labels[i]);
  }
  ++iterations;
}

std::vector<std::pair<std::string, uint32_t>> VoteLedger::ranked(std::size_t row) const
{
  std::vector<std::pair<std::string, uint32_t>> r(counts.at(row).begin(),
                                                  counts.at(row).end());
  std::stable_sort(r.begin(), r.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return r;
}

ClusterLabel combine(const ClusterLabel& top, const ClusterLabel& other)
{
  ClusterLabel out;
  for (const auto& [j, f] : top.parts)
  {
    const Fraction* g = other.find(j);
    out.parts.emplace_back(j, g ? combine_labels(f, *g) : f);
  }
  return out;
}

std::vector<ClusterLabel> vote(const VoteLedger& ledger, VoteMode mode)
{
  std::vector<ClusterLabel> out(ledger.counts.size());
  const double total = ledger.iterations;
  for (std::size_t i = 0; i < ledger.counts.size(); ++i)
  {
    const auto r = ledger.ranked(i);
    if (r.empty())
    {
      continue;
    }
    const ClusterLabel& first = ledger.labels.at(r[0].first);
    out[i] = first;
    if (mode == VoteMode::max || total == 0)
    {
      continue;
    }
    const auto share = [&](std::size_t k) {
      return k < r.size() ? r[k].second / total : 0.0;
    };
    if (share(0) > 0.5)
    {
      continue;
    }
    if (share(0) > 0.3 && share(1) > 0.2)
    {
      out[i] = combine(first, ledger.labels.at(r[1].first));
    }
    else if (share(0) >= 0.2 && share(0) <= 0.3 && share(1) > 0.15 &&
             share(2) > 0.15)
    {
      out[i] = combine(combine(first, ledger.labels.at(r[1].first)),
                       ledger.labels.at(r[2].first));
    }
  }
  return out;
}

std::vector<int> clustering_from_labels(std::span<const ClusterLabel> labels)
{
  std::unordered_map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels)
  {
    const auto [it, fresh] = ids.try_emplace(l.key(), static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

}  // namespace modeclust
