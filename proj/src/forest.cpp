#include "modeclust/forest.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <string>
#include <thread>

#include "modeclust/errors.hpp"

namespace modeclust
{
void SearchConfig::validate() const
{
  if (!(alpha > 0.0 && alpha < 1.0))
  {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  if (m < 4)
  {
    throw ConfigError("m must be at least 4");
  }
  if (max_antimodes < 1)
  {
    throw ConfigError("max_antimodes must be at least 1");
  }
  if (max_candidates < 1)
  {
    throw ConfigError("the candidate budget must be at least 1");
  }
  if (stall_trees < 1 || max_trees < 1)
  {
    throw ConfigError("stall_trees and max_trees must be at least 1");
  }
  if (threads < 1)
  {
    throw ConfigError("threads must be at least 1");
  }
}

RowSet all_rows(std::size_t n)
{
  RowSet r(n);
  std::iota(r.begin(), r.end(), 0U);
  return r;
}

double CandidateCluster::delta() const
{
  return pvalues.empty() ? 1.0 : *std::min_element(pvalues.begin(), pvalues.end());
}

// ---------------------------------------------------------------------------
// CutPointLog

void CutPointLog::record(std::size_t coord, const std::vector<double>& cuts)
{
  if (coord >= coords.size())
  {
    coords.resize(coord + 1);
  }
  if (!cuts.empty())
  {
    coords[coord][cuts.size()].insert(cuts);
  }
}

void CutPointLog::merge(const CutPointLog& other)
{
  if (other.coords.size() > coords.size())
  {
    coords.resize(other.coords.size());
  }
  for (std::size_t j = 0; j < other.coords.size(); ++j)
  {
    for (const auto& [count, set] : other.coords[j])
    {
      coords[j][count].insert(set.begin(), set.end());
    }
  }
}

bool CutPointLog::empty() const
{
  return std::all_of(coords.begin(), coords.end(),
                     [](const auto& c) { return c.empty(); });
}

std::vector<std::size_t> PartitionTree::leaves_of(TreeNode::Kind kind) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    if (nodes[i].kind == kind)
    {
      out.push_back(i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting one coordinate

namespace
{
struct SortedColumn
{
  std::vector<double> values;
  std::vector<uint32_t> rows;
};

SortedColumn sorted_column(const DataMatrix& m, const RowSet& rows,
                           std::size_t coord)
{
  const auto col = m.column(coord);
  std::vector<std::pair<double, uint32_t>> pairs(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    pairs[i] = {col[rows[i]], rows[i]};
  }
  std::sort(pairs.begin(), pairs.end());
  SortedColumn out;
  out.values.resize(pairs.size());
  out.rows.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
  {
    out.values[i] = pairs[i].first;
    out.rows[i] = pairs[i].second;
  }
  return out;
}
}  // namespace

double coordinate_pvalue(const DataMatrix& m, const RowSet& rows,
                         std::size_t coord, const TableSet& tables)
{
  std::vector<double> v(rows.size());
  const auto col = m.column(coord);
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    v[i] = col[rows[i]];
  }
  std::sort(v.begin(), v.end());
  return dip_pvalue(dip_statistic(v), tables.dip);
}

CoordinateSplit split_coordinate(const DataMatrix& m, const RowSet& rows,
                                 std::size_t coord, const SearchConfig& cfg,
                                 const TableSet& tables)
{
  const SortedColumn sc = sorted_column(m, rows, coord);
  CoordinateSplit out;
  out.pvalue = dip_pvalue(dip_statistic(sc.values), tables.dip);
  if (out.pvalue > cfg.alpha)
  {
    return out;
  }

  ModalSplit split;
  if (sc.values.size() >= kTautStringMinRows)
  {
    out.used_taut_string = true;
    const auto fit = taut_string(sc.values);
    out.modes = static_cast<int>(fit.modes.size());
    if (fit.antimodes.size() > cfg.max_antimodes)
    {
      out.verdict = SplitVerdict::terminate;
      return out;
    }
    if (fit.modes.size() < 2)
    {
      out.verdict = SplitVerdict::no_split;
      return out;
    }
    split = antimode_cutpoints(fit, sc.values);
  }
  else
  {
    const auto est = estimate_num_modes(sc.values, cfg.alpha, tables);
    out.modes = est.k_hat;
    split = kmedoids_1d(sc.values, static_cast<std::size_t>(est.k_hat)).split;
  }

  out.verdict = SplitVerdict::split;
  out.cutpoints = split.cutpoints;
  for (const auto& [b, e] : split.groups)
  {
    RowSet child(sc.rows.begin() + static_cast<std::ptrdiff_t>(b),
                 sc.rows.begin() + static_cast<std::ptrdiff_t>(e));
    std::sort(child.begin(), child.end());
    out.children.push_back(std::move(child));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ForestSearch

std::size_t ForestSearch::RowHash::operator()(const RowSet& r) const noexcept
{
  uint64_t h = splitmix64(r.size());
  for (const uint32_t v : r)
  {
    h = splitmix64(h ^ v);
  }
  return static_cast<std::size_t>(h);
}

ForestSearch::ForestSearch(const DataMatrix& m, const SearchConfig& cfg,
                           const TableSet& tables)
    : m_(m), cfg_(cfg), tables_(tables)
{
  cfg_.validate();
}

ForestSearch::Node& ForestSearch::node(const RowSet& rows)
{
  {
    std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(rows); it != cache_.end())
    {
      return *it->second;
    }
  }
  auto fresh = std::make_unique<Node>();
  fresh->pvalues.resize(m_.cols);
  for (std::size_t j = 0; j < m_.cols; ++j)
  {
    fresh->pvalues[j] = coordinate_pvalue(m_, rows, j, tables_);
  }
  std::lock_guard lock(mutex_);
  // Another thread may have filled the entry meanwhile; its values are equal.
  auto [it, inserted] = cache_.try_emplace(rows, std::move(fresh));
  return *it->second;
}

const std::vector<double>& ForestSearch::pvalues(const RowSet& rows)
{
  return node(rows).pvalues;
}

const CoordinateSplit& ForestSearch::split(const RowSet& rows, std::size_t coord)
{
  Node& nd = node(rows);
  {
    std::lock_guard lock(mutex_);
    if (const auto it = nd.splits.find(coord); it != nd.splits.end())
    {
      return *it->second;
    }
  }
  auto fresh = std::make_shared<const CoordinateSplit>(
      split_coordinate(m_, rows, coord, cfg_, tables_));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = nd.splits.try_emplace(coord, std::move(fresh));
  return *it->second;
}

std::vector<std::size_t> ForestSearch::splittable(const RowSet& rows,
                                                  const std::vector<bool>& used)
{
  const auto& p = pvalues(rows);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < p.size(); ++j)
  {
    if (p[j] <= cfg_.alpha && !used[j] &&
        split(rows, j).verdict == SplitVerdict::split)
    {
      out.push_back(j);
    }
  }
  return out;
}

PartitionTree ForestSearch::grow_tree(const RowSet& rows, std::size_t root,
                                      Rng& rng, CutPointLog* log)
{
  if (root >= m_.cols)
  {
    throw InputError("grow_tree: root coordinate out of range");
  }
  if (rows.size() < cfg_.m || pvalues(rows)[root] > cfg_.alpha)
  {
    throw InputError("grow_tree: root coordinate " + m_.name(root) +
                     " is not multimodal at level alpha");
  }

  PartitionTree tree;
  tree.nodes.push_back({rows, -1, {}, {}, TreeNode::Kind::internal});
  // Depth-first over (node index, coordinates used on the path).
  struct Pending
  {
    std::size_t node;
    std::vector<bool> used;
    bool is_root;
  };
  std::vector<Pending> stack;
  stack.push_back({0, std::vector<bool>(m_.cols, false), true});
  while (!stack.empty())
  {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    // Copy: tree.nodes may reallocate below.
    const RowSet here = tree.nodes[cur.node].rows;
    if (here.size() < cfg_.m)
    {
      tree.nodes[cur.node].kind = TreeNode::Kind::pruned;
      continue;
    }

    // Draw uniformly among coordinates with p <= alpha, discarding draws
    // whose split turns out unusable; the survivor is uniform over the
    // usable ones.
    const CoordinateSplit* chosen = nullptr;
    std::size_t coord = 0;
    if (cur.is_root)
    {
      coord = root;
      chosen = &split(here, root);
    }
    else
    {
      const auto& p = pvalues(here);
      std::vector<std::size_t> pool;
      for (std::size_t j = 0; j < p.size(); ++j)
      {
        if (p[j] <= cfg_.alpha && (cfg_.allow_repeat_coordinate || !cur.used[j]))
        {
          pool.push_back(j);
        }
      }
      while (!pool.empty())
      {
        const auto pick = static_cast<std::size_t>(rng.below(pool.size()));
        const CoordinateSplit& s = split(here, pool[pick]);
        if (s.verdict == SplitVerdict::split || s.verdict == SplitVerdict::terminate)
        {
          coord = pool[pick];
          chosen = &s;
          break;
        }
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      if (chosen == nullptr)
      {
        const auto& pv = pvalues(here);
        const bool unimodal = std::all_of(pv.begin(), pv.end(),
                                          [&](double v) { return v > cfg_.alpha; });
        tree.nodes[cur.node].kind =
            unimodal ? TreeNode::Kind::candidate : TreeNode::Kind::dead_end;
        continue;
      }
    }

    if (chosen->verdict != SplitVerdict::split)
    {
      tree.nodes[cur.node].kind = TreeNode::Kind::dead_end;
      continue;
    }
    if (log != nullptr)
    {
      log->record(coord, chosen->cutpoints);
    }
    tree.nodes[cur.node].coord = static_cast<int>(coord);
    tree.nodes[cur.node].cutpoints = chosen->cutpoints;
    std::vector<bool> used = cur.used;
    used[coord] = true;
    // Push in reverse so children are expanded left to right.
    std::vector<std::size_t> kids;
    for (const auto& child : chosen->children)
    {
      kids.push_back(tree.nodes.size());
      tree.nodes.push_back({child, -1, {}, {}, TreeNode::Kind::internal});
    }
    tree.nodes[cur.node].children = kids;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
    {
      stack.push_back({*it, used, false});
    }
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Sampling

namespace
{
constexpr std::size_t kTreeBatch = 16;

struct TreeOutcome
{
  std::vector<RowSet> leaves;
  CutPointLog log;
};
}  // namespace

ForestSample sample_forest(ForestSearch& search, const RowSet& rows,
                           uint64_t stream)
{
  const SearchConfig& cfg = search.config();
  ForestSample out;
  out.log = CutPointLog(search.matrix().cols);
  if (rows.size() < cfg.m)
  {
    return out;
  }
  const auto roots = search.splittable(rows, std::vector<bool>(search.matrix().cols, false));
  if (roots.empty())
  {
    return out;
  }

  const auto grow = [&](std::size_t t) {
    Rng rng = Rng::stream(cfg.seed, {stream, t});
    const std::size_t root = roots[rng.below(roots.size())];
    TreeOutcome o;
    o.log = CutPointLog(search.matrix().cols);
    const auto tree = search.grow_tree(rows, root, rng, &o.log);
    for (const std::size_t leaf : tree.leaves_of(TreeNode::Kind::candidate))
    {
      o.leaves.push_back(tree.nodes[leaf].rows);
    }
    return o;
  };

  std::set<RowSet> seen;
  std::size_t stall = 0;
  bool done = false;
  const std::size_t batch = cfg.threads > 1 ? kTreeBatch : 1;
  for (std::size_t first = 0; !done && first < cfg.max_trees; first += batch)
  {
    const std::size_t count = std::min(batch, cfg.max_trees - first);
    std::vector<TreeOutcome> outcomes(count);
    if (count == 1)
    {
      outcomes[0] = grow(first);
    }
    else
    {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      const unsigned workers =
          std::min<unsigned>(cfg.threads, static_cast<unsigned>(count));
      for (unsigned w = 0; w < workers; ++w)
      {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < count; i = next++)
          {
            outcomes[i] = grow(first + i);
          }
        });
      }
    }
    for (std::size_t i = 0; i < count && !done; ++i)
    {
      ++out.trees;
      out.log.merge(outcomes[i].log);
      bool fresh = false;
      for (auto& leaf : outcomes[i].leaves)
      {
        if (seen.insert(leaf).second)
        {
          fresh = true;
          CandidateCluster c;
          c.pvalues = search.pvalues(leaf);
          c.rows = std::move(leaf);
          out.candidates.push_back(std::move(c));
          if (out.candidates.size() >= cfg.max_candidates)
          {
            done = true;
            break;
          }
        }
      }
      stall = fresh ? 0 : stall + 1;
      if (stall >= cfg.stall_trees)
      {
        done = true;
      }
    }
  }
  return out;
}

ForestSample sample_forest(const DataMatrix& m, const SearchConfig& cfg,
                           const TableSet& tables)
{
  ForestSearch search(m, cfg, tables);
  return sample_forest(search, all_rows(m.rows), 0);
}

}  // namespace modeclust
