#include <doctest.h>

#include <vector>

#include "modeclust/annotate.hpp"
#include "modeclust/errors.hpp"

using namespace modeclust;

namespace
{
DataMatrix column(const std::vector<double>& v)
{
  DataMatrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.values.begin());
  m.names = {"x"};
  return m;
}

ClusterLabel label(std::vector<std::pair<std::size_t, Fraction>> parts)
{
  return ClusterLabel{std::move(parts)};
}
}  // namespace

TEST_CASE("fraction words")
{
  CHECK(fraction_word({0, 3}) == "lowest");
  CHECK(fraction_word({2, 2}) == "highest");
  CHECK(fraction_word({2, 4}) == "medium");
  CHECK(fraction_word({1, 3}) == "low");
  CHECK(fraction_word({2, 3}) == "high");
  CHECK(fraction_word({1, 4}) == "medium-low");
  CHECK(fraction_word({6, 8}) == "medium-high");
  CHECK(fraction_word({3, 8}) == "level 3/8");
}

TEST_CASE("combining labels averages the fractions")
{
  const Fraction half = combine_labels({0, 1}, {1, 1});
  CHECK(half.num == 1);
  CHECK(half.den == 2);
  const Fraction f = combine_labels({1, 2}, {1, 1});
  CHECK(f.same_value({3, 4}));
  CHECK(fraction_word(combine_labels(f, {1, 3})) == "level 13/24");
  CHECK_THROWS_AS(combine_labels({1, 0}, {1, 1}), InputError);
}

TEST_CASE("boundaries use the most frequent cut-point count")
{
  CutPointLog log(3);
  log.record(0, {1.0});
  log.record(0, {2.0});
  log.record(0, {4.0});
  log.record(0, {0.0, 5.0});
  log.record(1, {1.0, 3.0});
  log.record(1, {2.0, 5.0});
  log.record(1, {7.0});
  log.record(1, {9.0});
  const auto b = derive_boundaries(log);
  CHECK(b.coords[0] == std::vector<double>{2.0});
  // Counts 1 and 2 tie on two vectors each: the smaller count wins.
  CHECK(b.coords[1] == std::vector<double>{8.0});
  CHECK_FALSE(b.annotated(2));
}

TEST_CASE("percentiles interpolate between order statistics")
{
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(percentile(x, 0) == 1);
  CHECK(percentile(x, 100) == 4);
  CHECK(percentile(x, 50) == doctest::Approx(2.5));
  CHECK(percentile(x, 33) == doctest::Approx(1.99));
  CHECK(percentile(std::vector<double>{5}, 67) == 5);
  CHECK_THROWS_AS(percentile(std::vector<double>{}, 50), InputError);
}

TEST_CASE("single-boundary labels")
{
  AnnotationBoundaries b;
  b.coords = {{0.0}};
  const LabelingConfig cfg;
  const RowSet rows{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  const auto high = label_cluster(rows, column({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), b, cfg);
  for (const auto& l : high)
  {
    CHECK(l.key() == "0:1/1");
    CHECK(l.render({"x"}) == "x highest");
  }
  const auto low = label_cluster(rows, column({-10, -9, -8, -7, -6, -5, -4, -3, -2, -1}), b, cfg);
  CHECK(low[0].key() == "0:0/1");

  // The boundary falls between the 33rd and 67th percentiles: rows split.
  const auto mixed = label_cluster(rows, column({-5, -4, -3, -2, -1, 1, 2, 3, 4, 5}), b, cfg);
  CHECK(mixed[0].key() == "0:0/1");
  CHECK(mixed[4].key() == "0:0/1");
  CHECK(mixed[5].key() == "0:1/1");
  CHECK(mixed[9].key() == "0:1/1");
}

TEST_CASE("multi-boundary labels count boundaries below the median")
{
  AnnotationBoundaries b;
  b.coords = {{-1.0, 1.0, 3.0}};
  const RowSet rows{0, 1, 2, 3, 4};
  const LabelingConfig cfg;
  CHECK(label_cluster(rows, column({-5, -4, -3, -2, -1.5}), b, cfg)[0].key() == "0:0/1");
  CHECK(label_cluster(rows, column({0, 0.5, 1, 1.5, 2}), b, cfg)[0].key() == "0:2/3");
  CHECK(label_cluster(rows, column({0, 0.5, 1, 1.5, 2}), b, cfg)[0].render({"x"}) == "x high");
  CHECK(label_cluster(rows, column({-2, -1.5, -1, -0.5, 0}), b, cfg)[0].key() == "0:1/3");
  CHECK(label_cluster(rows, column({5, 6, 7, 8, 9}), b, cfg)[0].key() == "0:1/1");
}

TEST_CASE("unannotated coordinates and empty clusters")
{
  AnnotationBoundaries b;
  b.coords = {{}};
  const auto l = label_cluster({0, 1}, column({1, 2}), b, {});
  CHECK(l[0].parts.empty());
  CHECK(l[0].render({"x"}) == "unannotated");
  CHECK(label_cluster({}, column({1}), b, {}).empty());
  CHECK_THROWS_AS(label_cluster({0}, column({1}), b, {50.0}), ConfigError);
}

TEST_CASE("max vote and run-off")
{
  const auto a = label(std::vector<std::pair<std::size_t, Fraction>>{{0, {0, 1}}, {1, {1, 1}}});
  const auto b = label(std::vector<std::pair<std::size_t, Fraction>>{{0, {1, 1}}, {1, {1, 1}}});
  const auto c = label(std::vector<std::pair<std::size_t, Fraction>>{{0, {1, 2}}});
  const auto d = label(std::vector<std::pair<std::size_t, Fraction>>{{1, {0, 1}}});

  const auto ledger_for = [](const std::vector<std::pair<ClusterLabel, int>>& votes) {
    VoteLedger l(1);
    for (const auto& [lab, n] : votes)
    {
      for (int i = 0; i < n; ++i)
      {
        l.add_iteration(std::vector<ClusterLabel>{lab});
      }
    }
    return l;
  };

  // Majority wins outright.
  auto l = ledger_for({{a, 6}, {b, 4}});
  CHECK(vote(l, VoteMode::runoff)[0].key() == a.key());
  CHECK(l.ranked(0)[0].second + l.ranked(0)[1].second == l.iterations);

  // 40 / 35 / 25: top two combine coordinate-wise.
  l = ledger_for({{a, 8}, {b, 7}, {d, 5}});
  auto r = vote(l, VoteMode::runoff)[0];
  CHECK(vote(l, VoteMode::max)[0].key() == a.key());
  CHECK(r.render({"x", "y"}) == "x medium; y highest");

  // 40 / 20 / ...: runner-up too weak, keep the top label.
  l = ledger_for({{a, 8}, {b, 4}, {c, 4}, {d, 4}});
  CHECK(vote(l, VoteMode::runoff)[0].key() == a.key());

  // 25 / 25 / 25 / 25: three-way combination, left to right; coordinates
  // missing from the top label are dropped.
  l = ledger_for({{c, 5}, {a, 5}, {b, 5}, {d, 5}});
  const auto ranked = l.ranked(0);
  r = vote(l, VoteMode::runoff)[0];
  const ClusterLabel& top = l.labels.at(ranked[0].first);
  const ClusterLabel want =
      combine(combine(top, l.labels.at(ranked[1].first)), l.labels.at(ranked[2].first));
  CHECK(r.key() == want.key());
  CHECK(r.parts.size() == top.parts.size());

  // 50 / 50 is not a majority; the top two combine.
  l = ledger_for({{a, 5}, {b, 5}});
  CHECK(vote(l, VoteMode::runoff)[0].render({"x", "y"}) == "x medium; y highest");
}

TEST_CASE("clusters are numbered by first appearance")
{
  const auto a = label(std::vector<std::pair<std::size_t, Fraction>>{{0, {0, 1}}});
  const auto b = label(std::vector<std::pair<std::size_t, Fraction>>{{0, {2, 2}}});
  const auto a2 = label(std::vector<std::pair<std::size_t, Fraction>>{{0, {0, 5}}});
  const std::vector<ClusterLabel> labels{b, a, b, a2};
  CHECK(clustering_from_labels(labels) == std::vector<int>{0, 1, 0, 1});
}
