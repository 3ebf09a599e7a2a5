#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <sstream>

#include "modeclust/errors.hpp"
#include "modeclust/eval.hpp"
#include "modeclust/pipeline.hpp"

using namespace modeclust;

namespace
{
DataMatrix iris()
{
  return read_csv(std::filesystem::path(MODECLUST_TEST_DATA) / "iris.csv");
}
}  // namespace

TEST_CASE("an all-unimodal matrix is one cluster")
{
  Rng rng(4);
  DataMatrix m(300, 3);
  for (auto& v : m.values)
  {
    v = rng.normal();
  }
  RunConfig cfg;
  cfg.seed = 3;
  const auto r = run(cfg, m);
  CHECK(std::all_of(r.max_clusters.begin(), r.max_clusters.end(),
                    [](int c) { return c == 0; }));
  CHECK(r.max_labels[0].render(m.names) == "unannotated");
  CHECK(r.iterations[0].clusters == 1);
  CHECK(r.iterations[0].residual_rows == 300);
}

TEST_CASE("runs are reproducible and thread-independent")
{
  RunConfig cfg;
  cfg.iterations = 5;
  cfg.seed = 9;
  const auto data = iris();
  const auto a = report_json(cfg, run(cfg, data)).dump();
  CHECK(report_json(cfg, run(cfg, data)).dump() == a);
  cfg.threads = 4;
  CHECK(report_json(cfg, run(cfg, data)).dump() == a);
  cfg.seed = 10;
  cfg.threads = 1;
  CHECK(report_json(cfg, run(cfg, data)).dump() != a);
}

TEST_CASE("report rows account for every iteration")
{
  RunConfig cfg;
  cfg.iterations = 7;
  cfg.vote = VoteMode::runoff;
  const auto data = iris();
  const auto r = run(cfg, data);
  const auto j = report_json(cfg, r);
  REQUIRE(j["rows"].size() == data.rows);
  for (const auto& row : j["rows"])
  {
    uint32_t total = 0;
    for (const auto& c : row["top_counts"])
    {
      total += c["count"].get<uint32_t>();
    }
    CHECK(total == 7);
    CHECK(row["cluster"] == row["runoff_cluster"]);
  }
  CHECK(j["config"].contains("threads") == false);
  CHECK(r.iteration_clusters.size() == 7);
  for (const auto& parts : r.iteration_partitions)
  {
    std::vector<int> hits(data.rows, 0);
    for (const auto& p : parts)
    {
      for (const uint32_t i : p)
      {
        ++hits[i];
      }
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }

  std::ostringstream csv;
  write_labels_csv(csv, r);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 151);
}

TEST_CASE("single iterations on iris track the species")
{
  std::vector<int> species(150);
  for (std::size_t i = 0; i < 150; ++i)
  {
    species[i] = static_cast<int>(i / 50);
  }
  const auto data = iris();
  std::vector<double> ari;
  for (uint64_t seed = 1; seed <= 9; ++seed)
  {
    RunConfig cfg;
    cfg.seed = seed;
    ari.push_back(adjusted_rand_index(run(cfg, data).max_clusters, species));
  }
  std::sort(ari.begin(), ari.end());
  CHECK(ari[4] > 0.5);
}

TEST_CASE("pca rotation and configuration errors")
{
  RunConfig cfg;
  cfg.pca = 2;
  const auto r = run(cfg, iris());
  CHECK(r.names == std::vector<std::string>{"PC1", "PC2"});
  cfg.pca = 5;
  CHECK_THROWS_AS(run(cfg, iris()), InputError);
  cfg = {};
  cfg.iterations = 0;
  CHECK_THROWS_AS(run(cfg, iris()), ConfigError);
  cfg = {};
  cfg.gamma = -1;
  CHECK_THROWS_AS(run(cfg, iris()), ConfigError);
}
