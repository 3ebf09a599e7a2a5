// modeclust command-line front end.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "modeclust/density.hpp"
#include "modeclust/dipstat.hpp"
#include "modeclust/errors.hpp"
#include "modeclust/eval.hpp"
#include "modeclust/matrix.hpp"
#include "modeclust/noise.hpp"
#include "modeclust/pipeline.hpp"

namespace fs = std::filesystem;
using namespace modeclust;

namespace
{
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

struct TablesArgs
{
  fs::path dir;
  unsigned threads = 1;
  uint64_t seed = kDefaultTableSeed;
  std::vector<int> ks{1, 2, 3};
  bool kuiper = true;
};

int tables_build(const TablesArgs& args)
{
  fs::create_directories(args.dir);
  for (const int k : args.ks)
  {
    const auto start = std::chrono::steady_clock::now();
    const auto table = build_crit_table(k, default_n_grid(k), default_trials(k),
                                        args.seed, args.threads);
    const auto path = args.dir / ("dip_k" + std::to_string(k) + ".json");
    save_table(table, path);
    std::cerr << "wrote " << path.string() << " in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                               start)
                     .count()
              << " s\n";
  }
  if (args.kuiper)
  {
    const auto table =
        build_kuiper_table(default_kuiper_grid(), 10000, args.seed);
    const auto path = args.dir / "kuiper_k19.json";
    save_kuiper_table(table, path);
    std::cerr << "wrote " << path.string() << '\n';
  }
  return 0;
}

// Rebuilds a few grid sizes of each table and compares them bit for bit.
int tables_verify(const TablesArgs& args)
{
  int failures = 0;
  for (const int k : args.ks)
  {
    const auto stored =
        load_table(args.dir / ("dip_k" + std::to_string(k) + ".json"));
    const std::vector<std::size_t> probe{stored.n_grid.front()};
    const auto rebuilt =
        build_crit_table(k, probe, stored.trials, stored.seed, args.threads);
    const bool ok = rebuilt.null_stats.front() == stored.null_stats.front();
    std::cout << "dip_k" << k << ": " << (ok ? "ok" : "MISMATCH") << '\n';
    failures += ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

int density_fit(const fs::path& csv, const std::string& column, int kappa,
                uint64_t seed)
{
  const DataMatrix m = read_csv(csv);
  const auto it = std::find(m.names.begin(), m.names.end(), column);
  if (it == m.names.end())
  {
    throw InputError("no column named '" + column + "' in " + csv.string());
  }
  const auto col = m.column(static_cast<std::size_t>(it - m.names.begin()));
  std::vector<double> values(col.begin(), col.end());
  std::sort(values.begin(), values.end());
  const bool tied = std::adjacent_find(values.begin(), values.end()) != values.end();
  if (tied)
  {
    Rng rng(seed);
    values = break_ties_uniform(values, rng);
    std::sort(values.begin(), values.end());
  }
  const auto fit = taut_string(values, kappa);
  nlohmann::json j;
  j["column"] = column;
  j["n"] = values.size();
  j["ties_broken"] = tied;
  j["kappa"] = fit.kappa;
  j["tube"] = fit.tube;
  j["knots"] = {{"x", fit.knot_x}, {"y", fit.knot_y}};
  j["density"] = fit.density;
  const auto intervals = [](const std::vector<ModalInterval>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& m : v)
    {
      a.push_back({m.lo, m.hi});
    }
    return a;
  };
  j["modes"] = intervals(fit.modes);
  j["antimodes"] = intervals(fit.antimodes);
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct RunArgs
{
  fs::path input;
  fs::path out;
  fs::path labels;
  std::string vote = "max";
  RunConfig cfg;
};

std::ofstream open_output(const fs::path& path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw InputError("cannot write " + path.string());
  }
  return out;
}

int run_command(RunArgs args)
{
  if (args.cfg.m < 6)
  {
    throw ConfigError("--m must be at least 6");
  }
  args.cfg.vote = args.vote == "runoff" ? VoteMode::runoff : VoteMode::max;
  const DataMatrix data = read_csv(args.input);
  if (args.cfg.pca > data.cols)
  {
    throw InputError("--pca " + std::to_string(args.cfg.pca) + " exceeds the " +
                     std::to_string(data.cols) + " input columns");
  }
  const auto start = std::chrono::steady_clock::now();
  const RunResult result = run(args.cfg, data);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string report = report_json(args.cfg, result).dump(2) + "\n";
  if (args.out.empty())
  {
    std::cout << report;
  }
  else
  {
    open_output(args.out) << report;
  }
  if (!args.labels.empty())
  {
    auto out = open_output(args.labels);
    write_labels_csv(out, result);
  }
  const auto& clusters = result.clusters(args.cfg.vote);
  const int k = clusters.empty() ? 0 : *std::max_element(clusters.begin(), clusters.end()) + 1;
  std::cerr << data.rows << " rows, " << args.cfg.iterations << " iterations, " << k
            << " clusters (" << args.vote << " vote) in " << seconds << " s\n";
  return 0;
}

struct SimulateArgs
{
  int scenario = 1;
  uint64_t seed = 0;
  fs::path out;
  fs::path labels;
};

int simulate_command(const SimulateArgs& args)
{
  if (args.scenario != 1)
  {
    throw UnsupportedError("only scenario 1 is available");
  }
  const auto sim = simulate_mixture(scenario1_spec(args.seed), kScenario1Rows, args.seed);
  auto out = open_output(args.out);
  write_csv(out, sim.data);
  if (!args.labels.empty())
  {
    auto lab = open_output(args.labels);
    lab << "label\n";
    for (const int l : sim.labels)
    {
      lab << l << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"modeclust: selective clustering annotated using modes of "
               "projections"};
  app.require_subcommand(1);

  TablesArgs targs;
  targs.dir = bundled_table_dir();
  auto* tables = app.add_subcommand("tables", "Critical-value tables");
  tables->require_subcommand(1);
  auto* tbuild = tables->add_subcommand("build", "Simulate the null tables");
  auto* tverify =
      tables->add_subcommand("verify", "Re-simulate part of each table and compare");
  for (auto* sub : {tbuild, tverify})
  {
    sub->add_option("--dir", targs.dir, "Table directory");
    sub->add_option("--threads", targs.threads, "Worker threads")
        ->check(CLI::Range(1U, 256U));
    sub->add_option("--k", targs.ks, "Mode counts to process")
        ->check(CLI::Range(1, 3));
  }
  tbuild->add_option("--seed", targs.seed, "Simulation seed");
  tbuild->add_flag("!--no-kuiper", targs.kuiper, "Skip the Kuiper quantiles");

  fs::path density_csv;
  std::string density_column;
  int kappa = kDefaultKappa;
  auto* density = app.add_subcommand("density", "Density diagnostics");
  density->require_subcommand(1);
  auto* dfit = density->add_subcommand("fit", "Taut-string fit of one CSV column");
  dfit->add_option("csv", density_csv, "Input CSV")->required();
  dfit->add_option("column", density_column, "Column name")->required();
  dfit->add_option("--kappa", kappa, "Number of Kuiper intervals")
      ->check(CLI::Range(1, kDefaultKappa));
  uint64_t density_seed = 0;
  dfit->add_option("--seed", density_seed, "Seed for breaking ties");

  RunArgs rargs;
  auto* runc = app.add_subcommand("run", "Cluster a CSV matrix");
  runc->add_option("--input", rargs.input, "Input CSV (header row, numeric cells)")
      ->required();
  runc->add_option("--alpha", rargs.cfg.alpha, "Dip test level");
  runc->add_option("--m", rargs.cfg.m, "Minimum cluster size");
  runc->add_option("--gamma", rargs.cfg.gamma, "Gaussian noise parameter");
  runc->add_option("--iterations", rargs.cfg.iterations, "Noise iterations");
  runc->add_option("--candidates", rargs.cfg.candidates,
                   "Candidate clusters per search pass");
  runc->add_option("--max-antimodes", rargs.cfg.max_antimodes,
                   "Maximum antimodes per split");
  runc->add_option("--seed", rargs.cfg.seed, "Random seed");
  runc->add_option("--threads", rargs.cfg.threads, "Worker threads")
      ->check(CLI::Range(1U, 256U));
  runc->add_option("--vote", rargs.vote, "Final clustering: max or runoff")
      ->check(CLI::IsMember({"max", "runoff"}));
  runc->add_option("--pca", rargs.cfg.pca, "Rotate onto this many principal components");
  runc->add_option("--epsilon", rargs.cfg.epsilon, "Annotation percentile offset");
  runc->add_option("--out", rargs.out, "Report path (default stdout)");
  runc->add_option("--labels", rargs.labels, "Per-row labels CSV");

  SimulateArgs sargs;
  auto* sim = app.add_subcommand("simulate", "Draw a benchmark mixture");
  sim->add_option("--scenario", sargs.scenario, "Scenario number")->required();
  sim->add_option("--seed", sargs.seed, "Random seed");
  sim->add_option("--out", sargs.out, "Data CSV")->required();
  sim->add_option("--labels", sargs.labels, "Component labels CSV");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try
  {
    if (tbuild->parsed())
    {
      return tables_build(targs);
    }
    if (tverify->parsed())
    {
      return tables_verify(targs);
    }
    if (dfit->parsed())
    {
      return density_fit(density_csv, density_column, kappa, density_seed);
    }
    if (runc->parsed())
    {
      return run_command(rargs);
    }
    if (sim->parsed())
    {
      return simulate_command(sargs);
    }
  }
  catch (const ConfigError& e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  catch (const InputError& e)
  {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  catch (const UnsupportedError& e)
  {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
