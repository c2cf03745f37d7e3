// Command-line front end: runs simulations, sweeps, baselines, the scaling
// bench and the SI diffusion table from a JSON experiment file.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "protonet/bench.hpp"
#include "protonet/config.hpp"
#include "protonet/dataset.hpp"
#include "protonet/epidemic.hpp"
#include "protonet/error.hpp"
#include "protonet/serialize.hpp"
#include "protonet/simnet.hpp"

namespace fs = std::filesystem;
using namespace protonet;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> replications;
  std::size_t jobs = 0;
};

struct ConfigMissing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_config = true) {
  auto* c = cmd->add_option("--config", opts.config, "Experiment JSON file");
  if (needs_config) c->required();
  cmd->add_option("--seed", opts.seed, "Override simulation.seed");
  cmd->add_option("--out", opts.out, "Output directory (overrides output.dir)");
  cmd->add_option("--replications", opts.replications, "Override simulation.replications");
  cmd->add_option("--jobs", opts.jobs, "Worker threads for replications (0 = all cores)");
}

ExperimentFile load(const CommonOptions& opts) {
  if (!fs::exists(opts.config)) throw ConfigMissing("experiment file not found: " + opts.config);
  ExperimentFile exp = load_experiment(opts.config);
  if (opts.seed) exp.simulation.seed = *opts.seed;
  if (opts.replications) exp.simulation.replications = *opts.replications;
  if (opts.out) exp.output_dir = *opts.out;
  return exp;
}

fs::path prepare_out(const ExperimentFile& exp) {
  fs::create_directories(exp.output_dir);
  return exp.output_dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

int cmd_run(const CommonOptions& opts) {
  const ExperimentFile exp = load(opts);
  const Dataset data = load_dataset(exp.dataset);
  exp.simulation.validate(data.size());
  const fs::path dir = prepare_out(exp);

  const RunResult result = run_simulation(exp.simulation, data);
  write_text(dir / "run_result.json", to_json(result).dump(2) + "\n");
  std::ostringstream trace;
  write_trace_csv(trace, result.trace);
  write_text(dir / "trace.csv", trace.str());

  const NodeResult& tagged = result.tagged_node();
  std::cout << "tagged node " << result.tagged << ": final F1 " << format_double(tagged.final_f1) << ", L "
            << result.total_messages << ", rounds " << result.rounds << "\n";

  if (exp.simulation.replications > 1) {
    const AggregateResult agg = replicate(exp.simulation, data, opts.jobs);
    write_text(dir / "aggregate.json", to_json(agg).dump(2) + "\n");
    std::cout << "over " << agg.replications << " replications: tagged F1 "
              << format_double(agg.nodes[agg.tagged].final_f1.mean) << " +/- "
              << format_double(agg.nodes[agg.tagged].final_f1.ci) << ", mean L "
              << format_double(agg.total_messages.mean) << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonOptions& opts) {
  const ExperimentFile exp = load(opts);
  const Dataset data = load_dataset(exp.dataset);
  exp.simulation.validate(data.size());
  const fs::path dir = prepare_out(exp);
  const auto rows = sweep_t(exp.simulation, data, exp.t_values, opts.jobs);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_text(dir / "sweep.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_baseline(const CommonOptions& opts) {
  const ExperimentFile exp = load(opts);
  const Dataset data = load_dataset(exp.dataset);
  const fs::path dir = prepare_out(exp);
  const RunResult result =
      run_centralized(data, exp.simulation.learner, exp.simulation.mode, exp.simulation.perf_window);
  write_text(dir / "baseline.json", to_json(result).dump(2) + "\n");
  std::cout << "centralized final F1 " << format_double(result.nodes.front().final_f1) << " (cumulative "
            << format_double(result.nodes.front().final_f1_cumulative) << ") over " << data.size() << " samples\n";
  return 0;
}

int cmd_bench(const CommonOptions& opts) {
  const ExperimentFile exp = load(opts);
  BenchConfig cfg = exp.bench;
  if (opts.seed) cfg.seed = *opts.seed;
  const fs::path dir = prepare_out(exp);
  const auto rows = run_bench(cfg);
  std::ostringstream csv;
  write_bench_csv(csv, rows);
  write_text(dir / "bench.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

struct EpidemicOptions {
  double beta = 1.0;
  std::uint64_t nodes = 5;
  double t_max = 20.0;
  std::size_t points = 21;
  double dt = 1e-3;
  std::optional<std::string> out;
};

int cmd_epidemic(const EpidemicOptions& opts) {
  const SiParams p = SiParams::single_source(opts.beta, opts.nodes);
  p.validate();
  std::ostringstream table;
  table << "t,closed_form,numeric,abs_diff\n";
  const std::size_t n = std::max<std::size_t>(opts.points, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = opts.t_max * static_cast<double>(i) / static_cast<double>(n - 1);
    const double exact = si_closed_form(p, t);
    const double numeric = si_numeric(p, t, opts.dt);
    table << format_double(t) << ',' << format_double(exact) << ',' << format_double(numeric) << ','
          << format_double(std::abs(exact - numeric)) << '\n';
  }
  std::cout << table.str();
  if (opts.out) {
    fs::create_directories(*opts.out);
    write_text(fs::path(*opts.out) / "epidemic.csv", table.str());
  }
  return 0;
}

int cmd_synth(const CommonOptions& opts, const std::string& csv_path) {
  const ExperimentFile exp = load(opts);
  const Dataset data = load_dataset(exp.dataset);
  const fs::path path(csv_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_csv(data, path);
  std::cout << "wrote " << data.size() << " samples (" << data.dimension << " features, " << data.n_classes
            << " classes) to " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralised prototype-sharing simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CommonOptions sweep_opts;
  CommonOptions base_opts;
  CommonOptions bench_opts;
  CommonOptions synth_opts;
  EpidemicOptions epi_opts;
  std::string synth_csv;

  add_common(app.add_subcommand("run", "Run one simulation and write run_result.json and trace.csv"), run_opts);
  add_common(app.add_subcommand("sweep", "Sweep the sharing probability t and write sweep.csv"), sweep_opts);
  add_common(app.add_subcommand("baseline", "Run the centralized learner and write baseline.json"), base_opts);
  add_common(app.add_subcommand("bench", "Memory/runtime scaling study, writes bench.csv"), bench_opts);

  auto* epi = app.add_subcommand("epidemic", "Print the SI closed form against RK4 integration");
  epi->add_option("--beta", epi_opts.beta, "Infection rate");
  epi->add_option("--nodes", epi_opts.nodes, "Population n' (x0 = 1/n')");
  epi->add_option("--t-max", epi_opts.t_max, "Largest time point");
  epi->add_option("--points", epi_opts.points, "Number of time points");
  epi->add_option("--dt", epi_opts.dt, "RK4 step");
  epi->add_option("--out", epi_opts.out, "Directory for epidemic.csv");

  auto* synth = app.add_subcommand("synth", "Materialise the configured dataset as CSV");
  add_common(synth, synth_opts);
  synth->add_option("--csv", synth_csv, "Destination CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_opts);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts);
    if (app.got_subcommand("baseline")) return cmd_baseline(base_opts);
    if (app.got_subcommand("bench")) return cmd_bench(bench_opts);
    if (app.got_subcommand("epidemic")) return cmd_epidemic(epi_opts);
    if (app.got_subcommand("synth")) return cmd_synth(synth_opts, synth_csv);
  } catch (const ConfigMissing& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
