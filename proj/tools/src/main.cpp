#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vff/cli/commands.hpp"
#include "vff/cli/config.hpp"
#include "vff/errors.hpp"

namespace {

using namespace vff;
using namespace vff::cli;

ExperimentConfig resolve_config(const std::string& path) {
  return path.empty() ? ExperimentConfig::defaults() : load_config(path);
}

ChunkFitMode parse_fit_mode(const std::string& name) {
  if (name == "global") return ChunkFitMode::GlobalWindows;
  if (name == "per-chunk") return ChunkFitMode::PerChunk;
  throw ConfigError("unknown fit mode '" + name + "' (expected global or per-chunk)");
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "vfflab: " << kind << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compliant-control trajectory representation lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<double> f_action;
  std::optional<int> workers;

  auto* fit = app.add_subcommand("fit", "Fit B-spline control points to a trajectory log");
  std::string log_path;
  Index n_ctrl = 0;
  double chunk_duration = 0.0;
  std::string fit_mode = "global";
  fit->add_option("log", log_path, "Trajectory log (t,x0,...)")->required()->check(CLI::ExistingFile);
  fit->add_option("--n-ctrl", n_ctrl, "Control points per fit (0: one per four samples)");
  fit->add_option("--chunk-duration", chunk_duration, "Chunk length in seconds (0: whole log)");
  fit->add_option("--fit-mode", fit_mode, "global or per-chunk")
      ->check(CLI::IsMember({"global", "per-chunk"}));
  fit->add_option("--out", out, "Spline dataset to write")->required();

  auto* run = app.add_subcommand("run", "Run one episode and write its trace");
  std::string cell;
  run->add_option("--config", config_path, "Experiment config (JSON)");
  run->add_option("--cell", cell, "Cell to run (default: first cell)");
  run->add_option("--seed", seed, "Episode seed");
  run->add_option("--out", out, "Output directory for trace.csv and summary.json");
  run->add_option("--mode", mode, "Reference mode")->check(CLI::IsMember({"zoh", "fd", "spline"}));
  run->add_option("--f-action", f_action, "Action rate in Hz");

  auto* sweep = app.add_subcommand("sweep", "Run every cell over seeded episodes");
  std::optional<int> episodes;
  sweep->add_option("--config", config_path, "Experiment config (JSON)");
  sweep->add_option("--seed", seed, "Seed of the first episode");
  sweep->add_option("--out", out, "Output directory");
  sweep->add_option("--mode", mode, "Keep only cells with this mode (and the baseline)")
      ->check(CLI::IsMember({"zoh", "fd", "spline"}));
  sweep->add_option("--f-action", f_action, "Single action rate in Hz");
  sweep->add_option("--workers", workers, "Concurrent episodes");
  sweep->add_option("--episodes", episodes, "Episodes per cell");

  auto* stats = app.add_subcommand("stats", "t-tests of summary rows against a baseline row");
  StatsOptions stats_options;
  std::string variant = "pooled";
  stats->add_option("summaries", stats_options.summaries, "Summary table")->required();
  stats->add_option("--baseline", stats_options.baseline, "Baseline method name");
  stats->add_option("--variant", variant, "pooled or welch")
      ->check(CLI::IsMember({"pooled", "welch"}));
  stats->add_option("--alpha", stats_options.alpha, "Significance level");
  stats->add_option("--out", out, "Also write the table here");

  auto* print = app.add_subcommand("print-config", "Print the resolved experiment config");
  print->add_option("--config", config_path, "Experiment config (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit) {
      FitOptions options;
      options.log = log_path;
      options.out = out;
      options.n_ctrl = n_ctrl;
      options.chunk_duration = chunk_duration;
      options.mode = parse_fit_mode(fit_mode);
      cmd_fit(options, std::cout);
    } else if (*run) {
      RunOptions options;
      options.config = resolve_config(config_path);
      options.cell = cell;
      if (!mode.empty()) options.mode = parse_reference_mode(mode);
      options.f_action = f_action;
      options.seed = seed.value_or(options.config.seed_base);
      options.out = out;
      cmd_run(options, std::cout);
    } else if (*sweep) {
      ExperimentConfig cfg = resolve_config(config_path);
      if (seed) cfg.seed_base = *seed;
      if (!out.empty()) cfg.out = out;
      if (f_action) cfg.f_action = {*f_action};
      if (workers) cfg.workers = *workers;
      if (episodes) cfg.episodes = *episodes;
      if (!mode.empty()) {
        const ReferenceMode keep = parse_reference_mode(mode);
        std::erase_if(cfg.cells, [&](const CellSpec& c) {
          return c.mode != keep && c.name != cfg.baseline;
        });
      }
      cfg.validate();
      cmd_sweep(cfg, std::cout);
    } else if (*stats) {
      stats_options.variant = variant == "welch" ? TestVariant::Welch : TestVariant::Pooled;
      stats_options.out = out;
      cmd_stats(stats_options, std::cout);
    } else if (*print) {
      std::cout << dump_config(resolve_config(config_path));
    }
  } catch (const ConfigError& e) {
    return report("config error", e, kExitConfig);
  } catch (const InvalidArgument& e) {
    return report("invalid input", e, kExitConfig);
  } catch (const ParseError& e) {
    return report("parse error", e, kExitConfig);
  } catch (const FormatVersionError& e) {
    return report("format error", e, kExitConfig);
  } catch (const std::exception& e) {
    return report("error", e, kExitRuntime);
  }
  return kExitOk;
}
