#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vff/cli/config.hpp"
#include "vff/metrics.hpp"
#include "vff/sim.hpp"
#include "vff/spline.hpp"

namespace vff::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitRuntime = 3,
};

class MissingBaselineError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// fit

struct FitOptions {
  std::filesystem::path log;
  std::filesystem::path out;
  /// Zero picks one control point per four samples.
  Index n_ctrl = 0;
  /// Zero fits the whole log as a single chunk.
  double chunk_duration = 0.0;
  ChunkFitMode mode = ChunkFitMode::GlobalWindows;
};

/// Writes the spline dataset and prints one residual line per chunk.
std::vector<BSplineTrajectory> cmd_fit(const FitOptions& options, std::ostream& report);

// run

struct RunOptions {
  ExperimentConfig config = ExperimentConfig::defaults();
  /// Cell to run; empty means the first cell.
  std::string cell;
  std::optional<ReferenceMode> mode;
  std::optional<double> f_action;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

/// Writes `trace.csv` and `summary.json` under `out` and prints the summary.
EpisodeTrace cmd_run(const RunOptions& options, std::ostream& report);

// sweep

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  std::optional<double> success_time;
  double rms_error = 0.0;
  double rms_plan_error = 0.0;
  double peak_force = 0.0;
  std::optional<std::string> error;
};

struct SweepRow {
  std::string group;
  CellSpec cell;
  double f_action = 0.0;
  std::vector<EpisodeOutcome> episodes;
  /// "ok", "aborted" (some episode failed) or "insufficient" (< 2 successes).
  std::string status;
  std::optional<SampleSummary> summary;
  std::optional<TestResult> test;
  bool is_baseline = false;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::filesystem::path summary_path;
  std::filesystem::path curve_path;
};

/// Runs every (cell, f_action) pair over `episodes` seeds; the same seed
/// gives every cell the same plan. Writes summary.csv, success_curve.csv
/// and, when enabled, per-episode traces under `cfg.out`.
SweepReport cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);

void write_sweep_summary(const SweepReport& report, const ExperimentConfig& cfg, std::ostream& out);
void write_success_curves(const SweepReport& report, const ExperimentConfig& cfg, std::ostream& out);

// stats

struct StatsRow {
  std::string group;
  std::string method;
  SampleSummary summary;
  std::optional<Alternative> alternative;
};

struct StatsResult {
  StatsRow row;
  bool is_baseline = false;
  std::optional<TestResult> test;
  bool significant = false;
};

/// Delimited table with columns `method`, `mean`, `n` and one of `var`/`sd`;
/// optional `group` and `alternative`. Rows whose `status` column is present
/// and not "ok" are skipped. Throws ParseError with line numbers.
std::vector<StatsRow> read_summary_table(std::istream& in);

/// Tests every row against the row named `baseline` in its group. Throws
/// MissingBaselineError when a group lacks the baseline or has nothing else.
std::vector<StatsResult> compute_stats(const std::vector<StatsRow>& rows, const std::string& baseline,
                                       TestVariant variant, double alpha);

void write_stats_table(const std::vector<StatsResult>& results, std::ostream& out);

struct StatsOptions {
  std::filesystem::path summaries;
  std::string baseline = "Baseline";
  TestVariant variant = TestVariant::Pooled;
  double alpha = 0.05;
  std::filesystem::path out;
};

std::vector<StatsResult> cmd_stats(const StatsOptions& options, std::ostream& out);

/// Fixed text form used in every emitted table.
std::string format_number(double value);

}  // namespace vff::cli
