#include "vff/cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "vff/errors.hpp"
#include "vff/io.hpp"

namespace vff::cli {

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

std::vector<BSplineTrajectory> cmd_fit(const FitOptions& options, std::ostream& report) {
  const TrajectoryLog log = read_trajectory_log(options.log);
  const TrajectorySamples& samples = log.samples;
  samples.validate(2);

  std::vector<BSplineTrajectory> chunks;
  if (options.chunk_duration > 0.0) {
    chunks = fit_chunks(samples, options.chunk_duration, options.n_ctrl, options.mode);
  } else {
    const Index n_ctrl =
        options.n_ctrl > 0 ? options.n_ctrl : default_control_point_count(samples.size());
    try {
      chunks.push_back(fit_least_squares(samples, n_ctrl));
    } catch (const SingularFitError& e) {
      throw SingularFitError(std::string("chunk 0: ") + e.what(), e.condition_ratio());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(std::string("chunk 0: ") + e.what());
    }
  }
  write_spline_dataset(chunks, options.out);

  for (std::size_t i = 0; i < chunks.size(); ++i) {
    report << "chunk " << i << ": n_ctrl=" << chunks[i].num_control_points()
           << " t=[" << format_number(chunks[i].t_begin()) << ", "
           << format_number(chunks[i].t_end()) << "] residual_rms="
           << format_number(chunks[i].fit_residual_rms()) << '\n';
  }
  report << "wrote " << chunks.size() << " chunk(s) to " << options.out.string() << '\n';
  return chunks;
}

EpisodeTrace cmd_run(const RunOptions& options, std::ostream& report) {
  const ExperimentConfig& cfg = options.config;
  CellSpec cell = cfg.cells.front();
  if (!options.cell.empty()) {
    const CellSpec* found = cfg.find_cell(options.cell);
    if (!found) throw ConfigError("no cell named '" + options.cell + "'");
    cell = *found;
  }
  if (options.mode) {
    cell.mode = *options.mode;
    if (options.cell.empty()) {
      cell.demo = cell.mode == ReferenceMode::PositionOnly ? DemoController::PositionOnly
                                                           : DemoController::VelocityAware;
    }
  }
  const double rate = options.f_action ? *options.f_action : cfg.f_action.front();
  EpisodeConfig episode = cfg.episode_config(cell, rate, options.seed);
  try {
    episode.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const Plan plan = cfg.make_plan(options.seed);
  EpisodeTrace trace = run_episode(plan, episode, cfg.scenario);

  if (!options.out.empty()) {
    write_episode_trace(trace, options.out / "trace.csv");
    write_episode_summary(trace, options.out / "summary.json");
  }
  report << episode_summary_json(trace);
  return trace;
}

}  // namespace vff::cli
