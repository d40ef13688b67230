#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

#include "vff/cli/commands.hpp"
#include "vff/errors.hpp"
#include "vff/io.hpp"

namespace vff::cli {

namespace {

std::string rate_label(double rate) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%gHz", rate);
  return buffer;
}

std::string episode_stem(std::uint64_t seed) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "episode_%06llu", static_cast<unsigned long long>(seed));
  return buffer;
}

struct Task {
  std::size_t row;
  std::size_t episode;
};

EpisodeOutcome run_one(const ExperimentConfig& cfg, const SweepRow& row, const Plan& plan,
                       std::uint64_t seed) {
  EpisodeOutcome outcome;
  outcome.seed = seed;
  try {
    const EpisodeTrace trace = run_episode(plan, cfg.episode_config(row.cell, row.f_action, seed),
                                           cfg.scenario);
    outcome.success_time = trace.success_time;
    outcome.rms_error = rms_tracking_error(trace);
    outcome.rms_plan_error = rms_tracking_error(trace, {}, TrackingTarget::Plan);
    outcome.peak_force = trace.peak_force();
    if (cfg.write_traces) {
      const auto dir = cfg.out / "traces" / row.group / row.cell.name;
      write_episode_trace(trace, dir / (episode_stem(seed) + ".csv"));
      write_episode_summary(trace, dir / (episode_stem(seed) + ".json"));
    }
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

void summarize(SweepRow& row) {
  std::vector<double> times;
  std::size_t failures = 0;
  for (const auto& e : row.episodes) {
    if (e.error) ++failures;
    if (e.success_time) times.push_back(*e.success_time);
  }
  if (failures > 0) {
    row.status = "aborted";
    return;
  }
  if (times.size() < 2) {
    row.status = "insufficient";
    return;
  }
  row.status = "ok";
  row.summary = SampleSummary::from_samples(times);
}

}  // namespace

SweepReport cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  SweepReport report;
  for (double rate : cfg.f_action) {
    for (const auto& cell : cfg.cells) {
      SweepRow row;
      row.group = rate_label(rate);
      row.cell = cell;
      row.f_action = rate;
      row.is_baseline = cell.name == cfg.baseline;
      row.episodes.resize(static_cast<std::size_t>(cfg.episodes));
      report.rows.push_back(std::move(row));
    }
  }

  std::vector<Plan> plans;
  plans.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int e = 0; e < cfg.episodes; ++e) {
    plans.push_back(cfg.make_plan(cfg.seed_base + static_cast<std::uint64_t>(e)));
  }

  std::vector<Task> tasks;
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    for (std::size_t e = 0; e < plans.size(); ++e) tasks.push_back({r, e});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const Task& task = tasks[i];
      SweepRow& row = report.rows[task.row];
      row.episodes[task.episode] =
          run_one(cfg, row, plans[task.episode], cfg.seed_base + task.episode);
    }
  };
  const auto n_workers = static_cast<std::size_t>(std::max(1, cfg.workers));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(n_workers, tasks.size()); ++w) pool.emplace_back(worker);
    worker();
  }

  for (auto& row : report.rows) summarize(row);
  for (auto& row : report.rows) {
    if (row.is_baseline || !row.summary) continue;
    const auto base = std::find_if(report.rows.begin(), report.rows.end(), [&](const SweepRow& b) {
      return b.is_baseline && b.group == row.group;
    });
    if (base == report.rows.end() || !base->summary) continue;
    row.test = t_test(*row.summary, *base->summary, row.cell.alternative, cfg.test_variant);
  }

  std::filesystem::create_directories(cfg.out);
  report.summary_path = cfg.out / "summary.csv";
  report.curve_path = cfg.out / "success_curve.csv";
  {
    std::ofstream out(report.summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + report.summary_path.string());
    write_sweep_summary(report, cfg, out);
  }
  {
    std::ofstream out(report.curve_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + report.curve_path.string());
    write_success_curves(report, cfg, out);
  }

  write_sweep_summary(report, cfg, log);
  for (const auto& row : report.rows) {
    for (const auto& e : row.episodes) {
      if (e.error) {
        log << "# " << row.group << '/' << row.cell.name << " seed " << e.seed << ": " << *e.error
            << '\n';
      }
    }
  }
  return report;
}

void write_sweep_summary(const SweepReport& report, const ExperimentConfig& cfg, std::ostream& out) {
  out << "group,method,mode,demo,f_action,episodes,successes,failures,status,mean,var,n,t,p,dof,"
         "alternative,significant,mean_rms_error,mean_rms_plan_error,mean_peak_force\n";
  for (const auto& row : report.rows) {
    std::size_t successes = 0;
    std::size_t failures = 0;
    double rms = 0.0;
    double rms_plan = 0.0;
    double force = 0.0;
    std::size_t completed = 0;
    for (const auto& e : row.episodes) {
      if (e.success_time) ++successes;
      if (e.error) {
        ++failures;
        continue;
      }
      ++completed;
      rms += e.rms_error;
      rms_plan += e.rms_plan_error;
      force += e.peak_force;
    }
    const auto mean_of = [&](double sum) {
      return completed > 0 ? format_number(sum / static_cast<double>(completed)) : std::string();
    };
    out << row.group << ',' << row.cell.name << ',' << to_string(row.cell.mode) << ','
        << to_string(row.cell.demo) << ',' << format_number(row.f_action) << ','
        << row.episodes.size() << ',' << successes << ',' << failures << ',' << row.status << ',';
    if (row.summary) {
      out << format_number(row.summary->mean) << ',' << format_number(row.summary->variance) << ','
          << row.summary->n << ',';
    } else {
      out << ",,,";
    }
    if (row.test) {
      out << format_number(row.test->t_stat) << ',' << format_number(row.test->p_one_tailed) << ','
          << format_number(row.test->dof) << ',' << to_string(row.cell.alternative) << ','
          << (row.test->p_one_tailed < cfg.alpha ? "yes" : "no") << ',';
    } else {
      out << ",,,,,";
    }
    out << mean_of(rms) << ',' << mean_of(rms_plan) << ',' << mean_of(force) << '\n';
  }
}

void write_success_curves(const SweepReport& report, const ExperimentConfig& cfg, std::ostream& out) {
  const std::vector<double> grid = uniform_grid(cfg.duration_max, cfg.success_grid_step);
  std::vector<std::vector<double>> curves;
  out << 't';
  for (const auto& row : report.rows) {
    out << ',' << row.cell.name << '@' << row.group;
    std::vector<std::optional<double>> times;
    for (const auto& e : row.episodes) times.push_back(e.error ? std::nullopt : e.success_time);
    curves.push_back(cumulative_success_curve(times, grid));
  }
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_number(grid[i]);
    for (const auto& c : curves) out << ',' << format_number(c[i]);
    out << '\n';
  }
}

}  // namespace vff::cli
