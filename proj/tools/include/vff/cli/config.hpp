#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vff/metrics.hpp"
#include "vff/sim.hpp"

namespace vff::cli {

/// Invalid or inconsistent configuration; maps to the config exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CellSpec {
  std::string name;
  ReferenceMode mode = ReferenceMode::FiniteDifference;
  DemoController demo = DemoController::VelocityAware;
  /// Direction tested against the baseline cell.
  Alternative alternative = Alternative::Less;
};

enum class PlanKind {
  /// Transfer from a seeded start above the fixture, then a descent into the hole.
  Insertion,
  /// Point-to-point transfer from `start` to `goal`.
  Transfer,
};

struct PlanSpec {
  PlanKind kind = PlanKind::Insertion;
  double peak_speed = 0.5;
  // insertion
  double start_radius_min = 0.3;
  double start_radius_max = 0.4;
  double start_angle_min = 0.5;
  double start_angle_max = 2.6;
  double start_height = 0.05;
  InsertionPlanOptions insertion{.peak_speed = 0.5, .aim_error = 0.002};
  // transfer
  std::vector<double> start{0.0, 0.0};
  std::vector<double> goal{0.6, 0.0};
  double waypoint_jitter = 0.0;
  double hold_after = 0.5;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::peg_in_hole();
  double inertia = 2.0;
  double stiffness = 400.0;
  /// Unset means critical damping.
  std::optional<double> damping;

  double f_ctrl = 500.0;
  Integrator integrator = Integrator::SemiImplicitEuler;
  double inner_loop_tau = 0.0;
  bool accel_feedforward = false;

  int chunk_horizon = 10;
  int chunk_execute = 5;
  double blend_overlap = 0.1;
  double demo_rate_hz = 500.0;
  int spline_samples_per_ctrl = 4;
  double operator_lead = 1.0;

  std::vector<CellSpec> cells;
  std::string baseline = "baseline";
  std::vector<double> f_action{5.0};
  int episodes = 50;
  std::uint64_t seed_base = 0;
  double duration_max = 20.0;
  PlanSpec plan;

  std::filesystem::path out = "vfflab_out";
  int workers = 1;
  bool write_traces = true;
  double success_grid_step = 0.1;
  TestVariant test_variant = TestVariant::Pooled;
  double alpha = 0.05;

  static ExperimentConfig defaults();
  Gains gains() const;
  /// Episode settings for one cell at one action rate.
  EpisodeConfig episode_config(const CellSpec& cell, double f_action, std::uint64_t seed) const;
  /// Ground-truth plan shared by every cell for this seed.
  Plan make_plan(std::uint64_t seed) const;
  const CellSpec* find_cell(const std::string& name) const;
  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace vff::cli
