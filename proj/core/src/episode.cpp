#include <algorithm>
#include <functional>
#include <cmath>
#include <memory>
#include <string>

#include "vff/errors.hpp"
#include "vff/sim.hpp"
#include "vff/spline.hpp"

namespace vff {

std::string_view to_string(DemoController demo) {
  return demo == DemoController::PositionOnly ? "position" : "velocity";
}

DemoController parse_demo_controller(std::string_view name) {
  if (name == "velocity") return DemoController::VelocityAware;
  if (name == "position") return DemoController::PositionOnly;
  throw InvalidArgument("unknown demonstration controller '" + std::string(name) +
                        "' (expected velocity or position)");
}

double EpisodeConfig::chunk_period() const {
  return static_cast<double>(chunk_execute) / f_action;
}

void EpisodeConfig::validate() const {
  if (!(f_ctrl > 0.0) || !(f_action > 0.0)) throw InvalidArgument("rates must be positive");
  if (f_ctrl < f_action) throw InvalidArgument("f_ctrl must be at least f_action");
  if (!(1.0 / f_ctrl <= 0.01)) throw InvalidArgument("f_ctrl must be at least 100 Hz");
  if (!(duration_max > 0.0)) throw InvalidArgument("duration_max must be positive");
  if (chunk_horizon < 1) throw InvalidArgument("chunk horizon must be at least 1");
  if (chunk_execute < 1 || chunk_execute > chunk_horizon) {
    throw InvalidArgument("chunk_execute must lie in [1, chunk_horizon]");
  }
  if (!(blend_overlap >= 0.0)) throw InvalidArgument("blend overlap must be non-negative");
  if (!(operator_lead >= 0.0)) throw InvalidArgument("operator lead must be non-negative");
  if (!(inner_loop_tau >= 0.0)) throw InvalidArgument("inner-loop time constant must be >= 0");
  if (!(demo_rate_hz > 0.0)) throw InvalidArgument("demonstration rate must be positive");
  if (spline_samples_per_ctrl < 1) throw InvalidArgument("spline_samples_per_ctrl must be >= 1");
  if (demo == DemoController::PositionOnly && operator_lead > 0.0 &&
      (gains.stiffness().array() <= 0.0).any()) {
    throw InvalidArgument("operator lead needs strictly positive stiffness");
  }
}

double EpisodeTrace::peak_force() const {
  double peak = 0.0;
  for (Index i = 0; i < f_ext.rows(); ++i) peak = std::max(peak, f_ext.row(i).norm());
  return peak;
}

Vector demo_target(const Plan& plan, const EpisodeConfig& cfg, double t) {
  const ReferenceSample p = plan.sample(t);
  if (cfg.demo == DemoController::VelocityAware || cfg.operator_lead == 0.0) return p.x_d;
  return p.x_d + cfg.operator_lead * steady_state_lag(cfg.gains, p.xd_dot, false);
}

namespace {

// Reference generator for one chunk.
class ChunkSource {
 public:
  ChunkSource(const Plan& plan, const EpisodeConfig& cfg, double start, SplineQueryStats* stats)
      : mode_(cfg.mode), stats_(stats) {
    const double dt_action = 1.0 / cfg.f_action;
    if (mode_ == ReferenceMode::Spline) {
      const double window = cfg.chunk_horizon * dt_action;
      const auto count = static_cast<Index>(std::llround(window * cfg.demo_rate_hz)) + 1;
      TrajectorySamples raw;
      raw.positions.resize(count, plan.dims());
      for (Index j = 0; j < count; ++j) {
        const double t = start + window * static_cast<double>(j) / static_cast<double>(count - 1);
        raw.times.push_back(t);
        raw.positions.row(j) = demo_target(plan, cfg, t).transpose();
      }
      const Index n_ctrl = std::max<Index>(4, count / cfg.spline_samples_per_ctrl);
      spline_ = std::make_shared<const BSplineTrajectory>(fit_least_squares(raw, n_ctrl, 3));
      return;
    }
    chunk_.start_time = start;
    chunk_.dt_action = dt_action;
    for (int j = 0; j < cfg.chunk_horizon; ++j) {
      chunk_.targets.push_back(demo_target(plan, cfg, chunk_.tick(j)));
    }
  }

  ReferenceSample operator()(double t) const {
    switch (mode_) {
      case ReferenceMode::PositionOnly:
        return zoh_reference(chunk_, t);
      case ReferenceMode::FiniteDifference:
        return fd_reference(chunk_, t);
      case ReferenceMode::Spline:
        return spline_reference(*spline_, t, stats_);
    }
    throw InvalidArgument("unknown reference mode");
  }

 private:
  ReferenceMode mode_;
  ActionChunk chunk_;
  std::shared_ptr<const BSplineTrajectory> spline_;
  SplineQueryStats* stats_;
};

}  // namespace

EpisodeTrace run_episode(const Plan& plan, const EpisodeConfig& cfg, const Scenario& scenario) {
  cfg.validate();
  const Index d = plan.dims();
  if (cfg.gains.dims() != d) {
    throw InvalidArgument("gains have dimension " + std::to_string(cfg.gains.dims()) +
                          ", plan has " + std::to_string(d));
  }

  const double dt = 1.0 / cfg.f_ctrl;
  const double chunk_period = cfg.chunk_period();
  const double horizon_span = static_cast<double>(cfg.chunk_horizon - 1) / cfg.f_action;
  const double overlap =
      std::min({cfg.blend_overlap, chunk_period, std::max(0.0, horizon_span - chunk_period)});
  const auto n_steps = static_cast<Index>(std::llround(cfg.duration_max * cfg.f_ctrl)) + 1;

  EpisodeTrace trace;
  trace.duration_max = cfg.duration_max;
  trace.times.reserve(static_cast<std::size_t>(n_steps));
  for (Matrix* m : {&trace.x_d, &trace.xd_dot, &trace.xd_ddot, &trace.x, &trace.v, &trace.acc_cmd,
                    &trace.f_ext, &trace.error, &trace.x_plan}) {
    m->resize(n_steps, d);
  }

  ControllerState state = ControllerState::at_rest(plan.sample(0.0).x_d);
  Vector x_actual = state.x_cmd;
  Vector v_actual = state.v_cmd;
  const double inner_alpha = cfg.inner_loop_tau > 0.0 ? 1.0 - std::exp(-dt / cfg.inner_loop_tau) : 1.0;

  std::optional<ChunkSource> current;
  std::optional<ChunkSource> previous;
  double switch_time = 0.0;
  std::int64_t chunk_index = 0;

  Index recorded = 0;
  for (Index i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double next_chunk = static_cast<double>(chunk_index) * chunk_period;
    if (t >= next_chunk - 1e-9) {
      previous = std::move(current);
      current.emplace(plan, cfg, next_chunk, &trace.spline_stats);
      switch_time = next_chunk;
      ++chunk_index;
    }

    ReferenceSample ref = previous && t < switch_time + overlap
                              ? blend_chunks(std::cref(*previous), std::cref(*current), switch_time, overlap, t)
                              : (*current)(t);
    if (!cfg.accel_feedforward) ref.xd_ddot.setZero();

    const Vector f_ext = contact_force(scenario, x_actual, v_actual);
    const Vector acc = admittance_accel(state, ref, f_ext, cfg.gains);

    trace.times.push_back(t);
    trace.x_d.row(i) = ref.x_d.transpose();
    trace.xd_dot.row(i) = ref.xd_dot.transpose();
    trace.xd_ddot.row(i) = ref.xd_ddot.transpose();
    trace.x.row(i) = x_actual.transpose();
    trace.v.row(i) = v_actual.transpose();
    trace.acc_cmd.row(i) = acc.transpose();
    trace.f_ext.row(i) = f_ext.transpose();
    trace.error.row(i) = (ref.x_d - x_actual).transpose();
    trace.x_plan.row(i) = plan.sample(t).x_d.transpose();
    recorded = i + 1;

    if (!trace.success_time && scenario.success(x_actual)) {
      trace.success_time = t;
      if (cfg.stop_on_success) break;
    }

    state = step(state, ref, f_ext, cfg.gains, dt, cfg.integrator);
    const Vector x_next = x_actual + inner_alpha * (state.x_cmd - x_actual);
    v_actual = (x_next - x_actual) / dt;
    if (cfg.inner_loop_tau == 0.0) v_actual = state.v_cmd;
    x_actual = x_next;
    if (!state.all_finite() || !x_actual.allFinite()) {
      throw SimulationError("non-finite state at t=" + std::to_string(t + dt) + " s");
    }
  }

  if (recorded < n_steps) {
    for (Matrix* m : {&trace.x_d, &trace.xd_dot, &trace.xd_ddot, &trace.x, &trace.v,
                      &trace.acc_cmd, &trace.f_ext, &trace.error, &trace.x_plan}) {
      m->conservativeResize(recorded, d);
    }
  }
  return trace;
}

Plan make_insertion_plan(const Vector& start, const PegInHoleGeometry& geometry,
                         const InsertionPlanOptions& options, std::uint64_t seed) {
  geometry.validate();
  if (start.size() != 2) throw InvalidArgument("insertion plans are planar");
  if (!(options.descent_speed > 0.0)) throw InvalidArgument("descent speed must be positive");
  if (!(options.hover_height >= 0.0) || !(options.dwell >= 0.0) || !(options.overshoot >= 0.0) ||
      !(options.aim_error >= 0.0)) {
    throw InvalidArgument("hover height, dwell, overshoot and aim error must be non-negative");
  }
  double aim_x = geometry.hole_center[0];
  if (options.aim_error > 0.0) {
    SeededUniform rng(seed ^ 0x9e3779b97f4a7c15ULL);
    aim_x += options.aim_error * rng.next(-1.0, 1.0);
  }
  Vector hover(2);
  hover << aim_x, geometry.top_y() + options.hover_height;
  Vector bottom(2);
  bottom << aim_x,
      geometry.hole_center[1] - geometry.insertion_depth - options.overshoot;

  Plan plan = make_transfer_plan(start, hover, options.peak_speed, seed, options.waypoint_jitter);
  if (options.dwell > 0.0) plan.hold_for(options.dwell);
  plan.move_to(bottom, min_jerk_duration((hover - bottom).norm(), options.descent_speed));
  return plan;
}

}  // namespace vff
