#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "vff/control.hpp"
#include "vff/plan.hpp"
#include "vff/reference.hpp"
#include "vff/types.hpp"

namespace vff {

/// Planar fixture with a chamfered hole, described in the configuration space
/// of the peg center (x lateral, y up).
///
/// The channel is 2 * clearance wide below `hole_center`. Above it a funnel
/// opens at `funnel_halfangle` from vertical until it is 2 * hole_halfwidth
/// wide, which is where the flat fixture top begins. The fixture extends
/// `fixture_depth` below the channel entrance.
struct PegInHoleGeometry {
  Vector hole_center = Vector::Zero(2);
  double hole_halfwidth = 0.004;
  double clearance = 0.0005;
  /// Lateral slack on the success test, absorbing penalty penetration.
  double success_tolerance = 1e-4;
  double wall_stiffness = 5e4;
  double wall_damping = 100.0;
  double funnel_halfangle = 0.7853981633974483;
  double insertion_depth = 0.02;
  double fixture_depth = 0.04;

  /// Height of the fixture top above the channel entrance.
  double funnel_height() const;
  double top_y() const;
  void validate() const;
};

struct FreeSpace {};
struct ConstantForce {
  Vector force;
};
struct PegInHole {
  PegInHoleGeometry geometry;
};

class Scenario {
 public:
  using Kind = std::variant<FreeSpace, ConstantForce, PegInHole>;

  static Scenario free_space() { return Scenario(FreeSpace{}); }
  static Scenario constant_force(Vector force);
  static Scenario peg_in_hole(PegInHoleGeometry geometry = {});

  const Kind& kind() const { return kind_; }
  std::string_view name() const;
  /// Peg inside the channel, laterally within clearance and at or below the
  /// insertion depth. Always false for the other scenarios.
  bool success(const Vector& x) const;

 private:
  explicit Scenario(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Force on the robot. ConstantForce returns its vector; PegInHole returns a
/// penalty spring-damper force along the outward normal of the nearest wall,
/// max(0, stiffness * depth + damping * approach_speed), zero when not in
/// contact. FreeSpace returns zero.
Vector contact_force(const Scenario& scenario, const Vector& x, const Vector& v);

/// Controller in use while the demonstrations behind a plan were recorded.
enum class DemoController {
  /// Operator saw a velocity-aware controller: targets are the intended motion.
  VelocityAware,
  /// Operator saw a position-only controller and led the robot by the
  /// steady-state lag K^-1 D v.
  PositionOnly,
};

std::string_view to_string(DemoController demo);
DemoController parse_demo_controller(std::string_view name);

struct EpisodeConfig {
  ReferenceMode mode = ReferenceMode::FiniteDifference;
  double f_ctrl = 500.0;
  double f_action = 15.0;
  Gains gains = Gains::defaults(2);
  double duration_max = 20.0;
  std::uint64_t seed = 0;

  /// Actions per chunk and how many of them run before the next chunk.
  int chunk_horizon = 10;
  int chunk_execute = 5;
  /// Crossfade between consecutive chunks. Capped at the chunk period and at
  /// the time the previous chunk has targets left after the switch.
  double blend_overlap = 0.1;

  DemoController demo = DemoController::VelocityAware;
  /// Fraction of the steady-state lag a position-only operator leads by.
  double operator_lead = 1.0;

  /// Pass the reference acceleration to the controller; zero otherwise.
  bool accel_feedforward = false;
  Integrator integrator = Integrator::SemiImplicitEuler;
  /// First-order lag of the inner position loop; zero means ideal tracking.
  double inner_loop_tau = 0.0;

  /// Rate of the raw demonstration samples fitted in Spline mode.
  double demo_rate_hz = 500.0;
  int spline_samples_per_ctrl = 4;

  bool stop_on_success = true;

  /// Seconds between consecutive chunk starts.
  double chunk_period() const;
  void validate() const;
};

struct EpisodeTrace {
  std::vector<double> times;
  Matrix x_d;
  Matrix xd_dot;
  Matrix xd_ddot;
  Matrix x;
  Matrix v;
  Matrix acc_cmd;
  Matrix f_ext;
  /// x_d - x per step.
  Matrix error;
  /// Ground-truth plan position per step.
  Matrix x_plan;
  std::optional<double> success_time;
  double duration_max = 0.0;
  SplineQueryStats spline_stats;

  Index steps() const { return static_cast<Index>(times.size()); }
  Index dims() const { return x.cols(); }
  double peak_force() const;
};

/// Runs one episode: chunks from the plan at f_action, controller and plant
/// at f_ctrl, contact from the scenario. Throws SimulationError if the state
/// becomes non-finite; spline fit errors propagate.
EpisodeTrace run_episode(const Plan& plan, const EpisodeConfig& cfg, const Scenario& scenario);

/// Position the demonstration would command at `t`: the plan itself, or the
/// plan plus the operator's lead under a position-only controller.
Vector demo_target(const Plan& plan, const EpisodeConfig& cfg, double t);

struct InsertionPlanOptions {
  double peak_speed = 0.5;
  double descent_speed = 0.02;
  double hover_height = 0.02;
  double dwell = 0.0;
  /// Extra depth commanded below the success depth.
  double overshoot = 0.005;
  double waypoint_jitter = 0.0;
  /// Largest lateral error in the believed hole position, drawn per seed.
  double aim_error = 0.0;
};

/// Transfer from `start` to a hover point above the hole, then a descent
/// through the channel.
Plan make_insertion_plan(const Vector& start, const PegInHoleGeometry& geometry,
                         const InsertionPlanOptions& options, std::uint64_t seed);

}  // namespace vff
