#pragma once

#include <string_view>

#include "vff/reference.hpp"
#include "vff/types.hpp"

namespace vff {

/// Diagonal desired inertia (kg), damping (N s/m) and stiffness (N/m).
class Gains {
 public:
  /// Throws InvalidArgument unless sizes match, inertia > 0, damping and
  /// stiffness >= 0, all finite.
  Gains(Vector inertia, Vector damping, Vector stiffness);

  /// Damping 2 sqrt(K Lambda) on every axis.
  static Gains critically_damped(Index dims, double inertia, double stiffness);
  /// Lambda = 2 kg, K = 400 N/m, critical damping.
  static Gains defaults(Index dims);

  const Vector& inertia() const { return inertia_; }
  const Vector& damping() const { return damping_; }
  const Vector& stiffness() const { return stiffness_; }
  Index dims() const { return inertia_.size(); }

 private:
  Vector inertia_;
  Vector damping_;
  Vector stiffness_;
};

/// Commanded motion integrated by the admittance law.
struct ControllerState {
  Vector x_cmd;
  Vector v_cmd;

  static ControllerState at_rest(const Vector& x);
  bool all_finite() const { return x_cmd.allFinite() && v_cmd.allFinite(); }
};

struct TrackingError {
  Vector e;
  Vector e_dot;
};

/// e = x_d - x_cmd, e_dot = xd_dot - v_cmd.
TrackingError tracking_error(const ControllerState& state, const ReferenceSample& ref);

/// xdd_cmd = xdd_d + Lambda^-1 (D e_dot + K e + F_ext).
///
/// F_ext is the force the environment applies to the robot, so a constant
/// push settles at x - x_d = K^-1 F_ext.
Vector admittance_accel(const ControllerState& state, const ReferenceSample& ref,
                        const Vector& f_ext, const Gains& gains);

enum class Integrator {
  SemiImplicitEuler,
  RungeKutta4,
};

std::string_view to_string(Integrator integrator);
Integrator parse_integrator(std::string_view name);

/// Advances the commanded state by dt in (0, 0.01].
///
/// Semi-implicit Euler: v' = v + a dt, x' = x + v' dt. The RK4 variant holds
/// F_ext fixed and extrapolates the reference with its own velocity and
/// acceleration inside the step.
ControllerState step(const ControllerState& state, const ReferenceSample& ref,
                     const Vector& f_ext, const Gains& gains, double dt,
                     Integrator integrator = Integrator::SemiImplicitEuler);

/// Steady-state error when following a constant-velocity reference:
/// K^-1 D v without velocity feedforward, zero with it.
Vector steady_state_lag(const Gains& gains, const Vector& v_ref, bool velocity_ff);

}  // namespace vff
