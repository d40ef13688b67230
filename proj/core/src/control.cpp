#include "vff/control.hpp"

#include <cmath>
#include <string>

#include "vff/errors.hpp"

namespace vff {

namespace {

void check_dims(const Gains& gains, Index d, const char* what) {
  if (d != gains.dims()) {
    throw InvalidArgument(std::string(what) + " has dimension " + std::to_string(d) +
                          ", gains have " + std::to_string(gains.dims()));
  }
}

}  // namespace

Gains::Gains(Vector inertia, Vector damping, Vector stiffness)
    : inertia_(std::move(inertia)), damping_(std::move(damping)), stiffness_(std::move(stiffness)) {
  if (inertia_.size() < 1) throw InvalidArgument("gains need at least one axis");
  if (damping_.size() != inertia_.size() || stiffness_.size() != inertia_.size()) {
    throw InvalidArgument("inertia, damping and stiffness must have equal length");
  }
  if (!inertia_.allFinite() || !damping_.allFinite() || !stiffness_.allFinite()) {
    throw InvalidArgument("gains must be finite");
  }
  if ((inertia_.array() <= 0.0).any()) throw InvalidArgument("desired inertia must be positive");
  if ((damping_.array() < 0.0).any()) throw InvalidArgument("damping must be non-negative");
  if ((stiffness_.array() < 0.0).any()) throw InvalidArgument("stiffness must be non-negative");
}

Gains Gains::critically_damped(Index dims, double inertia, double stiffness) {
  const double damping = 2.0 * std::sqrt(stiffness * inertia);
  return Gains(Vector::Constant(dims, inertia), Vector::Constant(dims, damping),
               Vector::Constant(dims, stiffness));
}

Gains Gains::defaults(Index dims) { return critically_damped(dims, 2.0, 400.0); }

ControllerState ControllerState::at_rest(const Vector& x) { return {x, Vector::Zero(x.size())}; }

TrackingError tracking_error(const ControllerState& state, const ReferenceSample& ref) {
  return {ref.x_d - state.x_cmd, ref.xd_dot - state.v_cmd};
}

Vector admittance_accel(const ControllerState& state, const ReferenceSample& ref,
                        const Vector& f_ext, const Gains& gains) {
  check_dims(gains, state.x_cmd.size(), "state");
  check_dims(gains, ref.x_d.size(), "reference");
  check_dims(gains, f_ext.size(), "external force");
  const TrackingError err = tracking_error(state, ref);
  const Vector spring_damper = gains.damping().cwiseProduct(err.e_dot) +
                               gains.stiffness().cwiseProduct(err.e) + f_ext;
  return ref.xd_ddot + spring_damper.cwiseQuotient(gains.inertia());
}

std::string_view to_string(Integrator integrator) {
  return integrator == Integrator::RungeKutta4 ? "rk4" : "semi_implicit_euler";
}

Integrator parse_integrator(std::string_view name) {
  if (name == "semi_implicit_euler") return Integrator::SemiImplicitEuler;
  if (name == "rk4") return Integrator::RungeKutta4;
  throw InvalidArgument("unknown integrator '" + std::string(name) + "'");
}

ControllerState step(const ControllerState& state, const ReferenceSample& ref, const Vector& f_ext,
                     const Gains& gains, double dt, Integrator integrator) {
  if (!(dt > 0.0 && dt <= 0.01)) {
    throw InvalidArgument("control step " + std::to_string(dt) + " s outside (0, 0.01]");
  }
  if (integrator == Integrator::SemiImplicitEuler) {
    const Vector acc = admittance_accel(state, ref, f_ext, gains);
    ControllerState next;
    next.v_cmd = state.v_cmd + acc * dt;
    next.x_cmd = state.x_cmd + next.v_cmd * dt;
    return next;
  }

  const auto shifted = [&](double tau) {
    return ReferenceSample{ref.x_d + tau * ref.xd_dot + 0.5 * tau * tau * ref.xd_ddot,
                           ref.xd_dot + tau * ref.xd_ddot, ref.xd_ddot};
  };
  const auto deriv = [&](const ControllerState& s, double tau) {
    return ControllerState{s.v_cmd, admittance_accel(s, shifted(tau), f_ext, gains)};
  };
  const auto advance = [](const ControllerState& s, const ControllerState& k, double h) {
    return ControllerState{s.x_cmd + h * k.x_cmd, s.v_cmd + h * k.v_cmd};
  };
  const ControllerState k1 = deriv(state, 0.0);
  const ControllerState k2 = deriv(advance(state, k1, 0.5 * dt), 0.5 * dt);
  const ControllerState k3 = deriv(advance(state, k2, 0.5 * dt), 0.5 * dt);
  const ControllerState k4 = deriv(advance(state, k3, dt), dt);
  return ControllerState{
      state.x_cmd + dt / 6.0 * (k1.x_cmd + 2.0 * k2.x_cmd + 2.0 * k3.x_cmd + k4.x_cmd),
      state.v_cmd + dt / 6.0 * (k1.v_cmd + 2.0 * k2.v_cmd + 2.0 * k3.v_cmd + k4.v_cmd)};
}

Vector steady_state_lag(const Gains& gains, const Vector& v_ref, bool velocity_ff) {
  check_dims(gains, v_ref.size(), "reference velocity");
  if ((gains.stiffness().array() <= 0.0).any()) {
    throw InvalidArgument("steady-state lag needs strictly positive stiffness");
  }
  if (velocity_ff) return Vector::Zero(v_ref.size());
  return gains.damping().cwiseProduct(v_ref).cwiseQuotient(gains.stiffness());
}

}  // namespace vff
