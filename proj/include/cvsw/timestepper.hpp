#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cvsw/diagnostics.hpp"
#include "cvsw/diffeo.hpp"
#include "cvsw/eulerian.hpp"
#include "cvsw/lagrangian.hpp"
#include "cvsw/model.hpp"

namespace cvsw {

enum class StepMethod { rk4, dopri45 };
enum class Formulation { eulerian, lagrangian };
enum class RunStatus { completed, blowup_detected, mesh_degenerate };

inline std::string_view to_string(StepMethod m) { return m == StepMethod::rk4 ? "rk4" : "dopri45"; }
inline std::string_view to_string(Formulation f) { return f == Formulation::eulerian ? "eulerian" : "lagrangian"; }
inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blowup_detected: return "blowup_detected";
    case RunStatus::mesh_degenerate: return "mesh_degenerate";
  }
  return "unknown";
}

inline StepMethod parse_step_method(std::string_view s) {
  if (s == "rk4") return StepMethod::rk4;
  if (s == "dopri45") return StepMethod::dopri45;
  throw ParameterError("step method must be 'rk4' or 'dopri45', got '" + std::string(s) + "'");
}

inline Formulation parse_formulation(std::string_view s) {
  if (s == "eulerian") return Formulation::eulerian;
  if (s == "lagrangian") return Formulation::lagrangian;
  throw ParameterError("formulation must be 'eulerian' or 'lagrangian', got '" + std::string(s) + "'");
}

struct StepControl {
  StepMethod method = StepMethod::rk4;
  double dt = 1e-3;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  double dt_min = 1e-12;
  double max_ux = 1e6;             ///< detection threshold on ||u_x||_inf
  double min_jacobian = 1e-3;      ///< Lagrangian runs stop when min phi_x drops below this

  void validate() const {
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ParameterError("tolerances must be positive");
    if (!(dt_min > 0.0) || dt < dt_min) throw ParameterError("need 0 < dt_min <= dt");
    if (!(max_ux > 0.0)) throw ParameterError("max_ux must be positive");
  }
};

/// Vector-space states the integrators can combine.
template <class S>
concept StepState = std::copyable<S> && requires(S a, const S& b, double c) {
  { a += b } -> std::same_as<S&>;
  { a *= c } -> std::same_as<S&>;
};

/// Classical four-stage Runge-Kutta step.
template <StepState State, class Rhs>
State rk4_step(const State& y, double dt, Rhs&& rhs) {
  const State k1 = rhs(y);
  State y2 = y;
  y2 += (0.5 * dt) * k1;
  const State k2 = rhs(y2);
  State y3 = y;
  y3 += (0.5 * dt) * k2;
  const State k3 = rhs(y3);
  State y4 = y;
  y4 += dt * k3;
  const State k4 = rhs(y4);

  State incr = k1;
  incr += 2.0 * k2;
  incr += 2.0 * k3;
  incr += k4;
  State out = y;
  out += (dt / 6.0) * incr;
  return out;
}

namespace detail {

/// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr std::array<std::array<double, 6>, 7> a{{
      {0, 0, 0, 0, 0, 0},
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
  }};
  static constexpr std::array<double, 7> b{35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
  static constexpr std::array<double, 7> b_low{5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640,
                                               -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

}  // namespace detail

template <class State>
struct AdaptiveStepResult {
  State state;           ///< new state if accepted, the input otherwise
  double dt_used = 0.0;
  double new_dt = 0.0;   ///< proposal for the next attempt
  bool accepted = false;
  double error_ratio = 0.0;  ///< error / tolerance; accepted iff <= 1
  bool below_dt_min = false;
};

/**
 * @brief One attempt of the embedded Dormand-Prince 4(5) pair.
 *
 * The error of the embedded difference is measured with `norm` and compared
 * with abs_tol + rel_tol * norm(y).  The fifth-order solution is kept.
 */
template <StepState State, class Rhs, class Norm>
AdaptiveStepResult<State> adaptive_step(const State& y, double dt, const StepControl& ctl, Rhs&& rhs, Norm&& norm) {
  using T = detail::DormandPrince;
  std::vector<State> k;
  k.reserve(7);
  k.push_back(rhs(y));
  for (std::size_t stage = 1; stage < 7; ++stage) {
    State ys = y;
    for (std::size_t j = 0; j < stage; ++j) {
      if (T::a[stage][j] != 0.0) ys += (dt * T::a[stage][j]) * k[j];
    }
    k.push_back(rhs(ys));
  }
  State high = y;
  State err_state = k[0];
  err_state *= 0.0;
  for (std::size_t j = 0; j < 7; ++j) {
    if (T::b[j] != 0.0) high += (dt * T::b[j]) * k[j];
    const double e = T::b[j] - T::b_low[j];
    if (e != 0.0) err_state += (dt * e) * k[j];
  }

  AdaptiveStepResult<State> out{y, dt, dt, false, 0.0, false};
  const double scale = ctl.abs_tol + ctl.rel_tol * norm(y);
  const double ratio = norm(err_state) / scale;
  out.error_ratio = ratio;
  constexpr double safety = 0.9;
  constexpr double grow_max = 5.0;
  constexpr double shrink_min = 0.2;
  if (ratio <= 1.0) {
    out.accepted = true;
    out.state = std::move(high);
    const double factor = ratio == 0.0 ? grow_max : std::clamp(safety * std::pow(ratio, -0.2), shrink_min, grow_max);
    out.new_dt = dt * factor;
  } else {
    // NaN ratios land here too and shrink maximally.
    const double factor = std::isfinite(ratio) ? std::clamp(safety * std::pow(ratio, -0.2), shrink_min, 1.0) : shrink_min;
    out.new_dt = dt * factor;
  }
  out.below_dt_min = out.new_dt < ctl.dt_min;
  return out;
}

/// ||m||_{L^2} + ||rho||_{H^1}.
inline double eulerian_error_norm(const Field& m, const Field& rho) {
  return std::sqrt(sobolev_norm_sq(m, 0)) + std::sqrt(sobolev_norm_sq(rho, 1));
}

// ---------------------------------------------------------------------------
// Formulations driven by run()
// ---------------------------------------------------------------------------

struct EulerianSystem {
  using State = EulerianState;
  ModelParams params;
  RhsForm form = RhsForm::u_form;

  State rhs(const State& s) const { return eulerian_rhs(s, params, form); }
  double norm(const State& s) const { return eulerian_error_norm(s.m, s.rho); }
  EulerianState eulerian(const State& s) const { return s; }
  static double alpha(const State& s) { return s.alpha; }
  std::optional<double> min_jacobian(const State&) const { return std::nullopt; }
  std::optional<Field> invariant(const State&) const { return std::nullopt; }
  std::optional<Field> displacement(const State&) const { return std::nullopt; }
};

struct LagrangianSystem {
  using State = LagrangianState;
  ModelParams params;

  State rhs(const State& s) const { return spray_rhs(s, params); }
  /// ||A v||_{L^2} + ||sigma||_{H^1} + ||phi - id||_{H^1} + ||f||_{L^2} + |s|.
  double norm(const State& s) const {
    return eulerian_error_norm(helmholtz_apply(s.v), s.sigma) + std::sqrt(sobolev_norm_sq(s.phi.displacement(), 1)) +
           std::sqrt(sobolev_norm_sq(s.f, 0)) + std::abs(s.s);
  }
  EulerianState eulerian(const State& s) const { return to_eulerian(s); }
  static double alpha(const State& s) { return s.alpha; }
  std::optional<double> min_jacobian(const State& s) const { return s.phi.jacobian().min(); }
  std::optional<Field> invariant(const State& s) const { return lemma61_invariant(s, params.a); }
  std::optional<Field> displacement(const State& s) const { return s.phi.displacement(); }
};

/// Eulerian state with a co-integrated flow map phi_t = u o phi.
struct TrackedEulerianState {
  EulerianState e;
  Field displacement;

  TrackedEulerianState& operator+=(const TrackedEulerianState& o) {
    e += o.e;
    displacement += o.displacement;
    return *this;
  }
  TrackedEulerianState& operator*=(double c) {
    e *= c;
    displacement *= c;
    return *this;
  }
  friend TrackedEulerianState operator+(TrackedEulerianState x, const TrackedEulerianState& y) { return x += y; }
  friend TrackedEulerianState operator*(double c, TrackedEulerianState x) { return x *= c; }
};

struct TrackedEulerianSystem {
  using State = TrackedEulerianState;
  ModelParams params;
  RhsForm form = RhsForm::u_form;

  State rhs(const State& s) const {
    return {eulerian_rhs(s.e, params, form), compose(s.e.velocity(), DiffeoMap(s.displacement))};
  }
  double norm(const State& s) const {
    return eulerian_error_norm(s.e.m, s.e.rho) + std::sqrt(sobolev_norm_sq(s.displacement, 1));
  }
  EulerianState eulerian(const State& s) const { return s.e; }
  static double alpha(const State& s) { return s.e.alpha; }
  std::optional<double> min_jacobian(const State& s) const { return DiffeoMap(s.displacement).jacobian().min(); }
  /// (rho o phi) phi_x^{a-1}.
  std::optional<Field> invariant(const State& s) const {
    const DiffeoMap phi(s.displacement);
    const double e = params.a - 1.0;
    return compose(s.e.rho, phi).pointwise(phi.jacobian().map([e](double j) { return std::exp(e * std::log(j)); }));
  }
  std::optional<Field> displacement(const State& s) const { return s.displacement; }
};

template <class S>
concept Formulated = requires(const S& sys, const typename S::State& x) {
  requires StepState<typename S::State>;
  { sys.rhs(x) } -> std::same_as<typename S::State>;
  { sys.norm(x) } -> std::convertible_to<double>;
  { sys.eulerian(x) } -> std::same_as<EulerianState>;
  { S::alpha(x) } -> std::convertible_to<double>;
  { sys.min_jacobian(x) } -> std::same_as<std::optional<double>>;
  { sys.invariant(x) } -> std::same_as<std::optional<Field>>;
};

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct Snapshot {
  double t = 0.0;
  EulerianState state;
  std::optional<Field> displacement;  ///< flow-map displacement for Lagrangian / tracked runs
};

struct RunOutcome {
  RunStatus status = RunStatus::completed;
  double t_final = 0.0;
  std::vector<Snapshot> trajectory;
  std::vector<DiagnosticsRecord> diagnostics;
  std::vector<std::pair<double, double>> ux_trace;  ///< (t, ||u_x||_inf) after every accepted step
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::string message;
};

struct RunOptions {
  Formulation formulation = Formulation::eulerian;
  RhsForm rhs_form = RhsForm::u_form;
  bool track_flowmap = false;
  std::vector<int> sobolev_orders = kDefaultSobolevOrders;
};

/**
 * @brief Integrate a formulation from t = 0 to T.
 *
 * Snapshots are taken every `snapshot_every` units of simulated time (0 means
 * only the initial and final states), the step being shortened to land on
 * them exactly.  After each accepted step ||u_x||_inf is checked against
 * ctl.max_ux; exceeding it, or an adaptive step falling below ctl.dt_min,
 * stops the run with blowup_detected.  That status records that the
 * continuation criterion was exceeded, not a proof of blow-up.
 */
template <Formulated System>
RunOutcome integrate(const System& sys, typename System::State y, double T, const StepControl& ctl,
                     double snapshot_every, const std::vector<int>& orders = kDefaultSobolevOrders) {
  using State = typename System::State;
  if (!(T > 0.0)) throw ParameterError("T must be positive");
  if (!(snapshot_every >= 0.0)) throw ParameterError("snapshot interval must be non-negative");
  ctl.validate();
  sys.params.validate();

  RunOutcome out;
  const double alpha0 = System::alpha(y);
  const std::optional<Field> invariant0 = sys.invariant(y);

  auto record = [&](double t, const State& s, const EulerianState& e) {
    DiagnosticsRecord r = make_record(t, e, sys.params, orders);
    if (invariant0) r.lemma61_deviation = max_abs_diff(*sys.invariant(s), *invariant0);
    out.diagnostics.push_back(std::move(r));
    out.trajectory.push_back({t, e, sys.displacement(s)});
  };

  record(0.0, y, sys.eulerian(y));

  const double every = snapshot_every > 0.0 ? std::min(snapshot_every, T) : T;
  std::size_t snap_index = 1;
  auto next_snapshot = [&] { return std::min(static_cast<double>(snap_index) * every, T); };

  double t = 0.0;
  double dt = ctl.dt;
  bool last_recorded = true;

  auto stop = [&](RunStatus status, std::string msg) {
    out.status = status;
    out.message = std::move(msg);
  };

  while (t < T) {
    const double target = next_snapshot();
    double h = std::min(dt, target - t);
    bool lands = false;
    if (target - t - h <= 1e-9 * h) {
      h = target - t;
      lands = true;
    }

    State next = y;
    try {
      if (ctl.method == StepMethod::rk4) {
        next = rk4_step(y, h, [&sys](const State& s) { return sys.rhs(s); });
      } else {
        auto res = adaptive_step(
            y, h, ctl, [&sys](const State& s) { return sys.rhs(s); }, [&sys](const State& s) { return sys.norm(s); });
        if (!res.accepted) {
          ++out.rejected_steps;
          dt = res.new_dt;
          if (res.below_dt_min) {
            stop(RunStatus::blowup_detected, "adaptive step fell below dt_min");
            break;
          }
          continue;
        }
        next = std::move(res.state);
        // A step shortened to land on a snapshot should not shrink the proposal.
        dt = lands ? std::max(dt, res.new_dt) : res.new_dt;
        if (res.below_dt_min) {
          y = std::move(next);
          t = lands ? target : t + h;
          ++out.accepted_steps;
          last_recorded = false;
          stop(RunStatus::blowup_detected, "adaptive step fell below dt_min");
          break;
        }
      }
    } catch (const NonDiffeomorphismError& e) {
      stop(RunStatus::mesh_degenerate, e.what());
      break;
    } catch (const ConvergenceError& e) {
      stop(RunStatus::mesh_degenerate, e.what());
      break;
    }

    if (System::alpha(next) != alpha0) throw Error("alpha changed during a step");
    y = std::move(next);
    t = lands ? target : t + h;
    ++out.accepted_steps;
    last_recorded = false;

    if (auto jmin = sys.min_jacobian(y); jmin && !(*jmin >= ctl.min_jacobian)) {
      stop(RunStatus::mesh_degenerate, "min phi_x = " + std::to_string(*jmin) + " below mesh threshold");
      break;
    }

    std::optional<EulerianState> view;
    try {
      view = sys.eulerian(y);
    } catch (const NonDiffeomorphismError& err) {
      stop(RunStatus::mesh_degenerate, err.what());
      break;
    } catch (const ConvergenceError& err) {
      stop(RunStatus::mesh_degenerate, err.what());
      break;
    }
    const EulerianState& e = *view;
    const double ux = derivative(e.velocity()).max_abs();
    out.ux_trace.emplace_back(t, ux);
    if (!(ux <= ctl.max_ux)) {
      out.t_final = t;
      record(t, y, e);
      last_recorded = true;
      stop(RunStatus::blowup_detected, "||u_x||_inf = " + std::to_string(ux) + " exceeded max_ux");
      break;
    }
    if (lands && t == target) {
      record(t, y, e);
      last_recorded = true;
      ++snap_index;
    }
  }

  out.t_final = t;
  if (!last_recorded) {
    try {
      record(t, y, sys.eulerian(y));
    } catch (const Error&) {
      // Degenerate map: the last recorded snapshot stands.
    }
  }
  return out;
}

/// Run from Eulerian initial data with the requested formulation.
inline RunOutcome run(const EulerianState& initial, const ModelParams& params, double T, const StepControl& ctl,
                      double snapshot_every, const RunOptions& opts = {}) {
  if (opts.formulation == Formulation::lagrangian) {
    return integrate(LagrangianSystem{params}, from_eulerian(initial), T, ctl, snapshot_every, opts.sobolev_orders);
  }
  if (opts.track_flowmap) {
    return integrate(TrackedEulerianSystem{params, opts.rhs_form},
                     TrackedEulerianState{initial, Field::zeros(initial.grid())}, T, ctl, snapshot_every,
                     opts.sobolev_orders);
  }
  return integrate(EulerianSystem{params, opts.rhs_form}, initial, T, ctl, snapshot_every, opts.sobolev_orders);
}

/// Fixed-step RK4 over the Eulerian equations (velocity form).
inline EulerianState rk4_step(const EulerianState& s, const ModelParams& p, double dt) {
  EulerianState out = rk4_step(s, dt, [&p](const EulerianState& x) { return eulerian_rhs(x, p); });
  out.alpha = s.alpha;
  return out;
}

/// Fixed-step RK4 over the geodesic spray.
inline LagrangianState rk4_step(const LagrangianState& s, const ModelParams& p, double dt) {
  LagrangianState out = rk4_step(s, dt, [&p](const LagrangianState& x) { return spray_rhs(x, p); });
  out.alpha = s.alpha;
  return out;
}

/// One adaptive attempt over the Eulerian equations with the control's tolerances.
inline AdaptiveStepResult<EulerianState> adaptive_step(const EulerianState& s, const ModelParams& p,
                                                       const StepControl& ctl) {
  const EulerianSystem sys{p};
  return adaptive_step(
      s, ctl.dt, ctl, [&sys](const EulerianState& x) { return sys.rhs(x); },
      [&sys](const EulerianState& x) { return sys.norm(x); });
}

}  // namespace cvsw
