#pragma once

#include <utility>

#include "cvsw/diffeo.hpp"
#include "cvsw/eulerian.hpp"
#include "cvsw/field.hpp"
#include "cvsw/model.hpp"
#include "cvsw/spectral.hpp"

namespace cvsw {

/**
 * @brief Point of the tangent bundle of (Diff x| C^inf) x R: the group element
 * (phi, f, s) and the Lagrangian velocity (v, sigma, alpha) = (phi_t, f_t, s_t).
 *
 * The same type carries time derivatives in the integrators; there `phi`
 * holds the rate of the displacement and need not be a diffeomorphism.
 */
struct LagrangianState {
  DiffeoMap phi;
  Field f;
  double s = 0.0;
  Field v;
  Field sigma;
  double alpha = 0.0;

  const SpectralGrid& grid() const { return v.grid(); }

  LagrangianState& operator+=(const LagrangianState& o) {
    phi = DiffeoMap(phi.displacement() + o.phi.displacement());
    f += o.f;
    s += o.s;
    v += o.v;
    sigma += o.sigma;
    alpha += o.alpha;
    return *this;
  }
  LagrangianState& operator*=(double c) {
    phi = DiffeoMap(c * phi.displacement());
    f *= c;
    s *= c;
    v *= c;
    sigma *= c;
    alpha *= c;
    return *this;
  }
  friend LagrangianState operator+(LagrangianState x, const LagrangianState& y) { return x += y; }
  friend LagrangianState operator*(double c, LagrangianState x) { return x *= c; }
};

/// R_phi (A^{-1} D) R_{phi^{-1}} w, the smoothing operator conjugated by the flow map.
inline Field conjugated_ainv_d(const DiffeoMap& phi, const DiffeoMap& phi_inverse, const Field& w) {
  if (phi.is_identity()) return ainv_d(w);
  return compose(ainv_d(compose(w, phi_inverse)), phi);
}

inline Field conjugated_ainv_d(const DiffeoMap& phi, const Field& w) {
  return conjugated_ainv_d(phi, invert_diffeo(phi), w);
}

/**
 * @brief The spray: d/dt (phi, f, s, v, sigma, alpha) = (v, sigma, alpha, S1, S2, 0) with
 *
 *   S1 = 1/2 (A^{-1} D)_phi (2 alpha v - kappa sigma^2 + (a - 3) v_x^2 / phi_x^2 - a v^2)
 *   S2 = (1 - a) sigma v_x / phi_x.
 *
 * phi^{-1} is recomputed on every call.  Throws NonDiffeomorphismError when
 * phi_x <= 0 at some node.
 */
inline LagrangianState spray_rhs(const LagrangianState& st, const ModelParams& p) {
  st.phi.require_orientation_preserving("spray_rhs");
  const Field phix = st.phi.jacobian();
  const Field vx = derivative(st.v);
  // u_x o phi = v_x / phi_x
  const Field q = vx.pointwise(phix.map([](double j) { return 1.0 / j; }));

  Field w = 2.0 * st.alpha * st.v;
  w -= p.kappa * multiply_dealiased(st.sigma, st.sigma);
  w += (p.a - 3.0) * multiply_dealiased(q, q);
  w -= p.a * multiply_dealiased(st.v, st.v);

  Field s1 = 0.5 * conjugated_ainv_d(st.phi, w);
  Field s2 = (1.0 - p.a) * multiply_dealiased(st.sigma, q);

  return {DiffeoMap(st.v), st.sigma, st.alpha, std::move(s1), std::move(s2), 0.0};
}

/// Lagrangian state at the identity carrying the Eulerian velocity.
inline LagrangianState from_eulerian(const EulerianState& e) {
  const SpectralGrid& g = e.grid();
  return {DiffeoMap::identity(g), Field::zeros(g), 0.0, e.velocity(), e.rho, e.alpha};
}

/// u = v o phi^{-1}, rho = sigma o phi^{-1}, m = A u.
inline EulerianState to_eulerian(const LagrangianState& st) {
  if (st.phi.is_identity()) return EulerianState::from_velocity(st.v, st.sigma, st.alpha);
  const DiffeoMap inverse = invert_diffeo(st.phi);
  return EulerianState::from_velocity(compose(st.v, inverse), compose(st.sigma, inverse), st.alpha);
}

}  // namespace cvsw
