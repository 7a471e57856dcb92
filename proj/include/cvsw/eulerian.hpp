#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "cvsw/field.hpp"
#include "cvsw/model.hpp"
#include "cvsw/spectral.hpp"

namespace cvsw {

/// Momentum m = A u, density-like rho and the constant vorticity alpha.
struct EulerianState {
  Field m;
  Field rho;
  double alpha = 0.0;

  static EulerianState from_velocity(const Field& u, Field rho, double alpha) {
    return {helmholtz_apply(u), std::move(rho), alpha};
  }

  Field velocity() const { return helmholtz_invert(m); }
  const SpectralGrid& grid() const { return m.grid(); }

  EulerianState& operator+=(const EulerianState& o) {
    m += o.m;
    rho += o.rho;
    alpha += o.alpha;
    return *this;
  }
  EulerianState& operator*=(double s) {
    m *= s;
    rho *= s;
    alpha *= s;
    return *this;
  }
  friend EulerianState operator+(EulerianState x, const EulerianState& y) { return x += y; }
  friend EulerianState operator*(double s, EulerianState x) { return x *= s; }
};

/// Which algebraic form of the Eulerian right-hand side drives the stepper.
enum class RhsForm { u_form, m_form };

inline std::string_view to_string(RhsForm f) { return f == RhsForm::u_form ? "u" : "m"; }

inline RhsForm parse_rhs_form(std::string_view s) {
  if (s == "u") return RhsForm::u_form;
  if (s == "m") return RhsForm::m_form;
  throw ParameterError("rhs form must be 'u' or 'm', got '" + std::string(s) + "'");
}

struct FieldPair {
  Field first;
  Field second;
};

/**
 * @brief Right-hand side in momentum form:
 *
 *   dm   = alpha u_x - a u_x m - u m_x - kappa rho rho_x
 *   drho = -u rho_x - (a - 1) u_x rho
 *
 * with u = A^{-1} m and every quadratic term dealiased.
 */
inline FieldPair rhs_m_form(const EulerianState& s, const ModelParams& p) {
  const Field u = s.velocity();
  const Field ux = derivative(u);
  const Field mx = derivative(s.m);
  const Field rhox = derivative(s.rho);

  Field dm = s.alpha * ux;
  dm -= p.a * multiply_dealiased(ux, s.m);
  dm -= multiply_dealiased(u, mx);
  dm -= p.kappa * multiply_dealiased(s.rho, rhox);

  Field drho = -multiply_dealiased(u, rhox);
  drho -= (p.a - 1.0) * multiply_dealiased(ux, s.rho);
  return {std::move(dm), std::move(drho)};
}

/**
 * @brief The quadratic operator S at the identity, in its nonlocal form
 *
 *   S1 = 1/2 A^{-1} D (2 alpha u - kappa rho^2 + (a - 3) u_x^2 - a u^2)
 *   S2 = (1 - a) rho u_x
 *
 * so that u_t + u u_x = S1 and rho_t + u rho_x = S2.
 */
inline FieldPair s_operator(const Field& u, const Field& rho, double alpha, const ModelParams& p) {
  const Field ux = derivative(u);
  Field w = 2.0 * alpha * u;
  w -= p.kappa * multiply_dealiased(rho, rho);
  w += (p.a - 3.0) * multiply_dealiased(ux, ux);
  w -= p.a * multiply_dealiased(u, u);
  Field s1 = 0.5 * ainv_d(w);
  Field s2 = (1.0 - p.a) * multiply_dealiased(rho, ux);
  return {std::move(s1), std::move(s2)};
}

/// Right-hand side in velocity form: du = S1 - u u_x, drho = S2 - u rho_x.
inline FieldPair rhs_u_form(const Field& u, const Field& rho, double alpha, const ModelParams& p) {
  auto [s1, s2] = s_operator(u, rho, alpha, p);
  s1 -= multiply_dealiased(u, derivative(u));
  s2 -= multiply_dealiased(u, derivative(rho));
  return {std::move(s1), std::move(s2)};
}

/// Time derivative of the state (alpha_t = 0) through the chosen form.
inline EulerianState eulerian_rhs(const EulerianState& s, const ModelParams& p, RhsForm form = RhsForm::u_form) {
  if (form == RhsForm::m_form) {
    auto [dm, drho] = rhs_m_form(s, p);
    return {std::move(dm), std::move(drho), 0.0};
  }
  auto [du, drho] = rhs_u_form(s.velocity(), s.rho, s.alpha, p);
  return {helmholtz_apply(du), std::move(drho), 0.0};
}

/**
 * @brief Relative disagreement of the two forms:
 * ||A(du) - dm||_inf / (1 + ||dm||_inf).
 */
inline double forms_equivalent(const Field& u, const Field& rho, double alpha, const ModelParams& p) {
  const EulerianState s = EulerianState::from_velocity(u, rho, alpha);
  const auto [dm, drho_m] = rhs_m_form(s, p);
  const auto [du, drho_u] = rhs_u_form(u, rho, alpha, p);
  const double dm_diff = max_abs_diff(helmholtz_apply(du), dm);
  const double drho_diff = max_abs_diff(drho_u, drho_m);
  return std::max(dm_diff / (1.0 + dm.max_abs()), drho_diff / (1.0 + drho_m.max_abs()));
}

}  // namespace cvsw
