#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cvsw/eulerian.hpp"
#include "cvsw/field.hpp"
#include "cvsw/lagrangian.hpp"
#include "cvsw/spectral.hpp"

namespace cvsw {

/**
 * @brief Squared norm of the invariant inner product of the a = 2 flow:
 *
 *   int u_x^2 + int (u - alpha/2)^2 + alpha^2/2 + kappa int rho^2.
 *
 * It is conserved only for a = 2 but can be evaluated for any state.
 */
inline double energy_a2(const Field& u, const Field& rho, double alpha, double kappa) {
  const Field ux = derivative(u);
  const Field shifted = u.map([alpha](double x) { return x - 0.5 * alpha; });
  return ux.pointwise(ux).integral() + shifted.pointwise(shifted).integral() + 0.5 * alpha * alpha +
         kappa * rho.pointwise(rho).integral();
}

/// int rho^{1/(a-1)} dx, or nullopt when rho is not strictly positive.
inline std::optional<double> casimir(const Field& rho, double a) {
  if (a == 1.0) throw ParameterError("casimir: a = 1 excluded");
  if (!(rho.min() > 0.0)) return std::nullopt;
  const double e = 1.0 / (a - 1.0);
  return rho.map([e](double r) { return std::exp(e * std::log(r)); }).integral();
}

/// sigma * phi_x^{a-1} at the nodes; constant in time along the flow.
inline Field lemma61_invariant(const LagrangianState& st, double a) {
  const Field jac = st.phi.jacobian();
  const double e = a - 1.0;
  return st.sigma.pointwise(jac.map([e](double j) { return std::exp(e * std::log(j)); }));
}

/// ||m||^2_{H^k} + ||rho||^2_{H^{k+1}}.
inline double sobolev_norm_pair(const Field& m, const Field& rho, int k) {
  return sobolev_norm_sq(m, k) + sobolev_norm_sq(rho, k + 1);
}

struct PositivityReport {
  bool applicable = false;  ///< rho_0 was not identically zero
  bool preserved = false;
  std::optional<double> first_violation_t;
};

/**
 * @brief Scan min rho over snapshots (t_i, rho_i), the first being the initial datum.
 *
 * rho_0 identically zero: not applicable.  rho_0 with a non-positive node:
 * the premise fails and the report is a violation at the initial time.
 */
inline PositivityReport positivity_report(std::span<const double> times, std::span<const Field> rho) {
  if (times.empty() || times.size() != rho.size()) throw Error("positivity_report: empty or mismatched trajectory");
  PositivityReport out;
  if (rho.front().max_abs() == 0.0) return out;
  out.applicable = true;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i].min() > 0.0)) {
      out.first_violation_t = times[i];
      return out;
    }
  }
  out.preserved = true;
  return out;
}

/// Default Sobolev orders tracked in every record.
inline const std::vector<int> kDefaultSobolevOrders{0, 1, 2};

struct DiagnosticsRecord {
  double t = 0.0;
  double energy_a2 = 0.0;
  double mean_u = 0.0;
  std::optional<double> casimir;
  double min_rho = 0.0;
  double max_ux = 0.0;
  std::map<int, double> h_norms;
  std::optional<double> lemma61_deviation;

  /// Finite entries everywhere a value is defined.
  bool finite() const {
    bool ok = std::isfinite(energy_a2) && std::isfinite(mean_u) && std::isfinite(min_rho) && std::isfinite(max_ux);
    if (casimir) ok = ok && std::isfinite(*casimir);
    if (lemma61_deviation) ok = ok && std::isfinite(*lemma61_deviation);
    for (const auto& [k, v] : h_norms) ok = ok && std::isfinite(v);
    return ok;
  }
};

inline DiagnosticsRecord make_record(double t, const EulerianState& s, const ModelParams& p,
                                     const std::vector<int>& orders = kDefaultSobolevOrders) {
  DiagnosticsRecord r;
  r.t = t;
  const Field u = s.velocity();
  r.energy_a2 = energy_a2(u, s.rho, s.alpha, p.kappa);
  r.mean_u = u.integral();
  r.casimir = casimir(s.rho, p.a);
  r.min_rho = s.rho.min();
  r.max_ux = derivative(u).max_abs();
  for (int k : orders) r.h_norms[k] = sobolev_norm_pair(s.m, s.rho, k);
  return r;
}

}  // namespace cvsw
