#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>

#include "cvsw/error.hpp"

namespace cvsw {

/// Which root of the Burns relation c^2 - alpha c - 1 = 0 to use.
enum class Branch { right, left };

inline std::string_view to_string(Branch b) { return b == Branch::right ? "right" : "left"; }

inline Branch parse_branch(std::string_view s) {
  if (s == "right") return Branch::right;
  if (s == "left") return Branch::left;
  throw ParameterError("branch must be 'right' or 'left', got '" + std::string(s) + "'");
}

/**
 * @brief Parameters of the two-component system
 *
 *   m_t   = alpha u_x - a u_x m - u m_x - kappa rho rho_x
 *   rho_t = -u rho_x - (a - 1) u_x rho,        m = u - u_xx.
 *
 * a = 2 is the two-component Camassa-Holm family, a = 3 Degasperis-Procesi.
 */
struct ModelParams {
  double a = 2.0;
  double alpha = 0.0;
  double kappa = 1.0;

  ModelParams() = default;
  ModelParams(double a_, double alpha_, double kappa_) : a(a_), alpha(alpha_), kappa(kappa_) { validate(); }

  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(alpha) || !std::isfinite(kappa)) {
      throw ParameterError("model parameters must be finite");
    }
    if (a == 1.0) throw ParameterError("a = 1 excluded");
    if (!(kappa > 0.0)) throw ParameterError("kappa must be positive, got " + std::to_string(kappa));
  }
};

/// Linear wave speed over a linear shear current: root of c^2 - alpha c - 1 = 0.
inline double burns_speed(double alpha, Branch branch = Branch::right) {
  const double disc = std::sqrt(alpha * alpha + 4.0);
  // Evaluate the small-magnitude root through the product of roots (= -1)
  // so neither branch suffers cancellation.
  const double big = alpha >= 0.0 ? 0.5 * (alpha + disc) : 0.5 * (alpha - disc);
  const double small = -1.0 / big;
  if (branch == Branch::right) return alpha >= 0.0 ? big : small;
  return alpha >= 0.0 ? small : big;
}

/// Residuals of every relation the closed-form coefficients must satisfy.
struct ConstraintResiduals {
  double burns = 0.0;        ///< c^2 - alpha c - 1
  double k3_ratio = 0.0;     ///< k3/k1 - 1/(6(c - alpha))
  double rho_f = 0.0;        ///< k1 - (1 + alpha c / 2 + k2/k1)
  double m1n = 0.0;          ///< k3/k1 - alpha/6 + k0 (c - alpha)
  double beta_k0 = 0.0;      ///< beta0^2 - (k0 + 1/2)
  double beta_dual = 0.0;    ///< 1/(3c^2(c-alpha)^2) - [(alpha c - alpha^2 - 1)/(6(c-alpha)^2) + 1/2]
  double m1p = 0.0;          ///< momentum closure with the 2(a-2)k1 term (reported only)
  double m1p_variant = 0.0;  ///< same closure with the (a-2)k1 term (reported only)

  /// Largest magnitude among the residuals that are required to vanish.
  double max_asserted() const {
    double m = 0.0;
    for (double r : {burns, k3_ratio, rho_f, m1n, beta_k0, beta_dual}) m = std::fmax(m, std::abs(r));
    return m;
  }
};

struct DerivedCoefficients {
  double c = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k0 = 0.0;
  double beta0_sq = 0.0;
  ConstraintResiduals residuals;
};

namespace detail {

/// k1(1+a) - [1 - c^2((k1^2 + 2 k2)/k1 + factor (a - 2) k1)].
inline double m1p_residual(double a, double c, double k1, double k2, double factor) {
  return k1 * (1.0 + a) - (1.0 - c * c * ((k1 * k1 + 2.0 * k2) / k1 + factor * (a - 2.0) * k1));
}

}  // namespace detail

/// Residuals of the momentum closure relation, for both printed forms of the (a-2)k1 term.
inline std::pair<double, double> check_m1p_constraint(const DerivedCoefficients& coeffs, const ModelParams& params) {
  return {detail::m1p_residual(params.a, coeffs.c, coeffs.k1, coeffs.k2, 2.0),
          detail::m1p_residual(params.a, coeffs.c, coeffs.k1, coeffs.k2, 1.0)};
}

/**
 * @brief Closed-form derivation coefficients and their constraint residuals.
 *
 * Throws ParameterError for a = -1 (k1 divides by a + 1) and when any
 * required constraint fails to hold to 1e-10 relative to the size of the
 * terms involved.
 */
inline DerivedCoefficients derive_coefficients(const ModelParams& params, Branch branch = Branch::right) {
  params.validate();
  const double a = params.a;
  const double alpha = params.alpha;
  if (a == -1.0) throw ParameterError("a = -1 excluded: k1 has divisor a + 1");

  DerivedCoefficients out;
  const double c = burns_speed(alpha, branch);
  const double cma = c - alpha;
  if (cma == 0.0 || c == 0.0) throw ParameterError("degenerate wave speed: c - alpha = 0");
  const double c2 = c * c;

  out.c = c;
  out.k1 = 1.0 / ((1.0 + c2) * (a + 1.0)) + c2 / (a + 1.0);
  out.k2 = (1.0 / ((a + 1.0) * (1.0 + c2)) + c2 * (1.0 - a) / (2.0 * (a + 1.0)) - 0.5) * out.k1;
  out.k3 = out.k1 / (6.0 * cma);
  out.beta0_sq = 1.0 / (3.0 * c2 * cma * cma);
  out.k0 = out.beta0_sq - 0.5;

  auto& r = out.residuals;
  r.burns = c2 - alpha * c - 1.0;
  r.k3_ratio = out.k3 / out.k1 - 1.0 / (6.0 * cma);
  r.rho_f = out.k1 - (1.0 + alpha * c / 2.0 + out.k2 / out.k1);
  r.m1n = out.k3 / out.k1 - alpha / 6.0 + out.k0 * cma;
  r.beta_k0 = out.beta0_sq - (out.k0 + 0.5);
  r.beta_dual = out.beta0_sq - ((alpha * c - alpha * alpha - 1.0) / (6.0 * cma * cma) + 0.5);
  std::tie(r.m1p, r.m1p_variant) = check_m1p_constraint(out, params);

  // Scale of the terms entering the residuals, for a relative check.
  const double scale = 1.0 + c2 + std::abs(alpha * c) + alpha * alpha + std::abs(out.k1) +
                       std::abs(out.k2 / out.k1) + std::abs(out.k0 * cma);
  if (!(r.max_asserted() <= 1e-10 * scale)) {
    throw Error("coefficient constraints violated (max residual " + std::to_string(r.max_asserted()) + ")");
  }
  return out;
}

}  // namespace cvsw
