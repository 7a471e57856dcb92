#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cvsw/field.hpp"
#include "cvsw/spectral.hpp"

namespace cvsw {

/**
 * @brief Trigonometric interpolant of a Field, evaluated by direct summation.
 *
 * p(x) = c_0 + 2 sum_{0<k<n/2} Re(c_k e^{ikx}) + c_{n/2} cos(n x / 2)
 *
 * which reproduces the nodal values exactly.  Cost is O(n) per point.
 */
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const Field& f) : coeffs_(f.coefficients()), nyq_(f.grid().nyquist()) {}

  double operator()(double x) const { return evaluate(x).first; }

  /// (p(x), p'(x)).
  std::pair<double, double> evaluate(double x) const {
    // e^{ikx} by recurrence, re-seeded periodically to bound drift.
    constexpr std::size_t reseed = 16;
    const Complex step = std::polar(1.0, x);
    Complex e(1.0, 0.0);
    double value = coeffs_[0].real();
    double slope = 0.0;
    for (std::size_t k = 1; k < nyq_; ++k) {
      e = (k % reseed == 0) ? std::polar(1.0, static_cast<double>(k) * x) : e * step;
      const Complex term = coeffs_[k] * e;
      value += 2.0 * term.real();
      slope -= 2.0 * static_cast<double>(k) * term.imag();
    }
    const double kn = static_cast<double>(nyq_);
    const double cn = coeffs_[nyq_].real();
    value += cn * std::cos(kn * x);
    slope -= cn * kn * std::sin(kn * x);
    return {value, slope};
  }

 private:
  std::vector<Complex> coeffs_;
  std::size_t nyq_;
};

/// Values of the trigonometric interpolant of f at arbitrary points.
inline std::vector<double> evaluate_at(const Field& f, std::span<const double> points) {
  const TrigInterpolant p(f);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = p(points[i]);
  return out;
}

/**
 * @brief Circle map phi(x) = x + displacement(x) with periodic displacement.
 *
 * Orientation preservation (phi_x > 0 at the nodes) is checked where it
 * matters (compose, invert) rather than at construction, because RK stage
 * derivatives of flow maps reuse this type.
 */
class DiffeoMap {
 public:
  explicit DiffeoMap(Field displacement) : displacement_(std::move(displacement)) {}

  static DiffeoMap identity(const SpectralGrid& grid) { return DiffeoMap(Field::zeros(grid)); }

  static DiffeoMap translation(const SpectralGrid& grid, double shift) {
    return DiffeoMap(Field::constant(grid, shift));
  }

  const Field& displacement() const { return displacement_; }
  const SpectralGrid& grid() const { return displacement_.grid(); }

  /// Lifted nodal values phi(x_j) = x_j + d_j.
  std::vector<double> nodal_values() const {
    std::vector<double> p(displacement_.size());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = grid().node(j) + displacement_[j];
    return p;
  }

  /// phi_x = 1 + d_x at the nodes.
  Field jacobian() const { return derivative(displacement_) + Field::constant(grid(), 1.0); }

  bool is_identity() const {
    return std::all_of(displacement_.values().begin(), displacement_.values().end(),
                       [](double v) { return v == 0.0; });
  }

  bool is_orientation_preserving() const { return jacobian().min() > 0.0; }

  /// Throws NonDiffeomorphismError unless phi_x > 0 at every node.
  void require_orientation_preserving(const char* where) const {
    const double jmin = jacobian().min();
    if (!(jmin > 0.0)) {
      throw NonDiffeomorphismError(std::string(where) + ": map is not orientation preserving (min phi_x = " +
                                   std::to_string(jmin) + ")");
    }
  }

 private:
  Field displacement_;
};

/// Nodal values f(phi(x_j)) of the composition f o phi.
inline Field compose(const Field& f, const DiffeoMap& phi) {
  f.check_same_grid(phi.displacement());
  phi.require_orientation_preserving("compose");
  const auto points = phi.nodal_values();
  return Field(f.grid(), evaluate_at(f, points));
}

struct InversionOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
};

/**
 * @brief Inverse map psi with phi(psi(x_j)) = x_j at every node.
 *
 * Each node is solved independently: the lifted nodal values of phi bracket
 * the root in one grid cell of width 2 pi / n, and a Newton iteration on the
 * trigonometric interpolant falls back to bisection whenever a step leaves
 * the bracket.
 */
inline DiffeoMap invert_diffeo(const DiffeoMap& phi, const InversionOptions& opts = {}) {
  const SpectralGrid& grid = phi.grid();
  const std::size_t n = grid.size();
  const double two_pi = 2.0 * std::numbers::pi;
  const double h = grid.spacing();

  if (phi.is_identity()) return phi;
  phi.require_orientation_preserving("invert_diffeo");

  // Lift of phi on one period plus the wrapped endpoint.
  auto p = phi.nodal_values();
  p.push_back(p.front() + two_pi);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (!(p[i] < p[i + 1])) {
      throw NonDiffeomorphismError("invert_diffeo: nodal values of phi are not strictly increasing at node " +
                                   std::to_string(i));
    }
  }

  const TrigInterpolant disp(phi.displacement());
  std::vector<double> inverse_disp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double target = grid.node(j);
    // Shift the target into [p_0, p_0 + 2 pi).
    const double wraps = std::floor((target - p.front()) / two_pi);
    const double t = target - wraps * two_pi;
    auto it = std::upper_bound(p.begin(), p.end(), t);
    std::size_t cell = static_cast<std::size_t>(std::distance(p.begin(), it));
    cell = std::clamp<std::size_t>(cell, 1, n) - 1;

    double lo = grid.node(cell);
    double hi = lo + h;
    double y = lo + h * (t - p[cell]) / (p[cell + 1] - p[cell]);
    bool converged = false;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      const auto [d, dd] = disp.evaluate(y);
      const double g = y + d - t;
      const double gp = 1.0 + dd;
      if (std::abs(g) <= opts.tolerance) {
        converged = true;
        break;
      }
      if (g > 0.0) hi = y; else lo = y;
      double next = (gp > 0.0) ? y - g / gp : lo - 1.0;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - y);
      y = next;
      if (step <= opts.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("invert_diffeo: no convergence at node " + std::to_string(j) + " after " +
                             std::to_string(opts.max_iterations) + " iterations");
    }
    inverse_disp[j] = (y + wraps * two_pi) - target;
  }
  return DiffeoMap(Field(grid, std::move(inverse_disp)));
}

}  // namespace cvsw
