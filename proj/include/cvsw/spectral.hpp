#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "cvsw/field.hpp"

namespace cvsw {

/**
 * @brief Apply a Fourier multiplier to a real field.
 *
 * `mult(k)` is called for k = 0..n/2 and must return the multiplier for the
 * non-negative wavenumber k; the negative half is its conjugate, which keeps
 * the result real.
 */
template <class Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& mult) {
  auto c = f.coefficients();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= mult(k);
  return Field::from_coefficients(f.grid(), std::move(c));
}

/// Df via i k; the Nyquist mode is dropped.
inline Field derivative(const Field& f) {
  const std::size_t nyq = f.grid().nyquist();
  return apply_multiplier(f, [nyq](std::size_t k) {
    return k == nyq ? Complex(0.0) : Complex(0.0, static_cast<double>(k));
  });
}

/// A u = u - u_xx, multiplier 1 + k^2.
inline Field helmholtz_apply(const Field& u) {
  return apply_multiplier(u, [](std::size_t k) {
    const double kk = static_cast<double>(k);
    return Complex(1.0 + kk * kk);
  });
}

/// A^{-1} m, multiplier 1 / (1 + k^2).
inline Field helmholtz_invert(const Field& m) {
  return apply_multiplier(m, [](std::size_t k) {
    const double kk = static_cast<double>(k);
    return Complex(1.0 / (1.0 + kk * kk));
  });
}

/// A^{-1} D w, multiplier i k / (1 + k^2); the Nyquist mode is dropped.
inline Field ainv_d(const Field& w) {
  const std::size_t nyq = w.grid().nyquist();
  return apply_multiplier(w, [nyq](std::size_t k) {
    if (k == nyq) return Complex(0.0);
    const double kk = static_cast<double>(k);
    return Complex(0.0, kk / (1.0 + kk * kk));
  });
}

/// (1 - D)^{-1} w, with D's real-field convention (no Nyquist derivative).
inline Field one_minus_d_inverse(const Field& w) {
  const std::size_t nyq = w.grid().nyquist();
  return apply_multiplier(w, [nyq](std::size_t k) {
    const double kk = k == nyq ? 0.0 : static_cast<double>(k);
    return 1.0 / Complex(1.0, -kk);
  });
}

/// (1 + D)^{-1} w, with D's real-field convention (no Nyquist derivative).
inline Field one_plus_d_inverse(const Field& w) {
  const std::size_t nyq = w.grid().nyquist();
  return apply_multiplier(w, [nyq](std::size_t k) {
    const double kk = k == nyq ? 0.0 : static_cast<double>(k);
    return 1.0 / Complex(1.0, kk);
  });
}

/// A^{-1} D through the factorization A = (1 - D)(1 + D):
/// A^{-1} D = 1/2 [(1 - D)^{-1} - (1 + D)^{-1}].
inline Field ainv_d_factorized(const Field& w) {
  return 0.5 * (one_minus_d_inverse(w) - one_plus_d_inverse(w));
}

/// 2/3-rule truncation: zero every mode with |k| > n/3.
inline Field dealias(const Field& f) {
  const std::size_t cutoff = f.grid().dealias_cutoff();
  return apply_multiplier(f, [cutoff](std::size_t k) { return Complex(k <= cutoff ? 1.0 : 0.0); });
}

/// Pointwise product followed by 2/3-rule truncation.
inline Field multiply_dealiased(const Field& f, const Field& g) { return dealias(f.pointwise(g)); }

/**
 * @brief Discrete Sobolev quantity ||f||^2_{H^s} = 2 pi sum_k (1 + k^2)^s |c_k|^2.
 *
 * Normalized so that s = 0 gives the L^2 norm squared on [0, 2 pi).
 */
inline double sobolev_norm_sq(const Field& f, double s) {
  const auto c = f.coefficients();
  const std::size_t nyq = f.grid().nyquist();
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double w = std::pow(1.0 + kk * kk, s);
    // Modes 1..n/2-1 appear twice (k and -k); k = 0 and the Nyquist mode once.
    const double mult = (k == 0 || k == nyq) ? 1.0 : 2.0;
    sum += mult * w * std::norm(c[k]);
  }
  return 2.0 * std::numbers::pi * sum;
}

}  // namespace cvsw
