#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "cvsw/error.hpp"

namespace cvsw {

using Complex = std::complex<double>;

namespace detail {

/// FFTW plans for one transform length.  Planning is not thread-safe in FFTW,
/// so it is serialized; executing a plan through the new-array interface is.
class FftPlans {
 public:
  explicit FftPlans(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* real = fftw_alloc_real(n);
    auto* spec = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(len, real, spec, flags);
    backward_ = fftw_plan_dft_c2r_1d(len, spec, real, flags);
    fftw_free(real);
    fftw_free(spec);
    if (forward_ == nullptr || backward_ == nullptr) {
      throw Error("FFTW planning failed for n = " + std::to_string(n));
    }
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  ~FftPlans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  /// Unnormalized r2c transform of n reals into n/2+1 coefficients.
  void forward(const double* in, Complex* out) const {
    // r2c does not modify its input; FFTW's signature is simply not const.
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
  }

  /// Unnormalized c2r transform; clobbers `in`.
  void backward(Complex* in, double* out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
  }

  std::size_t size() const { return n_; }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

/**
 * @brief Uniform periodic grid on [0, 2pi) with n nodes x_j = 2 pi j / n.
 *
 * Wavenumbers run over {-n/2+1, ..., n/2}.  Real fields are stored in the
 * half spectrum k = 0..n/2; the k = n/2 entry is the Nyquist mode.
 * Copies share the transform plans.
 */
class SpectralGrid {
 public:
  explicit SpectralGrid(std::size_t n) : n_(n) {
    if (n < 8 || n % 2 != 0) {
      throw ParameterError("grid size must be even and >= 8, got " + std::to_string(n));
    }
    plans_ = std::make_shared<const detail::FftPlans>(n);
  }

  std::size_t size() const { return n_; }
  std::size_t nyquist() const { return n_ / 2; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }
  /// Largest wavenumber retained by the 2/3 dealiasing rule.
  std::size_t dealias_cutoff() const { return n_ / 3; }
  double spacing() const { return 2.0 * std::numbers::pi / static_cast<double>(n_); }
  double node(std::size_t j) const { return spacing() * static_cast<double>(j); }

  std::vector<double> nodes() const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = node(j);
    return x;
  }

  /// Normalized coefficients c_k (k = 0..n/2) with f(x_j) = sum_k c_k e^{i k x_j}.
  std::vector<Complex> forward(std::span<const double> values) const {
    std::vector<Complex> c(spectrum_size());
    plans_->forward(values.data(), c.data());
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& ck : c) ck *= scale;
    return c;
  }

  /// Nodal values from normalized half-spectrum coefficients.
  std::vector<double> backward(std::vector<Complex> coeffs) const {
    if (coeffs.size() != spectrum_size()) {
      throw GridMismatchError("spectrum length does not match grid");
    }
    // c2r ignores the imaginary part of the k = 0 and Nyquist entries.
    std::vector<double> values(n_);
    plans_->backward(coeffs.data(), values.data());
    return values;
  }

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) { return a.n_ == b.n_; }

 private:
  std::size_t n_;
  std::shared_ptr<const detail::FftPlans> plans_;
};

}  // namespace cvsw
