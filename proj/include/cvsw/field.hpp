#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "cvsw/error.hpp"
#include "cvsw/grid.hpp"

namespace cvsw {

/**
 * @brief Real periodic scalar function sampled on a SpectralGrid.
 *
 * A Field is immutable in spirit: every operation returns a new Field.  The
 * nodal samples are the stored representation; the Fourier coefficients are
 * produced on demand by coefficients() and converted back with
 * from_coefficients().
 */
class Field {
 public:
  Field(SpectralGrid grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw GridMismatchError("field has " + std::to_string(values_.size()) +
                              " samples but the grid has " + std::to_string(grid_.size()) +
                              " nodes");
    }
  }

  static Field zeros(const SpectralGrid& grid) { return constant(grid, 0.0); }

  static Field constant(const SpectralGrid& grid, double value) {
    return Field(grid, std::vector<double>(grid.size(), value));
  }

  static Field from_function(const SpectralGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
    return Field(grid, std::move(v));
  }

  static Field from_coefficients(const SpectralGrid& grid, std::vector<Complex> coeffs) {
    return Field(grid, grid.backward(std::move(coeffs)));
  }

  const SpectralGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }

  /// Normalized half-spectrum c_0..c_{n/2}; conjugate symmetry is implied.
  std::vector<Complex> coefficients() const { return grid_.forward(values_); }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) {
      if (!(std::abs(v) <= m)) m = std::abs(v);  // propagates NaN
    }
    return m;
  }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  /// Trapezoidal (= rectangle) rule for the integral over one period.
  double integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.spacing();
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Nodal values with the map applied pointwise.
  template <class F>
  Field map(F&& f) const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), std::forward<F>(f));
    return Field(grid_, std::move(out));
  }

  /// Pointwise product of nodal values without any dealiasing.
  Field pointwise(const Field& other) const {
    check_same_grid(other);
    std::vector<double> out(values_.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = values_[j] * other.values_[j];
    return Field(grid_, std::move(out));
  }

  Field& operator+=(const Field& other) {
    check_same_grid(other);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
    return *this;
  }

  Field& operator-=(const Field& other) {
    check_same_grid(other);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
    return *this;
  }

  Field& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }

  void check_same_grid(const Field& other) const {
    if (!(grid_ == other.grid_)) {
      throw GridMismatchError("fields live on different grids (n = " +
                              std::to_string(grid_.size()) + " vs " +
                              std::to_string(other.grid_.size()) + ")");
    }
  }

 private:
  SpectralGrid grid_;
  std::vector<double> values_;
};

/// Maximum nodal difference; the fields must share a grid.
inline double max_abs_diff(const Field& a, const Field& b) { return (a - b).max_abs(); }

}  // namespace cvsw
