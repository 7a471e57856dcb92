#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "cvsw/error.hpp"
#include "cvsw/field.hpp"

namespace cvsw {

/// amplitude * exp(-(x - center)^2 / (2 width^2)), periodized over wrapped images.
struct GaussianBump {
  double center = std::numbers::pi;
  double width = 0.5;
  double amplitude = 1.0;
};

/// amplitude * cos(mode x + phase).
struct Cosine {
  int mode = 1;
  double amplitude = 1.0;
  double phase = 0.0;
};

struct Constant {
  double value = 0.0;
};

/// Nodal samples given directly; the count must match the grid.
struct CustomSamples {
  std::vector<double> values;
};

/// Random band-limited field: modes 1..kmax with coefficients ~ amplitude / k^2, reproducible from `seed`.
struct RandomModes {
  int kmax = 8;
  double amplitude = 0.1;
  std::uint64_t seed = 1;
};

using InitialTerm = std::variant<GaussianBump, Cosine, Constant, CustomSamples, RandomModes>;

/// Sum of terms; an empty descriptor is the zero field.
struct InitialCondition {
  std::vector<InitialTerm> terms;
};

/// Number of wrapped images on each side of the primary bump.
inline constexpr int kGaussianImages = 3;

inline Field initial_condition(const InitialTerm& term, const SpectralGrid& grid) {
  return std::visit(
      [&grid](const auto& t) -> Field {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, GaussianBump>) {
          if (!(t.width > 0.0)) throw ParameterError("gaussian width must be positive");
          const double two_pi = 2.0 * std::numbers::pi;
          return Field::from_function(grid, [&t, two_pi](double x) {
            double s = 0.0;
            for (int img = -kGaussianImages; img <= kGaussianImages; ++img) {
              const double d = (x - t.center + two_pi * img) / t.width;
              s += std::exp(-0.5 * d * d);
            }
            return t.amplitude * s;
          });
        } else if constexpr (std::is_same_v<T, Cosine>) {
          if (t.mode < 0 || static_cast<std::size_t>(t.mode) > grid.dealias_cutoff()) {
            throw ParameterError("cosine mode " + std::to_string(t.mode) + " is beyond the dealiasing cutoff n/3 = " +
                                 std::to_string(grid.dealias_cutoff()));
          }
          return Field::from_function(grid, [&t](double x) { return t.amplitude * std::cos(t.mode * x + t.phase); });
        } else if constexpr (std::is_same_v<T, Constant>) {
          return Field::constant(grid, t.value);
        } else if constexpr (std::is_same_v<T, CustomSamples>) {
          if (t.values.size() != grid.size()) {
            throw ParameterError("custom samples: expected " + std::to_string(grid.size()) + " values, got " +
                                 std::to_string(t.values.size()));
          }
          return Field(grid, t.values);
        } else {
          if (t.kmax < 1 || static_cast<std::size_t>(t.kmax) > grid.dealias_cutoff()) {
            throw ParameterError("random kmax must lie in [1, n/3]");
          }
          std::mt19937_64 rng(t.seed);
          std::normal_distribution<double> normal(0.0, 1.0);
          std::vector<double> ak(t.kmax + 1), bk(t.kmax + 1);
          for (int k = 1; k <= t.kmax; ++k) {
            ak[k] = normal(rng) * t.amplitude / (k * k);
            bk[k] = normal(rng) * t.amplitude / (k * k);
          }
          return Field::from_function(grid, [&](double x) {
            double s = 0.0;
            for (int k = 1; k <= t.kmax; ++k) s += ak[k] * std::cos(k * x) + bk[k] * std::sin(k * x);
            return s;
          });
        }
      },
      term);
}

inline Field initial_condition(const InitialCondition& ic, const SpectralGrid& grid) {
  Field out = Field::zeros(grid);
  for (const auto& term : ic.terms) out += initial_condition(term, grid);
  return out;
}

}  // namespace cvsw
