#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvsw/lagrangian.hpp"
#include "test_support.hpp"

using namespace cvsw;
using cvsw::testing::random_bandlimited;

namespace {

LagrangianState at_identity(const Field& v, const Field& sigma, double alpha) {
  const SpectralGrid& g = v.grid();
  return {DiffeoMap::identity(g), Field::zeros(g), 0.0, v, sigma, alpha};
}

/// Random smooth displacement with phi_x >= 1 - max_slope.
Field random_displacement(const SpectralGrid& g, std::mt19937_64& rng, double max_slope) {
  Field d = random_bandlimited(g, 4, rng, 0.2);
  const double s = derivative(d).max_abs();
  if (s > max_slope) d *= max_slope / s;
  return d;
}

}  // namespace

TEST(Spray, IdentityReducesToEulerianS) {
  const SpectralGrid g(128);
  std::mt19937_64 rng(1);
  const ModelParams p(2.5, 0.7, 1.2);
  const Field v = random_bandlimited(g, 20, rng);
  const Field sigma = random_bandlimited(g, 20, rng);
  const auto d = spray_rhs(at_identity(v, sigma, p.alpha), p);
  const auto [s1, s2] = s_operator(v, sigma, p.alpha, p);
  EXPECT_EQ(max_abs_diff(d.v, s1), 0.0);
  EXPECT_LE(max_abs_diff(d.sigma, s2), 1e-15 * (1.0 + s2.max_abs()));
  EXPECT_EQ(max_abs_diff(d.phi.displacement(), v), 0.0);
  EXPECT_EQ(max_abs_diff(d.f, sigma), 0.0);
  EXPECT_EQ(d.s, p.alpha);
  EXPECT_EQ(d.alpha, 0.0);
}

TEST(Spray, ConstantVelocityIsSteady) {
  const SpectralGrid g(64);
  const ModelParams p(3.0, 0.9, 1.0);
  const auto d = spray_rhs(at_identity(Field::constant(g, 0.6), Field::zeros(g), p.alpha), p);
  EXPECT_LE(d.v.max_abs(), 1e-15);
  EXPECT_LE(d.sigma.max_abs(), 1e-15);
}

// The pulled-back fields v o phi^{-1} are not band-limited; n = 512 resolves
// them for phi_x > 1/2 (n = 256 leaves ~1e-6 in the unsmoothed sigma component).
TEST(Spray, Equivariance) {
  const SpectralGrid g(512);
  std::mt19937_64 rng(2);
  const ModelParams p(3.0, 0.5, 1.0);
  // Fixed example phi = x + 0.2 sin x, then random maps with phi_x > 1/2.
  std::vector<DiffeoMap> maps{DiffeoMap(Field::from_function(g, [](double x) { return 0.2 * std::sin(x); }))};
  for (int i = 0; i < 5; ++i) maps.emplace_back(random_displacement(g, rng, 0.45));
  for (const DiffeoMap& phi : maps) {
    ASSERT_GT(phi.jacobian().min(), 0.5);
    const Field v = random_bandlimited(g, 6, rng, 0.5);
    const Field sigma = random_bandlimited(g, 6, rng, 0.5);
    const LagrangianState st{phi, Field::zeros(g), 0.0, v, sigma, p.alpha};
    const auto d = spray_rhs(st, p);

    const DiffeoMap inv = invert_diffeo(phi);
    const auto [s1, s2] = s_operator(compose(v, inv), compose(sigma, inv), p.alpha, p);
    EXPECT_LE(max_abs_diff(d.v, compose(s1, phi)), 1e-8);
    EXPECT_LE(max_abs_diff(d.sigma, compose(s2, phi)), 1e-8);
  }
}

TEST(Spray, RejectsFoldedMap) {
  const SpectralGrid g(64);
  const ModelParams p;
  LagrangianState st = at_identity(Field::zeros(g), Field::zeros(g), 0.0);
  st.phi = DiffeoMap(Field::from_function(g, [](double x) { return 2.0 * std::sin(x); }));
  EXPECT_THROW(spray_rhs(st, p), NonDiffeomorphismError);
  EXPECT_THROW(to_eulerian(st), NonDiffeomorphismError);
}

TEST(Conversion, FromEulerian) {
  const SpectralGrid g(64);
  const auto zero = from_eulerian({Field::zeros(g), Field::zeros(g), 0.0});
  EXPECT_TRUE(zero.phi.is_identity());
  EXPECT_EQ(zero.v.max_abs(), 0.0);
  EXPECT_EQ(zero.sigma.max_abs(), 0.0);
  EXPECT_EQ(zero.f.max_abs(), 0.0);
  EXPECT_EQ(zero.s, 0.0);

  const Field two_cos = Field::from_function(g, [](double x) { return 2.0 * std::cos(x); });
  const auto l = from_eulerian({two_cos, Field::zeros(g), 0.4});
  EXPECT_LE(max_abs_diff(l.v, 0.5 * two_cos), 1e-15);
  EXPECT_EQ(l.alpha, 0.4);
}

TEST(Conversion, ToEulerian) {
  const SpectralGrid g(64);
  std::mt19937_64 rng(3);
  const Field v = random_bandlimited(g, 15, rng);
  const Field sigma = random_bandlimited(g, 15, rng);
  const auto e = to_eulerian(at_identity(v, sigma, 0.2));
  EXPECT_LE(max_abs_diff(e.m, helmholtz_apply(v)), 1e-15);
  EXPECT_EQ(max_abs_diff(e.rho, sigma), 0.0);
  EXPECT_EQ(e.alpha, 0.2);

  const double c0 = 0.3;
  LagrangianState shifted = at_identity(Field::from_function(g, [](double x) { return std::sin(x); }), Field::zeros(g), 0.0);
  shifted.phi = DiffeoMap::translation(g, c0);
  const Field u = to_eulerian(shifted).velocity();
  EXPECT_LE(max_abs_diff(u, Field::from_function(g, [c0](double x) { return std::sin(x - c0); })), 1e-12);
}

TEST(Conversion, RoundTripAtIdentity) {
  const SpectralGrid g(128);
  std::mt19937_64 rng(4);
  const auto e = EulerianState::from_velocity(random_bandlimited(g, 30, rng), random_bandlimited(g, 30, rng), -0.8);
  const auto back = to_eulerian(from_eulerian(e));
  EXPECT_LE(max_abs_diff(back.m, e.m), 1e-12 * e.m.max_abs());
  EXPECT_LE(max_abs_diff(back.rho, e.rho), 1e-12 * e.rho.max_abs());
  EXPECT_EQ(back.alpha, e.alpha);
}

TEST(Conversion, RoundTripThroughMap) {
  const SpectralGrid g(256);
  std::mt19937_64 rng(5);
  const DiffeoMap phi(random_displacement(g, rng, 0.3));
  const Field u = random_bandlimited(g, 6, rng);
  const Field rho = random_bandlimited(g, 6, rng);
  // Lagrangian fields carried by phi: v = u o phi, sigma = rho o phi.
  const LagrangianState st{phi, Field::zeros(g), 0.0, compose(u, phi), compose(rho, phi), 0.0};
  const auto e = to_eulerian(st);
  EXPECT_LE(max_abs_diff(e.velocity(), u), 1e-9);
  EXPECT_LE(max_abs_diff(e.rho, rho), 1e-9);
}

TEST(LagrangianState, LinearOperations) {
  const SpectralGrid g(32);
  std::mt19937_64 rng(6);
  const LagrangianState x{DiffeoMap(random_bandlimited(g, 3, rng, 0.1)), random_bandlimited(g, 3, rng), 0.5,
                          random_bandlimited(g, 3, rng), random_bandlimited(g, 3, rng), 0.25};
  const auto y = x + 2.0 * x;
  EXPECT_LE(max_abs_diff(y.phi.displacement(), 3.0 * x.phi.displacement()), 1e-15);
  EXPECT_LE(max_abs_diff(y.v, 3.0 * x.v), 1e-15);
  EXPECT_DOUBLE_EQ(y.s, 1.5);
  EXPECT_DOUBLE_EQ(y.alpha, 0.75);
}
