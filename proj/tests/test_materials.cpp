#include <gtest/gtest.h>

#include "hots/materials.hpp"

using namespace hots;

namespace {

// Three-phase data set used across the examples (dimensionless units).
Material mat1() {
  Material m;
  m.name = "mat1";
  m.rho = {{4410.0}};
  m.c = {{808.3, 0.081, 8e-5}};
  m.k = {{1000.0, 0.1, 1e-5}};
  m.E = {{3.0e7, -300.0, -0.03}};
  m.nu = 0.30;
  m.beta = {{19.0, -1.9e-3, -1.9e-7}};
  m.vmode = VarthetaMode::ThetaRef;
  m.vtheta_scale = 373.15;
  return m;
}

Material mat2() {
  Material m;
  m.name = "mat2";
  m.rho = {{5600.0}};
  m.c = {{615.6, 0.062, 6e-5}};
  m.k = {{1.0, 1e-4, 1e-8}};
  m.E = {{6.0e6, -60.0, -0.006}};
  m.nu = 0.20;
  m.beta = {{17.0, -1.7e-3, -1.7e-7}};
  m.vmode = VarthetaMode::ThetaRef;
  m.vtheta_scale = 373.15;
  return m;
}

}  // namespace

TEST(Materials, PolynomialEvaluation) {
  // hand-computed: k1(373.15) = 1000 + 0.1*373.15 + 1e-5*373.15^2
  const double th = 373.15;
  auto p1 = mat1().evaluate(th);
  EXPECT_NEAR(p1.k(0, 0), 1000.0 + 0.1 * th + 1e-5 * th * th, 1e-10);
  EXPECT_NEAR(p1.k(0, 0), 1038.707409225, 1e-8);
  EXPECT_NEAR(p1.k(0, 1), 0.0, 0.0);
  auto p2 = mat2().evaluate(th);
  EXPECT_NEAR(p2.rc / p2.rho, 615.6 + 0.062 * th + 6e-5 * th * th, 1e-10);
}

TEST(Materials, PolynomialDerivative) {
  const double th = 373.15;
  auto d = mat2().evaluate_dtheta(th);
  // k2'(t) = 1e-4 + 2e-8 t
  EXPECT_NEAR(d.k(0, 0), 1e-4 + 2e-8 * th, 1e-15);
  // central difference cross-check on rho*c
  const double h = 1e-3;
  auto lo = mat2().evaluate(th - h), hi = mat2().evaluate(th + h);
  EXPECT_NEAR(d.rc, (hi.rc - lo.rc) / (2 * h), 1e-4);
}

TEST(Materials, PlaneStrainElasticity) {
  auto p = mat1().evaluate(300.0);
  const double E = 3.0e7 - 300.0 * 300.0 - 0.03 * 300.0 * 300.0;
  const double nu = 0.30;
  const double lam = E * nu / ((1 + nu) * (1 - 2 * nu));
  const double mu = E / (2 * (1 + nu));
  EXPECT_NEAR(p.C(0, 0), lam + 2 * mu, 1e-6);
  EXPECT_NEAR(p.C(0, 1), lam, 1e-6);
  EXPECT_NEAR(p.C(2, 2), mu, 1e-6);
  EXPECT_NEAR(p.C(0, 2), 0.0, 0.0);
  // 4-index access consistency
  EXPECT_EQ(p.C4(0, 0, 0, 0), p.C(0, 0));
  EXPECT_EQ(p.C4(0, 1, 0, 1), p.C(2, 2));
  EXPECT_EQ(p.C4(1, 0, 0, 1), p.C(2, 2));
}

TEST(Materials, VarthetaModes) {
  auto m = mat1();
  auto p = m.evaluate(400.0);
  EXPECT_NEAR(p.vartheta(0, 0), 373.15 * p.beta(0, 0), 1e-12);
  m.vmode = VarthetaMode::Gamma;
  m.vtheta_scale = 2.5;
  p = m.evaluate(400.0);
  EXPECT_NEAR(p.vartheta(1, 1), 2.5 * p.beta(1, 1), 1e-12);
  m.vmode = VarthetaMode::Zero;
  p = m.evaluate(400.0);
  EXPECT_EQ(p.vartheta.norm(), 0.0);
}

TEST(Materials, PositivityGuard) {
  Material m = mat1();
  m.k = {{-1.0}};
  EXPECT_THROW(m.evaluate(300.0), std::runtime_error);
}

TEST(Materials, ThetaGridInterp) {
  ThetaGrid g{300.0, 800.0, 11};
  EXPECT_NEAR(g.sample(0), 300.0, 0.0);
  EXPECT_NEAR(g.sample(10), 800.0, 0.0);
  EXPECT_NEAR(g.step(), 50.0, 1e-12);
  int i0;
  double w;
  g.locate(375.0, i0, w);
  EXPECT_EQ(i0, 1);
  EXPECT_NEAR(w, 0.5, 1e-12);
  g.locate(200.0, i0, w);  // clamps below
  EXPECT_EQ(i0, 0);
  EXPECT_EQ(w, 0.0);
  g.locate(900.0, i0, w);  // clamps above
  EXPECT_EQ(i0, 9);
  EXPECT_EQ(w, 1.0);
}
