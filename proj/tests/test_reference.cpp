#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "hots/reference.hpp"
#include "hots/tables.hpp"

using namespace hots;

namespace {

Material make_mat(double k0, double E0, double beta0) {
  Material m;
  m.name = "m";
  m.rho = Poly{{2.0}};
  m.c = Poly{{3.0}};
  m.k = Poly{{k0, 0.005}};
  m.E = Poly{{E0, -0.01}};
  m.beta = Poly{{beta0}};
  m.nu = 0.3;
  m.vmode = VarthetaMode::ThetaRef;
  m.vtheta_scale = 350.0;
  return m;
}

}  // namespace

// On a homogeneous medium the resolved model and the effective-coefficient
// model are the same problem, so both steppers must produce the same fields.
TEST(Reference, ResolvedMatchesHomogenizedOnHomogeneousMedium) {
  static Material A = make_mat(2.0, 200.0, 1.5);
  ThetaGrid grid{300.0, 400.0, 3};
  TriMesh cell = build_rect_mesh(8, 8, 1.0, 1.0);
  CellTable tab = build_cell_table(
      TableKind::Micro, cell, std::vector<const Material*>(cell.num_tris(), &A), grid);

  TriMesh mesh = build_rect_mesh(12, 12, 1.0, 1.0);
  StepperOptions opt;
  opt.dt = 0.01;
  opt.theta_ref = 330.0;
  auto theta_bc = [](const Vec2&, double) { return 330.0; };
  auto u_bc = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  auto heat = [](const Vec2& x, double) { return 500.0 * x[0]; };
  auto force = [](const Vec2&, double) { return Vec2(-10.0, -20.0); };

  ThermoMechStepper resolved(
      mesh, resolved_provider(std::vector<const Material*>(mesh.num_tris(), &A)), opt,
      theta_bc, u_bc, heat, force);
  ThermoMechStepper homog(mesh, table_provider(tab), opt, theta_bc, u_bc, heat, force);

  const int n = mesh.num_nodes();
  Eigen::VectorXd th0 = Eigen::VectorXd::Constant(n, 330.0);
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(2 * n), v0 = Eigen::VectorXd::Zero(2 * n);
  resolved.initialize(th0, u0, v0);
  homog.initialize(th0, u0, v0);

  for (int s = 0; s < 3; ++s) {
    FieldSnapshot a = resolved.step();
    FieldSnapshot b = homog.step();
    EXPECT_LT((a.theta - b.theta).lpNorm<Eigen::Infinity>(), 1e-5);
    EXPECT_LT((a.u - b.u).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

// Element classification folds centroids into each periodic cell.
TEST(Reference, ThreeScaleOwnerAssignsPhases) {
  static Material M = make_mat(2.0, 200.0, 1.5);
  static Material Pa = make_mat(1.0, 100.0, 1.0);
  static Material Pb = make_mat(4.0, 400.0, 2.5);

  TriMesh mesh = build_rect_mesh(16, 16, 1.0, 1.0);
  const double z1 = 0.5, z2 = 0.25;
  auto in_comp = [](const Vec2& y) {
    return y[0] > 0.25 && y[0] < 0.75 && y[1] > 0.25 && y[1] < 0.75;
  };
  auto in_a = [](const Vec2& z) { return z[0] < 0.5; };
  auto owner = three_scale_owner(mesh, z1, z2, in_comp, in_a, &M, &Pa, &Pb);

  int nm = 0, na = 0, nb = 0;
  for (int t = 0; t < mesh.num_tris(); ++t) {
    const Vec2 c = mesh.centroid(t);
    Vec2 y(c[0] / z1 - std::floor(c[0] / z1), c[1] / z1 - std::floor(c[1] / z1));
    if (!in_comp(y)) {
      EXPECT_EQ(owner[t], &M);
      ++nm;
    } else {
      Vec2 z(c[0] / z2 - std::floor(c[0] / z2), c[1] / z2 - std::floor(c[1] / z2));
      if (in_a(z)) {
        EXPECT_EQ(owner[t], &Pa);
        ++na;
      } else {
        EXPECT_EQ(owner[t], &Pb);
        ++nb;
      }
    }
  }
  EXPECT_GT(nm, 0);
  EXPECT_GT(na, 0);
  EXPECT_GT(nb, 0);
}

// A uniform relative perturbation of a field produces exactly that relative
// error in both norms.
TEST(Reference, RelativeErrorsOfScaledField) {
  TriMesh mesh = build_rect_mesh(16, 16, 1.0, 1.0);
  const int n = mesh.num_nodes();
  Eigen::VectorXd ref(n);
  for (int k = 0; k < n; ++k)
    ref[k] = std::sin(M_PI * mesh.nodes[k][0]) * std::sin(M_PI * mesh.nodes[k][1]);
  const double eps = 0.03;
  Eigen::VectorXd approx = (1.0 + eps) * ref;
  ErrorPair e = relative_errors(mesh, ref, approx);
  EXPECT_NEAR(e.l2, eps, 1e-12);
  EXPECT_NEAR(e.h1, eps, 1e-12);

  Eigen::VectorXd ref2(2 * n), ap2(2 * n);
  for (int k = 0; k < n; ++k) {
    ref2[2 * k] = ref[k];
    ref2[2 * k + 1] = 2.0 * ref[k];
  }
  ap2 = (1.0 + eps) * ref2;
  ErrorPair ev = relative_errors_vec(mesh, ref2, ap2);
  EXPECT_NEAR(ev.l2, eps, 1e-12);
  EXPECT_NEAR(ev.h1, eps, 1e-12);
}
