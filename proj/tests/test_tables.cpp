#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "hots/tables.hpp"

using namespace hots;

namespace {

Material theta_dep_mat(double k0, double k1, double E0) {
  Material m;
  m.name = "m";
  m.rho = Poly{{2.0}};
  m.c = Poly{{3.0, 0.001}};
  m.k = Poly{{k0, k1, 1e-5}};
  m.E = Poly{{E0, -0.01}};
  m.beta = Poly{{1.0, 1e-4}};
  m.nu = 0.3;
  m.vmode = VarthetaMode::ThetaRef;
  m.vtheta_scale = 300.0;
  return m;
}

// vertical laminate: left half A, right half B
std::vector<const Material*> laminate_owner(const TriMesh& mesh, const Material& A,
                                            const Material& B) {
  std::vector<const Material*> o(mesh.num_tris());
  for (int t = 0; t < mesh.num_tris(); ++t)
    o[t] = mesh.centroid(t)[0] < 0.5 ? &A : &B;
  return o;
}

}  // namespace

TEST(Tables, EffInterpolationAndSlope) {
  Material A = theta_dep_mat(1.0, 0.01, 100.0);
  Material B = theta_dep_mat(4.0, 0.02, 400.0);
  ThetaGrid grid{300.0, 400.0, 5};
  TriMesh mesh = build_rect_mesh(8, 8, 1.0, 1.0);
  CellTable tab = build_cell_table(TableKind::Micro, mesh, laminate_owner(mesh, A, B), grid);

  // transverse conductivity is the exact arithmetic mean at every sample
  for (int s = 0; s < grid.n; ++s) {
    const double th = grid.sample(s);
    EXPECT_NEAR(tab.eff[s].k(1, 1), 0.5 * (A.k(th) + B.k(th)), 1e-9);
  }
  // linear interpolation between samples
  const double mid = 0.5 * (grid.sample(1) + grid.sample(2));
  EXPECT_NEAR(tab.eff_at(mid).k(1, 1), 0.5 * (tab.eff[1].k(1, 1) + tab.eff[2].k(1, 1)), 1e-12);
  // clamped outside the grid
  EXPECT_NEAR(tab.eff_at(1e6).k(1, 1), tab.eff[grid.n - 1].k(1, 1), 1e-12);
  EXPECT_NEAR(tab.eff_at(-1e6).k(1, 1), tab.eff[0].k(1, 1), 1e-12);

  // central differences are exact for the quadratic theta dependence
  const double th1 = grid.sample(1);
  EXPECT_NEAR(tab.deff[1].k(1, 1), 0.5 * (A.k.deriv(th1) + B.k.deriv(th1)), 1e-9);

  // interval slope of the interpolant matches the sample difference quotient
  EXPECT_NEAR(tab.eff_slope_at(mid).k(1, 1),
              (tab.eff[2].k(1, 1) - tab.eff[1].k(1, 1)) / grid.step(), 1e-12);

  // field slope agrees with the field difference quotient
  Eigen::VectorXd sl = tab.scalar_slope_at("R_0", mid);
  Eigen::VectorXd ref = (tab.fields[2].s("R_0") - tab.fields[1].s("R_0")) / grid.step();
  EXPECT_LT((sl - ref).norm(), 1e-12);
}

// A meso cell consisting entirely of the micro composite must reproduce the
// micro coefficients exactly: all meso correctors vanish.
TEST(Tables, MesoOfPureCompositeIsIdentity) {
  Material A = theta_dep_mat(1.0, 0.01, 100.0);
  Material B = theta_dep_mat(4.0, 0.02, 400.0);
  ThetaGrid grid{300.0, 400.0, 3};
  TriMesh zmesh = build_rect_mesh(8, 8, 1.0, 1.0);
  CellTable micro =
      build_cell_table(TableKind::Micro, zmesh, laminate_owner(zmesh, A, B), grid);

  TriMesh ymesh = build_rect_mesh(4, 4, 1.0, 1.0);
  std::vector<const Material*> owner(ymesh.num_tris(), nullptr);
  CellTable meso = build_cell_table(TableKind::Meso, ymesh, owner, grid, &micro);

  for (int s = 0; s < grid.n; ++s) {
    EXPECT_LT((meso.eff[s].k - micro.eff[s].k).norm(), 1e-9);
    EXPECT_LT((meso.eff[s].C - micro.eff[s].C).norm(), 1e-6 * micro.eff[s].C.norm());
    EXPECT_LT((meso.eff[s].beta - micro.eff[s].beta).norm(), 1e-8);
    EXPECT_NEAR(meso.eff[s].rc, micro.eff[s].rc, 1e-8);
    EXPECT_NEAR(meso.eff[s].rho, micro.eff[s].rho, 1e-12);
    EXPECT_LT(meso.fields[s].s("M0_0").norm(), 1e-10);
    EXPECT_LT(meso.fields[s].v("P0").norm(), 1e-10);
    EXPECT_LT(meso.fields[s].v("N0_00").norm(), 1e-10);
    EXPECT_LT(meso.fields[s].s("A0").norm(), 1e-8);
    EXPECT_LT(meso.fields[s].v("H0_0").norm(), 1e-8);
  }
}

TEST(Tables, SaveLoadRoundtrip) {
  Material A = theta_dep_mat(1.0, 0.01, 100.0);
  Material B = theta_dep_mat(4.0, 0.02, 400.0);
  ThetaGrid grid{300.0, 350.0, 3};
  TriMesh mesh = build_rect_mesh(6, 6, 1.0, 1.0);
  CellTable tab = build_cell_table(TableKind::Micro, mesh, laminate_owner(mesh, A, B), grid);

  const std::string dir = std::filesystem::temp_directory_path() / "hots_tab_test";
  tab.save(dir, "abc123");
  EXPECT_EQ(cached_table_hash(dir), "abc123");

  CellTable back = CellTable::load(dir);
  EXPECT_EQ(back.kind, TableKind::Micro);
  EXPECT_EQ(back.grid.n, grid.n);
  EXPECT_EQ(back.mesh.num_nodes(), tab.mesh.num_nodes());
  EXPECT_EQ(back.mesh.num_tris(), tab.mesh.num_tris());
  for (int s = 0; s < grid.n; ++s) {
    EXPECT_EQ((back.eff[s].k - tab.eff[s].k).norm(), 0.0);
    EXPECT_EQ((back.eff[s].C - tab.eff[s].C).norm(), 0.0);
    EXPECT_EQ((back.deff[s].k - tab.deff[s].k).norm(), 0.0);
    for (const auto& [k, v] : tab.fields[s].scalar)
      EXPECT_EQ((back.fields[s].s(k) - v).norm(), 0.0) << k;
    for (const auto& [k, v] : tab.fields[s].vector)
      EXPECT_EQ((back.fields[s].v(k) - v).norm(), 0.0) << k;
  }
  std::filesystem::remove_all(dir);
}
