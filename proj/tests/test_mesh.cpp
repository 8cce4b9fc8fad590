#include <gtest/gtest.h>

#include "hots/mesh.hpp"

using namespace hots;

TEST(Mesh, CrossedUnitCellCounts) {
  TriMesh m = build_rect_mesh(1, 1);
  EXPECT_EQ(m.num_nodes(), 5);
  EXPECT_EQ(m.num_tris(), 4);
  EXPECT_NEAR(m.total_area(), 1.0, 1e-14);
  for (int t = 0; t < m.num_tris(); ++t) EXPECT_GT(m.area(t), 0.0);
}

TEST(Mesh, CrossedCountsGeneral) {
  const int nx = 7, ny = 4;
  TriMesh m = build_rect_mesh(nx, ny, 2.0, 1.0);
  EXPECT_EQ(m.num_nodes(), (nx + 1) * (ny + 1) + nx * ny);
  EXPECT_EQ(m.num_tris(), 4 * nx * ny);
  EXPECT_NEAR(m.total_area(), 2.0, 1e-12);
  EXPECT_EQ(static_cast<int>(m.bedges.size()), 2 * (nx + ny));
}

TEST(Mesh, BoundaryTags) {
  TriMesh m = build_rect_mesh(3, 3);
  auto left = m.boundary_nodes({"left"});
  EXPECT_EQ(static_cast<int>(left.size()), 4);
  for (int n : left) EXPECT_NEAR(m.nodes[n].x(), 0.0, 1e-15);
  auto all = m.boundary_nodes();
  EXPECT_EQ(static_cast<int>(all.size()), 12);
}

TEST(Mesh, ShapeGradientPartitionOfUnity) {
  TriMesh m = build_rect_mesh(2, 3);
  for (int t = 0; t < m.num_tris(); ++t) {
    auto B = m.shape_grads(t);
    EXPECT_NEAR((B.col(0) + B.col(1) + B.col(2)).norm(), 0.0, 1e-12);
    // gradients reproduce linear field x+2y exactly
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < 3; ++a) {
      const Vec2& p = m.nodes[m.tris[t].v[a]];
      g += (p.x() + 2 * p.y()) * B.col(a);
    }
    EXPECT_NEAR(g.x(), 1.0, 1e-12);
    EXPECT_NEAR(g.y(), 2.0, 1e-12);
  }
}

TEST(Mesh, RegionTaggingInnermostWins) {
  TriMesh m = build_rect_mesh(8, 8);
  tag_regions(m, "matrix",
              {{"inc", 0.25, 0.25, 0.75, 0.75}, {"core", 0.375, 0.375, 0.625, 0.625}});
  double a_matrix = 0, a_inc = 0, a_core = 0;
  const int r_m = m.region_id("matrix"), r_i = m.region_id("inc"), r_c = m.region_id("core");
  for (int t = 0; t < m.num_tris(); ++t) {
    if (m.tris[t].region == r_m) a_matrix += m.area(t);
    if (m.tris[t].region == r_i) a_inc += m.area(t);
    if (m.tris[t].region == r_c) a_core += m.area(t);
  }
  // boxes align with the 8x8 grid, so tagged areas are exact
  EXPECT_NEAR(a_core, 0.0625, 1e-12);
  EXPECT_NEAR(a_inc, 0.25 - 0.0625, 1e-12);
  EXPECT_NEAR(a_matrix, 0.75, 1e-12);
}

TEST(Mesh, PointLocationAndInterp) {
  TriMesh m = build_rect_mesh(4, 4);
  Eigen::VectorXd u(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i)
    u[i] = 3.0 * m.nodes[i].x() - 2.0 * m.nodes[i].y() + 1.0;
  for (const Vec2 p : {Vec2(0.3, 0.7), Vec2(0.0, 0.0), Vec2(1.0, 0.5), Vec2(0.515, 0.515)}) {
    auto loc = locate_point(m, p);
    ASSERT_GE(loc.tri, 0);
    EXPECT_NEAR(interp_scalar(m, u, loc), 3 * p.x() - 2 * p.y() + 1, 1e-12);
  }
}
