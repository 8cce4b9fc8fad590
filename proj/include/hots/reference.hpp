#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "hots/fem.hpp"
#include "hots/macro_solver.hpp"
#include "hots/materials.hpp"
#include "hots/mesh.hpp"
#include "hots/tables.hpp"

namespace hots {

// Coefficient provider for the fully resolved model: every element carries
// its own material, evaluated at the element temperature. The owner vector
// is captured by value so the provider owns its lookup data.
inline CoefficientProvider resolved_provider(std::vector<const Material*> owner) {
  return [owner = std::move(owner)](int e, double th) {
    return owner[e]->evaluate(th);
  };
}

// Coefficient provider for the homogenized model: the effective coefficient
// table, ignoring the element id.
inline CoefficientProvider table_provider(const CellTable& tab) {
  return [&tab](int, double th) { return tab.eff_at(th); };
}

// Assigns materials on a fine mesh for a two-level periodic layout. Each
// element is classified by folding its centroid into the intermediate cell
// (period zeta1): `in_composite` marks the part occupied by the fine-scale
// composite, whose phases are then resolved by folding into the fine cell
// (period zeta2) and testing `in_phase_a`.
inline std::vector<const Material*> three_scale_owner(
    const TriMesh& mesh, double zeta1, double zeta2,
    const std::function<bool(const Vec2&)>& in_composite,
    const std::function<bool(const Vec2&)>& in_phase_a, const Material* matrix,
    const Material* phase_a, const Material* phase_b) {
  auto fold = [](const Vec2& x, double zeta) {
    Vec2 p = x / zeta;
    p[0] -= std::floor(p[0]);
    p[1] -= std::floor(p[1]);
    return p;
  };
  std::vector<const Material*> o(mesh.num_tris());
  for (int t = 0; t < mesh.num_tris(); ++t) {
    const Vec2 c = mesh.centroid(t);
    if (!in_composite(fold(c, zeta1))) {
      o[t] = matrix;
    } else {
      o[t] = in_phase_a(fold(c, zeta2)) ? phase_a : phase_b;
    }
  }
  return o;
}

// Relative L2 and H1-seminorm errors of a nodal scalar field against a
// reference on the same mesh.
struct ErrorPair {
  double l2 = 0.0;
  double h1 = 0.0;
};

inline ErrorPair relative_errors(const TriMesh& mesh, const Eigen::VectorXd& ref,
                                 const Eigen::VectorXd& approx) {
  ErrorPair e;
  const Eigen::VectorXd d = ref - approx;
  e.l2 = std::sqrt(l2_norm_sq(mesh, d) / l2_norm_sq(mesh, ref));
  e.h1 = std::sqrt(h1_seminorm_sq(mesh, d) / h1_seminorm_sq(mesh, ref));
  return e;
}

// Vector-field variant: component norms are summed before taking the ratio.
// Input layout is node-major interleaved, two components per node.
inline ErrorPair relative_errors_vec(const TriMesh& mesh, const Eigen::VectorXd& ref,
                                     const Eigen::VectorXd& approx) {
  const int n = mesh.num_nodes();
  double num_l2 = 0, den_l2 = 0, num_h1 = 0, den_h1 = 0;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd rc(n), dc(n);
    for (int k = 0; k < n; ++k) {
      rc[k] = ref[2 * k + c];
      dc[k] = ref[2 * k + c] - approx[2 * k + c];
    }
    num_l2 += l2_norm_sq(mesh, dc);
    den_l2 += l2_norm_sq(mesh, rc);
    num_h1 += h1_seminorm_sq(mesh, dc);
    den_h1 += h1_seminorm_sq(mesh, rc);
  }
  ErrorPair e;
  e.l2 = std::sqrt(num_l2 / den_l2);
  e.h1 = std::sqrt(num_h1 / den_h1);
  return e;
}

}  // namespace hots
