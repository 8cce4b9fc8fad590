#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>
#include <memory>
#include <vector>

#include "hots/mesh.hpp"

namespace hots {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// ---------------------------------------------------------------------------
// Assembly. All coefficients are piecewise constant per element, so one-point
// (centroid) quadrature is exact for stiffness and flux terms; consistent
// mass uses the exact quadratic rule.
// ---------------------------------------------------------------------------

// Scalar stiffness: A_ab = sum_e area * gradN_a . k_e gradN_b.
inline SpMat assemble_scalar_stiffness(const TriMesh& m,
                                       const std::vector<Eigen::Matrix2d>& k_e) {
  std::vector<Triplet> trip;
  trip.reserve(m.num_tris() * 9);
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto B = m.shape_grads(t);
    const double A = m.area(t);
    const Eigen::Matrix3d Ke = A * B.transpose() * k_e[t] * B;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trip.emplace_back(m.tris[t].v[a], m.tris[t].v[b], Ke(a, b));
  }
  SpMat A(m.num_nodes(), m.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// Scalar consistent mass with per-element density s_e.
inline SpMat assemble_scalar_mass(const TriMesh& m,
                                  const std::vector<double>& s_e) {
  std::vector<Triplet> trip;
  trip.reserve(m.num_tris() * 9);
  for (int t = 0; t < m.num_tris(); ++t) {
    const double w = s_e[t] * m.area(t) / 12.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trip.emplace_back(m.tris[t].v[a], m.tris[t].v[b], (a == b ? 2.0 : 1.0) * w);
  }
  SpMat A(m.num_nodes(), m.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// RHS for \int F . grad v with per-element constant flux F.
inline Eigen::VectorXd assemble_flux_rhs(const TriMesh& m,
                                         const std::vector<Vec2>& F_e) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.num_nodes());
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto B = m.shape_grads(t);
    const double A = m.area(t);
    for (int a = 0; a < 3; ++a)
      b[m.tris[t].v[a]] += A * F_e[t].dot(B.col(a));
  }
  return b;
}

// RHS for \int s v with per-element constant source s.
inline Eigen::VectorXd assemble_source_rhs(const TriMesh& m,
                                           const std::vector<double>& s_e) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.num_nodes());
  for (int t = 0; t < m.num_tris(); ++t) {
    const double w = s_e[t] * m.area(t) / 3.0;
    for (int a = 0; a < 3; ++a) b[m.tris[t].v[a]] += w;
  }
  return b;
}

// RHS for \int s(x) v with nodal s (exact for P1 s: consistent mass action).
inline Eigen::VectorXd assemble_source_rhs_nodal(const TriMesh& m,
                                                 const Eigen::VectorXd& s) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.num_nodes());
  for (int t = 0; t < m.num_tris(); ++t) {
    const double w = m.area(t) / 12.0;
    const auto& v = m.tris[t].v;
    for (int a = 0; a < 3; ++a) {
      double acc = 0;
      for (int c = 0; c < 3; ++c) acc += (a == c ? 2.0 : 1.0) * s[v[c]];
      b[v[a]] += w * acc;
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Vector (elasticity) kernels. Dof layout is node-major: dof(2*n+i) is
// component i of node n. Voigt order (11, 22, 12) with engineering shear.
// ---------------------------------------------------------------------------

inline Eigen::Matrix<double, 3, 6> strain_matrix(const Eigen::Matrix<double, 2, 3>& B) {
  Eigen::Matrix<double, 3, 6> S = Eigen::Matrix<double, 3, 6>::Zero();
  for (int a = 0; a < 3; ++a) {
    S(0, 2 * a + 0) = B(0, a);
    S(1, 2 * a + 1) = B(1, a);
    S(2, 2 * a + 0) = B(1, a);
    S(2, 2 * a + 1) = B(0, a);
  }
  return S;
}

inline SpMat assemble_elasticity_stiffness(const TriMesh& m,
                                           const std::vector<Eigen::Matrix3d>& C_e) {
  std::vector<Triplet> trip;
  trip.reserve(m.num_tris() * 36);
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto S = strain_matrix(m.shape_grads(t));
    const Eigen::Matrix<double, 6, 6> Ke = m.area(t) * S.transpose() * C_e[t] * S;
    const auto& v = m.tris[t].v;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        trip.emplace_back(2 * v[a / 2] + a % 2, 2 * v[b / 2] + b % 2, Ke(a, b));
  }
  SpMat A(2 * m.num_nodes(), 2 * m.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

inline SpMat assemble_vector_mass(const TriMesh& m,
                                  const std::vector<double>& rho_e) {
  std::vector<Triplet> trip;
  trip.reserve(m.num_tris() * 18);
  for (int t = 0; t < m.num_tris(); ++t) {
    const double w = rho_e[t] * m.area(t) / 12.0;
    const auto& v = m.tris[t].v;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 2; ++i)
          trip.emplace_back(2 * v[a] + i, 2 * v[b] + i, (a == b ? 2.0 : 1.0) * w);
  }
  SpMat A(2 * m.num_nodes(), 2 * m.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// RHS for \int S_ij dv_i/dx_j with per-element constant tensor S.
inline Eigen::VectorXd assemble_tensor_flux_rhs(const TriMesh& m,
                                                const std::vector<Eigen::Matrix2d>& S_e) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * m.num_nodes());
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto B = m.shape_grads(t);
    const double A = m.area(t);
    const auto& v = m.tris[t].v;
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i)
        b[2 * v[a] + i] += A * (S_e[t](i, 0) * B(0, a) + S_e[t](i, 1) * B(1, a));
  }
  return b;
}

// RHS for \int f . v with per-element constant body force f.
inline Eigen::VectorXd assemble_vector_source_rhs(const TriMesh& m,
                                                  const std::vector<Vec2>& f_e) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * m.num_nodes());
  for (int t = 0; t < m.num_tris(); ++t) {
    const double w = m.area(t) / 3.0;
    const auto& v = m.tris[t].v;
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i) b[2 * v[a] + i] += w * f_e[t][i];
  }
  return b;
}

// ---------------------------------------------------------------------------
// Dirichlet elimination + solvers. Constrained dofs are removed symmetrically;
// the factorization of the reduced operator can be reused across many RHS.
// ---------------------------------------------------------------------------

struct DirichletBC {
  std::vector<int> dofs;        // constrained dof ids (unique)
  Eigen::VectorXd values;       // same length; prescribed values
};

inline DirichletBC zero_bc(const std::vector<int>& dofs) {
  return {dofs, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.size()))};
}

// Expands node ids to both dof components of the vector layout.
inline std::vector<int> vector_dofs(const std::vector<int>& nodes) {
  std::vector<int> d;
  d.reserve(nodes.size() * 2);
  for (int n : nodes) {
    d.push_back(2 * n);
    d.push_back(2 * n + 1);
  }
  return d;
}

class ConstrainedOperator {
 public:
  ConstrainedOperator() = default;

  ConstrainedOperator(const SpMat& A, const DirichletBC& bc) { init(A, bc); }

  void init(const SpMat& A, const DirichletBC& bc) {
    n_full_ = static_cast<int>(A.rows());
    full_to_red_.assign(n_full_, -1);
    is_fixed_.assign(n_full_, 0);
    fixed_vals_ = Eigen::VectorXd::Zero(n_full_);
    for (size_t i = 0; i < bc.dofs.size(); ++i) {
      is_fixed_[bc.dofs[i]] = 1;
      fixed_vals_[bc.dofs[i]] = bc.values[static_cast<Eigen::Index>(i)];
    }
    red_to_full_.clear();
    for (int i = 0; i < n_full_; ++i)
      if (!is_fixed_[i]) {
        full_to_red_[i] = static_cast<int>(red_to_full_.size());
        red_to_full_.push_back(i);
      }
    const int n_red = static_cast<int>(red_to_full_.size());
    std::vector<Triplet> trip;
    std::vector<Triplet> coup;
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
        if (!is_fixed_[r] && !is_fixed_[c])
          trip.emplace_back(full_to_red_[r], full_to_red_[c], it.value());
        else if (!is_fixed_[r] && is_fixed_[c])
          coup.emplace_back(full_to_red_[r], c, it.value());
      }
    A_rr_.resize(n_red, n_red);
    A_rr_.setFromTriplets(trip.begin(), trip.end());
    A_rc_.resize(n_red, n_full_);
    A_rc_.setFromTriplets(coup.begin(), coup.end());
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
    ldlt_->compute(A_rr_);
    if (ldlt_->info() != Eigen::Success)
      throw std::runtime_error("ConstrainedOperator: factorization failed");
    diag_ = A_rr_.diagonal();
  }

  int n_full() const { return n_full_; }
  int n_reduced() const { return static_cast<int>(red_to_full_.size()); }
  const SpMat& reduced_matrix() const { return A_rr_; }

  // Direct solve (LDLT).
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd br = reduce_rhs(b);
    Eigen::VectorXd xr = ldlt_->solve(br);
    return expand(xr);
  }

  // Jacobi-preconditioned CG on the reduced system. Independent solve path
  // used to cross-check the direct factorization.
  Eigen::VectorXd solve_pcg(const Eigen::VectorXd& b, double tol = 1e-12,
                            int max_iter = 20000) const {
    Eigen::VectorXd br = reduce_rhs(b);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(br.size());
    Eigen::VectorXd r = br;
    Eigen::VectorXd z = r.cwiseQuotient(diag_);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double b_norm = br.norm();
    if (b_norm == 0.0) return expand(x);
    for (int it = 0; it < max_iter; ++it) {
      Eigen::VectorXd Ap = A_rr_ * p;
      const double alpha = rz / p.dot(Ap);
      x += alpha * p;
      r -= alpha * Ap;
      if (r.norm() <= tol * b_norm) break;
      z = r.cwiseQuotient(diag_);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    return expand(x);
  }

 private:
  Eigen::VectorXd reduce_rhs(const Eigen::VectorXd& b) const {
    Eigen::VectorXd br(n_reduced());
    for (int i = 0; i < n_reduced(); ++i) br[i] = b[red_to_full_[i]];
    if (A_rc_.nonZeros() > 0) br -= A_rc_ * fixed_vals_;
    return br;
  }

  Eigen::VectorXd expand(const Eigen::VectorXd& xr) const {
    Eigen::VectorXd x = fixed_vals_;
    for (int i = 0; i < n_reduced(); ++i) x[red_to_full_[i]] = xr[i];
    return x;
  }

  int n_full_ = 0;
  std::vector<int> full_to_red_, red_to_full_;
  std::vector<char> is_fixed_;
  Eigen::VectorXd fixed_vals_, diag_;
  SpMat A_rr_, A_rc_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;  // pointer: keeps the operator movable
};

// ---------------------------------------------------------------------------
// Recovery of nodal gradients (area-weighted average of adjacent element
// gradients). Applying it twice gives a nodal Hessian estimate.
// ---------------------------------------------------------------------------

// Returns an (n x 2) array: row i = recovered grad u at node i.
inline Eigen::MatrixX2d recover_gradient(const TriMesh& m, const Eigen::VectorXd& u) {
  Eigen::MatrixX2d g = Eigen::MatrixX2d::Zero(m.num_nodes(), 2);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m.num_nodes());
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto B = m.shape_grads(t);
    const auto& v = m.tris[t].v;
    Vec2 ge = Vec2::Zero();
    for (int a = 0; a < 3; ++a) ge += u[v[a]] * B.col(a);
    const double A = m.area(t);
    for (int a = 0; a < 3; ++a) {
      g.row(v[a]) += A * ge.transpose();
      w[v[a]] += A;
    }
  }
  for (int i = 0; i < m.num_nodes(); ++i) g.row(i) /= w[i];
  return g;
}

// Nodal Hessian (n x 3): columns are d2/dx2, d2/dy2, symmetrized d2/dxdy.
inline Eigen::MatrixX3d recover_hessian(const TriMesh& m, const Eigen::VectorXd& u) {
  const Eigen::MatrixX2d g = recover_gradient(m, u);
  const Eigen::MatrixX2d hx = recover_gradient(m, g.col(0));
  const Eigen::MatrixX2d hy = recover_gradient(m, g.col(1));
  Eigen::MatrixX3d H(m.num_nodes(), 3);
  H.col(0) = hx.col(0);
  H.col(1) = hy.col(1);
  H.col(2) = 0.5 * (hx.col(1) + hy.col(0));
  return H;
}

// ---------------------------------------------------------------------------
// Discrete norms used by the error reports. K/M here carry identity
// coefficients; relative norms divide by the same quadrature of the
// reference field.
// ---------------------------------------------------------------------------

inline double l2_norm_sq(const TriMesh& m, const Eigen::VectorXd& u) {
  double s = 0;
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto& v = m.tris[t].v;
    const double w = m.area(t) / 12.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        s += w * (a == b ? 2.0 : 1.0) * u[v[a]] * u[v[b]];
  }
  return s;
}

inline double h1_seminorm_sq(const TriMesh& m, const Eigen::VectorXd& u) {
  double s = 0;
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto B = m.shape_grads(t);
    const auto& v = m.tris[t].v;
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < 3; ++a) g += u[v[a]] * B.col(a);
    s += m.area(t) * g.squaredNorm();
  }
  return s;
}

}  // namespace hots
