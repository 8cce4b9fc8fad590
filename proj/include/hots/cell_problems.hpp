#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hots/fem.hpp"
#include "hots/materials.hpp"
#include "hots/mesh.hpp"

namespace hots {

// ---------------------------------------------------------------------------
// Field containers. Cell functions are nodal fields on a unit-cell mesh,
// keyed by name so tables can serialize and interpolate generically.
// Scalar fields have n entries, vector fields 2n (node-major).
// ---------------------------------------------------------------------------

struct FieldSet {
  std::map<std::string, Eigen::VectorXd> scalar;
  std::map<std::string, Eigen::VectorXd> vector;

  const Eigen::VectorXd& s(const std::string& k) const {
    auto it = scalar.find(k);
    if (it == scalar.end()) throw std::runtime_error("missing scalar field " + k);
    return it->second;
  }
  const Eigen::VectorXd& v(const std::string& k) const {
    auto it = vector.find(k);
    if (it == vector.end()) throw std::runtime_error("missing vector field " + k);
    return it->second;
  }
};

inline std::string fname(const std::string& base, int a) {
  return base + "_" + std::to_string(a);
}
inline std::string fname(const std::string& base, int a, int b) {
  return base + "_" + std::to_string(a) + std::to_string(b);
}
inline std::string fname(const std::string& base, int a, int b, int c) {
  return base + "_" + std::to_string(a) + std::to_string(b) + std::to_string(c);
}

// Linear combination of coefficient bundles, used for finite differences in
// temperature and for table interpolation.
inline PointCoefficients lincomb(double a, const PointCoefficients& A,
                                 double b, const PointCoefficients& B) {
  PointCoefficients r;
  r.rho = a * A.rho + b * B.rho;
  r.rc = a * A.rc + b * B.rc;
  r.k = a * A.k + b * B.k;
  r.beta = a * A.beta + b * B.beta;
  r.vartheta = a * A.vartheta + b * B.vartheta;
  r.C = a * A.C + b * B.C;
  return r;
}

// ---------------------------------------------------------------------------
// Unit-cell FEM workspace at a fixed temperature: per-element coefficients,
// factorized scalar and vector operators with zero Dirichlet walls.
// Cell problems are stated in divergence form
//   d/dz_i (k_ij du/dz_j) = s + dF_i/dz_i          (scalar)
//   d/dz_j (C_ijkl dw_k/dz_l) = s_i + dS_ij/dz_j   (vector)
// whose weak forms are  a(u,v) = -(s,v) + (F, grad v)  and the analogue.
// ---------------------------------------------------------------------------

class CellFEM {
 public:
  const TriMesh* mesh = nullptr;
  std::vector<PointCoefficients> coef;   // per element
  std::vector<PointCoefficients> dcoef;  // d/dtheta per element (analytic or FD)

  void init(const TriMesh& m, std::vector<PointCoefficients> c,
            std::vector<PointCoefficients> dc) {
    mesh = &m;
    coef = std::move(c);
    dcoef = std::move(dc);
    std::vector<Eigen::Matrix2d> kk(m.num_tris());
    std::vector<Eigen::Matrix3d> CC(m.num_tris());
    for (int t = 0; t < m.num_tris(); ++t) {
      kk[t] = coef[t].k;
      CC[t] = coef[t].C;
    }
    auto bnodes = m.boundary_nodes();
    scalar_op_.init(assemble_scalar_stiffness(m, kk), zero_bc(bnodes));
    vector_op_.init(assemble_elasticity_stiffness(m, CC), zero_bc(vector_dofs(bnodes)));
  }

  Eigen::VectorXd solve_scalar(const std::vector<double>& s,
                               const std::vector<Vec2>& F) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh->num_nodes());
    if (!s.empty()) b -= assemble_source_rhs(*mesh, s);
    if (!F.empty()) b += assemble_flux_rhs(*mesh, F);
    return scalar_op_.solve(b);
  }

  Eigen::VectorXd solve_vector(const std::vector<Vec2>& s,
                               const std::vector<Eigen::Matrix2d>& S) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * mesh->num_nodes());
    if (!s.empty()) b -= assemble_vector_source_rhs(*mesh, s);
    if (!S.empty()) b += assemble_tensor_flux_rhs(*mesh, S);
    return vector_op_.solve(b);
  }

  const ConstrainedOperator& scalar_op() const { return scalar_op_; }
  const ConstrainedOperator& vector_op() const { return vector_op_; }

 private:
  ConstrainedOperator scalar_op_, vector_op_;
};

// Per-element evaluation helpers.
inline Vec2 elem_grad(const TriMesh& m, const Eigen::VectorXd& u, int t) {
  const auto B = m.shape_grads(t);
  Vec2 g = Vec2::Zero();
  for (int a = 0; a < 3; ++a) g += u[m.tris[t].v[a]] * B.col(a);
  return g;
}

inline double elem_avg(const TriMesh& m, const Eigen::VectorXd& u, int t) {
  const auto& v = m.tris[t].v;
  return (u[v[0]] + u[v[1]] + u[v[2]]) / 3.0;
}

// G(i,j) = dw_i/dz_j for a node-major vector field.
inline Eigen::Matrix2d elem_vec_grad(const TriMesh& m, const Eigen::VectorXd& w, int t) {
  const auto B = m.shape_grads(t);
  Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i) G.row(i) += w[2 * m.tris[t].v[a] + i] * B.col(a).transpose();
  return G;
}

inline Vec2 elem_avg_vec(const TriMesh& m, const Eigen::VectorXd& w, int t) {
  const auto& v = m.tris[t].v;
  Vec2 r = Vec2::Zero();
  for (int i = 0; i < 2; ++i) r[i] = (w[2 * v[0] + i] + w[2 * v[1] + i] + w[2 * v[2] + i]) / 3.0;
  return r;
}

// Area average of a per-element quantity.
template <class F>
double cell_average(const TriMesh& m, F&& f) {
  double s = 0, A = 0;
  for (int t = 0; t < m.num_tris(); ++t) {
    const double a = m.area(t);
    s += a * f(t);
    A += a;
  }
  return s / A;
}

// ---------------------------------------------------------------------------
// First-order micro stage: conduction correctors R_a, thermoelastic corrector
// O, elastic correctors T[a][m] (load direction a, contraction index m,
// solution component i), followed by the cell-averaged effective coefficients
// of the next scale up. The same routine serves the meso cell (fields then
// named M0/P0/N0 by the caller).
// ---------------------------------------------------------------------------

struct FirstOrderNames {
  std::string R = "R";    // scalar family, index a
  std::string O = "O";    // vector
  std::string T = "T";    // vector family, indices a,m
};

inline void solve_first_order(const CellFEM& cell, FieldSet& out,
                              const FirstOrderNames& nm = {}) {
  const TriMesh& m = *cell.mesh;
  const int nt = m.num_tris();
  for (int a = 0; a < 2; ++a) {
    std::vector<Vec2> F(nt);
    for (int t = 0; t < nt; ++t) F[t] = -cell.coef[t].k.col(a);
    out.scalar[fname(nm.R, a)] = cell.solve_scalar({}, F);
  }
  {
    std::vector<Eigen::Matrix2d> S(nt);
    for (int t = 0; t < nt; ++t) S[t] = -cell.coef[t].beta;
    out.vector[nm.O] = cell.solve_vector({}, S);
  }
  for (int a = 0; a < 2; ++a)
    for (int mm = 0; mm < 2; ++mm) {
      std::vector<Eigen::Matrix2d> S(nt);
      for (int t = 0; t < nt; ++t) {
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) S[t](i, j) = -cell.coef[t].C4(i, j, mm, a);
      }
      out.vector[fname(nm.T, a, mm)] = cell.solve_vector({}, S);
    }
}

// Cell average of (coefficient + coefficient * corrector gradient). The
// result bundle reuses the PointCoefficients slots: rc holds the transient
// capacity including the thermoelastic correction term.
inline PointCoefficients homogenize(const CellFEM& cell, const FieldSet& f,
                                    const FirstOrderNames& nm = {}) {
  const TriMesh& m = *cell.mesh;
  PointCoefficients eff;
  double A = 0;
  std::array<Vec2, 2> gR;
  std::array<std::array<Eigen::Matrix2d, 2>, 2> gT;
  for (int t = 0; t < m.num_tris(); ++t) {
    const double a = m.area(t);
    A += a;
    const PointCoefficients& c = cell.coef[t];
    for (int j = 0; j < 2; ++j) gR[j] = elem_grad(m, f.s(fname(nm.R, j)), t);
    const Eigen::Matrix2d gO = elem_vec_grad(m, f.v(nm.O), t);
    for (int aa = 0; aa < 2; ++aa)
      for (int mm = 0; mm < 2; ++mm) gT[aa][mm] = elem_vec_grad(m, f.v(fname(nm.T, aa, mm)), t);

    eff.rho += a * c.rho;
    // transient capacity: rho*c - vartheta_ij dO_i/dz_j
    eff.rc += a * (c.rc - (c.vartheta.array() * gO.array()).sum());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double kij = c.k(i, j);
        for (int kk = 0; kk < 2; ++kk) kij += c.k(i, kk) * gR[j][kk];
        eff.k(i, j) += a * kij;
        // beta_ij + C_ijkl dO_k/dz_l
        double bij = c.beta(i, j);
        for (int kk = 0; kk < 2; ++kk)
          for (int l = 0; l < 2; ++l) bij += c.C4(i, j, kk, l) * gO(kk, l);
        eff.beta(i, j) += a * bij;
        // vartheta_ij + vartheta_pq dT^j_{p i}/dz_q
        double vij = c.vartheta(i, j);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) vij += c.vartheta(p, q) * gT[j][i](p, q);
        eff.vartheta(i, j) += a * vij;
      }
    // Voigt pairs (11, 22, 12)
    static const int vi[3] = {0, 1, 0}, vj[3] = {0, 1, 1};
    for (int va = 0; va < 3; ++va)
      for (int vb = 0; vb < 3; ++vb) {
        const int i = vi[va], j = vj[va], kk = vi[vb], l = vj[vb];
        double cijkl = c.C4(i, j, kk, l);
        for (int p = 0; p < 2; ++p)
          for (int n = 0; n < 2; ++n) cijkl += c.C4(i, j, p, n) * gT[l][kk](p, n);
        eff.C(va, vb) += a * cijkl;
      }
  }
  eff.rho /= A;
  eff.rc /= A;
  eff.k /= A;
  eff.beta /= A;
  eff.vartheta /= A;
  eff.C /= A;
  eff.C = Eigen::Matrix3d(0.5 * (eff.C + eff.C.transpose()));
  return eff;
}

// ---------------------------------------------------------------------------
// Second-order micro stage. Needs the first-order fields at this temperature,
// their temperature derivatives (finite differences across the sample grid),
// the effective (meso) coefficients and their temperature derivatives.
// Directional problems driven by d/dx contract with grad(theta0) later; they
// carry a trailing direction index d.
// ---------------------------------------------------------------------------

inline void solve_micro_second_order(const CellFEM& cell, const FieldSet& first,
                                     const FieldSet& dfirst,
                                     const PointCoefficients& eff,
                                     const PointCoefficients& deff, FieldSet& out) {
  const TriMesh& m = *cell.mesh;
  const int nt = m.num_tris();
  const FirstOrderNames nm{};

  // Rab: conduction second-order corrector.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2) {
      const Eigen::VectorXd& R2 = first.s(fname(nm.R, a2));
      std::vector<double> s(nt);
      std::vector<Vec2> F(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const Vec2 gR2 = elem_grad(m, R2, t);
        s[t] = eff.k(a1, a2) - c.k(a1, a2) - c.k.row(a1).dot(gR2);
        F[t] = -c.k.col(a1) * elem_avg(m, R2, t);
      }
      out.scalar[fname("Rab", a1, a2)] = cell.solve_scalar(s, F);
    }

  // Rstar: flux of the analytic conductivity temperature derivative.
  for (int a = 0; a < 2; ++a) {
    std::vector<Vec2> F(nt);
    for (int t = 0; t < nt; ++t) F[t] = cell.dcoef[t].k.col(a);
    out.scalar[fname("Rstar", a)] = cell.solve_scalar({}, F);
  }

  // Dstar[a1][d]: directional x-derivative conduction problem.
  for (int a1 = 0; a1 < 2; ++a1) {
    const Eigen::VectorXd& R = first.s(fname(nm.R, a1));
    const Eigen::VectorXd& dR = dfirst.s(fname(nm.R, a1));
    for (int d = 0; d < 2; ++d) {
      std::vector<double> s(nt);
      std::vector<Vec2> F(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const auto& dc = cell.dcoef[t];
        const Vec2 gR = elem_grad(m, R, t);
        const Vec2 gdR = elem_grad(m, dR, t);
        s[t] = deff.k(d, a1) - dc.k(d, a1) - (dc.k.row(d).dot(gR) + c.k.row(d).dot(gdR));
        F[t] = -c.k.col(d) * elem_avg(m, dR, t);
      }
      out.scalar[fname("Dstar", a1, d)] = cell.solve_scalar(s, F);
    }
  }

  // A*: transient corrector, decomposed into a constant part and four
  // directional parts contracted with dP0_m/dy_a of the next scale up.
  {
    std::vector<double> s(nt);
    for (int t = 0; t < nt; ++t) {
      const auto& c = cell.coef[t];
      const Eigen::Matrix2d gO = elem_vec_grad(m, first.v(nm.O), t);
      s[t] = c.rc - eff.rc - (c.vartheta.array() * gO.array()).sum();
    }
    out.scalar["Astar0"] = cell.solve_scalar(s, {});
  }
  for (int mm = 0; mm < 2; ++mm)
    for (int a = 0; a < 2; ++a) {
      const Eigen::VectorXd& T = first.v(fname(nm.T, a, mm));
      std::vector<double> s(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const Eigen::Matrix2d gT = elem_vec_grad(m, T, t);
        s[t] = -c.vartheta(mm, a) - (c.vartheta.array() * gT.array()).sum() + eff.vartheta(mm, a);
      }
      out.scalar[fname("Astarg", mm, a)] = cell.solve_scalar(s, {});
    }

  // Estar: thermoelastic coupling corrector.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2) {
      const Eigen::VectorXd& T = first.v(fname(nm.T, a2, a1));
      std::vector<double> s(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const Eigen::Matrix2d gT = elem_vec_grad(m, T, t);
        s[t] = eff.vartheta(a1, a2) - c.vartheta(a1, a2) - (c.vartheta.array() * gT.array()).sum();
      }
      out.scalar[fname("Estar", a1, a2)] = cell.solve_scalar(s, {});
    }

  // Tab: elasticity second-order corrector.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int mm = 0; mm < 2; ++mm) {
        const Eigen::VectorXd& T = first.v(fname(nm.T, a2, mm));
        std::vector<Vec2> s(nt);
        std::vector<Eigen::Matrix2d> S(nt);
        for (int t = 0; t < nt; ++t) {
          const auto& c = cell.coef[t];
          const Eigen::Matrix2d gT = elem_vec_grad(m, T, t);
          const Vec2 Tc = elem_avg_vec(m, T, t);
          for (int i = 0; i < 2; ++i) {
            double v = eff.C4(i, a1, mm, a2) - c.C4(i, a1, mm, a2);
            for (int kk = 0; kk < 2; ++kk)
              for (int j = 0; j < 2; ++j) v -= c.C4(i, a1, kk, j) * gT(kk, j);
            s[t][i] = v;
            for (int j = 0; j < 2; ++j) {
              double w = 0;
              for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, a1) * Tc[kk];
              S[t](i, j) = -w;
            }
          }
        }
        out.vector[fname("Tab", a1, a2, mm)] = cell.solve_vector(s, S);
      }

  // Fstar[a1]: inertia corrector, load direction a1.
  for (int a1 = 0; a1 < 2; ++a1) {
    std::vector<Vec2> s(nt, Vec2::Zero());
    for (int t = 0; t < nt; ++t) s[t][a1] = cell.coef[t].rho - eff.rho;
    out.vector[fname("Fstar", a1)] = cell.solve_vector(s, {});
  }

  // U[a1][m][d]: directional x-derivative elasticity problem.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int mm = 0; mm < 2; ++mm) {
      const Eigen::VectorXd& T = first.v(fname(nm.T, a1, mm));
      const Eigen::VectorXd& dT = dfirst.v(fname(nm.T, a1, mm));
      for (int d = 0; d < 2; ++d) {
        std::vector<Vec2> s(nt);
        std::vector<Eigen::Matrix2d> S(nt);
        for (int t = 0; t < nt; ++t) {
          const auto& c = cell.coef[t];
          const auto& dc = cell.dcoef[t];
          const Eigen::Matrix2d gT = elem_vec_grad(m, T, t);
          const Eigen::Matrix2d gdT = elem_vec_grad(m, dT, t);
          const Vec2 dTc = elem_avg_vec(m, dT, t);
          for (int i = 0; i < 2; ++i) {
            double v = deff.C4(i, d, mm, a1) - dc.C4(i, d, mm, a1);
            for (int kk = 0; kk < 2; ++kk)
              for (int l = 0; l < 2; ++l)
                v -= dc.C4(i, d, kk, l) * gT(kk, l) + c.C4(i, d, kk, l) * gdT(kk, l);
            s[t][i] = v;
            for (int j = 0; j < 2; ++j) {
              double w = 0;
              for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, d) * dTc[kk];
              S[t](i, j) = -w;
            }
          }
        }
        out.vector[fname("U", a1, mm, d)] = cell.solve_vector(s, S);
      }
    }

  // Qstar[d]: directional x-derivative thermal stress problem.
  {
    const Eigen::VectorXd& O = first.v(nm.O);
    const Eigen::VectorXd& dO = dfirst.v(nm.O);
    for (int d = 0; d < 2; ++d) {
      std::vector<Vec2> s(nt);
      std::vector<Eigen::Matrix2d> S(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const auto& dc = cell.dcoef[t];
        const Eigen::Matrix2d gO = elem_vec_grad(m, O, t);
        const Eigen::Matrix2d gdO = elem_vec_grad(m, dO, t);
        const Vec2 dOc = elem_avg_vec(m, dO, t);
        for (int i = 0; i < 2; ++i) {
          double v = deff.beta(i, d) - dc.beta(i, d);
          for (int kk = 0; kk < 2; ++kk)
            for (int l = 0; l < 2; ++l)
              v -= dc.C4(i, d, kk, l) * gO(kk, l) + c.C4(i, d, kk, l) * gdO(kk, l);
          s[t][i] = v;
          for (int j = 0; j < 2; ++j) {
            double w = 0;
            for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, d) * dOc[kk];
            S[t](i, j) = -w;
          }
        }
      }
      out.vector[fname("Qstar", d)] = cell.solve_vector(s, S);
    }
  }

  // V[a1]: mixed thermo-mechanical corrector.
  for (int a1 = 0; a1 < 2; ++a1) {
    const Eigen::VectorXd& O = first.v(nm.O);
    const Eigen::VectorXd& R = first.s(fname(nm.R, a1));
    std::vector<Vec2> s(nt);
    std::vector<Eigen::Matrix2d> S(nt);
    for (int t = 0; t < nt; ++t) {
      const auto& c = cell.coef[t];
      const Eigen::Matrix2d gO = elem_vec_grad(m, O, t);
      const Vec2 Oc = elem_avg_vec(m, O, t);
      const double Rc = elem_avg(m, R, t);
      for (int i = 0; i < 2; ++i) {
        double v = eff.beta(i, a1) - c.beta(i, a1);
        for (int kk = 0; kk < 2; ++kk)
          for (int j = 0; j < 2; ++j) v -= c.C4(i, a1, kk, j) * gO(kk, j);
        s[t][i] = v;
        for (int j = 0; j < 2; ++j) {
          double w = c.beta(i, j) * Rc;
          for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, a1) * Oc[kk];
          S[t](i, j) = -w;
        }
      }
    }
    out.vector[fname("V", a1)] = cell.solve_vector(s, S);
  }

  // Tstar[n][m]: flux of analytic stiffness temperature derivative.
  for (int n = 0; n < 2; ++n)
    for (int mm = 0; mm < 2; ++mm) {
      std::vector<Eigen::Matrix2d> S(nt);
      for (int t = 0; t < nt; ++t)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) S[t](i, j) = cell.dcoef[t].C4(i, j, mm, n);
      out.vector[fname("Tstar", n, mm)] = cell.solve_vector({}, S);
    }

  // Ostar: flux of analytic thermal modulus temperature derivative.
  {
    std::vector<Eigen::Matrix2d> S(nt);
    for (int t = 0; t < nt; ++t) S[t] = cell.dcoef[t].beta;
    out.vector["Ostar"] = cell.solve_vector({}, S);
  }
}

// ---------------------------------------------------------------------------
// Macroscopic effective coefficients (the reiterated, starred family):
// cell averages over the meso cell of barred coefficients plus barred
// coefficient times meso corrector gradients. Same integral structure as
// homogenize(), so it is reused with meso field names.
// ---------------------------------------------------------------------------

struct MesoNames {
  FirstOrderNames first{"M0", "P0", "N0"};
};

inline PointCoefficients homogenize_macro(const CellFEM& meso, const FieldSet& f) {
  return homogenize(meso, f, MesoNames{}.first);
}

// ---------------------------------------------------------------------------
// Second-order meso stage on Y with barred coefficients. hats = starred
// macroscopic coefficients at this temperature, dhats/dcoef via FD.
// ---------------------------------------------------------------------------

inline void solve_meso_second_order(const CellFEM& cell, const FieldSet& first,
                                    const FieldSet& dfirst, const PointCoefficients& hat,
                                    const PointCoefficients& dhat, FieldSet& out) {
  const TriMesh& m = *cell.mesh;
  const int nt = m.num_tris();
  const FirstOrderNames nm = MesoNames{}.first;

  // A0: transient corrector.
  {
    std::vector<double> s(nt);
    for (int t = 0; t < nt; ++t) {
      const auto& c = cell.coef[t];
      const Eigen::Matrix2d gP = elem_vec_grad(m, first.v(nm.O), t);
      s[t] = c.rc - hat.rc - (c.vartheta.array() * gP.array()).sum();
    }
    out.scalar["A0"] = cell.solve_scalar(s, {});
  }

  // M0ab: second-order conduction corrector (pattern of the one-scale-up
  // problem with averaged coefficients).
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2) {
      const Eigen::VectorXd& M2 = first.s(fname(nm.R, a2));
      std::vector<double> s(nt);
      std::vector<Vec2> F(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const Vec2 gM2 = elem_grad(m, M2, t);
        s[t] = hat.k(a1, a2) - c.k(a1, a2) - c.k.row(a1).dot(gM2);
        F[t] = -c.k.col(a1) * elem_avg(m, M2, t);
      }
      out.scalar[fname("M0ab", a1, a2)] = cell.solve_scalar(s, F);
    }

  // C0[a1][d]: directional x-derivative conduction problem.
  for (int a1 = 0; a1 < 2; ++a1) {
    const Eigen::VectorXd& M = first.s(fname(nm.R, a1));
    const Eigen::VectorXd& dM = dfirst.s(fname(nm.R, a1));
    for (int d = 0; d < 2; ++d) {
      std::vector<double> s(nt);
      std::vector<Vec2> F(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const auto& dc = cell.dcoef[t];
        const Vec2 gM = elem_grad(m, M, t);
        const Vec2 gdM = elem_grad(m, dM, t);
        s[t] = dhat.k(d, a1) - dc.k(d, a1) - (dc.k.row(d).dot(gM) + c.k.row(d).dot(gdM));
        F[t] = -c.k.col(d) * elem_avg(m, dM, t);
      }
      out.scalar[fname("C0", a1, d)] = cell.solve_scalar(s, F);
    }
  }

  // B0: nonlinear gradient-product corrector; flux carries both the
  // temperature-derivative terms and the plain terms, as printed.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2) {
      const Eigen::VectorXd& M1 = first.s(fname(nm.R, a1));
      const Eigen::VectorXd& M2 = first.s(fname(nm.R, a2));
      std::vector<Vec2> F(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const auto& dc = cell.dcoef[t];
        const double M1c = elem_avg(m, M1, t);
        const Vec2 gM2 = elem_grad(m, M2, t);
        for (int i = 0; i < 2; ++i)
          F[t][i] = M1c * (dc.k(i, a2) + dc.k.row(i).dot(gM2) + c.k(i, a2) + c.k.row(i).dot(gM2));
      }
      out.scalar[fname("B0", a1, a2)] = cell.solve_scalar({}, F);
    }

  // E0: thermoelastic coupling corrector.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2) {
      const Eigen::VectorXd& N = first.v(fname(nm.T, a2, a1));
      std::vector<double> s(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const Eigen::Matrix2d gN = elem_vec_grad(m, N, t);
        s[t] = hat.vartheta(a1, a2) - c.vartheta(a1, a2) - (c.vartheta.array() * gN.array()).sum();
      }
      out.scalar[fname("E0", a1, a2)] = cell.solve_scalar(s, {});
    }

  // F0[a1]: inertia corrector.
  for (int a1 = 0; a1 < 2; ++a1) {
    std::vector<Vec2> s(nt, Vec2::Zero());
    for (int t = 0; t < nt; ++t) s[t][a1] = cell.coef[t].rho - hat.rho;
    out.vector[fname("F0", a1)] = cell.solve_vector(s, {});
  }

  // N0ab: second-order elasticity corrector.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int mm = 0; mm < 2; ++mm) {
        const Eigen::VectorXd& N = first.v(fname(nm.T, a2, mm));
        std::vector<Vec2> s(nt);
        std::vector<Eigen::Matrix2d> S(nt);
        for (int t = 0; t < nt; ++t) {
          const auto& c = cell.coef[t];
          const Eigen::Matrix2d gN = elem_vec_grad(m, N, t);
          const Vec2 Nc = elem_avg_vec(m, N, t);
          for (int i = 0; i < 2; ++i) {
            double v = hat.C4(i, a1, mm, a2) - c.C4(i, a1, mm, a2);
            for (int kk = 0; kk < 2; ++kk)
              for (int j = 0; j < 2; ++j) v -= c.C4(i, a1, kk, j) * gN(kk, j);
            s[t][i] = v;
            for (int j = 0; j < 2; ++j) {
              double w = 0;
              for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, a1) * Nc[kk];
              S[t](i, j) = -w;
            }
          }
        }
        out.vector[fname("N0ab", a1, a2, mm)] = cell.solve_vector(s, S);
      }

  // Z0[a1][m][d]: directional x-derivative elasticity problem.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int mm = 0; mm < 2; ++mm) {
      const Eigen::VectorXd& N = first.v(fname(nm.T, a1, mm));
      const Eigen::VectorXd& dN = dfirst.v(fname(nm.T, a1, mm));
      for (int d = 0; d < 2; ++d) {
        std::vector<Vec2> s(nt);
        std::vector<Eigen::Matrix2d> S(nt);
        for (int t = 0; t < nt; ++t) {
          const auto& c = cell.coef[t];
          const auto& dc = cell.dcoef[t];
          const Eigen::Matrix2d gN = elem_vec_grad(m, N, t);
          const Eigen::Matrix2d gdN = elem_vec_grad(m, dN, t);
          const Vec2 dNc = elem_avg_vec(m, dN, t);
          for (int i = 0; i < 2; ++i) {
            double v = dhat.C4(i, d, mm, a1) - dc.C4(i, d, mm, a1);
            for (int kk = 0; kk < 2; ++kk)
              for (int l = 0; l < 2; ++l)
                v -= dc.C4(i, d, kk, l) * gN(kk, l) + c.C4(i, d, kk, l) * gdN(kk, l);
            s[t][i] = v;
            for (int j = 0; j < 2; ++j) {
              double w = 0;
              for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, d) * dNc[kk];
              S[t](i, j) = -w;
            }
          }
        }
        out.vector[fname("Z0", a1, mm, d)] = cell.solve_vector(s, S);
      }
    }

  // Q0[d]: directional x-derivative thermal stress problem.
  {
    const Eigen::VectorXd& P = first.v(nm.O);
    const Eigen::VectorXd& dP = dfirst.v(nm.O);
    for (int d = 0; d < 2; ++d) {
      std::vector<Vec2> s(nt);
      std::vector<Eigen::Matrix2d> S(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& c = cell.coef[t];
        const auto& dc = cell.dcoef[t];
        const Eigen::Matrix2d gP = elem_vec_grad(m, P, t);
        const Eigen::Matrix2d gdP = elem_vec_grad(m, dP, t);
        const Vec2 dPc = elem_avg_vec(m, dP, t);
        for (int i = 0; i < 2; ++i) {
          double v = dhat.beta(i, d) - dc.beta(i, d);
          for (int kk = 0; kk < 2; ++kk)
            for (int l = 0; l < 2; ++l)
              v -= dc.C4(i, d, kk, l) * gP(kk, l) + c.C4(i, d, kk, l) * gdP(kk, l);
          s[t][i] = v;
          for (int j = 0; j < 2; ++j) {
            double w = 0;
            for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, d) * dPc[kk];
            S[t](i, j) = -w;
          }
        }
      }
      out.vector[fname("Q0", d)] = cell.solve_vector(s, S);
    }
  }

  // H0[a1]: mixed thermo-mechanical corrector.
  for (int a1 = 0; a1 < 2; ++a1) {
    const Eigen::VectorXd& P = first.v(nm.O);
    const Eigen::VectorXd& M = first.s(fname(nm.R, a1));
    std::vector<Vec2> s(nt);
    std::vector<Eigen::Matrix2d> S(nt);
    for (int t = 0; t < nt; ++t) {
      const auto& c = cell.coef[t];
      const Eigen::Matrix2d gP = elem_vec_grad(m, P, t);
      const Vec2 Pc = elem_avg_vec(m, P, t);
      const double Mc = elem_avg(m, M, t);
      for (int i = 0; i < 2; ++i) {
        double v = hat.beta(i, a1) - c.beta(i, a1);
        for (int kk = 0; kk < 2; ++kk)
          for (int l = 0; l < 2; ++l) v -= c.C4(i, a1, kk, l) * gP(kk, l);
        s[t][i] = v;
        for (int j = 0; j < 2; ++j) {
          double w = c.beta(i, j) * Mc;
          for (int kk = 0; kk < 2; ++kk) w += c.C4(i, j, kk, a1) * Pc[kk];
          S[t](i, j) = -w;
        }
      }
    }
    out.vector[fname("H0", a1)] = cell.solve_vector(s, S);
  }

  // W0[a1]: nonlinear thermal stress corrector, both term groups as printed.
  for (int a1 = 0; a1 < 2; ++a1) {
    const Eigen::VectorXd& P = first.v(nm.O);
    const Eigen::VectorXd& M = first.s(fname(nm.R, a1));
    std::vector<Eigen::Matrix2d> S(nt);
    for (int t = 0; t < nt; ++t) {
      const auto& c = cell.coef[t];
      const auto& dc = cell.dcoef[t];
      const Eigen::Matrix2d gP = elem_vec_grad(m, P, t);
      const double Mc = elem_avg(m, M, t);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double w = dc.beta(i, j) + c.beta(i, j);
          for (int kk = 0; kk < 2; ++kk)
            for (int l = 0; l < 2; ++l)
              w += (dc.C4(i, j, kk, l) + c.C4(i, j, kk, l)) * gP(kk, l);
          S[t](i, j) = Mc * w;
        }
    }
    out.vector[fname("W0", a1)] = cell.solve_vector({}, S);
  }

  // J0[a1][a2][m]: nonlinear stiffness corrector, both term groups as printed.
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int mm = 0; mm < 2; ++mm) {
        const Eigen::VectorXd& M = first.s(fname(nm.R, a1));
        const Eigen::VectorXd& N = first.v(fname(nm.T, a2, mm));
        std::vector<Eigen::Matrix2d> S(nt);
        for (int t = 0; t < nt; ++t) {
          const auto& c = cell.coef[t];
          const auto& dc = cell.dcoef[t];
          const Eigen::Matrix2d gN = elem_vec_grad(m, N, t);
          const double Mc = elem_avg(m, M, t);
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
              double w = dc.C4(i, j, mm, a2) + c.C4(i, j, mm, a2);
              for (int kk = 0; kk < 2; ++kk)
                for (int l = 0; l < 2; ++l)
                  w += (dc.C4(i, j, kk, l) + c.C4(i, j, kk, l)) * gN(kk, l);
              S[t](i, j) = Mc * w;
            }
        }
        out.vector[fname("J0", a1, a2, mm)] = cell.solve_vector({}, S);
      }
}

}  // namespace hots
