#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hots/cell_problems.hpp"
#include "hots/fem.hpp"
#include "hots/macro_solver.hpp"
#include "hots/mesh.hpp"
#include "hots/tables.hpp"

namespace hots {

using Mat2 = Eigen::Matrix2d;

// Nodal samples of one table field together with recovered first and second
// in-cell derivatives, one entry per temperature sample.
struct FieldDerivData {
  Eigen::VectorXd v;
  Eigen::MatrixX2d g;
  Eigen::MatrixX3d h;
};
using FieldSamples = std::vector<FieldDerivData>;

// Point evaluation of cell-table fields: linear interpolation in space on the
// cell mesh and between temperature samples, with within-interval difference
// quotients serving as temperature derivatives. Vector fields are split into
// components; derivative recovery is optional (corrector fields that only
// ever enter by value skip it).
class TableAccessor {
 public:
  struct ThetaPos {
    int s0 = 0;
    double w = 0.0;
    double inv_h = 0.0;
  };

  TableAccessor(const CellTable& tab, bool with_derivs) : tab_(&tab) {
    const TriMesh& m = tab.mesh;
    const int ns = static_cast<int>(tab.fields.size());
    for (const auto& kv : tab.fields.front().scalar) {
      FieldSamples fs(ns);
      for (int s = 0; s < ns; ++s)
        fill(m, tab.fields[s].scalar.at(kv.first), with_derivs, fs[s]);
      sc_.emplace(kv.first, std::move(fs));
    }
    for (const auto& kv : tab.fields.front().vector) {
      for (int c = 0; c < 2; ++c) {
        FieldSamples fs(ns);
        for (int s = 0; s < ns; ++s) {
          const Eigen::VectorXd& u = tab.fields[s].vector.at(kv.first);
          Eigen::VectorXd comp(u.size() / 2);
          for (int k = 0; k < comp.size(); ++k) comp[k] = u[2 * k + c];
          fill(m, comp, with_derivs, fs[s]);
        }
        vc_[c].emplace(kv.first, std::move(fs));
      }
    }
    lo_ = Vec2(std::numeric_limits<double>::max(),
               std::numeric_limits<double>::max());
    hi_ = -lo_;
    for (const Vec2& p : m.nodes) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
  }

  const TriMesh& mesh() const { return tab_->mesh; }

  ThetaPos theta_pos(double th) const {
    ThetaPos tp;
    tab_->grid.locate(th, tp.s0, tp.w);
    tp.inv_h = 1.0 / tab_->grid.step();
    return tp;
  }

  // Maps a physical point to its periodic image inside the cell domain,
  // x -> x/zeta folded into the cell bounding box.
  Vec2 wrap(const Vec2& x, double zeta) const {
    Vec2 p = x / zeta;
    for (int d = 0; d < 2; ++d) {
      const double L = hi_[d] - lo_[d];
      const double r = (p[d] - lo_[d]) / L;
      p[d] = lo_[d] + (r - std::floor(r)) * L;
    }
    return p;
  }

  const FieldSamples* find_s(const std::string& n) const {
    auto it = sc_.find(n);
    return it == sc_.end() ? nullptr : &it->second;
  }
  const FieldSamples* find_v(const std::string& n, int c) const {
    auto it = vc_[c].find(n);
    return it == vc_[c].end() ? nullptr : &it->second;
  }

  // A null field pointer reads as identically zero: correctors that are
  // structurally absent from a table contribute nothing.
  double val(const FieldSamples* f, const PointLocation& loc,
             const ThetaPos& tp) const {
    if (!f) return 0.0;
    return (1.0 - tp.w) * interp((*f)[tp.s0].v, loc) +
           tp.w * interp((*f)[tp.s0 + 1].v, loc);
  }
  double slope(const FieldSamples* f, const PointLocation& loc,
               const ThetaPos& tp) const {
    if (!f) return 0.0;
    return (interp((*f)[tp.s0 + 1].v, loc) - interp((*f)[tp.s0].v, loc)) *
           tp.inv_h;
  }
  Vec2 grad(const FieldSamples* f, const PointLocation& loc,
            const ThetaPos& tp) const {
    if (!f) return Vec2::Zero();
    return (1.0 - tp.w) * ginterp((*f)[tp.s0].g, loc) +
           tp.w * ginterp((*f)[tp.s0 + 1].g, loc);
  }
  Vec2 gslope(const FieldSamples* f, const PointLocation& loc,
              const ThetaPos& tp) const {
    if (!f) return Vec2::Zero();
    return (ginterp((*f)[tp.s0 + 1].g, loc) - ginterp((*f)[tp.s0].g, loc)) *
           tp.inv_h;
  }
  Mat2 hess(const FieldSamples* f, const PointLocation& loc,
            const ThetaPos& tp) const {
    if (!f) return Mat2::Zero();
    const Eigen::Vector3d h = (1.0 - tp.w) * hinterp((*f)[tp.s0].h, loc) +
                              tp.w * hinterp((*f)[tp.s0 + 1].h, loc);
    Mat2 H;
    H << h[0], h[2], h[2], h[1];
    return H;
  }

 private:
  static void fill(const TriMesh& m, const Eigen::VectorXd& u, bool derivs,
                   FieldDerivData& out) {
    out.v = u;
    if (derivs) {
      out.g = recover_gradient(m, u);
      out.h = recover_hessian(m, u);
    }
  }
  double interp(const Eigen::VectorXd& u, const PointLocation& loc) const {
    const Triangle& e = tab_->mesh.tris[loc.tri];
    return loc.bary[0] * u[e.v[0]] + loc.bary[1] * u[e.v[1]] +
           loc.bary[2] * u[e.v[2]];
  }
  Vec2 ginterp(const Eigen::MatrixX2d& g, const PointLocation& loc) const {
    const Triangle& e = tab_->mesh.tris[loc.tri];
    return loc.bary[0] * g.row(e.v[0]).transpose() +
           loc.bary[1] * g.row(e.v[1]).transpose() +
           loc.bary[2] * g.row(e.v[2]).transpose();
  }
  Eigen::Vector3d hinterp(const Eigen::MatrixX3d& h,
                          const PointLocation& loc) const {
    const Triangle& e = tab_->mesh.tris[loc.tri];
    return loc.bary[0] * h.row(e.v[0]).transpose() +
           loc.bary[1] * h.row(e.v[1]).transpose() +
           loc.bary[2] * h.row(e.v[2]).transpose();
  }

  const CellTable* tab_;
  Vec2 lo_, hi_;
  std::map<std::string, FieldSamples> sc_;
  std::array<std::map<std::string, FieldSamples>, 2> vc_;
};

// Nodal macroscale input for reconstruction: the coarse solution together
// with recovered spatial derivatives of temperature, displacement and the
// displacement rate.
struct MacroState {
  Eigen::VectorXd theta, theta_dot;
  Eigen::MatrixX2d theta_grad;
  Eigen::MatrixX3d theta_hess;
  std::array<Eigen::VectorXd, 2> u, u_ddot;
  std::array<Eigen::MatrixX2d, 2> u_grad, udot_grad;
  std::array<Eigen::MatrixX3d, 2> u_hess;
};

inline MacroState make_macro_state(const TriMesh& m, const FieldSnapshot& s) {
  MacroState ms;
  ms.theta = s.theta;
  ms.theta_dot = s.theta_dot;
  ms.theta_grad = recover_gradient(m, s.theta);
  ms.theta_hess = recover_hessian(m, s.theta);
  const int n = m.num_nodes();
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd uc(n), ucdd(n), ucd(n);
    for (int k = 0; k < n; ++k) {
      uc[k] = s.u[2 * k + c];
      ucdd[k] = s.u_ddot[2 * k + c];
      ucd[k] = s.u_dot[2 * k + c];
    }
    ms.u[c] = uc;
    ms.u_ddot[c] = ucdd;
    ms.u_grad[c] = recover_gradient(m, uc);
    ms.udot_grad[c] = recover_gradient(m, ucd);
    ms.u_hess[c] = recover_hessian(m, uc);
  }
  return ms;
}

// Reconstruction families, ordered by how much fine-scale structure they
// restore on top of the coarse solution.
enum class ReconVariant {
  Homogenized,      // coarse solution as-is
  TwoScale,         // + first and second order intermediate-cell terms
  ThreeScaleLow,    // + first order terms of both cells
  ThreeScaleHigh    // full expansion, all mixed terms
};

struct ReconstructionOptions {
  double zeta1 = 1.0;      // intermediate cell size relative to the domain
  double zeta2 = 1.0;      // fine cell size relative to the domain
  double theta_ref = 0.0;  // stress-free reference temperature
  // Predicate on intermediate-cell coordinates marking where the fine-scale
  // composite lives. Fine-cell correctors only act there: outside, the
  // medium has no fine structure and the micro corrections must vanish.
  // Null means the whole cell is composite.
  std::function<bool(const Vec2&)> micro_region;
};

struct ReconPoint {
  PointLocation macro, y, z;
  bool micro = true;  // wrapped y-image lies in the fine-structured region
};

struct ReconResult {
  Eigen::VectorXd theta;  // per query point
  Eigen::VectorXd u;      // interleaved components, 2 per query point
};

class Reconstructor {
 public:
  Reconstructor(const TriMesh& macro_mesh, const CellTable& meso,
                const CellTable& micro, ReconstructionOptions opt)
      : mm_(&macro_mesh), meso_(meso, true), micro_(micro, false), opt_(opt) {
    resolve_names();
  }

  // Locates each query point once in all three meshes; the result is reused
  // across time levels and variants.
  std::vector<ReconPoint> prepare(const std::vector<Vec2>& pts) const {
    std::vector<ReconPoint> out(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
      out[i].macro = locate_point(*mm_, pts[i]);
      const Vec2 y = meso_.wrap(pts[i], opt_.zeta1);
      out[i].y = locate_point(meso_.mesh(), y);
      out[i].z = locate_point(micro_.mesh(), micro_.wrap(pts[i], opt_.zeta2));
      out[i].micro = !opt_.micro_region || opt_.micro_region(y);
    }
    return out;
  }

  ReconResult evaluate(ReconVariant variant, const MacroState& ms,
                       const std::vector<ReconPoint>& pts) const {
    const int np = static_cast<int>(pts.size());
    ReconResult r;
    r.theta.resize(np);
    r.u.resize(2 * np);
    const double z1 = opt_.zeta1, z2 = opt_.zeta2;
    for (int p = 0; p < np; ++p) {
      const Local L = local_state(ms, pts[p]);
      double th = L.th;
      Vec2 u = L.u0;
      switch (variant) {
        case ReconVariant::Homogenized:
          break;
        case ReconVariant::TwoScale:
          th += z1 * theta1(L) + z1 * z1 * theta4(L);
          u += z1 * u1(L) + z1 * z1 * u4(L);
          break;
        case ReconVariant::ThreeScaleLow:
          th += z1 * theta1(L) + z2 * theta2(L);
          u += z1 * u1(L) + z2 * u2(L);
          break;
        case ReconVariant::ThreeScaleHigh:
          th += z1 * theta1(L) + z2 * theta2(L) + z2 * z2 / z1 * theta3(L) +
                z1 * z1 * theta4(L) + z1 * z2 * theta5(L) + z2 * z2 * theta6(L);
          u += z1 * u1(L) + z2 * u2(L) + z2 * z2 / z1 * u3(L) +
               z1 * z1 * u4(L) + z1 * z2 * u5(L) + z2 * z2 * u6(L);
          break;
      }
      r.theta[p] = th;
      r.u[2 * p] = u[0];
      r.u[2 * p + 1] = u[1];
    }
    return r;
  }

 private:
  struct Local {
    double th = 0, thdot = 0, dth = 0;  // dth = th - theta_ref
    Vec2 gth = Vec2::Zero(), u0 = Vec2::Zero(), uddot = Vec2::Zero();
    Mat2 Hth = Mat2::Zero();
    Mat2 du = Mat2::Zero();    // du(m,a)  = d u_m / d x_a
    Mat2 dudt = Mat2::Zero();  // dudt(m,a) = d (du_m/dt) / d x_a
    std::array<Mat2, 2> Hu{Mat2::Zero(), Mat2::Zero()};
    bool micro = true;
    PointLocation y, z;
    TableAccessor::ThetaPos ty, tz;
  };

  Local local_state(const MacroState& ms, const ReconPoint& pt) const {
    Local L;
    const Triangle& e = mm_->tris[pt.macro.tri];
    auto acc = [&](const Eigen::VectorXd& v) {
      return pt.macro.bary[0] * v[e.v[0]] + pt.macro.bary[1] * v[e.v[1]] +
             pt.macro.bary[2] * v[e.v[2]];
    };
    auto acc2 = [&](const Eigen::MatrixX2d& g) -> Vec2 {
      return pt.macro.bary[0] * g.row(e.v[0]).transpose() +
             pt.macro.bary[1] * g.row(e.v[1]).transpose() +
             pt.macro.bary[2] * g.row(e.v[2]).transpose();
    };
    auto acc3 = [&](const Eigen::MatrixX3d& h) -> Mat2 {
      const Eigen::Vector3d w = pt.macro.bary[0] * h.row(e.v[0]).transpose() +
                                pt.macro.bary[1] * h.row(e.v[1]).transpose() +
                                pt.macro.bary[2] * h.row(e.v[2]).transpose();
      Mat2 H;
      H << w[0], w[2], w[2], w[1];
      return H;
    };
    L.th = acc(ms.theta);
    L.thdot = acc(ms.theta_dot);
    L.dth = L.th - opt_.theta_ref;
    L.gth = acc2(ms.theta_grad);
    L.Hth = acc3(ms.theta_hess);
    for (int m = 0; m < 2; ++m) {
      L.u0[m] = acc(ms.u[m]);
      L.uddot[m] = acc(ms.u_ddot[m]);
      L.du.row(m) = acc2(ms.u_grad[m]).transpose();
      L.dudt.row(m) = acc2(ms.udot_grad[m]).transpose();
      L.Hu[m] = acc3(ms.u_hess[m]);
    }
    L.micro = pt.micro;
    L.y = pt.y;
    L.z = pt.z;
    L.ty = meso_.theta_pos(L.th);
    L.tz = micro_.theta_pos(L.th);
    return L;
  }

  // Shorthand point queries against the intermediate (Y*) and fine (Z*) cell
  // tables at the local temperature. Ys/Ygs are temperature slopes; spatial
  // derivatives of a cell field with respect to the macro coordinate reduce
  // to (temperature slope) * (macro temperature gradient component).
  double Yv(const FieldSamples* f, const Local& L) const {
    return meso_.val(f, L.y, L.ty);
  }
  double Ys(const FieldSamples* f, const Local& L) const {
    return meso_.slope(f, L.y, L.ty);
  }
  Vec2 Yg(const FieldSamples* f, const Local& L) const {
    return meso_.grad(f, L.y, L.ty);
  }
  Vec2 Ygs(const FieldSamples* f, const Local& L) const {
    return meso_.gslope(f, L.y, L.ty);
  }
  Mat2 Yh(const FieldSamples* f, const Local& L) const {
    return meso_.hess(f, L.y, L.ty);
  }
  double Zv(const FieldSamples* f, const Local& L) const {
    if (!L.micro) return 0.0;
    return micro_.val(f, L.z, L.tz);
  }

  // --- temperature correction terms ------------------------------------

  double theta1(const Local& L) const {
    double s = 0;
    for (int a = 0; a < 2; ++a) s += Yv(yM0[a], L) * L.gth[a];
    return s;
  }

  double theta2(const Local& L) const {
    double s = 0;
    for (int a = 0; a < 2; ++a) {
      double t = Zv(zR[a], L);
      const Vec2 g = Yg(yM0[a], L);
      for (int k = 0; k < 2; ++k) t += Zv(zR[k], L) * g[k];
      s += t * L.gth[a];
    }
    return s;
  }

  double theta3(const Local& L) const {
    double s = 0;
    for (int a = 0; a < 2; ++a) {
      const Mat2 H = Yh(yM0[a], L);
      double t = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t += Zv(zRab[i][j], L) * H(i, j);
      s += t * L.gth[a];
    }
    return s;
  }

  double theta4(const Local& L) const {
    double s = Yv(yA0, L) * L.thdot;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        s += Yv(yM0ab[a][b], L) * L.Hth(a, b);
        s -= Yv(yB0[a][b], L) * L.gth[a] * L.gth[b];
        s -= Yv(yE0[a][b], L) * L.dudt(a, b);
      }
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d)
        s += Yv(yC0[a][d], L) * L.gth[d] * L.gth[a];
    return s;
  }

  double theta5(const Local& L) const {
    double s = 0;
    {
      const Vec2 gA = Yg(yA0, L);
      for (int k = 0; k < 2; ++k) {
        double t = gA[k] * L.thdot;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            t -= Yg(yE0[a][b], L)[k] * L.dudt(a, b);
        s += Zv(zR[k], L) * t;
      }
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double t = Zv(zR[a], L) * Yv(yM0[b], L);
        const Vec2 g = Yg(yM0ab[a][b], L);
        for (int k = 0; k < 2; ++k) t += Zv(zR[k], L) * g[k];
        s += t * L.Hth(a, b);
      }
    for (int a = 0; a < 2; ++a) {
      double t = 0;
      const double slopeM = Ys(yM0[a], L);
      for (int k = 0; k < 2; ++k) {
        double inner = slopeM * L.gth[k];
        for (int d = 0; d < 2; ++d) inner += Yg(yC0[a][d], L)[k] * L.gth[d];
        t += Zv(zR[k], L) * inner;
      }
      s += t * L.gth[a];
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double t = Yv(yM0[a], L) * Zv(zRstar[b], L);
        const Vec2 gB = Yg(yB0[a][b], L);
        const Vec2 gMb = Yg(yM0[b], L);
        for (int k = 0; k < 2; ++k) {
          t += Zv(zR[k], L) * gB[k];
          t += Yv(yM0[a], L) * Zv(zRstar[k], L) * gMb[k];
        }
        s -= t * L.gth[a] * L.gth[b];
      }
    return s;
  }

  double theta6(const Local& L) const {
    double s = 0;
    {
      double t = Zv(zAstar0, L);
      const Mat2 HA = Yh(yA0, L);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t += Zv(zRab[i][j], L) * HA(i, j);
      for (int m = 0; m < 2; ++m) {
        const Vec2 gP = Yg(yP0[m], L);
        for (int a = 0; a < 2; ++a) t += Zv(zAstarg[m][a], L) * gP[a];
      }
      s += t * L.thdot;
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double t = Zv(zRab[a][b], L);
        const Mat2 H = Yh(yM0ab[a][b], L);
        const Vec2 gMb = Yg(yM0[b], L);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) t += Zv(zRab[i][j], L) * H(i, j);
        for (int j = 0; j < 2; ++j)
          t += (Zv(zRab[a][j], L) + Zv(zRab[j][a], L)) * gMb[j];
        s += t * L.Hth(a, b);
      }
    for (int a = 0; a < 2; ++a) {
      double t = 0;
      const Vec2 gsM = Ygs(yM0[a], L);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double inner = gsM[i] * L.gth[j] + L.gth[i] * gsM[j];
          for (int d = 0; d < 2; ++d)
            inner += Yh(yC0[a][d], L)(i, j) * L.gth[d];
          t += Zv(zRab[i][j], L) * inner;
        }
      const Vec2 gM = Yg(yM0[a], L);
      for (int d = 0; d < 2; ++d) {
        t += Zv(zDstar[a][d], L) * L.gth[d];
        for (int k = 0; k < 2; ++k)
          t += Zv(zDstar[k][d], L) * L.gth[d] * gM[k];
      }
      s += t * L.gth[a];
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double t = 0;
        const Mat2 HB = Yh(yB0[a][b], L);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) t += Zv(zRab[i][j], L) * HB(i, j);
        s -= t * L.gth[a] * L.gth[b];
      }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double t = Zv(zEstar[a][b], L);
        const Mat2 HE = Yh(yE0[a][b], L);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) t += Zv(zRab[i][j], L) * HE(i, j);
        for (int p = 0; p < 2; ++p) {
          const Vec2 gN = Yg(yN0[b][a][p], L);
          for (int n = 0; n < 2; ++n) t += Zv(zEstar[p][n], L) * gN[n];
        }
        s -= t * L.dudt(a, b);
      }
    return s;
  }

  // --- displacement correction terms ------------------------------------

  Vec2 u1(const Local& L) const {
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < 2; ++i) {
      double s = -Yv(yP0[i], L) * L.dth;
      for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 2; ++m)
          s += Yv(yN0[a][m][i], L) * L.du(m, a);
      r[i] = s;
    }
    return r;
  }

  Vec2 u2(const Local& L) const {
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < 2; ++i) {
      double s = 0;
      for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 2; ++m) {
          double t = Zv(zT[a][m][i], L);
          for (int p = 0; p < 2; ++p) {
            const Vec2 gN = Yg(yN0[a][m][p], L);
            for (int n = 0; n < 2; ++n) t += Zv(zT[n][p][i], L) * gN[n];
          }
          s += t * L.du(m, a);
        }
      // Thermal group: the fine-cell corrector O solves div(C grad O + beta)=0
      // while the stress is C grad u - beta dtheta, so O must enter with a
      // minus sign (mirroring the -P0 term of the intermediate level) for the
      // fine-scale momentum balance to close.
      double t = Zv(zO[i], L);
      for (int m = 0; m < 2; ++m) {
        const Vec2 gP = Yg(yP0[m], L);
        for (int a = 0; a < 2; ++a) t += Zv(zT[a][m][i], L) * gP[a];
      }
      s -= t * L.dth;
      r[i] = s;
    }
    return r;
  }

  Vec2 u3(const Local& L) const {
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < 2; ++i) {
      double s = 0;
      for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 2; ++m) {
          double t = 0;
          for (int p = 0; p < 2; ++p) {
            const Mat2 HN = Yh(yN0[a][m][p], L);
            for (int q = 0; q < 2; ++q)
              for (int n = 0; n < 2; ++n)
                t += Zv(zTab[q][n][p][i], L) * HN(q, n);
          }
          s += t * L.du(m, a);
        }
      double t = 0;
      for (int m = 0; m < 2; ++m) {
        const Mat2 HP = Yh(yP0[m], L);
        for (int q = 0; q < 2; ++q)
          for (int n = 0; n < 2; ++n)
            t += Zv(zTab[q][n][m][i], L) * HP(q, n);
      }
      s -= t * L.dth;
      r[i] = s;
    }
    return r;
  }

  Vec2 u4(const Local& L) const {
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < 2; ++i) {
      double s = 0;
      for (int a = 0; a < 2; ++a) {
        s += Yv(yF0[a][i], L) * L.uddot[a];
        s -= Yv(yH0[a][i], L) * L.gth[a];
        s += Yv(yW0[a][i], L) * L.gth[a] * L.dth;
      }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int m = 0; m < 2; ++m) {
            s += Yv(yN0ab[a][b][m][i], L) * L.Hu[m](a, b);
            s -= Yv(yJ0[a][b][m][i], L) * L.gth[a] * L.du(m, b);
          }
      for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 2; ++m)
          for (int d = 0; d < 2; ++d)
            s += Yv(yZ0[a][m][d][i], L) * L.gth[d] * L.du(m, a);
      for (int d = 0; d < 2; ++d) s -= Yv(yQ0[d][i], L) * L.gth[d] * L.dth;
      r[i] = s;
    }
    return r;
  }

  Vec2 u5(const Local& L) const {
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < 2; ++i) {
      double s = 0;
      for (int a = 0; a < 2; ++a) {
        double t = 0;
        for (int m = 0; m < 2; ++m) {
          const Vec2 gF = Yg(yF0[a][m], L);
          for (int n = 0; n < 2; ++n) t += Zv(zT[n][m][i], L) * gF[n];
        }
        s += t * L.uddot[a];
      }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int m = 0; m < 2; ++m) {
            double t = 0;
            for (int p = 0; p < 2; ++p) {
              const Vec2 gN = Yg(yN0ab[a][b][m][p], L);
              for (int n = 0; n < 2; ++n) t += Zv(zT[n][p][i], L) * gN[n];
              t += Zv(zT[a][p][i], L) * Yv(yN0[b][m][p], L);
            }
            s += t * L.Hu[m](a, b);
          }
      for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 2; ++m) {
          double t = 0;
          for (int p = 0; p < 2; ++p) {
            Vec2 g = Vec2::Zero();
            for (int d = 0; d < 2; ++d) g += Yg(yZ0[a][m][d][p], L) * L.gth[d];
            const double slopeN = Ys(yN0[a][m][p], L);
            for (int n = 0; n < 2; ++n)
              t += Zv(zT[n][p][i], L) * (g[n] + slopeN * L.gth[n]);
          }
          s += t * L.du(m, a);
        }
      {
        double t = 0;
        for (int m = 0; m < 2; ++m) {
          Vec2 g = Vec2::Zero();
          for (int d = 0; d < 2; ++d) g += Yg(yQ0[d][m], L) * L.gth[d];
          const double slopeP = Ys(yP0[m], L);
          for (int n = 0; n < 2; ++n)
            t += Zv(zT[n][m][i], L) * (g[n] + slopeP * L.gth[n]);
        }
        s -= t * L.dth;
      }
      for (int a = 0; a < 2; ++a) {
        double t = Zv(zO[i], L) * Yv(yM0[a], L);
        for (int m = 0; m < 2; ++m) {
          const Vec2 gH = Yg(yH0[a][m], L);
          for (int n = 0; n < 2; ++n) t += Zv(zT[n][m][i], L) * gH[n];
          t += Zv(zT[a][m][i], L) * Yv(yP0[m], L);
        }
        s -= t * L.gth[a];
      }
      for (int a = 0; a < 2; ++a) {
        double t = Yv(yM0[a], L) * Zv(zOstar[i], L);
        for (int m = 0; m < 2; ++m) {
          const Vec2 gW = Yg(yW0[a][m], L);
          const Vec2 gP = Yg(yP0[m], L);
          for (int n = 0; n < 2; ++n) {
            t += Zv(zT[n][m][i], L) * gW[n];
            t += Yv(yM0[a], L) * Zv(zTstar[n][m][i], L) * gP[n];
          }
        }
        s += t * L.gth[a] * L.dth;
      }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int m = 0; m < 2; ++m) {
            double t = Yv(yM0[a], L) * Zv(zTstar[b][m][i], L);
            for (int p = 0; p < 2; ++p) {
              const Vec2 gJ = Yg(yJ0[a][b][m][p], L);
              const Vec2 gN = Yg(yN0[b][m][p], L);
              for (int n = 0; n < 2; ++n) {
                t += Zv(zT[n][p][i], L) * gJ[n];
                t += Yv(yM0[a], L) * Zv(zTstar[n][p][i], L) * gN[n];
              }
            }
            s -= t * L.gth[a] * L.du(m, b);
          }
      r[i] = s;
    }
    return r;
  }

  Vec2 u6(const Local& L) const {
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < 2; ++i) {
      double s = 0;
      for (int a = 0; a < 2; ++a) {
        double t = Zv(zFstar[a][i], L);
        for (int m = 0; m < 2; ++m) {
          const Mat2 HF = Yh(yF0[a][m], L);
          for (int q = 0; q < 2; ++q)
            for (int n = 0; n < 2; ++n)
              t += Zv(zTab[q][n][m][i], L) * HF(q, n);
        }
        s += t * L.uddot[a];
      }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int m = 0; m < 2; ++m) {
            double t = Zv(zTab[a][b][m][i], L);
            for (int p = 0; p < 2; ++p) {
              const Mat2 HN = Yh(yN0ab[a][b][m][p], L);
              const Vec2 gN = Yg(yN0[b][m][p], L);
              for (int q = 0; q < 2; ++q)
                for (int n = 0; n < 2; ++n)
                  t += Zv(zTab[q][n][p][i], L) * HN(q, n);
              for (int n = 0; n < 2; ++n)
                t += (Zv(zTab[a][n][p][i], L) + Zv(zTab[n][a][p][i], L)) *
                     gN[n];
            }
            s += t * L.Hu[m](a, b);
          }
      for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 2; ++m) {
          double t = 0;
          for (int d = 0; d < 2; ++d) t += Zv(zU[a][m][d][i], L) * L.gth[d];
          for (int p = 0; p < 2; ++p) {
            const Vec2 gsN = Ygs(yN0[a][m][p], L);
            for (int q = 0; q < 2; ++q)
              for (int n = 0; n < 2; ++n) {
                double inner = gsN[q] * L.gth[n] + L.gth[q] * gsN[n];
                for (int d = 0; d < 2; ++d)
                  inner += Yh(yZ0[a][m][d][p], L)(q, n) * L.gth[d];
                t += Zv(zTab[q][n][p][i], L) * inner;
              }
            const Vec2 gN = Yg(yN0[a][m][p], L);
            for (int n = 0; n < 2; ++n)
              for (int d = 0; d < 2; ++d)
                t += Zv(zU[n][p][d][i], L) * L.gth[d] * gN[n];
          }
          s += t * L.du(m, a);
        }
      {
        double t = 0;
        for (int d = 0; d < 2; ++d) t += Zv(zQstar[d][i], L) * L.gth[d];
        for (int m = 0; m < 2; ++m) {
          const Vec2 gsP = Ygs(yP0[m], L);
          for (int q = 0; q < 2; ++q)
            for (int n = 0; n < 2; ++n) {
              double inner = L.gth[q] * gsP[n] + gsP[q] * L.gth[n];
              for (int d = 0; d < 2; ++d)
                inner += Yh(yQ0[d][m], L)(q, n) * L.gth[d];
              t += Zv(zTab[q][n][m][i], L) * inner;
            }
          const Vec2 gP = Yg(yP0[m], L);
          for (int n = 0; n < 2; ++n)
            for (int d = 0; d < 2; ++d)
              t += Zv(zU[n][m][d][i], L) * L.gth[d] * gP[n];
        }
        s -= t * L.dth;
      }
      for (int a = 0; a < 2; ++a) {
        double t = Zv(zV[a][i], L);
        const Vec2 gM = Yg(yM0[a], L);
        for (int n = 0; n < 2; ++n) t += Zv(zV[n][i], L) * gM[n];
        for (int m = 0; m < 2; ++m) {
          const Mat2 HH = Yh(yH0[a][m], L);
          const Vec2 gP = Yg(yP0[m], L);
          for (int q = 0; q < 2; ++q)
            for (int n = 0; n < 2; ++n)
              t += Zv(zTab[q][n][m][i], L) * HH(q, n);
          for (int n = 0; n < 2; ++n)
            t += (Zv(zTab[a][n][m][i], L) + Zv(zTab[n][a][m][i], L)) * gP[n];
        }
        s -= t * L.gth[a];
      }
      for (int a = 0; a < 2; ++a) {
        double t = 0;
        for (int m = 0; m < 2; ++m) {
          const Mat2 HW = Yh(yW0[a][m], L);
          for (int q = 0; q < 2; ++q)
            for (int n = 0; n < 2; ++n)
              t += Zv(zTab[q][n][m][i], L) * HW(q, n);
        }
        s += t * L.gth[a] * L.dth;
      }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int m = 0; m < 2; ++m) {
            double t = 0;
            for (int p = 0; p < 2; ++p) {
              const Mat2 HJ = Yh(yJ0[a][b][m][p], L);
              for (int q = 0; q < 2; ++q)
                for (int n = 0; n < 2; ++n)
                  t += Zv(zTab[q][n][p][i], L) * HJ(q, n);
            }
            s -= t * L.gth[a] * L.du(m, b);
          }
      r[i] = s;
    }
    return r;
  }

  void resolve_names() {
    for (int a = 0; a < 2; ++a) {
      yM0[a] = meso_.find_s(fname("M0", a));
      zR[a] = micro_.find_s(fname("R", a));
      zRstar[a] = micro_.find_s(fname("Rstar", a));
      for (int b = 0; b < 2; ++b) {
        yM0ab[a][b] = meso_.find_s(fname("M0ab", a, b));
        yC0[a][b] = meso_.find_s(fname("C0", a, b));
        yB0[a][b] = meso_.find_s(fname("B0", a, b));
        yE0[a][b] = meso_.find_s(fname("E0", a, b));
        zRab[a][b] = micro_.find_s(fname("Rab", a, b));
        zDstar[a][b] = micro_.find_s(fname("Dstar", a, b));
        zAstarg[a][b] = micro_.find_s(fname("Astarg", a, b));
        zEstar[a][b] = micro_.find_s(fname("Estar", a, b));
      }
    }
    yA0 = meso_.find_s("A0");
    zAstar0 = micro_.find_s("Astar0");
    for (int i = 0; i < 2; ++i) {
      yP0[i] = meso_.find_v("P0", i);
      zO[i] = micro_.find_v("O", i);
      zOstar[i] = micro_.find_v("Ostar", i);
      for (int a = 0; a < 2; ++a) {
        yF0[a][i] = meso_.find_v(fname("F0", a), i);
        yQ0[a][i] = meso_.find_v(fname("Q0", a), i);
        yH0[a][i] = meso_.find_v(fname("H0", a), i);
        yW0[a][i] = meso_.find_v(fname("W0", a), i);
        zFstar[a][i] = micro_.find_v(fname("Fstar", a), i);
        zQstar[a][i] = micro_.find_v(fname("Qstar", a), i);
        zV[a][i] = micro_.find_v(fname("V", a), i);
        for (int m = 0; m < 2; ++m) {
          yN0[a][m][i] = meso_.find_v(fname("N0", a, m), i);
          zT[a][m][i] = micro_.find_v(fname("T", a, m), i);
          zTstar[a][m][i] = micro_.find_v(fname("Tstar", a, m), i);
          for (int d = 0; d < 2; ++d) {
            yN0ab[a][m][d][i] = meso_.find_v(fname("N0ab", a, m, d), i);
            yZ0[a][m][d][i] = meso_.find_v(fname("Z0", a, m, d), i);
            yJ0[a][m][d][i] = meso_.find_v(fname("J0", a, m, d), i);
            zTab[a][m][d][i] = micro_.find_v(fname("Tab", a, m, d), i);
            zU[a][m][d][i] = micro_.find_v(fname("U", a, m, d), i);
          }
        }
      }
    }
  }

  const TriMesh* mm_;
  TableAccessor meso_, micro_;
  ReconstructionOptions opt_;

  // Resolved field handles; the trailing index of the vector-field arrays is
  // the displacement component.
  const FieldSamples *yM0[2] = {}, *yA0 = nullptr, *yM0ab[2][2] = {},
                     *yC0[2][2] = {}, *yB0[2][2] = {}, *yE0[2][2] = {};
  const FieldSamples *yP0[2] = {}, *yN0[2][2][2] = {}, *yF0[2][2] = {},
                     *yN0ab[2][2][2][2] = {}, *yZ0[2][2][2][2] = {},
                     *yQ0[2][2] = {}, *yH0[2][2] = {}, *yW0[2][2] = {},
                     *yJ0[2][2][2][2] = {};
  const FieldSamples *zR[2] = {}, *zRab[2][2] = {}, *zRstar[2] = {},
                     *zDstar[2][2] = {}, *zAstar0 = nullptr,
                     *zAstarg[2][2] = {}, *zEstar[2][2] = {};
  const FieldSamples *zO[2] = {}, *zT[2][2][2] = {}, *zTab[2][2][2][2] = {},
                     *zFstar[2][2] = {}, *zU[2][2][2][2] = {},
                     *zQstar[2][2] = {}, *zV[2][2] = {}, *zTstar[2][2][2] = {},
                     *zOstar[2] = {};
};

}  // namespace hots
