#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "hots/fem.hpp"
#include "hots/materials.hpp"
#include "hots/mesh.hpp"

namespace hots {

// ---------------------------------------------------------------------------
// Implicit FDM-FEM stepper for the coupled transient thermo-mechanical
// system, decoupled per step: the thermal solve takes the strain-rate
// coupling from the two previous displacement levels (scaled by varpi), and
// the mechanical solve uses the freshly iterated temperature in the thermal
// stress term. Coefficients are lagged one fixed-point iterate and evaluated
// per element at the centroid temperature, so the same stepper drives both
// the homogenized coarse problem (coefficients from the effective tables)
// and the fully resolved reference problem (coefficients from the element's
// own material).
// ---------------------------------------------------------------------------

using CoefficientProvider = std::function<PointCoefficients(int elem, double theta)>;
using ScalarField = std::function<double(const Vec2&, double)>;
using VectorField = std::function<Vec2(const Vec2&, double)>;

struct StepperOptions {
  double dt = 1e-3;
  double varpi = 1.0;       // displacement extrapolation correction factor
  double tol_theta = 1e-6;  // max-norm fixed point threshold, temperature
  double tol_u = 1e-6;      // max-norm fixed point threshold, displacement
  int max_iters = 50;
  double theta_ref = 0.0;   // stress-free reference temperature
};

struct FieldSnapshot {
  double t = 0.0;
  Eigen::VectorXd theta;      // nodal
  Eigen::VectorXd u;          // nodal, node-major
  Eigen::VectorXd theta_dot;  // backward difference over the step
  Eigen::VectorXd u_dot;
  Eigen::VectorXd u_ddot;
  int iters = 0;  // fixed point iterations used
};

class ThermoMechStepper {
 public:
  ThermoMechStepper(const TriMesh& mesh, CoefficientProvider coef, StepperOptions opt,
                    ScalarField theta_bc, VectorField u_bc, ScalarField heat_source,
                    VectorField body_force)
      : mesh_(&mesh),
        coef_(std::move(coef)),
        opt_(opt),
        theta_bc_(std::move(theta_bc)),
        u_bc_(std::move(u_bc)),
        heat_(std::move(heat_source)),
        force_(std::move(body_force)) {
    bnodes_ = mesh.boundary_nodes();
  }

  // theta0 is also the stress-free reference unless options say otherwise;
  // u_prev is reconstructed from the initial velocity.
  void initialize(const Eigen::VectorXd& theta0, const Eigen::VectorXd& u0,
                  const Eigen::VectorXd& v0) {
    const int n = mesh_->num_nodes();
    if (theta0.size() != n || u0.size() != 2 * n || v0.size() != 2 * n)
      throw std::runtime_error("initialize: field size mismatch");
    th_ = theta0;
    u_ = u0;
    u_prev_ = u0 - opt_.dt * v0;
    time_ = 0.0;
  }

  double time() const { return time_; }
  const Eigen::VectorXd& theta() const { return th_; }
  const Eigen::VectorXd& u() const { return u_; }

  FieldSnapshot step() {
    const TriMesh& m = *mesh_;
    const int nt = m.num_tris();
    const double dt = opt_.dt, tn1 = time_ + dt;

    // boundary values at the new time level
    DirichletBC th_bc, u_bc;
    const int nb = static_cast<int>(bnodes_.size());
    th_bc.values.resize(nb);
    u_bc.values.resize(2 * nb);
    for (int e = 0; e < nb; ++e) {
      const int b = bnodes_[e];
      th_bc.dofs.push_back(b);
      th_bc.values[e] = theta_bc_(m.nodes[b], tn1);
      const Vec2 ub = u_bc_(m.nodes[b], tn1);
      u_bc.dofs.push_back(2 * b);
      u_bc.values[2 * e] = ub[0];
      u_bc.dofs.push_back(2 * b + 1);
      u_bc.values[2 * e + 1] = ub[1];
    }

    // step-constant load vectors
    std::vector<double> hq(nt);
    std::vector<Vec2> fq(nt);
    for (int t = 0; t < nt; ++t) {
      const Vec2 c = m.centroid(t);
      hq[t] = heat_(c, tn1);
      fq[t] = force_(c, tn1);
    }
    const Eigen::VectorXd b_heat = assemble_source_rhs(m, hq);
    const Eigen::VectorXd b_force = assemble_vector_source_rhs(m, fq);

    // previous-level strain rates for the thermal coupling term
    std::vector<Eigen::Matrix2d> dgrad(nt);
    for (int t = 0; t < nt; ++t)
      dgrad[t] = (elem_grad_of(u_, t) - elem_grad_of(u_prev_, t)) / dt;

    Eigen::VectorXd th_eta = th_, u_eta = u_;
    int iters = 0;
    for (int eta = 1; eta <= opt_.max_iters; ++eta) {
      iters = eta;
      // lagged per-element coefficients
      std::vector<PointCoefficients> pc(nt);
      for (int t = 0; t < nt; ++t) {
        const auto& v = m.tris[t].v;
        const double thc = (th_eta[v[0]] + th_eta[v[1]] + th_eta[v[2]]) / 3.0;
        pc[t] = coef_(t, thc);
      }

      // thermal solve
      std::vector<Eigen::Matrix2d> kk(nt);
      std::vector<double> cap(nt), couple(nt);
      for (int t = 0; t < nt; ++t) {
        kk[t] = pc[t].k;
        cap[t] = pc[t].rc / dt;
        couple[t] = opt_.varpi * (pc[t].vartheta.array() * dgrad[t].array()).sum();
      }
      const SpMat Mth = assemble_scalar_mass(m, cap);
      const SpMat Kth = assemble_scalar_stiffness(m, kk);
      Eigen::VectorXd bth = b_heat + Mth * th_ - assemble_source_rhs(m, couple);
      ConstrainedOperator th_op(SpMat(Mth + Kth), th_bc);
      Eigen::VectorXd th_new = th_op.solve(bth);

      // mechanical solve, thermal stress at the fresh temperature iterate
      std::vector<Eigen::Matrix3d> CC(nt);
      std::vector<double> rho(nt);
      std::vector<Eigen::Matrix2d> thermal_stress(nt);
      for (int t = 0; t < nt; ++t) {
        CC[t] = pc[t].C;
        rho[t] = pc[t].rho / (dt * dt);
        const auto& v = m.tris[t].v;
        const double thc = (th_new[v[0]] + th_new[v[1]] + th_new[v[2]]) / 3.0;
        thermal_stress[t] = pc[t].beta * (thc - opt_.theta_ref);
      }
      const SpMat Mu = assemble_vector_mass(m, rho);
      const SpMat Ku = assemble_elasticity_stiffness(m, CC);
      Eigen::VectorXd bu = b_force + Mu * (2.0 * u_ - u_prev_) +
                           assemble_tensor_flux_rhs(m, thermal_stress);
      ConstrainedOperator u_op(SpMat(Mu + Ku), u_bc);
      Eigen::VectorXd u_new = u_op.solve(bu);

      const double dth = (th_new - th_eta).lpNorm<Eigen::Infinity>();
      const double du = (u_new - u_eta).lpNorm<Eigen::Infinity>();
      th_eta = th_new;
      u_eta = u_new;
      if (dth <= opt_.tol_theta && du <= opt_.tol_u) break;
    }

    FieldSnapshot snap;
    snap.t = tn1;
    snap.theta = th_eta;
    snap.u = u_eta;
    snap.theta_dot = (th_eta - th_) / dt;
    snap.u_dot = (u_eta - u_) / dt;
    snap.u_ddot = (u_eta - 2.0 * u_ + u_prev_) / (dt * dt);
    snap.iters = iters;

    u_prev_ = u_;
    u_ = u_eta;
    th_ = th_eta;
    time_ = tn1;
    return snap;
  }

 private:
  Eigen::Matrix2d elem_grad_of(const Eigen::VectorXd& w, int t) const {
    const auto B = mesh_->shape_grads(t);
    Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i)
        G.row(i) += w[2 * mesh_->tris[t].v[a] + i] * B.col(a).transpose();
    return G;
  }

  const TriMesh* mesh_;
  CoefficientProvider coef_;
  StepperOptions opt_;
  ScalarField theta_bc_;
  VectorField u_bc_;
  ScalarField heat_;
  VectorField force_;
  std::vector<int> bnodes_;
  Eigen::VectorXd th_, u_, u_prev_;
  double time_ = 0.0;
};

}  // namespace hots
