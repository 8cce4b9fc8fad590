#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hots {

// Polynomial in temperature, ascending coefficients: p(t) = sum c_k t^k.
struct Poly {
  std::vector<double> c;

  double operator()(double t) const {
    double v = 0;
    for (size_t k = c.size(); k-- > 0;) v = v * t + c[k];
    return v;
  }

  double deriv(double t) const {
    double v = 0;
    for (size_t k = c.size(); k-- > 1;) v = v * t + k * c[k];
    return v;
  }
};

// All point-level coefficients entering assembly, in plane strain. Voigt
// order (11, 22, 12). k and beta and vartheta are full 2x2 tensors even
// though isotropic constituents only fill the diagonal; homogenized values
// populate them fully.
struct PointCoefficients {
  double rho = 0;              // density
  double rc = 0;               // rho * c, the heat capacity density
  Eigen::Matrix2d k = Eigen::Matrix2d::Zero();         // conductivity
  Eigen::Matrix2d beta = Eigen::Matrix2d::Zero();      // thermal stress modulus
  Eigen::Matrix2d vartheta = Eigen::Matrix2d::Zero();  // thermoelastic coupling
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();         // elasticity, Voigt

  // Full 4-index access resolved through Voigt with engineering shear:
  // C[ij][kl], ij in {00,11,01,10} mapping to Voigt {0,1,2,2}.
  double C4(int i, int j, int k_, int l) const {
    auto vi = [](int a, int b) { return a == b ? (a == 0 ? 0 : 1) : 2; };
    return C(vi(i, j), vi(k_, l));
  }
};

inline Eigen::Matrix3d isotropic_plane_strain(double E, double nu) {
  const double lam = E * nu / ((1 + nu) * (1 - 2 * nu));
  const double mu = E / (2 * (1 + nu));
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  C(0, 0) = C(1, 1) = lam + 2 * mu;
  C(0, 1) = C(1, 0) = lam;
  C(2, 2) = mu;
  return C;
}

// How the thermoelastic coupling tensor is formed from beta:
//   ThetaRef:  vartheta = theta_ref * beta  (default)
//   Gamma:     vartheta = gamma * beta
//   Zero:      vartheta = 0 (one-way coupling)
enum class VarthetaMode { ThetaRef, Gamma, Zero };

struct Material {
  std::string name;
  Poly rho, c, k, E, beta;
  double nu = 0.0;
  VarthetaMode vmode = VarthetaMode::ThetaRef;
  double vtheta_scale = 0.0;  // theta_ref or gamma depending on mode

  PointCoefficients evaluate(double theta) const {
    PointCoefficients p;
    p.rho = rho(theta);
    p.rc = rho(theta) * c(theta);
    p.k = k(theta) * Eigen::Matrix2d::Identity();
    p.beta = beta(theta) * Eigen::Matrix2d::Identity();
    p.C = isotropic_plane_strain(E(theta), nu);
    switch (vmode) {
      case VarthetaMode::ThetaRef:
      case VarthetaMode::Gamma:
        p.vartheta = vtheta_scale * p.beta;
        break;
      case VarthetaMode::Zero:
        p.vartheta.setZero();
        break;
    }
    validate(p, theta);
    return p;
  }

  // Analytic derivative of every coefficient with respect to temperature.
  // Only the polynomial factors depend on theta; nu and the vartheta scale
  // are constants.
  PointCoefficients evaluate_dtheta(double theta) const {
    PointCoefficients p;
    p.rho = rho.deriv(theta);
    p.rc = rho.deriv(theta) * c(theta) + rho(theta) * c.deriv(theta);
    p.k = k.deriv(theta) * Eigen::Matrix2d::Identity();
    p.beta = beta.deriv(theta) * Eigen::Matrix2d::Identity();
    p.C = isotropic_plane_strain(E.deriv(theta), nu);
    switch (vmode) {
      case VarthetaMode::ThetaRef:
      case VarthetaMode::Gamma:
        p.vartheta = vtheta_scale * p.beta;
        break;
      case VarthetaMode::Zero:
        p.vartheta.setZero();
        break;
    }
    return p;
  }

  void validate(const PointCoefficients& p, double theta) const {
    if (!(p.rho > 0) || !(p.rc > 0) || !(p.k(0, 0) > 0))
      throw std::runtime_error("material " + name +
                               " loses positivity at theta=" + std::to_string(theta));
    if (!(E(theta) > 0) || !(nu > -1.0 && nu < 0.5))
      throw std::runtime_error("material " + name +
                               " loses ellipticity at theta=" + std::to_string(theta));
  }
};

// Uniform temperature sample grid. Cell functions and effective coefficients
// are tabulated on it and interpolated linearly in between.
struct ThetaGrid {
  double lo = 0, hi = 1;
  int n = 11;

  double sample(int i) const { return lo + (hi - lo) * i / (n - 1); }
  double step() const { return (hi - lo) / (n - 1); }

  // Interval index + local weight for linear interpolation; clamped.
  void locate(double theta, int& i0, double& w) const {
    double s = (theta - lo) / (hi - lo) * (n - 1);
    if (s <= 0) {
      i0 = 0;
      w = 0;
      return;
    }
    if (s >= n - 1) {
      i0 = n - 2;
      w = 1;
      return;
    }
    i0 = static_cast<int>(s);
    w = s - i0;
  }
};

}  // namespace hots
