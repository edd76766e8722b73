#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "lattice.hpp"
#include "symbolic_model.hpp"

namespace homdim {

struct PressureTolerances {
  double root_tol = 1e-10;
  double newton_tol = 1e-10;
  double power_tol = 1e-14;
  double fd_step = 1e-3;
  int newton_max_iter = 100;
};

// Perron root of M(xi, s), M_ij = sum over edges i->j of exp(<xi,f_e> - s*roof_e).
double spectral_radius(const SymbolicFlow& flow, std::span<const double> xi, double s,
                       const PressureTolerances& tol = {});

// The s with spectral radius of M(xi, s) equal to 1.
double pressure(const SymbolicFlow& flow, std::span<const double> xi,
                const PressureTolerances& tol = {});
RealVec grad_pressure(const SymbolicFlow& flow, std::span<const double> xi,
                      const PressureTolerances& tol = {});
// Symmetrized; an all-zero Hessian is returned as is, an indefinite one throws.
Eigen::MatrixXd hessian_pressure(const SymbolicFlow& flow, std::span<const double> xi,
                                 const PressureTolerances& tol = {});
bool check_vanishing_winding(const SymbolicFlow& flow, double tol,
                             const PressureTolerances& ptol = {});
double sigma(const SymbolicFlow& flow, std::span<const double> xi,
             const PressureTolerances& tol = {});

struct LegendrePoint {
  RealVec xi;
  double entropy = 0.0;  // h(rho) = p(xi) - <xi, rho>
  int iterations = 0;
};

LegendrePoint legendre(const SymbolicFlow& flow, std::span<const double> rho,
                       const PressureTolerances& tol = {});

class PressureModel {
 public:
  static PressureModel build(const SymbolicFlow& flow, bool enforce_vanishing_winding = false,
                             const PressureTolerances& tol = {}, double winding_tol = 1e-6);

  const SymbolicFlow& flow() const { return flow_; }
  std::size_t rank() const { return flow_.rank(); }
  double h() const { return h_; }
  const Eigen::MatrixXd& hessian0() const { return hessian0_; }
  const Eigen::MatrixXd& hform() const { return hform_; }
  double sigma0() const { return sigma0_; }
  const RealVec& winding() const { return winding_; }
  bool winding_vanishes() const { return winding_ok_; }
  double winding_tol() const { return winding_tol_; }
  const PressureTolerances& tolerances() const { return tol_; }
  QuadraticNorm norm() const { return QuadraticNorm(hform_); }

  double pressure(std::span<const double> xi) const;
  RealVec grad(std::span<const double> xi) const;
  Eigen::MatrixXd hessian(std::span<const double> xi) const;
  double sigma(std::span<const double> xi) const;
  LegendrePoint legendre(std::span<const double> rho) const;

 private:
  explicit PressureModel(SymbolicFlow flow) : flow_(std::move(flow)) {}

  SymbolicFlow flow_;
  PressureTolerances tol_;
  double h_ = 0.0;
  Eigen::MatrixXd hessian0_;
  Eigen::MatrixXd hform_;
  double sigma0_ = 0.0;
  RealVec winding_;
  bool winding_ok_ = false;
  double winding_tol_ = 1e-6;
};

}  // namespace homdim
