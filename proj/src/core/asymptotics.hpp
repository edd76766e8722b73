#pragma once

#include <cstddef>
#include <span>

#include "lattice.hpp"
#include "thermodynamics.hpp"

namespace homdim {

class AsymptoticContext {
 public:
  explicit AsymptoticContext(PressureModel model);

  const PressureModel& model() const { return model_; }
  const QuadraticNorm& norm() const { return norm_; }
  std::size_t rank() const { return model_.rank(); }
  double h() const { return model_.h(); }
  double sigma() const { return model_.sigma0(); }
  double vk() const { return vk_; }
  // 1/((2 pi)^{k/2} sigma^k), and its log.
  double prefactor() const { return std::exp(log_prefactor_); }
  double log_prefactor() const { return log_prefactor_; }

 private:
  PressureModel model_;
  QuadraticNorm norm_;
  double vk_;
  double log_prefactor_;
};

// e^{hT}/(hT)
double margulis_total_log(const AsymptoticContext& ctx, double t);
double margulis_total(const AsymptoticContext& ctx, double t);

// e^{hT}/((2 pi)^{k/2} sigma^k h T^{1+k/2})
double central_count_log(const AsymptoticContext& ctx, double t);
double central_count(const AsymptoticContext& ctx, double t);

// c(alpha/T) e^{h(alpha/T) T}/T^{1+k/2}
double predicted_count_log(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha,
                           double t);
double predicted_count(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha, double t);

// General form: expected count for class floor(T rho) + alpha,
// c(rho) e^{<xi(rho), T rho - floor(T rho) - alpha>} e^{h(rho) T}/T^{1+k/2}.
double proposition_count_log(const AsymptoticContext& ctx, std::span<const double> rho,
                             std::span<const std::int64_t> alpha, double t);

// e^{-||alpha||^2/2T}/((2 pi)^{k/2} sigma^k T^{k/2})
double gaussian_term_log(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha,
                         double t);
double gaussian_term(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha, double t);

// Sum of gaussian_term over the members of A with ||alpha|| <= r.
double gaussian_sum(const AsymptoticContext& ctx, const LatticeSet& a, double t, double r);

struct TailIntegral {
  double numeric = 0.0;
  double bound = 0.0;
  double log_numeric = 0.0;
  double log_bound = 0.0;
};

// Area(S^{k-1})/((2 pi)^{k/2} sigma^k) * int_{eta sqrt(log T)}^inf e^{-r^2/2} r^{k-1} dr,
// against the bound T^{-eta^2/2} (log T)^{k-2}.
TailIntegral tail_integral(std::size_t k, double sigma, double eta, double t);
TailIntegral tail_integral(const AsymptoticContext& ctx, double eta, double t);

// log of int_a^inf e^{-r^2/2} r^{k-1} dr.
double log_radial_tail(std::size_t k, double a);

// Gaussian main term for e^{-hT} hT #P_T(A): gaussian_sum with radius eta sqrt(T log T).
double predicted_D(const AsymptoticContext& ctx, const LatticeSet& a, double t, double eta);
double gaussian_radius(double t, double eta);

}  // namespace homdim
