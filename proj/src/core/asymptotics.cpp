#include "asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "format.hpp"

namespace homdim {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

void require_t(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw InputError(std::string(what) + ": T must be positive and finite");
}

void require_alpha(const AsymptoticContext& ctx, std::size_t n, const char* what) {
  if (n != ctx.rank())
    throw InputError(std::string(what) + ": class has dimension " + std::to_string(n) +
                     ", expected " + std::to_string(ctx.rank()));
}

double checked_exp(double v, const char* what) {
  if (v > 709.0)
    throw RangeError(std::string(what) + " overflows double precision (log value " +
                     format_double(v) + "); use the log-scale variant");
  return std::exp(v);
}

double log_c(std::size_t k, double sigma, double entropy) {
  const double kd = static_cast<double>(k);
  return -0.5 * kd * kLog2Pi - kd * std::log(sigma) - std::log(entropy);
}

// e^{x^2} erfc(x) for x >= 0.
double erfcx(double x) {
  if (x < 20.0) return std::exp(x * x) * std::erfc(x);
  const double y = 1.0 / (2.0 * x * x);
  return (1.0 - y * (1.0 - 3.0 * y * (1.0 - 5.0 * y))) / (x * std::sqrt(std::numbers::pi));
}

}  // namespace

AsymptoticContext::AsymptoticContext(PressureModel model)
    : model_(std::move(model)),
      norm_(model_.hform()),
      vk_(unit_ball_volume(model_.rank())),
      log_prefactor_(-0.5 * static_cast<double>(model_.rank()) * kLog2Pi -
                     static_cast<double>(model_.rank()) * std::log(model_.sigma0())) {}

double margulis_total_log(const AsymptoticContext& ctx, double t) {
  require_t(t, "margulis_total");
  const double ht = ctx.h() * t;
  return ht - std::log(ht);
}

double margulis_total(const AsymptoticContext& ctx, double t) {
  return checked_exp(margulis_total_log(ctx, t), "margulis_total");
}

double central_count_log(const AsymptoticContext& ctx, double t) {
  require_t(t, "central_count");
  const double kd = static_cast<double>(ctx.rank());
  return log_c(ctx.rank(), ctx.sigma(), ctx.h()) + ctx.h() * t - (1.0 + 0.5 * kd) * std::log(t);
}

double central_count(const AsymptoticContext& ctx, double t) {
  return checked_exp(central_count_log(ctx, t), "central_count");
}

double predicted_count_log(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha,
                           double t) {
  require_t(t, "predicted_count");
  require_alpha(ctx, alpha.size(), "predicted_count");
  if (std::all_of(alpha.begin(), alpha.end(), [](std::int64_t a) { return a == 0; }))
    return central_count_log(ctx, t);
  RealVec rho(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) rho[i] = static_cast<double>(alpha[i]) / t;
  const auto lp = ctx.model().legendre(rho);
  const double sig = ctx.model().sigma(lp.xi);
  const double kd = static_cast<double>(ctx.rank());
  return log_c(ctx.rank(), sig, lp.entropy) + lp.entropy * t - (1.0 + 0.5 * kd) * std::log(t);
}

double predicted_count(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha,
                       double t) {
  return checked_exp(predicted_count_log(ctx, alpha, t), "predicted_count");
}

double proposition_count_log(const AsymptoticContext& ctx, std::span<const double> rho,
                             std::span<const std::int64_t> alpha, double t) {
  require_t(t, "proposition_count");
  require_alpha(ctx, alpha.size(), "proposition_count");
  require_alpha(ctx, rho.size(), "proposition_count");
  const auto lp = ctx.model().legendre(rho);
  const double sig = ctx.model().sigma(lp.xi);
  double correction = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double tr = t * rho[i];
    correction += lp.xi[i] * (tr - std::floor(tr) - static_cast<double>(alpha[i]));
  }
  const double kd = static_cast<double>(ctx.rank());
  return log_c(ctx.rank(), sig, lp.entropy) + correction + lp.entropy * t -
         (1.0 + 0.5 * kd) * std::log(t);
}

double gaussian_term_log(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha,
                         double t) {
  require_t(t, "gaussian_term");
  require_alpha(ctx, alpha.size(), "gaussian_term");
  const double kd = static_cast<double>(ctx.rank());
  return -ctx.norm().quad(alpha) / (2.0 * t) + ctx.log_prefactor() - 0.5 * kd * std::log(t);
}

double gaussian_term(const AsymptoticContext& ctx, std::span<const std::int64_t> alpha, double t) {
  return std::exp(gaussian_term_log(ctx, alpha, t));
}

double gaussian_sum(const AsymptoticContext& ctx, const LatticeSet& a, double t, double r) {
  require_t(t, "gaussian_sum");
  if (!(r >= 0.0)) throw InputError("gaussian_sum: radius must be nonnegative");
  if (a.rank() != ctx.rank()) throw InputError("gaussian_sum: set and model dimensions differ");
  double sum = 0.0;
  for (const auto& alpha : a.enumerate_ball(ctx.norm(), r))
    sum += std::exp(-ctx.norm().quad(alpha) / (2.0 * t));
  const double kd = static_cast<double>(ctx.rank());
  return sum * std::exp(ctx.log_prefactor() - 0.5 * kd * std::log(t));
}

double log_radial_tail(std::size_t k, double a) {
  if (k == 0) throw InputError("log_radial_tail: k must be positive");
  if (!(a >= 0.0)) throw InputError("log_radial_tail: lower limit must be nonnegative");
  // Work with J_k(a) e^{a^2/2}: J_1 = sqrt(pi/2) erfc(a/sqrt 2), J_2 = e^{-a^2/2},
  // J_k = a^{k-2} e^{-a^2/2} + (k-2) J_{k-2}.
  double scaled = (k % 2 == 1) ? std::sqrt(std::numbers::pi / 2.0) * erfcx(a / std::numbers::sqrt2)
                               : 1.0;
  for (std::size_t m = (k % 2 == 1) ? 3 : 4; m <= k; m += 2)
    scaled = std::pow(a, static_cast<double>(m - 2)) + static_cast<double>(m - 2) * scaled;
  return std::log(scaled) - 0.5 * a * a;
}

TailIntegral tail_integral(std::size_t k, double sigma, double eta, double t) {
  if (k == 0) throw InputError("tail_integral: k must be positive");
  if (!(eta > 0.0)) throw InputError("tail_integral: eta must be positive");
  if (!(sigma > 0.0)) throw InputError("tail_integral: sigma must be positive");
  if (!(t > std::numbers::e)) throw InputError("tail_integral: T must exceed e");
  const double kd = static_cast<double>(k);
  const double lt = std::log(t);
  // Area of the unit sphere S^{k-1}: 2 pi^{k/2}/Gamma(k/2).
  const double log_area = std::log(2.0) + 0.5 * kd * std::log(std::numbers::pi) -
                          std::lgamma(0.5 * kd);
  TailIntegral out;
  out.log_numeric = log_area - 0.5 * kd * kLog2Pi - kd * std::log(sigma) +
                    log_radial_tail(k, eta * std::sqrt(lt));
  out.log_bound = -0.5 * eta * eta * lt + (kd - 2.0) * std::log(lt);
  out.numeric = std::exp(out.log_numeric);
  out.bound = std::exp(out.log_bound);
  return out;
}

TailIntegral tail_integral(const AsymptoticContext& ctx, double eta, double t) {
  return tail_integral(ctx.rank(), ctx.sigma(), eta, t);
}

double gaussian_radius(double t, double eta) {
  if (!(t > 1.0)) throw InputError("gaussian radius needs T > 1");
  return eta * std::sqrt(t * std::log(t));
}

double predicted_D(const AsymptoticContext& ctx, const LatticeSet& a, double t, double eta) {
  if (!(eta > 0.0)) throw InputError("predicted_D: eta must be positive");
  return gaussian_sum(ctx, a, t, gaussian_radius(t, eta));
}

}  // namespace homdim
