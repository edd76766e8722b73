#include "thermodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "format.hpp"

namespace homdim {

namespace {

void require_dim(const SymbolicFlow& flow, std::size_t n, const char* what) {
  if (n != flow.rank())
    throw InputError(std::string(what) + ": vector has length " + std::to_string(n) +
                     ", expected k = " + std::to_string(flow.rank()));
}

void require_irreducible(const SymbolicFlow& flow) {
  if (!flow.report().irreducible)
    throw InputError("flow '" + flow.name() + "' is not irreducible");
}

// Transfer matrix scaled by exp(-shift) so that its largest entry weight is
// O(1); `roofs` carries the roof-weighted companion for d/ds.
struct Transfer {
  Eigen::MatrixXd m;
  Eigen::MatrixXd roofs;
  double shift = 0.0;
};

Transfer build_transfer(const SymbolicFlow& flow, std::span<const double> xi, double s) {
  const auto n = static_cast<Eigen::Index>(flow.num_states());
  std::vector<double> expo;
  expo.reserve(flow.edges().size());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& e : flow.edges()) {
    double x = -s * e.roof;
    for (std::size_t i = 0; i < xi.size(); ++i) x += xi[i] * static_cast<double>(e.f[i]);
    expo.push_back(x);
    top = std::max(top, x);
  }
  Transfer t;
  t.shift = top;
  t.m = Eigen::MatrixXd::Zero(n, n);
  t.roofs = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < expo.size(); ++i) {
    const auto& e = flow.edges()[i];
    const double w = std::exp(expo[i] - top);
    t.m(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += w;
    t.roofs(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += e.roof * w;
  }
  return t;
}

struct Perron {
  double rho = 0.0;
  Eigen::VectorXd v;
};

// Power iteration on M + I (primitive whenever M is irreducible), stopped by
// the Collatz-Wielandt bracket min (Bv)_i/v_i <= rho(B) <= max (Bv)_i/v_i.
Perron perron(const Eigen::MatrixXd& m, double tol) {
  const auto n = m.rows();
  if (n == 1) return Perron{m(0, 0), Eigen::VectorXd::Ones(1)};
  Eigen::MatrixXd b = m + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  double lo = 0.0, hi = 0.0;
  constexpr int kMaxIter = 200000;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd w = b * v;
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = w(i) / v(i);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    v = w / w.maxCoeff();
    if (hi - lo <= tol * hi) return Perron{0.5 * (lo + hi) - 1.0, v};
  }
  if (hi - lo <= 1e-10 * hi) return Perron{0.5 * (lo + hi) - 1.0, v};
  std::ostringstream msg;
  msg << "power iteration did not converge (bracket [" << format_double(lo - 1.0) << ", "
      << format_double(hi - 1.0) << "])";
  throw NumericError(msg.str());
}

// log rho(M(xi, s)) and its s-derivative.
struct LogRadius {
  double g = 0.0;
  double dg = 0.0;
};

LogRadius log_radius(const SymbolicFlow& flow, std::span<const double> xi, double s,
                     const PressureTolerances& tol, bool with_derivative) {
  const auto t = build_transfer(flow, xi, s);
  const auto right = perron(t.m, tol.power_tol);
  if (!(right.rho > 0.0)) throw NumericError("transfer matrix has zero spectral radius");
  LogRadius out;
  out.g = t.shift + std::log(right.rho);
  if (with_derivative) {
    Eigen::VectorXd u = Eigen::VectorXd::Ones(t.m.rows());
    if (t.m.rows() > 1) u = perron(t.m.transpose(), tol.power_tol).v;
    const double num = u.dot(t.roofs * right.v);
    const double den = right.rho * u.dot(right.v);
    out.dg = -num / den;
  }
  return out;
}

// Ridders/Richardson extrapolation of a difference quotient whose error
// expands in even powers of the step. Returns the lowest-error estimate.
struct Extrapolated {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Extrapolated richardson(F&& quotient, double h0) {
  constexpr int kLevels = 6;
  constexpr double kRatio = 2.0;
  constexpr double kRatio2 = kRatio * kRatio;
  double table[kLevels][kLevels];
  double h = h0;
  table[0][0] = quotient(h);
  Extrapolated best{table[0][0], std::numeric_limits<double>::infinity()};
  for (int i = 1; i < kLevels; ++i) {
    h /= kRatio;
    table[0][i] = quotient(h);
    double fac = kRatio2;
    for (int j = 1; j <= i; ++j) {
      table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
      fac *= kRatio2;
      const double err = std::max(std::abs(table[j][i] - table[j - 1][i]),
                                  std::abs(table[j][i] - table[j - 1][i - 1]));
      if (err <= best.error) best = {table[j][i], err};
    }
    // Once the tableau diagonal starts to diverge, roundoff dominates.
    if (std::abs(table[i][i] - table[i - 1][i - 1]) >= 2.0 * best.error) break;
  }
  return best;
}

void check_noise(const Extrapolated& e, const char* what) {
  if (!(e.error <= 1e-6 * (1.0 + std::abs(e.value))) || !std::isfinite(e.value))
    throw NumericError(std::string(what) + ": finite differences too noisy (estimate " +
                       format_double(e.value) + ", error " + format_double(e.error) + ")");
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double spectral_radius(const SymbolicFlow& flow, std::span<const double> xi, double s,
                       const PressureTolerances& tol) {
  require_dim(flow, xi.size(), "spectral_radius");
  return std::exp(log_radius(flow, xi, s, tol, false).g);
}

double pressure(const SymbolicFlow& flow, std::span<const double> xi,
                const PressureTolerances& tol) {
  require_dim(flow, xi.size(), "pressure");
  require_irreducible(flow);
  double r_max = 0.0;
  for (const auto& e : flow.edges()) r_max = std::max(r_max, e.roof);
  const double r_min = flow.r_min();

  // g(s) = log rho has slope in [-r_max, -r_min], which brackets the root.
  const double g0 = log_radius(flow, xi, 0.0, tol, false).g;
  if (g0 == 0.0) return 0.0;
  double a = std::min(g0 / r_max, g0 / r_min);
  double b = std::max(g0 / r_max, g0 / r_min);
  const double pad = 1e-12 * (1.0 + std::abs(b));
  a -= pad;
  b += pad;
  double ga = log_radius(flow, xi, a, tol, false).g;
  double gb = log_radius(flow, xi, b, tol, false).g;
  if (!(ga >= 0.0 && gb <= 0.0)) {
    std::ostringstream msg;
    msg << "pressure root not bracketed on [" << format_double(a) << ", " << format_double(b)
        << "] (g = " << format_double(ga) << ", " << format_double(gb) << ")";
    throw NumericError(msg.str());
  }

  // Newton on g, falling back to bisection whenever a step leaves the bracket.
  double s = 0.5 * (a + b);
  double g = 0.0;
  for (int it = 0; it < 200; ++it) {
    const auto lr = log_radius(flow, xi, s, tol, true);
    g = lr.g;
    if (g == 0.0) return s;
    if (g > 0.0)
      a = s;
    else
      b = s;
    double next = s - g / lr.dg;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    const double step = std::abs(next - s);
    s = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(s)) ||
        b - a <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(s)))
      break;
  }
  g = log_radius(flow, xi, s, tol, false).g;
  if (!(std::abs(g) <= tol.root_tol)) {
    std::ostringstream msg;
    msg << "pressure root did not converge on [" << format_double(a) << ", "
        << format_double(b) << "] (residual " << format_double(g) << ")";
    throw NumericError(msg.str());
  }
  return s;
}

RealVec grad_pressure(const SymbolicFlow& flow, std::span<const double> xi,
                      const PressureTolerances& tol) {
  require_dim(flow, xi.size(), "grad_pressure");
  const auto k = flow.rank();
  RealVec grad(k);
  RealVec x(xi.begin(), xi.end());
  for (std::size_t i = 0; i < k; ++i) {
    auto quotient = [&](double h) {
      x[i] = xi[i] + h;
      const double up = pressure(flow, x, tol);
      x[i] = xi[i] - h;
      const double dn = pressure(flow, x, tol);
      x[i] = xi[i];
      return (up - dn) / (2.0 * h);
    };
    const auto e = richardson(quotient, tol.fd_step);
    check_noise(e, "grad_pressure");
    grad[i] = e.value;
  }
  return grad;
}

Eigen::MatrixXd hessian_pressure(const SymbolicFlow& flow, std::span<const double> xi,
                                 const PressureTolerances& tol) {
  require_dim(flow, xi.size(), "hessian_pressure");
  const auto k = flow.rank();
  const auto ki = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd hess(ki, ki);
  RealVec x(xi.begin(), xi.end());
  const double p0 = pressure(flow, xi, tol);
  for (std::size_t i = 0; i < k; ++i) {
    auto diag = [&](double h) {
      x[i] = xi[i] + h;
      const double up = pressure(flow, x, tol);
      x[i] = xi[i] - h;
      const double dn = pressure(flow, x, tol);
      x[i] = xi[i];
      return (up - 2.0 * p0 + dn) / (h * h);
    };
    const auto e = richardson(diag, tol.fd_step);
    check_noise(e, "hessian_pressure");
    hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = e.value;
    for (std::size_t j = 0; j < i; ++j) {
      auto mixed = [&](double h) {
        auto at = [&](double si, double sj) {
          x[i] = xi[i] + si * h;
          x[j] = xi[j] + sj * h;
          const double v = pressure(flow, x, tol);
          x[i] = xi[i];
          x[j] = xi[j];
          return v;
        };
        return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      };
      const auto m = richardson(mixed, tol.fd_step);
      check_noise(m, "hessian_pressure");
      hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.value;
      hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = m.value;
    }
  }
  if (hess.cwiseAbs().maxCoeff() <= 1e-9) return Eigen::MatrixXd::Zero(ki, ki);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
  const auto& ev = eig.eigenvalues();
  if (ev.minCoeff() < -1e-7 * (1.0 + ev.cwiseAbs().maxCoeff())) {
    std::ostringstream msg;
    msg << "pressure Hessian is indefinite (eigenvalues";
    for (Eigen::Index i = 0; i < ev.size(); ++i) msg << " " << format_double(ev(i));
    msg << ")";
    throw NumericError(msg.str());
  }
  return hess;
}

bool check_vanishing_winding(const SymbolicFlow& flow, double tol,
                             const PressureTolerances& ptol) {
  const RealVec zero(flow.rank(), 0.0);
  return norm2(grad_pressure(flow, zero, ptol)) <= tol;
}

namespace {

double sigma_of(const Eigen::MatrixXd& hess) {
  const double det = hess.determinant();
  if (!(det > 0.0))
    throw NumericError("sigma: Hessian determinant is not positive (" + format_double(det) + ")");
  return std::pow(det, 1.0 / (2.0 * static_cast<double>(hess.rows())));
}

}  // namespace

double sigma(const SymbolicFlow& flow, std::span<const double> xi, const PressureTolerances& tol) {
  return sigma_of(hessian_pressure(flow, xi, tol));
}

LegendrePoint legendre(const SymbolicFlow& flow, std::span<const double> rho,
                       const PressureTolerances& tol) {
  require_dim(flow, rho.size(), "legendre");
  const auto k = static_cast<Eigen::Index>(flow.rank());
  Eigen::Map<const Eigen::VectorXd> target(rho.data(), k);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(k);

  auto residual_at = [&](const Eigen::VectorXd& x) {
    const auto g = grad_pressure(flow, std::span<const double>(x.data(), x.size()), tol);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(g.data(), k) - target);
  };
  auto domain_error = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "legendre: rho = (";
    for (Eigen::Index i = 0; i < k; ++i) msg << (i ? ", " : "") << format_double(rho[i]);
    msg << ") appears to lie outside the interior of the winding set: " << why;
    return DomainError(msg.str());
  };

  Eigen::VectorXd res = residual_at(xi);
  double rnorm = res.norm();
  int it = 0;
  for (; rnorm > tol.newton_tol; ++it) {
    if (it >= tol.newton_max_iter) throw domain_error("Newton exceeded iteration limit");
    Eigen::MatrixXd hess;
    try {
      hess = hessian_pressure(flow, std::span<const double>(xi.data(), xi.size()), tol);
    } catch (const NumericError& e) {
      throw domain_error(std::string("derivatives unreliable along the Newton path (") + e.what() +
                         ")");
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !(hess.determinant() > 0.0))
      throw domain_error("Hessian not positive definite along the Newton path");
    const Eigen::VectorXd step = ldlt.solve(-res);
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
      const Eigen::VectorXd trial = xi + lambda * step;
      if (!trial.allFinite() || trial.norm() > 700.0) continue;
      Eigen::VectorXd trial_res;
      try {
        trial_res = residual_at(trial);
      } catch (const NumericError&) {
        continue;
      }
      if (trial_res.norm() < rnorm) {
        xi = trial;
        res = trial_res;
        rnorm = trial_res.norm();
        improved = true;
        break;
      }
    }
    if (!improved) {
      // Finite-difference noise floor: accept a residual just above tolerance.
      if (rnorm <= 100.0 * tol.newton_tol) break;
      throw domain_error("damped Newton step failed to reduce the residual");
    }
  }
  LegendrePoint out;
  out.xi.assign(xi.data(), xi.data() + k);
  out.entropy = pressure(flow, out.xi, tol) - xi.dot(target);
  out.iterations = it;
  return out;
}

// ---------------------------------------------------------------------------

PressureModel PressureModel::build(const SymbolicFlow& flow, bool enforce_vanishing_winding,
                                   const PressureTolerances& tol, double winding_tol) {
  require_irreducible(flow);
  PressureModel m(flow);
  m.tol_ = tol;
  m.winding_tol_ = winding_tol;
  const RealVec zero(flow.rank(), 0.0);
  m.h_ = homdim::pressure(flow, zero, tol);
  if (!(m.h_ > 0.0))
    throw NumericError("topological entropy is not positive (h = " + format_double(m.h_) + ")");
  m.winding_ = grad_pressure(flow, zero, tol);
  m.winding_ok_ = norm2(m.winding_) <= winding_tol;
  if (enforce_vanishing_winding && !m.winding_ok_) {
    std::ostringstream msg;
    msg << "winding cycle of the maximal-entropy measure does not vanish (|grad p(0)| = "
        << format_double(norm2(m.winding_)) << " > " << format_double(winding_tol) << ")";
    throw DomainError(msg.str());
  }
  m.hessian0_ = hessian_pressure(flow, zero, tol);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.hessian0_);
  if (!(eig.eigenvalues().minCoeff() > 1e-9))
    throw NumericError("pressure Hessian at 0 is singular; the norm form cannot be built");
  m.hform_ = m.hessian0_.inverse();
  m.hform_ = 0.5 * (m.hform_ + m.hform_.transpose());
  m.sigma0_ = sigma_of(m.hessian0_);
  return m;
}

double PressureModel::pressure(std::span<const double> xi) const {
  return homdim::pressure(flow_, xi, tol_);
}
RealVec PressureModel::grad(std::span<const double> xi) const {
  return grad_pressure(flow_, xi, tol_);
}
Eigen::MatrixXd PressureModel::hessian(std::span<const double> xi) const {
  return hessian_pressure(flow_, xi, tol_);
}
double PressureModel::sigma(std::span<const double> xi) const {
  return homdim::sigma(flow_, xi, tol_);
}
LegendrePoint PressureModel::legendre(std::span<const double> rho) const {
  return homdim::legendre(flow_, rho, tol_);
}

}  // namespace homdim
