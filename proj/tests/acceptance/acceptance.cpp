// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "fixtures.hpp"
#include "lattice.hpp"
#include "symbolic_model.hpp"
#include "thermodynamics.hpp"

using namespace homdim;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = HOMDIM_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

int failures = 0;

void run(const char* id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += "; runtime " + num(secs, 3) + " s exceeds " + num(limit_s, 3) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

ExperimentConfig bundled(const std::string& name) {
  return load_config(kRoot / "configs" / (name + ".yaml"));
}

std::vector<std::pair<double, double>> points(const std::vector<ReportRow>& rows, double lo,
                                              double hi, bool predicted) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows) {
    if (r.t < lo || r.t > hi) continue;
    if (predicted != r.prediction_only) continue;
    out.emplace_back(r.t, predicted ? r.predicted_D : r.empirical_D);
  }
  return out;
}

Outcome ac1() {
  auto m = PressureModel::build(fixture::flow("fs4"), true);
  RealVec z{0, 0};
  auto g = m.grad(z);
  double gn = std::hypot(g[0], g[1]);
  Eigen::MatrixXd want_h = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd want_H = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  double eh = (m.hessian0() - want_h).cwiseAbs().maxCoeff();
  double eH = (m.hform() - want_H).cwiseAbs().maxCoeff();
  double es = std::abs(m.sigma0() - std::sqrt(0.5));
  double eent = std::abs(m.h() - std::log(4.0));
  bool ok = eent <= 1e-10 && gn <= 1e-8 && eh <= 1e-6 && eH <= 1e-5 && es <= 1e-6;
  return {ok, "|h-log4| = " + num(eent, 3) + ", |grad| = " + num(gn, 3) + ", |Hess-I/2| = " +
                  num(eh, 3) + ", |H-2I| = " + num(eH, 3) + ", |sigma-2^-1/2| = " + num(es, 3)};
}

Outcome ac2() {
  auto f = fixture::flow("fs4");
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI), u(0, 1);
  double worst_grad = 0, worst_taylor = -1e300;
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    // Uniform in the Euclidean disc of radius 0.3.
    double r = 0.3 * std::sqrt(u(rng)), a = ang(rng);
    RealVec rho{r * std::cos(a), r * std::sin(a)};
    auto lp = legendre(f, rho);
    auto g = grad_pressure(f, lp.xi);
    double eg = std::max(std::abs(g[0] - rho[0]), std::abs(g[1] - rho[1]));
    double n2 = 2 * (rho[0] * rho[0] + rho[1] * rho[1]);  // H = diag(2,2)
    double lhs = std::abs(lp.entropy - std::log(4.0) + n2 / 2);
    double rhs = 0.5 * std::pow(n2, 1.5);
    worst_grad = std::max(worst_grad, eg);
    worst_taylor = std::max(worst_taylor, lhs - rhs);
    ok = ok && eg <= 1e-7 && lhs <= rhs;
  }
  return {ok, "100 points, max |grad p(xi(rho)) - rho| = " + num(worst_grad, 3) +
                  ", max(|taylor residual| - 0.5||rho||^3) = " + num(worst_taylor, 3)};
}

Outcome ac3() {
  std::size_t checked = 0;
  for (const char* name : {"fs4", "fs2"}) {
    auto f = fixture::flow(name);
    auto h = enumerate_orbits(f, 12);
    std::vector<std::map<IntVec, std::uint64_t>> prim(13);
    for (const auto& e : h.entries()) prim[static_cast<std::size_t>(e.length)][e.cls] += e.count;
    for (std::size_t n = 1; n <= 12; ++n) {
      std::map<IntVec, std::uint64_t> lhs;
      for (std::size_t d = 1; d <= n; ++d) {
        if (n % d) continue;
        for (const auto& [c, cnt] : prim[d]) {
          IntVec a = c;
          for (auto& x : a) x *= static_cast<std::int64_t>(n / d);
          lhs[a] += d * cnt;
        }
      }
      auto rhs = transfer_count(f, n);
      if (lhs != rhs)
        return {false, std::string(name) + ": mismatch at word length " + std::to_string(n)};
      checked += rhs.size();
    }
  }
  return {true, "fs4 and fs2, n <= 12, " + std::to_string(checked) + " (n, class) cells exact"};
}

Outcome ac4() {
  Experiment e(bundled("fs2_single"));
  auto rows = theorem_curve(e);
  auto pts = points(rows, 15, 30, false);
  auto s = fit_slope(pts);
  if (!s) return {false, "no usable rows"};
  std::string ts;
  for (const auto& p : pts) ts += (ts.empty() ? "" : ",") + num(p.first);
  return {std::abs(*s + 0.5) <= 0.15,
          "slope " + num(*s) + " over T = {" + ts + "}, target -0.5 +- 0.15"};
}

Outcome ac5() {
  Experiment sparse(bundled("fs2_squares"));
  auto rows = theorem_curve(sparse);
  auto slopes = curve_slopes(rows);
  Experiment pred(bundled("fs4_squares_predict"));
  auto prow = theorem_curve(pred);
  auto ps = fit_slope(points(prow, 1e2, 1e4, true));
  if (!slopes.empirical_top_half || !ps) return {false, "no usable rows"};
  bool ok = std::abs(*slopes.empirical_top_half + 0.25) <= 0.2 && std::abs(*ps + 0.75) <= 0.05;
  return {ok, "fs2 {+-m^2} exact slope (top half of T = 2..30) " +
                  num(*slopes.empirical_top_half) + " [full grid " +
                  num(slopes.empirical_all.value_or(NAN)) + "], target -0.25 +- 0.2; fs4 " +
                  "{+-m^2}x{0} prediction-only slope " + num(*ps) + ", target -0.75 +- 0.05"};
}

// Configurations for the Gaussian-sum checks: every bundled config plus a few
// sets on longer prediction grids.
std::vector<ExperimentConfig> tested_configs() {
  std::vector<ExperimentConfig> out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(kRoot / "configs")) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) out.push_back(load_config(p));
  const char* extra[] = {
      "flow: {model: fs2}\nset: {kind: digit, base: 3, digits: [0, 2]}\n"
      "experiment: {predict_T_grid: [10, 100, 1000, 10000], eta: 1.5}\n",
      "flow: {model: fs4}\nset: {kind: product, factors: [{kind: power, q: 2}, {kind: single}]}\n"
      "experiment: {predict_T_grid: [25, 50, 100]}\n",
      "flow: {model: wm5}\nset: {kind: slab, j: 1}\nexperiment: {predict_T_grid: [10, 100, 1000]}\n",
      "flow: {model: fs4}\nset: {kind: full}\nexperiment: {predict_T_grid: [10, 100, 1000]}\n",
  };
  for (const char* y : extra) out.push_back(parse_config(y));
  return out;
}

Outcome ac6() {
  double worst = 0;
  std::size_t n_checks = 0;
  for (const auto& c : tested_configs()) {
    Experiment e(c);
    const auto& ctx = e.context();
    const double k = static_cast<double>(ctx.rank());
    RealVec ts = c.t_grid;
    ts.insert(ts.end(), c.predict_t_grid.begin(), c.predict_t_grid.end());
    for (double t : ts) {
      double r = gaussian_radius(t, c.eta);
      auto n = e.set().count_ball(ctx.norm(), r);
      if (n == 0) continue;
      double v = gaussian_sum(ctx, e.set(), t, r) * std::pow(t, k / 2) / double(n);
      worst = std::max(worst, v / ctx.prefactor());
      ++n_checks;
    }
  }
  // Every term is at most the prefactor; the slack covers summation rounding.
  bool ok = worst <= 1.0 + 1e-12;
  return {ok, std::to_string(n_checks) + " (config, T) pairs, max ratio / prefactor = " +
                  num(worst, 15)};
}

Outcome ac7() {
  double worst = 0;
  for (std::size_t k : {1, 2, 3}) {
    for (double eta : {1.0, 2.0}) {
      double lo = 1e300, hi = 0;
      for (double e : {2.0, 4.0, 8.0, 16.0}) {
        auto ti = tail_integral(k, 1.0, eta, std::exp(e));
        double r = std::exp(ti.log_numeric - ti.log_bound);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      worst = std::max(worst, hi / lo);
    }
  }
  return {worst < 10, "max spread of numeric/bound over T in {e^2,e^4,e^8,e^16}, k <= 3, eta in "
                      "{1,2}: " + num(worst) + "x, must be < 10x"};
}

Outcome ac8() {
  double worst = 1e300;
  std::size_t n_checks = 0;
  for (const char* model : {"fs2", "wm3"}) {
    AsymptoticContext ctx(PressureModel::build(fixture::flow(model), true));
    for (const auto& s : {fixture::power(2), fixture::digit(3, {0, 2})}) {
      auto a = make_set(s, 1);
      for (double t : {2.0, 5.0, 10.0, 20.0, 30.0, 100.0, 1e3, 1e4, 1e5}) {
        double r = std::sqrt(t);
        auto n = a.count_ball(ctx.norm(), r);
        if (n == 0) continue;
        double sum = gaussian_sum(ctx, a, t, r);
        double bound = std::exp(-2.0) * ctx.prefactor() * double(n) / std::sqrt(t);
        worst = std::min(worst, sum / bound);
        ++n_checks;
      }
    }
  }
  return {worst >= 1.0, std::to_string(n_checks) + " (model, set, T) cases, min sum/bound = " +
                            num(worst) + ", must be >= 1"};
}

Outcome ac9() {
  struct Case {
    const char* label;
    SetSpec spec;
    std::size_t k;
    double hi;
  };
  std::vector<Case> cases = {
      {"power(2)", fixture::power(2), 1, 1e6},
      {"digit(3,{0,2})", fixture::digit(3, {0, 2}), 1, 1e6},
      {"full Z^2", fixture::spec("full"), 2, 1e4},
      {"slab Z x {0}", fixture::slab(1), 2, 1e4},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    auto a = make_set(c.spec, c.k);
    auto grid = log_grid(10, c.hi, 25);
    auto est = estimate_dimension(a, QuadraticNorm::identity(c.k), grid);
    double want = *a.declared_delta();
    double err = std::abs(est.delta_hat - want);
    ok = ok && err <= 0.03;
    detail += (detail.empty() ? "" : "; ") + std::string(c.label) + " " + num(est.delta_hat) +
              " vs " + num(want);
  }
  return {ok, detail + " (grids 10..1e6 / 10..1e4, tolerance 0.03)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome ac10() {
  auto dir = fs::temp_directory_path() / "homdim_acceptance";
  fs::create_directories(dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(kRoot / "configs")) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::size_t bytes = 0;
  for (const auto& p : files) {
    auto c = load_config(p);
    c.output = (dir / "a.csv").string();
    auto t1 = run_experiment(c);
    auto f1 = slurp(dir / "a.csv");
    c.output = (dir / "b.csv").string();
    auto t2 = run_experiment(c);
    auto f2 = slurp(dir / "b.csv");
    if (t1 != t2 || f1 != f2 || f1 != t1) {
      fs::remove_all(dir);
      return {false, p.filename().string() + ": reports differ"};
    }
    bytes += f1.size();
  }
  fs::remove_all(dir);
  return {true, std::to_string(files.size()) + " bundled configs, two runs each, byte-identical (" +
                    std::to_string(bytes) + " bytes)"};
}

}  // namespace

int main() {
  run("AC1", "closed-form constants (fs4)", 1.0, ac1);
  run("AC2", "Legendre roundtrip and Taylor", 10.0, ac2);
  run("AC3", "orbit enumeration oracle equivalence", 60.0, ac3);
  run("AC4", "central-class trend, k=1 two-shift", 0, ac4);
  run("AC5", "sparse-set trend", 0, ac5);
  run("AC6", "Gaussian sum bound", 10.0, ac6);
  run("AC7", "tail order", 5.0, ac7);
  run("AC8", "lower-bound constant", 10.0, ac8);
  run("AC9", "dimension estimator", 60.0, ac9);
  run("AC10", "determinism", 0, ac10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
