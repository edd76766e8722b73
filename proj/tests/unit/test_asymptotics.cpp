#include <cmath>
#include <numbers>

#include "asymptotics.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace homdim;

namespace {

const AsymptoticContext& fs4() {
  static const AsymptoticContext c(PressureModel::build(fixture::flow("fs4"), true));
  return c;
}
const AsymptoticContext& fs2() {
  static const AsymptoticContext c(PressureModel::build(fixture::flow("fs2"), true));
  return c;
}

}  // namespace

TEST_CASE("context constants") {
  CHECK(fs4().vk() == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(fs2().vk() == doctest::Approx(2.0).epsilon(1e-12));
  auto wm3 = AsymptoticContext(PressureModel::build(fixture::flow("wm3"), true));
  CHECK(wm3.rank() == 1);
  CHECK(fs4().prefactor() == doctest::Approx(1.0 / (2 * std::numbers::pi * 0.5)).epsilon(1e-6));
}

TEST_CASE("margulis_total") {
  CHECK(margulis_total(fs4(), 5) == doctest::Approx(1024 / (5 * std::log(4.0))).epsilon(1e-10));
  CHECK(margulis_total(fs4(), 1 / fs4().h()) == doctest::Approx(std::numbers::e).epsilon(1e-12));
  double r = margulis_total(fs4(), 301) / margulis_total(fs4(), 300);
  CHECK(r == doctest::Approx(4.0).epsilon(0.01));
  CHECK_THROWS_AS(margulis_total(fs4(), 1000), RangeError);
  CHECK(std::isfinite(margulis_total_log(fs4(), 1000)));
}

TEST_CASE("central_count and predicted_count") {
  IntVec z{0, 0};
  for (double t : {2.0, 10.0, 25.0, 300.0}) {
    CHECK(predicted_count_log(fs4(), z, t) == central_count_log(fs4(), t));
    const auto& c = fs4();
    double inv = central_count_log(c, t) + std::log(2 * std::numbers::pi) +
                 2 * std::log(c.sigma()) + std::log(c.h()) + 2 * std::log(t) - c.h() * t;
    CHECK(std::abs(inv) <= 1e-12);
  }
  CHECK(central_count(fs4(), 10) == doctest::Approx(2407.66).epsilon(1e-5));
  // Decay relative to the total.
  double a = central_count_log(fs4(), 100) - margulis_total_log(fs4(), 100);
  double b = central_count_log(fs4(), 200) - margulis_total_log(fs4(), 200);
  CHECK(b - a == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("predicted_count: symmetric and dominated by the central class") {
  for (double t : {10.0, 20.0}) {
    IntVec a{3, 1}, b{-3, -1}, c{1, -3};
    double pa = predicted_count_log(fs4(), a, t);
    // Equal up to the Newton tolerance of the Legendre solve.
    CHECK(std::abs(pa - predicted_count_log(fs4(), b, t)) <= 1e-7);
    CHECK(std::abs(pa - predicted_count_log(fs4(), c, t)) <= 1e-7);
    CHECK(pa < central_count_log(fs4(), t));
  }
  // The general entry point reduces to predicted_count when rho = alpha/T.
  IntVec a{4, 2}, zero{0, 0};
  RealVec rho{4.0 / 20, 2.0 / 20};
  CHECK(proposition_count_log(fs4(), rho, zero, 20) ==
        doctest::Approx(predicted_count_log(fs4(), a, 20)).epsilon(1e-9));
}

TEST_CASE("predicted_count: close to the Gaussian term for small classes") {
  // Local expansion: log predicted - log(e^{hT}/(hT) gaussian) = O(|alpha|^3/T^2).
  for (double t : {50.0, 100.0}) {
    IntVec a{2, 1};
    double lhs = predicted_count_log(fs4(), a, t);
    double rhs = margulis_total_log(fs4(), t) + gaussian_term_log(fs4(), a, t);
    CHECK(std::abs(lhs - rhs) <= 0.05);
  }
}

TEST_CASE("gaussian_term") {
  IntVec z{0, 0};
  CHECK(gaussian_term(fs4(), z, 3) ==
        doctest::Approx(1 / (2 * std::numbers::pi * 0.5 * 3)).epsilon(1e-6));
  IntVec e1{1, 0};
  CHECK(gaussian_term(fs4(), e1, 2) ==
        doctest::Approx(std::exp(-0.5) / (2 * std::numbers::pi)).epsilon(1e-6));
  CHECK(gaussian_term(fs4(), e1, 2) == doctest::Approx(0.09653).epsilon(1e-4));
}

TEST_CASE("gaussian_sum: matches direct summation") {
  std::vector<SetSpec> sets2 = {fixture::spec("full"), fixture::single(),
                                fixture::product({fixture::power(2), fixture::single()}),
                                fixture::product({fixture::digit(3, {0, 2}), fixture::spec("full")}),
                                fixture::slab(1)};
  for (const auto& s : sets2) {
    auto a = make_set(s, 2);
    for (double t : {2.0, 10.0, 50.0}) {
      for (double r : {0.0, 1.0, 5.5, 20.0}) {
        double want = oracle::gaussian_box_sum(fs4().norm().form(), fs4().sigma(), t, r,
                                               [&](const oracle::IntVec& v) { return a.contains(v); });
        double got = gaussian_sum(fs4(), a, t, r);
        CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, want));
      }
    }
  }
  IntVec z{0, 0};
  CHECK(gaussian_sum(fs4(), make_set(fixture::single(), 2), 7, 3) == gaussian_term(fs4(), z, 7));
}

TEST_CASE("predicted_D") {
  CHECK(predicted_D(fs4(), make_set(fixture::spec("full"), 2), 1e3, 2) ==
        doctest::Approx(1.0).epsilon(1e-3));
  double c = fs4().prefactor();
  for (double t : {10.0, 100.0, 1e4}) {
    CHECK(predicted_D(fs4(), make_set(fixture::single(), 2), t, 2) ==
          doctest::Approx(c / t).epsilon(1e-6));
  }
  CHECK(gaussian_radius(100, 2) == doctest::Approx(2 * std::sqrt(100 * std::log(100.0))));
  CHECK_THROWS(gaussian_radius(1.0, 2));

  // log D / log T approaches (delta - k)/2 = -3/4 for {+-m^2} x {0}.
  auto a = make_set(fixture::product({fixture::power(2), fixture::single()}), 2);
  double l2 = std::log(predicted_D(fs4(), a, 1e2, 2));
  double l4 = std::log(predicted_D(fs4(), a, 1e4, 2));
  CHECK((l4 - l2) / std::log(100.0) == doctest::Approx(-0.75).epsilon(0.07));
}

TEST_CASE("tail_integral: against quadrature") {
  for (std::size_t k : {1, 2, 3}) {
    for (double eta : {1.0, 2.0}) {
      for (double t : {std::exp(2.0), std::exp(4.0), std::exp(8.0)}) {
        double a = eta * std::sqrt(std::log(t));
        double area = 2 * std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0);
        double sig = 0.8;
        double want = area / (std::pow(2 * std::numbers::pi, k / 2.0) * std::pow(sig, double(k))) *
                      oracle::radial_tail(k, a);
        auto ti = tail_integral(k, sig, eta, t);
        CHECK(ti.numeric == doctest::Approx(want).epsilon(1e-8));
        CHECK(ti.bound == doctest::Approx(std::pow(t, -eta * eta / 2) *
                                          std::pow(std::log(t), double(k) - 2))
                              .epsilon(1e-12));
        CHECK(std::exp(ti.log_numeric) == doctest::Approx(ti.numeric).epsilon(1e-12));
      }
    }
  }
  CHECK(tail_integral(1, 1, 1, std::exp(4.0)).numeric == doctest::Approx(0.0455002639).epsilon(1e-8));
}

TEST_CASE("tail_integral: order of growth") {
  for (std::size_t k : {1, 2, 3}) {
    for (double eta : {1.0, 2.0}) {
      double lo = 1e300, hi = 0;
      for (double e : {2.0, 4.0, 8.0, 16.0}) {
        auto ti = tail_integral(k, 1.0, eta, std::exp(e));
        double r = std::exp(ti.log_numeric - ti.log_bound);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      CHECK(hi / lo < 10);
    }
  }
}

TEST_CASE("log_radial_tail: large arguments stay finite") {
  for (std::size_t k : {1, 2, 3}) {
    double v = log_radial_tail(k, 60);
    CHECK(std::isfinite(v));
    CHECK(v < -1700);
  }
}
