#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "experiments.hpp"
#include "fixtures.hpp"

using namespace homdim;

namespace {

ExperimentConfig cfg(const std::string& yaml) { return parse_config(yaml); }

const OrbitHistogram& fs2_hist() {
  static const OrbitHistogram h = enumerate_orbits(fixture::flow("fs2"), 20);
  return h;
}
const OrbitHistogram& fs4_hist() {
  static const OrbitHistogram h = enumerate_orbits(fixture::flow("fs4"), 10);
  return h;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("empirical_D: closed values") {
  auto full = make_set(fixture::spec("full"), 1);
  for (double t : {1.0, 2.0, 7.5, 20.0}) CHECK(empirical_D(fs2_hist(), full, t) == 1.0);
  CHECK(empirical_D(fs2_hist(), make_set(fixture::single(), 1), 2) ==
        doctest::Approx(1.0 / 3).epsilon(1e-15));
  auto far = make_set(fixture::single({1000}), 1);
  CHECK(empirical_D(fs2_hist(), far, 20) == 0.0);
  CHECK_THROWS_AS(empirical_D(fs2_hist(), full, 0.5), DomainError);
}

TEST_CASE("empirical_D: monotone in A and complementary") {
  std::vector<std::pair<SetSpec, SetSpec>> nested = {
      {fixture::single(), fixture::residue(2, 0)},
      {fixture::power(2), fixture::spec("full")},
      {fixture::digit(3, {0, 2}), fixture::digit(3, {0, 1, 2})},
  };
  for (const auto& [sa, sb] : nested) {
    auto a = make_set(sa, 1), b = make_set(sb, 1);
    for (double t = 1; t <= 20; t += 1) CHECK(empirical_D(fs2_hist(), a, t) <= empirical_D(fs2_hist(), b, t));
  }
  std::vector<SetSpec> sets = {fixture::single(), fixture::power(2), fixture::residue(3, 1),
                               fixture::digit(3, {0, 2})};
  for (const auto& s : sets) {
    auto a = make_set(s, 1), c = make_set(fixture::complement(s), 1);
    for (double t = 1; t <= 20; t += 1) {
      std::uint64_t na = fs2_hist().count_set(a, t), nc = fs2_hist().count_set(c, t);
      CHECK(na + nc == fs2_hist().total(t));
      CHECK(empirical_D(fs2_hist(), a, t) + empirical_D(fs2_hist(), c, t) ==
            doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  auto a4 = make_set(fixture::product({fixture::power(2), fixture::single()}), 2);
  auto c4 = make_set(fixture::complement(fixture::product({fixture::power(2), fixture::single()})), 2);
  for (double t = 1; t <= 10; t += 0.5)
    CHECK(fs4_hist().count_set(a4, t) + fs4_hist().count_set(c4, t) == fs4_hist().total(t));
}

TEST_CASE("density_check") {
  RealVec grid;
  for (int t = 2; t <= 20; t += 2) grid.push_back(t);
  auto even = density_check(fs2_hist(), make_set(fixture::residue(2, 0), 1), grid);
  REQUIRE(even.size() == grid.size());
  // Even classes are exactly the even word lengths; over even cutoffs the
  // share tends to 1/2 from above, carried by the last (even) length.
  for (std::size_t i = 2; i < even.size(); ++i) CHECK(even[i].second > 0.5);
  // Pairing consecutive cutoffs removes the parity oscillation.
  RealVec grid2;
  for (double t = 2; t <= 20; t += 1) grid2.push_back(t);
  auto both = density_check(fs2_hist(), make_set(fixture::residue(2, 0), 1), grid2);
  double avg = 0.5 * (both[both.size() - 1].second + both[both.size() - 2].second);
  CHECK(avg == doctest::Approx(0.5).epsilon(0.01));

  for (const auto& [t, d] : density_check(fs2_hist(), make_set(fixture::spec("full"), 1), grid))
    CHECK(d == 1.0);

  auto shifted = fixture::spec("full");
  shifted.shift = {7};
  auto s1 = density_check(fs2_hist(), make_set(shifted, 1), grid);
  auto s2 = density_check(fs2_hist(), make_set(fixture::spec("full"), 1), grid);
  CHECK(s1 == s2);
}

TEST_CASE("prediction against the empirical count of the null class") {
  // Weak-mixing variant: the spec band [0.5, 2] at the largest enumerated T.
  {
    auto f = fixture::flow("wm5");
    AsymptoticContext ctx(PressureModel::build(f, true));
    auto h = enumerate_orbits(f, 13);
    IntVec z{0, 0};
    double ratio = double(h.count_by_class(z, 13)) / std::exp(predicted_count_log(ctx, z, 13));
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }
  // Constant roof: the count is a step function of T and only even word
  // lengths reach class 0, so the ratio swings with T; it stays within a
  // factor 4 over a full period.
  {
    AsymptoticContext ctx(PressureModel::build(fixture::flow("fs4"), true));
    IntVec z{0, 0};
    for (double t = 8; t < 10; t += 0.25) {
      double ratio = double(fs4_hist().count_by_class(z, t)) / std::exp(predicted_count_log(ctx, z, t));
      CHECK(ratio >= 0.25);
      CHECK(ratio <= 4.0);
    }
  }
}

TEST_CASE("fit_slope and curve_slopes") {
  std::vector<std::pair<double, double>> pts;
  for (double t : {10.0, 20.0, 40.0, 80.0}) pts.push_back({t, 3 * std::pow(t, -0.7)});
  CHECK(*fit_slope(pts) == doctest::Approx(-0.7).epsilon(1e-12));
  pts.push_back({160, 0.0});
  CHECK(*fit_slope(pts) == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK_FALSE(fit_slope({{10.0, 0.5}}).has_value());
}

TEST_CASE("theorem_curve: rows, sentinels and targets") {
  auto c = cfg(R"(
flow: {model: fs2}
set: {kind: single, point: [3]}
experiment:
  T_grid: [2, 4, 6]
  predict_T_grid: [100, 1000]
  eta: 1.5
)");
  Experiment e(c);
  auto rows = theorem_curve(e);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].t == 2);
  CHECK(rows[0].n_in_a == 0);
  CHECK_FALSE(rows[0].log_ratio_empirical.has_value());
  CHECK_FALSE(rows[1].log_ratio_empirical.has_value());
  CHECK(rows[2].n_in_a == 1);
  CHECK(rows[2].log_ratio_empirical.has_value());
  CHECK_FALSE(rows[2].prediction_only);
  CHECK(rows[3].prediction_only);
  CHECK(*rows[0].target == doctest::Approx(-0.5));
  // Class 3 lies outside the Gaussian window at T = 2.
  CHECK(rows[0].predicted_D == 0.0);
  for (const auto& r : rows) {
    CHECK(r.empirical_D >= 0.0);
    CHECK(r.empirical_D <= 1.0);
    if (r.predicted_D > 0)
      CHECK(*r.log_ratio_predicted == doctest::Approx(std::log(r.predicted_D) / std::log(r.t)));
    else
      CHECK_FALSE(r.log_ratio_predicted.has_value());
  }
  auto text = render_report(e, rows);
  CHECK(text.find("\n2,3,0,0,0,NA,NA,-0.5\n") != std::string::npos);
  CHECK(text.find("100,NA,NA,NA,") != std::string::npos);
}

TEST_CASE("Experiment: warnings and gate") {
  auto low_eta = cfg(R"(
flow: {model: fs4}
set: {kind: single}
experiment: {T_grid: [2, 3], eta: 1.0}
)");
  Experiment e(low_eta);
  bool warned = false;
  for (const auto& w : e.warnings()) warned |= w.find("eta") != std::string::npos;
  CHECK(warned);
  CHECK(run_experiment(low_eta).find("# warning: eta") != std::string::npos);

  auto asym = cfg(R"(
flow:
  name: asym
  k: 2
  states: [o]
  edges:
    - {from: o, to: o, roof: 1, f: [2, 0]}
    - {from: o, to: o, roof: 1, f: [-1, 0]}
    - {from: o, to: o, roof: 1, f: [0, 1]}
    - {from: o, to: o, roof: 1, f: [0, -1]}
set: {kind: single}
experiment: {T_grid: [2, 3]}
)");
  CHECK_THROWS_AS(Experiment{asym}, DomainError);
  asym.enforce_vanishing_winding = false;
  CHECK_NOTHROW(Experiment{asym});

  auto over = cfg(R"(
flow: {model: fs4}
set: {kind: single}
experiment: {T_grid: [2, 50], budget: 20}
)");
  CHECK_THROWS_AS(theorem_curve(Experiment(over)), ResourceError);
}

TEST_CASE("render_report: header and determinism") {
  auto c = cfg(R"(
flow: {model: fs4}
set: {kind: single}
experiment: {T_grid: [2, 3, 4, 5, 6, 7, 8]}
)");
  auto a = run_experiment(c);
  auto b = run_experiment(c);
  CHECK(a == b);
  CHECK(a.find("# h = 1.38629436111989") != std::string::npos);
  CHECK(a.find("# vanishing_winding = pass") != std::string::npos);
  CHECK(a.find("T,n_orbits_total,n_orbits_in_A,empirical_D,predicted_D,log_ratio_empirical,"
               "log_ratio_predicted,target\n") != std::string::npos);
  std::size_t rows = 0;
  std::istringstream in(a);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#' && line[0] != 'T') ++rows;
  CHECK(rows == 7);

  auto dir = std::filesystem::temp_directory_path() / "homdim_report_test";
  std::filesystem::create_directories(dir);
  c.output = (dir / "r.csv").string();
  run_experiment(c);
  CHECK(slurp(dir / "r.csv") == a);
  c.output = (dir / "missing" / "r.csv").string();
  CHECK_THROWS_AS(run_experiment(c), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("lemma_checks: lower bound at the origin") {
  auto c = cfg(R"(
flow: {model: fs4}
set: {kind: single}
experiment: {T_grid: [2, 4, 6, 8, 10]}
)");
  auto rep = lemma_checks(Experiment(c));
  CHECK(rep.lower_bound.evaluated);
  CHECK(rep.lower_bound.pass);
  // Single term e^0 against e^{-2}: margin e^2 exactly.
  for (const auto& p : rep.lower_bound.series) CHECK(p.value == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("lemma_checks: Gaussian bound in prediction-only mode") {
  auto c = cfg(R"(
flow: {model: fs4}
set:
  kind: product
  factors: [{kind: power, q: 2}, {kind: single}]
experiment: {predict_T_grid: [25, 50, 100]}
)");
  auto rep = lemma_checks(Experiment(c));
  CHECK(rep.gaussian_bound.evaluated);
  CHECK(rep.gaussian_bound.pass);
  CHECK(rep.gaussian_bound.series.size() == 3);
  CHECK_FALSE(rep.approximation.evaluated);
  CHECK_FALSE(rep.tail.evaluated);
}

TEST_CASE("lemma_checks: tail on the two-shift") {
  auto c = cfg(R"(
flow: {model: fs2}
set: {kind: single}
experiment: {T_grid: [6, 10, 14, 18, 22, 26], eta: 1.5}
)");
  auto rep = lemma_checks(Experiment(c));
  CHECK(rep.tail.evaluated);
  CHECK(rep.tail.pass);
  CHECK(rep.gaussian_bound.pass);
  CHECK(rep.lower_bound.pass);
  CHECK(rep.to_text().find("tail") != std::string::npos);
}
