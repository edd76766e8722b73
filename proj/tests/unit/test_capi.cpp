#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "homdim/homdim.h"

namespace {

const std::string kRoot = HOMDIM_SOURCE_DIR;

std::string take(char* s) {
  std::string out = s ? s : "";
  hd_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and exit codes") {
  CHECK(std::string(hd_status_name(HD_OK)) == "ok");
  CHECK(hd_exit_code(HD_OK) == 0);
  CHECK(hd_exit_code(HD_ERR_INPUT) == 2);
  CHECK(hd_exit_code(HD_ERR_RANGE) == 2);
  CHECK(hd_exit_code(HD_ERR_IO) == 2);
  CHECK(hd_exit_code(HD_ERR_RESOURCE) == 3);
  CHECK(hd_exit_code(HD_ERR_NUMERIC) == 4);
  CHECK(hd_exit_code(HD_ERR_DOMAIN) == 4);
  CHECK(hd_exit_code(HD_ERR_INTERNAL) == 1);
  CHECK(std::strlen(hd_version()) > 0);
}

TEST_CASE("flows and orbits") {
  hd_flow* f = nullptr;
  REQUIRE(hd_flow_builtin("fs2", &f) == HD_OK);
  CHECK(hd_flow_rank(f) == 1);
  CHECK(hd_flow_num_edges(f) == 2);
  int irr = 0, ap = 0;
  size_t period = 0;
  double rmin = 0;
  REQUIRE(hd_flow_validate(f, &irr, &ap, &period, &rmin) == HD_OK);
  CHECK(irr == 1);
  CHECK(ap == 1);
  CHECK(rmin == 1.0);

  hd_histogram* h = nullptr;
  REQUIRE(hd_orbits_enumerate(f, 2, 40, 1, &h) == HD_OK);
  uint64_t n = 0;
  CHECK(hd_histogram_total(h, 2, &n) == HD_OK);
  CHECK(n == 3);
  int64_t zero = 0;
  CHECK(hd_histogram_count_class(h, &zero, 1, 2, &n) == HD_OK);
  CHECK(n == 1);
  CHECK(hd_histogram_count_class(h, &zero, 1, 3, &n) == HD_ERR_RANGE);
  CHECK(std::string(hd_last_error()).find("complete only up to") != std::string::npos);
  char* csv = nullptr;
  REQUIRE(hd_histogram_csv(h, &csv) == HD_OK);
  CHECK(take(csv) == "length,class_1,count\n1,-1,1\n1,1,1\n2,0,1\n");

  hd_set* even = nullptr;
  REQUIRE(hd_set_parse("{kind: residue, modulus: 2, residue: 0}", 1, &even) == HD_OK);
  CHECK(hd_histogram_count_set(h, even, 2, &n) == HD_OK);
  CHECK(n == 1);
  hd_set_free(even);
  hd_histogram_free(h);

  REQUIRE(hd_transfer_count_csv(f, 2, &csv) == HD_OK);
  CHECK(take(csv) == "class_1,count\n-2,1\n0,2\n2,1\n");

  hd_flow* f4 = nullptr;
  REQUIRE(hd_flow_builtin("fs4", &f4) == HD_OK);
  CHECK(hd_orbits_enumerate(f4, 1e9, 40, 1, &h) == HD_ERR_RESOURCE);
  CHECK(std::string(hd_last_error()).find("word-length bound") != std::string::npos);
  hd_flow_free(f4);
  hd_flow_free(f);

  CHECK(hd_flow_builtin("nope", &f) == HD_ERR_INPUT);
  CHECK(hd_flow_load("/nonexistent/flow.yaml", &f) == HD_ERR_IO);
  CHECK(hd_flow_builtin(nullptr, &f) == HD_ERR_INPUT);
}

TEST_CASE("thermodynamics and model") {
  hd_flow* f = nullptr;
  REQUIRE(hd_flow_resolve((kRoot + "/models/fs4.yaml").c_str(), &f) == HD_OK);
  double xi[2] = {0, 0}, p = 0, g[2], hm[4];
  REQUIRE(hd_pressure(f, xi, 2, &p) == HD_OK);
  CHECK(p == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  REQUIRE(hd_grad_pressure(f, xi, 2, g) == HD_OK);
  CHECK(std::hypot(g[0], g[1]) <= 1e-8);
  REQUIRE(hd_hessian_pressure(f, xi, 2, hm) == HD_OK);
  CHECK(hm[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(hm[1]) <= 1e-6);
  CHECK(hd_pressure(f, xi, 3, &p) == HD_ERR_INPUT);

  double rho[2] = {0.5, 0}, xo[2], ent = 0;
  REQUIRE(hd_legendre(f, rho, 2, xo, &ent) == HD_OK);
  CHECK(xo[0] == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  double far[2] = {0.9, 0.9};
  CHECK(hd_legendre(f, far, 2, xo, &ent) == HD_ERR_DOMAIN);

  hd_model* m = nullptr;
  REQUIRE(hd_model_build(f, 1, 1e-6, &m) == HD_OK);
  CHECK(hd_model_entropy(m) == doctest::Approx(std::log(4.0)));
  CHECK(hd_model_sigma(m) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  double hf[4];
  hd_model_hform(m, hf);
  CHECK(hf[0] == doctest::Approx(2.0).epsilon(1e-5));

  int64_t e1[2] = {1, 0};
  double v = 0;
  REQUIRE(hd_gaussian_term_log(m, e1, 2, 2, &v) == HD_OK);
  CHECK(std::exp(v) == doctest::Approx(0.09653).epsilon(1e-4));
  REQUIRE(hd_margulis_total_log(m, 5, &v) == HD_OK);
  CHECK(std::exp(v) == doctest::Approx(1024 / (5 * std::log(4.0))).epsilon(1e-12));

  hd_set* single = nullptr;
  REQUIRE(hd_set_parse("{kind: single}", 2, &single) == HD_OK);
  double d = 0;
  REQUIRE(hd_predicted_D(m, single, 100, 2, &d) == HD_OK);
  CHECK(d == doctest::Approx(1.0 / (2 * M_PI * 0.5 * 100)).epsilon(1e-6));
  hd_set_free(single);
  hd_model_free(m);

  double num, bnd, ln, lb;
  REQUIRE(hd_tail_integral(1, 1, 1, std::exp(4.0), &num, &bnd, &ln, &lb) == HD_OK);
  CHECK(num == doctest::Approx(0.0455002639).epsilon(1e-8));
  hd_flow_free(f);

  hd_flow* z = nullptr;
  REQUIRE(hd_flow_parse("k: 1\nstates: [a]\nedges:\n  - {from: a, to: a, roof: 1, f: [0]}\n"
                        "  - {from: a, to: a, roof: 2, f: [0]}\n",
                        &z) == HD_OK);
  CHECK(hd_model_build(z, 0, 1e-6, &m) == HD_ERR_NUMERIC);
  hd_flow_free(z);
}

TEST_CASE("lattice") {
  hd_norm* q = nullptr;
  REQUIRE(hd_norm_identity(2, &q) == HD_OK);
  double v[2] = {3, 4}, out = 0;
  REQUIRE(hd_norm_eval(q, v, 2, &out) == HD_OK);
  CHECK(out == 5.0);
  double bad[4] = {1, 2, 2, 1};
  hd_norm* q2 = nullptr;
  CHECK(hd_norm_create(bad, 2, &q2) == HD_ERR_INPUT);

  hd_set* full = nullptr;
  REQUIRE(hd_set_parse("{kind: full}", 2, &full) == HD_OK);
  uint64_t n = 0;
  REQUIRE(hd_count_ball(full, q, 1, &n) == HD_OK);
  CHECK(n == 5);
  char* csv = nullptr;
  REQUIRE(hd_ball_csv(full, q, 1, &csv) == HD_OK);
  CHECK(take(csv) == "alpha_1,alpha_2,norm\n-1,0,1\n0,-1,1\n0,0,0\n0,1,1\n1,0,1\n");
  hd_set_free(full);
  hd_norm_free(q);

  hd_norm* q1 = nullptr;
  REQUIRE(hd_norm_identity(1, &q1) == HD_OK);
  hd_set* sq = nullptr;
  REQUIRE(hd_set_parse("{kind: power, q: 2}", 1, &sq) == HD_OK);
  int has = 0;
  double delta = 0;
  REQUIRE(hd_set_declared_delta(sq, &has, &delta) == HD_OK);
  CHECK(has == 1);
  CHECK(delta == 0.5);
  double kap = 0;
  REQUIRE(hd_kappa(sq, q1, 1e4, 0.5, &kap) == HD_OK);
  CHECK(kap == doctest::Approx(2.0));
  CHECK(hd_kappa(sq, q1, 0.5, 0.5, &kap) == HD_ERR_DOMAIN);
  double radii[5] = {1e2, 1e3, 1e4, 1e5, 1e6}, dh, res, lo, hi;
  REQUIRE(hd_estimate_dimension(sq, q1, radii, 5, &dh, &res, &lo, &hi) == HD_OK);
  CHECK(std::abs(dh - 0.5) <= 0.02);
  hd_set_free(sq);
  hd_norm_free(q1);

  CHECK(hd_set_parse("{kind: digit, base: 3, digits: [0, 3]}", 1, &sq) == HD_ERR_INPUT);
  int64_t fl[2];
  double rho[2] = {1.5, -0.25};
  REQUIRE(hd_fundamental_floor(rho, 2, fl) == HD_OK);
  CHECK(fl[0] == 1);
  CHECK(fl[1] == -1);
}

TEST_CASE("configs and experiments") {
  hd_config* c = nullptr;
  REQUIRE(hd_config_load((kRoot + "/configs/fs4_full.yaml").c_str(), nullptr, 0, &c) == HD_OK);
  char* text = nullptr;
  REQUIRE(hd_config_serialize(c, &text) == HD_OK);
  hd_config* c2 = nullptr;
  REQUIRE(hd_config_parse(text, "", nullptr, 0, &c2) == HD_OK);
  hd_string_free(text);
  int eq = 0;
  REQUIRE(hd_config_equal(c, c2, &eq) == HD_OK);
  CHECK(eq == 1);
  hd_config_free(c2);
  hd_config_free(c);

  const char* ov[] = {"experiment.T_grid=[2,3,4,5,6]"};
  REQUIRE(hd_config_load((kRoot + "/configs/fs4_single.yaml").c_str(), ov, 1, &c) == HD_OK);
  char* r1 = nullptr;
  char* r2 = nullptr;
  const std::string out = "/tmp/homdim_capi_report.csv";
  REQUIRE(hd_experiment_run(c, out.c_str(), &r1) == HD_OK);
  REQUIRE(hd_experiment_run(c, out.c_str(), &r2) == HD_OK);
  auto s1 = take(r1), s2 = take(r2);
  CHECK(s1 == s2);
  CHECK(s1.find("# h = 1.3862943611198906") != std::string::npos);
  std::remove(out.c_str());
  int pass = 0;
  char* lem = nullptr;
  REQUIRE(hd_experiment_lemmas(c, &pass, &lem) == HD_OK);
  CHECK(take(lem).find("lower-bound") != std::string::npos);
  char* dens = nullptr;
  REQUIRE(hd_experiment_density(c, &dens) == HD_OK);
  CHECK(take(dens).rfind("T,D\n", 0) == 0);
  hd_config_free(c);

  CHECK(hd_config_parse("flow: {model: fs2}\nbogus: 1\n", "", nullptr, 0, &c) == HD_ERR_INPUT);
  CHECK(std::string(hd_last_error()).find("bogus") != std::string::npos);
  REQUIRE(hd_config_parse("flow: {model: fs4}\nset: {kind: single}\nexperiment: {T_grid: [2, 60]}\n",
                          "", nullptr, 0, &c) == HD_OK);
  CHECK(hd_experiment_run(c, "/tmp/homdim_never.csv", nullptr) == HD_ERR_RESOURCE);
  hd_config_free(c);
}
