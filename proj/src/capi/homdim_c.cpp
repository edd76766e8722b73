#include "homdim/homdim.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "asymptotics.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "format.hpp"
#include "lattice.hpp"
#include "symbolic_model.hpp"
#include "thermodynamics.hpp"

struct hd_flow {
  homdim::SymbolicFlow flow;
};
struct hd_histogram {
  homdim::OrbitHistogram hist;
};
struct hd_model {
  homdim::AsymptoticContext ctx;
};
struct hd_set {
  homdim::LatticeSet set;
};
struct hd_norm {
  homdim::QuadraticNorm norm;
};
struct hd_config {
  homdim::ExperimentConfig config;
};

namespace {

thread_local std::string g_last_error;

hd_status status_of(homdim::ErrorKind k) {
  switch (k) {
    case homdim::ErrorKind::Input: return HD_ERR_INPUT;
    case homdim::ErrorKind::Range: return HD_ERR_RANGE;
    case homdim::ErrorKind::Io: return HD_ERR_IO;
    case homdim::ErrorKind::Resource: return HD_ERR_RESOURCE;
    case homdim::ErrorKind::Numeric: return HD_ERR_NUMERIC;
    case homdim::ErrorKind::Domain: return HD_ERR_DOMAIN;
  }
  return HD_ERR_INTERNAL;
}

template <class F>
hd_status guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return HD_OK;
  } catch (const homdim::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HD_ERR_RESOURCE;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return HD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "internal error";
    return HD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw homdim::InputError(std::string(what) + " must not be NULL");
}

void need_rank(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw homdim::InputError(std::string(what) + ": length " + std::to_string(got) +
                             " does not match dimension " + std::to_string(want));
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put_string(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

std::span<const double> reals(const double* p, std::size_t k) { return {p, k}; }
std::span<const std::int64_t> ints(const int64_t* p, std::size_t k) {
  return {reinterpret_cast<const std::int64_t*>(p), k};
}

void copy_matrix(const Eigen::MatrixXd& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

std::vector<std::string> override_list(const char* const* overrides, size_t n) {
  std::vector<std::string> out;
  if (n > 0) need(overrides, "overrides");
  for (size_t i = 0; i < n; ++i) {
    need(overrides[i], "override");
    out.emplace_back(overrides[i]);
  }
  return out;
}

homdim::QuadraticNorm dimension_norm(const homdim::ExperimentConfig& c) {
  const auto k = c.flow.k;
  if (c.dimension.norm == "identity") return homdim::QuadraticNorm::identity(k);
  if (c.dimension.norm == "model") {
    homdim::SymbolicFlow flow(c.flow);
    return homdim::PressureModel::build(flow, false, {}, c.winding_tol).norm();
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.dimension.matrix[i][j];
  return homdim::QuadraticNorm(m);
}

}  // namespace

extern "C" {

const char* hd_version(void) { return "1.0.0"; }

const char* hd_last_error(void) { return g_last_error.c_str(); }

const char* hd_status_name(hd_status s) {
  switch (s) {
    case HD_OK: return "ok";
    case HD_ERR_INPUT: return "input error";
    case HD_ERR_RANGE: return "range error";
    case HD_ERR_IO: return "i/o error";
    case HD_ERR_RESOURCE: return "resource error";
    case HD_ERR_NUMERIC: return "numeric error";
    case HD_ERR_DOMAIN: return "domain error";
    case HD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int hd_exit_code(hd_status s) {
  switch (s) {
    case HD_OK: return 0;
    case HD_ERR_INPUT:
    case HD_ERR_RANGE:
    case HD_ERR_IO: return 2;
    case HD_ERR_RESOURCE: return 3;
    case HD_ERR_NUMERIC:
    case HD_ERR_DOMAIN: return 4;
    default: return 1;
  }
}

void hd_string_free(char* s) { std::free(s); }

// ---- flows ----

hd_status hd_flow_builtin(const char* name, hd_flow** out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    *out = new hd_flow{homdim::SymbolicFlow(homdim::builtin_flow(name))};
  });
}

hd_status hd_flow_load(const char* path, hd_flow** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new hd_flow{homdim::SymbolicFlow(homdim::load_flow(path))};
  });
}

hd_status hd_flow_parse(const char* text, hd_flow** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new hd_flow{homdim::SymbolicFlow(homdim::parse_flow(text))};
  });
}

hd_status hd_flow_resolve(const char* name_or_path, hd_flow** out) {
  return guard([&] {
    need(name_or_path, "model");
    need(out, "out");
    *out = new hd_flow{homdim::SymbolicFlow(homdim::resolve_flow(name_or_path))};
  });
}

void hd_flow_free(hd_flow* flow) { delete flow; }
size_t hd_flow_rank(const hd_flow* f) { return f ? f->flow.rank() : 0; }
size_t hd_flow_num_states(const hd_flow* f) { return f ? f->flow.num_states() : 0; }
size_t hd_flow_num_edges(const hd_flow* f) { return f ? f->flow.edges().size() : 0; }

hd_status hd_flow_validate(const hd_flow* f, int* irreducible, int* aperiodic, size_t* period,
                           double* r_min) {
  return guard([&] {
    need(f, "flow");
    const auto r = homdim::validate(f->flow);
    if (irreducible) *irreducible = r.irreducible ? 1 : 0;
    if (aperiodic) *aperiodic = r.aperiodic ? 1 : 0;
    if (period) *period = r.period;
    if (r_min) *r_min = r.r_min;
  });
}

hd_status hd_flow_serialize(const hd_flow* f, char** out) {
  return guard([&] {
    need(f, "flow");
    need(out, "out");
    put_string(out, homdim::serialize_flow(f->flow.spec()));
  });
}

hd_status hd_builtin_names(char** out) {
  return guard([&] {
    need(out, "out");
    std::string s;
    for (const auto& n : homdim::builtin_flow_names()) s += n + "\n";
    put_string(out, s);
  });
}

// ---- orbits ----

hd_status hd_word_length_bound(const hd_flow* f, double t, size_t* out) {
  return guard([&] {
    need(f, "flow");
    need(out, "out");
    *out = homdim::word_length_bound(f->flow, t);
  });
}

hd_status hd_orbits_enumerate(const hd_flow* f, double t, size_t budget, unsigned threads,
                              hd_histogram** out) {
  return guard([&] {
    need(f, "flow");
    need(out, "out");
    homdim::EnumerationOptions opts;
    opts.budget = budget;
    opts.threads = threads;
    *out = new hd_histogram{homdim::enumerate_orbits(f->flow, t, opts)};
  });
}

void hd_histogram_free(hd_histogram* h) { delete h; }
double hd_histogram_t_max(const hd_histogram* h) { return h ? h->hist.t_max() : 0.0; }

hd_status hd_histogram_total(const hd_histogram* h, double t, uint64_t* out) {
  return guard([&] {
    need(h, "histogram");
    need(out, "out");
    *out = h->hist.total(t);
  });
}

hd_status hd_histogram_count_class(const hd_histogram* h, const int64_t* alpha, size_t k,
                                   double t, uint64_t* out) {
  return guard([&] {
    need(h, "histogram");
    need(alpha, "alpha");
    need(out, "out");
    *out = h->hist.count_by_class(ints(alpha, k), t);
  });
}

hd_status hd_histogram_count_set(const hd_histogram* h, const hd_set* s, double t,
                                 uint64_t* out) {
  return guard([&] {
    need(h, "histogram");
    need(s, "set");
    need(out, "out");
    *out = h->hist.count_set(s->set, t);
  });
}

hd_status hd_histogram_csv(const hd_histogram* h, char** out) {
  return guard([&] {
    need(h, "histogram");
    need(out, "out");
    put_string(out, h->hist.to_csv());
  });
}

hd_status hd_transfer_count_csv(const hd_flow* f, size_t n, char** out) {
  return guard([&] {
    need(f, "flow");
    need(out, "out");
    const auto counts = homdim::transfer_count(f->flow, n);
    std::string s;
    for (std::size_t i = 1; i <= f->flow.rank(); ++i) s += "class_" + std::to_string(i) + ",";
    s += "count\n";
    for (const auto& [cls, c] : counts) {
      for (auto v : cls) s += homdim::format_int(v) + ",";
      s += std::to_string(c) + "\n";
    }
    put_string(out, s);
  });
}

// ---- thermodynamics ----

hd_status hd_pressure(const hd_flow* f, const double* xi, size_t k, double* out) {
  return guard([&] {
    need(f, "flow");
    need(xi, "xi");
    need(out, "out");
    *out = homdim::pressure(f->flow, reals(xi, k));
  });
}

hd_status hd_grad_pressure(const hd_flow* f, const double* xi, size_t k, double* out) {
  return guard([&] {
    need(f, "flow");
    need(xi, "xi");
    need(out, "out");
    const auto g = homdim::grad_pressure(f->flow, reals(xi, k));
    std::copy(g.begin(), g.end(), out);
  });
}

hd_status hd_hessian_pressure(const hd_flow* f, const double* xi, size_t k, double* out) {
  return guard([&] {
    need(f, "flow");
    need(xi, "xi");
    need(out, "out");
    copy_matrix(homdim::hessian_pressure(f->flow, reals(xi, k)), out);
  });
}

hd_status hd_sigma(const hd_flow* f, const double* xi, size_t k, double* out) {
  return guard([&] {
    need(f, "flow");
    need(xi, "xi");
    need(out, "out");
    *out = homdim::sigma(f->flow, reals(xi, k));
  });
}

hd_status hd_check_vanishing_winding(const hd_flow* f, double tol, int* out) {
  return guard([&] {
    need(f, "flow");
    need(out, "out");
    *out = homdim::check_vanishing_winding(f->flow, tol) ? 1 : 0;
  });
}

hd_status hd_legendre(const hd_flow* f, const double* rho, size_t k, double* xi_out,
                      double* entropy_out) {
  return guard([&] {
    need(f, "flow");
    need(rho, "rho");
    const auto lp = homdim::legendre(f->flow, reals(rho, k));
    if (xi_out) std::copy(lp.xi.begin(), lp.xi.end(), xi_out);
    if (entropy_out) *entropy_out = lp.entropy;
  });
}

hd_status hd_model_build(const hd_flow* f, int enforce, double winding_tol, hd_model** out) {
  return guard([&] {
    need(f, "flow");
    need(out, "out");
    if (!(winding_tol > 0.0)) throw homdim::InputError("winding_tol must be positive");
    *out = new hd_model{homdim::AsymptoticContext(
        homdim::PressureModel::build(f->flow, enforce != 0, {}, winding_tol))};
  });
}

void hd_model_free(hd_model* m) { delete m; }
size_t hd_model_rank(const hd_model* m) { return m ? m->ctx.rank() : 0; }
double hd_model_entropy(const hd_model* m) { return m ? m->ctx.h() : 0.0; }
double hd_model_sigma(const hd_model* m) { return m ? m->ctx.sigma() : 0.0; }
int hd_model_winding_vanishes(const hd_model* m) {
  return m && m->ctx.model().winding_vanishes() ? 1 : 0;
}
void hd_model_winding(const hd_model* m, double* out) {
  if (!m || !out) return;
  const auto& w = m->ctx.model().winding();
  std::copy(w.begin(), w.end(), out);
}
void hd_model_hessian0(const hd_model* m, double* out) {
  if (m && out) copy_matrix(m->ctx.model().hessian0(), out);
}
void hd_model_hform(const hd_model* m, double* out) {
  if (m && out) copy_matrix(m->ctx.model().hform(), out);
}

hd_status hd_model_norm(const hd_model* m, hd_norm** out) {
  return guard([&] {
    need(m, "model");
    need(out, "out");
    *out = new hd_norm{m->ctx.norm()};
  });
}

// ---- asymptotics ----

hd_status hd_margulis_total_log(const hd_model* m, double t, double* out) {
  return guard([&] {
    need(m, "model");
    need(out, "out");
    *out = homdim::margulis_total_log(m->ctx, t);
  });
}

hd_status hd_central_count_log(const hd_model* m, double t, double* out) {
  return guard([&] {
    need(m, "model");
    need(out, "out");
    *out = homdim::central_count_log(m->ctx, t);
  });
}

hd_status hd_predicted_count_log(const hd_model* m, const int64_t* alpha, size_t k, double t,
                                 double* out) {
  return guard([&] {
    need(m, "model");
    need(alpha, "alpha");
    need(out, "out");
    *out = homdim::predicted_count_log(m->ctx, ints(alpha, k), t);
  });
}

hd_status hd_gaussian_term_log(const hd_model* m, const int64_t* alpha, size_t k, double t,
                               double* out) {
  return guard([&] {
    need(m, "model");
    need(alpha, "alpha");
    need(out, "out");
    *out = homdim::gaussian_term_log(m->ctx, ints(alpha, k), t);
  });
}

hd_status hd_gaussian_sum(const hd_model* m, const hd_set* s, double t, double r, double* out) {
  return guard([&] {
    need(m, "model");
    need(s, "set");
    need(out, "out");
    *out = homdim::gaussian_sum(m->ctx, s->set, t, r);
  });
}

hd_status hd_predicted_D(const hd_model* m, const hd_set* s, double t, double eta, double* out) {
  return guard([&] {
    need(m, "model");
    need(s, "set");
    need(out, "out");
    *out = homdim::predicted_D(m->ctx, s->set, t, eta);
  });
}

hd_status hd_tail_integral(size_t k, double sigma, double eta, double t, double* numeric,
                           double* bound, double* log_numeric, double* log_bound) {
  return guard([&] {
    const auto ti = homdim::tail_integral(k, sigma, eta, t);
    if (numeric) *numeric = ti.numeric;
    if (bound) *bound = ti.bound;
    if (log_numeric) *log_numeric = ti.log_numeric;
    if (log_bound) *log_bound = ti.log_bound;
  });
}

// ---- lattice ----

hd_status hd_norm_create(const double* form, size_t k, hd_norm** out) {
  return guard([&] {
    need(form, "form");
    need(out, "out");
    if (k == 0) throw homdim::InputError("norm dimension must be positive");
    const auto kk = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd m(kk, kk);
    for (Eigen::Index i = 0; i < kk; ++i)
      for (Eigen::Index j = 0; j < kk; ++j) m(i, j) = form[i * kk + j];
    *out = new hd_norm{homdim::QuadraticNorm(m)};
  });
}

hd_status hd_norm_identity(size_t k, hd_norm** out) {
  return guard([&] {
    need(out, "out");
    if (k == 0) throw homdim::InputError("norm dimension must be positive");
    *out = new hd_norm{homdim::QuadraticNorm::identity(k)};
  });
}

void hd_norm_free(hd_norm* n) { delete n; }
size_t hd_norm_rank(const hd_norm* n) { return n ? n->norm.rank() : 0; }

hd_status hd_norm_eval(const hd_norm* n, const double* v, size_t k, double* out) {
  return guard([&] {
    need(n, "norm");
    need(v, "v");
    need(out, "out");
    *out = homdim::norm(n->norm, reals(v, k));
  });
}

hd_status hd_fundamental_floor(const double* rho, size_t k, int64_t* out) {
  return guard([&] {
    need(rho, "rho");
    need(out, "out");
    const auto f = homdim::fundamental_floor(reals(rho, k));
    std::copy(f.begin(), f.end(), out);
  });
}

hd_status hd_set_parse(const char* text, size_t k, hd_set** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new hd_set{homdim::make_set(homdim::parse_set(text), k)};
  });
}

void hd_set_free(hd_set* s) { delete s; }
size_t hd_set_rank(const hd_set* s) { return s ? s->set.rank() : 0; }

hd_status hd_set_describe(const hd_set* s, char** out) {
  return guard([&] {
    need(s, "set");
    need(out, "out");
    put_string(out, s->set.describe());
  });
}

hd_status hd_set_declared_delta(const hd_set* s, int* has_delta, double* out) {
  return guard([&] {
    need(s, "set");
    const auto d = s->set.declared_delta();
    if (has_delta) *has_delta = d ? 1 : 0;
    if (out) *out = d.value_or(0.0);
  });
}

hd_status hd_set_contains(const hd_set* s, const int64_t* alpha, size_t k, int* out) {
  return guard([&] {
    need(s, "set");
    need(alpha, "alpha");
    need(out, "out");
    need_rank(k, s->set.rank(), "alpha");
    *out = s->set.contains(ints(alpha, k)) ? 1 : 0;
  });
}

hd_status hd_count_ball(const hd_set* s, const hd_norm* n, double r, uint64_t* out) {
  return guard([&] {
    need(s, "set");
    need(n, "norm");
    need(out, "out");
    *out = homdim::count_ball(s->set, n->norm, r);
  });
}

hd_status hd_kappa(const hd_set* s, const hd_norm* n, double r, double delta, double* out) {
  return guard([&] {
    need(s, "set");
    need(n, "norm");
    need(out, "out");
    *out = homdim::kappa(s->set, n->norm, r, delta);
  });
}

hd_status hd_estimate_dimension(const hd_set* s, const hd_norm* n, const double* radii, size_t m,
                                double* delta_hat, double* residual, double* r_lo, double* r_hi) {
  return guard([&] {
    need(s, "set");
    need(n, "norm");
    need(radii, "radii");
    const auto e = homdim::estimate_dimension(s->set, n->norm, reals(radii, m));
    if (delta_hat) *delta_hat = e.delta_hat;
    if (residual) *residual = e.residual;
    if (r_lo) *r_lo = e.r_lo;
    if (r_hi) *r_hi = e.r_hi;
  });
}

hd_status hd_ball_csv(const hd_set* s, const hd_norm* n, double r, char** out) {
  return guard([&] {
    need(s, "set");
    need(n, "norm");
    need(out, "out");
    const auto k = s->set.rank();
    std::string csv;
    for (std::size_t i = 1; i <= k; ++i) csv += "alpha_" + std::to_string(i) + ",";
    csv += "norm\n";
    for (const auto& a : s->set.enumerate_ball(n->norm, r)) {
      for (auto v : a) csv += homdim::format_int(v) + ",";
      csv += homdim::format_double(n->norm.norm(std::span<const std::int64_t>(a))) + "\n";
    }
    put_string(out, csv);
  });
}

// ---- config and experiments ----

hd_status hd_config_load(const char* path, const char* const* overrides, size_t n,
                         hd_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new hd_config{homdim::load_config(path, override_list(overrides, n))};
  });
}

hd_status hd_config_parse(const char* text, const char* base_dir, const char* const* overrides,
                          size_t n, hd_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new hd_config{
        homdim::parse_config(text, base_dir ? base_dir : "", override_list(overrides, n))};
  });
}

void hd_config_free(hd_config* c) { delete c; }

hd_status hd_config_serialize(const hd_config* c, char** out) {
  return guard([&] {
    need(c, "config");
    need(out, "out");
    put_string(out, homdim::serialize_config(c->config));
  });
}

hd_status hd_config_equal(const hd_config* a, const hd_config* b, int* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = a->config == b->config ? 1 : 0;
  });
}

hd_status hd_config_flow(const hd_config* c, hd_flow** out) {
  return guard([&] {
    need(c, "config");
    need(out, "out");
    *out = new hd_flow{homdim::SymbolicFlow(c->config.flow)};
  });
}

hd_status hd_config_set(const hd_config* c, hd_set** out) {
  return guard([&] {
    need(c, "config");
    need(out, "out");
    *out = new hd_set{homdim::make_set(c->config.set, c->config.flow.k)};
  });
}

hd_status hd_config_model(const hd_config* c, hd_model** out) {
  return guard([&] {
    need(c, "config");
    need(out, "out");
    homdim::SymbolicFlow flow(c->config.flow);
    *out = new hd_model{homdim::AsymptoticContext(homdim::PressureModel::build(
        flow, c->config.enforce_vanishing_winding, {}, c->config.winding_tol))};
  });
}

hd_status hd_config_dimension(const hd_config* c, double* delta_hat, double* residual,
                              char** report) {
  return guard([&] {
    need(c, "config");
    const auto& cfg = c->config;
    const auto set = homdim::make_set(cfg.set, cfg.flow.k);
    const auto q = dimension_norm(cfg);
    const auto grid = homdim::log_grid(cfg.dimension.r_min, cfg.dimension.r_max, cfg.dimension.points);
    const auto e = homdim::estimate_dimension(set, q, grid);
    if (delta_hat) *delta_hat = e.delta_hat;
    if (residual) *residual = e.residual;
    if (report) {
      using homdim::format_double;
      const auto d = set.declared_delta();
      std::ostringstream s;
      s << "set: " << set.describe() << "\n";
      s << "norm: " << cfg.dimension.norm << "\n";
      s << "declared_delta: " << (d ? format_double(*d) : "NA") << "\n";
      s << "delta_hat: " << format_double(e.delta_hat) << "\n";
      s << "residual: " << format_double(e.residual) << "\n";
      s << "r_range: " << format_double(e.r_lo) << " " << format_double(e.r_hi) << "\n";
      s << "points_used: " << e.points_used << "\n";
      put_string(report, s.str());
    }
  });
}

hd_status hd_experiment_run(const hd_config* c, const char* output_path, char** report) {
  return guard([&] {
    need(c, "config");
    auto cfg = c->config;
    if (output_path && *output_path) cfg.output = output_path;
    const auto text = homdim::run_experiment(cfg);
    put_string(report, text);
  });
}

hd_status hd_experiment_lemmas(const hd_config* c, int* all_pass, char** report) {
  return guard([&] {
    need(c, "config");
    homdim::Experiment exp(c->config);
    const auto rep = homdim::lemma_checks(exp);
    if (all_pass) *all_pass = rep.all_pass() ? 1 : 0;
    put_string(report, rep.to_text());
  });
}

hd_status hd_experiment_density(const hd_config* c, char** csv) {
  return guard([&] {
    need(c, "config");
    need(csv, "csv");
    homdim::Experiment exp(c->config);
    std::string s = "T,D\n";
    for (const auto& [t, d] : homdim::density_check(exp.histogram(), exp.set(), c->config.t_grid))
      s += homdim::format_double(t) + "," + homdim::format_double(d) + "\n";
    put_string(csv, s);
  });
}

}  // extern "C"
