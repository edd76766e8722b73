// homdim command-line front end. Talks to the library only through the C API.
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homdim/homdim.h"

namespace {

struct Failure {
  hd_status status;
  std::string message;
};

void check(hd_status s) {
  if (s != HD_OK) throw Failure{s, hd_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Flow = std::unique_ptr<hd_flow, Deleter<hd_flow, hd_flow_free>>;
using Hist = std::unique_ptr<hd_histogram, Deleter<hd_histogram, hd_histogram_free>>;
using Model = std::unique_ptr<hd_model, Deleter<hd_model, hd_model_free>>;
using Set = std::unique_ptr<hd_set, Deleter<hd_set, hd_set_free>>;
using Norm = std::unique_ptr<hd_norm, Deleter<hd_norm, hd_norm_free>>;
using Config = std::unique_ptr<hd_config, Deleter<hd_config, hd_config_free>>;

std::string take(char* s) {
  std::string out = s ? s : "";
  hd_string_free(s);
  return out;
}

std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) throw Failure{HD_ERR_INPUT, std::string("empty entry in ") + what};
    item = item.substr(b, e - b + 1);
    T v{};
    auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size())
      throw Failure{HD_ERR_INPUT, std::string("cannot parse '") + item + "' in " + what};
    out.push_back(v);
  }
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Failure{HD_ERR_IO, "cannot open '" + path + "' for writing"};
  f << text;
  if (!f) throw Failure{HD_ERR_IO, "failed writing '" + path + "'"};
}

// Options shared by subcommands that need a flow or a config.
struct Source {
  std::string model;
  std::string config;
  std::vector<std::string> overrides;

  void attach(CLI::App* app, bool with_config = true) {
    app->add_option("--model,-m", model, "builtin model name or flow file");
    if (with_config) {
      app->add_option("--config,-c", config, "experiment config file (YAML)");
      app->add_option("--set", overrides, "config override key=value (repeatable)");
    }
  }

  Config load_config() const {
    if (config.empty()) throw Failure{HD_ERR_INPUT, "--config is required"};
    std::vector<std::string> ov = overrides;
    if (!model.empty()) {
      char* names = nullptr;
      check(hd_builtin_names(&names));
      const auto list = "\n" + take(names);
      if (list.find("\n" + model + "\n") != std::string::npos)
        ov.insert(ov.begin(), "flow={model: " + model + "}");
      else
        ov.insert(ov.begin(), "flow={file: \"" + std::filesystem::absolute(model).string() + "\"}");
    }
    std::vector<const char*> ptrs;
    for (const auto& o : ov) ptrs.push_back(o.c_str());
    hd_config* c = nullptr;
    check(hd_config_load(config.c_str(), ptrs.data(), ptrs.size(), &c));
    return Config(c);
  }

  Flow load_flow() const {
    hd_flow* f = nullptr;
    if (!model.empty()) {
      check(hd_flow_resolve(model.c_str(), &f));
      return Flow(f);
    }
    if (!config.empty()) {
      auto c = load_config();
      check(hd_config_flow(c.get(), &f));
      return Flow(f);
    }
    throw Failure{HD_ERR_INPUT, "one of --model or --config is required"};
  }
};

std::string matrix_text(const std::vector<double>& m, std::size_t k) {
  std::string out = "[";
  for (std::size_t i = 0; i < k; ++i) {
    out += i ? ", [" : "[";
    for (std::size_t j = 0; j < k; ++j) out += (j ? ", " : "") + num(m[i * k + j]);
    out += "]";
  }
  return out + "]";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic orbit counting in homology classes for symbolic flows"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hd_version()));

  // model-validate
  Source mv_src;
  auto* mv = app.add_subcommand("model-validate", "check irreducibility and aperiodicity of a flow");
  mv_src.attach(mv);

  // orbits
  Source orb_src;
  double orb_t = 0.0;
  std::size_t orb_budget = 40, orb_walks = 0;
  unsigned orb_threads = 1;
  std::string orb_out;
  auto* orb = app.add_subcommand("orbits", "enumerate primitive periodic orbits up to length T");
  orb_src.attach(orb);
  orb->add_option("--T", orb_t, "length cutoff");
  orb->add_option("--budget", orb_budget, "maximum word length")->capture_default_str();
  orb->add_option("--threads", orb_threads, "worker threads (0 = all cores)")->capture_default_str();
  orb->add_option("--walks", orb_walks, "print closed-walk counts of this word length instead");
  orb->add_option("--output,-o", orb_out, "CSV output path (default stdout)");

  // pressure
  auto* pr = app.add_subcommand("pressure", "pressure function and model constants");
  pr->require_subcommand(1);
  Source pe_src;
  std::vector<std::string> pe_xi;
  std::string pe_out;
  auto* pe = pr->add_subcommand("eval", "print xi, p(xi), grad p(xi) as CSV");
  pe_src.attach(pe);
  pe->add_option("--xi", pe_xi, "comma-separated point (repeatable)")->required();
  pe->add_option("--output,-o", pe_out, "CSV output path (default stdout)");
  Source pm_src;
  bool pm_enforce = false;
  double pm_tol = 1e-6;
  auto* pm = pr->add_subcommand("model", "print h, sigma, the norm form and the winding cycle");
  pm_src.attach(pm);
  pm->add_flag("--enforce-winding", pm_enforce, "fail unless the winding cycle vanishes");
  pm->add_option("--winding-tol", pm_tol, "tolerance for the winding check")->capture_default_str();

  // dimension
  auto* dim = app.add_subcommand("dimension", "lattice-set counting and mass dimension");
  dim->require_subcommand(1);
  Source de_src;
  std::string de_lattice;
  std::size_t de_k = 1, de_points = 25;
  double de_rmin = 10.0, de_rmax = 1e6;
  std::string de_norm = "identity";
  auto* de = dim->add_subcommand("estimate", "fit the discrete mass dimension of a set");
  de_src.attach(de);
  de->add_option("--lattice", de_lattice, "set spec in YAML, e.g. '{kind: power, q: 2}'");
  de->add_option("--k", de_k, "ambient dimension when no model is given")->capture_default_str();
  de->add_option("--r-min", de_rmin, "smallest radius")->capture_default_str();
  de->add_option("--r-max", de_rmax, "largest radius")->capture_default_str();
  de->add_option("--points", de_points, "number of log-spaced radii")->capture_default_str();
  de->add_option("--norm", de_norm, "identity or model")->capture_default_str();
  Source db_src;
  std::string db_lattice, db_out, db_norm = "identity";
  std::size_t db_k = 1;
  double db_r = 0.0;
  auto* db = dim->add_subcommand("ball", "list set members in a norm ball as CSV");
  db_src.attach(db, false);
  db->add_option("--lattice", db_lattice, "set spec in YAML")->required();
  db->add_option("--k", db_k, "ambient dimension when no model is given")->capture_default_str();
  db->add_option("--r", db_r, "radius")->required();
  db->add_option("--norm", db_norm, "identity or model")->capture_default_str();
  db->add_option("--output,-o", db_out, "CSV output path (default stdout)");

  // predict
  Source pd_src;
  std::vector<double> pd_t;
  std::vector<std::string> pd_alpha;
  std::string pd_out;
  auto* pd = app.add_subcommand("predict", "predicted orbit counts and Gaussian terms");
  pd_src.attach(pd);
  pd->add_option("--T", pd_t, "lengths (repeatable)")->required();
  pd->add_option("--alpha", pd_alpha, "comma-separated class (repeatable; default 0)");
  pd->add_option("--output,-o", pd_out, "CSV output path (default stdout)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "theorem and lemma experiments from a config");
  ex->require_subcommand(1);
  Source er_src;
  std::string er_out;
  auto* er = ex->add_subcommand("run", "write the report CSV");
  er_src.attach(er);
  er->add_option("--output,-o", er_out, "report path (overrides experiment.output)");
  Source el_src;
  auto* el = ex->add_subcommand("lemmas", "run the lemma-level checks");
  el_src.attach(el);
  Source ed_src;
  auto* ed = ex->add_subcommand("density", "print D(T, A) over the enumeration grid");
  ed_src.attach(ed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*mv) {
      auto f = mv_src.load_flow();
      int irr = 0, ap = 0;
      size_t period = 0;
      double rmin = 0.0;
      check(hd_flow_validate(f.get(), &irr, &ap, &period, &rmin));
      std::cout << "k: " << hd_flow_rank(f.get()) << "\n"
                << "states: " << hd_flow_num_states(f.get()) << "\n"
                << "edges: " << hd_flow_num_edges(f.get()) << "\n"
                << "irreducible: " << (irr ? "true" : "false") << "\n"
                << "aperiodic: " << (ap ? "true" : "false") << "\n"
                << "period: " << period << "\n"
                << "r_min: " << num(rmin) << "\n";
      if (!irr) {
        std::cerr << "error: flow is not irreducible\n";
        return hd_exit_code(HD_ERR_INPUT);
      }
    } else if (*orb) {
      auto f = orb_src.load_flow();
      if (orb_walks > 0) {
        char* csv = nullptr;
        check(hd_transfer_count_csv(f.get(), orb_walks, &csv));
        emit(take(csv), orb_out);
      } else {
        if (!(orb_t > 0.0)) throw Failure{HD_ERR_INPUT, "--T must be positive"};
        hd_histogram* h = nullptr;
        check(hd_orbits_enumerate(f.get(), orb_t, orb_budget, orb_threads, &h));
        Hist hist(h);
        char* csv = nullptr;
        check(hd_histogram_csv(hist.get(), &csv));
        emit(take(csv), orb_out);
      }
    } else if (*pe) {
      auto f = pe_src.load_flow();
      const auto k = hd_flow_rank(f.get());
      std::string csv;
      for (std::size_t i = 1; i <= k; ++i) csv += "xi_" + std::to_string(i) + ",";
      csv += "p";
      for (std::size_t i = 1; i <= k; ++i) csv += ",grad_" + std::to_string(i);
      csv += "\n";
      for (const auto& text : pe_xi) {
        const auto xi = parse_list<double>(text, "--xi");
        if (xi.size() != k)
          throw Failure{HD_ERR_INPUT, "--xi '" + text + "' has " + std::to_string(xi.size()) +
                                          " entries, model has k = " + std::to_string(k)};
        double p = 0.0;
        std::vector<double> g(k);
        check(hd_pressure(f.get(), xi.data(), k, &p));
        check(hd_grad_pressure(f.get(), xi.data(), k, g.data()));
        for (double v : xi) csv += num(v) + ",";
        csv += num(p);
        for (double v : g) csv += "," + num(v);
        csv += "\n";
      }
      emit(csv, pe_out);
    } else if (*pm) {
      Model m;
      if (!pm_src.config.empty() && pm_src.model.empty()) {
        auto c = pm_src.load_config();
        hd_model* raw = nullptr;
        check(hd_config_model(c.get(), &raw));
        m.reset(raw);
      } else {
        auto f = pm_src.load_flow();
        hd_model* raw = nullptr;
        check(hd_model_build(f.get(), pm_enforce ? 1 : 0, pm_tol, &raw));
        m.reset(raw);
      }
      const auto k = hd_model_rank(m.get());
      std::vector<double> hess(k * k), form(k * k), w(k);
      hd_model_hessian0(m.get(), hess.data());
      hd_model_hform(m.get(), form.data());
      hd_model_winding(m.get(), w.data());
      std::cout << "k: " << k << "\n"
                << "h: " << num(hd_model_entropy(m.get())) << "\n"
                << "sigma: " << num(hd_model_sigma(m.get())) << "\n"
                << "hessian0: " << matrix_text(hess, k) << "\n"
                << "H: " << matrix_text(form, k) << "\n"
                << "winding: [";
      for (std::size_t i = 0; i < k; ++i) std::cout << (i ? ", " : "") << num(w[i]);
      std::cout << "]\n"
                << "vanishing_winding: " << (hd_model_winding_vanishes(m.get()) ? "true" : "false")
                << "\n";
    } else if (*de) {
      if (!de_src.config.empty() && de_lattice.empty()) {
        auto c = de_src.load_config();
        char* report = nullptr;
        check(hd_config_dimension(c.get(), nullptr, nullptr, &report));
        std::cout << take(report);
      } else {
        if (de_lattice.empty()) throw Failure{HD_ERR_INPUT, "--lattice or --config is required"};
        std::size_t k = de_k;
        Norm q;
        hd_norm* raw = nullptr;
        if (!de_src.model.empty()) {
          auto f = de_src.load_flow();
          k = hd_flow_rank(f.get());
          if (de_norm == "model") {
            hd_model* m = nullptr;
            check(hd_model_build(f.get(), 0, 1e-6, &m));
            Model mm(m);
            check(hd_model_norm(mm.get(), &raw));
          }
        } else if (de_norm == "model") {
          throw Failure{HD_ERR_INPUT, "--norm model needs --model"};
        }
        if (!raw) check(hd_norm_identity(k, &raw));
        q.reset(raw);
        hd_set* s = nullptr;
        check(hd_set_parse(de_lattice.c_str(), k, &s));
        Set set(s);
        if (de_points < 3) throw Failure{HD_ERR_INPUT, "--points must be >= 3"};
        if (!(de_rmin > 0.0 && de_rmax > de_rmin))
          throw Failure{HD_ERR_INPUT, "need 0 < --r-min < --r-max"};
        std::vector<double> radii(de_points);
        for (std::size_t i = 0; i < de_points; ++i)
          radii[i] = std::exp(std::log(de_rmin) + (std::log(de_rmax) - std::log(de_rmin)) *
                                                      static_cast<double>(i) /
                                                      static_cast<double>(de_points - 1));
        radii.front() = de_rmin;
        radii.back() = de_rmax;
        double dh = 0, res = 0, lo = 0, hi = 0;
        check(hd_estimate_dimension(set.get(), q.get(), radii.data(), radii.size(), &dh, &res, &lo, &hi));
        int has = 0;
        double decl = 0.0;
        check(hd_set_declared_delta(set.get(), &has, &decl));
        char* desc = nullptr;
        check(hd_set_describe(set.get(), &desc));
        std::cout << "set: " << take(desc) << "\n"
                  << "norm: " << de_norm << "\n"
                  << "declared_delta: " << (has ? num(decl) : "NA") << "\n"
                  << "delta_hat: " << num(dh) << "\n"
                  << "residual: " << num(res) << "\n"
                  << "r_range: " << num(lo) << " " << num(hi) << "\n";
      }
    } else if (*db) {
      std::size_t k = db_k;
      hd_norm* raw = nullptr;
      if (!db_src.model.empty()) {
        auto f = db_src.load_flow();
        k = hd_flow_rank(f.get());
        if (db_norm == "model") {
          hd_model* m = nullptr;
          check(hd_model_build(f.get(), 0, 1e-6, &m));
          Model mm(m);
          check(hd_model_norm(mm.get(), &raw));
        }
      } else if (db_norm == "model") {
        throw Failure{HD_ERR_INPUT, "--norm model needs --model"};
      }
      if (!raw) check(hd_norm_identity(k, &raw));
      Norm q(raw);
      hd_set* s = nullptr;
      check(hd_set_parse(db_lattice.c_str(), k, &s));
      Set set(s);
      char* csv = nullptr;
      check(hd_ball_csv(set.get(), q.get(), db_r, &csv));
      emit(take(csv), db_out);
    } else if (*pd) {
      Model m;
      hd_model* raw = nullptr;
      if (!pd_src.config.empty() && pd_src.model.empty()) {
        auto c = pd_src.load_config();
        check(hd_config_model(c.get(), &raw));
      } else {
        auto f = pd_src.load_flow();
        check(hd_model_build(f.get(), 0, 1e-6, &raw));
      }
      m.reset(raw);
      const auto k = hd_model_rank(m.get());
      std::vector<std::vector<int64_t>> alphas;
      for (const auto& a : pd_alpha) {
        auto v = parse_list<int64_t>(a, "--alpha");
        if (v.size() != k)
          throw Failure{HD_ERR_INPUT, "--alpha '" + a + "' has " + std::to_string(v.size()) +
                                          " entries, model has k = " + std::to_string(k)};
        alphas.push_back(std::move(v));
      }
      if (alphas.empty()) alphas.emplace_back(k, 0);
      std::string csv = "T";
      for (std::size_t i = 1; i <= k; ++i) csv += ",alpha_" + std::to_string(i);
      csv += ",predicted_count_log,gaussian_term_log\n";
      for (double t : pd_t)
        for (const auto& a : alphas) {
          double pc = 0.0, gt = 0.0;
          check(hd_predicted_count_log(m.get(), a.data(), k, t, &pc));
          check(hd_gaussian_term_log(m.get(), a.data(), k, t, &gt));
          csv += num(t);
          for (auto v : a) csv += "," + std::to_string(v);
          csv += "," + num(pc) + "," + num(gt) + "\n";
        }
      emit(csv, pd_out);
    } else if (*er) {
      auto c = er_src.load_config();
      char* report = nullptr;
      check(hd_experiment_run(c.get(), er_out.c_str(), &report));
      const auto text = take(report);
      char* ser = nullptr;
      check(hd_config_serialize(c.get(), &ser));
      const auto cfg = take(ser);
      // When the config names no output the report goes to stdout.
      if (er_out.empty() && cfg.find("output: \"\"") != std::string::npos) std::cout << text;
    } else if (*el) {
      auto c = el_src.load_config();
      int pass = 0;
      char* report = nullptr;
      check(hd_experiment_lemmas(c.get(), &pass, &report));
      std::cout << take(report);
      std::cout << "overall: " << (pass ? "PASS" : "FAIL") << "\n";
    } else if (*ed) {
      auto c = ed_src.load_config();
      char* csv = nullptr;
      check(hd_experiment_density(c.get(), &csv));
      std::cout << take(csv);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << hd_status_name(f.status) << ": " << f.message << "\n";
    return hd_exit_code(f.status);
  }
  return 0;
}
