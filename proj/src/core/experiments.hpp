#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asymptotics.hpp"
#include "lattice.hpp"
#include "symbolic_model.hpp"

namespace homdim {

struct DimensionConfig {
  double r_min = 10.0;
  double r_max = 1e6;
  std::size_t points = 25;
  std::string norm = "identity";  // identity | model | matrix
  std::vector<RealVec> matrix;

  bool operator==(const DimensionConfig&) const = default;
};

struct ExperimentConfig {
  std::string flow_source;  // where the flow came from; informational only
  FlowSpec flow;
  SetSpec set;
  RealVec t_grid;          // exact enumeration
  RealVec predict_t_grid;  // prediction-only rows
  double eta = 2.0;
  bool enforce_vanishing_winding = true;
  double winding_tol = 1e-6;
  std::size_t budget = 40;
  unsigned threads = 1;
  std::string output;
  DimensionConfig dimension;

  bool operator==(const ExperimentConfig& o) const {
    return flow == o.flow && set == o.set && t_grid == o.t_grid &&
           predict_t_grid == o.predict_t_grid && eta == o.eta &&
           enforce_vanishing_winding == o.enforce_vanishing_winding &&
           winding_tol == o.winding_tol && budget == o.budget && threads == o.threads &&
           output == o.output && dimension == o.dimension;
  }
};

// Range checks with field paths, e.g. "experiment.eta: must be positive".
void validate_config(const ExperimentConfig& config);

struct ReportRow {
  double t = 0.0;
  bool prediction_only = false;
  std::uint64_t n_total = 0;
  std::uint64_t n_in_a = 0;
  double empirical_D = 0.0;
  double predicted_D = 0.0;
  std::optional<double> log_ratio_empirical;  // empty when empirical_D = 0
  std::optional<double> log_ratio_predicted;  // empty when predicted_D = 0
  std::optional<double> target;
};

// Everything an experiment needs, built once from a config.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const SymbolicFlow& flow() const { return flow_; }
  const AsymptoticContext& context() const { return ctx_; }
  const LatticeSet& set() const { return set_; }
  std::optional<double> delta() const { return set_.declared_delta(); }
  std::optional<double> target() const;
  std::vector<std::string> warnings() const;

  // Histogram complete up to max(T_grid); built on first use.
  const OrbitHistogram& histogram() const;

 private:
  ExperimentConfig config_;
  SymbolicFlow flow_;
  AsymptoticContext ctx_;
  LatticeSet set_;
  mutable std::optional<OrbitHistogram> hist_;
};

double empirical_D(const OrbitHistogram& hist, const LatticeSet& a, double t);

std::vector<ReportRow> theorem_curve(const Experiment& exp);

std::vector<std::pair<double, double>> density_check(const OrbitHistogram& hist,
                                                     const LatticeSet& a, const RealVec& t_grid);

// Least-squares slope of log D against log T over rows with D > 0.
std::optional<double> fit_slope(const std::vector<std::pair<double, double>>& points);

struct CurveSlopes {
  std::optional<double> empirical_all;
  std::optional<double> empirical_top_half;
  std::optional<double> predicted;  // prediction-only rows (or all rows if there are none)
};
CurveSlopes curve_slopes(const std::vector<ReportRow>& rows);

struct LemmaPoint {
  double t = 0.0;
  double value = 0.0;
};

struct LemmaCheck {
  std::string name;
  bool evaluated = false;
  bool pass = false;
  std::string detail;
  std::vector<LemmaPoint> series;
};

struct LemmaReport {
  LemmaCheck approximation;  // Gaussian replacement residual decreases
  LemmaCheck gaussian_bound; // Gaussian sum below eta^delta (2 pi)^{-k/2} sigma^{-k}
  LemmaCheck tail;           // scaled tail over the large-norm classes stays bounded
  LemmaCheck lower_bound;    // e^{-2} lower bound holds termwise
  bool all_pass() const;
  std::string to_text() const;
};

LemmaReport lemma_checks(const Experiment& exp);

// Deterministic CSV report with a '#' header block.
std::string render_report(const Experiment& exp, const std::vector<ReportRow>& rows);
// Builds, runs and (when config.output is set) writes the report; returns its text.
std::string run_experiment(const ExperimentConfig& config);

}  // namespace homdim
