#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace homdim {

using IntVec = std::vector<std::int64_t>;
using RealVec = std::vector<double>;

// Positive-definite form H on R^k; ||v|| = <v, Hv>^{1/2}.
class QuadraticNorm {
 public:
  explicit QuadraticNorm(Eigen::MatrixXd form);
  static QuadraticNorm identity(std::size_t k);

  std::size_t rank() const { return static_cast<std::size_t>(form_.rows()); }
  const Eigen::MatrixXd& form() const { return form_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  double min_eigenvalue() const { return lambda_min_; }

  // <v, Hv>, summed in a fixed order so that every caller sees the same
  // rounding for the same lattice point.
  double quad(std::span<const double> v) const;
  double quad(std::span<const std::int64_t> v) const;

  double norm(std::span<const double> v) const;
  double norm(std::span<const std::int64_t> v) const;

  // Ball membership used by every counting routine: quad(alpha) <= r*r.
  bool in_ball(std::span<const std::int64_t> alpha, double r) const {
    return quad(alpha) <= r * r;
  }

  // Largest |x_i| over the real ellipsoid ||x|| <= r.
  double axis_extent(std::size_t i, double r) const;

  // Axis-aligned box half-width from the smallest eigenvalue.
  double box_extent(double r) const;

 private:
  Eigen::MatrixXd form_;
  Eigen::MatrixXd inverse_;
  double lambda_min_ = 0.0;
};

// Componentwise floor; rho - floor(rho) lies in [0,1)^k.
IntVec fundamental_floor(std::span<const double> rho);

// A subset of Z described by a base kind and an integer shift.
class Factor {
 public:
  enum class Kind { Full, Power, Digit, Residue, Values };

  static Factor full();
  static Factor power(int q);
  static Factor digit(int base, std::vector<int> digits, bool symmetric);
  static Factor residue(std::int64_t modulus, std::int64_t residue);
  static Factor values(std::vector<std::int64_t> values);

  Factor shifted(std::int64_t offset) const;

  Kind kind() const { return kind_; }
  bool dense() const { return kind_ == Kind::Full; }
  bool contains(std::int64_t x) const;
  // Sorted members in [lo, hi]. Not meaningful for Full over huge ranges.
  std::vector<std::int64_t> members(std::int64_t lo, std::int64_t hi) const;
  std::uint64_t count(std::int64_t lo, std::int64_t hi) const;
  // Mass dimension of the factor; used to order the ball walk (densest innermost).
  double delta() const;
  std::string describe() const;

 private:
  bool base_contains(std::int64_t x) const;
  std::vector<std::int64_t> base_members(std::int64_t lo, std::int64_t hi) const;
  std::uint64_t base_count(std::int64_t lo, std::int64_t hi) const;
  std::uint64_t digit_count_nonneg(std::int64_t lo, std::int64_t hi) const;
  std::uint64_t digit_count_leq(std::int64_t n) const;

  Kind kind_ = Kind::Full;
  int q_ = 0;
  int base_ = 0;
  std::vector<int> digits_;
  bool symmetric_ = true;
  std::int64_t modulus_ = 1;
  std::int64_t residue_ = 0;
  std::vector<std::int64_t> values_;
  std::int64_t offset_ = 0;
};

class LatticeSet {
 public:
  static LatticeSet product(std::vector<Factor> factors);
  static LatticeSet finite(std::size_t k, std::vector<IntVec> points);
  static LatticeSet complement(const LatticeSet& inner);

  std::size_t rank() const;
  bool contains(std::span<const std::int64_t> alpha) const;

  // Members with ||alpha|| <= r in lexicographic order.
  std::vector<IntVec> enumerate_ball(const QuadraticNorm& q, double r) const;
  std::uint64_t count_ball(const QuadraticNorm& q, double r) const;

  std::optional<double> declared_delta() const;
  LatticeSet with_declared_delta(std::optional<double> delta) const;
  LatticeSet shifted(std::span<const std::int64_t> offset) const;
  bool is_full() const;
  std::string describe() const;

  struct Impl;

 private:
  explicit LatticeSet(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// Tagged set description, as written in config files.
struct SetSpec {
  std::string kind;  // full finite single power digit residue product slab complement
  int q = 0;
  int base = 0;
  std::vector<int> digits;
  bool symmetric = true;
  std::int64_t modulus = 0;
  std::int64_t residue = 0;
  int j = 0;
  IntVec point;
  std::vector<IntVec> points;
  IntVec shift;
  std::vector<SetSpec> factors;  // product factors, or the single complement operand
  std::optional<double> delta;   // explicit override of the declared dimension

  bool operator==(const SetSpec&) const = default;
};

LatticeSet make_set(const SetSpec& spec, std::size_t k);

struct DimensionEstimate {
  double delta_hat = 0.0;
  double residual = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t points_used = 0;
};

double norm(const QuadraticNorm& q, std::span<const double> v);
std::uint64_t count_ball(const LatticeSet& a, const QuadraticNorm& q, double r);
double kappa(const LatticeSet& a, const QuadraticNorm& q, double r, double delta);
DimensionEstimate estimate_dimension(const LatticeSet& a, const QuadraticNorm& q,
                                     std::span<const double> r_grid);

// n log-spaced radii from lo to hi inclusive.
RealVec log_grid(double lo, double hi, std::size_t n);

// Volume of the Euclidean unit ball in R^k.
double unit_ball_volume(std::size_t k);

}  // namespace homdim
