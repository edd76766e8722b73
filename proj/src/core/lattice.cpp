#include "lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <variant>

#include "errors.hpp"

namespace homdim {

// ---------------------------------------------------------------------------
// QuadraticNorm

QuadraticNorm::QuadraticNorm(Eigen::MatrixXd form) : form_(std::move(form)) {
  if (form_.rows() == 0 || form_.rows() != form_.cols())
    throw InputError("quadratic form must be a nonempty square matrix");
  const auto k = form_.rows();
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!std::isfinite(form_(i, j)))
        throw InputError("quadratic form has a non-finite entry");
      if (std::abs(form_(i, j) - form_(j, i)) > 1e-12)
        throw InputError("quadratic form is not symmetric");
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(form_);
  lambda_min_ = eig.eigenvalues().minCoeff();
  if (!(lambda_min_ > 0.0))
    throw InputError("quadratic form is not positive definite (smallest eigenvalue " +
                     std::to_string(lambda_min_) + ")");
  inverse_ = form_.inverse();
}

QuadraticNorm QuadraticNorm::identity(std::size_t k) {
  return QuadraticNorm(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                 static_cast<Eigen::Index>(k)));
}

double QuadraticNorm::quad(std::span<const double> v) const {
  const auto k = static_cast<std::size_t>(form_.rows());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      row += form_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[j];
    s += v[i] * row;
  }
  return s;
}

double QuadraticNorm::quad(std::span<const std::int64_t> v) const {
  const auto k = static_cast<std::size_t>(form_.rows());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      row += form_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
             static_cast<double>(v[j]);
    s += static_cast<double>(v[i]) * row;
  }
  return s;
}

double QuadraticNorm::norm(std::span<const double> v) const {
  return std::sqrt(std::max(0.0, quad(v)));
}

double QuadraticNorm::norm(std::span<const std::int64_t> v) const {
  return std::sqrt(std::max(0.0, quad(v)));
}

double QuadraticNorm::axis_extent(std::size_t i, double r) const {
  const auto ii = static_cast<Eigen::Index>(i);
  return r * std::sqrt(inverse_(ii, ii));
}

double QuadraticNorm::box_extent(double r) const { return r / std::sqrt(lambda_min_); }

double norm(const QuadraticNorm& q, std::span<const double> v) {
  if (v.size() != q.rank())
    throw InputError("norm: vector has dimension " + std::to_string(v.size()) +
                     ", form has dimension " + std::to_string(q.rank()));
  return q.norm(v);
}

IntVec fundamental_floor(std::span<const double> rho) {
  IntVec out(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    out[i] = static_cast<std::int64_t>(std::floor(rho[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Factor

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// m^q, saturating at int64 max.
std::int64_t sat_pow(std::int64_t m, int q) {
  __int128 acc = 1;
  for (int i = 0; i < q; ++i) {
    acc *= m;
    if (acc > std::numeric_limits<std::int64_t>::max())
      return std::numeric_limits<std::int64_t>::max();
  }
  return static_cast<std::int64_t>(acc);
}

// Largest m >= 0 with m^q <= n (n >= 0).
std::int64_t iroot(std::int64_t n, int q) {
  if (n <= 0) return 0;
  if (q == 1) return n;
  auto m = static_cast<std::int64_t>(std::pow(static_cast<double>(n), 1.0 / q));
  while (m > 0 && sat_pow(m, q) > n) --m;
  while (sat_pow(m + 1, q) <= n) ++m;
  return m;
}

}  // namespace

Factor Factor::full() { return Factor{}; }

Factor Factor::power(int q) {
  if (q < 1) throw InputError("power: exponent q must be >= 1, got " + std::to_string(q));
  Factor f;
  f.kind_ = Kind::Power;
  f.q_ = q;
  return f;
}

Factor Factor::digit(int base, std::vector<int> digits, bool symmetric) {
  if (base < 2) throw InputError("digit: base must be >= 2, got " + std::to_string(base));
  if (digits.empty()) throw InputError("digit: digit set is empty");
  std::sort(digits.begin(), digits.end());
  if (std::adjacent_find(digits.begin(), digits.end()) != digits.end())
    throw InputError("digit: repeated digit");
  for (int d : digits)
    if (d < 0 || d >= base)
      throw InputError("digit: digit " + std::to_string(d) + " not in {0.." +
                       std::to_string(base - 1) + "}");
  if (digits.size() == 1 && digits[0] == 0)
    throw InputError("digit: digit set {0} only describes the origin; use single");
  Factor f;
  f.kind_ = Kind::Digit;
  f.base_ = base;
  f.digits_ = std::move(digits);
  f.symmetric_ = symmetric;
  return f;
}

Factor Factor::residue(std::int64_t modulus, std::int64_t residue) {
  if (modulus < 1) throw InputError("residue: modulus must be >= 1");
  Factor f;
  f.kind_ = Kind::Residue;
  f.modulus_ = modulus;
  f.residue_ = ((residue % modulus) + modulus) % modulus;
  return f;
}

Factor Factor::values(std::vector<std::int64_t> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  Factor f;
  f.kind_ = Kind::Values;
  f.values_ = std::move(values);
  return f;
}

Factor Factor::shifted(std::int64_t offset) const {
  Factor f = *this;
  f.offset_ += offset;
  return f;
}

bool Factor::contains(std::int64_t x) const { return base_contains(x - offset_); }

bool Factor::base_contains(std::int64_t x) const {
  switch (kind_) {
    case Kind::Full:
      return true;
    case Kind::Power: {
      if (x == 0) return false;
      const std::int64_t a = x < 0 ? -x : x;
      const std::int64_t m = iroot(a, q_);
      return sat_pow(m, q_) == a;
    }
    case Kind::Digit: {
      if (x < 0) {
        if (!symmetric_) return false;
        x = -x;
      }
      if (x == 0) return digits_.front() == 0;
      while (x > 0) {
        if (!std::binary_search(digits_.begin(), digits_.end(), static_cast<int>(x % base_)))
          return false;
        x /= base_;
      }
      return true;
    }
    case Kind::Residue:
      return ((x % modulus_) + modulus_) % modulus_ == residue_;
    case Kind::Values:
      return std::binary_search(values_.begin(), values_.end(), x);
  }
  return false;
}

std::vector<std::int64_t> Factor::members(std::int64_t lo, std::int64_t hi) const {
  auto out = base_members(lo - offset_, hi - offset_);
  for (auto& v : out) v += offset_;
  return out;
}

std::vector<std::int64_t> Factor::base_members(std::int64_t lo, std::int64_t hi) const {
  std::vector<std::int64_t> out;
  if (lo > hi) return out;
  switch (kind_) {
    case Kind::Full:
      out.resize(static_cast<std::size_t>(hi - lo + 1));
      std::iota(out.begin(), out.end(), lo);
      break;
    case Kind::Power: {
      const std::int64_t top = std::max(lo < 0 ? -lo : lo, hi < 0 ? -hi : hi);
      const std::int64_t mmax = iroot(top, q_);
      for (std::int64_t m = mmax; m >= 1; --m) {
        const std::int64_t v = -sat_pow(m, q_);
        if (v >= lo && v <= hi) out.push_back(v);
      }
      for (std::int64_t m = 1; m <= mmax; ++m) {
        const std::int64_t v = sat_pow(m, q_);
        if (v >= lo && v <= hi) out.push_back(v);
      }
      break;
    }
    case Kind::Digit: {
      const std::int64_t top = std::max(lo < 0 ? -lo : lo, hi < 0 ? -hi : hi);
      std::vector<std::int64_t> nonneg;
      if (digits_.front() == 0) nonneg.push_back(0);
      std::vector<std::int64_t> frontier;
      for (int d : digits_)
        if (d != 0 && d <= top) frontier.push_back(d);
      while (!frontier.empty()) {
        std::vector<std::int64_t> next;
        for (auto v : frontier) {
          nonneg.push_back(v);
          if (v > (top - digits_.front()) / base_) continue;
          for (int d : digits_) {
            const std::int64_t w = v * base_ + d;
            if (w <= top) next.push_back(w);
          }
        }
        frontier = std::move(next);
      }
      for (auto v : nonneg) {
        if (v >= lo && v <= hi) out.push_back(v);
        if (symmetric_ && v != 0 && -v >= lo && -v <= hi) out.push_back(-v);
      }
      std::sort(out.begin(), out.end());
      break;
    }
    case Kind::Residue: {
      std::int64_t first = lo + ((residue_ - lo) % modulus_ + modulus_) % modulus_;
      for (std::int64_t v = first; v <= hi; v += modulus_) out.push_back(v);
      break;
    }
    case Kind::Values: {
      auto a = std::lower_bound(values_.begin(), values_.end(), lo);
      auto b = std::upper_bound(values_.begin(), values_.end(), hi);
      out.assign(a, b);
      break;
    }
  }
  return out;
}

std::uint64_t Factor::count(std::int64_t lo, std::int64_t hi) const {
  return base_count(lo - offset_, hi - offset_);
}

std::uint64_t Factor::digit_count_leq(std::int64_t n) const {
  // Members x in [0, n] whose base-b digits all lie in D (0 counted iff 0 in D).
  if (n < 0) return 0;
  const bool has_zero = digits_.front() == 0;
  std::uint64_t total = has_zero ? 1 : 0;
  if (n == 0) return total;
  std::vector<int> dig;
  for (std::int64_t t = n; t > 0; t /= base_) dig.push_back(static_cast<int>(t % base_));
  const auto len = dig.size();
  const std::uint64_t nd = digits_.size();
  const std::uint64_t nz = nd - (has_zero ? 1 : 0);
  std::vector<std::uint64_t> powd(len + 1, 1);
  for (std::size_t i = 1; i <= len; ++i) powd[i] = powd[i - 1] * nd;
  for (std::size_t l = 1; l < len; ++l) total += nz * powd[l - 1];
  for (std::size_t pos = len; pos-- > 0;) {
    const int top = dig[pos];
    std::uint64_t below = 0;
    for (int d : digits_) {
      if (d >= top) break;
      if (pos == len - 1 && d == 0) continue;
      ++below;
    }
    total += below * powd[pos];
    if (!std::binary_search(digits_.begin(), digits_.end(), top)) return total;
  }
  return total + 1;  // n itself
}

std::uint64_t Factor::digit_count_nonneg(std::int64_t lo, std::int64_t hi) const {
  lo = std::max<std::int64_t>(lo, 0);
  if (hi < lo) return 0;
  return digit_count_leq(hi) - digit_count_leq(lo - 1);
}

std::uint64_t Factor::base_count(std::int64_t lo, std::int64_t hi) const {
  if (lo > hi) return 0;
  switch (kind_) {
    case Kind::Full:
      return static_cast<std::uint64_t>(hi - lo + 1);
    case Kind::Power: {
      auto positive = [&](std::int64_t a, std::int64_t b) -> std::uint64_t {
        a = std::max<std::int64_t>(a, 1);
        if (b < a) return 0;
        return static_cast<std::uint64_t>(iroot(b, q_) - iroot(a - 1, q_));
      };
      return positive(lo, hi) + positive(-hi, -lo);
    }
    case Kind::Digit: {
      std::uint64_t n = digit_count_nonneg(lo, hi);
      if (symmetric_) n += digit_count_nonneg(std::max<std::int64_t>(1, -hi), -lo);
      return n;
    }
    case Kind::Residue:
      return static_cast<std::uint64_t>(floor_div(hi - residue_, modulus_) -
                                        floor_div(lo - 1 - residue_, modulus_));
    case Kind::Values:
      return static_cast<std::uint64_t>(
          std::upper_bound(values_.begin(), values_.end(), hi) -
          std::lower_bound(values_.begin(), values_.end(), lo));
  }
  return 0;
}

double Factor::delta() const {
  switch (kind_) {
    case Kind::Full:
    case Kind::Residue:
      return 1.0;
    case Kind::Power:
      return 1.0 / q_;
    case Kind::Digit:
      return std::log(static_cast<double>(digits_.size())) / std::log(static_cast<double>(base_));
    case Kind::Values:
      return 0.0;
  }
  return 0.0;
}

std::string Factor::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Full:
      os << "Z";
      break;
    case Kind::Power:
      os << "power(" << q_ << ")";
      break;
    case Kind::Digit: {
      os << "digit(" << base_ << ",{";
      for (std::size_t i = 0; i < digits_.size(); ++i) os << (i ? "," : "") << digits_[i];
      os << "}" << (symmetric_ ? ",sym" : "") << ")";
      break;
    }
    case Kind::Residue:
      os << residue_ << "+" << modulus_ << "Z";
      break;
    case Kind::Values: {
      os << "{";
      for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? "," : "") << values_[i];
      os << "}";
      break;
    }
  }
  if (offset_ != 0) os << (offset_ > 0 ? "+" : "") << offset_;
  return os.str();
}

// ---------------------------------------------------------------------------
// LatticeSet

namespace {

struct ProductBody {
  std::vector<Factor> factors;
};
struct FiniteBody {
  std::vector<IntVec> points;  // sorted, unique
};
// Fincke-Pohst walk over the product of per-coordinate factors. The form is
// decomposed as sum_j D_j (y_j + sum_{i>j} L_ij y_i)^2 over permuted
// coordinates; levels are visited from k-1 down to 0 and the innermost level
// yields an exact integer interval, checked against QuadraticNorm::in_ball.
class BallWalk {
 public:
  BallWalk(const std::vector<Factor>& factors, const QuadraticNorm& q, double r)
      : factors_(factors), q_(q), r_(r), k_(factors.size()) {
    perm_.resize(k_);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::stable_sort(perm_.begin(), perm_.end(), [&](std::size_t a, std::size_t b) {
      const auto& fa = factors_[a];
      const auto& fb = factors_[b];
      if (fa.dense() != fb.dense()) return fa.dense();
      return fa.delta() > fb.delta();
    });
    // LDL^T of the permuted form.
    Eigen::MatrixXd a(k_, k_);
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j)
        a(i, j) = q.form()(perm_[i], perm_[j]);
    l_ = Eigen::MatrixXd::Identity(k_, k_);
    d_ = Eigen::VectorXd::Zero(k_);
    for (std::size_t j = 0; j < k_; ++j) {
      double dj = a(j, j);
      for (std::size_t m = 0; m < j; ++m) dj -= l_(j, m) * l_(j, m) * d_(m);
      d_(j) = dj;
      for (std::size_t i = j + 1; i < k_; ++i) {
        double s = a(i, j);
        for (std::size_t m = 0; m < j; ++m) s -= l_(i, m) * l_(j, m) * d_(m);
        l_(i, j) = s / dj;
      }
    }
    lists_.resize(k_);
    for (std::size_t lvl = 0; lvl < k_; ++lvl) {
      const auto& f = factors_[perm_[lvl]];
      if (f.dense()) continue;
      const auto ext = static_cast<std::int64_t>(std::ceil(q.axis_extent(perm_[lvl], r))) + 2;
      lists_[lvl] = f.members(-ext, ext);
    }
    x_.assign(k_, 0);
    y_.assign(k_, 0.0);
  }

  // on_line(x, a, b, inner_coord): x holds the outer coordinates; the
  // innermost coordinate ranges over the integer interval [a, b].
  template <class OnLine>
  void run(OnLine&& on_line) {
    if (r_ < 0) return;
    level(k_ - 1, 0.0, on_line);
  }

  std::size_t inner_coordinate() const { return perm_[0]; }
  const std::vector<std::int64_t>& inner_list() const { return lists_[0]; }

 private:
  double center(std::size_t j) const {
    double c = 0.0;
    for (std::size_t i = j + 1; i < k_; ++i) c -= l_(i, j) * y_[i];
    return c;
  }

  template <class OnLine>
  void level(std::size_t j, double used, OnLine& on_line) {
    const double r2 = r_ * r_;
    const double c = center(j);
    const double rem = r2 - used;
    const double w = std::sqrt(std::max(rem, 0.0) / d_(j));
    const double eps = 1e-9 * (1.0 + std::abs(c) + w);
    const std::size_t coord = perm_[j];
    if (j == 0) {
      if (rem < -1e-9 * (1.0 + r2)) return;
      auto inside = [&](std::int64_t v) {
        x_[coord] = v;
        return q_.in_ball(x_, r_);
      };
      auto a = static_cast<std::int64_t>(std::floor(c - w)) - 1;
      auto b = static_cast<std::int64_t>(std::ceil(c + w)) + 1;
      while (a <= b && !inside(a)) ++a;
      if (a > b) return;
      while (!inside(b)) --b;
      while (inside(a - 1)) --a;
      while (inside(b + 1)) ++b;
      on_line(x_, a, b, coord);
      return;
    }
    const auto lo = static_cast<std::int64_t>(std::ceil(c - w - eps));
    const auto hi = static_cast<std::int64_t>(std::floor(c + w + eps));
    if (lo > hi) return;
    auto visit = [&](std::int64_t v) {
      const double dv = static_cast<double>(v) - c;
      const double u = used + d_(j) * dv * dv;
      if (u > r2 + 1e-9 * (1.0 + r2)) return;
      x_[coord] = v;
      y_[j] = static_cast<double>(v);
      level(j - 1, u, on_line);
    };
    const auto& f = factors_[coord];
    if (f.dense()) {
      for (std::int64_t v = lo; v <= hi; ++v) visit(v);
    } else {
      const auto& list = lists_[j];
      auto it = std::lower_bound(list.begin(), list.end(), lo);
      for (; it != list.end() && *it <= hi; ++it) visit(*it);
    }
    x_[coord] = 0;
    y_[j] = 0.0;
  }

  const std::vector<Factor>& factors_;
  const QuadraticNorm& q_;
  double r_;
  std::size_t k_;
  std::vector<std::size_t> perm_;
  Eigen::MatrixXd l_;
  Eigen::VectorXd d_;
  std::vector<std::vector<std::int64_t>> lists_;
  IntVec x_;
  std::vector<double> y_;
};

std::vector<Factor> full_factors(std::size_t k) { return std::vector<Factor>(k, Factor::full()); }

std::uint64_t product_count(const std::vector<Factor>& factors, const QuadraticNorm& q, double r) {
  BallWalk walk(factors, q, r);
  std::uint64_t n = 0;
  walk.run([&](const IntVec&, std::int64_t a, std::int64_t b, std::size_t coord) {
    n += factors[coord].count(a, b);
  });
  return n;
}

template <class Keep>
std::vector<IntVec> product_enumerate(const std::vector<Factor>& factors, const QuadraticNorm& q,
                                      double r, Keep&& keep) {
  BallWalk walk(factors, q, r);
  std::vector<IntVec> out;
  walk.run([&](const IntVec& x, std::int64_t a, std::int64_t b, std::size_t coord) {
    IntVec p = x;
    const auto& f = factors[coord];
    auto emit = [&](std::int64_t v) {
      p[coord] = v;
      if (keep(p)) out.push_back(p);
    };
    if (f.dense()) {
      for (std::int64_t v = a; v <= b; ++v) emit(v);
    } else {
      const auto& list = walk.inner_list();
      if (!list.empty()) {
        auto it = std::lower_bound(list.begin(), list.end(), a);
        for (; it != list.end() && *it <= b; ++it) emit(*it);
      } else {
        for (auto v : f.members(a, b)) emit(v);
      }
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

struct LatticeSet::Impl {
  struct Complement {
    LatticeSet inner;
  };
  std::size_t k = 0;
  std::variant<ProductBody, FiniteBody, Complement> body;
  std::optional<double> delta;
};

LatticeSet LatticeSet::product(std::vector<Factor> factors) {
  if (factors.empty()) throw InputError("product set needs at least one factor");
  auto impl = std::make_shared<Impl>();
  impl->k = factors.size();
  double d = 0.0;
  for (const auto& f : factors) d += f.delta();
  impl->delta = d;
  impl->body = ProductBody{std::move(factors)};
  return LatticeSet(std::move(impl));
}

LatticeSet LatticeSet::finite(std::size_t k, std::vector<IntVec> points) {
  if (k == 0) throw InputError("finite set needs positive dimension");
  for (const auto& p : points)
    if (p.size() != k)
      throw InputError("finite set point has dimension " + std::to_string(p.size()) +
                       ", expected " + std::to_string(k));
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  auto impl = std::make_shared<Impl>();
  impl->k = k;
  impl->delta = 0.0;
  impl->body = FiniteBody{std::move(points)};
  return LatticeSet(std::move(impl));
}

LatticeSet LatticeSet::complement(const LatticeSet& inner) {
  auto impl = std::make_shared<Impl>();
  impl->k = inner.rank();
  if (!inner.is_full()) {
    const auto d = inner.declared_delta();
    if (d && *d < static_cast<double>(impl->k)) impl->delta = static_cast<double>(impl->k);
  }
  impl->body = Impl::Complement{inner};
  return LatticeSet(std::move(impl));
}

std::size_t LatticeSet::rank() const { return impl_->k; }

std::optional<double> LatticeSet::declared_delta() const { return impl_->delta; }

LatticeSet LatticeSet::with_declared_delta(std::optional<double> delta) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->delta = delta;
  return LatticeSet(std::move(impl));
}

bool LatticeSet::is_full() const {
  if (const auto* p = std::get_if<ProductBody>(&impl_->body))
    return std::all_of(p->factors.begin(), p->factors.end(),
                       [](const Factor& f) { return f.dense(); });
  return false;
}

bool LatticeSet::contains(std::span<const std::int64_t> alpha) const {
  if (alpha.size() != impl_->k)
    throw InputError("contains: vector has dimension " + std::to_string(alpha.size()) +
                     ", set has dimension " + std::to_string(impl_->k));
  return std::visit(
      [&](const auto& body) -> bool {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, ProductBody>) {
          for (std::size_t i = 0; i < alpha.size(); ++i)
            if (!body.factors[i].contains(alpha[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<B, FiniteBody>) {
          IntVec v(alpha.begin(), alpha.end());
          return std::binary_search(body.points.begin(), body.points.end(), v);
        } else {
          return !body.inner.contains(alpha);
        }
      },
      impl_->body);
}

std::vector<IntVec> LatticeSet::enumerate_ball(const QuadraticNorm& q, double r) const {
  if (q.rank() != impl_->k) throw InputError("enumerate_ball: set and norm dimensions differ");
  if (r < 0) throw InputError("enumerate_ball: negative radius");
  return std::visit(
      [&](const auto& body) -> std::vector<IntVec> {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, ProductBody>) {
          return product_enumerate(body.factors, q, r, [](const IntVec&) { return true; });
        } else if constexpr (std::is_same_v<B, FiniteBody>) {
          std::vector<IntVec> out;
          for (const auto& p : body.points)
            if (q.in_ball(p, r)) out.push_back(p);
          return out;
        } else {
          const auto& inner = body.inner;
          return product_enumerate(full_factors(impl_->k), q, r,
                                   [&](const IntVec& p) { return !inner.contains(p); });
        }
      },
      impl_->body);
}

std::uint64_t LatticeSet::count_ball(const QuadraticNorm& q, double r) const {
  if (q.rank() != impl_->k) throw InputError("count_ball: set and norm dimensions differ");
  if (r < 0) throw InputError("count_ball: negative radius");
  return std::visit(
      [&](const auto& body) -> std::uint64_t {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, ProductBody>) {
          return product_count(body.factors, q, r);
        } else if constexpr (std::is_same_v<B, FiniteBody>) {
          std::uint64_t n = 0;
          for (const auto& p : body.points)
            if (q.in_ball(p, r)) ++n;
          return n;
        } else {
          return product_count(full_factors(impl_->k), q, r) - body.inner.count_ball(q, r);
        }
      },
      impl_->body);
}

LatticeSet LatticeSet::shifted(std::span<const std::int64_t> offset) const {
  if (offset.size() != impl_->k) throw InputError("shift has the wrong dimension");
  auto impl = std::make_shared<Impl>(*impl_);
  std::visit(
      [&](auto& body) {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, ProductBody>) {
          for (std::size_t i = 0; i < offset.size(); ++i)
            body.factors[i] = body.factors[i].shifted(offset[i]);
        } else if constexpr (std::is_same_v<B, FiniteBody>) {
          for (auto& p : body.points)
            for (std::size_t i = 0; i < offset.size(); ++i) p[i] += offset[i];
          std::sort(body.points.begin(), body.points.end());
        } else {
          body.inner = body.inner.shifted(offset);
        }
      },
      impl->body);
  return LatticeSet(std::move(impl));
}

std::string LatticeSet::describe() const {
  return std::visit(
      [&](const auto& body) -> std::string {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, ProductBody>) {
          std::string s;
          for (std::size_t i = 0; i < body.factors.size(); ++i)
            s += (i ? " x " : "") + body.factors[i].describe();
          return s;
        } else if constexpr (std::is_same_v<B, FiniteBody>) {
          std::ostringstream os;
          if (body.points.size() > 8) {
            os << "finite{" << body.points.size() << " points}";
            return os.str();
          }
          os << "{";
          for (std::size_t i = 0; i < body.points.size(); ++i) {
            os << (i ? ", " : "") << "(";
            for (std::size_t j = 0; j < body.points[i].size(); ++j)
              os << (j ? "," : "") << body.points[i][j];
            os << ")";
          }
          os << "}";
          return os.str();
        } else {
          return "complement(" + body.inner.describe() + ")";
        }
      },
      impl_->body);
}

// ---------------------------------------------------------------------------
// make_set

namespace {

Factor make_factor(const SetSpec& s) {
  Factor f;
  if (s.kind == "full") {
    f = Factor::full();
  } else if (s.kind == "power") {
    f = Factor::power(s.q);
  } else if (s.kind == "digit") {
    f = Factor::digit(s.base, s.digits, s.symmetric);
  } else if (s.kind == "residue") {
    f = Factor::residue(s.modulus, s.residue);
  } else if (s.kind == "single") {
    if (s.point.size() > 1) throw InputError("product factor 'single' must be one-dimensional");
    f = Factor::values({s.point.empty() ? 0 : s.point[0]});
  } else if (s.kind == "finite") {
    std::vector<std::int64_t> vals;
    for (const auto& p : s.points) {
      if (p.size() != 1) throw InputError("product factor 'finite' must be one-dimensional");
      vals.push_back(p[0]);
    }
    f = Factor::values(std::move(vals));
  } else {
    throw InputError("set kind '" + s.kind + "' cannot be a product factor");
  }
  if (!s.shift.empty()) {
    if (s.shift.size() != 1) throw InputError("factor shift must have one entry");
    f = f.shifted(s.shift[0]);
  }
  return f;
}

void require_rank_one(const SetSpec& s, std::size_t k) {
  if (k != 1)
    throw InputError("set kind '" + s.kind + "' lives in Z; for k = " + std::to_string(k) +
                     " use a product");
}

}  // namespace

LatticeSet make_set(const SetSpec& s, std::size_t k) {
  if (k == 0) throw InputError("make_set: dimension must be positive");
  auto build = [&]() -> LatticeSet {
    if (s.kind == "full") return LatticeSet::product(full_factors(k));
    if (s.kind == "single") {
      IntVec p = s.point.empty() ? IntVec(k, 0) : s.point;
      if (p.size() != k) throw InputError("single: point must have dimension " + std::to_string(k));
      return LatticeSet::finite(k, {p});
    }
    if (s.kind == "finite") return LatticeSet::finite(k, s.points);
    if (s.kind == "power" || s.kind == "digit" || s.kind == "residue") {
      require_rank_one(s, k);
      SetSpec bare = s;
      bare.shift.clear();
      return LatticeSet::product({make_factor(bare)});
    }
    if (s.kind == "product") {
      if (s.factors.size() != k)
        throw InputError("product: " + std::to_string(s.factors.size()) + " factors for k = " +
                         std::to_string(k));
      std::vector<Factor> fs;
      for (const auto& f : s.factors) fs.push_back(make_factor(f));
      return LatticeSet::product(std::move(fs));
    }
    if (s.kind == "slab") {
      if (s.j < 0 || static_cast<std::size_t>(s.j) > k)
        throw InputError("slab: sublattice dimension j = " + std::to_string(s.j) +
                         " must lie in [0, " + std::to_string(k) + "]");
      std::vector<Factor> fs;
      for (std::size_t i = 0; i < k; ++i)
        fs.push_back(i < static_cast<std::size_t>(s.j) ? Factor::full() : Factor::values({0}));
      return LatticeSet::product(std::move(fs));
    }
    if (s.kind == "complement") {
      if (s.factors.size() != 1) throw InputError("complement: exactly one operand set required");
      return LatticeSet::complement(make_set(s.factors[0], k));
    }
    throw InputError("unknown set kind '" + s.kind + "'");
  };
  LatticeSet set = build();
  if (!s.shift.empty() && s.kind != "product") set = set.shifted(s.shift);
  if (s.delta) {
    if (!(*s.delta >= 0.0 && *s.delta <= static_cast<double>(k)))
      throw InputError("declared delta must lie in [0, k]");
    set = set.with_declared_delta(s.delta);
  }
  return set;
}

// ---------------------------------------------------------------------------
// counting helpers

std::uint64_t count_ball(const LatticeSet& a, const QuadraticNorm& q, double r) {
  return a.count_ball(q, r);
}

double kappa(const LatticeSet& a, const QuadraticNorm& q, double r, double delta) {
  if (r < 0) throw InputError("kappa: negative radius");
  const auto n = a.count_ball(q, r);
  if (n == 0) throw DomainError("kappa undefined: no members with norm <= " + std::to_string(r));
  return static_cast<double>(n) / std::pow(r, delta);
}

DimensionEstimate estimate_dimension(const LatticeSet& a, const QuadraticNorm& q,
                                     std::span<const double> r_grid) {
  if (r_grid.size() < 3) throw InputError("estimate_dimension: need at least 3 radii");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0)) throw InputError("estimate_dimension: radii must be positive");
    if (i > 0 && !(r_grid[i] > r_grid[i - 1]))
      throw InputError("estimate_dimension: radii must be increasing");
  }
  if (r_grid.back() / r_grid.front() < 100.0 * (1.0 - 1e-12))
    throw InputError("estimate_dimension: grid must span at least two decades");

  std::vector<double> xs, ys, rs;
  for (double r : r_grid) {
    const auto n = a.count_ball(q, r);
    if (n == 0) continue;
    rs.push_back(r);
    xs.push_back(std::log(r));
    ys.push_back(std::log(static_cast<double>(n)));
  }
  if (xs.empty()) throw DomainError("estimate_dimension: set is empty on the whole grid");
  if (xs.size() < 2) throw DomainError("estimate_dimension: fewer than two nonempty radii");

  const auto m = static_cast<double>(xs.size());
  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
  }
  DimensionEstimate est;
  est.delta_hat = sxy / sxx;
  const double icpt = ybar - est.delta_hat * xbar;
  for (std::size_t i = 0; i < xs.size(); ++i)
    est.residual = std::max(est.residual, std::abs(ys[i] - (icpt + est.delta_hat * xs[i])));
  est.r_lo = rs.front();
  est.r_hi = rs.back();
  est.points_used = xs.size();
  return est;
}

RealVec log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0 && hi > lo) || n < 2) throw InputError("log_grid: need 0 < lo < hi and n >= 2");
  RealVec g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

double unit_ball_volume(std::size_t k) {
  const double h = static_cast<double>(k) / 2.0;
  return std::pow(M_PI, h) / std::tgamma(h + 1.0);
}

}  // namespace homdim
