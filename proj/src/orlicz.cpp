#include "sparsedom/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace sparsedom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTiny = -745.0;  // exp() underflows below this

double safe_exp(double x) { return x < kLogTiny ? 0.0 : std::exp(x); }

// log+ t in log-domain: contribution of (1 + log+ t) given u = ln t.
double log1plus(double u) { return u > 0 ? std::log1p(u) : 0.0; }

}  // namespace

namespace detail {

enum class Family {
  kPower,
  kScaledPower,
  kLogBump,
  kLogLogBump,
  kEpsBump,
  kTransformed,
  kConjugate,
};

class YoungImpl {
 public:
  virtual ~YoungImpl() = default;

  virtual Family family() const = 0;
  virtual double evaluate(double t) const = 0;
  virtual double derivative(double t) const = 0;
  virtual double log_evaluate(double u) const = 0;
  virtual double log_derivative(double u) const = 0;
  virtual std::string spec() const = 0;
  virtual TailProfile tail_profile() const = 0;
  virtual double slope_at_zero() const = 0;
  virtual double zero_end() const { return 0.0; }
  virtual bool conjugate_degenerate() const = 0;

  // log A(e^u) = log_linear()·u + log_slow(u), exact for closed forms.
  virtual double log_linear() const { return tail_profile().q; }
  virtual double log_slow(double u) const { return log_evaluate(u) - log_linear() * u; }
  virtual double log_deriv_slow(double u) const {
    return log_derivative(u) - (log_linear() - 1) * u;
  }

  // Generalized inverse; overridden where a closed form exists.
  virtual double inverse(double s) const;
};

inline double YoungImpl::inverse(double s) const {
    if (!(s > 0)) return zero_end();
    const double ls = std::log(s);
    // Bracket in u = ln t, then bisect. evaluate is nondecreasing and
    // continuous, unbounded above.
    double ulo = 0, uhi = 0;
    if (log_evaluate(0) >= ls) {
      double step = 1;
      while (log_evaluate(ulo) >= ls) {
        uhi = ulo;
        ulo -= step;
        step *= 2;
        if (ulo < -1e6) return 0.0;
      }
    } else {
      double step = 1;
      while (log_evaluate(uhi) < ls) {
        ulo = uhi;
        uhi += step;
        step *= 2;
        if (uhi > 1e6) return kInf;
      }
    }
    for (int i = 0; i < 160 && uhi - ulo > 1e-15 * (1 + std::abs(ulo)); ++i) {
      const double mid = 0.5 * (ulo + uhi);
      (log_evaluate(mid) < ls ? ulo : uhi) = mid;
    }
    return std::exp(0.5 * (ulo + uhi));
}

class PowerImpl final : public YoungImpl {
 public:
  explicit PowerImpl(double p) : p_(p) {
    if (!(p >= 1)) throw Error("power: requires p >= 1");
  }
  Family family() const override { return Family::kPower; }
  double evaluate(double t) const override { return std::pow(t, p_); }
  double derivative(double t) const override {
    return p_ == 1 ? 1.0 : p_ * std::pow(t, p_ - 1);
  }
  double log_evaluate(double u) const override { return p_ * u; }
  double log_derivative(double u) const override { return std::log(p_) + (p_ - 1) * u; }
  double inverse(double s) const override { return s <= 0 ? 0.0 : std::pow(s, 1 / p_); }
  double log_linear() const override { return p_; }
  double log_slow(double) const override { return 0.0; }
  double log_deriv_slow(double) const override { return std::log(p_); }
  std::string spec() const override { return "power:p=" + format_double(p_); }
  TailProfile tail_profile() const override { return {p_, 0, 0, false}; }
  double slope_at_zero() const override { return p_ == 1 ? 1.0 : 0.0; }
  bool conjugate_degenerate() const override { return p_ == 1; }
  double p() const { return p_; }

 private:
  double p_;
};

class ScaledPowerImpl final : public YoungImpl {
 public:
  explicit ScaledPowerImpl(double p) : p_(p) {
    if (!(p >= 1)) throw Error("scaledpower: requires p >= 1");
  }
  Family family() const override { return Family::kScaledPower; }
  double evaluate(double t) const override { return std::pow(t, p_) / p_; }
  double derivative(double t) const override {
    return p_ == 1 ? 1.0 : std::pow(t, p_ - 1);
  }
  double log_evaluate(double u) const override { return p_ * u - std::log(p_); }
  double log_derivative(double u) const override { return (p_ - 1) * u; }
  double inverse(double s) const override {
    return s <= 0 ? 0.0 : std::pow(p_ * s, 1 / p_);
  }
  double log_linear() const override { return p_; }
  double log_slow(double) const override { return -std::log(p_); }
  double log_deriv_slow(double) const override { return 0.0; }
  std::string spec() const override { return "scaledpower:p=" + format_double(p_); }
  TailProfile tail_profile() const override { return {p_, 0, 0, false}; }
  double slope_at_zero() const override { return p_ == 1 ? 1.0 : 0.0; }
  bool conjugate_degenerate() const override { return p_ == 1; }
  double p() const { return p_; }

 private:
  double p_;
};

// t^p (1+log+ t)^a. Negative a is allowed down to the monotonicity limit
// a >= -p; those variants are increasing but not convex at t = 1.
class LogBumpImpl final : public YoungImpl {
 public:
  LogBumpImpl(double p, double a) : p_(p), a_(a) {
    if (!(p >= 1)) throw Error("logbump: requires p >= 1");
    if (!(p + a >= 0)) throw Error("logbump: requires p + a >= 0 for monotonicity");
  }
  Family family() const override { return Family::kLogBump; }
  double evaluate(double t) const override {
    if (t <= 1) return std::pow(t, p_);
    return std::pow(t, p_) * std::pow(1 + std::log(t), a_);
  }
  double derivative(double t) const override {
    if (t < 1) return p_ * std::pow(t, p_ - 1);
    const double u = std::log(t);
    return std::pow(t, p_ - 1) * std::pow(1 + u, a_ - 1) * (p_ * (1 + u) + a_);
  }
  double log_evaluate(double u) const override {
    return p_ * u + a_ * log1plus(u);
  }
  double log_derivative(double u) const override {
    if (u < 0) return std::log(p_) + (p_ - 1) * u;
    const double lp = std::log1p(u);
    return (p_ - 1) * u + (a_ - 1) * lp + std::log(p_ * (1 + u) + a_);
  }
  double inverse(double s) const override {
    if (s <= 0) return 0.0;
    if (s <= 1) return std::pow(s, 1 / p_);
    return YoungImpl::inverse(s);
  }
  double log_linear() const override { return p_; }
  double log_slow(double u) const override { return a_ * log1plus(u); }
  double log_deriv_slow(double u) const override {
    if (u < 0) return std::log(p_);
    return (a_ - 1) * std::log1p(u) + std::log(p_ * (1 + u) + a_);
  }
  std::string spec() const override {
    return "logbump:p=" + format_double(p_) + ",a=" + format_double(a_);
  }
  TailProfile tail_profile() const override { return {p_, a_, 0, false}; }
  double slope_at_zero() const override { return p_ == 1 ? 1.0 : 0.0; }
  bool conjugate_degenerate() const override { return p_ == 1 && a_ <= 0; }

 private:
  double p_, a_;
};

// t^p (1+log+ t)^{p-1} (1+log+(1+log+ t))^a.
class LogLogBumpImpl final : public YoungImpl {
 public:
  LogLogBumpImpl(double p, double a) : p_(p), a_(a) {
    if (!(p >= 1)) throw Error("loglogbump: requires p >= 1");
    if (!(2 * p - 1 + a >= 0)) throw Error("loglogbump: not monotone for this a");
  }
  Family family() const override { return Family::kLogLogBump; }
  double evaluate(double t) const override {
    if (t <= 1) return std::pow(t, p_);
    const double u = std::log(t);
    const double lp = std::log1p(u);
    return std::pow(t, p_) * std::pow(1 + u, p_ - 1) * std::pow(1 + lp, a_);
  }
  double derivative(double t) const override {
    if (t < 1) return p_ * std::pow(t, p_ - 1);
    const double u = std::log(t);
    const double lp = std::log1p(u);
    const double bracket = p_ + (p_ - 1) / (1 + u) + a_ / ((1 + lp) * (1 + u));
    return evaluate(t) / t * bracket;
  }
  double log_evaluate(double u) const override {
    if (u <= 0) return p_ * u;
    const double lp = std::log1p(u);
    return p_ * u + (p_ - 1) * lp + a_ * std::log1p(lp);
  }
  double log_derivative(double u) const override {
    if (u < 0) return std::log(p_) + (p_ - 1) * u;
    const double lp = std::log1p(u);
    const double bracket = p_ + (p_ - 1) / (1 + u) + a_ / ((1 + lp) * (1 + u));
    return log_evaluate(u) - u + std::log(bracket);
  }
  double log_linear() const override { return p_; }
  double log_slow(double u) const override {
    if (u <= 0) return 0.0;
    const double lp = std::log1p(u);
    return (p_ - 1) * lp + a_ * std::log1p(lp);
  }
  double log_deriv_slow(double u) const override {
    if (u < 0) return std::log(p_);
    const double lp = std::log1p(u);
    const double bracket = p_ + (p_ - 1) / (1 + u) + a_ / ((1 + lp) * (1 + u));
    return log_slow(u) + std::log(bracket);
  }
  std::string spec() const override {
    return "loglogbump:p=" + format_double(p_) + ",a=" + format_double(a_);
  }
  TailProfile tail_profile() const override { return {p_, p_ - 1, a_, false}; }
  double slope_at_zero() const override { return p_ == 1 ? 1.0 : 0.0; }
  bool conjugate_degenerate() const override { return false; }

 private:
  double p_, a_;
};

// t (1+log+ t)^eps, the L(log L)^eps gauge.
class EpsBumpImpl final : public YoungImpl {
 public:
  explicit EpsBumpImpl(double eps) : eps_(eps) {
    if (!(eps >= 0)) throw Error("epsbump: requires eps >= 0");
  }
  Family family() const override { return Family::kEpsBump; }
  double evaluate(double t) const override {
    if (t <= 1) return t;
    return t * std::pow(1 + std::log(t), eps_);
  }
  double derivative(double t) const override {
    if (t < 1) return 1.0;
    const double u = std::log(t);
    return std::pow(1 + u, eps_ - 1) * (1 + u + eps_);
  }
  double log_evaluate(double u) const override { return u + eps_ * log1plus(u); }
  double log_derivative(double u) const override {
    if (u < 0) return 0.0;
    const double lp = std::log1p(u);
    return (eps_ - 1) * lp + std::log(1 + u + eps_);
  }
  double inverse(double s) const override {
    if (s <= 0) return 0.0;
    if (s <= 1) return s;
    return YoungImpl::inverse(s);
  }
  double log_linear() const override { return 1.0; }
  double log_slow(double u) const override { return eps_ * log1plus(u); }
  double log_deriv_slow(double u) const override {
    if (u < 0) return 0.0;
    return (eps_ - 1) * std::log1p(u) + std::log(1 + u + eps_);
  }
  std::string spec() const override { return "epsbump:eps=" + format_double(eps_); }
  TailProfile tail_profile() const override { return {1, eps_, 0, false}; }
  double slope_at_zero() const override { return 1.0; }
  bool conjugate_degenerate() const override { return eps_ == 0; }

 private:
  double eps_;
};

// A_p(t) = A(t^{1/p}).
class TransformedImpl final : public YoungImpl {
 public:
  TransformedImpl(YoungFunction inner, double p) : inner_(std::move(inner)), p_(p) {
    if (!(p >= 1)) throw Error("ap: requires p >= 1");
  }
  Family family() const override { return Family::kTransformed; }
  double evaluate(double t) const override {
    return inner_.evaluate(std::pow(t, 1 / p_));
  }
  double derivative(double t) const override {
    if (t == 0) return slope_at_zero();
    const double root = std::pow(t, 1 / p_);
    return inner_.derivative(root) * root / (p_ * t);
  }
  double log_evaluate(double u) const override { return inner_.log_evaluate(u / p_); }
  double log_derivative(double u) const override {
    return inner_.log_derivative(u / p_) - std::log(p_) + (1 / p_ - 1) * u;
  }
  double inverse(double s) const override {
    const double x = inner_.inverse(s);
    return std::pow(x, p_);
  }
  double zero_end() const override { return std::pow(inner_.zero_end(), p_); }
  double log_linear() const override { return inner_.log_linear() / p_; }
  double log_slow(double u) const override { return inner_.log_slow(u / p_); }
  double log_deriv_slow(double u) const override {
    return inner_.log_deriv_slow(u / p_) - std::log(p_);
  }
  std::string spec() const override {
    return "ap:inner=" + inner_.spec() + ",p=" + format_double(p_);
  }
  TailProfile tail_profile() const override {
    TailProfile tp = inner_.tail_profile();
    if (!tp.superpolynomial) tp.q /= p_;
    return tp;
  }
  double slope_at_zero() const override {
    // inner behaves as c0 t^{q0} near 0; A(t^{1/p}) ~ c0 t^{q0/p}.
    const TailProfile tp = inner_.tail_profile();
    const double q0 = tp.superpolynomial ? 1.0 : tp.q;  // families are pure powers below 1
    const double q = q0 / p_;
    if (q > 1) return 0.0;
    if (q < 1) return kInf;
    return inner_.evaluate(std::pow(0.5, 1 / p_)) / 0.5;  // exact on the power segment
  }
  bool conjugate_degenerate() const override {
    const double s = slope_at_zero();
    (void)s;
    TailProfile tp = tail_profile();
    if (tp.superpolynomial) return false;
    if (tp.q > 1) return false;
    if (tp.q < 1) return true;  // sublinear tail
    return tp.a <= 0 && tp.b <= 0;
  }
  const YoungFunction& inner() const { return inner_; }

 private:
  YoungFunction inner_;
  double p_;
};

// Numeric Legendre conjugate: Ā(s) = sup_t {st − A(t)}, evaluated by
// solving A'(t*) = s (A' is nondecreasing, so monotone bisection in
// u = ln t) and returning s·t* − A(t*). A memo of log t*(s) on a log-s
// grid, built eagerly, warm-starts the bisection; all later evaluation
// is read-only.
class ConjugateImpl final : public YoungImpl {
 public:
  explicit ConjugateImpl(YoungFunction inner)
      : inner_(std::move(inner)), s0_(inner_.slope_at_zero()) {
    build_memo();
  }

  Family family() const override { return Family::kConjugate; }

  double evaluate(double s) const override {
    if (!(s > s0_)) return 0.0;
    const double ls = std::log(s);
    const double u = solve_tstar(ls);
    if (ls + u < 700 && u > -700) {
      const double t = std::exp(u);
      return std::max(0.0, s * t - inner_.evaluate(t));
    }
    const double lv = log_value(ls, u);
    return lv > 709 ? kInf : safe_exp(lv);
  }

  double derivative(double s) const override {
    if (!(s > 0) || s < s0_) return 0.0;
    return std::exp(solve_tstar(std::log(s)));
  }

  double log_evaluate(double us) const override {
    const double s_small = safe_exp(us);
    if (us < 700 && !(s_small > s0_)) return -kInf;
    return log_value(us, solve_tstar(us));
  }

  double log_derivative(double us) const override { return solve_tstar(us); }

  double zero_end() const override { return s0_; }

  std::string spec() const override { return "conj:inner=" + inner_.spec(); }

  TailProfile tail_profile() const override {
    const TailProfile tp = inner_.tail_profile();
    if (tp.superpolynomial) return {1, 1, 0, false};
    if (tp.q <= 1) return {1, 0, 0, true};  // conj of near-linear growth
    const double qc = tp.q / (tp.q - 1);
    return {qc, -tp.a / (tp.q - 1), -tp.b / (tp.q - 1), false};
  }

  double slope_at_zero() const override { return inner_.zero_end(); }
  bool conjugate_degenerate() const override { return false; }

  const YoungFunction& inner() const { return inner_; }

 private:
  // u* = ln t* with A'(t*) = s, by bisection on the monotone log A'.
  double solve_tstar(double ls) const {
    double ulo, uhi;
    bracket_from_memo(ls, ulo, uhi);
    double step = 1;
    while (inner_.log_derivative(ulo) >= ls) {
      uhi = ulo;
      ulo -= step;
      step *= 2;
      if (ulo < -1e7) break;
    }
    step = 1;
    while (inner_.log_derivative(uhi) < ls) {
      ulo = std::max(ulo, uhi);
      uhi += step;
      step *= 2;
      if (uhi > 1e7) break;
    }
    for (int i = 0; i < 140 && uhi - ulo > 1e-14 * (1 + std::abs(uhi)); ++i) {
      const double mid = 0.5 * (ulo + uhi);
      (inner_.log_derivative(mid) < ls ? ulo : uhi) = mid;
    }
    return 0.5 * (ulo + uhi);
  }

  // log(s·t* − A(t*)) given ls = ln s and u = ln t*.
  double log_value(double ls, double u) const {
    const double x1 = ls + u;
    const double x2 = inner_.log_evaluate(u);
    if (!(x2 < x1)) return -kInf;
    return x1 + std::log1p(-safe_exp(x2 - x1));
  }

  void build_memo() {
    const double s_lo = std::max(s0_ * (1 + 1e-9), 1e-9);
    const double s_hi = 1e9;
    const double decades = std::log10(s_hi / s_lo);
    const int count = std::max(2, int(512 * decades));
    memo_ls_.reserve(count);
    memo_lt_.reserve(count);
    const double l0 = std::log(s_lo), l1 = std::log(s_hi);
    for (int i = 0; i < count; ++i) {
      const double ls = l0 + (l1 - l0) * i / (count - 1);
      memo_ls_.push_back(ls);
      memo_lt_.push_back(solve_tstar(ls));
    }
  }

  void bracket_from_memo(double ls, double& ulo, double& uhi) const {
    if (memo_ls_.empty() || ls <= memo_ls_.front()) {
      ulo = -8;
      uhi = 8;
      return;
    }
    if (ls >= memo_ls_.back()) {
      ulo = memo_lt_.back() - 1;
      uhi = memo_lt_.back() + 8;
      return;
    }
    const auto it = std::lower_bound(memo_ls_.begin(), memo_ls_.end(), ls);
    const std::size_t i = std::size_t(it - memo_ls_.begin());
    ulo = memo_lt_[i - 1] - 1e-9;
    uhi = memo_lt_[i] + 1e-9;
  }

  YoungFunction inner_;
  double s0_;
  std::vector<double> memo_ls_;
  std::vector<double> memo_lt_;
};

}  // namespace detail

using detail::Family;

YoungFunction YoungFunction::power(double p) {
  return YoungFunction(std::make_shared<detail::PowerImpl>(p));
}
YoungFunction YoungFunction::scaled_power(double p) {
  return YoungFunction(std::make_shared<detail::ScaledPowerImpl>(p));
}
YoungFunction YoungFunction::log_bump(double p, double a) {
  return YoungFunction(std::make_shared<detail::LogBumpImpl>(p, a));
}
YoungFunction YoungFunction::loglog_bump(double p, double a) {
  return YoungFunction(std::make_shared<detail::LogLogBumpImpl>(p, a));
}
YoungFunction YoungFunction::eps_bump(double eps) {
  return YoungFunction(std::make_shared<detail::EpsBumpImpl>(eps));
}
YoungFunction YoungFunction::transformed(const YoungFunction& inner, double p) {
  return YoungFunction(std::make_shared<detail::TransformedImpl>(inner, p));
}

double YoungFunction::evaluate(double t) const {
  if (t <= 0) return 0.0;
  return impl_->evaluate(t);
}
double YoungFunction::inverse(double s) const { return impl_->inverse(s); }
double YoungFunction::derivative(double t) const {
  if (t < 0) return 0.0;
  return impl_->derivative(t);
}
double YoungFunction::log_evaluate(double u) const { return impl_->log_evaluate(u); }
double YoungFunction::log_derivative(double u) const { return impl_->log_derivative(u); }
double YoungFunction::log_linear() const { return impl_->log_linear(); }
double YoungFunction::log_slow(double u) const { return impl_->log_slow(u); }
double YoungFunction::log_deriv_slow(double u) const { return impl_->log_deriv_slow(u); }
double YoungFunction::zero_end() const { return impl_->zero_end(); }
double YoungFunction::slope_at_zero() const { return impl_->slope_at_zero(); }
bool YoungFunction::conjugate_degenerate() const { return impl_->conjugate_degenerate(); }
TailProfile YoungFunction::tail_profile() const { return impl_->tail_profile(); }
std::string YoungFunction::spec() const { return impl_->spec(); }

bool YoungFunction::convexity_spot_check(double tol) const {
  const auto grid = default_t_grid();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t1 = grid[i], t2 = grid[i + 1];
    const double lhs = evaluate(0.5 * (t1 + t2));
    const double rhs = 0.5 * (evaluate(t1) + evaluate(t2));
    if (lhs > rhs * (1 + tol) + tol) return false;
  }
  return true;
}

YoungFunction conjugate(const YoungFunction& A) {
  const detail::YoungImpl* impl = A.impl_.get();
  if (impl->family() == Family::kConjugate)
    return static_cast<const detail::ConjugateImpl*>(impl)->inner();
  if (A.conjugate_degenerate())
    throw Error("conjugate of " + A.spec() + " is degenerate (sup A(t)/t < infinity)");
  if (impl->family() == Family::kScaledPower) {
    const double p = static_cast<const detail::ScaledPowerImpl*>(impl)->p();
    return YoungFunction::scaled_power(conjugate_exponent(p));
  }
  // Numeric conjugates are memoized per inner spec; the memo table in the
  // impl is immutable after construction, so sharing is safe.
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const detail::YoungImpl>> cache;
  const std::string key = A.spec();
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return YoungFunction(it->second);
  }
  auto built = std::make_shared<detail::ConjugateImpl>(A);
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = cache.emplace(key, built);
  return YoungFunction(it->second);
}

// ---------------------------------------------------------------------------
// Luxemburg norm
// ---------------------------------------------------------------------------

LuxemburgResult luxemburg_norm(std::span<const double> cells, double max_abs,
                               const YoungFunction& A) {
  LuxemburgResult res;
  if (max_abs <= 0) return res;

  const double inv1 = A.inverse(1.0);
  if (!(inv1 > 0)) throw Error("luxemburg_norm: A^{-1}(1) is not positive");

  // Constant-on-Q functions have the closed form lambda = |c| / A^{-1}(1);
  // this also covers single-cell cubes.
  bool constant = true;
  for (double v : cells)
    if (std::abs(v) != max_abs) {
      constant = false;
      break;
    }
  if (constant) {
    res.value = max_abs / inv1;
    return res;
  }

  const double n = double(cells.size());
  auto phi = [&](double lambda) {
    double s = 0;
    for (double v : cells) s += A.evaluate(std::abs(v) / lambda);
    return s / n;
  };

  double lo = max_abs / inv1 * 0x1p-40;
  double hi = max_abs * std::max(1.0, 1 / inv1) * 2;
  int widen = 0;
  while (phi(hi) > 1 && widen++ < 80) hi *= 2;
  while (phi(lo) < 1 && widen++ < 160) lo *= 0.5;
  if (phi(hi) > 1 || phi(lo) < 1)
    throw Error("luxemburg_norm: could not bracket the defining equation");

  double mid = 0.5 * (lo + hi);
  for (res.iterations = 0; res.iterations < 200; ++res.iterations) {
    mid = 0.5 * (lo + hi);
    const double v = phi(mid);
    if (std::abs(v - 1) <= 1e-11) break;
    (v > 1 ? lo : hi) = mid;
    if (hi - lo <= 1e-13 * mid) break;
  }
  res.value = mid;
  res.bracket_width = hi - lo;
  return res;
}

LuxemburgResult luxemburg_norm(const GridFunction& f, const Cube& q,
                               const YoungFunction& A) {
  const DyadicGrid& g = f.grid();
  g.require(q);
  // Collect the cube's cells; order is irrelevant for the norm.
  const int shift = g.depth() - q.level;
  const std::uint64_t per_dim = std::uint64_t(1) << shift;
  std::vector<double> vals;
  vals.reserve(g.cells_per_cube(q.level));
  const int n = g.dim();
  if (n == 1) {
    const std::uint64_t base = std::uint64_t(q.idx[0]) << shift;
    for (std::uint64_t i = 0; i < per_dim; ++i) vals.push_back(f.value(base + i));
  } else if (n == 2) {
    const std::uint64_t stride = std::uint64_t(1) << g.depth();
    const std::uint64_t b0 = std::uint64_t(q.idx[0]) << shift;
    const std::uint64_t b1 = std::uint64_t(q.idx[1]) << shift;
    for (std::uint64_t i = 0; i < per_dim; ++i)
      for (std::uint64_t j = 0; j < per_dim; ++j)
        vals.push_back(f.value((b0 + i) * stride + b1 + j));
  } else {
    const std::uint64_t stride = std::uint64_t(1) << g.depth();
    const std::uint64_t b0 = std::uint64_t(q.idx[0]) << shift;
    const std::uint64_t b1 = std::uint64_t(q.idx[1]) << shift;
    const std::uint64_t b2 = std::uint64_t(q.idx[2]) << shift;
    for (std::uint64_t i = 0; i < per_dim; ++i)
      for (std::uint64_t j = 0; j < per_dim; ++j)
        for (std::uint64_t k = 0; k < per_dim; ++k)
          vals.push_back(f.value(((b0 + i) * stride + b1 + j) * stride + b2 + k));
  }
  double mx = 0;
  for (double v : vals) mx = std::max(mx, std::abs(v));
  return luxemburg_norm(std::span<const double>(vals), mx, A);
}

// ---------------------------------------------------------------------------
// Tail integrals
// ---------------------------------------------------------------------------

namespace {

template <typename F>
double adaptive_simpson_rec(const F& g, double a, double fa, double b, double fb,
                            double m, double fm, double whole, double eps, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * eps)
    return left + right + delta / 15;
  return adaptive_simpson_rec(g, a, fa, m, fm, lm, flm, left, eps / 2, depth - 1) +
         adaptive_simpson_rec(g, m, fm, b, fb, rm, frm, right, eps / 2, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& g, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = g(a), fb = g(b), fm = g(m);
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  const double eps = std::max(std::abs(whole) * rel_tol, 1e-300);
  return adaptive_simpson_rec(g, a, fa, b, fb, m, fm, whole, eps, 28);
}

// Integral of exp(log_integrand(u)) du over [u0, infinity), via doubling
// windows plus a geometric tail extrapolation once the window ratio has
// stabilized. Assumes the caller has already classified the integral as
// convergent; windows that keep growing past the double range flag +inf.
template <typename LogF>
double windowed_tail_integral(const LogF& logf, double u0) {
  auto g = [&](double u) { return safe_exp(logf(u)); };
  double acc = 0;
  double lo = u0;
  if (lo < 0) {
    acc += adaptive_simpson(g, lo, 0.0, 1e-12);
    lo = 0;
  }
  double hi = std::max(16.0, 2 * lo);
  double prev = -1;
  for (int k = 0; k < 1200; ++k) {
    const double c = adaptive_simpson(g, lo, hi, 1e-12);
    acc += c;
    if (c <= 0) break;
    const double r = prev > 0 ? c / prev : 1.0;
    if (r < 1 && (c < 1e-16 * acc || hi > 1e280)) {
      acc += c * r / (1 - r);
      break;
    }
    if (hi > 1e280) return r < 1 ? acc : kInf;
    prev = c;
    lo = hi;
    hi *= 2;
  }
  return acc;
}

// Divergence classifier for ∫^∞ e^{E·u} (1+u)^α (1+log(1+u))^β du.
bool tail_diverges(double E, double alpha, double beta) {
  const double tol = 1e-12;
  if (E > tol) return true;
  if (E < -tol) return false;
  if (alpha > -1 + tol) return true;
  if (alpha < -1 - tol) return false;
  return beta >= -1 - tol;
}

}  // namespace

double alpha_p(const YoungFunction& A, double p) {
  if (!(p > 1)) throw Error("alpha_p: requires p > 1");
  const TailProfile tp = A.tail_profile();
  if (tp.superpolynomial) return kInf;
  if (tail_diverges(tp.q - p, tp.a, tp.b)) return kInf;
  // Integrand in u = log t: e^{(lin-p)u + slow(u)}; the linear part is
  // cancelled exactly so log-decay tails stay accurate at huge u.
  const double E = A.log_linear() - p;
  auto logf = [&](double u) { return E * u + A.log_slow(u); };
  const double integral = windowed_tail_integral(logf, 0.0);
  return std::pow(integral, 1 / p);
}

double beta_p(const YoungFunction& B, double p) {
  if (!(p > 1)) throw Error("beta_p: requires p > 1");
  const YoungFunction bbar = conjugate(B);  // throws when degenerate

  const double lower = B.evaluate(1.0);
  if (lower > 0 && bbar.evaluate(lower) == 0) return kInf;

  const TailProfile tp = bbar.tail_profile();
  const double lin = bbar.log_linear();
  if (!tp.superpolynomial) {
    // Integrand in u: t^p Bbar^{-p} Bbar' · t ~ e^{(p + q - pq)u} (1+u)^{a(1-p)}
    // with (q, a, b) the profile of Bbar.
    const double Eu = p + tp.q - p * tp.q;
    if (tail_diverges(Eu, tp.a * (1 - p), tp.b * (1 - p))) return kInf;
  }

  // (p+1)u − p·log B̄ + log B̄' with the u-linear parts cancelled exactly:
  // E = p + lin − p·lin, remainder −p·slow + deriv_slow.
  const double E = p + lin - p * lin;
  auto logf = [&](double u) {
    return E * u - p * bbar.log_slow(u) + bbar.log_deriv_slow(u);
  };

  double u0;
  if (lower > 0) {
    u0 = std::log(lower);
  } else {
    // Lower limit 0: probe the behavior near zero before integrating.
    u0 = -40;
    double probe_prev = -1;
    for (double a = -40; a > -200; a -= 20) {
      const double c = adaptive_simpson([&](double u) { return safe_exp(logf(u)); },
                                        a - 20, a, 1e-10);
      if (probe_prev >= 0 && c > probe_prev * 1.5 && c > 1e-6) return kInf;
      probe_prev = c;
    }
    u0 = -200;
  }
  const double integral = windowed_tail_integral(logf, u0);
  return std::pow(integral, 1 / p);
}

// ---------------------------------------------------------------------------
// O'Neil splitting constant
// ---------------------------------------------------------------------------

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(count);
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (int i = 0; i < count; ++i)
    out.push_back(std::exp(l0 + (l1 - l0) * i / (count - 1)));
  return out;
}

std::vector<double> default_t_grid() { return log_spaced(1e-8, 1e8, 200); }

double holder_kappa(const YoungFunction& A, const YoungFunction& B,
                    const YoungFunction& C, std::span<const double> t_grid) {
  if (t_grid.empty()) throw Error("holder_kappa: empty grid");
  auto ratio = [&](double t) {
    const double ai = A.inverse(t);
    if (!(ai > 0)) return 0.0;
    return B.inverse(t) * C.inverse(t) / ai;
  };
  std::vector<double> r(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) r[i] = ratio(t_grid[i]);

  // Unbounded growth: still rising across the top two decades of the grid.
  const std::size_t n = r.size();
  if (n >= 8) {
    const std::size_t per_decade = std::max<std::size_t>(
        1, std::size_t(double(n) / std::log10(t_grid.back() / t_grid.front())));
    if (n > 2 * per_decade) {
      const double top = r[n - 1];
      const double mid = r[n - 1 - per_decade];
      const double low = r[n - 1 - 2 * per_decade];
      if (top > mid * 1.05 && mid > low * 1.05 &&
          top == *std::max_element(r.begin(), r.end()))
        return kInf;
    }
  }

  // Refine around every local maximum with golden-section on log t.
  double best = 0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1);
  for (std::size_t i = 0; i < n; ++i) {
    best = std::max(best, r[i]);
    const bool local_max = (i == 0 || r[i] >= r[i - 1]) && (i + 1 == n || r[i] >= r[i + 1]);
    if (!local_max) continue;
    double a = std::log(t_grid[i == 0 ? 0 : i - 1]);
    double b = std::log(t_grid[i + 1 >= n ? n - 1 : i + 1]);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = ratio(std::exp(x1)), f2 = ratio(std::exp(x2));
    for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = ratio(std::exp(x2));
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = ratio(std::exp(x1));
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

double holder_kappa(const YoungFunction& A, const YoungFunction& B,
                    const YoungFunction& C) {
  const auto grid = default_t_grid();
  return holder_kappa(A, B, C, grid);
}

// ---------------------------------------------------------------------------
// Spec parsing
// ---------------------------------------------------------------------------

namespace {

double parse_param(const std::string& kv, const std::string& key) {
  if (kv.rfind(key + "=", 0) != 0)
    throw Error("young spec: expected '" + key + "=', got '" + kv + "'");
  const std::string num = kv.substr(key.size() + 1);
  try {
    std::size_t pos = 0;
    const double v = std::stod(num, &pos);
    if (pos != num.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("young spec: invalid number '" + num + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

}  // namespace

YoungFunction YoungFunction::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error("young spec: missing ':' in '" + spec + "'");
  const std::string fam = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (fam == "power") return power(parse_param(rest, "p"));
  if (fam == "scaledpower") return scaled_power(parse_param(rest, "p"));
  if (fam == "epsbump") return eps_bump(parse_param(rest, "eps"));
  if (fam == "logbump" || fam == "loglogbump") {
    const auto parts = split(rest, ',');
    if (parts.size() != 2) throw Error("young spec: " + fam + " takes p and a");
    const double p = parse_param(parts[0], "p");
    const double a = parse_param(parts[1], "a");
    return fam == "logbump" ? log_bump(p, a) : loglog_bump(p, a);
  }
  if (fam == "conj") {
    if (rest.rfind("inner=", 0) != 0) throw Error("young spec: conj needs inner=");
    return conjugate(parse(rest.substr(6)));
  }
  if (fam == "ap") {
    // Either "ap:p=<v>,inner=<spec>" or "ap:inner=<spec>,p=<v>" with the
    // trailing ",p=" binding to ap (inner specs may contain commas).
    if (rest.rfind("p=", 0) == 0) {
      const auto comma = rest.find(',');
      if (comma == std::string::npos || rest.compare(comma + 1, 6, "inner=") != 0)
        throw Error("young spec: ap needs inner= and p=");
      const double p = parse_param(rest.substr(0, comma), "p");
      return transformed(parse(rest.substr(comma + 7)), p);
    }
    if (rest.rfind("inner=", 0) != 0) throw Error("young spec: ap needs inner=");
    const auto tail = rest.rfind(",p=");
    if (tail == std::string::npos) throw Error("young spec: ap needs a trailing ,p=");
    const double p = parse_param(rest.substr(tail + 1), "p");
    return transformed(parse(rest.substr(6, tail - 6)), p);
  }
  throw Error("young spec: unknown family '" + fam + "'");
}

}  // namespace sparsedom
