#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsedom/dyadic.hpp"

namespace sparsedom {

namespace detail {
class YoungImpl;
}

// Leading asymptotic shape of a Young function for t → ∞:
//   A(t) ≍ t^q · (1+log t)^a · (1+loglog t)^b,
// or superpolynomial growth (q irrelevant then).
struct TailProfile {
  double q = 1;
  double a = 0;
  double b = 0;
  bool superpolynomial = false;
};

// A Young function as a value: evaluation, generalized inverse, one-sided
// derivative, log-domain access for tail quadrature, and a canonical spec
// string (the CLI/config name).
//
// Built-in families:
//   power:p          t^p
//   scaledpower:p    t^p / p
//   logbump:p,a      t^p (1+log+ t)^a            (a may be negative)
//   loglogbump:p,a   t^p (1+log+ t)^{p-1} (1+log+(1+log+ t))^a
//   epsbump:eps      t (1+log+ t)^eps
//   ap:inner,p       A(t^{1/p})
//   conj:inner       numeric Legendre conjugate
// log+ t = max(0, ln t) throughout.
class YoungFunction {
 public:
  static YoungFunction power(double p);
  static YoungFunction scaled_power(double p);
  static YoungFunction log_bump(double p, double a);
  static YoungFunction loglog_bump(double p, double a);
  static YoungFunction eps_bump(double eps);
  static YoungFunction transformed(const YoungFunction& inner, double p);

  // Parses a spec string like "logbump:p=2,a=1.5" or
  // "ap:inner=logbump:p=2,a=1.5,p=2" (the trailing ",p=" binds to ap).
  static YoungFunction parse(const std::string& spec);

  double evaluate(double t) const;
  double operator()(double t) const { return evaluate(t); }

  // Right-continuous generalized inverse; inverse(0) = sup{t : A(t)=0}.
  double inverse(double s) const;

  // One-sided (right) derivative; total on [0, ∞).
  double derivative(double t) const;

  // log A(e^u) and log A'(e^u), stable for |u| far beyond double overflow
  // of t itself. Used by the tail quadratures.
  double log_evaluate(double u) const;
  double log_derivative(double u) const;

  // Exact decomposition log A(e^u) = log_linear()·u + log_slow(u) for the
  // closed-form families (raw subtraction otherwise). The tail quadratures
  // cancel the linear parts analytically; the naive difference of two
  // O(u) quantities loses the slowly-varying remainder for u ≳ 1e16.
  double log_linear() const;
  double log_slow(double u) const;
  double log_deriv_slow(double u) const;  // log A'(e^u) − (log_linear()−1)·u

  // sup{t : A(t) = 0}; 0 for the closed-form families.
  double zero_end() const;

  // lim_{t→0+} A(t)/t = A'(0+); the conjugate vanishes on [0, this].
  double slope_at_zero() const;

  // True when sup A(t)/t < ∞, i.e. the conjugate is not a finite Young
  // function (e.g. power:p=1).
  bool conjugate_degenerate() const;

  TailProfile tail_profile() const;
  std::string spec() const;

  // Midpoint-convexity spot check on a log grid; the (monotone but not
  // convex) auxiliary functions used by the O'Neil splitting fail this,
  // so it is a query rather than a construction-time invariant.
  bool convexity_spot_check(double tol = 1e-9) const;

  friend YoungFunction conjugate(const YoungFunction& A);

 private:
  explicit YoungFunction(std::shared_ptr<const detail::YoungImpl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::YoungImpl> impl_;
};

// Legendre conjugate Ā(s) = sup_t {st − A(t)}. Closed form for
// scaledpower (dual exponent); conj(conj(A)) returns A itself; numeric
// otherwise. Throws for degenerate conjugates (power:p=1).
YoungFunction conjugate(const YoungFunction& A);

struct LuxemburgResult {
  double value = 0;          // λ* with avg_Q A(|f|/λ*) = 1, or 0 for f≡0 on Q
  int iterations = 0;
  double bracket_width = 0;  // final bracket width of the bisection
};

// Luxemburg norm over the cells of Q (normalized Lebesgue measure).
LuxemburgResult luxemburg_norm(const GridFunction& f, const Cube& q,
                               const YoungFunction& A);

// Span-level core used by the maximal operators: values are the cells of a
// cube in any order.
LuxemburgResult luxemburg_norm(std::span<const double> cells, double max_abs,
                               const YoungFunction& A);

// Tail constant α_p(A) = (∫_1^∞ A(t) t^{-p} dt/t)^{1/p}; +∞ when the
// integral diverges (detected from the tail profile, not sampled).
double alpha_p(const YoungFunction& A, double p);

// β_p(B) = (∫_{B(1)}^∞ (t/B̄(t))^p dB̄(t))^{1/p} with B̄ the conjugate;
// +∞ when B̄ vanishes at the lower limit (the Stieltjes integral diverges).
double beta_p(const YoungFunction& B, double p);

// κ = max over t_grid of B^{-1}(t)C^{-1}(t)/A^{-1}(t), locally refined
// around grid maxima. Returns +∞ when the ratio keeps growing across the
// top decades of the grid.
double holder_kappa(const YoungFunction& A, const YoungFunction& B,
                    const YoungFunction& C, std::span<const double> t_grid);
double holder_kappa(const YoungFunction& A, const YoungFunction& B,
                    const YoungFunction& C);

// Default grid for kappa and sandwich checks: 200 points, log-spaced over
// [1e-8, 1e8].
std::vector<double> default_t_grid();
std::vector<double> log_spaced(double lo, double hi, int count);

inline double conjugate_exponent(double p) { return p / (p - 1.0); }

}  // namespace sparsedom
