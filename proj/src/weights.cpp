#include "sparsedom/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsedom/maximal.hpp"

namespace sparsedom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_weight(const GridFunction& w, const char* who) {
  for (double v : w.values())
    if (v < 0) throw Error(std::string(who) + ": weight must be nonnegative");
}

// max over cubes of value(level, m), with the argmax cube.
template <typename Value>
ConstantResult max_over_cubes(const DyadicGrid& g, const Value& value) {
  ConstantResult res;
  res.value = -kInf;
  for (int k = 0; k <= g.depth(); ++k) {
    const std::uint64_t cnt = g.cube_count(k);
    for (std::uint64_t m = 0; m < cnt; ++m) {
      const double v = value(k, m);
      if (v > res.value) {
        res.value = v;
        res.argmax = g.cube_from_morton(k, m);
      }
    }
  }
  return res;
}

}  // namespace

ConstantResult a1_constant(const GridFunction& w) {
  require_weight(w, "a1_constant");
  if (w.max_abs() == 0) throw Error("a1_constant: w vanishes identically");
  const MaximalResult mx = dyadic_maximal(w);
  ConstantResult res;
  res.value = 0;
  const DyadicGrid& g = w.grid();
  for (std::uint64_t i = 0; i < w.size(); ++i) {
    const double denom = w.value(i);
    const double ratio = denom > 0 ? mx.output.value(i) / denom : kInf;
    if (ratio > res.value) {
      res.value = ratio;
      res.argmax = g.cube_at(g.depth(), i);
    }
  }
  return res;
}

ConstantResult ap_constant(const GridFunction& w, double p) {
  if (!(p > 1)) throw Error("ap_constant: requires p > 1");
  require_weight(w, "ap_constant");
  for (double v : w.values())
    if (v == 0) {
      ConstantResult res;
      res.value = kInf;
      return res;
    }
  const double dual_exp = 1 - conjugate_exponent(p);  // 1 - p'
  TreeView tw(w);
  TreeView tdual(pointwise(w, [&](double v) { return std::pow(v, dual_exp); }));
  return max_over_cubes(w.grid(), [&](int k, std::uint64_t m) {
    return tw.cube_average(k, m) * std::pow(tdual.cube_average(k, m), p - 1);
  });
}

ConstantResult ainfty_constant(const GridFunction& w) {
  require_weight(w, "ainfty_constant");
  TreeView tree(w);
  if (!(tree.cube_sum(0, 0) > 0)) throw Error("ainfty_constant: w vanishes");
  const DyadicGrid& g = w.grid();
  const int L = g.depth();
  const int nd = g.dim();

  // For each cube Q: ∫_Q M^d(w χ_Q) with the maximal localized to subcubes
  // of Q, via one subtree pass carrying the running ancestor max.
  ConstantResult res;
  res.value = 0;
  struct Frame {
    int level;
    std::uint64_t m;
    double best;
  };
  std::vector<Frame> stack;
  for (int k = 0; k <= L; ++k) {
    const std::uint64_t cnt = g.cube_count(k);
    for (std::uint64_t q = 0; q < cnt; ++q) {
      const double mass = tree.cube_sum(k, q);
      if (!(mass > 0)) continue;
      double integral_cells = 0;  // Σ over cells of the local maximal, in cell units
      stack.clear();
      stack.push_back({k, q, tree.cube_average(k, q)});
      while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.level == L) {
          integral_cells += fr.best;
          continue;
        }
        for (int e = (1 << nd) - 1; e >= 0; --e) {
          const std::uint64_t c = (fr.m << nd) | std::uint64_t(e);
          stack.push_back(
              {fr.level + 1, c, std::max(fr.best, tree.cube_average(fr.level + 1, c))});
        }
      }
      // (1/w(Q)) ∫_Q ... ; cell volume cancels against the mass in cell units.
      const double ratio = integral_cells / mass;
      if (ratio > res.value) {
        res.value = ratio;
        res.argmax = g.cube_from_morton(k, q);
      }
    }
  }
  return res;
}

namespace {

struct RhScan {
  double max_ratio;
  Cube argmax;
};

RhScan reverse_holder_scan(const GridFunction& w, const TreeView& tw, double r) {
  TreeView tpow(pointwise(w, [&](double v) { return std::pow(v, r); }));
  RhScan scan{0, Cube{}};
  const DyadicGrid& g = w.grid();
  for (int k = 0; k <= g.depth(); ++k) {
    const std::uint64_t cnt = g.cube_count(k);
    for (std::uint64_t m = 0; m < cnt; ++m) {
      const double base = tw.cube_average(k, m);
      if (!(base > 0)) continue;
      const double lhs = std::pow(tpow.cube_average(k, m), 1 / r);
      const double ratio = lhs / base;
      if (ratio > scan.max_ratio) {
        scan.max_ratio = ratio;
        scan.argmax = g.cube_from_morton(k, m);
      }
    }
  }
  return scan;
}

}  // namespace

ReverseHolderReport reverse_holder_check(const GridFunction& w, double tau,
                                         bool find_minimal_tau) {
  if (!(tau > 0)) throw Error("reverse_holder_check: tau must be positive");
  require_weight(w, "reverse_holder_check");
  ReverseHolderReport rep;
  rep.tau = tau;
  rep.ainfty = ainfty_constant(w).value;
  rep.r_w = 1 + 1 / (tau * rep.ainfty);
  TreeView tw(w);
  const RhScan scan = reverse_holder_scan(w, tw, rep.r_w);
  rep.max_ratio = scan.max_ratio;
  rep.argmax = scan.argmax;
  rep.pass = rep.max_ratio <= 2 * (1 + 1e-9);
  if (!find_minimal_tau) return rep;

  // Smallest tau with max_ratio <= 2; the pass-set is upward closed since
  // the power mean is nondecreasing in the exponent.
  auto passes = [&](double t) {
    const double r = 1 + 1 / (t * rep.ainfty);
    return reverse_holder_scan(w, tw, r).max_ratio <= 2 * (1 + 1e-9);
  };
  double hi = std::max(tau, 1.0);
  int guard = 0;
  while (!passes(hi) && guard++ < 60) hi *= 2;
  if (guard >= 60) {
    rep.minimal_tau = kInf;
    return rep;
  }
  double lo = hi;
  while (lo > 1e-9 && passes(lo * 0.5)) lo *= 0.5;
  // invariant: passes(lo); bisect on [lo/1, hi] only if lo == hi was shrunk
  double fail_lo = lo * 0.5;
  for (int i = 0; i < 50 && (lo - fail_lo) > 1e-3 * lo; ++i) {
    const double mid = 0.5 * (fail_lo + lo);
    (passes(mid) ? lo : fail_lo) = mid;
  }
  rep.minimal_tau = lo;
  return rep;
}

CoifmanRochbergReport coifman_rochberg_check(const GridFunction& u,
                                             const YoungFunction& A, double gamma) {
  if (!(gamma > 0 && gamma < 1)) throw Error("coifman_rochberg_check: gamma in (0,1)");
  if (u.max_abs() == 0) throw Error("coifman_rochberg_check: u vanishes identically");
  CoifmanRochbergReport rep;
  rep.gamma = gamma;
  auto measure = [&](const YoungFunction& B) {
    const MaximalResult mb = orlicz_maximal(u, B);
    const GridFunction pow_g =
        pointwise(mb.output, [&](double v) { return std::pow(v, gamma); }, true);
    return a1_constant(pow_g).value;
  };
  rep.a1_main = measure(A);
  const std::vector<YoungFunction> families = {
      YoungFunction::power(1),        YoungFunction::power(2),
      YoungFunction::scaled_power(2), YoungFunction::eps_bump(0.5),
      YoungFunction::log_bump(2, 1.5), YoungFunction::loglog_bump(2, 1.5)};
  rep.envelope = 0;
  rep.envelope_min = kInf;
  rep.all_finite = std::isfinite(rep.a1_main);
  for (const YoungFunction& B : families) {
    const double c = measure(B);
    rep.a1_by_family[B.spec()] = c;
    rep.envelope = std::max(rep.envelope, c);
    rep.envelope_min = std::min(rep.envelope_min, c);
    rep.all_finite = rep.all_finite && std::isfinite(c);
  }
  return rep;
}

FactorizationReport factorization_check(const GridFunction& w1, const GridFunction& w2,
                                        double p) {
  if (!(p > 1)) throw Error("factorization_check: requires p > 1");
  if (w1.grid() != w2.grid()) throw Error("factorization_check: grid mismatch");
  for (std::uint64_t i = 0; i < w1.size(); ++i)
    if (!(w1.value(i) > 0) || !(w2.value(i) > 0))
      throw Error("factorization_check: weights must be strictly positive");
  const GridFunction w = pointwise(
      w1, w2, [&](double a, double b) { return a * std::pow(b, 1 - p); }, true);
  FactorizationReport rep;
  rep.lhs = ap_constant(w, p).value;
  rep.rhs = a1_constant(w1).value * std::pow(a1_constant(w2).value, p - 1);
  rep.pass = rep.lhs <= rep.rhs * (1 + 1e-9);
  return rep;
}

}  // namespace sparsedom
