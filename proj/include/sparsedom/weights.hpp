#pragma once

#include <map>
#include <string>
#include <vector>

#include "sparsedom/dyadic.hpp"
#include "sparsedom/orlicz.hpp"

namespace sparsedom {

struct ConstantResult {
  double value = 0;  // may be +inf
  Cube argmax;
};

// A1 constant: max over finest cells of M^d w / w (+inf on zero cells).
ConstantResult a1_constant(const GridFunction& w);

// Ap constant: max over all dyadic cubes of (avg_Q w)(avg_Q w^{1-p'})^{p-1}.
ConstantResult ap_constant(const GridFunction& w, double p);

// Fujii–Wilson A∞ constant, dyadic: max over cubes Q with w(Q) > 0 of
// (1/w(Q)) ∫_Q M^d(w χ_Q), the inner maximal restricted to subcubes of Q.
ConstantResult ainfty_constant(const GridFunction& w);

struct ReverseHolderReport {
  double ainfty = 0;
  double tau = 0;
  double r_w = 0;          // 1 + 1/(tau·ainfty)
  double max_ratio = 0;    // max_Q (avg_Q w^{r_w})^{1/r_w} / avg_Q w
  Cube argmax;
  bool pass = false;       // max_ratio <= 2 (1e-9 slack)
  double minimal_tau = 0;  // smallest tau making the check pass (bisected)
};

// find_minimal_tau adds a bisection over tau (an extra ~100 scans); skip
// it in corpus-wide loops that only assert the frozen tau.
ReverseHolderReport reverse_holder_check(const GridFunction& w, double tau,
                                         bool find_minimal_tau = true);

struct CoifmanRochbergReport {
  double gamma = 0;
  double a1_main = 0;                         // [ (M_A u)^γ ]_{A1} for the given A
  std::map<std::string, double> a1_by_family; // same u across the built-in families
  double envelope = 0;                        // max of the measured constants
  double envelope_min = 0;
  bool all_finite = false;
};

// Measures the A1 constant of (M_A u)^γ and its spread across the built-in
// Young families; the bound is A-independent, so the spread stays within a
// dimensional factor.
CoifmanRochbergReport coifman_rochberg_check(const GridFunction& u,
                                             const YoungFunction& A, double gamma);

struct FactorizationReport {
  double lhs = 0;  // [w1 w2^{1-p}]_{Ap}
  double rhs = 0;  // [w1]_{A1} [w2]_{A1}^{p-1}
  bool pass = false;
};

FactorizationReport factorization_check(const GridFunction& w1, const GridFunction& w2,
                                        double p);

}  // namespace sparsedom
