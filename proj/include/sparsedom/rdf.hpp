#pragma once

#include "sparsedom/dyadic.hpp"

namespace sparsedom {

// S(f) = M^d(f v^{1/s}) / v^{1/s}; v must be strictly positive.
GridFunction s_operator(const GridFunction& f, const GridFunction& v, double s);

struct RdFResult {
  GridFunction majorant;    // R(h)
  int truncation = 0;       // K: number of iterated terms beyond k = 0
  double s_norm_bound = 0;  // the frozen ||S|| used in the denominators (= s')
  double norm_h = 0;        // ||h||_{L^s(v)}
  double norm_r = 0;        // ||R(h)||_{L^s(v)}
  double a1_of_majorant = 0;  // [R(h) v^{1/s}]_{A1}
};

// Rubio de Francia iteration R(h) = Σ_k 2^{-k} S^k(h) / s'^k, truncated
// once the geometric tail bound drops below tol in L^s(v). Dyadically
// ||S||_{L^s(v)} ≤ s' (Doob), so every normalized term has norm ≤ ||h||.
RdFResult rdf_build(const GridFunction& h, const GridFunction& v, double s,
                    double tol = 1e-10);

}  // namespace sparsedom
