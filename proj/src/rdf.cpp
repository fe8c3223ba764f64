#include "sparsedom/rdf.hpp"

#include <cmath>

#include "sparsedom/maximal.hpp"
#include "sparsedom/orlicz.hpp"
#include "sparsedom/weights.hpp"

namespace sparsedom {

namespace {

void require_positive(const GridFunction& v, const char* who) {
  for (double x : v.values())
    if (!(x > 0)) throw Error(std::string(who) + ": v must be strictly positive");
}

double weighted_s_norm(const GridFunction& f, const GridFunction& v, double s) {
  double acc = 0;
  for (std::uint64_t i = 0; i < f.size(); ++i)
    acc += std::pow(std::abs(f.value(i)), s) * v.value(i);
  return std::pow(acc * f.grid().cell_volume(), 1 / s);
}

}  // namespace

GridFunction s_operator(const GridFunction& f, const GridFunction& v, double s) {
  if (!(s > 1)) throw Error("s_operator: requires s > 1");
  if (f.grid() != v.grid()) throw Error("s_operator: grid mismatch");
  require_positive(v, "s_operator");
  const GridFunction vpow = pointwise(v, [&](double x) { return std::pow(x, 1 / s); });
  const GridFunction m = dyadic_maximal(pointwise(f, vpow, std::multiplies<double>())).output;
  return pointwise(m, vpow, std::divides<double>());
}

RdFResult rdf_build(const GridFunction& h, const GridFunction& v, double s, double tol) {
  if (!(s > 1)) throw Error("rdf_build: requires s > 1");
  if (!(tol > 0)) throw Error("rdf_build: tol must be positive");
  if (h.grid() != v.grid()) throw Error("rdf_build: grid mismatch");
  for (double x : h.values())
    if (x < 0) throw Error("rdf_build: h must be nonnegative");
  require_positive(v, "rdf_build");

  const double sprime = conjugate_exponent(s);
  const double norm_h = weighted_s_norm(h, v, s);

  std::vector<double> acc(h.values());
  GridFunction term = h;
  int k = 0;
  // Tail of the series after K terms is at most 2^{-K}·||h|| in L^s(v).
  while (norm_h > 0 && std::ldexp(norm_h, -k) >= tol && k < 80) {
    ++k;
    term = s_operator(term, v, s);
    const double scale = 1.0 / (2 * sprime);
    std::vector<double> scaled(term.values());
    for (double& x : scaled) x *= scale;
    term = GridFunction(h.grid(), std::move(scaled));
    for (std::uint64_t i = 0; i < acc.size(); ++i) acc[i] += term.value(i);
  }

  RdFResult res{GridFunction(h.grid(), std::move(acc)), k, sprime, norm_h, 0, 0};
  res.norm_r = weighted_s_norm(res.majorant, v, s);
  if (h.max_abs() > 0) {
    const GridFunction vpow = pointwise(v, [&](double x) { return std::pow(x, 1 / s); });
    const GridFunction prod =
        pointwise(res.majorant, vpow, std::multiplies<double>(), true);
    res.a1_of_majorant = a1_constant(prod).value;
  }
  return res;
}

}  // namespace sparsedom
