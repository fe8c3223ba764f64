#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsedom/dyadic.hpp"
#include "sparsedom/orlicz.hpp"

namespace sparsedom {

// Result of a dyadic maximal operator: the output function plus, per finest
// cell, the level of the ancestor cube that achieved the supremum.
struct MaximalResult {
  GridFunction output;
  std::string op;                 // "M", "M_A", "M_r"
  std::vector<int> argmax_level;  // lexicographic cell order
};

// Dyadic Hardy–Littlewood maximal function: per cell, the maximum of
// avg_Q |f| over the ancestor chain, in one top-down pass.
MaximalResult dyadic_maximal(const GridFunction& f);

// Orlicz maximal M_A f(x) = sup_{Q ∋ x} ||f||_{A,Q}, dyadic ancestors only.
// Per-cube Luxemburg norms are cached across calls keyed by (function
// content, young spec).
MaximalResult orlicz_maximal(const GridFunction& f, const YoungFunction& A);

// M_A of f·χ_E for a finest-cell mask E (lexicographic order).
MaximalResult restricted_maximal(const GridFunction& f,
                                 const std::vector<std::uint8_t>& mask,
                                 const YoungFunction& A);

// One row of the distributional estimate |{M_A f > t}| ≤ ∫ A(f/t) dx,
// which holds with constant exactly 1 for the dyadic operator.
struct DistributionRow {
  double t = 0;
  double level_set_measure = 0;  // |{M_A f > t}|
  double integral = 0;           // ∫ A(f/t) dx
  bool holds = false;            // level_set_measure <= integral (1e-9 slack)
};

std::vector<DistributionRow> distribution_check(const GridFunction& f,
                                                const YoungFunction& A,
                                                std::span<const double> t_levels);

namespace detail {
// All Luxemburg norms by cube, Morton order per level; shared by the
// maximal operators and the stopping-time construction.
std::vector<std::vector<double>> cube_norms(const TreeView& tree,
                                            const YoungFunction& A);
std::vector<std::vector<double>> cube_norms_cached(const GridFunction& f,
                                                   const YoungFunction& A);
}  // namespace detail

}  // namespace sparsedom
