#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparsedom/dyadic.hpp"
#include "sparsedom/orlicz.hpp"

namespace sparsedom {

using CellRange = std::pair<std::uint64_t, std::uint64_t>;  // Morton [begin, end)

struct SparseCube {
  Cube cube;
  std::uint64_t begin = 0, end = 0;   // finest-cell Morton range of the cube
  std::vector<CellRange> e_ranges;    // E(Q) = Q minus strict descendants in S
  std::uint64_t e_cells = 0;
};

// A family of dyadic cubes with its E(Q) sets. The constructor computes
// E(Q) from the family; whether the packing/disjointness invariants hold
// is checked separately by is_sparse, so ill-packed families can be built
// and then rejected.
class SparseFamily {
 public:
  SparseFamily(DyadicGrid grid, std::vector<Cube> cubes);

  const DyadicGrid& grid() const { return grid_; }
  const std::vector<SparseCube>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

 private:
  DyadicGrid grid_;
  std::vector<SparseCube> members_;  // sorted by (level, Morton index)
};

struct SparseCheck {
  bool ok = true;
  std::string violation;  // description of the first failure
};

// Packing |∪ strict descendants| ≤ ½|Q|, pairwise-disjoint E(Q) ⊆ Q,
// and |Q| ≤ 2|E(Q)|.
SparseCheck is_sparse(const SparseFamily& s);

// T^S f = Σ_{Q∈S} (avg_Q f)·χ_Q, an exact finite sum.
GridFunction apply_sparse(const SparseFamily& s, const GridFunction& f);

struct CarlesonResult {
  double constant = 0;  // max over R of Σ_{Q⊆R} w(Q) / w(R)
  Cube argmax;
};

// Carleson constant of the family against a weight, the quantity bounded
// by 2[w]_{A∞} in the proof of the L¹ domination lemma.
CarlesonResult carleson_constant(const SparseFamily& s, const GridFunction& w);

struct CZDecomposition {
  std::vector<Cube> cubes;          // maximal dyadic cubes with avg|f| > λ
  std::vector<double> averages;     // avg_Q |f| per cube
  GridFunction good;                // f_Q on each Q, f elsewhere
  std::vector<GridFunction> bad;    // (f − f_Q)·χ_Q per cube
  double lambda = 0;
};

// Calderón–Zygmund decomposition at level λ. Requires λ ≥ avg_root |f|
// so the upper bound avg ≤ 2^n λ holds for every selected cube (the root
// has no parent to provide it).
CZDecomposition cz_decompose(const GridFunction& f, double lambda);

// Sparse family from iterated CZ decompositions at levels
// max(λ0, avg_root|f|)·a^k, a = 2^{n+1}+1. The construction packs at
// ratio 2^n/a < ½.
SparseFamily sparse_from_cz(const GridFunction& f, double lambda0);

struct StoppingLayer {
  int k = 0;             // ladder index
  double threshold = 0;  // a^k
  std::vector<Cube> cubes;
  std::vector<double> norms;               // ||f||_{A,Q_j^k}
  std::vector<std::vector<CellRange>> e_ranges;  // E_j^k = Q_j^k \ D_{k+1}
  std::vector<std::uint64_t> e_cells;
};

struct StoppingResult {
  double a = 0;
  std::vector<StoppingLayer> layers;  // ascending k; the lowest layer is the root layer
  double empirical_alpha = 0;         // max |Q_j^k| / |E_j^k|; +inf if some E empty
};

// Orlicz stopping-time cubes: per ladder level k, the maximal dyadic cubes
// with ||f||_{A,Q} > a^k. The k range is clamped to [largest k selecting
// the root, largest k selecting anything], which is finite on the grid.
StoppingResult stopping_cubes(const GridFunction& f, const YoungFunction& A, double a);

}  // namespace sparsedom
