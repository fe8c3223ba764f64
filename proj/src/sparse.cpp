#include "sparsedom/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sparsedom/maximal.hpp"

namespace sparsedom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// DFS selecting maximal cubes with value(level, m) > threshold.
template <typename Value>
std::vector<std::pair<int, std::uint64_t>> select_maximal(const DyadicGrid& g,
                                                          const Value& value,
                                                          double threshold) {
  std::vector<std::pair<int, std::uint64_t>> out;
  std::vector<std::pair<int, std::uint64_t>> stack{{0, 0}};
  const int L = g.depth();
  const int nd = g.dim();
  while (!stack.empty()) {
    auto [k, m] = stack.back();
    stack.pop_back();
    if (value(k, m) > threshold) {
      out.emplace_back(k, m);
      continue;
    }
    if (k == L) continue;
    for (int e = (1 << nd) - 1; e >= 0; --e)
      stack.emplace_back(k + 1, (m << nd) | std::uint64_t(e));
  }
  return out;
}

// Union of [b,e) ranges, merged and sorted.
std::vector<CellRange> merge_ranges(std::vector<CellRange> rs) {
  std::sort(rs.begin(), rs.end());
  std::vector<CellRange> out;
  for (const auto& r : rs) {
    if (r.second <= r.first) continue;
    if (!out.empty() && r.first <= out.back().second)
      out.back().second = std::max(out.back().second, r.second);
    else
      out.push_back(r);
  }
  return out;
}

// [begin,end) minus a merged union.
std::vector<CellRange> subtract_ranges(std::uint64_t begin, std::uint64_t end,
                                       const std::vector<CellRange>& holes) {
  std::vector<CellRange> out;
  std::uint64_t cur = begin;
  for (const auto& h : holes) {
    if (h.second <= begin || h.first >= end) continue;
    const std::uint64_t lo = std::max(h.first, begin);
    if (lo > cur) out.emplace_back(cur, lo);
    cur = std::max(cur, std::min(h.second, end));
  }
  if (cur < end) out.emplace_back(cur, end);
  return out;
}

std::uint64_t total_cells(const std::vector<CellRange>& rs) {
  std::uint64_t n = 0;
  for (const auto& r : rs) n += r.second - r.first;
  return n;
}

}  // namespace

SparseFamily::SparseFamily(DyadicGrid grid, std::vector<Cube> cubes) : grid_(grid) {
  std::set<std::pair<int, std::uint64_t>> seen;
  members_.reserve(cubes.size());
  for (const Cube& q : cubes) {
    grid_.require(q);
    const auto [b, e] = grid_.morton_cell_range(q);
    if (!seen.insert({q.level, b}).second) continue;
    SparseCube sc;
    sc.cube = q;
    sc.begin = b;
    sc.end = e;
    members_.push_back(sc);
  }
  std::sort(members_.begin(), members_.end(), [](const SparseCube& a, const SparseCube& b) {
    return std::pair(a.cube.level, a.begin) < std::pair(b.cube.level, b.begin);
  });
  // E(Q) = Q minus the union of strict descendants in the family.
  for (SparseCube& sc : members_) {
    std::vector<CellRange> holes;
    for (const SparseCube& other : members_) {
      const bool strict_descendant =
          other.begin >= sc.begin && other.end <= sc.end &&
          other.cube.level > sc.cube.level;
      if (strict_descendant) holes.emplace_back(other.begin, other.end);
    }
    sc.e_ranges = subtract_ranges(sc.begin, sc.end, merge_ranges(std::move(holes)));
    sc.e_cells = total_cells(sc.e_ranges);
  }
}

SparseCheck is_sparse(const SparseFamily& s) {
  SparseCheck check;
  auto fail = [&](const std::string& msg) {
    check.ok = false;
    check.violation = msg;
    return check;
  };
  std::vector<CellRange> all_e;
  for (const SparseCube& sc : s.members()) {
    const std::uint64_t cube_cells = sc.end - sc.begin;
    const std::uint64_t covered = cube_cells - sc.e_cells;
    if (2 * covered > cube_cells)
      return fail("packing violated at level " + std::to_string(sc.cube.level) +
                  ": descendants cover " + std::to_string(covered) + "/" +
                  std::to_string(cube_cells) + " cells");
    if (cube_cells > 2 * sc.e_cells)
      return fail("|Q| > 2|E(Q)| at level " + std::to_string(sc.cube.level));
    for (const auto& r : sc.e_ranges) {
      if (r.first < sc.begin || r.second > sc.end) return fail("E(Q) not inside Q");
      all_e.push_back(r);
    }
  }
  std::sort(all_e.begin(), all_e.end());
  for (std::size_t i = 1; i < all_e.size(); ++i)
    if (all_e[i].first < all_e[i - 1].second) return fail("E sets are not disjoint");
  return check;
}

GridFunction apply_sparse(const SparseFamily& s, const GridFunction& f) {
  if (s.grid() != f.grid()) throw Error("apply_sparse: grid mismatch");
  TreeView tree(f);
  std::vector<double> acc(f.size(), 0.0);
  for (const SparseCube& sc : s.members()) {
    const double avg = tree.cube_average(sc.cube.level, s.grid().morton_index(sc.cube));
    for (std::uint64_t m = sc.begin; m < sc.end; ++m) acc[m] += avg;
  }
  return GridFunction(f.grid(), tree.to_lex(acc));
}

CarlesonResult carleson_constant(const SparseFamily& s, const GridFunction& w) {
  if (s.grid() != w.grid()) throw Error("carleson_constant: grid mismatch");
  for (double v : w.values())
    if (v < 0) throw Error("carleson_constant: w must be nonnegative");
  TreeView tree(w);
  if (!(tree.cube_sum(0, 0) > 0)) throw Error("carleson_constant: w vanishes");

  // w(Q) per member, by Morton containment against each candidate R.
  struct Term {
    std::uint64_t begin, end;
    double mass;
  };
  std::vector<Term> terms;
  terms.reserve(s.size());
  for (const SparseCube& sc : s.members())
    terms.push_back({sc.begin, sc.end,
                     tree.cube_sum(sc.cube.level, s.grid().morton_index(sc.cube))});

  CarlesonResult res;
  res.constant = 0;
  auto consider = [&](const Cube& r, std::uint64_t rb, std::uint64_t re, double rmass) {
    if (!(rmass > 0)) return;
    double sum = 0;
    for (const Term& t : terms)
      if (t.begin >= rb && t.end <= re) sum += t.mass;
    if (sum / rmass > res.constant) {
      res.constant = sum / rmass;
      res.argmax = r;
    }
  };
  consider(s.grid().root(), 0, s.grid().cell_count(), tree.cube_sum(0, 0));
  for (const SparseCube& sc : s.members())
    consider(sc.cube, sc.begin, sc.end,
             tree.cube_sum(sc.cube.level, s.grid().morton_index(sc.cube)));
  return res;
}

CZDecomposition cz_decompose(const GridFunction& f, double lambda) {
  if (!(lambda > 0)) throw Error("cz_decompose: lambda must be positive");
  TreeView tree(f);
  const DyadicGrid& g = f.grid();
  const double root_avg = tree.cube_abs_average(0, 0);
  if (root_avg > lambda)
    throw Error("cz_decompose: lambda is below the root average of |f|");

  auto abs_avg = [&](int k, std::uint64_t m) { return tree.cube_abs_average(k, m); };
  const auto picks = select_maximal(g, abs_avg, lambda);

  std::vector<Cube> cubes;
  std::vector<double> averages;
  std::vector<GridFunction> bad;
  std::vector<double> good_morton = tree.morton_values();
  for (const auto& [k, m] : picks) {
    const Cube q = g.cube_from_morton(k, m);
    cubes.push_back(q);
    averages.push_back(tree.cube_abs_average(k, m));
    const double mean = tree.cube_average(k, m);  // signed average
    const auto [b, e] = g.morton_cell_range(q);
    std::vector<double> bad_morton(f.size(), 0.0);
    for (std::uint64_t i = b; i < e; ++i) {
      bad_morton[i] = tree.morton_values()[i] - mean;
      good_morton[i] = mean;
    }
    bad.emplace_back(g, tree.to_lex(bad_morton));
  }
  return CZDecomposition{std::move(cubes), std::move(averages),
                         GridFunction(g, tree.to_lex(good_morton)), std::move(bad),
                         lambda};
}

SparseFamily sparse_from_cz(const GridFunction& f, double lambda0) {
  if (!(lambda0 > 0)) throw Error("sparse_from_cz: lambda0 must be positive");
  if (f.max_abs() == 0) throw Error("sparse_from_cz: f vanishes identically");
  TreeView tree(f);
  const DyadicGrid& g = f.grid();
  const double a = double((std::uint64_t(1) << (g.dim() + 1)) + 1);
  double level = std::max(lambda0, tree.cube_abs_average(0, 0));
  const double top = f.max_abs();

  std::vector<Cube> cubes;
  auto abs_avg = [&](int k, std::uint64_t m) { return tree.cube_abs_average(k, m); };
  while (level < top) {
    for (const auto& [k, m] : select_maximal(g, abs_avg, level))
      cubes.push_back(g.cube_from_morton(k, m));
    level *= a;
  }
  return SparseFamily(g, std::move(cubes));
}

StoppingResult stopping_cubes(const GridFunction& f, const YoungFunction& A, double a) {
  const DyadicGrid& g = f.grid();
  if (!(a > double(std::uint64_t(1) << (g.dim() + 1))))
    throw Error("stopping_cubes: requires a > 2^{n+1}");

  const auto norms = detail::cube_norms_cached(f, A);
  StoppingResult res;
  res.a = a;
  res.empirical_alpha = 0;

  double top = 0;
  for (const auto& lvl : norms)
    for (double v : lvl) top = std::max(top, v);
  const double root_norm = norms[0][0];
  if (!(top > 0)) return res;

  // Largest k with a^k < x, robust to rounding at the boundaries.
  auto ladder_floor = [&](double x) {
    int k = int(std::floor(std::log(x) / std::log(a)));
    while (std::pow(a, k) >= x) --k;
    while (std::pow(a, k + 1) < x) ++k;
    return k;
  };
  const int k_lo = ladder_floor(root_norm > 0 ? root_norm : top);
  const int k_hi = ladder_floor(top);

  auto norm_at = [&](int k, std::uint64_t m) { return norms[k][m]; };
  for (int k = k_lo; k <= k_hi; ++k) {
    const double threshold = std::pow(a, k);
    StoppingLayer layer;
    layer.k = k;
    layer.threshold = threshold;
    for (const auto& [lvl, m] : select_maximal(g, norm_at, threshold)) {
      layer.cubes.push_back(g.cube_from_morton(lvl, m));
      layer.norms.push_back(norms[lvl][m]);
    }
    res.layers.push_back(std::move(layer));
  }

  // E_j^k = Q_j^k \ D_{k+1}.
  for (std::size_t i = 0; i < res.layers.size(); ++i) {
    StoppingLayer& layer = res.layers[i];
    std::vector<CellRange> next;
    if (i + 1 < res.layers.size())
      for (const Cube& q : res.layers[i + 1].cubes) next.push_back(g.morton_cell_range(q));
    next = merge_ranges(std::move(next));
    for (const Cube& q : layer.cubes) {
      const auto [b, e] = g.morton_cell_range(q);
      auto er = subtract_ranges(b, e, next);
      const std::uint64_t ec = total_cells(er);
      layer.e_ranges.push_back(std::move(er));
      layer.e_cells.push_back(ec);
      res.empirical_alpha =
          ec == 0 ? kInf : std::max(res.empirical_alpha, double(e - b) / double(ec));
    }
  }
  return res;
}

}  // namespace sparsedom
