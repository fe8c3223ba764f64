#include "sparsedom/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <map>
#include <memory>
#include <mutex>

namespace sparsedom {

namespace {

// Top-down tree pass: out[m] = max over the ancestor chain of per-cube
// values, recorded together with the shallowest level achieving it.
void max_over_ancestors(const DyadicGrid& grid,
                        const std::vector<std::vector<double>>& cube_value,
                        std::vector<double>& cell_max, std::vector<int>& cell_arg) {
  const int L = grid.depth();
  const int kids = 1 << grid.dim();
  const std::uint64_t n = grid.cell_count();
  cell_max.assign(n, 0.0);
  cell_arg.assign(n, 0);

  struct Frame {
    int level;
    std::uint64_t m;
    double best;
    int arg;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0, cube_value[0][0], 0});
  while (!stack.empty()) {
    Frame fr = stack.back();
    stack.pop_back();
    if (fr.level == L) {
      cell_max[fr.m] = fr.best;
      cell_arg[fr.m] = fr.arg;
      continue;
    }
    for (int e = kids - 1; e >= 0; --e) {
      const std::uint64_t c = (fr.m << grid.dim()) | std::uint64_t(e);
      const double v = cube_value[fr.level + 1][c];
      Frame next{fr.level + 1, c, fr.best, fr.arg};
      if (v > fr.best) {
        next.best = v;
        next.arg = fr.level + 1;
      }
      stack.push_back(next);
    }
  }
}

MaximalResult assemble(const TreeView& tree, const std::vector<double>& cell_max_morton,
                       const std::vector<int>& arg_morton, std::string op) {
  const auto& perm = tree.lex_of_morton();
  std::vector<double> out(cell_max_morton.size());
  std::vector<int> arg(arg_morton.size());
  for (std::uint64_t m = 0; m < cell_max_morton.size(); ++m) {
    out[perm[m]] = cell_max_morton[m];
    arg[perm[m]] = arg_morton[m];
  }
  return MaximalResult{GridFunction(tree.grid(), std::move(out)), std::move(op),
                       std::move(arg)};
}

}  // namespace

MaximalResult dyadic_maximal(const GridFunction& f) {
  TreeView tree(f);
  const DyadicGrid& g = tree.grid();
  const int L = g.depth();
  std::vector<std::vector<double>> avg(L + 1);
  for (int k = 0; k <= L; ++k) {
    const std::uint64_t cnt = g.cube_count(k);
    avg[k].resize(cnt);
    for (std::uint64_t m = 0; m < cnt; ++m) avg[k][m] = tree.cube_abs_average(k, m);
  }
  std::vector<double> cell_max;
  std::vector<int> arg;
  max_over_ancestors(g, avg, cell_max, arg);
  return assemble(tree, cell_max, arg, "M");
}

namespace detail {

std::vector<std::vector<double>> cube_norms(const TreeView& tree,
                                            const YoungFunction& A) {
  const DyadicGrid& g = tree.grid();
  const int L = g.depth();
  std::vector<std::vector<double>> norms(L + 1);
  for (int k = 0; k <= L; ++k) {
    const std::uint64_t cnt = g.cube_count(k);
    norms[k].resize(cnt);
    for (std::uint64_t m = 0; m < cnt; ++m) {
      const auto span = tree.cell_span(k, m);
      norms[k][m] = luxemburg_norm(span, tree.cube_max_abs(k, m), A).value;
    }
  }
  return norms;
}

namespace {

// Keyed by (content hash of grid+values, young spec); entries are immutable
// once published. Bounded FIFO so long sweeps do not grow without limit.
struct NormCache {
  std::mutex mu;
  std::map<std::string, std::shared_ptr<const std::vector<std::vector<double>>>> map;
  std::list<std::string> order;
  static constexpr std::size_t kCap = 64;
};

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string cache_key(const GridFunction& f, const YoungFunction& A) {
  std::uint64_t h = 1469598103934665603ull;
  const DyadicGrid& g = f.grid();
  const int dims[2] = {g.dim(), g.depth()};
  h = fnv1a(dims, sizeof dims, h);
  const double geo[4] = {g.origin()[0], g.origin()[1], g.origin()[2], g.side()};
  h = fnv1a(geo, sizeof geo, h);
  h = fnv1a(f.values().data(), f.values().size() * sizeof(double), h);
  return std::to_string(h) + "|" + A.spec();
}

}  // namespace

std::vector<std::vector<double>> cube_norms_cached(const GridFunction& f,
                                                   const YoungFunction& A) {
  static NormCache cache;
  const std::string key = cache_key(f, A);
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    auto it = cache.map.find(key);
    if (it != cache.map.end()) return *it->second;
  }
  TreeView tree(f);
  auto built = std::make_shared<const std::vector<std::vector<double>>>(
      cube_norms(tree, A));
  std::lock_guard<std::mutex> lock(cache.mu);
  auto [it, inserted] = cache.map.emplace(key, built);
  if (inserted) {
    cache.order.push_back(key);
    if (cache.order.size() > NormCache::kCap) {
      cache.map.erase(cache.order.front());
      cache.order.pop_front();
    }
  }
  return *it->second;
}

}  // namespace detail

MaximalResult orlicz_maximal(const GridFunction& f, const YoungFunction& A) {
  TreeView tree(f);
  const auto norms = detail::cube_norms_cached(f, A);
  std::vector<double> cell_max;
  std::vector<int> arg;
  max_over_ancestors(tree.grid(), norms, cell_max, arg);
  return assemble(tree, cell_max, arg, "M_A");
}

MaximalResult restricted_maximal(const GridFunction& f,
                                 const std::vector<std::uint8_t>& mask,
                                 const YoungFunction& A) {
  if (mask.size() != f.size()) throw Error("restricted_maximal: mask size mismatch");
  std::vector<double> vals(f.values());
  for (std::uint64_t i = 0; i < vals.size(); ++i)
    if (!mask[i]) vals[i] = 0.0;
  MaximalResult res = orlicz_maximal(GridFunction(f.grid(), std::move(vals)), A);
  res.op = "M_A|E";
  return res;
}

std::vector<DistributionRow> distribution_check(const GridFunction& f,
                                                const YoungFunction& A,
                                                std::span<const double> t_levels) {
  for (double v : f.values())
    if (v < 0) throw Error("distribution_check: requires f >= 0");
  const MaximalResult mx = orlicz_maximal(f, A);
  const double cell_vol = f.grid().cell_volume();
  std::vector<DistributionRow> rows;
  rows.reserve(t_levels.size());
  for (double t : t_levels) {
    if (!(t > 0)) throw Error("distribution_check: t levels must be positive");
    DistributionRow row;
    row.t = t;
    std::uint64_t count = 0;
    for (double v : mx.output.values())
      if (v > t) ++count;
    row.level_set_measure = double(count) * cell_vol;
    double integral = 0;
    for (double v : f.values()) integral += A.evaluate(v / t);
    row.integral = integral * cell_vol;
    row.holds = row.level_set_measure <= row.integral * (1 + 1e-9) + 1e-300;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sparsedom
