#include <cmath>
#include <sstream>

#include "sparsedom/verify.hpp"

namespace sparsedom {

namespace {

// Bit-stable uniform helpers on top of a fixed-algorithm engine; the
// standard distributions are not pinned across library implementations.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {  // splitmix64
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

void normalize_mean(std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  if (s <= 0) return;
  const double scale = double(v.size()) / s;
  for (double& x : v) x *= scale;
}

// Multiplicative cascade: descend the tree multiplying by factors drawn
// log-uniformly in [1/m, m]; the A∞ constant grows with m and depth.
std::vector<double> cascade_weight(const DyadicGrid& g, double m, Rng& rng) {
  const int L = g.depth();
  const int nd = g.dim();
  std::vector<double> level{1.0};
  for (int k = 0; k < L; ++k) {
    std::vector<double> next(level.size() << nd);
    for (std::size_t parent = 0; parent < level.size(); ++parent)
      for (int e = 0; e < (1 << nd); ++e)
        next[(parent << nd) | std::size_t(e)] =
            level[parent] * (m > 1 ? rng.log_uniform(1 / m, m) : 1.0);
    level = std::move(next);
  }
  normalize_mean(level);
  // level is in Morton order; scatter to lexicographic.
  const auto perm = g.lex_of_morton();
  std::vector<double> out(level.size());
  for (std::size_t mi = 0; mi < level.size(); ++mi) out[perm[mi]] = level[mi];
  return out;
}

// (dist to a random pole + cell side)^a with a in (-0.9n, 3].
std::vector<double> power_weight(const DyadicGrid& g, Rng& rng) {
  const double a = rng.uniform(-0.9 * g.dim() * 0.95, 3.0);
  std::array<double, 3> pole{};
  for (int d = 0; d < g.dim(); ++d)
    pole[d] = g.origin()[d] + g.side() * rng.uniform();
  const double h = g.cube_side(g.depth());
  std::vector<double> out(g.cell_count());
  for (std::uint64_t i = 0; i < out.size(); ++i) {
    const auto c = g.cell_center(i);
    double d2 = 0;
    for (int d = 0; d < g.dim(); ++d) d2 += (c[d] - pole[d]) * (c[d] - pole[d]);
    out[i] = std::pow(std::sqrt(d2) + h, a);
  }
  normalize_mean(out);
  return out;
}

std::vector<double> spike_function(const DyadicGrid& g, Rng& rng) {
  std::vector<double> out(g.cell_count(), 0.0);
  out[rng.below(out.size())] = rng.log_uniform(1, 100);
  return out;
}

std::vector<double> heavy_tail_function(const DyadicGrid& g, Rng& rng) {
  const double alpha = rng.uniform(1.2, 3.0);
  std::vector<double> out(g.cell_count());
  for (double& x : out) x = std::pow(1 - rng.uniform(), -1 / alpha) - 0.5;
  normalize_mean(out);
  return out;
}

}  // namespace

CorpusSpec CorpusSpec::parse(const std::string& kv) {
  CorpusSpec spec;
  std::istringstream ss(kv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error("corpus spec: expected key=value in '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "n")
      spec.dim = std::stoi(val);
    else if (key == "depth")
      spec.depth = std::stoi(val);
    else if (key == "count")
      spec.count = std::stoi(val);
    else if (key == "mix")
      spec.mix = val;
    else if (key == "m")
      spec.cascade_m = std::stod(val);
    else if (key == "twoweight")
      spec.two_weight = val == "1" || val == "true";
    else
      throw Error("corpus spec: unknown key '" + key + "'");
  }
  return spec;
}

std::string CorpusSpec::to_string() const {
  std::string s = "n=" + std::to_string(dim) + ",depth=" + std::to_string(depth) +
                  ",count=" + std::to_string(count) + ",mix=" + mix +
                  ",m=" + format_double(cascade_m);
  if (two_weight) s += ",twoweight=1";
  return s;
}

std::vector<Instance> corpus_generate(std::uint64_t seed, const CorpusSpec& spec) {
  if (spec.mix != "standard" && spec.mix != "cascade" && spec.mix != "power" &&
      spec.mix != "spike" && spec.mix != "degenerate")
    throw Error("corpus spec: unknown mix '" + spec.mix + "'");
  DyadicGrid grid(spec.dim, spec.depth);
  std::vector<Instance> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(seed * 0x51f15eed5ull + std::uint64_t(i) * 0x9e3779b97f4a7c15ull + 17);

    const bool cascade_w = spec.mix == "cascade" || spec.mix == "degenerate" ||
                           (spec.mix == "standard" && i % 2 == 0) ||
                           spec.mix == "spike";
    const double m = spec.cascade_m;
    std::vector<double> wv = cascade_w ? cascade_weight(grid, m, rng) : power_weight(grid, rng);

    const bool spike_f = spec.mix == "spike" || i % 3 == 0;
    std::vector<double> fv = spike_f ? spike_function(grid, rng) : heavy_tail_function(grid, rng);

    Instance inst{
        "seed=" + std::to_string(seed) + ":i=" + std::to_string(i) + ":" +
            spec.to_string(),
        GridFunction(grid, std::move(fv)),
        GridFunction(grid, wv, true),
        std::nullopt,
        false,
    };
    if (spec.mix == "degenerate") {
      wv[rng.below(wv.size())] = 0.0;
      inst.w = GridFunction(grid, std::move(wv), true);
      inst.degenerate = true;
    }
    if (spec.two_weight) {
      std::vector<double> sv =
          (i % 2 == 0) ? power_weight(grid, rng) : cascade_weight(grid, m, rng);
      inst.sigma = GridFunction(grid, std::move(sv), true);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

SparseFamily family_for(const GridFunction& f) {
  TreeView tree(f);
  const double root_avg = tree.cube_abs_average(0, 0);
  if (!(root_avg > 0)) throw Error("family_for: f vanishes identically");
  return sparse_from_cz(f, root_avg * 1.5);
}

}  // namespace sparsedom
