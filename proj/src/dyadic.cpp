#include "sparsedom/dyadic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sparsedom {

Cube parent(const Cube& q) {
  if (q.level == 0) throw Error("root cube has no parent");
  Cube p;
  p.level = q.level - 1;
  for (int d = 0; d < 3; ++d) p.idx[d] = q.idx[d] >> 1;
  return p;
}

bool contains(const Cube& outer, const Cube& inner, int dim) {
  if (outer.level > inner.level) return false;
  const int shift = inner.level - outer.level;
  for (int d = 0; d < dim; ++d)
    if ((inner.idx[d] >> shift) != outer.idx[d]) return false;
  return true;
}

DyadicGrid::DyadicGrid(int dim, int depth, std::array<double, 3> origin, double side)
    : dim_(dim), depth_(depth), origin_(origin), side_(side) {
  if (dim < 1 || dim > 3) throw Error("grid dimension must be 1, 2 or 3");
  if (depth < 0) throw Error("grid depth must be nonnegative");
  if (!(side > 0) || !std::isfinite(side)) throw Error("root side must be positive");
  if (std::uint64_t(dim) * std::uint64_t(depth) > 24)
    throw Error("grid too large: 2^(n*depth) cells exceeds 2^24");
  for (int d = dim; d < 3; ++d) origin_[d] = 0.0;
}

std::uint64_t DyadicGrid::cube_count(int level) const {
  if (level < 0 || level > depth_) throw Error("level out of range");
  return std::uint64_t(1) << (dim_ * level);
}

double DyadicGrid::cell_volume() const { return cube_volume(depth_); }

double DyadicGrid::cube_side(int level) const {
  return side_ * std::ldexp(1.0, -level);
}

double DyadicGrid::cube_volume(int level) const {
  return std::pow(cube_side(level), dim_);
}

bool DyadicGrid::valid(const Cube& q) const {
  if (q.level < 0 || q.level > depth_) return false;
  const std::uint64_t bound = std::uint64_t(1) << q.level;
  for (int d = 0; d < dim_; ++d)
    if (q.idx[d] >= bound) return false;
  for (int d = dim_; d < 3; ++d)
    if (q.idx[d] != 0) return false;
  return true;
}

void DyadicGrid::require(const Cube& q) const {
  if (!valid(q)) throw Error("cube does not belong to this grid");
}

std::uint64_t DyadicGrid::lex_index(const Cube& q) const {
  require(q);
  std::uint64_t lin = 0;
  for (int d = 0; d < dim_; ++d) lin = (lin << q.level) | q.idx[d];
  return lin;
}

Cube DyadicGrid::cube_at(int level, std::uint64_t lex) const {
  if (level < 0 || level > depth_) throw Error("level out of range");
  if (lex >= cube_count(level)) throw Error("cube index out of range");
  Cube q;
  q.level = level;
  const std::uint64_t mask = (std::uint64_t(1) << level) - 1;
  for (int d = dim_ - 1; d >= 0; --d) {
    q.idx[d] = std::uint32_t(lex & mask);
    lex >>= level;
  }
  return q;
}

std::uint64_t DyadicGrid::morton_index(const Cube& q) const {
  require(q);
  std::uint64_t m = 0;
  for (int b = q.level - 1; b >= 0; --b)
    for (int d = 0; d < dim_; ++d) m = (m << 1) | ((q.idx[d] >> b) & 1);
  return m;
}

Cube DyadicGrid::cube_from_morton(int level, std::uint64_t m) const {
  if (level < 0 || level > depth_) throw Error("level out of range");
  Cube q;
  q.level = level;
  for (int b = 0; b < level; ++b)
    for (int d = dim_ - 1; d >= 0; --d) {
      q.idx[d] |= std::uint32_t((m & 1) << b);
      m >>= 1;
    }
  return q;
}

std::pair<std::uint64_t, std::uint64_t> DyadicGrid::morton_cell_range(const Cube& q) const {
  const std::uint64_t len = cells_per_cube(q.level);
  const std::uint64_t start = morton_index(q) * len;
  return {start, start + len};
}

std::vector<std::uint64_t> DyadicGrid::lex_of_morton() const {
  const std::uint64_t n = cell_count();
  std::vector<std::uint64_t> perm(n);
  for (std::uint64_t m = 0; m < n; ++m)
    perm[m] = lex_index(cube_from_morton(depth_, m));
  return perm;
}

std::array<double, 3> DyadicGrid::cube_origin(const Cube& q) const {
  require(q);
  const double h = cube_side(q.level);
  std::array<double, 3> o = origin_;
  for (int d = 0; d < dim_; ++d) o[d] += h * double(q.idx[d]);
  return o;
}

std::array<double, 3> DyadicGrid::cell_center(std::uint64_t lex) const {
  const Cube c = cube_at(depth_, lex);
  std::array<double, 3> o = cube_origin(c);
  const double h = cube_side(depth_);
  for (int d = 0; d < dim_; ++d) o[d] += 0.5 * h;
  return o;
}

std::vector<Cube> cells(const DyadicGrid& grid, int level) {
  const std::uint64_t n = grid.cube_count(level);
  std::vector<Cube> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(grid.cube_at(level, i));
  return out;
}

GridFunction::GridFunction(DyadicGrid grid, std::vector<double> values, bool weight)
    : grid_(grid), values_(std::move(values)), weight_(weight) {
  if (values_.size() != grid_.cell_count())
    throw Error("value count does not match grid cell count");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error("grid function values must be finite");
    if (weight_ && v < 0) throw Error("weight function has a negative value");
  }
}

GridFunction GridFunction::constant(const DyadicGrid& grid, double value, bool weight) {
  return GridFunction(grid, std::vector<double>(grid.cell_count(), value), weight);
}

double GridFunction::max_abs() const {
  double m = 0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double average(const GridFunction& f, const Cube& q) {
  const DyadicGrid& g = f.grid();
  g.require(q);
  // Sum over the cube's cells; in lexicographic order these form a
  // dim-dimensional sub-block, walked directly.
  const int shift = g.depth() - q.level;
  const std::uint64_t per_dim = std::uint64_t(1) << shift;
  const int n = g.dim();
  double sum = 0;
  if (n == 1) {
    const std::uint64_t base = std::uint64_t(q.idx[0]) << shift;
    for (std::uint64_t i = 0; i < per_dim; ++i) sum += f.value(base + i);
  } else if (n == 2) {
    const std::uint64_t stride = std::uint64_t(1) << g.depth();
    const std::uint64_t b0 = std::uint64_t(q.idx[0]) << shift;
    const std::uint64_t b1 = std::uint64_t(q.idx[1]) << shift;
    for (std::uint64_t i = 0; i < per_dim; ++i)
      for (std::uint64_t j = 0; j < per_dim; ++j)
        sum += f.value((b0 + i) * stride + b1 + j);
  } else {
    const std::uint64_t stride = std::uint64_t(1) << g.depth();
    const std::uint64_t b0 = std::uint64_t(q.idx[0]) << shift;
    const std::uint64_t b1 = std::uint64_t(q.idx[1]) << shift;
    const std::uint64_t b2 = std::uint64_t(q.idx[2]) << shift;
    for (std::uint64_t i = 0; i < per_dim; ++i)
      for (std::uint64_t j = 0; j < per_dim; ++j)
        for (std::uint64_t k = 0; k < per_dim; ++k)
          sum += f.value(((b0 + i) * stride + b1 + j) * stride + b2 + k);
  }
  return sum / double(g.cells_per_cube(q.level));
}

double integrate(const GridFunction& f) {
  double sum = 0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_volume();
}

double integrate(const GridFunction& f, const GridFunction& w) {
  if (f.grid() != w.grid()) throw Error("grid mismatch in integrate");
  double sum = 0;
  for (std::uint64_t i = 0; i < f.size(); ++i) sum += f.value(i) * w.value(i);
  return sum * f.grid().cell_volume();
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

struct Header {
  int n = 0;
  int depth = -1;
  std::array<double, 3> origin{0, 0, 0};
  double side = 0;
  bool weight = false;
};

double parse_real(const std::string& tok, int line) {
  double v;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError("invalid number '" + tok + "'", line);
  return v;
}

Header parse_header(const std::string& text, int line) {
  Header h;
  std::istringstream ss(text);
  std::string tok;
  ss >> tok;
  if (tok != "DGF1") throw ParseError("expected DGF1 magic, got '" + tok + "'", line);
  bool have_n = false, have_depth = false, have_origin = false, have_side = false;
  while (ss >> tok) {
    if (tok == "weight") {
      h.weight = true;
      continue;
    }
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw ParseError("malformed header field '" + tok + "'", line);
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "n") {
      h.n = int(parse_real(val, line));
      have_n = true;
    } else if (key == "depth") {
      h.depth = int(parse_real(val, line));
      have_depth = true;
    } else if (key == "origin") {
      std::istringstream os(val);
      std::string part;
      int d = 0;
      while (std::getline(os, part, ',')) {
        if (d >= 3) throw ParseError("origin has too many coordinates", line);
        h.origin[d++] = parse_real(part, line);
      }
      have_origin = d > 0;
    } else if (key == "side") {
      h.side = parse_real(val, line);
      have_side = true;
    } else {
      throw ParseError("unknown header field '" + key + "'", line);
    }
  }
  if (!have_n || !have_depth || !have_origin || !have_side)
    throw ParseError("header must set n, depth, origin and side", line);
  return h;
}

}  // namespace

GridFunction read_function(std::istream& in) {
  std::string line;
  int lineno = 0;
  Header h;
  bool have_header = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    if (!have_header) {
      h = parse_header(line, lineno);
      if (h.n < 1 || h.n > 3) throw ParseError("n must be 1, 2 or 3", lineno);
      if (h.depth < 0) throw ParseError("depth must be nonnegative", lineno);
      if (!(h.side > 0)) throw ParseError("side must be positive", lineno);
      if (std::uint64_t(h.n) * std::uint64_t(h.depth) > 24)
        throw ParseError("grid too large: n*depth exceeds 24", lineno);
      values.reserve(std::uint64_t(1) << (h.n * h.depth));
      have_header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      const double v = parse_real(tok, lineno);
      if (h.weight && v < 0)
        throw ParseError("negative value in weight-flagged function", lineno);
      values.push_back(v);
    }
  }
  if (!have_header) throw ParseError("missing DGF1 header", lineno == 0 ? 1 : lineno);
  const std::uint64_t expect = std::uint64_t(1) << (h.n * h.depth);
  if (values.size() != expect)
    throw ParseError("expected " + std::to_string(expect) + " values, got " +
                         std::to_string(values.size()),
                     lineno);
  DyadicGrid grid(h.n, h.depth, h.origin, h.side);
  return GridFunction(grid, std::move(values), h.weight);
}

GridFunction read_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_function(in);
}

void write_function(const GridFunction& f, std::ostream& out) {
  const DyadicGrid& g = f.grid();
  out << "DGF1 n=" << g.dim() << " depth=" << g.depth() << " origin=";
  for (int d = 0; d < g.dim(); ++d) {
    if (d) out << ',';
    out << format_double(g.origin()[d]);
  }
  out << " side=" << format_double(g.side());
  if (f.is_weight()) out << " weight";
  out << '\n';
  const std::uint64_t n = f.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    out << format_double(f.value(i));
    out << (((i + 1) % 8 == 0 || i + 1 == n) ? '\n' : ' ');
  }
}

void write_function(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_function(f, out);
}

TreeView::TreeView(const GridFunction& f)
    : grid_(f.grid()), lex_of_morton_(grid_.lex_of_morton()) {
  const std::uint64_t n = grid_.cell_count();
  morton_values_.resize(n);
  for (std::uint64_t m = 0; m < n; ++m) morton_values_[m] = f.value(lex_of_morton_[m]);

  const int L = grid_.depth();
  const int nd = grid_.dim();
  sums_.resize(L + 1);
  abs_sums_.resize(L + 1);
  max_abs_.resize(L + 1);
  sums_[L] = morton_values_;
  abs_sums_[L].resize(n);
  max_abs_[L].resize(n);
  for (std::uint64_t m = 0; m < n; ++m) {
    abs_sums_[L][m] = std::abs(morton_values_[m]);
    max_abs_[L][m] = std::abs(morton_values_[m]);
  }
  for (int k = L - 1; k >= 0; --k) {
    const std::uint64_t cnt = grid_.cube_count(k);
    const int kids = 1 << nd;
    sums_[k].resize(cnt);
    abs_sums_[k].resize(cnt);
    max_abs_[k].resize(cnt);
    for (std::uint64_t m = 0; m < cnt; ++m) {
      double s = 0, as = 0, mx = 0;
      for (int e = 0; e < kids; ++e) {
        const std::uint64_t c = (m << nd) | std::uint64_t(e);
        s += sums_[k + 1][c];
        as += abs_sums_[k + 1][c];
        mx = std::max(mx, max_abs_[k + 1][c]);
      }
      sums_[k][m] = s;
      abs_sums_[k][m] = as;
      max_abs_[k][m] = mx;
    }
  }
}

std::vector<double> TreeView::to_lex(const std::vector<double>& morton_cells) const {
  std::vector<double> out(morton_cells.size());
  for (std::uint64_t m = 0; m < morton_cells.size(); ++m)
    out[lex_of_morton_[m]] = morton_cells[m];
  return out;
}

}  // namespace sparsedom
