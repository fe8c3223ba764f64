#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsedom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while reading a DGF1 stream; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Dyadic cube, identified by its level (0 = root) and coordinate index.
// idx[d] < 2^level for d < dim; unused coordinates stay zero.
struct Cube {
  int level = 0;
  std::array<std::uint32_t, 3> idx{0, 0, 0};

  friend bool operator==(const Cube&, const Cube&) = default;
};

Cube parent(const Cube& q);

// outer ⊇ inner in the dyadic lattice of dimension dim.
bool contains(const Cube& outer, const Cube& inner, int dim);

// A bounded dyadic grid: one root cube in R^n, n in {1,2,3}, subdivided
// `depth` times. The 2^{n·depth} finest cells carry the function values.
// Cell/cube linear order is lexicographic with the last coordinate fastest.
class DyadicGrid {
 public:
  DyadicGrid(int dim, int depth, std::array<double, 3> origin, double side);
  DyadicGrid(int dim, int depth) : DyadicGrid(dim, depth, {0, 0, 0}, 1.0) {}

  int dim() const { return dim_; }
  int depth() const { return depth_; }
  double side() const { return side_; }
  const std::array<double, 3>& origin() const { return origin_; }

  std::uint64_t cell_count() const { return std::uint64_t(1) << (dim_ * depth_); }
  std::uint64_t cube_count(int level) const;
  double cell_volume() const;
  double cube_side(int level) const;
  double cube_volume(int level) const;
  std::uint64_t cells_per_cube(int level) const {
    return std::uint64_t(1) << (dim_ * (depth_ - level));
  }

  Cube root() const { return Cube{}; }
  bool valid(const Cube& q) const;
  void require(const Cube& q) const;

  // Lexicographic linear index of a level-k cube (last coordinate fastest).
  std::uint64_t lex_index(const Cube& q) const;
  Cube cube_at(int level, std::uint64_t lex) const;

  // Morton (bit-interleaved) index; cells of a cube form one Morton range.
  std::uint64_t morton_index(const Cube& q) const;
  Cube cube_from_morton(int level, std::uint64_t m) const;
  std::pair<std::uint64_t, std::uint64_t> morton_cell_range(const Cube& q) const;

  // Permutation taking lexicographic finest-cell order to Morton order:
  // morton_values[m] = lex_values[perm[m]].
  std::vector<std::uint64_t> lex_of_morton() const;

  std::array<double, 3> cube_origin(const Cube& q) const;
  std::array<double, 3> cell_center(std::uint64_t lex) const;

  friend bool operator==(const DyadicGrid&, const DyadicGrid&) = default;

 private:
  int dim_;
  int depth_;
  std::array<double, 3> origin_;
  double side_;
};

// All cubes of one level, in lexicographic order.
std::vector<Cube> cells(const DyadicGrid& grid, int level);

// Piecewise-constant function on the finest cells of a grid, immutable.
// Values are stored in lexicographic cell order. Weight-flagged functions
// must be nonnegative (checked on construction).
class GridFunction {
 public:
  GridFunction(DyadicGrid grid, std::vector<double> values, bool weight = false);
  static GridFunction constant(const DyadicGrid& grid, double value, bool weight = false);

  const DyadicGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  bool is_weight() const { return weight_; }
  double value(std::uint64_t lex) const { return values_[lex]; }
  std::uint64_t size() const { return values_.size(); }

  double max_abs() const;

 private:
  DyadicGrid grid_;
  std::vector<double> values_;
  bool weight_;
};

// (1/|Q|) ∫_Q f, exact as a finite mean of cell values.
double average(const GridFunction& f, const Cube& q);

// ∫ f dx and ∫ f·w dx, exact finite sums.
double integrate(const GridFunction& f);
double integrate(const GridFunction& f, const GridFunction& w);

template <typename F>
GridFunction pointwise(const GridFunction& f, F&& op, bool weight = false) {
  std::vector<double> out(f.values());
  for (double& v : out) v = op(v);
  return GridFunction(f.grid(), std::move(out), weight);
}

template <typename F>
GridFunction pointwise(const GridFunction& a, const GridFunction& b, F&& op,
                       bool weight = false) {
  if (a.grid() != b.grid()) throw Error("grid mismatch in pointwise combination");
  std::vector<double> out(a.values());
  for (std::uint64_t i = 0; i < out.size(); ++i) out[i] = op(out[i], b.value(i));
  return GridFunction(a.grid(), std::move(out), weight);
}

// DGF1 text format.
// Line 1: DGF1 n=<int> depth=<int> origin=<r1,...,rn> side=<real> [weight]
// then exactly 2^{n·depth} whitespace-separated values in lexicographic
// order. Lines starting with '#' are ignored.
GridFunction read_function(std::istream& in);
GridFunction read_function(const std::string& path);
void write_function(const GridFunction& f, std::ostream& out);
void write_function(const GridFunction& f, const std::string& path);

// Shortest decimal representation that round-trips the double.
std::string format_double(double v);

// Morton-ordered view of a GridFunction with per-level cube sums and
// max-abs pyramids. This is the workhorse behind averages over cubes,
// maximal operators and stopping-time selections: every cube's cells are
// one contiguous span, and a cube aggregate is O(1) after the O(N) build.
class TreeView {
 public:
  explicit TreeView(const GridFunction& f);

  const DyadicGrid& grid() const { return grid_; }
  int depth() const { return grid_.depth(); }

  double cube_sum(int level, std::uint64_t m) const { return sums_[level][m]; }
  double cube_average(int level, std::uint64_t m) const {
    return sums_[level][m] / double(grid_.cells_per_cube(level));
  }
  double cube_abs_sum(int level, std::uint64_t m) const { return abs_sums_[level][m]; }
  double cube_abs_average(int level, std::uint64_t m) const {
    return abs_sums_[level][m] / double(grid_.cells_per_cube(level));
  }
  double cube_max_abs(int level, std::uint64_t m) const { return max_abs_[level][m]; }

  // Cell values of cube (level, m) in Morton order.
  std::span<const double> cell_span(int level, std::uint64_t m) const {
    const std::uint64_t len = grid_.cells_per_cube(level);
    return {morton_values_.data() + m * len, len};
  }
  const std::vector<double>& morton_values() const { return morton_values_; }
  const std::vector<std::uint64_t>& lex_of_morton() const { return lex_of_morton_; }

  // Scatter a Morton-ordered cell array back to lexicographic order.
  std::vector<double> to_lex(const std::vector<double>& morton_cells) const;

 private:
  DyadicGrid grid_;
  std::vector<std::uint64_t> lex_of_morton_;
  std::vector<double> morton_values_;
  std::vector<std::vector<double>> sums_;
  std::vector<std::vector<double>> abs_sums_;
  std::vector<std::vector<double>> max_abs_;
};

}  // namespace sparsedom
