#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sparsedom/dyadic.hpp"

using namespace sparsedom;
using sparsedom::testing::TestRng;
using sparsedom::testing::close;
using sparsedom::testing::random_function;

TEST_CASE("cells: level slices partition the root") {
  SUBCASE("1D depth 2, level 1 covers left/right halves") {
    DyadicGrid g(1, 2);
    const auto cs = cells(g, 1);
    REQUIRE(cs.size() == 2);
    CHECK(g.cube_origin(cs[0])[0] == 0.0);
    CHECK(g.cube_origin(cs[1])[0] == 0.5);
    CHECK(g.cube_side(1) == 0.5);
  }
  SUBCASE("2D depth 1, level 1 gives the 4 quadrants") {
    DyadicGrid g(2, 1);
    const auto cs = cells(g, 1);
    REQUIRE(cs.size() == 4);
    double volume = 0;
    for (const Cube& q : cs) volume += g.cube_volume(q.level);
    CHECK(close(volume, 1.0, 1e-15));
  }
  SUBCASE("level 0 is the root alone") {
    DyadicGrid g(3, 2);
    const auto cs = cells(g, 0);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0] == g.root());
  }
  SUBCASE("level out of range") {
    DyadicGrid g(1, 2);
    CHECK_THROWS_AS(cells(g, 3), Error);
    CHECK_THROWS_AS(cells(g, -1), Error);
  }
}

TEST_CASE("partition: level volumes sum to the root volume") {
  for (int n = 1; n <= 3; ++n) {
    DyadicGrid g(n, 2, {0.5, -1, 2}, 3.0);
    for (int k = 0; k <= 2; ++k) {
      double vol = 0;
      for (std::uint64_t i = 0; i < g.cube_count(k); ++i) vol += g.cube_volume(k);
      CHECK(close(vol, g.cube_volume(0), 1e-12));
    }
  }
}

TEST_CASE("average") {
  SUBCASE("constant function") {
    DyadicGrid g(2, 3);
    const GridFunction f = GridFunction::constant(g, 7.5);
    for (int k = 0; k <= 3; ++k)
      CHECK(average(f, g.cube_at(k, g.cube_count(k) / 2)) == 7.5);
  }
  SUBCASE("indicator of left half gives 1/2") {
    DyadicGrid g(1, 3);
    std::vector<double> v(8, 0.0);
    for (int i = 0; i < 4; ++i) v[i] = 1.0;
    CHECK(average(GridFunction(g, v), g.root()) == 0.5);
  }
  SUBCASE("four cells valued 1,2,3,4 average to 2.5") {
    DyadicGrid g(1, 2);
    CHECK(average(GridFunction(g, {1, 2, 3, 4}), g.root()) == 2.5);
  }
  SUBCASE("cube/grid mismatch") {
    DyadicGrid g(1, 2);
    Cube bad;
    bad.level = 5;
    CHECK_THROWS_AS(average(GridFunction::constant(g, 1), bad), Error);
  }
}

TEST_CASE("parent average equals the mean of child averages") {
  TestRng rng(41);
  for (int n = 1; n <= 3; ++n) {
    DyadicGrid g(n, n == 3 ? 2 : 3);
    const GridFunction f = random_function(g, rng, false);
    for (int k = 0; k < g.depth(); ++k)
      for (std::uint64_t i = 0; i < g.cube_count(k); ++i) {
        const Cube q = g.cube_at(k, i);
        double mean = 0;
        int kids = 0;
        for (std::uint64_t j = 0; j < g.cube_count(k + 1); ++j) {
          const Cube c = g.cube_at(k + 1, j);
          if (contains(q, c, n)) {
            mean += average(f, c);
            ++kids;
          }
        }
        REQUIRE(kids == (1 << n));
        CHECK(close(average(f, q), mean / kids, 1e-12));
      }
  }
}

TEST_CASE("integrate") {
  DyadicGrid g(1, 1);
  SUBCASE("unit mass") { CHECK(integrate(GridFunction::constant(g, 1)) == 1.0); }
  SUBCASE("disjoint supports") {
    CHECK(integrate(GridFunction(g, {1, 0}), GridFunction(g, {0, 1})) == 0.0);
  }
  SUBCASE("direct arithmetic") {
    CHECK(integrate(GridFunction(g, {1, 2}), GridFunction(g, {3, 4})) == 5.5);
  }
  SUBCASE("grid mismatch") {
    DyadicGrid g2(1, 2);
    CHECK_THROWS_AS(
        integrate(GridFunction::constant(g, 1), GridFunction::constant(g2, 1)), Error);
  }
  SUBCASE("equals the direct cell sum") {
    TestRng rng(7);
    DyadicGrid g3(2, 3);
    const GridFunction f = random_function(g3, rng, false);
    double direct = 0;
    for (double v : f.values()) direct += v * g3.cell_volume();
    CHECK(close(integrate(f), direct, 1e-12));
  }
}

TEST_CASE("DGF1 format") {
  SUBCASE("documented two-cell example") {
    std::istringstream in("DGF1 n=1 depth=1 origin=0 side=1\n1 3\n");
    const GridFunction f = read_function(in);
    CHECK(f.values() == std::vector<double>{1, 3});
    CHECK(f.grid().dim() == 1);
    CHECK_FALSE(f.is_weight());
  }
  SUBCASE("round trip is exact, including bytes") {
    TestRng rng(99);
    DyadicGrid g(2, 3, {0.125, -2.5, 0}, 1.75);
    const GridFunction f = random_function(g, rng, false);
    std::ostringstream out1;
    write_function(f, out1);
    std::istringstream back(out1.str());
    const GridFunction f2 = read_function(back);
    CHECK(f2.grid() == f.grid());
    CHECK(f2.values() == f.values());
    std::ostringstream out2;
    write_function(f2, out2);
    CHECK(out1.str() == out2.str());
  }
  SUBCASE("value count mismatch") {
    std::istringstream in("DGF1 n=1 depth=2 origin=0 side=1\n1 2 3\n");
    CHECK_THROWS_AS(read_function(in), ParseError);
  }
  SUBCASE("negative value under the weight flag names the line") {
    std::istringstream in("DGF1 n=1 depth=1 origin=0 side=1 weight\n# fine\n1\n-2\n");
    try {
      read_function(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("malformed header") {
    std::istringstream in("DGF2 n=1 depth=1 origin=0 side=1\n1 2\n");
    CHECK_THROWS_AS(read_function(in), ParseError);
    std::istringstream in2("DGF1 n=1 origin=0 side=1\n1 2\n");
    CHECK_THROWS_AS(read_function(in2), ParseError);
  }
  SUBCASE("comments and blank lines are ignored") {
    std::istringstream in(
        "# leading comment\n\nDGF1 n=1 depth=1 origin=0 side=2 weight\n0.5\n# mid\n1.5\n");
    const GridFunction f = read_function(in);
    CHECK(f.is_weight());
    CHECK(f.grid().side() == 2.0);
    CHECK(f.values() == std::vector<double>{0.5, 1.5});
  }
}

TEST_CASE("weight flag rejects negative values on construction") {
  DyadicGrid g(1, 1);
  CHECK_THROWS_AS(GridFunction(g, {1, -1}, true), Error);
  CHECK_NOTHROW(GridFunction(g, {1, -1}, false));
}

TEST_CASE("morton ranges agree with lexicographic containment") {
  for (int n = 1; n <= 3; ++n) {
    DyadicGrid g(n, 2);
    for (int k = 0; k <= 2; ++k)
      for (std::uint64_t i = 0; i < g.cube_count(k); ++i) {
        const Cube q = g.cube_at(k, i);
        CHECK(g.cube_from_morton(k, g.morton_index(q)) == q);
        const auto [b, e] = g.morton_cell_range(q);
        CHECK(e - b == g.cells_per_cube(q.level));
        for (std::uint64_t m = 0; m < g.cell_count(); ++m) {
          const bool inside = contains(q, g.cube_from_morton(g.depth(), m), n);
          CHECK(inside == (m >= b && m < e));
        }
      }
  }
}

TEST_CASE("TreeView sums match direct averages") {
  TestRng rng(5);
  DyadicGrid g(2, 3);
  const GridFunction f = random_function(g, rng, false);
  TreeView tree(f);
  for (int k = 0; k <= 3; ++k)
    for (std::uint64_t i = 0; i < g.cube_count(k); ++i) {
      const Cube q = g.cube_at(k, i);
      CHECK(close(tree.cube_average(k, g.morton_index(q)), average(f, q), 1e-12));
    }
}
