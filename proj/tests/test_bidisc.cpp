#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bicap/bidisc.hpp"
#include "bicap/instances.hpp"

using namespace bicap;

TEST_CASE("box assignment basics") {
  TreeShape s(4);
  CHECK(node_of_point(0.0, 0.0, s) == kRoot1);
  CHECK(node_of_point(0.0, 3.1, s) == kRoot1);

  // boundary point at angle zero goes to the first leaf arc
  Node1 b = node_of_point(1.0, 0.0, s);
  CHECK(b.level == s.depth);
  CHECK(b.pos == 0);

  // radial band: 1 - r = 2^-3 lands exactly on level 3
  Node1 m = node_of_point(1.0 - 0.125, 1.0, s);
  CHECK(m.level == 3);
  CHECK(m.pos == std::uint64_t(1.0 / (2 * std::numbers::pi) * 8));

  // radial ties go to the deeper level
  Node1 t = node_of_point(0.5, 0.1, s);
  CHECK(t.level == 1);

  CHECK_THROWS_AS(node_of_point(1.5, 0.0, s), std::invalid_argument);
}

TEST_CASE("assignment is a pure function") {
  Rng g(3);
  TreeShape s(6);
  for (int t = 0; t < 200; ++t) {
    double r = uniform01(g), th = uniform(g, 0, 2 * std::numbers::pi);
    Node1 a = node_of_point(r, th, s);
    Node1 b = node_of_point(r, th, s);
    CHECK(a == b);
    CHECK(valid(a, s));
  }
}

TEST_CASE("pullback preserves mass and merges boxes") {
  TreeShape s(5);
  std::vector<BidiscAtom> atoms{{0.0, 0.0, 0.0, 0.0, 1.0}};
  auto m = pullback_measure(atoms, s);
  REQUIRE(m.size() == 1);
  CHECK(m.at(kRoot2) == 1.0);

  Rng g(7);
  std::vector<BidiscAtom> cloud;
  double total = 0;
  for (int i = 0; i < 60; ++i) {
    BidiscAtom a{uniform01(g), uniform(g, 0, 2 * std::numbers::pi), uniform01(g),
                 uniform(g, 0, 2 * std::numbers::pi), uniform(g, 0.1, 1.0)};
    total += a.mass;
    cloud.push_back(a);
  }
  auto mc = pullback_measure(cloud, s);
  CHECK(mc.total() == Catch::Approx(total).epsilon(1e-12));

  // two atoms in one box merge
  std::vector<BidiscAtom> two{{0.0, 0.0, 0.0, 0.0, 0.5}, {0.01, 0.1, 0.02, 0.2, 0.25}};
  auto mt = pullback_measure(two, s);
  REQUIRE(mt.size() == 1);
  CHECK(mt.at(kRoot2) == 0.75);
}

TEST_CASE("kernel against the extended ancestor counts") {
  TreeShape s(5);
  BidiscAtom z{0, 0, 0, 0, 1}, w{0, 0, 0, 0, 1};
  auto c = kernel_vs_tree_check(z, w, s);
  CHECK(!c.degenerate);
  CHECK(c.kernel == Catch::Approx(100.0).epsilon(1e-12));
  CHECK(c.tree == 9.0);
  CHECK(c.ratio == Catch::Approx(100.0 / 9.0).epsilon(1e-12));

  // coincident boundary coordinates blow up the kernel side
  BidiscAtom zb{1.0, 1.0, 1.0, 2.0, 1}, wb{1.0, 1.0, 1.0, 2.0, 1};
  CHECK(kernel_vs_tree_check(zb, wb, s).degenerate);

  // antipodal boundary pairs stay order-one on both sides
  BidiscAtom za{1.0, 0.0, 1.0, 0.0, 1};
  BidiscAtom wa{1.0, std::numbers::pi, 1.0, std::numbers::pi, 1};
  auto ca = kernel_vs_tree_check(za, wa, s);
  CHECK(!ca.degenerate);
  CHECK(ca.tree == 25.0);  // five shared arc predecessors per coordinate
  CHECK(ca.kernel <= 200.0);

  // nearby deep points grow on both sides together
  Rng g(11);
  for (int t = 0; t < 100; ++t) {
    double r = uniform(g, 0.9, 0.999), th = uniform(g, 0, 2 * std::numbers::pi);
    BidiscAtom zz{r, th, r, th, 1};
    BidiscAtom ww{r + 0.3 * (1 - r), th, r + 0.3 * (1 - r), th, 1};
    auto cc = kernel_vs_tree_check(zz, ww, s);
    REQUIRE(!cc.degenerate);
    CHECK(cc.ratio > 0.05);
    CHECK(cc.ratio < 40.0);
  }
}

TEST_CASE("carleson pipeline") {
  TreeShape s(3);
  std::vector<BidiscAtom> one{{0, 0, 0, 0, 1.0}};
  auto rep = carleson_test(one, s);
  CHECK(rep.trace.norm_sq == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(rep.subcap.constant >= 1.0 - 1e-9);
  CHECK(rep.ratio == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(rep.exact_direction_ok);

  // uniform boundary grid: doubling the masses doubles both constants
  std::vector<BidiscAtom> grid;
  int n = 1 << s.depth;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      grid.push_back({1.0, 2 * std::numbers::pi * (i + 0.5) / n, 1.0,
                      2 * std::numbers::pi * (j + 0.5) / n, 1.0 / (n * n)});
  auto base = carleson_test(grid, s);
  CHECK(base.exact_direction_ok);
  CHECK(base.total_mass == Catch::Approx(1.0).epsilon(1e-12));
  std::vector<BidiscAtom> doubled = grid;
  for (auto& a : doubled) a.mass *= 2;
  auto twice = carleson_test(doubled, s);
  CHECK(twice.trace.norm_sq == Catch::Approx(2 * base.trace.norm_sq).epsilon(1e-7));
  CHECK(twice.subcap.constant == Catch::Approx(2 * base.subcap.constant).epsilon(1e-7));
  CHECK(twice.ratio == Catch::Approx(base.ratio).epsilon(1e-6));

  std::vector<BidiscAtom> nothing;
  CHECK_THROWS_AS(carleson_test(nothing, s), std::invalid_argument);
}
