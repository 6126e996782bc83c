#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bicap/capacity.hpp"
#include "bicap/instances.hpp"
#include "bicap/potential.hpp"

using namespace bicap;

namespace {

std::vector<Node2> all_nodes2(TreeShape s) {
  std::vector<Node2> out;
  for (std::uint64_t hx = 1; hx <= std::uint64_t(s.nodes_per_tree()); ++hx)
    for (std::uint64_t hy = 1; hy <= std::uint64_t(s.nodes_per_tree()); ++hy)
      out.push_back({node_at_heap(hx), node_at_heap(hy)});
  return out;
}

}  // namespace

TEST_CASE("hardy operator point values") {
  TreeShape s(1);
  Function2 ind(s);
  ind.add(kRoot2, 1.0);
  for (const auto& z : all_nodes2(s)) CHECK(hardy(ind, z) == 1.0);

  Function2 zero(s);
  CHECK(hardy(zero, kRoot2) == 0.0);

  Function2 f(s);
  Node2 aa{{1, 0}, {1, 0}};
  for (const auto& b : predecessors(aa)) f.add(b, 0.5);
  CHECK(hardy(f, aa) == 2.0);
}

TEST_CASE("adjoint evaluates successor mass") {
  TreeShape s(1);
  Measure2 m(s);
  Node2 aa{{1, 0}, {1, 0}};
  m.add(aa, 1.0);
  for (const auto& z : all_nodes2(s)) {
    double want = le2(aa, z) ? 1.0 : 0.0;
    CHECK(successor_mass(m, z) == want);
  }
  CHECK(successor_mass(m, kRoot2) == m.total());

  Rng g(7);
  TreeShape s5(5);
  for (int t = 0; t < 30; ++t) {
    Measure2 a = random_measure2(g, s5, 6), b = random_measure2(g, s5, 4);
    Measure2 sum(s5);
    for (const auto& [n, v] : a.entries) sum.add(n, v);
    for (const auto& [n, v] : b.entries) sum.add(n, v);
    Node2 q = random_node2(g, s5);
    CHECK(successor_mass(sum, q) ==
          Catch::Approx(successor_mass(a, q) + successor_mass(b, q)).margin(1e-14));
  }
}

TEST_CASE("potential of point masses and the root mass") {
  TreeShape s(4);
  Rng g(9);
  Node2 omega = random_leaf_pair(g, s);
  Measure2 m(s);
  m.add(omega, 0.7);
  for (int t = 0; t < 50; ++t) {
    Node2 a = random_node2(g, s);
    CHECK(potential(m, a) == Catch::Approx(0.7 * double(meet_count2(a, omega))).epsilon(1e-14));
  }

  Measure2 chi(s);
  chi.add(kRoot2, 1.0);
  for (const auto& a : all_nodes2(TreeShape(3))) {
    Measure2 c3{TreeShape(3)};
    c3.add(kRoot2, 1.0);
    CHECK(potential(c3, a) == 1.0);
  }
}

TEST_CASE("uniform corner measure has unit potential at corners") {
  TreeShape s(1);
  Measure2 m(s);
  for (unsigned i = 0; i < 2; ++i)
    for (unsigned j = 0; j < 2; ++j) m.add({{1, i}, {1, j}}, 1.0 / 9.0);
  for (unsigned i = 0; i < 2; ++i)
    for (unsigned j = 0; j < 2; ++j)
      CHECK(potential(m, {{1, i}, {1, j}}) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("two potential routes agree") {
  Rng g(13);
  TreeShape s(5);
  for (int t = 0; t < 40; ++t) {
    Measure2 m = random_measure2(g, s, 8);
    Node2 a = random_node2(g, s);
    double v1 = potential(m, a);
    double v2 = potential_via_ancestors(m, a);
    CHECK(v1 == Catch::Approx(v2).epsilon(1e-12));
  }
}

TEST_CASE("dense potential matches the sparse routes everywhere") {
  Rng g(15);
  TreeShape s(4);
  for (int t = 0; t < 10; ++t) {
    Measure2 m = random_measure2(g, s, 6);
    DenseField v = dense_potential(m);
    for (const auto& a : all_nodes2(s))
      CHECK(v.at(a) == Catch::Approx(potential(m, a)).epsilon(1e-12));
  }
}

TEST_CASE("potential is monotone along the order") {
  Rng g(17);
  TreeShape s(6);
  for (int t = 0; t < 60; ++t) {
    Measure2 m = random_boundary_measure(g, s, 6);
    Node2 b = random_node2(g, s);
    Node2 a{{s.depth, b.x.pos << (s.depth - b.x.level)},
            {s.depth, b.y.pos << (s.depth - b.y.level)}};  // a <= b
    CHECK(potential(m, a) >= potential(m, b) - 1e-12);
  }
}

TEST_CASE("restricted potential hand case") {
  TreeShape s(1);
  Measure2 m(s);
  m.add({{1, 0}, {1, 0}}, 0.25);
  auto e = potential_sublevel_set(m, 0.25);
  bool has_root = false;
  for (const auto& n : e.items)
    if (n == kRoot2) has_root = true;
  CHECK(has_root);
  CHECK(restricted_potential(m, 0.25, kRoot2) == Catch::Approx(0.25));

  // the sublevel set is exactly the vertices with V <= delta
  for (const auto& n : e.items) CHECK(potential(m, n) <= 0.25 + 1e-15);
  CHECK(e.items.size() == 4);  // (o,o) and the three vertices missing the atom
}

TEST_CASE("restricted potential degenerate cases") {
  TreeShape s(2);
  Measure2 chi(s);
  chi.add(kRoot2, 1.0);
  CHECK(potential_sublevel_set(chi, 0.5).items.empty());
  CHECK(restricted_potential(chi, 0.5, kRoot2) == 0.0);

  Rng g(19);
  Measure2 m = random_boundary_measure(g, s, 3);
  double vmax = potential(m, {{2, 0}, {2, 0}});
  for (const auto& a : all_nodes2(s)) vmax = std::max(vmax, potential(m, a));
  Node2 q = random_node2(g, s);
  CHECK(restricted_potential(m, vmax + 1.0, q) == Catch::Approx(potential(m, q)).epsilon(1e-13));
  CHECK_THROWS_AS(restricted_potential(m, 0.0, q), std::invalid_argument);
}

TEST_CASE("energy of point masses") {
  TreeShape s(1);
  Measure2 m(s);
  m.add({{1, 0}, {1, 0}}, 1.0);
  CHECK(energy(m) == 4.0);

  Measure2 nu(s);
  nu.add({{1, 1}, {1, 1}}, 1.0);
  CHECK(mutual_energy(m, nu) == 1.0);
}

TEST_CASE("energy routes and Cauchy-Schwarz") {
  Rng g(21);
  TreeShape s(4);
  for (int t = 0; t < 30; ++t) {
    Measure2 a = random_measure2(g, s, 6), b = random_measure2(g, s, 5);
    // defining route: sum over all vertices of the adjoint product
    double direct = 0;
    for (const auto& n : all_nodes2(s)) direct += successor_mass(a, n) * successor_mass(b, n);
    CHECK(mutual_energy(a, b) == Catch::Approx(direct).epsilon(1e-10));
    CHECK(mutual_energy(a, b) == Catch::Approx(mutual_energy(b, a)).epsilon(1e-14));
    double cs = mutual_energy(a, b);
    CHECK(cs * cs <= energy(a) * energy(b) * (1 + 1e-10));

    // energy as integral of the potential
    double viaV = 0;
    for (const auto& [n, v] : a.entries) viaV += potential(a, n) * v;
    CHECK(energy(a) == Catch::Approx(viaV).epsilon(1e-10));
  }
}

TEST_CASE("Tonelli identity") {
  Rng g(25);
  TreeShape s(4);
  for (int t = 0; t < 30; ++t) {
    Function2 f = random_function2(g, s, 7);
    Measure2 m = random_measure2(g, s, 5);
    double lhs = 0;
    for (const auto& [n, v] : m.entries) lhs += hardy(f, n) * v;
    double rhs = 0;
    for (const auto& [n, v] : f.entries) rhs += v * successor_mass(m, n);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("weighted adjoint and adjointness") {
  Rng g(27);
  TreeShape s(3);
  for (int t = 0; t < 50; ++t) {
    Measure2 nu = random_measure2(g, s, 6);
    Function2 phi = random_function2(g, s, 6);
    Function2 f = random_function2(g, s, 6);
    // <I*_nu phi, f>_l2 = <phi, I f>_L2(nu)
    double lhs = 0;
    for (const auto& [n, v] : f.entries) lhs += weighted_adjoint(phi, nu, n) * v;
    double rhs = 0;
    for (const auto& [n, w] : nu.entries) rhs += phi.at(n) * hardy(f, n) * w;
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10).margin(1e-12));

    Node2 b = random_node2(g, s);
    Function2 one(s);
    for (const auto& n : all_nodes2(s)) one.add(n, 1.0);
    CHECK(weighted_adjoint(one, nu, b) == Catch::Approx(successor_mass(nu, b)).epsilon(1e-12));

    Measure2 none(s);
    CHECK(weighted_adjoint(phi, none, b) == 0.0);
  }
}

TEST_CASE("embedding norm estimates") {
  TreeShape s(1);
  Measure2 root(s);
  root.add(kRoot2, 1.0);
  auto r = trace_norm_estimate(root);
  CHECK(r.converged);
  CHECK(r.norm_sq == Catch::Approx(1.0).epsilon(1e-9));

  Measure2 leaf(s);
  leaf.add({{1, 0}, {1, 0}}, 1.0);
  auto r2 = trace_norm_estimate(leaf);
  CHECK(r2.converged);
  CHECK(r2.norm_sq == Catch::Approx(4.0).epsilon(1e-9));

  Rng g(33);
  TreeShape s4(4);
  Measure2 nu = random_boundary_measure(g, s4, 5);
  Measure2 nu2(s4);
  for (const auto& [n, v] : nu.entries) nu2.add(n, 2.0 * v);
  auto a = trace_norm_estimate(nu);
  auto b = trace_norm_estimate(nu2);
  CHECK(b.norm_sq == Catch::Approx(2.0 * a.norm_sq).epsilon(1e-8));

  Measure2 zero(s4);
  CHECK_THROWS_AS(trace_norm_estimate(zero), std::invalid_argument);
}

TEST_CASE("superharmonic scan") {
  TreeShape s(3);
  Rng g(35);
  Measure1 rho(s);
  for (int i = 0; i < 5; ++i) rho.add(random_leaf1(g, s), uniform(g, 0.2, 1.0));
  Function1 f(s);
  for (std::uint64_t h = 1; h <= std::uint64_t(s.nodes_per_tree()); ++h) {
    double v = successor_mass(rho, node_at_heap(h));
    if (v > 0) f.add(node_at_heap(h), v);
  }
  CHECK(superharmonic_check(f));

  Function1 bad(s);
  bad.add({1, 0}, 1.0);  // value at a child, nothing at the root
  CHECK_FALSE(superharmonic_check(bad));
}

TEST_CASE("one-dimensional maximum principle") {
  // exhaustive two-atom configurations at depth 4
  TreeShape s(4);
  std::vector<Node1> nodes;
  for (std::uint64_t h = 1; h <= std::uint64_t(s.nodes_per_tree()); ++h)
    nodes.push_back(node_at_heap(h));
  for (const auto& a : nodes)
    for (const auto& b : nodes) {
      Measure1 m(s);
      m.add(a, 1.0);
      m.add(b, 0.5);
      double on_support = std::max(potential(m, a), potential(m, b));
      for (const auto& q : nodes) CHECK(potential(m, q) <= on_support + 1e-12);
    }

  // randomized at depth 8
  Rng g(37);
  TreeShape s8(8);
  for (int t = 0; t < 100; ++t) {
    Measure1 m(s8);
    int k = uniform_int(g, 1, 6);
    for (int i = 0; i < k; ++i) m.add(random_node1(g, s8), uniform(g, 0.1, 1.0));
    double on_support = 0;
    for (const auto& [n, v] : m.entries) on_support = std::max(on_support, potential(m, n));
    for (int q = 0; q < 50; ++q) {
      Node1 x = random_node1(g, s8);
      CHECK(potential(m, x) <= on_support + 1e-12);
    }
  }
}

TEST_CASE("one-dimensional domination principle") {
  Rng g(39);
  TreeShape s(6);
  for (int t = 0; t < 100; ++t) {
    Measure1 nu(s), rho(s);
    int k = uniform_int(g, 1, 5);
    for (int i = 0; i < k; ++i) nu.add(random_node1(g, s), uniform(g, 0.1, 1.0));
    for (int i = 0; i < k; ++i) rho.add(random_node1(g, s), uniform(g, 0.1, 1.0));
    if (nu.empty() || rho.empty()) continue;
    // f = t * I*rho with t chosen so If >= V^nu on supp nu; If = t * V^rho
    double scale = 0;
    for (const auto& [n, v] : nu.entries)
      scale = std::max(scale, potential(nu, n) / potential(rho, n));
    scale *= 1.0 + 1e-9;  // slack
    for (std::uint64_t h = 1; h <= std::uint64_t(s.nodes_per_tree()); ++h) {
      Node1 q = node_at_heap(h);
      CHECK(scale * potential(rho, q) >= potential(nu, q) - 1e-10);
    }
  }
}
