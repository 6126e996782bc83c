#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "bicap/instances.hpp"
#include "bicap/tree.hpp"

using namespace bicap;

namespace {

// Oracle: meet by walking both ancestor paths.
Node1 meet_oracle(Node1 a, Node1 b) {
  auto pa = predecessors(a);
  auto pb = predecessors(b);
  Node1 best = kRoot1;
  for (auto u : pa)
    for (auto v : pb)
      if (u == v && u.level >= best.level) best = u;
  return best;
}

std::vector<Node2> all_nodes2(TreeShape s) {
  std::vector<Node2> out;
  for (std::uint64_t hx = 1; hx <= std::uint64_t(s.nodes_per_tree()); ++hx)
    for (std::uint64_t hy = 1; hy <= std::uint64_t(s.nodes_per_tree()); ++hy)
      out.push_back({node_at_heap(hx), node_at_heap(hy)});
  return out;
}

// Oracle: arc-inclusion scan over every vertex, in integer units of 2^-L of
// the circle.
std::vector<Node1> g_pred_oracle(Node1 a, TreeShape s) {
  std::vector<Node1> out;
  std::uint64_t full = std::uint64_t{1} << s.depth;
  std::uint64_t a_start = a.pos << (s.depth - a.level);
  std::uint64_t a_len = std::uint64_t{1} << (s.depth - a.level);
  for (int j = 0; j <= s.depth; ++j) {
    std::uint64_t m = std::uint64_t{1} << j;
    std::uint64_t arc = std::uint64_t{1} << (s.depth - j);
    for (std::uint64_t p = 0; p < m; ++p) {
      std::uint64_t len3 = 3 * arc;
      if (len3 >= full) {
        out.push_back({j, p});
        continue;
      }
      std::uint64_t start = ((p + m - 1) & (m - 1)) * arc;
      std::uint64_t off = (a_start - start) & (full - 1);
      if (off + a_len <= len3) out.push_back({j, p});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("meet of siblings is the root") {
  CHECK(meet1({1, 0}, {1, 1}) == kRoot1);
}

TEST_CASE("meet is idempotent and commutative") {
  Rng g(11);
  TreeShape s(8);
  for (int i = 0; i < 200; ++i) {
    Node1 a = random_node1(g, s), b = random_node1(g, s);
    CHECK(meet1(a, a) == a);
    CHECK(meet1(a, b) == meet1(b, a));
    CHECK(meet1(a, b) == meet_oracle(a, b));
  }
}

TEST_CASE("meet strips trailing bits") {
  CHECK(meet1({3, 5}, {3, 4}) == Node1{2, 2});
}

TEST_CASE("ancestor counts") {
  CHECK(ancestor_count(kRoot1) == 1);
  CHECK(ancestor_count2(kRoot2) == 1);
  CHECK(ancestor_count(Node1{1, 0}) == 2);
  CHECK(ancestor_count2(Node2{{1, 0}, {1, 0}}) == 4);
  CHECK(ancestor_count2(Node2{{2, 0}, {1, 1}}) == 6);
}

TEST_CASE("predecessor sets") {
  CHECK(predecessors(kRoot2).size() == 1);
  auto p = predecessors(Node2{{1, 0}, {1, 0}});
  CHECK(p.size() == 4);
  std::set<Node2> ps(p.begin(), p.end());
  CHECK(ps.count(kRoot2) == 1);
  CHECK(ps.count(Node2{{1, 0}, {0, 0}}) == 1);
  CHECK(ps.count(Node2{{0, 0}, {1, 0}}) == 1);
  CHECK(ps.count(Node2{{1, 0}, {1, 0}}) == 1);

  Rng g(5);
  TreeShape s(7);
  for (int i = 0; i < 100; ++i) {
    Node2 a = random_node2(g, s);
    CHECK(std::int64_t(predecessors(a).size()) == ancestor_count2(a));
  }
}

TEST_CASE("order consistency is exhaustive at small depth") {
  TreeShape s(3);
  auto nodes = all_nodes2(s);
  for (const auto& a : nodes) {
    auto pa = predecessors(a);
    std::set<Node2> ps(pa.begin(), pa.end());
    for (const auto& b : nodes) {
      CHECK(in_successors(b, a) == (ps.count(b) == 1));
    }
  }
}

TEST_CASE("meet counts match brute-force predecessor intersections") {
  // exhaustive over every vertex pair at depth 2
  TreeShape s2(2);
  for (const auto& a : all_nodes2(s2))
    for (const auto& b : all_nodes2(s2)) {
      auto pa = predecessors(a);
      auto pb = predecessors(b);
      std::set<Node2> ps(pa.begin(), pa.end());
      std::int64_t common = 0;
      for (const auto& n : pb) common += ps.count(n);
      CHECK(meet_count2(a, b) == common);
    }

  TreeShape s(3);
  auto nodes = all_nodes2(s);
  for (const auto& a : nodes) {
    auto pa = predecessors(a);
    std::set<Node2> ps(pa.begin(), pa.end());
    for (const auto& b : nodes) {
      std::int64_t common = 0;
      for (const auto& n : predecessors(b)) common += ps.count(n);
      CHECK(meet_count2(a, b) == common);
      CHECK(meet_count2(a, b) ==
            std::int64_t(meet_count1(a.x, b.x)) * meet_count1(a.y, b.y));
    }
  }
}

TEST_CASE("meet is the maximum of the common predecessors") {
  Rng g(23);
  TreeShape s(8);
  for (int t = 0; t < 100; ++t) {
    Node1 a = random_node1(g, s), b = random_node1(g, s);
    Node1 m = meet1(a, b);
    CHECK(le1(a, m));
    CHECK(le1(b, m));
    for (auto c : predecessors(a))
      if (le1(b, c)) CHECK(le1(m, c));
  }
}

TEST_CASE("metric examples") {
  TreeShape s2(2);
  Node2 z{{2, 0}, {2, 0}};
  CHECK(metric_delta(z, z, s2) == 0.0);
  // both coordinate meets at the root
  Node2 w{{2, 2}, {2, 2}};
  CHECK(metric_delta(z, w, s2) == Catch::Approx(0.75).epsilon(1e-14));

  Rng g(3);
  TreeShape s(6);
  for (int t = 0; t < 200; ++t) {
    Node2 a = random_node2(g, s), b = random_node2(g, s);
    CHECK(metric_delta(a, b, s) == metric_delta(b, a, s));
    CHECK(metric_delta(a, b, s) >= -1e-15);
  }
}

TEST_CASE("metric triangle inequality on boundary triples") {
  Rng g(29);
  TreeShape s(6);
  for (int t = 0; t < 500; ++t) {
    Node2 a = random_leaf_pair(g, s), b = random_leaf_pair(g, s), c = random_leaf_pair(g, s);
    CHECK(metric_delta(a, c, s) <= metric_delta(a, b, s) + metric_delta(b, c, s) + 1e-12);
  }
}

TEST_CASE("extended predecessor set of the root has three vertices") {
  TreeShape s(4);
  CHECK(g_ancestor_count(kRoot1, kRoot1, s) == 3);
}

TEST_CASE("extended predecessor sets match the arc-inclusion oracle") {
  TreeShape s(5);
  for (std::uint64_t h = 1; h <= std::uint64_t(s.nodes_per_tree()); ++h) {
    Node1 a = node_at_heap(h);
    auto got = g_predecessors(a, s);
    auto want = g_pred_oracle(a, s);
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }
}

TEST_CASE("extended count dominates the tree count") {
  Rng g(31);
  TreeShape s(6);
  for (int t = 0; t < 200; ++t) {
    Node1 a = random_node1(g, s), b = random_node1(g, s);
    CHECK(g_ancestor_count(a, b, s) >= meet_count1(a, b));
  }
  // level-1 sibling baseline, recorded against the oracle
  std::int64_t base = g_ancestor_count({1, 0}, {1, 1}, s);
  std::vector<Node1> p0 = g_pred_oracle({1, 0}, s), p1 = g_pred_oracle({1, 1}, s);
  std::sort(p0.begin(), p0.end());
  std::sort(p1.begin(), p1.end());
  std::vector<Node1> common;
  std::set_intersection(p0.begin(), p0.end(), p1.begin(), p1.end(), std::back_inserter(common));
  CHECK(base == std::int64_t(common.size()));
}

TEST_CASE("deep path meets agree with packed nodes") {
  Rng g(41);
  TreeShape s(20);
  for (int t = 0; t < 100; ++t) {
    Node1 a = random_node1(g, s, 1), b = random_node1(g, s, 1);
    PathNode1 pa, pb;
    for (int i = a.level - 1; i >= 0; --i) pa.push_bit((a.pos >> i) & 1u);
    for (int i = b.level - 1; i >= 0; --i) pb.push_bit((b.pos >> i) & 1u);
    CHECK(meet_depth(pa, pb) == meet_count1(a, b));
  }
}

TEST_CASE("deep path meets at depth 1e6") {
  Rng g(43);
  auto paths = random_deep_paths(g, 8, 1000000);
  for (const auto& p : paths)
    for (const auto& q : paths) {
      std::int64_t d = meet_depth(p, q);
      CHECK(d >= 1);
      CHECK(d <= std::min(p.len, q.len) + 1);
      CHECK(d == meet_depth(q, p));
    }
}

TEST_CASE("antichain reduction and boundary expansion") {
  TreeShape s(3);
  std::vector<Node2> v{kRoot2, {{1, 0}, {1, 0}}, {{2, 1}, {1, 1}}};
  auto m = antichain_maxima(v);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == kRoot2);
  CHECK(antichain_maxima(m) == m);

  auto leaves = boundary_leaves({kRoot2}, s);
  CHECK(leaves.size() == 64);  // 8 x 8 boundary pairs at depth 3
  for (const auto& l : leaves) CHECK(is_boundary_pair(l, s));

  NodeSet2 e{SetKind::kExact, leaves};
  auto b = boundary_projection(e);
  CHECK(b.kind == SetKind::kBoundary);
  CHECK(b.items.size() == leaves.size());
}
