#pragma once

// Deterministic atom-level discretization of the closed bidisc onto the
// bitree, the kernel-versus-graph comparability probe, and the end-to-end
// Carleson testing pipeline.
//
// The disc decomposes into half-boxes: level j occupies the radial band
// 1 - r in (2^{-j-1}, 2^{-j}] and splits the circle into 2^j half-open
// arcs [p, p+1) * 2pi * 2^{-j}.  Radial ties go to the larger level and an
// arc endpoint belongs to the arc it starts, so every point lands in
// exactly one box; points within 2^{-L} of the boundary clamp to the
// leaves, which is the truncation horizon.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bicap/potential.hpp"
#include "bicap/sci.hpp"
#include "bicap/tree.hpp"

namespace bicap {

struct BidiscAtom {
  double r1 = 0, theta1 = 0;
  double r2 = 0, theta2 = 0;
  double mass = 0;
};

inline Node1 node_of_point(double r, double theta, TreeShape s) {
  if (r < 0 || r > 1) throw std::invalid_argument("radius must lie in [0, 1]");
  double t = 1.0 - r;
  int level = s.depth;
  for (int j = 0; j < s.depth; ++j)
    if (t > std::ldexp(1.0, -j - 1)) {
      level = j;
      break;
    }
  double u = theta / (2.0 * std::numbers::pi);
  u -= std::floor(u);
  std::uint64_t m = std::uint64_t{1} << level;
  auto p = std::uint64_t(u * double(m));
  if (p >= m) p = m - 1;
  return {level, p};
}

inline Measure2 pullback_measure(const std::vector<BidiscAtom>& atoms, TreeShape s) {
  Measure2 out(s);
  for (const auto& a : atoms)
    out.add({node_of_point(a.r1, a.theta1, s), node_of_point(a.r2, a.theta2, s)}, a.mass);
  return out;
}

// Product logarithmic kernel against the arc-extended ancestor counts of the
// assigned vertices.
struct KernelCheck {
  double kernel = 0;
  double tree = 0;
  double ratio = 0;
  bool degenerate = false;  // coincident boundary coordinates: kernel blows up
};

inline KernelCheck kernel_vs_tree_check(const BidiscAtom& z, const BidiscAtom& w, TreeShape s) {
  KernelCheck out;
  auto factor = [&](double rz, double tz, double rw, double tw) {
    std::complex<double> a = std::polar(rz, tz), b = std::polar(rw, tw);
    std::complex<double> c = 1.0 - std::conj(a) * b;
    if (std::abs(c) == 0) {
      out.degenerate = true;
      return 0.0;
    }
    return std::abs(10.0 - std::log(c));
  };
  double k1 = factor(z.r1, z.theta1, w.r1, w.theta1);
  double k2 = factor(z.r2, z.theta2, w.r2, w.theta2);
  if (out.degenerate) return out;
  out.kernel = k1 * k2;
  Node2 a{node_of_point(z.r1, z.theta1, s), node_of_point(z.r2, z.theta2, s)};
  Node2 b{node_of_point(w.r1, w.theta1, s), node_of_point(w.r2, w.theta2, s)};
  out.tree = double(g_ancestor_count2(a, b, s));
  out.ratio = out.kernel / out.tree;
  return out;
}

// Pull the atoms back, estimate the embedding constant, scan for the best
// capacitary collection, and verify the exact easy direction on sampled
// collections.
struct CarlesonReport {
  double total_mass = 0;
  TraceNormResult trace;
  SubcapResult subcap;
  double ratio = 0;  // embedding constant over capacitary constant
  bool exact_direction_ok = true;
  int collections_checked = 0;
};

inline CarlesonReport carleson_test(const std::vector<BidiscAtom>& atoms, TreeShape s,
                                    const std::vector<SubcapStrategy>& strategies =
                                        {SubcapStrategy::kSingleBox,
                                         SubcapStrategy::kRandomCollections},
                                    std::uint64_t seed = 1, int samples = 50,
                                    const std::vector<Function2>* guides = nullptr,
                                    double tol = 1e-8) {
  Measure2 nu = pullback_measure(atoms, s);
  if (nu.empty()) throw std::invalid_argument("atom list carries no mass");
  CarlesonReport rep;
  rep.total_mass = nu.total();
  rep.trace = trace_norm_estimate(nu);
  for (const auto& strat : strategies) {
    auto r = subcap_constant(nu, strat, s, seed, samples, guides, tol);
    if (r.constant > rep.subcap.constant) rep.subcap = r;
  }
  rep.ratio = rep.subcap.constant > 0 ? rep.trace.norm_sq / rep.subcap.constant : 0.0;

  // exact direction on sampled collections around the atoms
  Rng g(seed + 1);
  std::vector<Node2> candidates;
  for (const auto& [n, v] : nu.entries) {
    (void)v;
    for (const auto& p : predecessors(n)) candidates.push_back(p);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (int t = 0; t < 20 && !candidates.empty(); ++t) {
    int k = uniform_int(g, 1, 5);
    std::vector<Node2> coll;
    for (int i = 0; i < k; ++i) coll.push_back(candidates[uniform_u64(g, candidates.size())]);
    auto c = trace_upper_bound_check(nu, NodeSet2{SetKind::kDown, antichain_maxima(coll)}, s, tol);
    rep.exact_direction_ok = rep.exact_direction_ok && c.ok;
    ++rep.collections_checked;
  }
  return rep;
}

}  // namespace bicap
