#pragma once

// Staircase configurations on the bitree: n+1 points on the geodesics to a
// fixed boundary pair, with coordinate depths b^{n-i} and b^i.  Every point
// has the same ancestor count b^n, while the pairwise counts decay like
// b^{n-|i-j|}.  Their equilibrium measure pushes the potential at the anchor
// to about n/b times its value on the support, which is the failure of the
// maximum principle at configurable scale.  All linear algebra runs on the
// Gram normalized by b^n, so the instances stay well conditioned at any
// depth; the raw depths never need to be materialized.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bicap/capacity.hpp"
#include "bicap/tree.hpp"

namespace bicap {

struct StaircaseConfig {
  int base = 20;
  int steps = 40;  // n; the staircase has n+1 points
};

struct StaircaseResult {
  StaircaseConfig config;
  double k = 0;                          // common ancestor count b^n
  std::vector<double> mass_normalized;   // k * mass at each point
  std::vector<double> v_on_support;      // potential at the points
  double cap = 0;
  double v_at_anchor = 0;                // equals k * total mass
  double sup_inf_ratio = 0;              // over points with positive mass
  double offdiag_row_max_over_k = 0;     // max_i sum_{j != i} d(a_i ^ a_j) / k
  bool certified = true;
};

inline StaircaseResult build_staircase(const StaircaseConfig& cfg) {
  if (cfg.base < 2 || cfg.steps < 1) throw std::invalid_argument("base >= 2 and steps >= 1");
  const int n = cfg.steps;
  const int m = n + 1;
  StaircaseResult r;
  r.config = cfg;
  r.k = std::pow(double(cfg.base), double(n));

  // Gram in units of k: entry (i, j) is b^{-|i-j|}
  Eigen::MatrixXd K(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) K(i, j) = std::pow(double(cfg.base), -std::abs(i - j));
  for (int i = 0; i < m; ++i) {
    double row = 0;
    for (int j = 0; j < m; ++j)
      if (i != j) row += K(i, j);
    r.offdiag_row_max_over_k = std::max(r.offdiag_row_max_over_k, row);
  }

  auto eq = solve_gram_equilibrium(K);
  r.certified = eq.certified;
  r.mass_normalized = eq.mass;  // K is already normalized, so these are k * mass
  r.v_on_support = eq.V;
  double total = 0, lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double v : eq.mass) {
    total += v;
    if (v > 0) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  r.cap = total / r.k;
  r.v_at_anchor = total;  // d(anchor ^ a_i) = k for every point
  r.sup_inf_ratio = lo > 0 ? hi / lo : 0.0;
  return r;
}

// Explicit vertices along the all-zeros geodesic, available whenever the
// depths fit the packed representation.  The anchor is the all-zeros
// boundary pair at depth b^n - 1.
inline std::vector<Node2> staircase_points(const StaircaseConfig& cfg, TreeShape s) {
  double need = std::pow(double(cfg.base), double(cfg.steps)) - 1;
  if (need > double(s.depth))
    throw std::invalid_argument("staircase depth exceeds the tree shape");
  std::vector<Node2> pts;
  for (int i = 0; i <= cfg.steps; ++i) {
    std::int64_t dx = 1;
    for (int t = 0; t < cfg.steps - i; ++t) dx *= cfg.base;
    std::int64_t dy = 1;
    for (int t = 0; t < i; ++t) dy *= cfg.base;
    pts.push_back({{int(dx - 1), 0}, {int(dy - 1), 0}});
  }
  return pts;
}

// A pair (mu, nu) witnessing the failure of the domination principle:
// nu is the unit mass at the root pair, whose potential is identically one,
// hence matches V^mu on supp mu; yet V^mu exceeds lambda at the anchor.
struct DominationFailure {
  StaircaseResult staircase;
  double nu_potential = 1.0;  // V of the root unit mass, everywhere
  double witness_value = 0;   // V^mu at the anchor
};

inline DominationFailure domination_failure(double lambda) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  DominationFailure d;
  StaircaseConfig cfg;
  cfg.base = 20;
  cfg.steps = 20 * (int(std::floor(lambda)) + 1);
  d.staircase = build_staircase(cfg);
  d.witness_value = d.staircase.v_at_anchor;
  return d;
}

}  // namespace bicap
