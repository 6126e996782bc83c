#pragma once

// Capacities and equilibrium measures.
//
// Three routes are kept deliberately separate so they can check each other:
//   * capacity()            dual projected-gradient ascent with a primal
//                           certificate, matrix-free or Gram-backed;
//   * capacity_tree_exact() the 1-D conductance recursion, exact;
//   * capacity_atomic()     direct active-set solve of the Gram system for
//                           finite point sets, including very deep ones.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "bicap/potential.hpp"
#include "bicap/tree.hpp"

namespace bicap {

// ---------------------------------------------------------------------------
// Exact 1-D capacity of a leaf set: series-parallel conductances with one
// unit resistor per vertex, then the current split gives the equilibrium
// measure.  V = 1 holds exactly on the target leaves.

struct TreeCapacityResult {
  double cap = 0;
  Measure1 equilibrium;
};

inline TreeCapacityResult capacity_tree_exact(const std::vector<Node1>& leaves, TreeShape s) {
  TreeCapacityResult r{0.0, Measure1(s)};
  if (leaves.empty()) return r;

  std::map<Node1, double> cond;
  for (auto l : leaves) {
    if (!valid(l, s) || !is_leaf(l, s)) throw std::invalid_argument("target must be a leaf set");
    cond[l] = 1.0;
  }
  for (int lvl = s.depth; lvl >= 1; --lvl) {
    std::map<Node1, double> up;
    auto lo = cond.lower_bound(Node1{lvl, 0});
    auto hi = cond.lower_bound(Node1{lvl + 1, 0});
    for (auto it = lo; it != hi; ++it) up[parent(it->first)] += it->second;
    for (const auto& [p, sum] : up) cond[p] = sum / (1.0 + sum);
  }
  r.cap = cond.at(kRoot1);

  std::map<Node1, double> mass;
  mass[kRoot1] = r.cap;
  for (int lvl = 0; lvl < s.depth; ++lvl) {
    auto lo = mass.lower_bound(Node1{lvl, 0});
    auto hi = mass.lower_bound(Node1{lvl + 1, 0});
    for (auto it = lo; it != hi; ++it) {
      Node1 n = it->first;
      Node1 c0 = child(n, 0), c1 = child(n, 1);
      double g0 = cond.count(c0) ? cond.at(c0) : 0.0;
      double g1 = cond.count(c1) ? cond.at(c1) : 0.0;
      double g = g0 + g1;
      if (g == 0) continue;
      if (g0 > 0) mass[c0] = it->second * (g0 / g);
      if (g1 > 0) mass[c1] = it->second * (g1 / g);
    }
  }
  for (const auto& [n, w] : mass)
    if (is_leaf(n, s) && w > 0) r.equilibrium.add(n, w);
  return r;
}

// ---------------------------------------------------------------------------
// Dual ascent core.  Maximizes G(mu) = 2*sum(mu) - mu^T K mu over mu >= 0,
// where K is the ancestor-count Gram of the constraint points.  The primal
// certificate is free: phi = I*mu has ||phi||^2 = mu^T K mu, and phi scaled
// by 1/min V is admissible, giving the upper bound of the duality gap.
// Accelerated steps with restart; everything is deterministic.

struct DualState {
  std::vector<double> mu;
  std::vector<double> V;
  double lower = 0, upper = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool certified = false;
};

template <class ApplyK>
double lambda_max_estimate(std::size_t m, ApplyK&& applyK, int iters = 60) {
  std::vector<double> v(m, 1.0 / std::sqrt(double(m))), w(m, 0.0);
  double lam = 1.0;
  for (int it = 0; it < iters; ++it) {
    applyK(v, w);
    double num = 0, nn = 0;
    for (std::size_t i = 0; i < m; ++i) {
      num += v[i] * w[i];
      nn += w[i] * w[i];
    }
    if (nn == 0) return 1.0;
    lam = num;
    nn = std::sqrt(nn);
    for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / nn;
  }
  return lam;
}

template <class ApplyK>
DualState dual_ascent(std::size_t m, ApplyK&& applyK, double tol, int max_iters) {
  DualState st;
  if (m == 0) {
    st.certified = true;
    st.gap = 0;
    return st;
  }
  double lam = lambda_max_estimate(m, applyK);
  double step = 1.0 / (2.0 * lam * 1.02);

  std::vector<double> x(m, 1.0 / lam), y, vx(m, 0.0), vy(m, 0.0), xn(m, 0.0), vn(m, 0.0);
  applyK(x, vx);
  auto value = [&](const std::vector<double>& mu, const std::vector<double>& v) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += 2 * mu[i] - mu[i] * v[i];
    return s;
  };
  double gx = value(x, vx);
  y = x;
  vy = vx;
  double t = 1.0;

  for (int it = 1; it <= max_iters; ++it) {
    st.iterations = it;
    for (std::size_t i = 0; i < m; ++i) {
      double z = y[i] + step * 2.0 * (1.0 - vy[i]);
      xn[i] = z > 0 ? z : 0.0;
    }
    applyK(xn, vn);
    double gn = value(xn, vn);
    if (gn < gx && t > 1.0) {
      // momentum overshoot: restart from the last accepted point
      y = x;
      vy = vx;
      t = 1.0;
      continue;
    }
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double beta = (t - 1.0) / tn;
    for (std::size_t i = 0; i < m; ++i) y[i] = xn[i] + beta * (xn[i] - x[i]);
    applyK(y, vy);
    x.swap(xn);
    vx.swap(vn);
    gx = gn;
    t = tn;

    st.lower = std::max(st.lower, gx);
    double minv = std::numeric_limits<double>::infinity();
    double en = 0;
    for (std::size_t i = 0; i < m; ++i) {
      minv = std::min(minv, vx[i]);
      en += x[i] * vx[i];
    }
    if (minv > 0) st.upper = std::min(st.upper, en / (minv * minv));
    if (st.upper < std::numeric_limits<double>::infinity()) {
      st.gap = (st.upper - st.lower) / st.upper;
      if (st.gap <= tol) {
        st.certified = true;
        break;
      }
    }
  }
  st.mu = x;
  st.V = vx;
  return st;
}

// ---------------------------------------------------------------------------
// General solver.

struct CapacityProblem {
  TreeShape shape;
  NodeSet2 target;
  double tol = 1e-8;
  int max_iters = 10000;
  bool want_primal = true;
};

struct CapacityResult {
  double cap = 0;
  Measure2 equilibrium;
  Function2 primal;  // I* of the equilibrium measure
  double gap = 0;
  int iterations = 0;
  bool certified = true;

  explicit CapacityResult(TreeShape s) : equilibrium(s), primal(s) {}
};

inline std::vector<Node2> constraint_points(const NodeSet2& set, TreeShape s) {
  for (const auto& n : set.items)
    if (!valid(n, s)) throw std::invalid_argument("target node outside tree shape");
  auto gens = antichain_maxima(set.items);
  if (set.kind == SetKind::kBoundary) return boundary_leaves(gens, s);
  return gens;
}

inline constexpr std::size_t kGramPointLimit = 1400;

inline CapacityResult capacity(const CapacityProblem& p) {
  CapacityResult res(p.shape);
  auto pts = constraint_points(p.target, p.shape);
  std::size_t m = pts.size();
  if (m == 0) {
    res.certified = true;
    return res;  // empty target has zero capacity
  }

  DualState st;
  if (m <= kGramPointLimit) {
    std::vector<double> K(m * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j)
        K[i * m + j] = K[j * m + i] = double(meet_count2(pts[i], pts[j]));
    auto apply = [&](const std::vector<double>& mu, std::vector<double>& out) {
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0;
        const double* row = &K[i * m];
        for (std::size_t j = 0; j < m; ++j) s += row[j] * mu[j];
        out[i] = s;
      }
    };
    st = dual_ascent(m, apply, p.tol, p.max_iters);
  } else {
    DenseField grid(p.shape);
    auto apply = [&](const std::vector<double>& mu, std::vector<double>& out) {
      std::fill(grid.raw().begin(), grid.raw().end(), 0.0);
      for (std::size_t i = 0; i < m; ++i) grid.at(pts[i]) += mu[i];
      grid.suffix_accumulate();
      grid.prefix_accumulate();
      for (std::size_t i = 0; i < m; ++i) out[i] = grid.at(pts[i]);
    };
    st = dual_ascent(m, apply, p.tol, p.max_iters);
  }

  res.gap = st.gap;
  res.iterations = st.iterations;
  res.certified = st.certified;
  double cap = 0;
  for (std::size_t i = 0; i < m; ++i) {
    cap += st.mu[i];
    if (st.mu[i] > 0) res.equilibrium.add(pts[i], st.mu[i]);
  }
  res.cap = cap;
  if (p.want_primal) {
    std::map<Node2, double> acc;
    for (const auto& [n, v] : res.equilibrium.entries)
      for (const auto& b : predecessors(n)) acc[b] += v;
    for (const auto& [n, v] : acc) res.primal.add(n, v);
  }
  return res;
}

// 1-D dual solve on a Gram of tree meets (used for the oracle battery).
struct CapacityResult1 {
  double cap = 0;
  Measure1 equilibrium;
  double gap = 0;
  int iterations = 0;
  bool certified = true;

  explicit CapacityResult1(TreeShape s) : equilibrium(s) {}
};

inline CapacityResult1 capacity1(const std::vector<Node1>& nodes, TreeShape s, double tol = 1e-8,
                                 int max_iters = 10000) {
  CapacityResult1 res(s);
  std::vector<Node1> pts = nodes;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // only maximal elements can carry constraints or mass
  std::vector<Node1> keep;
  for (auto a : pts) {
    bool dom = false;
    for (auto b : pts)
      if (a != b && le1(a, b)) { dom = true; break; }
    if (!dom) keep.push_back(a);
  }
  pts.swap(keep);
  std::size_t m = pts.size();
  if (m == 0) return res;
  std::vector<double> K(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j)
      K[i * m + j] = K[j * m + i] = double(meet_count1(pts[i], pts[j]));
  auto apply = [&](const std::vector<double>& mu, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0;
      const double* row = &K[i * m];
      for (std::size_t j = 0; j < m; ++j) sum += row[j] * mu[j];
      out[i] = sum;
    }
  };
  DualState st = dual_ascent(m, apply, tol, max_iters);
  res.gap = st.gap;
  res.iterations = st.iterations;
  res.certified = st.certified;
  for (std::size_t i = 0; i < m; ++i) {
    res.cap += st.mu[i];
    if (st.mu[i] > 0) res.equilibrium.add(pts[i], st.mu[i]);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Atomic solver: direct active-set resolution of the equilibrium system
// K mu = 1, mu >= 0, V >= 1 off the support.  The Gram is normalized by its
// largest diagonal entry before factorization and the result is rescaled,
// which keeps very deep instances well conditioned.

struct AtomicResult {
  double cap = 0;
  std::vector<double> mass;  // per input point, merged duplicates share index of first copy
  std::vector<double> V;     // potential at the points
  int merged_duplicates = 0;
  int iterations = 0;
  bool certified = true;
};

inline AtomicResult solve_gram_equilibrium(const Eigen::MatrixXd& K_in, double tol = 1e-12) {
  const int n = int(K_in.rows());
  AtomicResult r;
  if (n == 0) return r;
  double scale = K_in.diagonal().maxCoeff();
  Eigen::MatrixXd K = K_in / scale;

  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);

  int max_passes = 6 * n + 20;
  int pass = 0;
  for (; pass < max_passes; ++pass) {
    const int k = int(active.size());
    Eigen::MatrixXd A(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) A(i, j) = K(active[i], active[j]);
    Eigen::VectorXd z = A.llt().solve(Eigen::VectorXd::Ones(k));

    int drop = -1;
    double worst = -tol;
    for (int i = 0; i < k; ++i)
      if (z(i) < worst) { worst = z(i); drop = i; }
    if (drop >= 0) {
      active.erase(active.begin() + drop);
      continue;
    }

    mu.setZero();
    for (int i = 0; i < k; ++i) mu(active[i]) = std::max(0.0, z(i));
    Eigen::VectorXd V = K * mu;
    int add = -1;
    double low = 1.0 - 1e-10;
    for (int i = 0; i < n; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      if (V(i) < low) { low = V(i); add = i; }
    }
    if (add >= 0) {
      active.push_back(add);
      continue;
    }
    r.V.assign(V.data(), V.data() + n);
    break;
  }
  r.iterations = pass + 1;
  r.certified = pass < max_passes;
  r.mass.resize(n);
  for (int i = 0; i < n; ++i) r.mass[i] = mu(i) / scale;
  for (int i = 0; i < n; ++i) r.cap += r.mass[i];
  if (r.V.empty()) {  // never reached the clean exit
    Eigen::VectorXd V = K * mu;
    r.V.assign(V.data(), V.data() + n);
  }
  return r;
}

template <class Point, class MeetCount>
AtomicResult capacity_atomic_impl(const std::vector<Point>& pts_in, MeetCount&& d,
                                  double tol = 1e-12) {
  std::vector<Point> pts;
  int merged = 0;
  for (const auto& p : pts_in) {
    if (std::find(pts.begin(), pts.end(), p) != pts.end()) { ++merged; continue; }
    pts.push_back(p);
  }
  const int n = int(pts.size());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) K(i, j) = K(j, i) = double(d(pts[i], pts[j]));
  AtomicResult r = solve_gram_equilibrium(K, tol);
  r.merged_duplicates = merged;
  return r;
}

inline AtomicResult capacity_atomic(const std::vector<Node2>& pts) {
  return capacity_atomic_impl(pts, [](Node2 a, Node2 b) { return double(meet_count2(a, b)); });
}
inline AtomicResult capacity_atomic(const std::vector<PathNode2>& pts) {
  return capacity_atomic_impl(
      pts, [](const PathNode2& a, const PathNode2& b) { return meet_count2(a, b); });
}

// ---------------------------------------------------------------------------
// Disintegration onto the distinguished boundary.  An interior atom spreads
// uniformly (in the dyadic weight) over the boundary pairs below it; a
// mixed-level atom spreads only in its interior coordinate; boundary atoms
// stay put.  Total mass is preserved.

inline Measure2 disintegrate_to_boundary(const Measure2& m,
                                         std::size_t max_atoms = (std::size_t{1} << 24)) {
  TreeShape s = m.shape;
  Measure2 out(s);
  std::map<Node2, double> acc;
  for (const auto& [n, v] : m.entries) {
    int bits = (s.depth - n.x.level) + (s.depth - n.y.level);
    if (bits >= 40 || (std::uint64_t{1} << bits) > max_atoms)
      throw std::length_error("disintegration exceeds atom cap");
    std::uint64_t nx = std::uint64_t{1} << (s.depth - n.x.level);
    std::uint64_t ny = std::uint64_t{1} << (s.depth - n.y.level);
    double w = v / double(nx) / double(ny);
    for (std::uint64_t i = 0; i < nx; ++i)
      for (std::uint64_t j = 0; j < ny; ++j)
        acc[{{s.depth, (n.x.pos << (s.depth - n.x.level)) | i},
             {s.depth, (n.y.pos << (s.depth - n.y.level)) | j}}] += w;
  }
  for (const auto& [n, v] : acc) out.add(n, v);
  return out;
}

// Mean of d_T(xi ^ omega) over the boundary arcs below a and b, against the
// uniform dyadic weight, divided by d_T(a ^ b).  Lands in [1, 3].
inline double martingale_ratio_check(Node1 a, Node1 b, TreeShape s) {
  if ((s.depth - a.level) + (s.depth - b.level) > 26)
    throw std::length_error("martingale check too large");
  std::uint64_t na = std::uint64_t{1} << (s.depth - a.level);
  std::uint64_t nb = std::uint64_t{1} << (s.depth - b.level);
  double sum = 0;
  for (std::uint64_t i = 0; i < na; ++i) {
    Node1 xi{s.depth, (a.pos << (s.depth - a.level)) | i};
    for (std::uint64_t j = 0; j < nb; ++j) {
      Node1 om{s.depth, (b.pos << (s.depth - b.level)) | j};
      sum += double(meet_count1(xi, om));
    }
  }
  double avg = sum / double(na) / double(nb);
  return avg / double(meet_count1(a, b));
}

}  // namespace bicap
