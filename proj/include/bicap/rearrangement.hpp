#pragma once

// Rearrangement constructions.
//
// The 1-D step takes a boundary set F with equilibrium measure rho, a
// function f whose support sees only a delta-sliver of V^rho, and returns a
// measure sigma with V^sigma >= If on F at a delta-sized energy price.  The
// 2-D step runs the 1-D construction on every horizontal layer of the
// bitree and stacks the results into an admissible function for the set
// where the restricted potential is large.  Both return their certificates;
// callers assert them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "bicap/capacity.hpp"
#include "bicap/potential.hpp"
#include "bicap/tree.hpp"

namespace bicap {

struct StoppingSet {
  std::vector<Node1> antichain;
  std::vector<double> vrho;  // V^rho at the members
};

// First vertices, top-down, where V^rho exceeds delta.  Branches without
// mass below never exceed and are pruned.
inline StoppingSet build_stopping_set(const Measure1& rho, double delta) {
  TreeShape s = rho.shape;
  auto mass = dense_of(rho);
  suffix_accumulate1(mass);
  auto pot = mass;
  prefix_accumulate1(pot);

  StoppingSet out;
  std::vector<std::uint64_t> stack{1};
  while (!stack.empty()) {
    std::uint64_t h = stack.back();
    stack.pop_back();
    if (mass[h] == 0) continue;
    if (pot[h] > delta) {
      out.antichain.push_back(node_at_heap(h));
      out.vrho.push_back(pot[h]);
      continue;
    }
    if (2 * h + 1 <= std::uint64_t(s.nodes_per_tree())) {
      stack.push_back(2 * h);
      stack.push_back(2 * h + 1);
    }
  }
  return out;
}

struct Rearrange1dResult {
  Measure1 sigma;
  StoppingSet stops;
  double f_norm_sq = 0;
  double sigma_energy = 0;
  double c_measured = 0;  // E[sigma] / (delta ||f||^2)

  explicit Rearrange1dResult(TreeShape s) : sigma(s) {}
};

inline Rearrange1dResult rearrange_1d(const std::vector<Node1>& F, const Function1& f,
                                      double delta) {
  TreeShape s = f.shape;
  if (delta <= 0 || delta > 1.0 / 3.0)
    throw std::invalid_argument("delta must lie in (0, 1/3]");
  Rearrange1dResult out(s);
  for (const auto& [n, v] : f.entries) out.f_norm_sq += v * v;
  if (f.empty()) return out;

  auto eq = capacity_tree_exact(F, s);
  const Measure1& rho = eq.equilibrium;
  auto vrho = dense_potential1(rho);
  for (const auto& [n, v] : f.entries) {
    (void)v;
    if (vrho[heap_index(n)] > delta * (1 + 1e-12))
      throw std::domain_error("rearrangement hypothesis violated: V^rho > delta on supp f");
  }
  if (F.empty()) return out;

  out.stops = build_stopping_set(rho, delta);
  std::set<Node1> members(out.stops.antichain.begin(), out.stops.antichain.end());

  // If at the members
  std::map<Node1, double> gain;
  for (const auto& b : out.stops.antichain) gain[b] = hardy(f, b);

  double scale = 1.0 / (1.0 - 2.0 * delta);
  for (const auto& [leaf, m] : rho.entries) {
    Node1 beta = leaf;
    bool found = false;
    for (int lvl = 0; lvl <= leaf.level; ++lvl) {
      Node1 anc = ancestor_at(leaf, lvl);
      if (members.count(anc)) {
        beta = anc;
        found = true;
        break;
      }
    }
    if (!found) throw std::logic_error("stopping set does not cover the equilibrium mass");
    double w = scale * gain.at(beta) * m;
    if (w > 0) out.sigma.add(leaf, w);
  }

  auto smass = dense_of(out.sigma);
  suffix_accumulate1(smass);
  for (double v : smass) out.sigma_energy += v * v;
  out.c_measured = out.f_norm_sq > 0 ? out.sigma_energy / (delta * out.f_norm_sq) : 0.0;

  // construction guarantee, checked before returning
  auto vsigma = smass;
  prefix_accumulate1(vsigma);
  auto iff = dense_of(f);
  prefix_accumulate1(iff);
  for (auto l : F) {
    std::uint64_t h = heap_index(l);
    if (vsigma[h] < iff[h] * (1 - 1e-9) - 1e-12)
      throw std::logic_error("rearranged potential fails to dominate If on F");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2-D rearrangement.

struct LayerInfo {
  Node1 alpha_y;
  double phi_norm_sq = 0;  // before the global 3/2 factor
  double f_norm_sq = 0;
  double sigma_mass = 0;
};

struct RearrangementOutput {
  Function2 phi;
  std::vector<LayerInfo> layers;
  std::vector<Node2> exceed_set;  // boundary pairs with V_delta > lambda
  double min_hardy_on_exceed = std::numeric_limits<double>::infinity();
  double phi_norm_sq = 0;
  double restricted_energy = 0;  // E_delta[mu]
  double cert_ratio = 0;         // ||phi||^2 lambda / E_delta[mu]
  double delta = 0, lambda = 0;

  explicit RearrangementOutput(TreeShape s) : phi(s) {}
};

inline RearrangementOutput rearrange_2d(const Measure2& mu, double delta, double lambda) {
  TreeShape s = mu.shape;
  RearrangementOutput out(s);
  out.delta = delta;
  out.lambda = lambda;
  if (delta <= 0) throw std::invalid_argument("delta must be positive");
  if (lambda < 9 * delta)
    throw std::invalid_argument("lambda must be at least 9*delta so the layer step gets delta' <= 1/3");
  for (const auto& [n, v] : mu.entries) {
    (void)v;
    if (!is_boundary_pair(n, s))
      throw std::invalid_argument("measure must live on the distinguished boundary");
  }
  if (mu.empty()) return out;

  // rescale to delta = 1
  Measure2 m1(s);
  for (const auto& [n, v] : mu.entries) m1.add(n, v / delta);
  double lam = lambda / delta;

  const int n1 = int(s.nodes_per_tree());
  DenseField B = dense_successor_mass(m1);
  DenseField V = B;
  V.prefix_accumulate();
  DenseField masked(s);
  for (int hx = 1; hx <= n1; ++hx)
    for (int hy = 1; hy <= n1; ++hy)
      masked.at(hx, hy) = V.at(hx, hy) <= 1.0 ? B.at(hx, hy) : 0.0;
  double e1 = masked.sum_of_squares();
  out.restricted_energy = e1 * delta * delta;
  DenseField vd = masked;
  vd.prefix_accumulate();

  // exceedance set on the boundary pairs
  std::uint64_t leaf_lo = std::uint64_t{1} << s.depth;
  std::uint64_t leaf_hi = std::uint64_t{1} << (s.depth + 1);
  for (std::uint64_t hx = leaf_lo; hx < leaf_hi; ++hx)
    for (std::uint64_t hy = leaf_lo; hy < leaf_hi; ++hy)
      if (vd.at(hx, hy) > lam)
        out.exceed_set.push_back({node_at_heap(hx), node_at_heap(hy)});

  // layers
  std::vector<double> phi_dense(std::size_t(n1) + 1, 0.0);
  for (int hy = 1; hy <= n1; ++hy) {
    Node1 ay = node_at_heap(std::uint64_t(hy));
    // E_R: exceedance pairs under this layer whose fiber potential is large
    std::vector<Node1> fr;
    for (const auto& w : out.exceed_set) {
      if (!le1(w.y, ay)) continue;
      if (vd.at(heap_index(w.x), std::uint64_t(hy)) > lam / 3.0) fr.push_back(w.x);
    }
    if (fr.empty()) continue;
    std::sort(fr.begin(), fr.end());
    fr.erase(std::unique(fr.begin(), fr.end()), fr.end());

    Function1 f_r{s};
    double fr_norm = 0;
    for (int hx = 1; hx <= n1; ++hx)
      if (V.at(std::uint64_t(hx), std::uint64_t(hy)) <= 1.0) {
        double v = B.at(std::uint64_t(hx), std::uint64_t(hy));
        if (v > 0) {
          f_r.add(node_at_heap(std::uint64_t(hx)), v);
          fr_norm += v * v;
        }
      }

    auto r1 = rearrange_1d(fr, f_r, 3.0 / lam);

    std::fill(phi_dense.begin(), phi_dense.end(), 0.0);
    for (const auto& [n, v] : r1.sigma.entries) phi_dense[heap_index(n)] += v;
    suffix_accumulate1(phi_dense);

    LayerInfo li;
    li.alpha_y = ay;
    li.f_norm_sq = fr_norm;
    li.sigma_mass = r1.sigma.total();
    for (int hx = 1; hx <= n1; ++hx) {
      double v = phi_dense[std::size_t(hx)];
      if (v > 0) {
        out.phi.add({node_at_heap(std::uint64_t(hx)), ay}, 1.5 * v);
        li.phi_norm_sq += v * v;
      }
    }
    if (li.phi_norm_sq > 0 || li.sigma_mass > 0) out.layers.push_back(li);
  }

  // certificates, in the original (unscaled) units: phi_out = delta * phi'
  DenseField phig(s);
  for (const auto& [n, v] : out.phi.entries) phig.at(n) += v;
  double norm1 = 0;
  for (double v : phig.raw()) norm1 += v * v;
  phig.prefix_accumulate();
  for (const auto& w : out.exceed_set)
    out.min_hardy_on_exceed = std::min(out.min_hardy_on_exceed, phig.at(w));

  // rescale phi back
  Function2 scaled(s);
  for (const auto& [n, v] : out.phi.entries) scaled.add(n, delta * v);
  out.phi = std::move(scaled);
  out.phi_norm_sq = norm1 * delta * delta;
  out.min_hardy_on_exceed *= delta;
  out.cert_ratio =
      out.restricted_energy > 0 ? out.phi_norm_sq * lambda / out.restricted_energy : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Capacity of the exceedance set of an equilibrium potential.

struct MaxPrincipleReport {
  double lambda = 0;
  double cap_e = 0;
  double cap_exceed = 0;
  double ratio_lambda3 = 0;  // lambda^3 cap(E_lambda) / cap(E)
  std::size_t exceed_count = 0;
  bool certified = true;
};

inline MaxPrincipleReport quantitative_max_principle(const NodeSet2& target, double lambda,
                                                     TreeShape s, double tol = 1e-8,
                                                     int max_iters = 10000) {
  if (lambda <= 1) throw std::invalid_argument("lambda must exceed one");
  MaxPrincipleReport rep;
  rep.lambda = lambda;
  CapacityProblem p{s, target, tol, max_iters, false};
  auto r = capacity(p);
  rep.cap_e = r.cap;
  rep.certified = r.certified;
  if (r.cap <= 0) throw std::invalid_argument("target must have positive capacity");

  DenseField v = dense_potential(r.equilibrium);
  std::vector<Node2> exceed;
  std::uint64_t leaf_lo = std::uint64_t{1} << s.depth;
  std::uint64_t leaf_hi = std::uint64_t{1} << (s.depth + 1);
  for (std::uint64_t hx = leaf_lo; hx < leaf_hi; ++hx)
    for (std::uint64_t hy = leaf_lo; hy < leaf_hi; ++hy)
      if (v.at(hx, hy) > lambda) exceed.push_back({node_at_heap(hx), node_at_heap(hy)});
  rep.exceed_count = exceed.size();
  if (exceed.empty()) return rep;

  auto rl = capacity({s, NodeSet2{SetKind::kExact, exceed}, tol, max_iters, false});
  rep.cap_exceed = rl.cap;
  rep.certified = rep.certified && rl.certified;
  rep.ratio_lambda3 = lambda * lambda * lambda * rl.cap / rep.cap_e;
  return rep;
}

// ---------------------------------------------------------------------------
// Restricted-energy decay across a delta grid.

struct EnergyDecayRow {
  double delta = 0;
  double restricted = 0;  // E_delta[mu]
  double normalized = 0;  // E_delta / (delta^{1/3} E)
};

struct EnergyDecayReport {
  double energy_total = 0;
  double min_positive_potential = 0;
  bool grid_reaches_below = false;
  bool tail_found = false;  // some delta drops at least 90% of the energy
  std::vector<EnergyDecayRow> rows;
};

inline EnergyDecayReport energy_decay(const Measure2& mu, const std::vector<double>& deltas) {
  TreeShape s = mu.shape;
  for (const auto& [n, v] : mu.entries) {
    (void)v;
    if (potential(mu, n) < 1.0 - 1e-9)
      throw std::domain_error("measure must have potential >= 1 on its support");
  }
  EnergyDecayReport rep;
  DenseField B = dense_successor_mass(mu);
  DenseField V = B;
  V.prefix_accumulate();
  const int n1 = int(s.nodes_per_tree());
  rep.min_positive_potential = std::numeric_limits<double>::infinity();
  for (int hx = 1; hx <= n1; ++hx)
    for (int hy = 1; hy <= n1; ++hy) {
      double b = B.at(hx, hy);
      rep.energy_total += b * b;
      if (b > 0) rep.min_positive_potential = std::min(rep.min_positive_potential, V.at(hx, hy));
    }
  for (double d : deltas) {
    if (d <= 0) throw std::invalid_argument("delta grid must be positive");
    EnergyDecayRow row;
    row.delta = d;
    for (int hx = 1; hx <= n1; ++hx)
      for (int hy = 1; hy <= n1; ++hy)
        if (V.at(hx, hy) <= d) {
          double b = B.at(hx, hy);
          row.restricted += b * b;
        }
    row.normalized = rep.energy_total > 0
                         ? row.restricted / (std::cbrt(d) * rep.energy_total)
                         : 0.0;
    if (d < rep.min_positive_potential) rep.grid_reaches_below = true;
    if (rep.energy_total - row.restricted >= 0.9 * rep.energy_total) rep.tail_found = true;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace bicap
