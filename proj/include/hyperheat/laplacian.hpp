// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "hyperheat/base_decomposition.hpp"
#include "hyperheat/config.hpp"
#include "hyperheat/graph.hpp"
#include "hyperheat/hypercore.hpp"

namespace hyperheat {

/// Lovász extension of the cut function of one edge: max - min of x on e.
inline double lovasz_cut_extension(const Hypergraph::Edge& e, const VertexVector& x) {
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (int v : e.vertices) {
    hi = std::max(hi, x[v]);
    lo = std::min(lo, x[v]);
  }
  return hi - lo;
}

/// sum_e w(e) f_e(x)^2, which equals <x, L_G(x)> for any element.
inline double lovasz_energy(const Hypergraph& g, const VertexVector& x) {
  double energy = 0.0;
  for (const auto& e : g.edges()) {
    const double f = lovasz_cut_extension(e, x);
    energy += e.weight * f * f;
  }
  return energy;
}

/// Absolute tie threshold for a vector: tol * max|x| (or tol when x == 0).
inline double tie_threshold(const VertexVector& x, double tol = default_tolerances().tie) {
  const double scale = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  return tol * (scale > 0.0 ? scale : 1.0);
}

/// Per-edge argmax/argmin sets and their refinements by an ordered partition.
struct SupportSelection {
  struct EdgeSupport {
    std::vector<int> top;           // S_e
    std::vector<int> bottom;        // I_e
    std::vector<int> top_refined;   // S_e^sigma
    std::vector<int> bottom_refined;  // I_e^sigma
    double delta = 0.0;             // max - min of mu on e
    bool constant() const { return top_refined == bottom_refined; }
  };
  std::vector<EdgeSupport> edges;
};

namespace detail {

inline void argmax_argmin(const Hypergraph::Edge& e, const VertexVector& x, double eps,
                          std::vector<int>& top, std::vector<int>& bottom, double& delta) {
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (int v : e.vertices) {
    hi = std::max(hi, x[v]);
    lo = std::min(lo, x[v]);
  }
  top.clear();
  bottom.clear();
  delta = hi - lo;
  if (delta <= eps) {
    top = e.vertices;
    bottom = e.vertices;
    return;
  }
  for (int v : e.vertices) {
    if (x[v] >= hi - eps) top.push_back(v);
    if (x[v] <= lo + eps) bottom.push_back(v);
  }
}

}  // namespace detail

/// Argmax/argmin sets of every edge at tie tolerance, without refinement.
inline SupportSelection value_selection(const Hypergraph& g, const VertexVector& x,
                                        double tol = default_tolerances().tie) {
  const double eps = tie_threshold(x, tol);
  SupportSelection sel;
  sel.edges.resize(g.num_edges());
  for (int i = 0; i < g.num_edges(); ++i) {
    auto& es = sel.edges[i];
    detail::argmax_argmin(g.edge(i), x, eps, es.top, es.bottom, es.delta);
    es.top_refined = es.top;
    es.bottom_refined = es.bottom;
  }
  return sel;
}

/// Support graph G' on V realising one element of L_G(x): each edge's weight
/// is spread uniformly over S_e x I_e, and self-loops make up the degrees.
/// Edges constant on x put all their weight into self-loops.
inline WeightedGraph support_graph(const Hypergraph& g, const VertexVector& x,
                                   double tol = default_tolerances().tie) {
  const int n = g.num_vertices();
  WeightedGraph gp(n);
  const auto sel = value_selection(g, x, tol);
  for (int i = 0; i < g.num_edges(); ++i) {
    const auto& es = sel.edges[i];
    if (es.constant()) continue;
    const double share = g.edge(i).weight / static_cast<double>(es.top.size() * es.bottom.size());
    for (int u : es.top)
      for (int v : es.bottom) gp.add_edge(u, v, share);
  }
  for (int v = 0; v < n; ++v) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != v) off += gp.weight(v, j);
    gp.set_self_loop(v, g.degree(v) - off);
  }
  return gp;
}

/// Canonical element of L_G(x) under the uniform split:
/// sum_e w(e) (b_e . x) b_e with b_e = avg 1_{S_e} - avg 1_{I_e}.
inline VertexVector laplacian_apply(const Hypergraph& g, const VertexVector& x,
                                    double tol = default_tolerances().tie) {
  VertexVector y = VertexVector::Zero(g.num_vertices());
  const double eps = tie_threshold(x, tol);
  std::vector<int> top, bottom;
  double delta;
  for (const auto& e : g.edges()) {
    detail::argmax_argmin(e, x, eps, top, bottom, delta);
    if (delta <= eps) continue;
    double hi = 0.0, lo = 0.0;
    for (int u : top) hi += x[u];
    for (int v : bottom) lo += x[v];
    hi /= static_cast<double>(top.size());
    lo /= static_cast<double>(bottom.size());
    const double flow = e.weight * (hi - lo);
    for (int u : top) y[u] += flow / static_cast<double>(top.size());
    for (int v : bottom) y[v] -= flow / static_cast<double>(bottom.size());
  }
  return y;
}

/// The normalized Laplacian rho -> L_G(D^{-1} rho), canonical element.
inline VertexVector normalized_laplacian_apply(const Hypergraph& g, const VertexVector& rho,
                                               double tol = default_tolerances().tie) {
  return laplacian_apply(g, to_mu(g, rho), tol);
}

/// Ordered equivalence classes U_1 > U_2 > ... > U_m of V.
///
/// Classes refine the level sets of mu (equal value up to tie tolerance);
/// within one level the classes are the groups of equal right-derivative of
/// mu, fastest-rising first.
struct OrderedPartition {
  std::vector<VertexSet> classes;
  std::vector<int> class_of;       // vertex -> class index
  std::vector<int> representative; // u_k
  std::vector<int> level;          // class -> level index (levels ordered by mu desc)
  Eigen::VectorXd mu;              // class value (mass-weighted level mean)
  Eigen::VectorXd velocity;        // class d(mu)/dt; zero when depth < 2
  int refinement_depth = 0;
  bool converged = false;

  int size() const { return static_cast<int>(classes.size()); }
};

namespace detail {

// Level sets of mu at tie tolerance, highest value first. Consecutive sorted
// values closer than eps are chained into one level.
inline std::vector<VertexSet> value_levels(const VertexVector& mu, double eps) {
  const int n = static_cast<int>(mu.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mu[a] > mu[b]; });
  std::vector<VertexSet> levels;
  for (int k = 0; k < n; ++k) {
    if (k == 0 || mu[order[k - 1]] - mu[order[k]] > eps) levels.emplace_back();
    levels.back().push_back(order[k]);
  }
  for (auto& l : levels) std::sort(l.begin(), l.end());
  return levels;
}

inline void index_classes(const Hypergraph& g, const VertexVector& rho, OrderedPartition& p) {
  const int n = g.num_vertices();
  p.class_of.assign(n, -1);
  p.representative.clear();
  p.mu.resize(p.size());
  for (int k = 0; k < p.size(); ++k) {
    p.representative.push_back(p.classes[k].front());
    for (int v : p.classes[k]) p.class_of[v] = k;
  }
  // Class values are the mass-weighted mean over the whole level so that
  // every class in a level carries the identical value.
  const int n_levels = p.level.empty() ? 0 : p.level.back() + 1;
  std::vector<double> mass(n_levels, 0.0), vol(n_levels, 0.0);
  for (int k = 0; k < p.size(); ++k)
    for (int v : p.classes[k]) {
      mass[p.level[k]] += rho[v];
      vol[p.level[k]] += g.degree(v);
    }
  for (int k = 0; k < p.size(); ++k) p.mu[k] = mass[p.level[k]] / vol[p.level[k]];
}

}  // namespace detail

/// Ordered partition of V whose classes share mu and every right-derivative
/// of mu at rho.
///
/// Round 1 groups vertices by mu value. Round 2 splits each level by the
/// right-derivative of mu, obtained as the minimum-norm element of the
/// Laplacian restricted to that level. Round 3 splits classes that separate
/// only at higher order, then checks that the collapsed dynamics reproduce
/// the round-2 derivatives. max_depth < 0 runs all rounds.
inline OrderedPartition ordered_partition(const Hypergraph& g, const VertexVector& rho,
                                          int max_depth = -1,
                                          double tol = default_tolerances().tie);

/// Selection refined by a partition: S_e^sigma is e ∩ (highest class
/// touching e), I_e^sigma is e ∩ (lowest class touching e).
inline SupportSelection support_selection(const Hypergraph& g, const OrderedPartition& p) {
  SupportSelection sel;
  sel.edges.resize(g.num_edges());
  for (int i = 0; i < g.num_edges(); ++i) {
    const auto& e = g.edge(i);
    auto& es = sel.edges[i];
    int top_class = p.size(), bottom_class = -1;
    int top_level = p.size(), bottom_level = -1;
    for (int v : e.vertices) {
      const int c = p.class_of[v];
      top_class = std::min(top_class, c);
      bottom_class = std::max(bottom_class, c);
      top_level = std::min(top_level, p.level[c]);
      bottom_level = std::max(bottom_level, p.level[c]);
    }
    for (int v : e.vertices) {
      const int c = p.class_of[v];
      if (p.level[c] == top_level) es.top.push_back(v);
      if (p.level[c] == bottom_level) es.bottom.push_back(v);
      if (c == top_class) es.top_refined.push_back(v);
      if (c == bottom_class) es.bottom_refined.push_back(v);
    }
    es.delta = p.mu[top_class] - p.mu[bottom_class];
  }
  return sel;
}

/// Collapsed graph on the classes of p: w~(k,l) sums w(e) over edges whose
/// refined top lies in U_k and refined bottom in U_l (and symmetrically);
/// self-loops make the class degree equal vol(U_k).
inline WeightedGraph collapsed_graph(const Hypergraph& g, const OrderedPartition& p,
                                     const SupportSelection& sel) {
  const int m = p.size();
  WeightedGraph gt(m);
  for (int i = 0; i < g.num_edges(); ++i) {
    const auto& es = sel.edges[i];
    const int k = p.class_of[es.top_refined.front()];
    const int l = p.class_of[es.bottom_refined.front()];
    if (k != l) gt.add_edge(k, l, g.edge(i).weight);
  }
  for (int k = 0; k < m; ++k) {
    double vol = 0.0;
    for (int v : p.classes[k]) vol += g.degree(v);
    double off = 0.0;
    for (int l = 0; l < m; ++l)
      if (l != k) off += gt.weight(k, l);
    gt.set_self_loop(k, vol - off);
  }
  return gt;
}

/// Class masses rho~_k = sum_{u in U_k} rho(u).
inline Eigen::VectorXd collapse(const OrderedPartition& p, const VertexVector& rho) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.size());
  for (int k = 0; k < p.size(); ++k)
    for (int v : p.classes[k]) out[k] += rho[v];
  return out;
}

/// Inverse of collapse under mu-equality within classes: rho(u) = d(u) mu~_k.
inline VertexVector expand(const Hypergraph& g, const OrderedPartition& p,
                           const Eigen::VectorXd& class_mass, const Eigen::VectorXd& class_degree) {
  VertexVector rho(g.num_vertices());
  for (int k = 0; k < p.size(); ++k) {
    const double mu = class_mass[k] / class_degree[k];
    for (int v : p.classes[k]) rho[v] = g.degree(v) * mu;
  }
  return rho;
}

namespace detail {

// Right-derivative of mu on one level: minimum-norm routing of the flows of
// the edges whose top or bottom lies in the level.
inline BaseDecomposition level_velocity(const Hypergraph& g, const VertexSet& level_members,
                                        const std::vector<int>& level_of_vertex,
                                        const std::vector<double>& level_mu, int level) {
  const int k = static_cast<int>(level_members.size());
  std::vector<int> local(g.num_vertices(), -1);
  for (int i = 0; i < k; ++i) local[level_members[i]] = i;
  CoverageFunction f;
  f.size = k;
  Eigen::VectorXd d(k);
  for (int i = 0; i < k; ++i) d[i] = g.degree(level_members[i]);
  std::vector<int> seen_edge;
  for (int v : level_members)
    for (int ei : g.incident(v)) seen_edge.push_back(ei);
  std::sort(seen_edge.begin(), seen_edge.end());
  seen_edge.erase(std::unique(seen_edge.begin(), seen_edge.end()), seen_edge.end());
  for (int ei : seen_edge) {
    const auto& e = g.edge(ei);
    int top = level, bottom = level;
    for (int v : e.vertices) {
      top = std::min(top, level_of_vertex[v]);
      bottom = std::max(bottom, level_of_vertex[v]);
    }
    if (top == bottom) continue;
    const double mass = e.weight * (level_mu[top] - level_mu[bottom]);
    std::vector<int> members;
    for (int v : e.vertices)
      if (level_of_vertex[v] == level) members.push_back(local[v]);
    if (top == level)
      f.out_terms.push_back({std::move(members), mass});
    else if (bottom == level)
      f.in_terms.push_back({std::move(members), mass});
  }
  return min_norm_base(f, d);
}

}  // namespace detail

namespace detail {

// Splits classes whose members share value and velocity but separate at a
// higher order. The collapsed dynamics are advanced a short time; any class
// whose members then receive different velocities is split in that order.
// Classes only ever split, so the loop ends after at most n rounds.
inline void refine_higher_order(const Hypergraph& g, const VertexVector& rho, double tol, OrderedPartition& p) {
  constexpr double kProbeTime = 1e-4;
  constexpr int kTaylorTerms = 10;
  for (int round = 0; round < g.num_vertices(); ++round) {
    if (std::all_of(p.classes.begin(), p.classes.end(), [](const VertexSet& c) { return c.size() == 1; })) return;
    const auto gt = collapsed_graph(g, p, support_selection(g, p));
    const Eigen::VectorXd dt = gt.degrees();
    const Eigen::MatrixXd a = -(dt.cwiseInverse().asDiagonal() * gt.laplacian()) * kProbeTime;
    Eigen::VectorXd term = p.mu, mu = p.mu;
    for (int k = 1; k <= kTaylorTerms; ++k) {
      term = a * term / k;
      mu += term;
    }
    VertexVector probe(g.num_vertices());
    for (int k = 0; k < p.size(); ++k)
      for (int v : p.classes[k]) probe[v] = g.degree(v) * mu[k];
    const auto q = ordered_partition(g, probe, 2, tol);

    OrderedPartition r;
    std::vector<double> velocity;
    bool split = false;
    for (int k = 0; k < p.size(); ++k) {
      std::map<int, VertexSet> pieces;
      for (int v : p.classes[k]) pieces[q.class_of[v]].push_back(v);
      split = split || pieces.size() > 1;
      for (auto& [idx, piece] : pieces) {
        r.classes.push_back(std::move(piece));
        r.level.push_back(p.level[k]);
        velocity.push_back(p.velocity[k]);
      }
    }
    if (!split) return;
    const Eigen::VectorXd vel = Eigen::Map<Eigen::VectorXd>(velocity.data(), velocity.size());
    p.classes = std::move(r.classes);
    p.level = std::move(r.level);
    index_classes(g, rho, p);
    p.velocity = vel;
  }
}

}  // namespace detail

inline OrderedPartition ordered_partition(const Hypergraph& g, const VertexVector& rho,
                                          int max_depth, double tol) {
  const int n = g.num_vertices();
  const VertexVector mu = to_mu(g, rho);
  const double eps = tie_threshold(mu, tol);
  const auto levels = detail::value_levels(mu, eps);
  if (max_depth < 0) max_depth = 3;
  if (max_depth < 1) throw DomainError("ordered_partition needs max_depth >= 1");

  OrderedPartition p;
  std::vector<int> level_of_vertex(n);
  std::vector<double> level_mu(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    double mass = 0.0, vol = 0.0;
    for (int v : levels[l]) {
      level_of_vertex[v] = static_cast<int>(l);
      mass += rho[v];
      vol += g.degree(v);
    }
    level_mu[l] = mass / vol;
  }

  const bool all_singletons =
      std::all_of(levels.begin(), levels.end(), [](const VertexSet& l) { return l.size() == 1; });

  if (max_depth == 1) {
    p.classes = levels;
    for (std::size_t l = 0; l < levels.size(); ++l) p.level.push_back(static_cast<int>(l));
    detail::index_classes(g, rho, p);
    p.velocity = Eigen::VectorXd::Zero(p.size());
    p.refinement_depth = 1;
    p.converged = all_singletons;
    return p;
  }

  std::vector<double> class_velocity;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto dec = detail::level_velocity(g, levels[l], level_of_vertex, level_mu, static_cast<int>(l));
    for (const auto& grp : dec.groups) {
      VertexSet cls;
      for (int i : grp) cls.push_back(levels[l][i]);
      std::sort(cls.begin(), cls.end());
      class_velocity.push_back(-dec.theta[grp.front()]);
      p.classes.push_back(std::move(cls));
      p.level.push_back(static_cast<int>(l));
    }
  }
  detail::index_classes(g, rho, p);
  p.velocity = Eigen::Map<Eigen::VectorXd>(class_velocity.data(), class_velocity.size());
  p.refinement_depth = 2;
  p.converged = true;

  if (max_depth >= 3) detail::refine_higher_order(g, rho, tol, p);

  if (max_depth >= 3 && p.size() > 1) {
    // Fixed-point check: the collapsed dynamics must reproduce the velocities.
    const auto gt = collapsed_graph(g, p, support_selection(g, p));
    const Eigen::VectorXd dt = gt.degrees();
    const Eigen::VectorXd vel = -(gt.laplacian() * p.mu).cwiseQuotient(dt);
    const double scale = std::max(p.velocity.cwiseAbs().maxCoeff(), 1e-300);
    p.refinement_depth = 3;
    p.converged = (vel - p.velocity).cwiseAbs().maxCoeff() <= 1e-8 * scale + 1e-300;
  }
  return p;
}

}  // namespace hyperheat
