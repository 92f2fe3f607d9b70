// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hyperheat/config.hpp"

namespace hyperheat {

/// Real vector indexed by vertex id (rho, pi, mu, ...).
using VertexVector = Eigen::VectorXd;

/// Sorted list of distinct vertex ids.
using VertexSet = std::vector<int>;

/// Weighted hypergraph on vertices 0..n-1. Immutable after construction.
///
/// Every edge has at least two distinct vertices and positive weight; the
/// degree of a vertex is the sum of the weights of its incident edges. By
/// default construction rejects disconnected input.
class Hypergraph {
 public:
  struct Edge {
    std::vector<int> vertices;  // sorted, distinct
    double weight = 1.0;
  };

  Hypergraph() = default;

  Hypergraph(int n, std::vector<Edge> edges, bool require_connected = true)
      : n_(n), edges_(std::move(edges)) {
    if (n_ < 1) throw DomainError("hypergraph needs at least one vertex");
    degree_ = VertexVector::Zero(n_);
    incident_.assign(n_, {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      auto& e = edges_[i];
      std::sort(e.vertices.begin(), e.vertices.end());
      if (std::adjacent_find(e.vertices.begin(), e.vertices.end()) != e.vertices.end())
        throw DomainError("edge " + std::to_string(i) + " repeats a vertex");
      if (e.vertices.size() < 2)
        throw DomainError("edge " + std::to_string(i) + " has fewer than 2 vertices");
      if (!(e.weight > 0.0) || !std::isfinite(e.weight))
        throw DomainError("edge " + std::to_string(i) + " has non-positive weight");
      for (int v : e.vertices) {
        if (v < 0 || v >= n_)
          throw DomainError("edge " + std::to_string(i) + " references vertex " +
                            std::to_string(v) + " out of range");
        degree_[v] += e.weight;
        incident_[v].push_back(static_cast<int>(i));
      }
    }
    if (require_connected && !connected())
      throw DomainError("hypergraph is not connected");
    for (int v = 0; v < n_; ++v)
      if (!(degree_[v] > 0.0)) throw DomainError("vertex " + std::to_string(v) + " is isolated");
    total_volume_ = degree_.sum();
  }

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int i) const { return edges_[i]; }
  const std::vector<int>& incident(int v) const { return incident_[v]; }

  double degree(int v) const { return degree_[v]; }
  const VertexVector& degrees() const { return degree_; }
  double total_volume() const { return total_volume_; }

  double volume(const VertexSet& s) const {
    double vol = 0.0;
    for (int v : s) vol += degree_[v];
    return vol;
  }

  /// Stationary distribution pi(v) = d(v) / vol(V).
  VertexVector stationary() const { return degree_ / total_volume_; }

  /// Point mass at v.
  VertexVector point_mass(int v) const {
    VertexVector s = VertexVector::Zero(n_);
    s[v] = 1.0;
    return s;
  }

  int max_degree_vertex() const {
    int best = 0;
    for (int v = 1; v < n_; ++v)
      if (degree_[v] > degree_[best]) best = v;
    return best;
  }

  bool connected() const {
    std::vector<int> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& e : edges_)
      for (std::size_t k = 1; k < e.vertices.size(); ++k)
        parent[find(e.vertices[k])] = find(e.vertices[0]);
    int root = find(0);
    for (int v = 1; v < n_; ++v)
      if (find(v) != root) return false;
    return true;
  }

  /// Optional vertex names for I/O; empty when unnamed.
  std::vector<std::string> names;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  VertexVector degree_;
  std::vector<std::vector<int>> incident_;
  double total_volume_ = 0.0;
};

/// A proper vertex subset together with its boundary weight and conductance.
struct Cut {
  VertexSet subset;
  double cut_weight = 0.0;
  double conductance = 0.0;
};

// D^{-1}-weighted inner product and norm used throughout: <x,y> = sum x y / d.
inline double inner_dinv(const Hypergraph& g, const VertexVector& x, const VertexVector& y) {
  return (x.array() * y.array() / g.degrees().array()).sum();
}
inline double norm_dinv(const Hypergraph& g, const VertexVector& x) {
  return std::sqrt(inner_dinv(g, x, x));
}
inline double norm_d(const Hypergraph& g, const VertexVector& x) {
  return std::sqrt((x.array().square() * g.degrees().array()).sum());
}

/// mu = D^{-1} rho.
inline VertexVector to_mu(const Hypergraph& g, const VertexVector& rho) {
  return (rho.array() / g.degrees().array()).matrix();
}

namespace detail {

inline std::vector<char> membership(int n, const VertexSet& s) {
  std::vector<char> in(n, 0);
  for (int v : s) in[v] = 1;
  return in;
}

inline bool subset_less(const VertexSet& a, const VertexSet& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

/// Conductance of S: boundary weight over min(vol S, vol V\S).
inline Cut conductance(const Hypergraph& g, VertexSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  const int n = g.num_vertices();
  if (s.empty() || static_cast<int>(s.size()) >= n)
    throw DomainError("conductance needs a proper nonempty subset");
  if (s.front() < 0 || s.back() >= n) throw DomainError("subset vertex out of range");
  auto in = detail::membership(n, s);
  double cut = 0.0;
  for (const auto& e : g.edges()) {
    bool inside = false, outside = false;
    for (int v : e.vertices) (in[v] ? inside : outside) = true;
    if (inside && outside) cut += e.weight;
  }
  // Both volumes are summed directly so the result is exactly complement-symmetric.
  double vol_in = 0.0, vol_out = 0.0;
  for (int v = 0; v < n; ++v) (in[v] ? vol_in : vol_out) += g.degree(v);
  return Cut{std::move(s), cut, cut / std::min(vol_in, vol_out)};
}

/// Exact minimum conductance by enumerating all 2^n - 2 proper subsets.
/// Ties (within 1e-12) resolve to the lexicographically smallest subset.
inline Cut min_conductance_bruteforce(const Hypergraph& g) {
  const int n = g.num_vertices();
  if (n > 24) throw CapacityError("brute-force conductance limited to n <= 24");
  if (n < 2) throw DomainError("no proper subset exists for n < 2");
  std::vector<std::uint32_t> masks;
  masks.reserve(g.num_edges());
  for (const auto& e : g.edges()) {
    std::uint32_t m = 0;
    for (int v : e.vertices) m |= (1u << v);
    masks.push_back(m);
  }
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
  const auto& d = g.degrees();
  std::optional<Cut> best;
  for (std::uint32_t s = 1; s < full; ++s) {
    double cut = 0.0;
    for (std::size_t i = 0; i < masks.size(); ++i)
      if ((masks[i] & s) && (masks[i] & ~s & full)) cut += g.edge(static_cast<int>(i)).weight;
    double vol = 0.0;
    for (int v = 0; v < n; ++v)
      if (s & (1u << v)) vol += d[v];
    const double phi = cut / std::min(vol, g.total_volume() - vol);
    if (best && phi > best->conductance + 1e-12) continue;
    VertexSet members;
    for (int v = 0; v < n; ++v)
      if (s & (1u << v)) members.push_back(v);
    if (!best || phi < best->conductance - 1e-12 || detail::subset_less(members, best->subset))
      best = Cut{std::move(members), cut, phi};
  }
  return *best;
}

/// All distinct proper sweep sets {x >= tau} and {x <= tau}. Equal entries
/// are never separated. Upper sets come first, each family ordered by size.
inline std::vector<VertexSet> sweep_sets(const VertexVector& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x[a] > x[b]; });
  std::vector<VertexSet> out;
  // Upper sets: prefixes of the descending order ending at a value change.
  for (int k = 0; k + 1 < n; ++k) {
    if (x[order[k]] == x[order[k + 1]]) continue;
    VertexSet s(order.begin(), order.begin() + k + 1);
    std::sort(s.begin(), s.end());
    out.push_back(std::move(s));
  }
  for (int k = n - 1; k > 0; --k) {
    if (x[order[k]] == x[order[k - 1]]) continue;
    VertexSet s(order.begin() + k, order.end());
    std::sort(s.begin(), s.end());
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

// True when candidate should replace incumbent under the sweep tie-break:
// lower conductance, then smaller cardinality, then lexicographic order.
inline bool better_cut(const Cut& candidate, const Cut& incumbent) {
  if (candidate.conductance < incumbent.conductance - 1e-12) return true;
  if (candidate.conductance > incumbent.conductance + 1e-12) return false;
  if (candidate.subset.size() != incumbent.subset.size())
    return candidate.subset.size() < incumbent.subset.size();
  return subset_less(candidate.subset, incumbent.subset);
}

}  // namespace detail

/// Minimum-conductance sweep set of x.
inline Cut best_sweep_cut(const Hypergraph& g, const VertexVector& x) {
  if (x.size() != g.num_vertices()) throw DomainError("vector length does not match hypergraph");
  auto sets = sweep_sets(x);
  if (sets.empty()) throw DomainError("sweep of a constant vector has no proper set");
  std::optional<Cut> best;
  for (auto& s : sets) {
    Cut c = conductance(g, std::move(s));
    if (!best || detail::better_cut(c, *best)) best = std::move(c);
  }
  return *best;
}

}  // namespace hyperheat
