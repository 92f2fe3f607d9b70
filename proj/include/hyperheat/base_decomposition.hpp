// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hyperheat::detail {

/// Dinic max-flow on a small dense-ish network with real capacities.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes, double eps) : head_(nodes, -1), level_(nodes), it_(nodes), eps_(eps) {}

  void add_arc(int from, int to, double cap) {
    arcs_.push_back({to, head_[from], cap});
    head_[from] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({from, head_[to], 0.0});
    head_[to] = static_cast<int>(arcs_.size()) - 1;
  }

  double run(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      it_ = head_;
      while (true) {
        double f = dfs(s, t, std::numeric_limits<double>::infinity());
        if (f <= eps_) break;
        flow += f;
      }
    }
    return flow;
  }

  /// Nodes that can still reach t in the residual network.
  std::vector<char> reaches_sink(int t) const {
    std::vector<char> seen(head_.size(), 0);
    std::deque<int> queue{t};
    seen[t] = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      // Arc u->v has residual capacity iff it is the partner of an arc out of v.
      for (int a = head_[v]; a != -1; a = arcs_[a].next) {
        const int u = arcs_[a].to;
        if (!seen[u] && arcs_[a ^ 1].cap > eps_) {
          seen[u] = 1;
          queue.push_back(u);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int> queue{s};
    level_[s] = 0;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int a = head_[v]; a != -1; a = arcs_[a].next) {
        if (arcs_[a].cap > eps_ && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[v] + 1;
          queue.push_back(arcs_[a].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double pushed) {
    if (v == t) return pushed;
    for (int& a = it_[v]; a != -1; a = arcs_[a].next) {
      Arc& arc = arcs_[a];
      if (arc.cap <= eps_ || level_[arc.to] != level_[v] + 1) continue;
      double f = dfs(arc.to, t, std::min(pushed, arc.cap));
      if (f > eps_) {
        arc.cap -= f;
        arcs_[a ^ 1].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;
  double eps_;
};

/// Set function on local vertices 0..k-1 of the form
///
///   F(X) = sum_out c [S ∩ X != ∅]  -  sum_in c [I ⊆ X]  +  m(X)
///
/// which is submodular. Its base polytope is exactly the set of vectors
/// reachable by routing each out-term's mass c onto S and each in-term's
/// mass -c onto I, shifted by m.
struct CoverageFunction {
  struct Term {
    std::vector<int> members;
    double mass;
  };
  int size = 0;
  std::vector<Term> out_terms;
  std::vector<Term> in_terms;
  Eigen::VectorXd modular;  // may be empty (zero)

  double modular_at(int u) const { return modular.size() ? modular[u] : 0.0; }
};

/// Minimum-norm point of the base polytope B(F) under sum y_u^2 / d_u.
///
/// Returns theta with y = d .* theta and the ordered groups of equal theta,
/// lowest theta first. Uses the decomposition algorithm: the lowest level is
/// the maximal minimiser of F(X)/d(X), found by Dinkelbach iterations on a
/// min-cut; the problem is then contracted and repeated.
struct BaseDecomposition {
  Eigen::VectorXd theta;
  std::vector<std::vector<int>> groups;
};

inline BaseDecomposition min_norm_base(const CoverageFunction& f, const Eigen::VectorXd& d) {
  const int k = f.size;
  BaseDecomposition out;
  out.theta = Eigen::VectorXd::Zero(k);
  if (k == 0) return out;

  double scale = 0.0;
  for (const auto& t : f.out_terms) scale += std::abs(t.mass);
  for (const auto& t : f.in_terms) scale += std::abs(t.mass);
  for (int u = 0; u < k; ++u) scale += std::abs(f.modular_at(u));
  const double tol = 1e-13 * std::max(scale, 1e-300);

  std::vector<char> alive(k, 1);
  auto out_terms = f.out_terms;
  auto in_terms = f.in_terms;
  int remaining = k;

  auto evaluate = [&](const std::vector<char>& in) {
    double v = 0.0;
    for (const auto& t : out_terms)
      for (int u : t.members)
        if (in[u]) {
          v += t.mass;
          break;
        }
    for (const auto& t : in_terms) {
      bool all = true;
      for (int u : t.members) all = all && in[u];
      if (all) v -= t.mass;
    }
    for (int u = 0; u < k; ++u)
      if (in[u]) v += f.modular_at(u);
    return v;
  };
  auto weight_of = [&](const std::vector<char>& in) {
    double w = 0.0;
    for (int u = 0; u < k; ++u)
      if (in[u]) w += d[u];
    return w;
  };

  // Maximal minimiser of F(X) - alpha d(X) over X within the live vertices.
  auto minimise = [&](double alpha, std::vector<char>& best) {
    const int src = 0, sink = 1;
    const int base = 2;
    const int n_nodes = base + k + static_cast<int>(out_terms.size() + in_terms.size());
    MaxFlow net(n_nodes, tol * 1e-3);
    const double inf = std::numeric_limits<double>::infinity();
    double constant = 0.0;
    for (int u = 0; u < k; ++u) {
      if (!alive[u]) continue;
      const double beta = f.modular_at(u) - alpha * d[u];
      if (beta > 0.0)
        net.add_arc(base + u, sink, beta);
      else if (beta < 0.0) {
        net.add_arc(src, base + u, -beta);
        constant += beta;
      }
    }
    int aux = base + k;
    for (const auto& t : out_terms) {
      for (int u : t.members) net.add_arc(base + u, aux, inf);
      net.add_arc(aux, sink, t.mass);
      ++aux;
    }
    for (const auto& t : in_terms) {
      net.add_arc(src, aux, t.mass);
      for (int u : t.members) net.add_arc(aux, base + u, inf);
      constant -= t.mass;
      ++aux;
    }
    const double value = constant + net.run(src, sink);
    auto to_sink = net.reaches_sink(sink);
    best.assign(k, 0);
    for (int u = 0; u < k; ++u) best[u] = alive[u] && !to_sink[base + u];
    return value;
  };

  while (remaining > 0) {
    double alpha = evaluate(alive) / weight_of(alive);
    std::vector<char> group = alive;
    std::vector<char> candidate;
    for (int iter = 0; iter < 4 * k + 8; ++iter) {
      const double value = minimise(alpha, candidate);
      const double w = weight_of(candidate);
      if (value < -tol && w > 0.0) {
        alpha = evaluate(candidate) / w;
        group = candidate;
        continue;
      }
      // Minimisers of a submodular function are closed under union.
      for (int u = 0; u < k; ++u) group[u] = group[u] || candidate[u];
      break;
    }
    std::vector<int> members;
    for (int u = 0; u < k; ++u)
      if (group[u]) members.push_back(u);
    for (int u : members) {
      out.theta[u] = alpha;
      alive[u] = 0;
    }
    remaining -= static_cast<int>(members.size());
    out.groups.push_back(std::move(members));

    // Contract: F'(X) = F(X ∪ G) - F(G) on the remaining vertices.
    std::vector<CoverageFunction::Term> next_out, next_in;
    for (auto& t : out_terms) {
      bool hit = false;
      for (int u : t.members) hit = hit || group[u];
      if (!hit) next_out.push_back(std::move(t));
    }
    for (auto& t : in_terms) {
      std::vector<int> rest;
      for (int u : t.members)
        if (!group[u]) rest.push_back(u);
      if (!rest.empty()) next_in.push_back({std::move(rest), t.mass});
    }
    out_terms = std::move(next_out);
    in_terms = std::move(next_in);
  }
  return out;
}

}  // namespace hyperheat::detail
