// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hyperheat/config.hpp"
#include "hyperheat/hypercore.hpp"

namespace hyperheat {

/// Ordinary undirected weighted graph with self-loops, stored as a dense
/// symmetric weight matrix. The diagonal holds self-loop weights, which count
/// once towards the node degree.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(int m) : w_(Eigen::MatrixXd::Zero(m, m)) {}
  explicit WeightedGraph(Eigen::MatrixXd w) : w_(std::move(w)) {}

  int num_nodes() const { return static_cast<int>(w_.rows()); }
  double weight(int i, int j) const { return w_(i, j); }
  const Eigen::MatrixXd& weights() const { return w_; }

  /// Adds w to the (i,j) and (j,i) entries; for i == j adds a self-loop.
  void add_edge(int i, int j, double w) {
    w_(i, j) += w;
    if (i != j) w_(j, i) += w;
  }
  void set_self_loop(int i, double w) { w_(i, i) = w; }

  double degree(int i) const { return w_.row(i).sum(); }
  Eigen::VectorXd degrees() const { return w_.rowwise().sum(); }
  double volume() const { return w_.sum(); }

  /// Laplacian D - A; self-loops cancel.
  Eigen::MatrixXd laplacian() const {
    Eigen::MatrixXd l = -w_;
    l.diagonal() += degrees();
    return l;
  }

  /// Cut weight and conductance of a node subset.
  Cut conductance(VertexSet s) const {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    const int m = num_nodes();
    if (s.empty() || static_cast<int>(s.size()) >= m)
      throw DomainError("conductance needs a proper nonempty subset");
    std::vector<char> in(m, 0);
    for (int v : s) in[v] = 1;
    double cut = 0.0, vol = 0.0;
    for (int i = 0; i < m; ++i) {
      if (!in[i]) continue;
      vol += degree(i);
      for (int j = 0; j < m; ++j)
        if (!in[j]) cut += w_(i, j);
    }
    const double denom = std::min(vol, volume() - vol);
    return Cut{std::move(s), cut, cut / denom};
  }

 private:
  Eigen::MatrixXd w_;
};

}  // namespace hyperheat
