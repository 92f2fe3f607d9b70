// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "hyperheat/hypercore.hpp"

namespace hyperheat {

/// Planted two-cluster random hypergraphs.
struct GeneratorConfig {
  int n_min = 4;
  int n_max = 8;
  int max_edges = 10;
  int bridges = 1;
  int min_edge_size = 2;
  int max_edge_size = 4;
  double w_min = 0.5;
  double w_max = 2.0;
};

/// Vertices are split into two halves under a random relabelling. Intra
/// edges stay inside one half; `bridges` edges touch both. Draws are
/// repeated until the result is connected; the output depends only on seed.
inline Hypergraph planted_two_cluster(const GeneratorConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform_real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  while (true) {
    const int n = uniform_int(cfg.n_min, cfg.n_max);
    std::vector<int> label(n);
    std::iota(label.begin(), label.end(), 0);
    std::shuffle(label.begin(), label.end(), rng);
    const int half = (n + 1) / 2;
    const std::vector<int> cluster_a(label.begin(), label.begin() + half);
    const std::vector<int> cluster_b(label.begin() + half, label.end());

    const int m = uniform_int(std::min(n, cfg.max_edges), cfg.max_edges);
    const int bridges = std::min(cfg.bridges, m);
    std::vector<Hypergraph::Edge> edges;
    auto pick = [&](const std::vector<int>& pool, int k) {
      std::vector<int> p = pool;
      std::shuffle(p.begin(), p.end(), rng);
      p.resize(k);
      return p;
    };
    for (int i = 0; i < m - bridges; ++i) {
      const auto& pool = uniform_int(0, n - 1) < half ? cluster_a : cluster_b;
      const int hi = std::min<int>(cfg.max_edge_size, static_cast<int>(pool.size()));
      if (hi < 2) continue;
      const int k = uniform_int(std::min(cfg.min_edge_size, hi), hi);
      edges.push_back({pick(pool, k), uniform_real(cfg.w_min, cfg.w_max)});
    }
    for (int i = 0; i < bridges; ++i) {
      const int k = uniform_int(std::max(2, cfg.min_edge_size), std::max(2, cfg.max_edge_size));
      const int ka = std::clamp(uniform_int(1, k - 1), 1, static_cast<int>(cluster_a.size()));
      const int kb = std::clamp(k - ka, 1, static_cast<int>(cluster_b.size()));
      auto vs = pick(cluster_a, ka);
      auto vb = pick(cluster_b, kb);
      vs.insert(vs.end(), vb.begin(), vb.end());
      edges.push_back({std::move(vs), uniform_real(cfg.w_min, cfg.w_max)});
    }
    std::vector<char> touched(n, 0);
    for (const auto& e : edges)
      for (int v : e.vertices) touched[v] = 1;
    if (std::find(touched.begin(), touched.end(), 0) != touched.end()) continue;
    Hypergraph g(n, std::move(edges), false);
    if (g.connected()) return g;
  }
}

}  // namespace hyperheat
