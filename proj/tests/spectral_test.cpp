// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "hyperheat/spectral.hpp"

namespace hh = hyperheat;
using hh::WeightedGraph;

namespace {

WeightedGraph edge2() {
  WeightedGraph g(2);
  g.add_edge(0, 1, 1.0);
  return g;
}

WeightedGraph k3() {
  WeightedGraph g(3);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 1.0);
  g.add_edge(0, 2, 1.0);
  return g;
}

WeightedGraph p3() {
  WeightedGraph g(3);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 1.0);
  return g;
}

WeightedGraph barbell() {
  WeightedGraph g(6);
  for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}) g.add_edge(a, b, 1.0);
  return g;
}

// Connected random graph: a random spanning path plus extra edges and loops.
WeightedGraph random_graph(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::uniform_int_distribution<int> node(0, m - 1);
  WeightedGraph g(m);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i + 1 < m; ++i) g.add_edge(order[i], order[i + 1], w(rng));
  for (int extra = 0; extra < m; ++extra) {
    const int a = node(rng), b = node(rng);
    if (a != b) g.add_edge(a, b, w(rng));
  }
  for (int i = 0; i < m; ++i)
    if (node(rng) % 3 == 0) g.add_edge(i, i, w(rng));
  return g;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(Decompose, TwoNodeEdge) {
  const auto dec = hh::decompose(edge2());
  EXPECT_NEAR(dec.eigenvalues[0], 0.0, 1e-14);
  EXPECT_NEAR(dec.eigenvalues[1], 2.0, 1e-14);
}

TEST(Decompose, TriangleSpectrum) {
  const auto dec = hh::decompose(k3());
  EXPECT_NEAR(dec.eigenvalues[0], 0.0, 1e-14);
  EXPECT_NEAR(dec.eigenvalues[1], 1.5, 1e-14);
  EXPECT_NEAR(dec.eigenvalues[2], 1.5, 1e-14);
}

TEST(Decompose, OnlySelfLoops) {
  WeightedGraph g(3);
  for (int i = 0; i < 3; ++i) g.set_self_loop(i, 1.0 + i);
  const auto dec = hh::decompose(g);
  EXPECT_LT(dec.eigenvalues.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(dec.vectors.col(0).dot(dec.sqrt_degrees.normalized()), 1.0, 1e-14);
}

TEST(Decompose, RejectsAsymmetricWeights) {
  WeightedGraph g(Eigen::MatrixXd{{0.0, 1.0}, {1.0 + 1e-9, 0.0}});
  EXPECT_THROW(hh::decompose(g), hh::DomainError);
}

TEST(Decompose, AgreesWithReferenceSolver) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 40; ++rep) {
    const auto g = random_graph(rng, 3 + rep % 20);
    const auto dec = hh::decompose(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(dec.normalized_laplacian());
    EXPECT_LT((dec.eigenvalues - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(dec.reconstruction_error(), 1e-8);
    const Eigen::MatrixXd gram = dec.vectors.transpose() * dec.vectors;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(dec.size(), dec.size())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(dec.eigenvalues.minCoeff(), -1e-8);
    EXPECT_LE(dec.eigenvalues.maxCoeff(), 2.0 + 1e-8);
    EXPECT_LT((dec.vectors.col(0) - dec.sqrt_degrees.normalized()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(HeatPropagate, ZeroTimeIsIdentity) {
  const auto dec = hh::decompose(k3());
  const Eigen::VectorXd r = vec({0.7, 0.2, 0.1});
  EXPECT_LT((hh::heat_propagate(dec, r, 0.0) - r).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HeatPropagate, TwoNodeClosedForm) {
  const auto dec = hh::decompose(edge2());
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const auto r = hh::heat_propagate(dec, vec({1, 0}), t);
    EXPECT_NEAR(r[0], 0.5 + 0.5 * std::exp(-2 * t), 1e-14);
    EXPECT_NEAR(r[1], 0.5 - 0.5 * std::exp(-2 * t), 1e-14);
  }
}

TEST(HeatPropagate, ConvergesToStationary) {
  const auto g = barbell();
  const auto dec = hh::decompose(g);
  const double t = 21.0 / dec.eigenvalues[1];
  const auto r = hh::heat_propagate(dec, vec({1, 0, 0, 0, 0, 0}), t);
  EXPECT_LT((r - dec.stationary()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(HeatPropagate, NegativeTimeIsDomainError) {
  EXPECT_THROW(hh::heat_propagate(hh::decompose(edge2()), vec({1, 0}), -1e-3), hh::DomainError);
}

TEST(HeatPropagate, SemigroupMassAndMonotoneDecay) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const auto g = random_graph(rng, 4 + rep % 10);
    const auto dec = hh::decompose(g);
    Eigen::VectorXd r(g.num_nodes());
    for (int i = 0; i < r.size(); ++i) r[i] = u(rng);
    r /= r.sum();
    const double s = u(rng), t = u(rng) * 3.0;
    const auto twice = hh::heat_propagate(dec, hh::heat_propagate(dec, r, s), t);
    EXPECT_LT((twice - hh::heat_propagate(dec, r, s + t)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(hh::heat_propagate(dec, r, t).sum(), r.sum(), 1e-12);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 40; ++k) {
      const Eigen::VectorXd diff = hh::heat_propagate(dec, r, 0.1 * k) - dec.stationary();
      const double norm = (diff.array().square() / dec.degrees.array()).sum();
      EXPECT_LE(norm, prev + 1e-15);
      prev = norm;
    }
  }
}

TEST(HeatPropagate, LogConvexDistance) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = random_graph(rng, 5 + rep % 6);
    const auto dec = hh::decompose(g);
    Eigen::VectorXd r(g.num_nodes());
    for (int i = 0; i < r.size(); ++i) r[i] = u(rng);
    r /= r.sum();
    auto f = [&](double t) {
      const Eigen::VectorXd d = hh::heat_propagate(dec, r, t) - dec.stationary();
      return std::log((d.array().square() / dec.degrees.array()).sum());
    };
    const double h = 0.05;
    for (int k = 1; k < 40; ++k) EXPECT_GE(f((k + 1) * h) - 2 * f(k * h) + f((k - 1) * h), -1e-6);
  }
}

TEST(Rayleigh, Examples) {
  EXPECT_NEAR(hh::rayleigh_quotient(k3(), vec({1, 1, 1})), 0.0, 1e-15);
  EXPECT_NEAR(hh::rayleigh_quotient(edge2(), vec({1, -1})), 2.0, 1e-15);
  EXPECT_THROW(hh::rayleigh_quotient(edge2(), vec({0, 0})), hh::DomainError);
}

TEST(Rayleigh, EigenvectorIdentity) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = random_graph(rng, 3 + rep % 8);
    const auto dec = hh::decompose(g);
    const Eigen::VectorXd x = dec.vectors.col(1).cwiseQuotient(dec.sqrt_degrees);
    EXPECT_NEAR(hh::rayleigh_quotient(g, x), dec.eigenvalues[1], 1e-8);
  }
}

TEST(Lambda2, Examples) {
  EXPECT_NEAR(hh::lambda2_u2(hh::decompose(edge2())).first, 2.0, 1e-14);
  EXPECT_NEAR(hh::lambda2_u2(hh::decompose(p3())).first, 1.0, 1e-14);
  WeightedGraph split(4);
  split.add_edge(0, 1, 1.0);
  split.add_edge(2, 3, 1.0);
  EXPECT_LE(hh::lambda2_u2(hh::decompose(split)).first, 1e-8);
  WeightedGraph one(1);
  one.set_self_loop(0, 1.0);
  EXPECT_THROW(hh::lambda2_u2(hh::decompose(one)), hh::DomainError);
}

TEST(Lambda2, U2IsDInverseOrthonormal) {
  const auto dec = hh::decompose(p3());
  const auto [l2, u2] = hh::lambda2_u2(dec);
  EXPECT_NEAR((u2.array().square() / dec.degrees.array()).sum(), 1.0, 1e-14);
  EXPECT_NEAR(u2.sum(), 0.0, 1e-14);
}

TEST(GraphCheeger, TwoNodeEdge) {
  const auto dec = hh::decompose(edge2());
  const auto c = hh::graph_cheeger_sweep(edge2(), hh::lambda2_u2(dec).second);
  EXPECT_EQ(c.subset.size(), 1u);
  EXPECT_DOUBLE_EQ(c.conductance, 1.0);
}

TEST(GraphCheeger, BarbellFindsBridge) {
  const auto g = barbell();
  const auto dec = hh::decompose(g);
  const auto c = hh::graph_cheeger_sweep(g, hh::lambda2_u2(dec).second.cwiseQuotient(dec.degrees));
  EXPECT_EQ(c.subset, (hh::VertexSet{0, 1, 2}));
  EXPECT_DOUBLE_EQ(c.conductance, 1.0 / 7.0);
}

TEST(GraphCheeger, ConstantVectorIsDomainError) {
  EXPECT_THROW(hh::graph_cheeger_sweep(k3(), vec({1, 1, 1})), hh::DomainError);
}

TEST(GraphCheeger, CheegerBoundOnRandomGraphs) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 60; ++rep) {
    const auto g = random_graph(rng, 3 + rep % 15);
    const auto dec = hh::decompose(g);
    const auto [l2, u2] = hh::lambda2_u2(dec);
    const auto c = hh::graph_cheeger_sweep(g, u2.cwiseQuotient(dec.degrees));
    EXPECT_LE(c.conductance, std::sqrt(2.0 * l2) + 1e-8);
  }
}
