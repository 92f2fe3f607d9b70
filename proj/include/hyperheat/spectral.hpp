// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hyperheat/config.hpp"
#include "hyperheat/graph.hpp"
#include "hyperheat/hypercore.hpp"

namespace hyperheat {

/// Eigendecomposition of N = D^{-1/2} (D - A) D^{-1/2} for a weighted graph.
///
/// Columns of `vectors` are orthonormal, eigenvalues ascend, and column 0 is
/// exactly D^{1/2} 1 / sqrt(vol).
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd degrees;
  Eigen::VectorXd sqrt_degrees;
  WeightedGraph graph;
  int sweeps = 0;

  int size() const { return static_cast<int>(eigenvalues.size()); }

  /// The decomposed matrix N.
  Eigen::MatrixXd normalized_laplacian() const {
    const Eigen::VectorXd inv_sqrt = sqrt_degrees.cwiseInverse();
    return inv_sqrt.asDiagonal() * graph.laplacian() * inv_sqrt.asDiagonal();
  }

  /// max |Q diag(lambda) Q^T - N|.
  double reconstruction_error() const {
    const Eigen::MatrixXd r = vectors * eigenvalues.asDiagonal() * vectors.transpose();
    return (r - normalized_laplacian()).cwiseAbs().maxCoeff();
  }

  /// Stationary class vector: d / vol scaled to the given mass.
  Eigen::VectorXd stationary(double mass = 1.0) const { return degrees * (mass / degrees.sum()); }
};

namespace detail {

// Cyclic Jacobi on a symmetric matrix. Returns the number of sweeps used.
inline int jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors,
                        double off_tol, int max_sweeps) {
  const int m = static_cast<int>(a.rows());
  vectors = Eigen::MatrixXd::Identity(m, m);
  const double frob = a.norm();
  const double target = off_tol * (frob > 0.0 ? frob : 1.0);
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= target) break;
    for (int p = 0; p < m; ++p) {
      for (int q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < m; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < m; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < m; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values = a.diagonal();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return values[x] < values[y]; });
  Eigen::VectorXd sorted_values(m);
  Eigen::MatrixXd sorted_vectors(m, m);
  for (int k = 0; k < m; ++k) {
    sorted_values[k] = values[order[k]];
    sorted_vectors.col(k) = vectors.col(order[k]);
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
  return sweep;
}

}  // namespace detail

/// Full eigendecomposition of the symmetric normalized Laplacian of gw.
inline SpectralDecomposition decompose(const WeightedGraph& gw,
                                       const Tolerances& tol = default_tolerances()) {
  const int m = gw.num_nodes();
  if (m < 1) throw DomainError("cannot decompose an empty graph");
  if (m > 4096) throw CapacityError("dense decomposition limited to 4096 nodes");
  const auto& w = gw.weights();
  const double scale = std::max(w.cwiseAbs().maxCoeff(), 1e-300);
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > tol.symmetry * scale)
    throw DomainError("weight matrix is not symmetric");

  SpectralDecomposition dec;
  dec.graph = gw;
  dec.degrees = gw.degrees();
  if ((dec.degrees.array() <= 0.0).any()) throw DomainError("graph has a node of non-positive degree");
  dec.sqrt_degrees = dec.degrees.cwiseSqrt();
  Eigen::MatrixXd n = dec.normalized_laplacian();
  n = 0.5 * (n + n.transpose());
  dec.sweeps = detail::jacobi_eigen(n, dec.eigenvalues, dec.vectors, tol.jacobi_off, tol.jacobi_max_sweeps);

  // Pin the kernel direction: replace the near-zero cluster by D^{1/2}1 plus
  // an orthonormal basis of the rest of the cluster.
  const Eigen::VectorXd e1 = dec.sqrt_degrees / dec.sqrt_degrees.norm();
  const double zero_tol = 1e-9 * std::max(1.0, dec.eigenvalues.cwiseAbs().maxCoeff());
  int cluster = 1;
  while (cluster < m && dec.eigenvalues[cluster] <= zero_tol) ++cluster;
  if (cluster == 1) {
    dec.vectors.col(0) = e1;
  } else {
    Eigen::MatrixXd c = dec.vectors.leftCols(cluster);
    c -= e1 * (e1.transpose() * c);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinU);
    dec.vectors.col(0) = e1;
    dec.vectors.middleCols(1, cluster - 1) = svd.matrixU().leftCols(cluster - 1);
  }
  // Remaining columns are orthogonal to the cluster up to roundoff; project
  // out the exact kernel direction so mass is conserved to working precision.
  for (int k = cluster; k < m; ++k) {
    dec.vectors.col(k) -= e1 * e1.dot(dec.vectors.col(k));
    dec.vectors.col(k).normalize();
  }
  dec.eigenvalues[0] = 0.0;
  return dec;
}

/// e^{-delta N_rw} rho = D^{1/2} Q e^{-delta Lambda} Q^T D^{-1/2} rho.
inline Eigen::VectorXd heat_propagate(const SpectralDecomposition& dec, const Eigen::VectorXd& rho,
                                      double delta) {
  if (delta < 0.0) throw DomainError("heat_propagate needs a non-negative time");
  if (rho.size() != dec.size()) throw DomainError("vector length does not match decomposition");
  Eigen::VectorXd coeff = dec.vectors.transpose() * rho.cwiseQuotient(dec.sqrt_degrees);
  for (int j = 0; j < dec.size(); ++j) coeff[j] *= std::exp(-delta * dec.eigenvalues[j]);
  return (dec.vectors * coeff).cwiseProduct(dec.sqrt_degrees);
}

/// Coefficients c_j = q_j^T D^{-1/2} rho in the orthonormal eigenbasis.
inline Eigen::VectorXd eigen_coefficients(const SpectralDecomposition& dec, const Eigen::VectorXd& rho) {
  return dec.vectors.transpose() * rho.cwiseQuotient(dec.sqrt_degrees);
}

/// sum over unordered pairs (x_u - x_v)^2 w(uv) / sum x_v^2 d(v).
inline double rayleigh_quotient(const WeightedGraph& gw, const Eigen::VectorXd& x) {
  const int m = gw.num_nodes();
  if (x.size() != m) throw DomainError("vector length does not match graph");
  if (x.cwiseAbs().maxCoeff() == 0.0) throw DomainError("Rayleigh quotient of the zero vector");
  double num = 0.0;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) {
      const double diff = x[u] - x[v];
      num += diff * diff * gw.weight(u, v);
    }
  const double den = (x.array().square() * gw.degrees().array()).sum();
  return num / den;
}

/// lambda_2 and u_2 = D^{1/2} q_2, so that D^{-1/2} u_2 has unit norm.
inline std::pair<double, Eigen::VectorXd> lambda2_u2(const SpectralDecomposition& dec) {
  if (dec.size() < 2) throw DomainError("lambda_2 needs at least two nodes");
  return {dec.eigenvalues[1], dec.vectors.col(1).cwiseProduct(dec.sqrt_degrees)};
}

/// Best sweep cut of a graph along the ordering of x.
inline Cut graph_cheeger_sweep(const WeightedGraph& gw, const Eigen::VectorXd& x) {
  if (x.size() != gw.num_nodes()) throw DomainError("vector length does not match graph");
  auto sets = sweep_sets(x);
  if (sets.empty()) throw DomainError("sweep of a constant vector has no proper set");
  std::optional<Cut> best;
  for (auto& s : sets) {
    Cut c = gw.conductance(std::move(s));
    if (!best || detail::better_cut(c, *best)) best = std::move(c);
  }
  return *best;
}

}  // namespace hyperheat
