// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hyperheat/config.hpp"
#include "hyperheat/diffusion.hpp"
#include "hyperheat/graph.hpp"
#include "hyperheat/hypercore.hpp"
#include "hyperheat/laplacian.hpp"
#include "hyperheat/spectral.hpp"

namespace hyperheat {

/// Clique expansion: each edge spreads w(e) evenly over its vertex pairs and
/// self-loops restore the hypergraph degrees. Its quadratic form is dominated
/// by sum_e w(e) f_e(x)^2.
inline WeightedGraph clique_expansion(const Hypergraph& g) {
  const int n = g.num_vertices();
  WeightedGraph out(n);
  for (const auto& e : g.edges()) {
    const double k = static_cast<double>(e.vertices.size());
    const double share = 2.0 * e.weight / (k * (k - 1.0));
    for (std::size_t i = 0; i < e.vertices.size(); ++i)
      for (std::size_t j = i + 1; j < e.vertices.size(); ++j) out.add_edge(e.vertices[i], e.vertices[j], share);
  }
  for (int v = 0; v < n; ++v) {
    double off = 0.0;
    for (int u = 0; u < n; ++u)
      if (u != v) off += out.weight(v, u);
    out.set_self_loop(v, g.degree(v) - off);
  }
  return out;
}

/// lambda_2 of the clique expansion; ||rho_t - pi||_{D^{-1}} decays at least
/// like exp(-lambda_hat_2 t).
inline double lambda_hat_2(const Hypergraph& g) {
  if (g.num_vertices() < 2) throw DomainError("lambda_hat_2 needs at least two vertices");
  return decompose(clique_expansion(g)).eigenvalues[1];
}

/// ||rho - pi||^2_{D^{-1}} with pi scaled to the mass of rho.
inline double distance_sq(const Hypergraph& g, const VertexVector& rho) {
  const VertexVector diff = rho - g.stationary() * rho.sum();
  return inner_dinv(g, diff, diff);
}

/// g_v(T) = 2 <rho_T, L(rho_T)>_{D^{-1}} / ||rho_T - pi||^2_{D^{-1}}.
inline double g_value(const Hypergraph& g, const VertexVector& rho) {
  const double dist = distance_sq(g, rho);
  if (dist <= 1e-24 * std::max(1.0, inner_dinv(g, rho, rho))) throw DomainError("state is fully mixed");
  return 2.0 * lovasz_energy(g, to_mu(g, rho)) / dist;
}

inline double g_v(const Hypergraph& g, const Trajectory& traj, double t) { return g_value(g, traj.rho_at(t)); }

/// Centered finite difference of -log ||rho_t - pi||^2 at t.
inline double g_v_finite_difference(const Hypergraph& g, const Trajectory& traj, double t, double h = 1e-5) {
  const double lo = std::max(0.0, t - h);
  const double hi = t + h;
  return -(std::log(distance_sq(g, traj.rho_at(hi))) - std::log(distance_sq(g, traj.rho_at(lo)))) / (hi - lo);
}

/// Expansion of rho_T in the eigenbasis of its own support graph.
struct HvResult {
  double h = 0.0;          // g / (2 lambda_{j0})
  double h_lambda2 = 0.0;    // g / lambda_2
  int j0 = 0;              // 1-based index of the first significant mode
  double lambda_j0 = 0.0;
  double lambda2 = 0.0;
  double overlap = 0.0;    // <u_2, rho_T>_{D^{-1}}
  double a_tol = 0.0;
  double g = 0.0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd eigenvalues;
};

inline HvResult h_value(const Hypergraph& g, const VertexVector& rho, const Tolerances& tol = default_tolerances()) {
  HvResult out;
  out.g = g_value(g, rho);
  const auto dec = decompose(support_graph(g, to_mu(g, rho), tol.tie), tol);
  out.coefficients = eigen_coefficients(dec, rho);
  out.eigenvalues = dec.eigenvalues;
  out.lambda2 = dec.eigenvalues[1];
  out.overlap = out.coefficients[1];
  out.a_tol = tol.coefficient * norm_dinv(g, rho);
  for (int j = 1; j < dec.size(); ++j) {
    if (std::abs(out.coefficients[j]) > out.a_tol) {
      out.j0 = j + 1;
      out.lambda_j0 = dec.eigenvalues[j];
      break;
    }
  }
  if (out.j0 == 0) throw DomainError("state has no significant non-stationary component");
  const double inf = std::numeric_limits<double>::infinity();
  out.h = out.lambda_j0 > 0.0 ? out.g / (2.0 * out.lambda_j0) : inf;
  out.h_lambda2 = out.lambda2 > 0.0 ? out.g / out.lambda2 : inf;
  return out;
}

inline HvResult h_v(const Hypergraph& g, const Trajectory& traj, double t, const Tolerances& tol = default_tolerances()) {
  return h_value(g, traj.rho_at(t), tol);
}

/// Best sweep cut of mu with tie-tolerant level sets (tied vertices never split).
inline std::optional<Cut> mu_sweep_cut(const Hypergraph& g, const VertexVector& rho,
                                       double tie = default_tolerances().tie) {
  const VertexVector mu = to_mu(g, rho);
  const auto levels = detail::value_levels(mu, tie_threshold(mu, tie));
  if (levels.size() < 2) return std::nullopt;
  VertexVector rank(g.num_vertices());
  for (std::size_t l = 0; l < levels.size(); ++l)
    for (int v : levels[l]) rank[v] = -static_cast<double>(l);
  return best_sweep_cut(g, rank);
}

struct KappaResult {
  double kappa = 0.0;
  Cut cut;
  double time = 0.0;
};

/// Minimum conductance over mu-sweeps at a log grid of times in [T, t]
/// together with every event time in that window.
inline KappaResult kappa(const Hypergraph& g, const Trajectory& traj, double t_lo, double t_hi,
                         int grid_points = 256, const Tolerances& tol = default_tolerances()) {
  if (!(t_lo <= t_hi) || t_lo < 0.0) throw DomainError("kappa needs 0 <= T <= t");
  std::vector<double> times{t_lo, t_hi};
  for (int k = 1; k + 1 < grid_points; ++k) {
    const double a = static_cast<double>(k) / (grid_points - 1);
    times.push_back(t_lo > 0.0 ? t_lo * std::pow(t_hi / t_lo, a) : t_hi * a);
  }
  for (double e : traj.events)
    if (e >= t_lo && e <= t_hi) times.push_back(e);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::optional<KappaResult> best;
  for (double ts : times) {
    const auto cut = mu_sweep_cut(g, traj.rho_at(ts), tol.tie);
    if (!cut) continue;
    if (!best || detail::better_cut(*cut, best->cut)) best = KappaResult{cut->conductance, *cut, ts};
  }
  if (!best) throw DomainError("mu is constant at every sampled time");
  return *best;
}

/// Both forms of f_i(delta) on interval i of an exact trajectory.
struct FValue {
  double norm_form = 0.0;   // ||rho~_{delta/2} - pi~||^2_{D~^{-1}}
  double inner_form = 0.0;  // rho~_0^T D~^{-1} (rho~_delta - pi~)
};

namespace detail {

// Non-constant modal coordinates of rho~_{delta/2} - pi~ on interval iv.
// Working in modes avoids cancelling rho~ against pi~ near stationarity.
inline Eigen::VectorXd deviation_modes(const Interval& iv, double delta) {
  Eigen::VectorXd c = eigen_coefficients(iv.spectrum, iv.entry_mass);
  c[0] = 0.0;
  return c.cwiseProduct((-0.5 * delta * iv.spectrum.eigenvalues).array().exp().matrix());
}

inline const Interval& checked_interval(const Trajectory& traj, int i) {
  if (i < 0 || i >= static_cast<int>(traj.intervals.size())) throw DomainError("interval index out of range");
  return traj.intervals[i];
}

}  // namespace detail

inline FValue f_interval(const Trajectory& traj, int i, double delta) {
  const auto& iv = detail::checked_interval(traj, i);
  if (delta < 0.0) throw DomainError("f_interval needs delta >= 0");
  const Eigen::VectorXd pi = iv.spectrum.stationary(iv.entry_mass.sum());
  const Eigen::VectorXd full = heat_propagate(iv.spectrum, iv.entry_mass, delta) - pi;
  FValue out;
  out.norm_form = detail::deviation_modes(iv, delta).squaredNorm();
  out.inner_form = (iv.entry_mass.array() * full.array() / iv.class_degree.array()).sum();
  return out;
}

/// Rayleigh quotient on the collapsed graph of the centred class values at
/// delta/2 on interval i.
inline double interval_rayleigh(const Trajectory& traj, int i, double delta) {
  const auto& iv = detail::checked_interval(traj, i);
  const Eigen::VectorXd x =
      iv.spectrum.sqrt_degrees.cwiseInverse().asDiagonal() * (iv.spectrum.vectors * detail::deviation_modes(iv, delta));
  return rayleigh_quotient(iv.graph, x);
}

/// Outcome of one inequality check; margin = lhs - rhs.
struct Check {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double margin = 0.0;
};

struct DiagnosticsReport {
  int source = 0;
  double T = 0.0;
  double t = 0.0;
  double g = 0.0;
  double g_fd = 0.0;
  double lambda2 = 0.0;
  int j0 = 0;
  double h = 0.0;
  double h_lambda2 = 0.0;
  double overlap = 0.0;
  double a_tol = 0.0;
  double kappa = 0.0;
  double kappa_time = 0.0;
  Cut cut;
  std::optional<double> phi_oracle;
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.applicable || c.passed; });
  }

  nlohmann::json to_json() const {
    using nlohmann::json;
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json j{{"source", source}, {"T", T}, {"t", t}, {"g_v", num(g)}, {"g_v_fd", num(g_fd)},
           {"lambda2", num(lambda2)}, {"j0", j0}, {"h_v", num(h)}, {"h_v_lambda2", num(h_lambda2)},
           {"overlap", num(overlap)}, {"a_tol", a_tol}, {"kappa", kappa}, {"kappa_time", kappa_time},
           {"cut", {{"subset", cut.subset}, {"cut_weight", cut.cut_weight}, {"conductance", cut.conductance}}}};
    j["phi_oracle"] = phi_oracle ? json(*phi_oracle) : json(nullptr);
    json cs = json::array();
    for (const auto& c : checks)
      cs.push_back({{"name", c.name}, {"applicable", c.applicable}, {"passed", c.passed}, {"margin", num(c.margin)}});
    j["checks"] = cs;
    j["passed"] = passed();
    return j;
  }
};

/// g_v(T) >= kappa^2 on an exact trajectory from pi_v.
inline DiagnosticsReport verify_decay_bound(const Hypergraph& g, const Trajectory& traj, int v, double T, double t,
                                            const Tolerances& tol = default_tolerances()) {
  DiagnosticsReport rep;
  rep.source = v;
  rep.T = T;
  rep.t = t;
  rep.g = g_v(g, traj, T);
  rep.g_fd = g_v_finite_difference(g, traj, T);
  const auto k = kappa(g, traj, T, t, 256, tol);
  rep.kappa = k.kappa;
  rep.kappa_time = k.time;
  rep.cut = k.cut;
  const double margin = rep.g - rep.kappa * rep.kappa;
  rep.checks.push_back({"g_v >= kappa^2", true, margin >= -tol.verify_slack, margin});
  return rep;
}

inline DiagnosticsReport verify_decay_bound(const Hypergraph& g, int v, double T, double t,
                                            const Tolerances& tol = default_tolerances()) {
  const auto traj = solve_exact(g, g.point_mass(v), t, SampleSpec{}, tol);
  return verify_decay_bound(g, traj, v, T, t, tol);
}

/// 4 phi_G h_v(T) >= kappa^2, gated on |<u_2, rho_T>| > a_tol, plus
/// phi_{G_{v,T}}(S) <= phi_G(S) on the sweep witnesses.
inline DiagnosticsReport verify_cheeger_bound(const Hypergraph& g, const Trajectory& traj, int v, double T, double t,
                                              double phi_g, const Tolerances& tol = default_tolerances()) {
  DiagnosticsReport rep = verify_decay_bound(g, traj, v, T, t, tol);
  rep.phi_oracle = phi_g;
  const VertexVector rho_t = traj.rho_at(T);
  const auto hv = h_value(g, rho_t, tol);
  rep.lambda2 = hv.lambda2;
  rep.j0 = hv.j0;
  rep.h = hv.h;
  rep.h_lambda2 = hv.h_lambda2;
  rep.overlap = hv.overlap;
  rep.a_tol = hv.a_tol;
  const bool gate = std::abs(hv.overlap) > hv.a_tol;
  const double k2 = rep.kappa * rep.kappa;
  const double margin = 4.0 * phi_g * hv.h - k2;
  rep.checks.push_back({"4 phi_G h_v >= kappa^2", gate, !gate || margin >= -tol.verify_slack, margin});
  const double margin_lambda2 = 4.0 * phi_g * hv.h_lambda2 - k2;
  rep.checks.push_back({"4 phi_G g_v/lambda2 >= kappa^2", gate, !gate || margin_lambda2 >= -tol.verify_slack,
                        margin_lambda2});

  const WeightedGraph support = support_graph(g, to_mu(g, rho_t), tol.tie);
  double chain = std::numeric_limits<double>::infinity();
  std::vector<VertexSet> witnesses{rep.cut.subset};
  if (auto c = mu_sweep_cut(g, rho_t, tol.tie)) witnesses.push_back(c->subset);
  for (const auto& s : witnesses)
    chain = std::min(chain, conductance(g, s).conductance - support.conductance(s).conductance);
  rep.checks.push_back({"phi_support(S) <= phi_G(S)", true, chain >= -1e-12, chain});
  return rep;
}

}  // namespace hyperheat
