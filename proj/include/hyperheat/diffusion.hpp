// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hyperheat/base_decomposition.hpp"
#include "hyperheat/config.hpp"
#include "hyperheat/graph.hpp"
#include "hyperheat/hypercore.hpp"
#include "hyperheat/laplacian.hpp"
#include "hyperheat/spectral.hpp"

namespace hyperheat {

/// Times at which a solver records rho_t: 0, a log grid from t_min to
/// t_end, t_end itself, any extra times, and (exact solver) every event.
struct SampleSpec {
  int per_decade = 64;
  double t_min = 1e-3;
  std::vector<double> extra;
  bool include_events = true;
};

inline std::vector<double> sample_times(const SampleSpec& spec, double t_end) {
  std::vector<double> times{0.0};
  if (t_end > 0.0) {
    if (spec.per_decade > 0 && spec.t_min > 0.0 && spec.t_min < t_end) {
      const double step = 1.0 / spec.per_decade;
      for (int k = 0;; ++k) {
        const double t = spec.t_min * std::pow(10.0, k * step);
        if (t >= t_end) break;
        times.push_back(t);
      }
    }
    times.push_back(t_end);
  }
  for (double t : spec.extra)
    if (t >= 0.0 && t <= t_end) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

/// One linear piece of an exact trajectory: on [start, end] the class
/// masses follow the heat kernel of the collapsed graph and every vertex
/// carries d(u) times its class value.
struct Interval {
  double start = 0.0;
  double end = 0.0;
  OrderedPartition partition;
  WeightedGraph graph;
  SpectralDecomposition spectrum;
  VertexVector entry;           // snapped state at start
  Eigen::VectorXd entry_mass;   // class masses at start
  Eigen::VectorXd class_degree;

  Eigen::VectorXd class_mass_at(double t) const {
    return heat_propagate(spectrum, entry_mass, std::max(0.0, t - start));
  }
};

/// Implicit-Euler step diagnostics.
struct ProxStepReport {
  int iterations = 0;
  double residual = 0.0;   // min over selections of ||x_k - x_{k-1} + lambda y||_{D^{-1}}
  double objective = 0.0;  // proximal objective at the returned point
  double duality_gap = 0.0;
  int classes = 0;
};

struct Sample {
  double t = 0.0;
  VertexVector rho;
};

/// Piecewise description of rho_t plus recorded samples.
struct Trajectory {
  std::string solver;
  VertexVector initial;
  VertexVector degrees;
  double t_end = 0.0;
  double step = 0.0;  // lambda for implicit, h for rk4, 0 for exact
  std::vector<double> events;          // t_0 = 0 < t_1 < ...
  std::vector<Interval> intervals;     // exact solver only
  std::vector<VertexVector> steps;     // implicit solver: x_0, x_1, ...
  std::vector<ProxStepReport> reports; // implicit solver
  std::vector<Sample> samples;

  /// Index of the interval containing t (exact solver).
  int interval_index(double t) const {
    if (intervals.empty()) throw DomainError("trajectory has no intervals");
    for (std::size_t i = 0; i < intervals.size(); ++i)
      if (t <= intervals[i].end) return static_cast<int>(i);
    return static_cast<int>(intervals.size()) - 1;
  }

  /// rho at time t for any solver; rk4 interpolates linearly between samples.
  VertexVector rho_at(double t) const {
    if (t < 0.0) throw DomainError("negative time");
    if (!intervals.empty()) {
      const auto& iv = intervals[interval_index(t)];
      const Eigen::VectorXd mass = iv.class_mass_at(t);
      VertexVector rho(degrees.size());
      for (int k = 0; k < iv.partition.size(); ++k)
        for (int v : iv.partition.classes[k]) rho[v] = degrees[v] * mass[k] / iv.class_degree[k];
      return rho;
    }
    if (!steps.empty()) {
      // x_k on (t_k, t_{k+1}] with t_k = k * step.
      if (t == 0.0) return steps.front();
      long k = static_cast<long>(std::ceil(t / step - 1e-9)) - 1;
      k = std::clamp<long>(k, 0, static_cast<long>(steps.size()) - 1);
      return steps[k];
    }
    if (samples.empty()) throw DomainError("trajectory is empty");
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const Sample& s, double x) { return s.t < x; });
    if (it == samples.end()) return samples.back().rho;
    if (it->t == t || it == samples.begin()) return it->rho;
    const auto& lo = *(it - 1);
    const double a = (t - lo.t) / (it->t - lo.t);
    return (1.0 - a) * lo.rho + a * it->rho;
  }

  nlohmann::json to_json() const {
    using nlohmann::json;
    auto vec = [](const Eigen::VectorXd& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
    json j;
    j["hyperheat-traj"] = 1;
    j["solver"] = solver;
    j["t_end"] = t_end;
    j["step"] = step;
    j["initial"] = vec(initial);
    j["events"] = events;
    json ivs = json::array();
    for (const auto& iv : intervals) {
      ivs.push_back({{"start", iv.start}, {"end", iv.end}, {"classes", iv.partition.classes},
                     {"converged", iv.partition.converged}});
    }
    j["intervals"] = ivs;
    json rep = json::array();
    for (const auto& r : reports)
      rep.push_back({{"iterations", r.iterations}, {"residual", r.residual}, {"objective", r.objective}});
    j["prox_reports"] = rep;
    json ss = json::array();
    for (const auto& s : samples) ss.push_back({{"t", s.t}, {"rho", vec(s.rho)}});
    j["samples"] = ss;
    return j;
  }
};

/// Solver failure carrying everything computed before the failure.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// Inner prox solver stalled before the residual certificate passed.
class ProxError : public std::runtime_error {
 public:
  ProxError(const std::string& what, ProxStepReport report)
      : std::runtime_error(what), report_(report) {}
  const ProxStepReport& report() const { return report_; }

 private:
  ProxStepReport report_;
};

namespace detail {

inline void check_initial(const Hypergraph& g, const VertexVector& s, bool allow_signed) {
  if (s.size() != g.num_vertices()) throw DomainError("initial vector length does not match hypergraph");
  if (!s.allFinite()) throw DomainError("initial vector is not finite");
  if (!allow_signed) {
    if ((s.array() < 0.0).any()) throw DomainError("initial vector has negative entries");
    if (std::abs(s.sum() - 1.0) > 1e-12) throw DomainError("initial vector does not sum to 1");
  }
}

// Class values mu~_k(delta) = sum_j modes(k,j) exp(-delta lambda_j).
struct ClassModes {
  Eigen::MatrixXd modes;
  Eigen::VectorXd rates;

  ClassModes(const SpectralDecomposition& dec, const Eigen::VectorXd& mass) {
    const Eigen::VectorXd c = eigen_coefficients(dec, mass);
    modes = dec.sqrt_degrees.cwiseInverse().asDiagonal() * dec.vectors * c.asDiagonal();
    rates = dec.eigenvalues;
  }
  Eigen::VectorXd mu(double delta) const { return modes * (-delta * rates).array().exp().matrix(); }
  // Largest sup-norm contribution of a non-constant mode at delta.
  double mode_weight(int j, double delta) const {
    return modes.col(j).cwiseAbs().maxCoeff() * std::exp(-delta * rates[j]);
  }
};

// Ordered class pairs (hi, lo) whose difference must stay positive for the
// current refined top/bottom sets to remain valid.
inline std::vector<std::pair<int, int>> tie_pairs(const Hypergraph& g, const OrderedPartition& p) {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> cls;
  for (const auto& e : g.edges()) {
    cls.clear();
    for (int v : e.vertices) cls.push_back(p.class_of[v]);
    std::sort(cls.begin(), cls.end());
    cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
    if (cls.size() < 2) continue;
    const int top = cls.front(), bottom = cls.back();
    for (int k : cls) {
      if (k != top) pairs.emplace_back(top, k);
      if (k != bottom) pairs.emplace_back(k, bottom);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

}  // namespace detail

/// First time after iv.start at which a class splits or a refined top or bottom set of some
/// edge changes, or nullopt if none occurs before horizon.
///
/// A pair difference g = mu~_hi - mu~_lo triggers when it changes sign, or
/// falls below minus the tie threshold for pairs that start tied.
inline std::optional<double> next_tie_time(const Hypergraph& g, const Interval& iv, double horizon,
                                           const Tolerances& tol = default_tolerances()) {
  const auto& p = iv.partition;
  if (p.size() < 2 || horizon <= iv.start) return std::nullopt;
  const auto pairs = detail::tie_pairs(g, p);
  std::vector<int> shared;
  for (int k = 0; k < p.size(); ++k)
    if (p.classes[k].size() > 1) shared.push_back(k);
  if (pairs.empty() && shared.empty()) return std::nullopt;
  const detail::ClassModes modes(iv.spectrum, iv.entry_mass);
  const Eigen::VectorXd mu0 = modes.mu(0.0);
  const double thr = 0.5 * tie_threshold(mu0, tol.tie);
  const int m = p.size();
  const double lambda_floor = std::max(iv.spectrum.eigenvalues[1], 1e-12);
  const double max_delta = horizon - iv.start;

  std::vector<char> armed(pairs.size());
  for (std::size_t q = 0; q < pairs.size(); ++q)
    armed[q] = mu0[pairs[q].first] - mu0[pairs[q].second] > thr;

  auto triggered = [&](std::size_t q, const Eigen::VectorXd& mu, bool is_armed) {
    const double diff = mu[pairs[q].first] - mu[pairs[q].second];
    return is_armed ? diff <= 0.0 : diff < -thr;
  };
  // A class splits once its members no longer share one velocity.
  VertexVector probe(g.num_vertices());
  auto splits = [&](const Eigen::VectorXd& mu) {
    if (shared.empty()) return false;
    for (int k = 0; k < m; ++k)
      for (int v : p.classes[k]) probe[v] = g.degree(v) * mu[k];
    const auto q = ordered_partition(g, probe, 2, tol.tie);
    for (int k : shared)
      for (int v : p.classes[k])
        if (q.class_of[v] != q.class_of[p.classes[k].front()]) return true;
    return false;
  };

  double delta = 0.0;
  while (delta < max_delta) {
    double lambda_eff = 0.0, tail = 0.0;
    for (int j = 1; j < m; ++j) {
      const double w = modes.mode_weight(j, delta);
      tail += w;
      if (w > 1e-3 * thr) lambda_eff = std::max(lambda_eff, modes.rates[j]);
    }
    // Every difference lies within 2*tail of its limit; once that is under the
    // threshold the classes are tied at tolerance and no further change is resolvable.
    if (2.0 * tail < thr) return std::nullopt;
    const double h = tol.event_scan_step / std::max(lambda_eff, lambda_floor);
    const double next = std::min(delta + h, max_delta);
    const Eigen::VectorXd mu = modes.mu(next);
    std::optional<double> first;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      if (!triggered(q, mu, armed[q])) continue;
      double lo = delta, hi = next;
      while (hi - lo > tol.event_time) {
        const double mid = 0.5 * (lo + hi);
        (triggered(q, modes.mu(mid), armed[q]) ? hi : lo) = mid;
      }
      if (!first || hi < *first) first = hi;
    }
    if (splits(mu)) {
      double lo = delta, hi = first ? *first : next;
      if (splits(modes.mu(hi))) {
        while (hi - lo > tol.event_time) {
          const double mid = 0.5 * (lo + hi);
          (splits(modes.mu(mid)) ? hi : lo) = mid;
        }
        first = hi;
      }
    }
    if (first) return iv.start + *first;
    for (std::size_t q = 0; q < pairs.size(); ++q)
      if (!armed[q] && mu[pairs[q].first] - mu[pairs[q].second] > thr) armed[q] = 1;
    delta = next;
  }
  return std::nullopt;
}

namespace detail {

inline Interval open_interval(const Hypergraph& g, const VertexVector& rho, double start, double tie) {
  Interval iv;
  iv.start = start;
  iv.partition = ordered_partition(g, rho, -1, tie);
  const auto& p = iv.partition;
  iv.entry = VertexVector(g.num_vertices());
  for (int k = 0; k < p.size(); ++k)
    for (int v : p.classes[k]) iv.entry[v] = g.degree(v) * p.mu[k];
  iv.graph = collapsed_graph(g, p, support_selection(g, p));
  iv.spectrum = decompose(iv.graph);
  iv.entry_mass = collapse(p, iv.entry);
  iv.class_degree = iv.spectrum.degrees;
  return iv;
}

}  // namespace detail

/// Event-driven exact solution of the heat equation from s on [0, t_end].
inline Trajectory solve_exact(const Hypergraph& g, const VertexVector& s, double t_end,
                              const SampleSpec& grid = {}, const Tolerances& tol = default_tolerances(),
                              bool allow_signed = false) {
  detail::check_initial(g, s, allow_signed);
  if (!(t_end >= 0.0)) throw DomainError("t_end must be non-negative");
  Trajectory traj;
  traj.solver = "exact";
  traj.initial = s;
  traj.degrees = g.degrees();
  traj.t_end = t_end;
  traj.events.push_back(0.0);

  VertexVector rho = s;
  double t = 0.0;
  double tie = tol.tie;
  while (true) {
    Interval iv = detail::open_interval(g, rho, t, tie);
    const auto next = next_tie_time(g, iv, t_end, tol);
    if (!next) {
      iv.end = t_end;
      traj.intervals.push_back(std::move(iv));
      break;
    }
    double t_next = *next;
    // Accumulating events: widen the tie tolerance so nearly tied classes merge.
    if (t_next - t < tol.event_min_spacing) {
      t_next = std::min(t + tol.event_min_spacing, t_end);
      tie = std::min(tie * 10.0, 1e-6);
    } else {
      tie = tol.tie;
    }
    iv.end = t_next;
    const Eigen::VectorXd mass = iv.class_mass_at(t_next);
    const auto& p = iv.partition;
    for (int k = 0; k < p.size(); ++k)
      for (int v : p.classes[k]) rho[v] = g.degree(v) * mass[k] / iv.class_degree[k];
    traj.intervals.push_back(std::move(iv));
    if (t_next >= t_end) break;
    t = t_next;
    traj.events.push_back(t);
    if (static_cast<int>(traj.events.size()) > tol.max_events)
      throw SolverError("event count exceeded the cap of " + std::to_string(tol.max_events), traj);
  }

  SampleSpec spec = grid;
  if (spec.include_events) spec.extra.insert(spec.extra.end(), traj.events.begin(), traj.events.end());
  for (double ts : sample_times(spec, t_end)) traj.samples.push_back({ts, traj.rho_at(ts)});
  return traj;
}

namespace detail {

// Projection of (a, b) onto {a, b >= 0, sum a = sum b}.
inline void project_balanced(double* a, double* b, int k, std::vector<double>& scratch) {
  scratch.clear();
  for (int i = 0; i < k; ++i) {
    scratch.push_back(a[i]);
    scratch.push_back(-b[i]);
  }
  std::sort(scratch.begin(), scratch.end());
  auto phi = [&](double nu) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += std::max(a[i] - nu, 0.0) - std::max(b[i] + nu, 0.0);
    return s;
  };
  double nu;
  std::size_t i = 0;
  double prev_phi = 0.0;
  for (; i < scratch.size(); ++i) {
    const double f = phi(scratch[i]);
    if (f <= 0.0) break;
    prev_phi = f;
  }
  if (i == scratch.size()) {
    nu = scratch.back();  // unreachable: phi -> -inf
  } else if (i == 0) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += a[j];
    nu = sum / k;
  } else {
    const double lo = scratch[i - 1], hi = scratch[i];
    const double f_hi = phi(hi);
    nu = (f_hi == 0.0) ? hi : lo + prev_phi * (hi - lo) / (prev_phi - f_hi);
  }
  for (int j = 0; j < k; ++j) {
    a[j] = std::max(a[j] - nu, 0.0);
    b[j] = std::max(b[j] + nu, 0.0);
  }
}

// Levels of x ordered by value descending, chained at gap eps.
inline std::vector<VertexSet> levels_of(const VertexVector& x, double eps) { return value_levels(x, eps); }

// Residual certificate: min over y in L_G(xbar) of ||r + lambda y||_{D^{-1}}
// with r = D (xbar - prev). When split is given it receives the levels of
// xbar cut into residual groups, lowest residual first; that is the order in
// which the groups would separate.
inline double prox_residual(const Hypergraph& g, const VertexVector& xbar, const VertexVector& prev,
                            double lambda, double level_eps, std::vector<VertexSet>* split = nullptr) {
  const int n = g.num_vertices();
  const auto levels = levels_of(xbar, level_eps);
  std::vector<int> level_of(n);
  std::vector<double> level_value(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    double num = 0.0, den = 0.0;
    for (int v : levels[l]) {
      level_of[v] = static_cast<int>(l);
      num += g.degree(v) * xbar[v];
      den += g.degree(v);
    }
    level_value[l] = num / den;
  }
  const VertexVector r = g.degrees().cwiseProduct(xbar - prev);
  double total = 0.0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& members = levels[l];
    const int k = static_cast<int>(members.size());
    std::vector<int> local(n, -1);
    for (int i = 0; i < k; ++i) local[members[i]] = i;
    CoverageFunction f;
    f.size = k;
    f.modular.resize(k);
    Eigen::VectorXd d(k);
    for (int i = 0; i < k; ++i) {
      d[i] = g.degree(members[i]);
      f.modular[i] = r[members[i]] / lambda;
    }
    std::vector<int> seen;
    for (int v : members)
      for (int ei : g.incident(v)) seen.push_back(ei);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (int ei : seen) {
      const auto& e = g.edge(ei);
      int top = static_cast<int>(l), bottom = static_cast<int>(l);
      for (int v : e.vertices) {
        top = std::min(top, level_of[v]);
        bottom = std::max(bottom, level_of[v]);
      }
      if (top == bottom) continue;
      const double mass = e.weight * (level_value[top] - level_value[bottom]);
      std::vector<int> in_level;
      for (int v : e.vertices)
        if (level_of[v] == static_cast<int>(l)) in_level.push_back(local[v]);
      if (top == static_cast<int>(l))
        f.out_terms.push_back({std::move(in_level), mass});
      else if (bottom == static_cast<int>(l))
        f.in_terms.push_back({std::move(in_level), mass});
    }
    auto dec = min_norm_base(f, d);
    for (int i = 0; i < k; ++i) total += d[i] * dec.theta[i] * dec.theta[i];
    if (split) {
      std::sort(dec.groups.begin(), dec.groups.end(),
                [&](const auto& x, const auto& y) { return dec.theta[x.front()] < dec.theta[y.front()]; });
      for (const auto& grp : dec.groups) {
        VertexSet piece;
        for (int i : grp) piece.push_back(members[i]);
        std::sort(piece.begin(), piece.end());
        split->push_back(std::move(piece));
      }
    }
  }
  return lambda * std::sqrt(total);
}

// Exact prox for a fixed ordered level structure: solve
// (D~ + lambda L~) z = D~ zbar_prev on the collapsed level graph.
inline VertexVector polish(const Hypergraph& g, const std::vector<VertexSet>& levels,
                           const VertexVector& prev, double lambda) {
  const int n = g.num_vertices();
  const int m = static_cast<int>(levels.size());
  std::vector<int> level_of(n);
  for (int l = 0; l < m; ++l)
    for (int v : levels[l]) level_of[v] = l;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int v = 0; v < n; ++v) {
    a(level_of[v], level_of[v]) += g.degree(v);
    rhs[level_of[v]] += g.degree(v) * prev[v];
  }
  for (const auto& e : g.edges()) {
    int top = m, bottom = -1;
    for (int v : e.vertices) {
      top = std::min(top, level_of[v]);
      bottom = std::max(bottom, level_of[v]);
    }
    if (top == bottom) continue;
    const double w = lambda * e.weight;
    a(top, top) += w;
    a(bottom, bottom) += w;
    a(top, bottom) -= w;
    a(bottom, top) -= w;
  }
  const Eigen::VectorXd z = a.ldlt().solve(rhs);
  VertexVector x(n);
  for (int v = 0; v < n; ++v) x[v] = z[level_of[v]];
  return x;
}

inline double prox_objective(const Hypergraph& g, const VertexVector& x, const VertexVector& prev,
                             double lambda) {
  return 0.5 * lambda * lovasz_energy(g, x) +
         0.5 * ((x - prev).array().square() * g.degrees().array()).sum();
}

}  // namespace detail

/// Dual variables of the prox problem, reusable as a warm start.
struct ProxWarmStart {
  std::vector<double> a;
  std::vector<double> b;
};

/// One implicit-Euler step in mu-coordinates: the minimiser of
///   (lambda/2) sum_e w(e) f_e(x)^2 + (1/2) ||x - prev||_D^2.
///
/// Runs restarted FISTA on the dual (per-edge balanced flows), then snaps
/// the iterate to the exact minimiser of its level structure and accepts
/// it once the residual certificate is at most lambda * prox_certificate.
inline std::pair<VertexVector, ProxStepReport> prox_step(const Hypergraph& g, const VertexVector& prev,
                                                         double lambda,
                                                         const Tolerances& tol = default_tolerances(),
                                                         ProxWarmStart* warm = nullptr) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("prox step needs lambda > 0");
  if (prev.size() != g.num_vertices()) throw DomainError("vector length does not match hypergraph");
  const int n = g.num_vertices();
  const auto& d = g.degrees();
  const double bound = lambda * tol.prox_certificate;

  std::vector<int> offset(g.num_edges() + 1, 0);
  for (int e = 0; e < g.num_edges(); ++e)
    offset[e + 1] = offset[e] + static_cast<int>(g.edge(e).vertices.size());
  const int dim = offset.back();

  ProxStepReport report;
  const double value_scale = std::max(prev.cwiseAbs().maxCoeff(), 1e-300);

  // Guess a level structure from approx, solve it exactly, and split levels
  // along their residual groups until the certificate holds.
  auto try_polish = [&](const VertexVector& approx, VertexVector& out) {
    const double range = approx.maxCoeff() - approx.minCoeff();
    const double level_eps = 1e-13 * value_scale;
    for (double rel : {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4}) {
      auto levels = detail::levels_of(approx, rel * range);
      for (int round = 0; round < n; ++round) {
        VertexVector cand = detail::polish(g, levels, prev, lambda);
        std::vector<VertexSet> split;
        const double res = detail::prox_residual(g, cand, prev, lambda, level_eps, &split);
        if (res <= bound) {
          report.residual = res;
          report.classes = static_cast<int>(detail::levels_of(cand, level_eps).size());
          out = std::move(cand);
          return true;
        }
        if (split.size() <= levels.size()) break;
        levels = std::move(split);
      }
    }
    return false;
  };

  VertexVector result;
  if (try_polish(prev, result)) {
    report.objective = detail::prox_objective(g, result, prev, lambda);
    return {result, report};
  }

  std::vector<double> a(dim, 0.0), b(dim, 0.0);
  if (warm && static_cast<int>(warm->a.size()) == dim) {
    a = warm->a;
    b = warm->b;
  }
  double max_count_ratio = 0.0;
  for (int v = 0; v < n; ++v)
    max_count_ratio = std::max(max_count_ratio, g.incident(v).size() / d[v]);
  double max_edge = 0.0;
  for (const auto& e : g.edges()) max_edge = std::max(max_edge, e.vertices.size() / (lambda * e.weight));
  const double lipschitz = 2.0 * max_count_ratio + max_edge;

  auto primal_of = [&](const std::vector<double>& av, const std::vector<double>& bv, VertexVector& z,
                       VertexVector& x) {
    z.setZero(n);
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto& vs = g.edge(e).vertices;
      for (std::size_t i = 0; i < vs.size(); ++i) z[vs[i]] += av[offset[e] + i] - bv[offset[e] + i];
    }
    x = prev - z.cwiseQuotient(d);
  };
  auto edge_flow = [&](const std::vector<double>& av, const std::vector<double>& bv, int e) {
    double s = 0.0;
    for (int i = offset[e]; i < offset[e + 1]; ++i) s += av[i] + bv[i];
    return 0.5 * s;
  };
  auto dual_value = [&](const std::vector<double>& av, const std::vector<double>& bv, const VertexVector& z) {
    double val = z.dot(prev) - 0.5 * (z.array().square() / d.array()).sum();
    for (int e = 0; e < g.num_edges(); ++e) {
      const double s = edge_flow(av, bv, e);
      val -= s * s / (2.0 * lambda * g.edge(e).weight);
    }
    return val;
  };

  std::vector<double> ya = a, yb = b, a_prev = a, b_prev = b, scratch;
  VertexVector z(n), x(n);
  primal_of(a, b, z, x);
  double best_dual = dual_value(a, b, z);
  double momentum = 1.0;
  const double gap_target = tol.prox_inner * std::max(1.0, std::abs(best_dual));
  for (int iter = 1; iter <= tol.prox_max_iterations; ++iter) {
    report.iterations = iter;
    primal_of(ya, yb, z, x);
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto& vs = g.edge(e).vertices;
      const double s_term = edge_flow(ya, yb, e) / (2.0 * lambda * g.edge(e).weight);
      for (std::size_t i = 0; i < vs.size(); ++i) {
        a[offset[e] + i] = ya[offset[e] + i] + (x[vs[i]] - s_term) / lipschitz;
        b[offset[e] + i] = yb[offset[e] + i] + (-x[vs[i]] - s_term) / lipschitz;
      }
      detail::project_balanced(a.data() + offset[e], b.data() + offset[e], static_cast<int>(vs.size()), scratch);
    }
    primal_of(a, b, z, x);
    const double dual = dual_value(a, b, z);
    if (dual < best_dual) {
      // Restart: drop momentum, continue from the previous iterate.
      momentum = 1.0;
      a = a_prev;
      b = b_prev;
      ya = a;
      yb = b;
      continue;
    }
    best_dual = dual;
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_momentum;
    for (int i = 0; i < dim; ++i) {
      ya[i] = a[i] + beta * (a[i] - a_prev[i]);
      yb[i] = b[i] + beta * (b[i] - b_prev[i]);
    }
    momentum = next_momentum;
    a_prev = a;
    b_prev = b;

    const double gap = detail::prox_objective(g, x, prev, lambda) - dual;
    report.duality_gap = gap;
    if (gap <= gap_target || iter % 25 == 0) {
      if (try_polish(x, result)) {
        report.objective = detail::prox_objective(g, result, prev, lambda);
        if (warm) {
          warm->a = a;
          warm->b = b;
        }
        return {result, report};
      }
    }
  }
  report.residual = detail::prox_residual(g, x, prev, lambda, 1e-13 * value_scale);
  report.objective = detail::prox_objective(g, x, prev, lambda);
  throw ProxError("prox solver did not reach the residual certificate", report);
}

/// Implicit Euler with fixed steps h_k = lambda; rho_t = x_k on (t_k, t_{k+1}].
inline Trajectory solve_implicit(const Hypergraph& g, const VertexVector& s, double t_end, double lambda,
                                 const SampleSpec& grid = {}, const Tolerances& tol = default_tolerances(),
                                 bool allow_signed = false) {
  detail::check_initial(g, s, allow_signed);
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("implicit solver needs lambda in (0, 1)");
  if (!(t_end >= 0.0)) throw DomainError("t_end must be non-negative");
  Trajectory traj;
  traj.solver = "implicit";
  traj.initial = s;
  traj.degrees = g.degrees();
  traj.t_end = t_end;
  traj.step = lambda;
  traj.events.push_back(0.0);
  traj.steps.push_back(s);
  const long n_steps = static_cast<long>(std::ceil(t_end / lambda - 1e-9));
  VertexVector xbar = to_mu(g, s);
  ProxWarmStart warm;
  for (long k = 1; k <= n_steps; ++k) {
    try {
      auto [next, report] = prox_step(g, xbar, lambda, tol, &warm);
      xbar = std::move(next);
      traj.reports.push_back(report);
    } catch (const ProxError& err) {
      traj.reports.push_back(err.report());
      throw SolverError(std::string("implicit step ") + std::to_string(k) + ": " + err.what(), traj);
    }
    traj.steps.push_back(g.degrees().cwiseProduct(xbar));
  }
  for (double ts : sample_times(grid, t_end)) traj.samples.push_back({ts, traj.rho_at(ts)});
  return traj;
}

/// Classical RK4 on the uniform-split selection of the Laplacian.
inline Trajectory solve_rk4(const Hypergraph& g, const VertexVector& s, double t_end, double h,
                            const SampleSpec& grid = {}, const Tolerances& tol = default_tolerances(),
                            bool allow_signed = false) {
  detail::check_initial(g, s, allow_signed);
  if (!(h > 0.0)) throw DomainError("rk4 needs a positive step");
  if (!(t_end >= 0.0)) throw DomainError("t_end must be non-negative");
  Trajectory traj;
  traj.solver = "rk4";
  traj.initial = s;
  traj.degrees = g.degrees();
  traj.t_end = t_end;
  traj.step = h;
  traj.events.push_back(0.0);
  auto field = [&](const VertexVector& rho) -> VertexVector {
    return -normalized_laplacian_apply(g, rho, tol.tie);
  };
  const auto times = sample_times(grid, t_end);
  VertexVector rho = s;
  double t = 0.0;
  traj.samples.push_back({0.0, rho});
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double target = times[i];
    while (t < target) {
      const double dt = std::min(h, target - t);
      const VertexVector k1 = field(rho);
      const VertexVector k2 = field(rho + 0.5 * dt * k1);
      const VertexVector k3 = field(rho + 0.5 * dt * k2);
      const VertexVector k4 = field(rho + dt * k3);
      rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = (target - t - dt <= 1e-15 * std::max(1.0, target)) ? target : t + dt;
    }
    traj.samples.push_back({target, rho});
  }
  return traj;
}

}  // namespace hyperheat
