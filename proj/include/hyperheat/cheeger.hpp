// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "hyperheat/analysis.hpp"
#include "hyperheat/config.hpp"
#include "hyperheat/diffusion.hpp"
#include "hyperheat/generators.hpp"
#include "hyperheat/hypercore.hpp"
#include "hyperheat/io.hpp"

namespace hyperheat {

enum class Solver { exact, implicit, rk4 };

inline const char* solver_name(Solver s) {
  switch (s) {
    case Solver::exact: return "exact";
    case Solver::implicit: return "implicit";
    case Solver::rk4: return "rk4";
  }
  return "exact";
}

struct RunConfig {
  std::string input;
  Solver solver = Solver::exact;
  std::optional<int> source;  // nullopt = max-degree vertex
  std::optional<double> T;    // default 0.25
  std::optional<double> t;    // default 8 / lambda_hat_2
  double lambda = 0.01;
  double step = 1e-3;
  std::uint64_t seed = 1;
  std::string output;
  bool suite = false;
  int suite_n = 200;
  GeneratorConfig generator;
};

/// Exit codes of the driver.
enum ExitCode : int { kOk = 0, kUsage = 1, kBadInput = 2, kSolverFailure = 3 };

struct CutResult {
  int exit_code = kOk;
  std::string message;
  nlohmann::json output;
};

namespace detail {

inline nlohmann::json cut_json(const Cut& c) {
  return {{"subset", c.subset}, {"cut_weight", c.cut_weight}, {"conductance", c.conductance}};
}

inline Trajectory run_solver(const Hypergraph& g, const VertexVector& s, double t_end, const RunConfig& cfg) {
  switch (cfg.solver) {
    case Solver::implicit: return solve_implicit(g, s, t_end, cfg.lambda);
    case Solver::rk4: return solve_rk4(g, s, t_end, cfg.step);
    case Solver::exact: break;
  }
  return solve_exact(g, s, t_end);
}

}  // namespace detail

/// Heat diffusion from pi_v on [0, t] and the best mu-sweep cut over [T, t].
inline CutResult run_cheeger_cut(const Hypergraph& g, const RunConfig& cfg) {
  using nlohmann::json;
  CutResult res;
  const int v = cfg.source.value_or(g.max_degree_vertex());
  if (v < 0 || v >= g.num_vertices()) {
    res.exit_code = kUsage;
    res.message = "source vertex out of range";
    return res;
  }
  if (g.num_vertices() < 2) {
    res.exit_code = kBadInput;
    res.message = "hypergraph needs at least two vertices";
    return res;
  }
  const double lam2 = lambda_hat_2(g);
  const double T = cfg.T.value_or(0.25);
  const double t = cfg.t.value_or(8.0 / lam2);
  if (!(T >= 0.0 && T < t)) {
    res.exit_code = kUsage;
    res.message = "need 0 <= T < t";
    return res;
  }
  if (cfg.solver == Solver::implicit && !(cfg.lambda > 0.0 && cfg.lambda < 1.0)) {
    res.exit_code = kUsage;
    res.message = "implicit solver needs lambda in (0, 1)";
    return res;
  }
  if (cfg.solver == Solver::rk4 && !(cfg.step > 0.0)) {
    res.exit_code = kUsage;
    res.message = "rk4 needs a positive step";
    return res;
  }

  json out;
  out["hyperheat"] = 1;
  out["config"] = {{"input", cfg.input}, {"solver", solver_name(cfg.solver)}, {"source", v}, {"T", T},
                   {"t", t}, {"lambda", cfg.lambda}, {"step", cfg.step}, {"seed", cfg.seed}};
  out["n"] = g.num_vertices();
  out["m"] = g.num_edges();
  out["lambda_hat_2"] = lam2;

  Trajectory traj;
  try {
    traj = detail::run_solver(g, g.point_mass(v), t, cfg);
  } catch (const SolverError& err) {
    out["error"] = err.what();
    out["trajectory"] = err.partial().to_json();
    res.exit_code = kSolverFailure;
    res.message = err.what();
    res.output = std::move(out);
    return res;
  }

  const auto k = kappa(g, traj, T, t);
  out["S_out"] = k.cut.subset;
  out["phi"] = k.cut.conductance;
  out["cut"] = detail::cut_json(k.cut);
  out["cut_time"] = k.time;
  std::optional<double> phi_oracle;
  if (g.num_vertices() <= 12) phi_oracle = min_conductance_bruteforce(g).conductance;
  out["phi_oracle"] = phi_oracle ? json(*phi_oracle) : json(nullptr);

  json diag;
  try {
    const DiagnosticsReport rep = phi_oracle ? verify_cheeger_bound(g, traj, v, T, t, *phi_oracle)
                                             : verify_decay_bound(g, traj, v, T, t);
    diag = rep.to_json();
  } catch (const DomainError& err) {
    diag = {{"error", err.what()}};
  }
  out["diagnostics"] = diag;

  json tr{{"solver", solver_name(cfg.solver)}, {"events", traj.events.size()}, {"samples", traj.samples.size()}};
  if (!cfg.output.empty()) {
    const std::string path = cfg.output + ".traj.json";
    std::ofstream f(path);
    f << traj.to_json().dump() << '\n';
    tr["file"] = path;
  }
  out["trajectory"] = tr;
  res.output = std::move(out);
  return res;
}

inline CutResult run_cheeger_cut(const RunConfig& cfg) {
  CutResult res;
  Hypergraph g;
  try {
    g = read_hypergraph_file(cfg.input);
  } catch (const ParseError& err) {
    res.exit_code = kBadInput;
    res.message = err.what();
    return res;
  }
  return run_cheeger_cut(g, cfg);
}

/// One record of the randomized suite.
struct SuiteRecord {
  int index = 0;
  std::uint64_t seed = 0;
  Hypergraph graph;
  double lambda_hat_2 = 0.0;
  DiagnosticsReport report;
  double phi_out = 0.0;
  double phi_oracle = 0.0;
  bool quality_ok = false;
  std::string error;

  nlohmann::json to_json() const {
    nlohmann::json j{{"instance", index}, {"seed", seed}, {"n", graph.num_vertices()}, {"m", graph.num_edges()},
                     {"lambda_hat_2", lambda_hat_2}, {"phi_out", phi_out}, {"phi_oracle", phi_oracle},
                     {"quality_ok", quality_ok}};
    if (!error.empty())
      j["error"] = error;
    else
      j["diagnostics"] = report.to_json();
    return j;
  }
};

/// Seed of instance i under a suite seed.
inline std::uint64_t instance_seed(std::uint64_t seed, int i) {
  return seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(i) * 0xBF58476D1CE4E5B9ull + 1;
}

inline SuiteRecord run_suite_instance(const RunConfig& cfg, int i) {
  SuiteRecord rec;
  rec.index = i;
  rec.seed = instance_seed(cfg.seed, i);
  rec.graph = planted_two_cluster(cfg.generator, rec.seed);
  const auto& g = rec.graph;
  rec.lambda_hat_2 = lambda_hat_2(g);
  const int v = g.max_degree_vertex();
  const double T = cfg.T.value_or(0.25);
  const double t = cfg.t.value_or(8.0 / rec.lambda_hat_2);
  rec.phi_oracle = min_conductance_bruteforce(g).conductance;
  try {
    const auto traj = solve_exact(g, g.point_mass(v), t);
    rec.report = verify_cheeger_bound(g, traj, v, T, t, rec.phi_oracle);
    rec.phi_out = rec.report.kappa;
    rec.quality_ok = rec.phi_out <= 2.0 * std::sqrt(2.0 * rec.phi_oracle) + 1e-6;
  } catch (const std::exception& err) {
    rec.error = err.what();
  }
  return rec;
}

/// Randomized verification suite; writes one JSON line per instance and a
/// final summary line. Output depends only on the configuration.
inline int run_verification_suite(const RunConfig& cfg, std::ostream& out) {
  int decay_violations = 0, cheeger_violations = 0, cheeger_na = 0, quality_ok = 0, errors = 0;
  for (int i = 0; i < cfg.suite_n; ++i) {
    const auto rec = run_suite_instance(cfg, i);
    out << rec.to_json().dump() << '\n';
    if (!rec.error.empty()) {
      ++errors;
      continue;
    }
    for (const auto& c : rec.report.checks) {
      if (c.name == "g_v >= kappa^2" && !c.passed) ++decay_violations;
      if (c.name == "4 phi_G h_v >= kappa^2") {
        if (!c.applicable)
          ++cheeger_na;
        else if (!c.passed)
          ++cheeger_violations;
      }
    }
    quality_ok += rec.quality_ok;
  }
  nlohmann::json summary{{"summary", true},
                         {"instances", cfg.suite_n},
                         {"seed", cfg.seed},
                         {"errors", errors},
                         {"decay_violations", decay_violations},
                         {"cheeger_violations", cheeger_violations},
                         {"cheeger_not_applicable", cheeger_na},
                         {"quality_ok", quality_ok}};
  summary["passed"] = errors == 0 && decay_violations == 0 && cheeger_violations == 0;
  out << summary.dump() << '\n';
  return summary["passed"].get<bool>() ? kOk : kSolverFailure;
}

}  // namespace hyperheat
