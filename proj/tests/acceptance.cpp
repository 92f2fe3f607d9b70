// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hyperheat/analysis.hpp"
#include "hyperheat/cheeger.hpp"
#include "hyperheat/generators.hpp"
#include "test_support.hpp"

namespace hh = hyperheat;
using hh::Hypergraph;
using hh::VertexSet;
using hh::VertexVector;

namespace {

// Pinned tolerances.
constexpr double kClosedFormTol = 1e-10;
constexpr double kExactMassTol = 1e-10;
constexpr double kRk4MassTol = 1e-8;
constexpr double kRk4Step = 1e-4;
constexpr double kRk4Horizon = 2.0;
constexpr double kConvergenceTol = 1e-6;
constexpr double kMonotoneSlack = 1e-9;
constexpr double kBoundSlack = 1e-8;
constexpr double kQualitySlack = 1e-6;
constexpr double kQualityFraction = 0.95;
constexpr double kSweepTol = 1e-12;
constexpr double kNormTol = 1e-9;
constexpr double kOperatorSlack = 1e-10;
constexpr double kCertificate = 1e-6;
constexpr double kSlopeLo = 0.4, kSlopeHi = 1.1;
constexpr double kReconstructionTol = 1e-8;
constexpr double kCheegerSlack = 1e-8;
constexpr double kLogDerivativeTol = 1e-5;
constexpr double kConvexitySlack = 1e-6;

constexpr int kSuiteSize = 200;
constexpr std::uint64_t kSuiteSeed = 1;
constexpr double kWindowStart = 0.25;

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, Clock::time_point start) {
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s %2d %s: %s [%.2f s]\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Instance {
  Hypergraph g;
  int source = 0;
  double lambda_hat_2 = 0.0;
  hh::Trajectory traj;  // exact, on [0, 40 / lambda_hat_2]
};

std::vector<Instance> build_suite() {
  std::vector<Instance> suite;
  for (int i = 0; i < kSuiteSize; ++i) {
    Instance inst;
    inst.g = hh::planted_two_cluster({}, hh::instance_seed(kSuiteSeed, i));
    inst.source = inst.g.max_degree_vertex();
    inst.lambda_hat_2 = hh::lambda_hat_2(inst.g);
    inst.traj = hh::solve_exact(inst.g, inst.g.point_mass(inst.source), 40.0 / inst.lambda_hat_2);
    suite.push_back(std::move(inst));
  }
  return suite;
}

double dinv_distance(const Hypergraph& g, const VertexVector& rho) { return std::sqrt(hh::distance_sq(g, rho)); }

void criterion_closed_form() {
  const auto start = Clock::now();
  const Hypergraph g(2, {{{0, 1}, 1.0}});
  VertexVector s(2);
  s << 1.0, 0.0;
  const auto traj = hh::solve_exact(g, s, 2.0);
  double err = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0}) err = std::max(err, std::abs(traj.rho_at(t)[0] - (0.5 + 0.5 * std::exp(-2 * t))));
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(1, "closed-form two-vertex diffusion", err <= kClosedFormTol && secs < 1.0,
         fmt("max error %.3e", err) + fmt(" (tol %.0e, runtime < 1 s)", kClosedFormTol), start);
}

void criterion_mass(const std::vector<Instance>& suite) {
  const auto start = Clock::now();
  double exact_err = 0.0, rk4_err = 0.0;
  for (const auto& inst : suite) {
    for (const auto& smp : inst.traj.samples) exact_err = std::max(exact_err, std::abs(smp.rho.sum() - 1.0));
    const auto rk4 = hh::solve_rk4(inst.g, inst.g.point_mass(inst.source), kRk4Horizon, kRk4Step);
    for (const auto& smp : rk4.samples) rk4_err = std::max(rk4_err, std::abs(smp.rho.sum() - 1.0));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(2, "mass conservation", exact_err <= kExactMassTol && rk4_err <= kRk4MassTol && secs < 120.0,
         fmt("exact %.3e", exact_err) + fmt(" (tol %.0e), ", kExactMassTol) + fmt("rk4 %.3e", rk4_err) +
             fmt(" (tol %.0e), runtime < 120 s", kRk4MassTol),
         start);
}

void criterion_convergence(const std::vector<Instance>& suite) {
  const auto start = Clock::now();
  double worst_final = 0.0, worst_rise = 0.0;
  for (const auto& inst : suite) {
    worst_final = std::max(worst_final, dinv_distance(inst.g, inst.traj.rho_at(40.0 / inst.lambda_hat_2)));
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& smp : inst.traj.samples) {
      const double d = dinv_distance(inst.g, smp.rho);
      worst_rise = std::max(worst_rise, d - prev);
      prev = d;
    }
  }
  report(3, "convergence to stationarity", worst_final <= kConvergenceTol && worst_rise <= kMonotoneSlack,
         fmt("max distance at 40/lambda %.3e", worst_final) + fmt(" (tol %.0e), ", kConvergenceTol) +
             fmt("max increase %.3e", worst_rise) + fmt(" (slack %.0e)", kMonotoneSlack),
         start);
}

void criterion_bounds(const std::vector<Instance>& suite) {
  auto start = Clock::now();
  int decay_violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  int cheeger_violations = 0, not_applicable = 0;
  double min_cheeger_margin = std::numeric_limits<double>::infinity();
  std::vector<double> margins;
  for (const auto& inst : suite) {
    const double t = 8.0 / inst.lambda_hat_2;
    const double phi = hh::min_conductance_bruteforce(inst.g).conductance;
    const auto rep = hh::verify_cheeger_bound(inst.g, inst.traj, inst.source, kWindowStart, t, phi);
    for (const auto& c : rep.checks) {
      if (c.name == "g_v >= kappa^2") {
        margins.push_back(c.margin);
        min_margin = std::min(min_margin, c.margin);
        if (c.margin < -kBoundSlack) ++decay_violations;
      }
      if (c.name == "4 phi_G h_v >= kappa^2") {
        if (!c.applicable) {
          ++not_applicable;
        } else {
          min_cheeger_margin = std::min(min_cheeger_margin, c.margin);
          if (c.margin < -kBoundSlack) ++cheeger_violations;
        }
      }
    }
  }
  std::sort(margins.begin(), margins.end());
  std::printf("     decay-bound margins: min %.4e, median %.4e, max %.4e\n", margins.front(),
              margins[margins.size() / 2], margins.back());
  report(4, "decay bound g_v >= kappa^2", decay_violations == 0,
         std::to_string(decay_violations) + " violations over " + std::to_string(suite.size()) +
             fmt(", min margin %.4e", min_margin),
         start);
  start = Clock::now();
  report(5, "Cheeger bound 4 phi_G h_v >= kappa^2", cheeger_violations == 0,
         std::to_string(cheeger_violations) + " violations, " + std::to_string(not_applicable) +
             " not applicable (overlap gate)" + fmt(", min margin %.4e", min_cheeger_margin),
         start);
}

void criterion_quality() {
  const auto start = Clock::now();
  hh::RunConfig cfg;
  cfg.seed = kSuiteSeed;
  cfg.generator.n_max = 12;
  cfg.generator.max_edges = 16;
  int ok = 0, explained = 0, errors = 0;
  std::vector<std::string> dumps;
  for (int i = 0; i < kSuiteSize; ++i) {
    const auto rec = hh::run_suite_instance(cfg, i);
    if (!rec.error.empty()) {
      ++errors;
      dumps.push_back(rec.to_json().dump());
      continue;
    }
    if (rec.phi_out <= 2.0 * std::sqrt(2.0 * rec.phi_oracle) + kQualitySlack) {
      ++ok;
      continue;
    }
    const bool gate_failed = std::abs(rec.report.overlap) <= rec.report.a_tol;
    const bool transient = rec.report.h > 1.0;
    if (gate_failed || transient) ++explained;
    dumps.push_back(rec.to_json().dump());
  }
  for (const auto& d : dumps) std::printf("     exception: %s\n", d.c_str());
  const double frac = static_cast<double>(ok) / kSuiteSize;
  const int exceptions = kSuiteSize - ok;
  report(6, "sweep-cut quality phi(S_out) <= 2 sqrt(2 phi_G)",
         errors == 0 && frac >= kQualityFraction && explained == exceptions,
         fmt("%.3f of instances within bound", frac) + fmt(" (need %.2f), ", kQualityFraction) +
             std::to_string(exceptions) + " exceptions, " + std::to_string(explained) + " explained by gate or h_v > 1",
         start);
}

void criterion_sweep_equality() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2026);
  double worst = 0.0;
  int compared = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto g = hh::planted_two_cluster({}, hh::instance_seed(7, rep));
    const VertexVector x = hh::testing::random_tied(rng, g.num_vertices(), 3 + rep % 3);
    const VertexVector rho = g.degrees().cwiseProduct(x);
    const auto p = hh::ordered_partition(g, rho, 1);
    const auto gt = hh::collapsed_graph(g, p, hh::support_selection(g, p));
    for (int a = 1; a < p.size(); ++a) {
      VertexSet upper, upper_classes;
      for (int k = 0; k < a; ++k) {
        upper.insert(upper.end(), p.classes[k].begin(), p.classes[k].end());
        upper_classes.push_back(k);
      }
      worst = std::max(worst, std::abs(hh::conductance(g, upper).conductance - gt.conductance(upper_classes).conductance));
      ++compared;
    }
  }
  report(7, "sweep conductance equality hypergraph vs collapsed", worst <= kSweepTol,
         std::to_string(compared) + " thresholds" + fmt(", max difference %.3e", worst) + fmt(" (tol %.0e)", kSweepTol),
         start);
}

void criterion_norm_compatibility(const std::vector<Instance>& suite) {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& inst : suite) {
    for (const auto& smp : inst.traj.samples) {
      const auto& iv = inst.traj.intervals[inst.traj.interval_index(smp.t)];
      const Eigen::VectorXd mass = iv.class_mass_at(smp.t);
      const Eigen::VectorXd pi = iv.class_degree * (mass.sum() / iv.class_degree.sum());
      const double collapsed = std::sqrt(((mass - pi).array().square() / iv.class_degree.array()).sum());
      worst = std::max(worst, std::abs(collapsed - dinv_distance(inst.g, smp.rho)));
    }
  }
  report(8, "norm compatibility collapsed vs full", worst <= kNormTol,
         fmt("max difference %.3e", worst) + fmt(" (tol %.0e)", kNormTol), start);
}

void criterion_monotone(const std::vector<Instance>& suite) {
  const auto start = Clock::now();
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    const auto& g = suite[k % suite.size()].g;
    const int n = g.num_vertices();
    VertexVector x1(n), x2(n);
    for (int i = 0; i < n; ++i) {
      x1[i] = normal(rng);
      x2[i] = normal(rng);
    }
    // Occasional shared coordinates exercise ties.
    if (k % 3 == 0) x2.head(n / 2) = x1.head(n / 2);
    const VertexVector y1 = hh::normalized_laplacian_apply(g, x1), y2 = hh::normalized_laplacian_apply(g, x2);
    worst = std::min(worst, hh::inner_dinv(g, y1 - y2, x1 - x2));
  }
  report(9, "monotone normalized Laplacian", worst >= -kOperatorSlack,
         fmt("min inner product %.3e", worst) + fmt(" over 10000 pairs (slack %.0e)", kOperatorSlack), start);
}

void criterion_implicit(const std::vector<Instance>& suite) {
  const auto start = Clock::now();
  const std::vector<double> lambdas{0.02, 0.01, 0.005};
  std::vector<double> gaps(lambdas.size(), 0.0);
  double worst_ratio = 0.0;
  int steps = 0;
  const int count = 20;
  for (int i = 0; i < count; ++i) {
    const auto& inst = suite[i];
    const VertexVector exact = inst.traj.rho_at(2.0);
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const auto traj = hh::solve_implicit(inst.g, inst.g.point_mass(inst.source), 2.0, lambdas[l]);
      for (const auto& r : traj.reports) {
        worst_ratio = std::max(worst_ratio, r.residual / lambdas[l]);
        ++steps;
      }
      const VertexVector diff = traj.rho_at(2.0) - exact;
      gaps[l] += std::sqrt(hh::inner_dinv(inst.g, diff, diff)) / count;
    }
  }
  // Least-squares slope of log gap against log lambda.
  double mx = 0.0, my = 0.0;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    mx += std::log(lambdas[l]) / lambdas.size();
    my += std::log(gaps[l]) / lambdas.size();
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    sxy += (std::log(lambdas[l]) - mx) * (std::log(gaps[l]) - my);
    sxx += (std::log(lambdas[l]) - mx) * (std::log(lambdas[l]) - mx);
  }
  const double slope = sxy / sxx;
  std::printf("     mean gaps at T=2: %.4e %.4e %.4e\n", gaps[0], gaps[1], gaps[2]);
  report(10, "implicit Euler certificate and step scaling",
         worst_ratio <= kCertificate && slope >= kSlopeLo && slope <= kSlopeHi,
         fmt("max residual/lambda %.3e", worst_ratio) + " over " + std::to_string(steps) + " steps" +
             fmt(" (tol %.0e), ", kCertificate) + fmt("log-log slope %.3f", slope) +
             fmt(" (need [%.1f, ", kSlopeLo) + fmt("%.1f])", kSlopeHi),
         start);
}

void criterion_spectral() {
  const auto start = Clock::now();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  double worst_recon = 0.0, worst_cheeger = -std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 3 + rep % 18;
    std::uniform_int_distribution<int> node(0, m - 1);
    hh::WeightedGraph g(m);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i + 1 < m; ++i) g.add_edge(order[i], order[i + 1], w(rng));
    for (int extra = 0; extra < m; ++extra) {
      const int a = node(rng), b = node(rng);
      if (a != b) g.add_edge(a, b, w(rng));
    }
    const auto dec = hh::decompose(g);
    worst_recon = std::max(worst_recon, dec.reconstruction_error());
    const auto [l2, u2] = hh::lambda2_u2(dec);
    const auto cut = hh::graph_cheeger_sweep(g, u2.cwiseQuotient(dec.degrees));
    worst_cheeger = std::max(worst_cheeger, cut.conductance - std::sqrt(2.0 * l2));
  }
  report(11, "spectral reconstruction and graph Cheeger sweep",
         worst_recon <= kReconstructionTol && worst_cheeger <= kCheegerSlack,
         fmt("max reconstruction error %.3e", worst_recon) + fmt(" (tol %.0e), ", kReconstructionTol) +
             fmt("max phi - sqrt(2 lambda2) %.3e", worst_cheeger) + fmt(" (slack %.0e)", kCheegerSlack),
         start);
}

void criterion_interval_log_convexity(const std::vector<Instance>& suite) {
  const auto start = Clock::now();
  double worst_rel = 0.0, worst_second = std::numeric_limits<double>::infinity();
  int checked = 0;
  for (const auto& inst : suite) {
    const auto& traj = inst.traj;
    for (int i = 0; i < static_cast<int>(traj.intervals.size()); ++i) {
      const auto& iv = traj.intervals[i];
      if (hh::f_interval(traj, i, 0.0).norm_form < 1e-20) continue;
      const double len = std::min(iv.end - iv.start, 2.0);
      auto logf = [&](double d) { return std::log(hh::f_interval(traj, i, d).norm_form); };
      for (int k = 1; k <= 4; ++k) {
        const double d = 0.2 * k * len + 0.05;
        if (hh::f_interval(traj, i, d + 0.05).norm_form < 1e-24) continue;
        const double h = 1e-5;
        const double fd = (logf(d + h) - logf(d - h)) / (2 * h);
        const double r = hh::interval_rayleigh(traj, i, d);
        worst_rel = std::max(worst_rel, std::abs(fd + r) / std::max(1.0, std::abs(r)));
        worst_second = std::min(worst_second, logf(d + 0.05) - 2 * logf(d) + logf(d - 0.05));
        ++checked;
      }
    }
  }
  report(12, "interval log-derivative and log-convexity",
         worst_rel <= kLogDerivativeTol && worst_second >= -kConvexitySlack,
         std::to_string(checked) + " points" + fmt(", max relative derivative error %.3e", worst_rel) +
             fmt(" (tol %.0e), ", kLogDerivativeTol) + fmt("min second difference %.3e", worst_second) +
             fmt(" (slack %.0e)", kConvexitySlack),
         start);
}

}  // namespace

int main() {
  criterion_closed_form();
  const auto suite_start = Clock::now();
  const auto suite = build_suite();
  std::printf("     built %d-instance suite in %.2f s\n", kSuiteSize,
              std::chrono::duration<double>(Clock::now() - suite_start).count());
  criterion_mass(suite);
  criterion_convergence(suite);
  criterion_bounds(suite);
  criterion_quality();
  criterion_sweep_equality();
  criterion_norm_compatibility(suite);
  criterion_monotone(suite);
  criterion_implicit(suite);
  criterion_spectral();
  criterion_interval_log_convexity(suite);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
