// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "hyperheat/cheeger.hpp"

int main(int argc, char** argv) {
  using hyperheat::RunConfig;
  using hyperheat::Solver;

  CLI::App app{"Low-conductance hypergraph cuts by heat diffusion"};
  RunConfig cfg;
  std::string source = "auto";
  double T = 0.25, t = 0.0;
  std::map<std::string, Solver> solvers{{"exact", Solver::exact}, {"implicit", Solver::implicit}, {"rk4", Solver::rk4}};

  app.add_option("--input", cfg.input, "hypergraph file (`n m` then `w v1 ... vk` lines)");
  app.add_option("--solver", cfg.solver, "exact | implicit | rk4")
      ->transform(CLI::CheckedTransformer(solvers, CLI::ignore_case));
  app.add_option("--source", source, "start vertex id or `auto` (max degree)");
  auto* t_lo = app.add_option("--T", T, "start of the sweep window (default 0.25)");
  auto* t_hi = app.add_option("--t", t, "end of the sweep window (default 8 / lambda_hat_2)");
  app.add_option("--lambda", cfg.lambda, "implicit step, in (0, 1)");
  app.add_option("--step", cfg.step, "rk4 step");
  app.add_option("--seed", cfg.seed, "suite seed");
  app.add_option("--output", cfg.output, "write JSON here instead of stdout");
  app.add_flag("--suite", cfg.suite, "run the randomized verification suite");
  app.add_option("--suite-n", cfg.suite_n, "number of suite instances")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    // Help and version requests exit 0; everything else is a usage error.
    const int code = app.exit(err);
    return code == 0 ? hyperheat::kOk : hyperheat::kUsage;
  }

  if (*t_lo) cfg.T = T;
  if (*t_hi) cfg.t = t;
  if (source != "auto") {
    try {
      std::size_t used = 0;
      cfg.source = std::stoi(source, &used);
      if (used != source.size()) throw std::invalid_argument(source);
    } catch (const std::exception&) {
      std::cerr << "error: --source must be an integer or `auto`\n";
      return hyperheat::kUsage;
    }
  }

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      std::cerr << "error: cannot write " << cfg.output << '\n';
      return hyperheat::kBadInput;
    }
  }
  std::ostream& out = cfg.output.empty() ? std::cout : file;

  if (cfg.suite) return hyperheat::run_verification_suite(cfg, out);

  if (cfg.input.empty()) {
    std::cerr << "error: --input is required unless --suite is given\n";
    return hyperheat::kUsage;
  }
  const auto res = hyperheat::run_cheeger_cut(cfg);
  if (!res.message.empty()) std::cerr << "error: " << res.message << '\n';
  if (!res.output.is_null()) out << res.output.dump(2) << '\n';
  return res.exit_code;
}
