// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hyperheat {

/// Raised when an argument lies outside an operation's domain
/// (empty cut, constant sweep vector, negative time, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an input is too large for a dense or exhaustive method.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed or semantically invalid input file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical tolerances shared by all modules. Defaults are the values the
/// test-suite and the acceptance gate are pinned to.
struct Tolerances {
  // Relative (to max |mu|) tolerance for argmax/argmin sets and class merging.
  double tie = 1e-9;
  // Jacobi stops once off(M) <= jacobi_off * ||M||_F.
  double jacobi_off = 1e-12;
  int jacobi_max_sweeps = 100;
  // Symmetry check on decomposed matrices.
  double symmetry = 1e-12;
  // Event-time bisection accuracy and minimum spacing between events.
  double event_time = 1e-10;
  double event_min_spacing = 1e-8;
  int max_events = 20000;
  // Scan step for tie detection, scaled by 1 / lambda_max of the interval.
  double event_scan_step = 0.02;
  // Relative significance threshold for eigen-coefficients.
  double coefficient = 1e-8;
  // Additive slack used by the inequality verifiers.
  double verify_slack = 1e-8;
  // Implicit Euler: inner tolerance and certified residual factor.
  double prox_inner = 1e-10;
  double prox_certificate = 1e-6;
  int prox_max_iterations = 20000;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace hyperheat
