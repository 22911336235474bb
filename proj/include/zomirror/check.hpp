#pragma once

#include <cstdint>
#include <functional>

namespace zomirror {

/// Golden-section search for the minimiser of a unimodal scalar function on
/// [lo, hi]. Stops when the bracket is narrower than tol.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol = 1e-12, int max_iter = 500);

struct ProxCheckReport {
  int trials = 0;
  int failures = 0;
  double max_abs_error = 0.0;
  double seconds = 0.0;

  bool passed() const { return failures == 0; }
};

/// Compares prox_composite against per-coordinate golden-section minimisation
/// on random instances (d <= 50, gamma2 = 0 and > 0, box and unconstrained).
ProxCheckReport prox_bruteforce_check(int trials, std::uint64_t seed, double tolerance = 1e-6);

}  // namespace zomirror
