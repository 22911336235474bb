#include "zomirror/check.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "zomirror/mirror.hpp"
#include "zomirror/rng.hpp"

namespace zomirror {

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int max_iter) {
  if (!(lo <= hi)) throw std::invalid_argument("golden section needs lo <= hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // The bracket endpoints are candidates too when the minimiser sits on them.
  double best = 0.5 * (a + b);
  double f_best = f(best);
  for (double cand : {lo, hi}) {
    const double fv = f(cand);
    if (fv < f_best) {
      best = cand;
      f_best = fv;
    }
  }
  return best;
}

ProxCheckReport prox_bruteforce_check(int trials, std::uint64_t seed, double tolerance) {
  if (trials < 0) throw std::invalid_argument("trials must be non-negative");
  const auto start = std::chrono::steady_clock::now();
  ProxCheckReport report;
  report.trials = trials;
  RngStream root(seed);
  constexpr double kSearch = 10.0;

  for (int trial = 0; trial < trials; ++trial) {
    RngStream rng = root.split(static_cast<std::uint64_t>(trial));
    const auto d = static_cast<Eigen::Index>(1 + rng.next_below(50));
    const MirrorGeometry geo(d);
    const double eta = std::exp(std::log(0.2) + rng.next_uniform() * std::log(50.0));
    // Alternate the regulariser family so both prox branches are covered.
    const double gamma1 = (trial % 4 < 2) ? 0.0 : rng.next_uniform();
    const double gamma2 = (trial % 2 == 0) ? 0.0 : 2.0 * rng.next_uniform();
    const ElasticNet reg(gamma1, gamma2);
    const bool boxed = (trial / 4) % 2 == 1;

    Vector x_t(d), g(d), lo(d), hi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      // Keep the unregularised mirror step inside the search bracket.
      double xi, gi;
      do {
        xi = 6.0 * rng.next_uniform() - 3.0;
        gi = eta * (6.0 * rng.next_uniform() - 3.0);
      } while (std::expm1(std::abs(geo.coordinate_gradient(xi)) + std::abs(gi) / eta) *
                   geo.inv_d() >
               kSearch - 0.5);
      x_t[i] = xi;
      g[i] = gi;
      lo[i] = -2.0 * rng.next_uniform();
      hi[i] = 2.0 * rng.next_uniform();
    }
    FeasibleSet set = boxed ? FeasibleSet::box(lo, hi) : FeasibleSet::unconstrained();
    if (boxed) x_t = set.clamp(x_t);

    const Vector prox = prox_composite(geo, x_t, g, eta, reg, set);
    bool ok = true;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double a = boxed ? lo[i] : -kSearch;
      const double b = boxed ? hi[i] : kSearch;
      const double ref = golden_section_minimize(
          [&](double y) {
            return prox_coordinate_objective(geo, x_t[i], g[i], eta, reg, y);
          },
          a, b);
      const double err = std::abs(ref - prox[i]);
      report.max_abs_error = std::max(report.max_abs_error, err);
      if (!(err <= tolerance)) ok = false;
    }
    if (!ok) ++report.failures;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace zomirror
