#pragma once

// Reference implementations used as test oracles. Deliberately written
// without calling into the library's own numerics.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "zomirror/core.hpp"

namespace testing_support {

using zomirror::Vector;

// Golden-section search, kept separate from zomirror::golden_section_minimize.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         double tol = 1e-11) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 400 && b - a > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // The minimiser may sit on an endpoint of the bracket.
  double best = mid, fbest = f(mid);
  if (f(lo) < fbest) best = lo, fbest = f(lo);
  if (f(hi) < fbest) best = hi;
  return best;
}

// Calls fn(u) for every u in {-1, +1}^d.
inline void for_each_sign_vector(int d, const std::function<void(const Vector&)>& fn) {
  Vector u(d);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    for (int i = 0; i < d; ++i) u[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    fn(u);
  }
}

inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x,
                                 double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index d, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = U(rng);
  return v;
}

// l(x; xi) = <a, x>, deterministic.
inline zomirror::Problem linear_problem(const Vector& a) {
  zomirror::Problem p;
  p.name = "linear";
  p.dimension = a.size();
  p.oracle = [a](const Vector& x, zomirror::SampleId) { return a.dot(x); };
  p.initial_point = Vector::Zero(a.size());
  p.evaluation_samples = {0};
  p.exact_gradient = [a](const Vector&) { return a; };
  p.expected_loss = [a](const Vector& x) { return a.dot(x); };
  return p;
}

// l(x) = 1/2 x^T H x + b^T x, deterministic.
inline zomirror::Problem quadratic_problem(const Eigen::MatrixXd& H, const Vector& b,
                                           const Vector& x0) {
  zomirror::Problem p;
  p.name = "quadratic";
  p.dimension = b.size();
  p.oracle = [H, b](const Vector& x, zomirror::SampleId) { return 0.5 * x.dot(H * x) + b.dot(x); };
  p.initial_point = x0;
  p.evaluation_samples = {0};
  p.exact_gradient = [H, b](const Vector& x) -> Vector { return H * x + b; };
  p.expected_loss = [H, b](const Vector& x) { return 0.5 * x.dot(H * x) + b.dot(x); };
  return p;
}

}  // namespace testing_support
