#pragma once

#include <stdexcept>

#include "zomirror/core.hpp"

namespace zomirror {

/// Symmetric entropy-like distance-generating function
///
///   phi(x) = sum_i (|x_i| + 1/d) ln(d |x_i| + 1) - |x_i|
///
/// with mirror map (grad phi)_i = ln(d|x_i| + 1) sgn(x_i) and inverse
/// (grad phi*)_i = (exp(|theta_i|) - 1) / d * sgn(theta_i). Everything is
/// coordinate-separable; sgn(0) = 0.
class MirrorGeometry {
 public:
  explicit MirrorGeometry(Eigen::Index dimension);

  Eigen::Index dimension() const { return dimension_; }
  double inv_d() const { return inv_d_; }

  /// Scalar pieces of phi for a single coordinate.
  double coordinate_value(double x) const;
  double coordinate_gradient(double x) const;
  double coordinate_inverse(double theta) const;

  /// Largest |theta| accepted by the inverse map; keeps d|y| + 1 below 1e300.
  double max_dual_magnitude() const { return max_dual_; }

 private:
  Eigen::Index dimension_;
  double d_;
  double inv_d_;
  double max_dual_;
};

double dgf_value(const MirrorGeometry& geo, const Vector& x);
Vector mirror_map(const MirrorGeometry& geo, const Vector& x);
/// Throws NumericError when some |theta_i| exceeds max_dual_magnitude().
Vector inverse_mirror_map(const MirrorGeometry& geo, const Vector& theta);
double bregman(const MirrorGeometry& geo, const Vector& y, const Vector& x);

/// Principal branch W0 of the Lambert function. Throws std::domain_error for
/// z < -1/e.
double lambert_w0(double z);

/// W0(exp(s)), evaluated without forming exp(s) when it would overflow.
double lambert_w0_exp(double s);

/// argmin over the feasible set of <g, y> + r(y) + eta * B_phi(y, x_t).
/// Unconstrained minimiser per coordinate via the Lambert-W shrinkage, then
/// clamped onto the box (each coordinate objective is convex).
Vector prox_composite(const MirrorGeometry& geo, const Vector& x_t,
                      const Vector& g, double eta, const ElasticNet& reg,
                      const FeasibleSet& set);

/// Single-coordinate version of prox_composite without the box clamp.
double prox_coordinate(const MirrorGeometry& geo, double x_t, double g,
                       double eta, const ElasticNet& reg);

/// Value of the coordinate prox objective
/// g*y + gamma1|y| + gamma2/2 y^2 + eta*(psi(y) - psi'(x_t) y), up to a
/// constant. Used by checkers and tests.
double prox_coordinate_objective(const MirrorGeometry& geo, double x_t,
                                 double g, double eta, const ElasticNet& reg,
                                 double y);

}  // namespace zomirror
