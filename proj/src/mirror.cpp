#include "zomirror/mirror.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace zomirror {
namespace {

constexpr double kMaxShiftedMagnitude = 1e300;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_length(const MirrorGeometry& geo, const Vector& v, const char* what) {
  if (v.size() != geo.dimension()) {
    throw std::invalid_argument(std::string(what) + " has length " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(geo.dimension()));
  }
}

}  // namespace

MirrorGeometry::MirrorGeometry(Eigen::Index dimension)
    : dimension_(dimension),
      d_(static_cast<double>(dimension)),
      inv_d_(dimension > 0 ? 1.0 / static_cast<double>(dimension) : 0.0),
      max_dual_(std::log(kMaxShiftedMagnitude)) {
  if (dimension < 1) throw std::invalid_argument("mirror geometry needs d >= 1");
}

double MirrorGeometry::coordinate_value(double x) const {
  const double a = std::abs(x);
  return (a + inv_d_) * std::log1p(d_ * a) - a;
}

double MirrorGeometry::coordinate_gradient(double x) const {
  return std::log1p(d_ * std::abs(x)) * sgn(x);
}

double MirrorGeometry::coordinate_inverse(double theta) const {
  const double a = std::abs(theta);
  if (!(a <= max_dual_)) {
    throw NumericError("inverse mirror map overflow: |theta| = " + std::to_string(a));
  }
  return std::expm1(a) * inv_d_ * sgn(theta);
}

double dgf_value(const MirrorGeometry& geo, const Vector& x) {
  require_length(geo, x, "x");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += geo.coordinate_value(x[i]);
  return sum;
}

Vector mirror_map(const MirrorGeometry& geo, const Vector& x) {
  require_length(geo, x, "x");
  return x.unaryExpr([&](double v) { return geo.coordinate_gradient(v); });
}

Vector inverse_mirror_map(const MirrorGeometry& geo, const Vector& theta) {
  require_length(geo, theta, "theta");
  return theta.unaryExpr([&](double v) { return geo.coordinate_inverse(v); });
}

namespace {

// h(r) = (1 + r) ln(1 + r) - r for r >= -1, with a series near 0 where the
// direct form cancels.
double entropy_gap(double r) {
  if (std::abs(r) < 0.1) {
    double sum = 0.0, power = r * r;
    for (int k = 2; k < 20; ++k) {
      sum += (k % 2 ? -power : power) / (k * (k - 1.0));
      power *= r;
    }
    return sum;
  }
  if (r <= -1.0) return 1.0;
  return (1.0 + r) * std::log1p(r) - r;
}

}  // namespace

double bregman(const MirrorGeometry& geo, const Vector& y, const Vector& x) {
  require_length(geo, y, "y");
  require_length(geo, x, "x");
  const double c = 1.0 / double(geo.dimension());
  // Scalar divergence from a to b along one half-line, a, b >= 0.
  auto half_line = [c](double a, double b) { return (a + c) * entropy_gap((b - a) / (a + c)); };
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double a = std::abs(x[i]), b = std::abs(y[i]);
    if (x[i] * y[i] >= 0.0) {
      sum += half_line(a, b);
    } else {
      // Split at the origin, where the mirror map vanishes.
      sum += half_line(a, 0.0) + half_line(0.0, b) + geo.coordinate_gradient(a) * b;
    }
  }
  return sum;
}

double lambert_w0(double z) {
  constexpr double inv_e = 1.0 / std::numbers::e;
  if (std::isnan(z)) throw std::domain_error("lambert_w0 of NaN");
  if (z < -inv_e) {
    // Accept -1/e computed with round-off.
    if (z < -inv_e * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) {
      throw std::domain_error("lambert_w0 requires z >= -1/e");
    }
    return -1.0;
  }
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;

  double w;
  if (z >= 0.0) {
    w = std::log1p(z);
  } else {
    // Branch-point series in p = sqrt(2(ez + 1)).
    const double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * z + 1.0)));
    if (p < 1e-8) return -1.0 + p;
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }

  for (int iter = 0; iter < 50; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    if (f == 0.0) break;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double next = w - f / denom;
    const double step = std::abs(next - w);
    w = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

double lambert_w0_exp(double s) {
  if (s < 700.0) return lambert_w0(std::exp(s));
  // Solve w + ln w = s directly; exp(s) is not representable here.
  double w = s - std::log(s);
  for (int iter = 0; iter < 50; ++iter) {
    const double next = w - (w + std::log(w) - s) / (1.0 + 1.0 / w);
    const double step = std::abs(next - w);
    w = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * w) break;
  }
  return w;
}

double prox_coordinate(const MirrorGeometry& geo, double x_t, double g, double eta,
                       const ElasticNet& reg) {
  if (!(eta > 0.0)) throw std::invalid_argument("prox requires eta > 0");
  const double z = geo.coordinate_gradient(x_t) - g / eta;
  const double mag_z = std::abs(z);
  if (!(mag_z <= geo.max_dual_magnitude())) {
    throw NumericError("prox step overflow: dual magnitude " + std::to_string(mag_z));
  }
  // ln(d|y| + 1) = |z| for the unregularised mirror step y.
  const double threshold = reg.gamma1 / eta;
  if (mag_z <= threshold) return 0.0;

  double magnitude;
  if (reg.gamma2 == 0.0) {
    magnitude = std::expm1(mag_z - threshold) * geo.inv_d();
  } else {
    const double a = geo.inv_d();
    const double b = reg.gamma2 / eta;
    const double c = threshold - mag_z;
    // W0(a b exp(a b - c)) in log form.
    const double w = lambert_w0_exp(std::log(a) + std::log(b) + a * b - c);
    magnitude = w / b - a;
  }
  if (!std::isfinite(magnitude)) {
    throw NumericError("prox step produced a non-finite magnitude");
  }
  return std::max(magnitude, 0.0) * sgn(z);
}

Vector prox_composite(const MirrorGeometry& geo, const Vector& x_t, const Vector& g,
                      double eta, const ElasticNet& reg, const FeasibleSet& set) {
  require_length(geo, x_t, "x_t");
  require_length(geo, g, "g");
  if (!(eta > 0.0)) throw std::invalid_argument("prox requires eta > 0");
  Vector out(x_t.size());
  for (Eigen::Index i = 0; i < x_t.size(); ++i) {
    out[i] = set.clamp(i, prox_coordinate(geo, x_t[i], g[i], eta, reg));
  }
  return out;
}

double prox_coordinate_objective(const MirrorGeometry& geo, double x_t, double g,
                                 double eta, const ElasticNet& reg, double y) {
  return g * y + reg.gamma1 * std::abs(y) + 0.5 * reg.gamma2 * y * y +
         eta * (geo.coordinate_value(y) - geo.coordinate_gradient(x_t) * y);
}

}  // namespace zomirror
