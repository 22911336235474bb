#include "zomirror/core.hpp"

#include <cmath>

#include "zomirror/mirror.hpp"

namespace zomirror {

ElasticNet::ElasticNet(double g1, double g2) : gamma1(g1), gamma2(g2) {
  if (!(g1 >= 0.0) || !(g2 >= 0.0)) {
    throw std::invalid_argument("elastic net weights must be non-negative");
  }
}

double elastic_net_value(const ElasticNet& reg, const Vector& x) {
  if (x.size() == 0) return 0.0;
  return reg.gamma1 * x.lpNorm<1>() + 0.5 * reg.gamma2 * x.squaredNorm();
}

FeasibleSet FeasibleSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) {
    throw std::invalid_argument("box bounds have different lengths");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      throw std::invalid_argument("box requires lo <= hi at coordinate " +
                                  std::to_string(i));
    }
  }
  FeasibleSet set;
  set.variant_ = Box{std::move(lo), std::move(hi)};
  return set;
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (!is_box()) return x.allFinite();
  const Box& b = as_box();
  if (x.size() != b.lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= b.lo[i] - tol && x[i] <= b.hi[i] + tol)) return false;
  }
  return true;
}

double FeasibleSet::clamp(Eigen::Index i, double value) const {
  if (!is_box()) return value;
  const Box& b = as_box();
  return std::min(std::max(value, b.lo[i]), b.hi[i]);
}

Vector FeasibleSet::clamp(const Vector& x) const {
  if (!is_box()) return x;
  const Box& b = as_box();
  return x.cwiseMax(b.lo).cwiseMin(b.hi);
}

std::optional<double> FeasibleSet::l1_radius() const {
  if (!is_box()) return std::nullopt;
  const Box& b = as_box();
  return b.lo.cwiseAbs().cwiseMax(b.hi.cwiseAbs()).sum();
}

double Problem::loss(const Vector& x, SampleId sample) const {
  const double value = oracle(x, sample);
  if (!std::isfinite(value)) {
    throw NumericError("oracle returned a non-finite value", sample);
  }
  return value;
}

void Problem::validate() const {
  if (dimension <= 0) throw std::invalid_argument("problem dimension must be positive");
  if (!oracle) throw std::invalid_argument("problem has no oracle");
  if (initial_point.size() != dimension) {
    throw std::invalid_argument("initial point has wrong dimension");
  }
  if (feasible_set.is_box() && feasible_set.as_box().lo.size() != dimension) {
    throw std::invalid_argument("feasible box has wrong dimension");
  }
  if (!feasible_set.contains(initial_point)) {
    throw std::invalid_argument("initial point is not feasible");
  }
  if (!expected_loss && evaluation_samples.empty()) {
    throw std::invalid_argument("black-box problem needs evaluation samples");
  }
}

double composite_value(const Problem& problem, const Vector& x,
                       std::span<const SampleId> samples) {
  if (samples.empty()) throw std::invalid_argument("composite_value needs samples");
  if (!x.allFinite()) throw NumericError("composite_value at a non-finite point");
  double sum = 0.0;
  for (SampleId s : samples) sum += problem.loss(x, s);
  return sum / static_cast<double>(samples.size()) +
         elastic_net_value(problem.regularizer, x);
}

double reported_objective(const Problem& problem, const Vector& x) {
  if (problem.expected_loss) {
    return (*problem.expected_loss)(x) + elastic_net_value(problem.regularizer, x);
  }
  return composite_value(problem, x, problem.evaluation_samples);
}

GradientMapResult gradient_map(const Vector& x, const Vector& g, double eta,
                               const MirrorGeometry& geometry,
                               const ElasticNet& reg, const FeasibleSet& set) {
  if (!(eta > 0.0)) throw std::invalid_argument("gradient_map requires eta > 0");
  GradientMapResult out;
  out.mapped_point = prox_composite(geometry, x, g, eta, reg, set);
  out.map_vector = eta * (x - out.mapped_point);
  const double l1 = out.map_vector.lpNorm<1>();
  out.sq_l1_norm = l1 * l1;
  return out;
}

}  // namespace zomirror
