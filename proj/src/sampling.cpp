#include "zomirror/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zomirror {

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below requires n > 0");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double RngStream::next_normal() {
  double u1 = next_uniform();
  while (u1 <= 0.0) u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void EstimatorConfig::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("smoothing parameter nu must be positive");
  }
  if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
}

Vector rademacher_vector(RngStream& stream, Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("rademacher_vector requires d >= 1");
  Vector u(d);
  std::uint64_t bits = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i % 64 == 0) bits = stream.next_u64();
    u[i] = (bits & 1U) ? 1.0 : -1.0;
    bits >>= 1;
  }
  return u;
}

Vector two_point_estimate(const Problem& problem, const Vector& x, const Vector& u,
                          double nu, SampleId xi) {
  if (!(nu > 0.0)) throw std::invalid_argument("two_point_estimate requires nu > 0");
  const double base = problem.loss(x, xi);
  const double probe = problem.loss(x + nu * u, xi);
  return ((probe - base) / nu) * u;
}

namespace {

struct Draw {
  SampleId xi;
  Vector u;
};

Draw draw_element(const RngStream& stream, std::uint64_t j, Eigen::Index d) {
  RngStream element = stream.split(j);
  Draw out;
  out.xi = element.next_u64();
  out.u = rademacher_vector(element, d);
  return out;
}

}  // namespace

GradientEstimate minibatch_gradient(const Problem& problem, const Vector& x,
                                    const EstimatorConfig& cfg, const RngStream& stream) {
  cfg.validate();
  GradientEstimate out;
  out.vector = Vector::Zero(x.size());
  for (int j = 0; j < cfg.batch; ++j) {
    const Draw draw = draw_element(stream, static_cast<std::uint64_t>(j), x.size());
    out.vector += two_point_estimate(problem, x, draw.u, cfg.nu, draw.xi);
  }
  out.vector /= static_cast<double>(cfg.batch);
  out.oracle_calls = 2 * static_cast<std::uint64_t>(cfg.batch);
  out.nu_used = cfg.nu;
  return out;
}

std::pair<GradientEstimate, GradientEstimate> paired_storm_estimates(
    const Problem& problem, const Vector& x_t, const Vector& x_prev,
    const EstimatorConfig& cfg, const RngStream& stream) {
  cfg.validate();
  if (x_t.size() != x_prev.size()) {
    throw std::invalid_argument("paired estimates need equal-length points");
  }
  GradientEstimate current, previous;
  current.vector = Vector::Zero(x_t.size());
  previous.vector = Vector::Zero(x_t.size());
  for (int j = 0; j < cfg.batch; ++j) {
    const Draw draw = draw_element(stream, static_cast<std::uint64_t>(j), x_t.size());
    current.vector += two_point_estimate(problem, x_t, draw.u, cfg.nu, draw.xi);
    previous.vector += two_point_estimate(problem, x_prev, draw.u, cfg.nu, draw.xi);
  }
  const double m = static_cast<double>(cfg.batch);
  current.vector /= m;
  previous.vector /= m;
  current.oracle_calls = previous.oracle_calls = 2 * static_cast<std::uint64_t>(cfg.batch);
  current.nu_used = previous.nu_used = cfg.nu;
  return {std::move(current), std::move(previous)};
}

double default_smoothing(std::int64_t d, std::int64_t T, SmoothingVariant variant) {
  if (d < 1 || T < 1) throw std::invalid_argument("default_smoothing needs d, T >= 1");
  const double dd = static_cast<double>(d);
  const double tt = static_cast<double>(T);
  switch (variant) {
    case SmoothingVariant::Minibatch:
      return 1.0 / (dd * std::sqrt(tt));
    case SmoothingVariant::Storm:
      return std::pow(tt, -2.0 / 3.0) / dd;
  }
  throw std::invalid_argument("unknown smoothing variant");
}

}  // namespace zomirror
