#pragma once

#include <cstdint>
#include <utility>

#include "zomirror/core.hpp"
#include "zomirror/rng.hpp"

namespace zomirror {

/// Two-point estimator settings. The scaling delta is fixed to 1 because
/// Rademacher directions satisfy E[u u^T] = I.
struct EstimatorConfig {
  double nu = 1e-3;
  int batch = 1;
  static constexpr double delta = 1.0;

  void validate() const;
};

struct GradientEstimate {
  Vector vector;
  std::uint64_t oracle_calls = 0;
  double nu_used = 0.0;
};

/// Vector of independent fair signs in {-1, +1} drawn from the stream.
Vector rademacher_vector(RngStream& stream, Eigen::Index d);

/// (l(x + nu u; xi) - l(x; xi)) / nu * u. Two oracle calls.
Vector two_point_estimate(const Problem& problem, const Vector& x, const Vector& u,
                          double nu, SampleId xi);

/// Mean of cfg.batch two-point estimates. Element j draws its sample id and
/// direction from stream.split(j); results are summed in ascending j.
GradientEstimate minibatch_gradient(const Problem& problem, const Vector& x,
                                    const EstimatorConfig& cfg, const RngStream& stream);

/// Estimates at x_t and x_prev that share every (u_j, xi_j) pair, as required
/// by the recursive momentum. Each estimate reports its own 2m oracle calls.
std::pair<GradientEstimate, GradientEstimate> paired_storm_estimates(
    const Problem& problem, const Vector& x_t, const Vector& x_prev,
    const EstimatorConfig& cfg, const RngStream& stream);

enum class SmoothingVariant { Minibatch, Storm };

/// 1 / (d sqrt(T)) for mini-batch methods, d^-1 T^(-2/3) for the momentum method.
double default_smoothing(std::int64_t d, std::int64_t T, SmoothingVariant variant);

}  // namespace zomirror
