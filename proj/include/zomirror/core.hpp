#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace zomirror {

using Vector = Eigen::VectorXd;

/// Identifies one stochastic sample ξ. Problems map it to a data row or an
/// RNG substream, so every oracle call is replayable.
using SampleId = std::uint64_t;

/// Raised when an oracle or a numeric kernel produces a non-finite value or
/// would overflow.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
  NumericError(const std::string& what, SampleId sample)
      : std::runtime_error(what + " (sample " + std::to_string(sample) + ")"),
        sample_(sample) {}

  std::optional<SampleId> sample() const { return sample_; }

 private:
  std::optional<SampleId> sample_;
};

/// r(x) = gamma1 * |x|_1 + gamma2 / 2 * |x|_2^2
struct ElasticNet {
  double gamma1 = 0.0;
  double gamma2 = 0.0;

  ElasticNet() = default;
  ElasticNet(double g1, double g2);

  bool is_zero() const { return gamma1 == 0.0 && gamma2 == 0.0; }
};

double elastic_net_value(const ElasticNet& reg, const Vector& x);

struct Unconstrained {};

struct Box {
  Vector lo;
  Vector hi;
};

class FeasibleSet {
 public:
  FeasibleSet() = default;
  static FeasibleSet unconstrained() { return FeasibleSet{}; }
  /// Throws std::invalid_argument unless lo and hi have equal length and
  /// lo_i <= hi_i everywhere.
  static FeasibleSet box(Vector lo, Vector hi);

  bool is_box() const { return std::holds_alternative<Box>(variant_); }
  const Box& as_box() const { return std::get<Box>(variant_); }

  bool contains(const Vector& x, double tol = 0.0) const;
  double clamp(Eigen::Index i, double value) const;
  Vector clamp(const Vector& x) const;

  /// Upper bound on the l1 norm of any point in the set, max(|lo|_1, |hi|_1)
  /// summed coordinate-wise. Empty for unconstrained sets.
  std::optional<double> l1_radius() const;

 private:
  std::variant<Unconstrained, Box> variant_;
};

using Oracle = std::function<double(const Vector&, SampleId)>;
using GradientFn = std::function<Vector(const Vector&)>;
using LossFn = std::function<double(const Vector&)>;

/// A composite objective f = l + r over a feasible set. The oracle must be
/// deterministic in (x, sample) and defined on all of R^d, since probes
/// x + nu*u are never projected. Instances are immutable after construction
/// and safe to share across threads.
struct Problem {
  std::string name;
  Eigen::Index dimension = 0;
  Oracle oracle;
  ElasticNet regularizer;
  FeasibleSet feasible_set;
  Vector initial_point;

  /// Samples averaged when reporting the objective of a black-box problem.
  std::vector<SampleId> evaluation_samples;

  /// Evaluation-only hooks, present for synthetic problems.
  std::optional<GradientFn> exact_gradient;
  std::optional<LossFn> expected_loss;

  /// Documents that f(x) lies in [0, R]; never consumed by the solvers.
  std::optional<double> value_range;

  /// Oracle call with the finiteness check applied.
  double loss(const Vector& x, SampleId sample) const;

  /// Throws std::invalid_argument when fields are inconsistent.
  void validate() const;
};

/// Mean of oracle(x, s) over samples plus r(x).
double composite_value(const Problem& problem, const Vector& x,
                       std::span<const SampleId> samples);

/// Objective used for reporting: expected_loss when available, otherwise the
/// average over evaluation_samples.
double reported_objective(const Problem& problem, const Vector& x);

class MirrorGeometry;

struct GradientMapResult {
  Vector mapped_point;
  Vector map_vector;
  double sq_l1_norm = 0.0;
};

/// Generalised gradient map G(x, g, eta) = eta * (x - P(x, g, eta)) where P is
/// the composite mirror prox step.
GradientMapResult gradient_map(const Vector& x, const Vector& g, double eta,
                               const MirrorGeometry& geometry,
                               const ElasticNet& reg, const FeasibleSet& set);

}  // namespace zomirror
