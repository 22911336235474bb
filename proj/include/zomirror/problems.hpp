#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "zomirror/core.hpp"

namespace zomirror {

enum class LossKind { LeastSquares, RobustNonconvex };

std::string_view loss_kind_tag(LossKind kind);
LossKind parse_loss_kind(std::string_view tag);

/// rho(t) = t^2 / (1 + t^2): bounded, smooth, nonconvex.
double robust_loss(double t);
double robust_loss_derivative(double t);

struct SparseRegressionParams {
  Eigen::Index d = 100;
  Eigen::Index n_samples = 50;
  Eigen::Index sparsity = 5;
  /// Planted entries have magnitude signal * U[0.5, 1.5].
  double signal = 1.0;
  double noise = 0.0;
  LossKind kind = LossKind::LeastSquares;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  /// Every coordinate of the starting point.
  double init_value = 0.0;
  std::uint64_t seed = 0;
};

/// Unit-norm Gaussian design rows, a planted k-sparse solution with entries of
/// magnitude signal * [0.5, 1.5] and random sign, targets <a, x*> + noise * N(0, 1).
/// Sample id xi selects row xi mod n.
struct SparseRegressionProblem {
  Eigen::MatrixXd design;  // n x d
  Vector targets;
  Vector planted;
  LossKind kind = LossKind::LeastSquares;

  double sample_loss(const Vector& x, SampleId xi) const;
  double mean_loss(const Vector& x) const;
  Vector mean_gradient(const Vector& x) const;
  /// Lipschitz constant of the mean gradient in l2: |A|_2^2 / n scaled by
  /// max |loss''| (1 for least squares, 2 for the robust loss).
  double smoothness() const;
};

SparseRegressionProblem generate_sparse_regression(const SparseRegressionParams& params);
Problem make_sparse_regression(const SparseRegressionParams& params);

struct QuadraticParams {
  Eigen::Index d = 10;
  /// Scale of the per-sample linear perturbation sigma * <z_xi, x>, z_xi ~ N(0, I).
  double noise = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::uint64_t seed = 0;
};

/// l(x; xi) = 1/2 sum_i h_i (x_i - c_i)^2 + sigma <z_xi, x> with curvatures
/// h_i in [0.5, 2], centres c_i in [-1, 1], start at 0. The perturbation has
/// zero mean, so the expected loss is the plain quadratic.
struct QuadraticProblem {
  Vector curvature;
  Vector centre;
  double noise = 0.0;

  double sample_loss(const Vector& x, SampleId xi) const;
  double mean_loss(const Vector& x) const;
  Vector mean_gradient(const Vector& x) const;
};

QuadraticProblem generate_quadratic(const QuadraticParams& params);
Problem make_quadratic(const QuadraticParams& params);

/// Linear softmax-free classifier: logits = W x + b.
struct TinyClassifier {
  Eigen::MatrixXd weights;  // K x d
  Vector bias;              // K

  /// Throws std::invalid_argument when K < 2 or shapes disagree.
  void validate() const;
  Eigen::Index classes() const { return weights.rows(); }
  Eigen::Index dimension() const { return weights.cols(); }
  Vector forward(const Vector& x) const { return weights * x + bias; }

  /// Fixed 3-class model for dimension d in [1, 64], generated from a pinned
  /// seed so that every build sees the same weights.
  static TinyClassifier reference(Eigen::Index d);

  nlohmann::json to_json() const;
  static TinyClassifier from_json(const nlohmann::json& j);
};

enum class ExplanationMode { PertinentPositive, PertinentNegative };

std::string_view explanation_mode_tag(ExplanationMode mode);
ExplanationMode parse_explanation_mode(std::string_view tag);

struct ExplanationProblem {
  std::shared_ptr<const TinyClassifier> classifier;
  Vector anchor;
  ExplanationMode mode = ExplanationMode::PertinentPositive;
  ElasticNet regularizer{0.0625, 0.0625};
  Eigen::Index predicted_class = 0;
  FeasibleSet box;
  Vector start;
};

/// Builds the PP/PN problem: k0 = argmax f(x0), PP box
/// [min(0, x0_i), max(0, x0_i)] starting at x0, PN box
/// {x_i >= 0, x_i + x0_i <= 1} starting at its centre. Throws
/// std::invalid_argument when the top logit at x0 is tied.
ExplanationProblem build_explanation(std::shared_ptr<const TinyClassifier> classifier,
                                     Vector anchor, ExplanationMode mode,
                                     double gamma1 = 0.0625, double gamma2 = 0.0625);

/// max_{i != k0} f(x)_i - f(x)_k0
double pp_cost(const ExplanationProblem& prob, const Vector& x);
/// f(x0 + x)_k0 - max_{i != k0} f(x0 + x)_i
double pn_cost(const ExplanationProblem& prob, const Vector& x);
/// Margin-style cost max_{i != k} logits_i - logits_k.
double runner_up_margin(const Vector& logits, Eigen::Index k);

/// ln(1 + e^c), stable for large |c|.
double softplus(double c);

/// c + ln(1 + exp(-c)) for the mode's cost c. The sample id is ignored.
double explanation_loss(const ExplanationProblem& prob, const Vector& x, SampleId xi);

Problem make_explanation_problem(std::shared_ptr<const TinyClassifier> classifier,
                                 Vector anchor, ExplanationMode mode,
                                 double gamma1 = 0.0625, double gamma2 = 0.0625);

/// Problem from a JSON descriptor {"kind": ..., "seed": ..., "params": {...}}.
/// Unknown keys are rejected.
Problem make_problem(const nlohmann::json& descriptor);

/// Fills defaults into a descriptor, validating it.
nlohmann::json normalize_problem_descriptor(const nlohmann::json& descriptor);

}  // namespace zomirror
