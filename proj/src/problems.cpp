#include "zomirror/problems.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "zomirror/rng.hpp"

namespace zomirror {

using nlohmann::json;

std::string_view loss_kind_tag(LossKind kind) {
  return kind == LossKind::LeastSquares ? "least_squares" : "robust_nonconvex";
}

LossKind parse_loss_kind(std::string_view tag) {
  if (tag == "least_squares") return LossKind::LeastSquares;
  if (tag == "robust_nonconvex") return LossKind::RobustNonconvex;
  throw std::invalid_argument("unknown loss kind '" + std::string(tag) + "'");
}

double robust_loss(double t) {
  const double t2 = t * t;
  return t2 / (1.0 + t2);
}

double robust_loss_derivative(double t) {
  const double q = 1.0 + t * t;
  return 2.0 * t / (q * q);
}

namespace {

double residual_loss(LossKind kind, double t) {
  return kind == LossKind::LeastSquares ? 0.5 * t * t : robust_loss(t);
}

double residual_derivative(LossKind kind, double t) {
  return kind == LossKind::LeastSquares ? t : robust_loss_derivative(t);
}

}  // namespace

double SparseRegressionProblem::sample_loss(const Vector& x, SampleId xi) const {
  const auto row = static_cast<Eigen::Index>(xi % static_cast<SampleId>(design.rows()));
  return residual_loss(kind, design.row(row).dot(x) - targets[row]);
}

double SparseRegressionProblem::mean_loss(const Vector& x) const {
  const Vector r = design * x - targets;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) sum += residual_loss(kind, r[i]);
  return sum / static_cast<double>(r.size());
}

Vector SparseRegressionProblem::mean_gradient(const Vector& x) const {
  Vector r = design * x - targets;
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = residual_derivative(kind, r[i]);
  return design.transpose() * r / static_cast<double>(r.size());
}

double SparseRegressionProblem::smoothness() const {
  const Eigen::MatrixXd gram = design.transpose() * design / static_cast<double>(design.rows());
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram,
                                                                   Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  return (kind == LossKind::LeastSquares ? 1.0 : 2.0) * top;
}

SparseRegressionProblem generate_sparse_regression(const SparseRegressionParams& p) {
  if (p.d < 1 || p.n_samples < 1) throw std::invalid_argument("d and n_samples must be >= 1");
  if (p.sparsity < 1 || p.sparsity > p.d) {
    throw std::invalid_argument("sparsity must satisfy 1 <= k <= d");
  }
  if (!(p.noise >= 0.0)) throw std::invalid_argument("noise must be non-negative");
  if (!(p.signal > 0.0)) throw std::invalid_argument("signal must be positive");

  RngStream root(p.seed);
  RngStream design_rng = root.split(1);
  RngStream support_rng = root.split(2);
  RngStream noise_rng = root.split(3);

  SparseRegressionProblem out;
  out.kind = p.kind;
  out.design.resize(p.n_samples, p.d);
  for (Eigen::Index i = 0; i < p.n_samples; ++i) {
    for (Eigen::Index j = 0; j < p.d; ++j) out.design(i, j) = design_rng.next_normal();
    const double norm = out.design.row(i).norm();
    if (norm > 0.0) out.design.row(i) /= norm;
  }

  // Partial Fisher-Yates for the support.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p.d));
  for (Eigen::Index j = 0; j < p.d; ++j) idx[static_cast<std::size_t>(j)] = j;
  out.planted = Vector::Zero(p.d);
  for (Eigen::Index s = 0; s < p.sparsity; ++s) {
    const auto pick = s + static_cast<Eigen::Index>(
                              support_rng.next_below(static_cast<std::uint64_t>(p.d - s)));
    std::swap(idx[static_cast<std::size_t>(s)], idx[static_cast<std::size_t>(pick)]);
    const double magnitude = p.signal * (0.5 + support_rng.next_uniform());
    const double sign = (support_rng.next_u64() & 1U) ? 1.0 : -1.0;
    out.planted[idx[static_cast<std::size_t>(s)]] = sign * magnitude;
  }

  out.targets = out.design * out.planted;
  if (p.noise > 0.0) {
    for (Eigen::Index i = 0; i < p.n_samples; ++i) out.targets[i] += p.noise * noise_rng.next_normal();
  }
  return out;
}

Problem make_sparse_regression(const SparseRegressionParams& p) {
  auto data = std::make_shared<const SparseRegressionProblem>(generate_sparse_regression(p));
  Problem problem;
  problem.name = "sparse_regression";
  problem.dimension = p.d;
  problem.regularizer = ElasticNet(p.gamma1, p.gamma2);
  problem.initial_point = Vector::Constant(p.d, p.init_value);
  problem.oracle = [data](const Vector& x, SampleId xi) { return data->sample_loss(x, xi); };
  problem.exact_gradient = [data](const Vector& x) { return data->mean_gradient(x); };
  problem.expected_loss = [data](const Vector& x) { return data->mean_loss(x); };
  problem.evaluation_samples.resize(static_cast<std::size_t>(p.n_samples));
  for (Eigen::Index i = 0; i < p.n_samples; ++i) {
    problem.evaluation_samples[static_cast<std::size_t>(i)] = static_cast<SampleId>(i);
  }
  if (p.kind == LossKind::RobustNonconvex) problem.value_range = 1.0;
  return problem;
}

double QuadraticProblem::sample_loss(const Vector& x, SampleId xi) const {
  double value = mean_loss(x);
  if (noise > 0.0) {
    RngStream z(xi);
    double dot = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) dot += z.next_normal() * x[i];
    value += noise * dot;
  }
  return value;
}

double QuadraticProblem::mean_loss(const Vector& x) const {
  return 0.5 * curvature.dot((x - centre).cwiseAbs2());
}

Vector QuadraticProblem::mean_gradient(const Vector& x) const {
  return curvature.cwiseProduct(x - centre);
}

QuadraticProblem generate_quadratic(const QuadraticParams& p) {
  if (p.d < 1) throw std::invalid_argument("quadratic needs d >= 1");
  if (!(p.noise >= 0.0)) throw std::invalid_argument("noise must be non-negative");
  RngStream rng(p.seed);
  QuadraticProblem out;
  out.noise = p.noise;
  out.curvature.resize(p.d);
  out.centre.resize(p.d);
  for (Eigen::Index i = 0; i < p.d; ++i) {
    out.curvature[i] = 0.5 + 1.5 * rng.next_uniform();
    out.centre[i] = 2.0 * rng.next_uniform() - 1.0;
  }
  return out;
}

Problem make_quadratic(const QuadraticParams& p) {
  auto data = std::make_shared<const QuadraticProblem>(generate_quadratic(p));
  Problem problem;
  problem.name = "quadratic";
  problem.dimension = p.d;
  problem.regularizer = ElasticNet(p.gamma1, p.gamma2);
  problem.initial_point = Vector::Zero(p.d);
  problem.oracle = [data](const Vector& x, SampleId xi) { return data->sample_loss(x, xi); };
  problem.exact_gradient = [data](const Vector& x) { return data->mean_gradient(x); };
  problem.expected_loss = [data](const Vector& x) { return data->mean_loss(x); };
  problem.evaluation_samples = {0};
  return problem;
}

void TinyClassifier::validate() const {
  if (weights.rows() < 2) throw std::invalid_argument("classifier needs K >= 2 classes");
  if (weights.cols() < 1) throw std::invalid_argument("classifier needs d >= 1");
  if (bias.size() != weights.rows()) throw std::invalid_argument("bias length must equal K");
  if (!weights.allFinite() || !bias.allFinite()) {
    throw std::invalid_argument("classifier parameters must be finite");
  }
}

TinyClassifier TinyClassifier::reference(Eigen::Index d) {
  if (d < 1 || d > 64) throw std::invalid_argument("reference classifier supports 1 <= d <= 64");
  constexpr Eigen::Index kClasses = 3;
  RngStream rng(UINT64_C(0x7141C1A55F1E4003));
  TinyClassifier c;
  c.weights.resize(kClasses, d);
  c.bias.resize(kClasses);
  const double scale = 4.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index k = 0; k < kClasses; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) c.weights(k, j) = scale * rng.next_normal();
    c.bias[k] = 0.1 * rng.next_normal();
  }
  return c;
}

json TinyClassifier::to_json() const {
  json w = json::array();
  for (Eigen::Index k = 0; k < weights.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index j = 0; j < weights.cols(); ++j) row.push_back(weights(k, j));
    w.push_back(std::move(row));
  }
  json b = json::array();
  for (Eigen::Index k = 0; k < bias.size(); ++k) b.push_back(bias[k]);
  return json{{"weights", std::move(w)}, {"bias", std::move(b)}};
}

TinyClassifier TinyClassifier::from_json(const json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "weights" && key != "bias") {
      throw std::invalid_argument("unknown classifier key '" + key + "'");
    }
  }
  const auto& w = j.at("weights");
  const auto& b = j.at("bias");
  TinyClassifier c;
  const auto rows = static_cast<Eigen::Index>(w.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(w.at(0).size()) : 0;
  c.weights.resize(rows, cols);
  for (Eigen::Index k = 0; k < rows; ++k) {
    if (static_cast<Eigen::Index>(w.at(k).size()) != cols) {
      throw std::invalid_argument("classifier weight rows have different lengths");
    }
    for (Eigen::Index i = 0; i < cols; ++i) c.weights(k, i) = w.at(k).at(i).get<double>();
  }
  c.bias.resize(static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index k = 0; k < c.bias.size(); ++k) c.bias[k] = b.at(k).get<double>();
  c.validate();
  return c;
}

std::string_view explanation_mode_tag(ExplanationMode mode) {
  return mode == ExplanationMode::PertinentPositive ? "pp" : "pn";
}

ExplanationMode parse_explanation_mode(std::string_view tag) {
  if (tag == "pp") return ExplanationMode::PertinentPositive;
  if (tag == "pn") return ExplanationMode::PertinentNegative;
  throw std::invalid_argument("unknown explanation mode '" + std::string(tag) + "'");
}

double runner_up_margin(const Vector& logits, Eigen::Index k) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (i != k) best = std::max(best, logits[i]);
  }
  return best - logits[k];
}

ExplanationProblem build_explanation(std::shared_ptr<const TinyClassifier> classifier,
                                     Vector anchor, ExplanationMode mode, double gamma1,
                                     double gamma2) {
  if (!classifier) throw std::invalid_argument("explanation needs a classifier");
  classifier->validate();
  if (anchor.size() != classifier->dimension()) {
    throw std::invalid_argument("anchor dimension does not match the classifier");
  }
  if (!anchor.allFinite()) throw std::invalid_argument("anchor must be finite");

  ExplanationProblem prob;
  const Vector logits = classifier->forward(anchor);
  logits.maxCoeff(&prob.predicted_class);
  if (runner_up_margin(logits, prob.predicted_class) >= 0.0) {
    throw std::invalid_argument("anchor prediction is tied between classes");
  }
  prob.classifier = std::move(classifier);
  prob.mode = mode;
  prob.regularizer = ElasticNet(gamma1, gamma2);

  const Eigen::Index d = anchor.size();
  if (mode == ExplanationMode::PertinentPositive) {
    prob.box = FeasibleSet::box(anchor.cwiseMin(0.0), anchor.cwiseMax(0.0));
    prob.start = anchor;
  } else {
    const Vector hi = (Vector::Ones(d) - anchor).cwiseMax(0.0);
    prob.box = FeasibleSet::box(Vector::Zero(d), hi);
    prob.start = 0.5 * hi;
  }
  prob.anchor = std::move(anchor);
  return prob;
}

double pp_cost(const ExplanationProblem& prob, const Vector& x) {
  return runner_up_margin(prob.classifier->forward(x), prob.predicted_class);
}

double pn_cost(const ExplanationProblem& prob, const Vector& x) {
  return -runner_up_margin(prob.classifier->forward(prob.anchor + x), prob.predicted_class);
}

double softplus(double c) {
  if (c > 30.0) return c;
  if (c < -30.0) return std::exp(c);
  return std::log1p(std::exp(c));
}

double explanation_loss(const ExplanationProblem& prob, const Vector& x, SampleId) {
  const double c = prob.mode == ExplanationMode::PertinentPositive ? pp_cost(prob, x)
                                                                   : pn_cost(prob, x);
  return softplus(c);
}

Problem make_explanation_problem(std::shared_ptr<const TinyClassifier> classifier,
                                 Vector anchor, ExplanationMode mode, double gamma1,
                                 double gamma2) {
  auto prob = std::make_shared<const ExplanationProblem>(
      build_explanation(std::move(classifier), std::move(anchor), mode, gamma1, gamma2));
  Problem problem;
  problem.name = std::string("explanation_") + std::string(explanation_mode_tag(mode));
  problem.dimension = prob->anchor.size();
  problem.regularizer = prob->regularizer;
  problem.feasible_set = prob->box;
  problem.initial_point = prob->start;
  problem.oracle = [prob](const Vector& x, SampleId xi) {
    return explanation_loss(*prob, x, xi);
  };
  problem.evaluation_samples = {0};
  return problem;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

Vector anchor_from_seed(Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed);
  Vector a(d);
  for (Eigen::Index i = 0; i < d; ++i) a[i] = rng.next_uniform();
  return a;
}

}  // namespace

json normalize_problem_descriptor(const json& descriptor) {
  reject_unknown(descriptor, {"kind", "seed", "params"}, "problem");
  const std::string kind = descriptor.at("kind").get<std::string>();
  const auto seed = get_or<std::uint64_t>(descriptor, "seed", 0);
  const json params = descriptor.contains("params") ? descriptor.at("params") : json::object();

  json out{{"kind", kind}, {"seed", seed}};
  if (kind == "sparse_regression") {
    reject_unknown(params, {"d", "n_samples", "sparsity", "signal", "noise", "loss", "gamma1",
                            "gamma2", "init_value"},
                   "sparse_regression params");
    out["params"] = {
        {"d", get_or<std::int64_t>(params, "d", 100)},
        {"n_samples", get_or<std::int64_t>(params, "n_samples", 50)},
        {"sparsity", get_or<std::int64_t>(params, "sparsity", 5)},
        {"signal", get_or<double>(params, "signal", 1.0)},
        {"noise", get_or<double>(params, "noise", 0.0)},
        {"loss", get_or<std::string>(params, "loss", "least_squares")},
        {"gamma1", get_or<double>(params, "gamma1", 0.0)},
        {"gamma2", get_or<double>(params, "gamma2", 0.0)},
        {"init_value", get_or<double>(params, "init_value", 0.0)},
    };
    parse_loss_kind(out["params"]["loss"].get<std::string>());
  } else if (kind == "quadratic") {
    reject_unknown(params, {"d", "noise", "gamma1", "gamma2"}, "quadratic params");
    out["params"] = {
        {"d", get_or<std::int64_t>(params, "d", 10)},
        {"noise", get_or<double>(params, "noise", 0.0)},
        {"gamma1", get_or<double>(params, "gamma1", 0.0)},
        {"gamma2", get_or<double>(params, "gamma2", 0.0)},
    };
  } else if (kind == "explanation") {
    reject_unknown(params, {"d", "mode", "gamma1", "gamma2", "anchor", "classifier"},
                   "explanation params");
    out["params"] = {
        {"d", get_or<std::int64_t>(params, "d", 16)},
        {"mode", get_or<std::string>(params, "mode", "pp")},
        {"gamma1", get_or<double>(params, "gamma1", 0.0625)},
        {"gamma2", get_or<double>(params, "gamma2", 0.0625)},
    };
    if (params.contains("anchor")) out["params"]["anchor"] = params.at("anchor");
    if (params.contains("classifier")) out["params"]["classifier"] = params.at("classifier");
    parse_explanation_mode(out["params"]["mode"].get<std::string>());
  } else {
    throw std::invalid_argument("unknown problem kind '" + kind + "'");
  }
  return out;
}

Problem make_problem(const json& descriptor) {
  const json norm = normalize_problem_descriptor(descriptor);
  const std::string kind = norm.at("kind").get<std::string>();
  const auto seed = norm.at("seed").get<std::uint64_t>();
  const json& p = norm.at("params");

  if (kind == "sparse_regression") {
    SparseRegressionParams sp;
    sp.d = p.at("d").get<Eigen::Index>();
    sp.n_samples = p.at("n_samples").get<Eigen::Index>();
    sp.sparsity = p.at("sparsity").get<Eigen::Index>();
    sp.signal = p.at("signal").get<double>();
    sp.noise = p.at("noise").get<double>();
    sp.kind = parse_loss_kind(p.at("loss").get<std::string>());
    sp.gamma1 = p.at("gamma1").get<double>();
    sp.gamma2 = p.at("gamma2").get<double>();
    sp.init_value = p.at("init_value").get<double>();
    sp.seed = seed;
    return make_sparse_regression(sp);
  }
  if (kind == "quadratic") {
    QuadraticParams qp;
    qp.d = p.at("d").get<Eigen::Index>();
    qp.noise = p.at("noise").get<double>();
    qp.gamma1 = p.at("gamma1").get<double>();
    qp.gamma2 = p.at("gamma2").get<double>();
    qp.seed = seed;
    return make_quadratic(qp);
  }
  // explanation
  const auto d = p.at("d").get<Eigen::Index>();
  auto classifier = std::make_shared<const TinyClassifier>(
      p.contains("classifier") ? TinyClassifier::from_json(p.at("classifier"))
                               : TinyClassifier::reference(d));
  Vector anchor;
  if (p.contains("anchor")) {
    const auto values = p.at("anchor").get<std::vector<double>>();
    anchor = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  } else {
    anchor = anchor_from_seed(d, seed);
  }
  return make_explanation_problem(std::move(classifier), std::move(anchor),
                                  parse_explanation_mode(p.at("mode").get<std::string>()),
                                  p.at("gamma1").get<double>(), p.at("gamma2").get<double>());
}

}  // namespace zomirror
