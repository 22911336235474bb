#include "zomirror/solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace zomirror {

std::string_view algorithm_tag(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::AdaExpGrad: return "zo_ada_expgrad";
    case Algorithm::AdaExpGradPlus: return "zo_ada_expgrad_plus";
    case Algorithm::ExpStorm: return "zo_expstorm";
    case Algorithm::Psgd: return "zo_psgd";
  }
  return "unknown";
}

Algorithm parse_algorithm_tag(std::string_view tag) {
  for (Algorithm a : {Algorithm::AdaExpGrad, Algorithm::AdaExpGradPlus,
                      Algorithm::ExpStorm, Algorithm::Psgd}) {
    if (algorithm_tag(a) == tag) return a;
  }
  throw std::invalid_argument("unknown algorithm tag '" + std::string(tag) + "'");
}

std::string_view stepsize_tag(StepsizeVariant variant) {
  switch (variant) {
    case StepsizeVariant::Constant: return "constant";
    case StepsizeVariant::AdaptiveMd: return "adaptive_md";
    case StepsizeVariant::AdaptiveFw: return "adaptive_fw";
    case StepsizeVariant::Storm: return "storm";
  }
  return "unknown";
}

StepsizeVariant parse_stepsize_tag(std::string_view tag) {
  for (StepsizeVariant v : {StepsizeVariant::Constant, StepsizeVariant::AdaptiveMd,
                            StepsizeVariant::AdaptiveFw, StepsizeVariant::Storm}) {
    if (stepsize_tag(v) == tag) return v;
  }
  throw std::invalid_argument("unknown stepsize variant '" + std::string(tag) + "'");
}

double adaptive_lambda(const Vector& a, const Vector& b) {
  return 1.0 / (std::max(a.lpNorm<1>(), b.lpNorm<1>()) + 1.0);
}

Vector scmd_step(const MirrorGeometry& geo, const Vector& x_t, const Vector& d_t,
                 double eta_t, const ElasticNet& reg, const FeasibleSet& set) {
  return prox_composite(geo, x_t, d_t, eta_t, reg, set);
}

StepsizeState adaptive_stepsize_md_update(StepsizeState state, const Vector& x_t,
                                          const Vector& x_next) {
  if (state.variant == StepsizeVariant::Constant) return state;
  const double lambda = adaptive_lambda(x_t, x_next);
  const double move = lambda * state.alpha * (x_next - x_t).lpNorm<1>();
  state.accum += move * move;
  state.alpha = std::sqrt(state.accum + 1.0);
  state.lambda_cap = std::max(state.lambda_cap, lambda);
  return state;
}

FwStepResult fw_combined_step(const MirrorGeometry& geo, const StepsizeState& state,
                              const Vector& x_t, const Vector& d_t,
                              const ElasticNet& reg, const FeasibleSet& set,
                              double next_beta) {
  FwStepResult out;
  out.v = prox_composite(geo, x_t, d_t, state.eta(), reg, set);
  out.lambda = adaptive_lambda(x_t, out.v);
  out.state = state;
  const double move = out.lambda * state.alpha * (out.v - x_t).lpNorm<1>();
  out.state.accum += move * move;
  out.state.lambda_cap = std::max(out.state.lambda_cap, out.lambda);
  if (state.variant == StepsizeVariant::Storm) {
    out.state.alpha = std::sqrt(next_beta * (1.0 + out.state.accum));
  } else {
    out.state.alpha = std::max(std::sqrt(out.state.accum), 1.0);
  }
  // Both schedules are nondecreasing mathematically; guard the ratio against
  // round-off so the combination stays convex.
  out.state.alpha = std::max(out.state.alpha, state.alpha);
  const double ratio = state.alpha / out.state.alpha;
  out.x_next = set.clamp(((1.0 - ratio) * x_t + ratio * out.v).eval());
  return out;
}

StormSchedule storm_schedule(std::int64_t t, std::int64_t m) {
  if (t < 1 || m < 1) throw std::invalid_argument("storm_schedule needs t, m >= 1");
  StormSchedule s;
  s.tau = std::pow(1.0 + static_cast<double>(t) / static_cast<double>(m), 2.0 / 3.0);
  s.gamma = 2.0 / (1.0 + s.tau);
  s.beta = std::max(1.0, (s.tau - 1.0) / std::sqrt(s.tau));
  return s;
}

Vector storm_momentum_update(const Vector& d_prev, const Vector& g_t, const Vector& m_t,
                             double gamma) {
  return g_t + (1.0 - gamma) * (d_prev - m_t);
}

Vector euclidean_prox(const Vector& x_t, const Vector& d_t, double eta,
                      const ElasticNet& reg, const FeasibleSet& set) {
  if (!(eta > 0.0)) throw std::invalid_argument("euclidean_prox requires eta > 0");
  Vector out(x_t.size());
  const double threshold = reg.gamma1 / eta;
  const double shrink = eta / (eta + reg.gamma2);
  for (Eigen::Index i = 0; i < x_t.size(); ++i) {
    const double w = x_t[i] - d_t[i] / eta;
    const double soft = std::copysign(std::max(std::abs(w) - threshold, 0.0), w);
    out[i] = set.clamp(i, soft * shrink);
  }
  return out;
}

void RunConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("T must be >= 1");
  if (batch < 1) throw std::invalid_argument("m must be >= 1");
  if (nu && !(*nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(eta_base > 0.0)) throw std::invalid_argument("eta must be positive");
  if (stationarity_eval_period < 1) {
    throw std::invalid_argument("stationarity_eval_period must be >= 1");
  }
  if (algorithm == Algorithm::AdaExpGrad && stepsize != StepsizeVariant::Constant &&
      stepsize != StepsizeVariant::AdaptiveMd) {
    throw std::invalid_argument("zo_ada_expgrad supports constant or adaptive_md stepsizes");
  }
}

double RunConfig::resolved_nu(Eigen::Index d) const {
  if (nu) return *nu;
  const auto variant = algorithm == Algorithm::ExpStorm ? SmoothingVariant::Storm
                                                        : SmoothingVariant::Minibatch;
  return default_smoothing(d, iterations, variant);
}

StepsizeVariant RunConfig::effective_stepsize() const {
  switch (algorithm) {
    case Algorithm::AdaExpGrad: return stepsize;
    case Algorithm::AdaExpGradPlus: return StepsizeVariant::AdaptiveFw;
    case Algorithm::ExpStorm: return StepsizeVariant::Storm;
    case Algorithm::Psgd: return StepsizeVariant::Constant;
  }
  return stepsize;
}

int sample_output_index(int T, RngStream stream) {
  if (T < 1) throw std::invalid_argument("sample_output_index needs T >= 1");
  return 1 + static_cast<int>(stream.next_below(static_cast<std::uint64_t>(T)));
}

std::uint64_t expected_oracle_calls(Algorithm algorithm, int T, int m) {
  const auto tt = static_cast<std::uint64_t>(T);
  const auto mm = static_cast<std::uint64_t>(m);
  if (algorithm == Algorithm::ExpStorm) return 2 * mm + 4 * mm * (tt - 1);
  return 2 * mm * tt;
}

namespace {

// Shared bookkeeping: trace rows, the sampled output iterate, timing.
class Recorder {
 public:
  Recorder(const Problem& problem, const RunConfig& cfg, const MirrorGeometry& geo)
      : problem_(problem), cfg_(cfg), geo_(geo), run_stream_(cfg.seed),
        start_(std::chrono::steady_clock::now()) {
    problem.validate();
    cfg.validate();
    trace_.nu = cfg.resolved_nu(problem.dimension);
    trace_.sampled_index = sample_output_index(cfg.iterations, run_stream_.split(0));
    trace_.records.reserve(static_cast<std::size_t>(cfg.iterations));
  }

  const RngStream& run_stream() const { return run_stream_; }
  EstimatorConfig estimator() const { return {trace_.nu, cfg_.batch}; }

  void record(int t, const Vector& x, double alpha, double eta) {
    TraceRecord row;
    row.iter = t;
    row.objective = reported_objective(problem_, x);
    if (problem_.exact_gradient && (t - 1) % cfg_.stationarity_eval_period == 0) {
      const Vector grad = (*problem_.exact_gradient)(x);
      row.stationarity_sq_l1 =
          gradient_map(x, grad, eta, geo_, problem_.regularizer, problem_.feasible_set)
              .sq_l1_norm;
    }
    row.alpha = alpha;
    row.eta = eta;
    if (t == trace_.sampled_index) trace_.sampled_point = x;
    trace_.records.push_back(std::move(row));
  }

  void add_calls(std::uint64_t calls) {
    calls_ += calls;
    TraceRecord& row = trace_.records.back();
    row.oracle_calls = calls_;
    if (cfg_.record_timing) {
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    }
  }

  std::uint64_t calls() const { return calls_; }

  Trace finish(Vector final_point) {
    trace_.final_point = std::move(final_point);
    return std::move(trace_);
  }

 private:
  const Problem& problem_;
  const RunConfig& cfg_;
  const MirrorGeometry& geo_;
  RngStream run_stream_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t calls_ = 0;
  Trace trace_;
};

void notify(const IterationObserver& observer, const IterationView& view) {
  if (observer) observer(view);
}

Trace run_mirror_descent(const Problem& problem, const RunConfig& cfg,
                         const IterationObserver& observer) {
  const MirrorGeometry geo(problem.dimension);
  Recorder rec(problem, cfg, geo);
  StepsizeState state;
  state.eta_base = cfg.eta_base;
  state.variant = cfg.effective_stepsize();

  Vector x = problem.initial_point;
  for (int t = 1; t <= cfg.iterations; ++t) {
    const double eta_t = state.eta();
    rec.record(t, x, state.alpha, eta_t);
    const GradientEstimate est =
        minibatch_gradient(problem, x, rec.estimator(), rec.run_stream().split(t));
    rec.add_calls(est.oracle_calls);
    Vector x_next = scmd_step(geo, x, est.vector, eta_t, problem.regularizer,
                              problem.feasible_set);
    const StepsizeState next = adaptive_stepsize_md_update(state, x, x_next);
    notify(observer, IterationView{t, x, nullptr, x_next, est.vector, est.vector,
                                   state.alpha, next.alpha, eta_t, rec.calls(),
                                   est.oracle_calls});
    state = next;
    x = std::move(x_next);
  }
  return rec.finish(std::move(x));
}

}  // namespace

Trace run_zo_ada_expgrad(const Problem& problem, const RunConfig& cfg,
                         const IterationObserver& observer) {
  RunConfig c = cfg;
  c.algorithm = Algorithm::AdaExpGrad;
  return run_mirror_descent(problem, c, observer);
}

Trace run_zo_ada_expgrad_plus(const Problem& problem, const RunConfig& cfg,
                              const IterationObserver& observer) {
  RunConfig c = cfg;
  c.algorithm = Algorithm::AdaExpGradPlus;
  const MirrorGeometry geo(problem.dimension);
  Recorder rec(problem, c, geo);
  StepsizeState state;
  state.eta_base = c.eta_base;
  state.variant = StepsizeVariant::AdaptiveFw;

  Vector x = problem.initial_point;
  for (int t = 1; t <= c.iterations; ++t) {
    rec.record(t, x, state.alpha, state.eta());
    const GradientEstimate est =
        minibatch_gradient(problem, x, rec.estimator(), rec.run_stream().split(t));
    rec.add_calls(est.oracle_calls);
    FwStepResult step = fw_combined_step(geo, state, x, est.vector, problem.regularizer,
                                         problem.feasible_set);
    notify(observer, IterationView{t, x, &step.v, step.x_next, est.vector, est.vector,
                                   state.alpha, step.state.alpha, state.eta(),
                                   rec.calls(), est.oracle_calls});
    state = step.state;
    x = std::move(step.x_next);
  }
  return rec.finish(std::move(x));
}

Trace run_zo_expstorm(const Problem& problem, const RunConfig& cfg,
                      const IterationObserver& observer) {
  RunConfig c = cfg;
  c.algorithm = Algorithm::ExpStorm;
  const MirrorGeometry geo(problem.dimension);
  Recorder rec(problem, c, geo);

  StormState storm;
  storm.batch = c.batch;
  storm.momentum = Vector::Zero(problem.dimension);
  StepsizeState state;
  state.eta_base = c.eta_base;
  state.variant = StepsizeVariant::Storm;
  state.alpha = std::sqrt(storm_schedule(1, c.batch).beta);

  Vector x = problem.initial_point;
  Vector x_prev = x;
  for (int t = 1; t <= c.iterations; ++t) {
    storm.schedule = storm_schedule(t, c.batch);
    rec.record(t, x, state.alpha, state.eta());
    const RngStream stream = rec.run_stream().split(t);
    GradientEstimate g;
    std::uint64_t step_calls = 0;
    if (t == 1) {
      // No previous iterate: gamma_1 is taken as 1, so d_1 = g_1.
      g = minibatch_gradient(problem, x, rec.estimator(), stream);
      storm.momentum = g.vector;
      step_calls = g.oracle_calls;
    } else {
      auto [g_t, m_t] = paired_storm_estimates(problem, x, x_prev, rec.estimator(), stream);
      storm.momentum = storm_momentum_update(storm.momentum, g_t.vector, m_t.vector,
                                             storm.schedule.gamma);
      step_calls = g_t.oracle_calls + m_t.oracle_calls;
      g = std::move(g_t);
    }
    rec.add_calls(step_calls);
    const double next_beta = storm_schedule(t + 1, c.batch).beta;
    FwStepResult step = fw_combined_step(geo, state, x, storm.momentum, problem.regularizer,
                                         problem.feasible_set, next_beta);
    notify(observer, IterationView{t, x, &step.v, step.x_next, storm.momentum, g.vector,
                                   state.alpha, step.state.alpha, state.eta(),
                                   rec.calls(), step_calls});
    state = step.state;
    x_prev = std::move(x);
    x = std::move(step.x_next);
  }
  return rec.finish(std::move(x));
}

Trace run_zo_psgd(const Problem& problem, const RunConfig& cfg,
                  const IterationObserver& observer) {
  RunConfig c = cfg;
  c.algorithm = Algorithm::Psgd;
  const MirrorGeometry geo(problem.dimension);
  Recorder rec(problem, c, geo);
  const double eta = c.eta_base;

  Vector x = problem.initial_point;
  for (int t = 1; t <= c.iterations; ++t) {
    rec.record(t, x, 1.0, eta);
    const GradientEstimate est =
        minibatch_gradient(problem, x, rec.estimator(), rec.run_stream().split(t));
    rec.add_calls(est.oracle_calls);
    Vector x_next = euclidean_prox(x, est.vector, eta, problem.regularizer,
                                   problem.feasible_set);
    notify(observer, IterationView{t, x, nullptr, x_next, est.vector, est.vector, 1.0, 1.0,
                                   eta, rec.calls(), est.oracle_calls});
    x = std::move(x_next);
  }
  return rec.finish(std::move(x));
}

Trace run_solver(const Problem& problem, const RunConfig& cfg,
                 const IterationObserver& observer) {
  switch (cfg.algorithm) {
    case Algorithm::AdaExpGrad: return run_zo_ada_expgrad(problem, cfg, observer);
    case Algorithm::AdaExpGradPlus: return run_zo_ada_expgrad_plus(problem, cfg, observer);
    case Algorithm::ExpStorm: return run_zo_expstorm(problem, cfg, observer);
    case Algorithm::Psgd: return run_zo_psgd(problem, cfg, observer);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace zomirror
