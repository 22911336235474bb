#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zomirror/core.hpp"
#include "zomirror/mirror.hpp"
#include "zomirror/rng.hpp"
#include "zomirror/sampling.hpp"

namespace zomirror {

enum class Algorithm { AdaExpGrad, AdaExpGradPlus, ExpStorm, Psgd };
enum class StepsizeVariant { Constant, AdaptiveMd, AdaptiveFw, Storm };

std::string_view algorithm_tag(Algorithm algorithm);
/// Throws std::invalid_argument for unknown tags.
Algorithm parse_algorithm_tag(std::string_view tag);
std::string_view stepsize_tag(StepsizeVariant variant);
StepsizeVariant parse_stepsize_tag(std::string_view tag);

/// Stepsize accumulators shared by the adaptive schedules. eta_t = eta_base * alpha.
struct StepsizeState {
  double alpha = 1.0;
  double accum = 0.0;
  double eta_base = 1.0;
  double lambda_cap = 0.0;  // largest lambda_t seen, diagnostic only
  StepsizeVariant variant = StepsizeVariant::AdaptiveMd;

  double eta() const { return eta_base * alpha; }
};

/// lambda_t = 1 / (max(|a|_1, |b|_1) + 1)
double adaptive_lambda(const Vector& a, const Vector& b);

/// x_{t+1} = P(x_t, d_t, eta_t), the composite mirror descent step.
Vector scmd_step(const MirrorGeometry& geo, const Vector& x_t, const Vector& d_t,
                 double eta_t, const ElasticNet& reg, const FeasibleSet& set);

/// accum += lambda_t^2 alpha_t^2 |x_next - x_t|_1^2, alpha = sqrt(accum + 1).
/// A constant-variant state is returned unchanged.
StepsizeState adaptive_stepsize_md_update(StepsizeState state, const Vector& x_t,
                                          const Vector& x_next);

struct FwStepResult {
  Vector v;
  Vector x_next;
  StepsizeState state;  // alpha holds alpha_{t+1}
  double lambda = 0.0;
};

/// v_t = P(x_t, d_t, eta * alpha_t), then alpha_{t+1} from the accumulated
/// |v_s - x_s|_1 terms, then x_{t+1} = (1 - alpha_t/alpha_{t+1}) x_t +
/// alpha_t/alpha_{t+1} v_t.
///
/// AdaptiveFw: alpha_{t+1} = max(sqrt(accum), 1).
/// Storm:      alpha_{t+1} = sqrt(next_beta * (1 + accum)).
FwStepResult fw_combined_step(const MirrorGeometry& geo, const StepsizeState& state,
                              const Vector& x_t, const Vector& d_t,
                              const ElasticNet& reg, const FeasibleSet& set,
                              double next_beta = 1.0);

struct StormSchedule {
  double tau = 1.0;
  double gamma = 1.0;
  double beta = 1.0;
};

/// tau = (1 + t/m)^(2/3), gamma = 2 / (1 + tau), beta = max(1, (tau - 1)/sqrt(tau)).
StormSchedule storm_schedule(std::int64_t t, std::int64_t m);

/// d_t = g_t + (1 - gamma_t)(d_{t-1} - m_t)
Vector storm_momentum_update(const Vector& d_prev, const Vector& g_t, const Vector& m_t,
                             double gamma);

struct StormState {
  Vector momentum;
  StormSchedule schedule;
  std::int64_t batch = 1;
};

/// Proximal step in Euclidean geometry: soft-threshold by gamma1/eta, shrink
/// by eta/(eta + gamma2), clamp to the box.
Vector euclidean_prox(const Vector& x_t, const Vector& d_t, double eta,
                      const ElasticNet& reg, const FeasibleSet& set);

struct RunConfig {
  Algorithm algorithm = Algorithm::AdaExpGrad;
  /// Only consulted by AdaExpGrad (Constant or AdaptiveMd); the other
  /// algorithms have a fixed schedule.
  StepsizeVariant stepsize = StepsizeVariant::AdaptiveMd;
  int iterations = 100;
  int batch = 16;
  std::optional<double> nu;
  double eta_base = 1.0;
  std::uint64_t seed = 0;
  int stationarity_eval_period = 1;
  bool record_timing = true;

  void validate() const;
  /// Configured nu, or the default smoothing for this algorithm at dimension d.
  double resolved_nu(Eigen::Index d) const;
  StepsizeVariant effective_stepsize() const;
};

struct TraceRecord {
  int iter = 0;
  std::uint64_t oracle_calls = 0;
  double objective = 0.0;
  std::optional<double> stationarity_sq_l1;
  double alpha = 1.0;
  double eta = 1.0;
  std::optional<double> wall_ms;
};

struct Trace {
  std::vector<TraceRecord> records;
  int sampled_index = 1;
  Vector sampled_point;
  Vector final_point;
  double nu = 0.0;
};

/// Per-iteration view handed to observers after x_{t+1} is formed.
struct IterationView {
  int t = 0;
  const Vector& x;
  const Vector* v = nullptr;  // Frank-Wolfe candidate, when the algorithm has one
  const Vector& x_next;
  const Vector& direction;         // d_t fed to the prox step
  const Vector& minibatch_estimate;  // plain two-point mini-batch estimate at x_t
  double alpha = 1.0;
  double alpha_next = 1.0;
  double eta = 1.0;
  std::uint64_t oracle_calls = 0;  // cumulative
  std::uint64_t oracle_calls_step = 0;
};

using IterationObserver = std::function<void(const IterationView&)>;

/// Uniform index in {1, ..., T}.
int sample_output_index(int T, RngStream stream);

/// Closed-form oracle call count for a run.
std::uint64_t expected_oracle_calls(Algorithm algorithm, int T, int m);

Trace run_zo_ada_expgrad(const Problem& problem, const RunConfig& cfg,
                         const IterationObserver& observer = {});
Trace run_zo_ada_expgrad_plus(const Problem& problem, const RunConfig& cfg,
                              const IterationObserver& observer = {});
Trace run_zo_expstorm(const Problem& problem, const RunConfig& cfg,
                      const IterationObserver& observer = {});
Trace run_zo_psgd(const Problem& problem, const RunConfig& cfg,
                  const IterationObserver& observer = {});

/// Dispatches on cfg.algorithm.
Trace run_solver(const Problem& problem, const RunConfig& cfg,
                 const IterationObserver& observer = {});

}  // namespace zomirror
