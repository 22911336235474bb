#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zomirror/problems.hpp"
#include "zomirror/solvers.hpp"

namespace zomirror {

/// One algorithm entry of a run spec. Unset fields fall back to the defaults
/// documented in README.md; nu falls back to the algorithm's default smoothing.
struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::AdaExpGrad;
  std::optional<std::string> label;  // output file prefix, defaults to the tag
  int iterations = 100;
  int batch = 16;
  double eta = 1.0;
  std::optional<double> nu;
  std::optional<StepsizeVariant> stepsize;

  std::string name() const;
  RunConfig run_config(std::uint64_t run_seed, int stationarity_eval_period,
                       bool record_timing) const;
};

struct RunSpec {
  nlohmann::json problem;  // normalised problem descriptor
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::uint64_t> seeds;
  std::uint64_t global_seed = 0;
  std::string output_dir = "out";
  bool emit_plot_data = false;
  int stationarity_eval_period = 1;

  nlohmann::json to_json() const;
};

/// Strict parse: unknown keys, unknown tags, and non-positive T or m are
/// errors. Throws std::invalid_argument naming the offending field.
RunSpec parse_run_spec(const nlohmann::json& j);
RunSpec parse_run_spec_file(const std::filesystem::path& path);

/// Per-run stream seed derived from the global seed, the algorithm tag and
/// the run seed.
std::uint64_t run_stream_seed(std::uint64_t global_seed, Algorithm algorithm,
                              std::uint64_t seed);

struct ExecuteOptions {
  int jobs = 1;
  bool no_timing = false;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> global_seed;
};

struct RunOutcome {
  std::string name;
  Algorithm algorithm = Algorithm::AdaExpGrad;
  std::uint64_t seed = 0;
  std::uint64_t run_seed = 0;
  bool ok = false;
  std::string error;
  Trace trace;
  RunConfig config;
};

/// Runs every (algorithm, seed) pair, up to `jobs` at a time. Writes
/// `<name>_<seed>.csv` traces, `summary.json`, and `<name>_mean_curve.csv`
/// when plot data is requested. Failed runs are recorded in the summary.
std::vector<RunOutcome> run_all(const RunSpec& spec, const ExecuteOptions& options);

/// run_all plus the exit status: 0 when every run succeeded, 1 otherwise.
int execute(const RunSpec& spec, const ExecuteOptions& options);

/// 17 significant digits, '.' decimal separator.
std::string format_double(double v);

std::string trace_csv(const Trace& trace);

}  // namespace zomirror
