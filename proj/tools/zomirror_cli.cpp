#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "zomirror/check.hpp"
#include "zomirror/experiment.hpp"

using namespace zomirror;

namespace {

// ZOMIRROR_SEED overrides the spec's global seed. Returns false on a malformed value.
bool seed_from_env(std::optional<std::uint64_t>& out) {
  const char* raw = std::getenv("ZOMIRROR_SEED");
  if (raw == nullptr || *raw == '\0') return true;
  const std::string s(raw);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    std::cerr << "error: ZOMIRROR_SEED must be an unsigned integer, got '" << s << "'\n";
    return false;
  }
  out = v;
  return true;
}

int cmd_run(const std::string& config, int jobs, bool no_timing, const std::string& out) {
  ExecuteOptions opts;
  opts.jobs = jobs;
  opts.no_timing = no_timing;
  if (!out.empty()) opts.output_dir = out;
  if (!seed_from_env(opts.global_seed)) return 2;

  RunSpec spec;
  try {
    spec = parse_run_spec_file(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<RunOutcome> outcomes;
  try {
    outcomes = run_all(spec, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  int failed = 0;
  for (const auto& o : outcomes) {
    if (o.ok) {
      const auto& last = o.trace.records.back();
      std::cout << o.name << " seed=" << o.seed << " ok objective=" << format_double(last.objective)
                << " oracle_calls=" << last.oracle_calls << "\n";
    } else {
      ++failed;
      std::cout << o.name << " seed=" << o.seed << " failed: " << o.error << "\n";
    }
  }
  std::cout << outcomes.size() - failed << "/" << outcomes.size() << " runs succeeded, output in "
            << (opts.output_dir ? *opts.output_dir : spec.output_dir) << "\n";
  return failed == 0 ? 0 : 1;
}

int cmd_validate(const std::string& config) {
  try {
    RunSpec spec = parse_run_spec_file(config);
    // Building the problem catches descriptor errors the parser cannot see.
    (void)make_problem(spec.problem);
    std::cout << "ok: " << spec.algorithms.size() << " algorithm(s), " << spec.seeds.size()
              << " seed(s)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return 1;
  }
}

int cmd_prox_check(int trials, std::uint64_t seed) {
  const ProxCheckReport rep = prox_bruteforce_check(trials, seed);
  std::cout << (rep.passed() ? "PASS" : "FAIL") << " prox-check trials=" << rep.trials
            << " failures=" << rep.failures << " max_abs_error=" << rep.max_abs_error
            << " seconds=" << rep.seconds << "\n";
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order mirror descent experiments"};
  app.require_subcommand(1);

  std::string config;
  int jobs = 1;
  bool no_timing = false;
  std::string out;
  auto* run = app.add_subcommand("run", "Run every (algorithm, seed) pair of a spec");
  run->add_option("--config", config, "Run spec (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  run->add_flag("--no-timing", no_timing, "Leave the wall_ms column empty");
  run->add_option("--out", out, "Output directory, overrides the spec");

  std::string vconfig;
  auto* validate = app.add_subcommand("validate", "Parse a spec without running it");
  validate->add_option("--config", vconfig, "Run spec (JSON)")->required();

  int trials = 1000;
  std::uint64_t check_seed = 1;
  auto* prox = app.add_subcommand("prox-check", "Compare the prox step with golden-section search");
  prox->add_option("--trials", trials, "Random instances")->check(CLI::PositiveNumber);
  prox->add_option("--seed", check_seed, "Instance seed");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config, jobs, no_timing, out);
  if (validate->parsed()) return cmd_validate(vconfig);
  return cmd_prox_check(trials, check_seed);
}
