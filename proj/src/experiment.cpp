#include "zomirror/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "zomirror/rng.hpp"

namespace zomirror {

using nlohmann::json;
namespace fs = std::filesystem;

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

int positive_int(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto v = obj.at(key).get<std::int64_t>();
  if (v < 1 || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(where + ": '" + key + "' must be a positive integer");
  }
  return static_cast<int>(v);
}

double positive_real(const json& obj, const char* key, const std::string& where) {
  const double v = obj.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(where + ": '" + key + "' must be positive");
  }
  return v;
}

void write_atomically(const fs::path& path, const std::string& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string AlgorithmSpec::name() const {
  return label ? *label : std::string(algorithm_tag(algorithm));
}

RunConfig AlgorithmSpec::run_config(std::uint64_t run_seed, int stationarity_eval_period,
                                    bool record_timing) const {
  RunConfig cfg;
  cfg.algorithm = algorithm;
  if (stepsize) cfg.stepsize = *stepsize;
  cfg.iterations = iterations;
  cfg.batch = batch;
  cfg.nu = nu;
  cfg.eta_base = eta;
  cfg.seed = run_seed;
  cfg.stationarity_eval_period = stationarity_eval_period;
  cfg.record_timing = record_timing;
  return cfg;
}

json RunSpec::to_json() const {
  json algos = json::array();
  for (const auto& a : algorithms) {
    json entry{{"tag", algorithm_tag(a.algorithm)},
               {"T", a.iterations},
               {"m", a.batch},
               {"eta", a.eta}};
    if (a.label) entry["label"] = *a.label;
    if (a.nu) entry["nu"] = *a.nu;
    if (a.stepsize) entry["stepsize"] = stepsize_tag(*a.stepsize);
    algos.push_back(std::move(entry));
  }
  return json{{"problem", problem},
              {"algorithms", std::move(algos)},
              {"seeds", seeds},
              {"global_seed", global_seed},
              {"output_dir", output_dir},
              {"emit_plot_data", emit_plot_data},
              {"stationarity_eval_period", stationarity_eval_period}};
}

RunSpec parse_run_spec(const json& j) {
  reject_unknown(j,
                 {"problem", "algorithms", "seeds", "global_seed", "output_dir",
                  "emit_plot_data", "stationarity_eval_period"},
                 "run spec");
  RunSpec spec;
  if (!j.contains("problem")) throw std::invalid_argument("run spec: missing 'problem'");
  spec.problem = normalize_problem_descriptor(j.at("problem"));

  if (!j.contains("algorithms") || !j.at("algorithms").is_array() ||
      j.at("algorithms").empty()) {
    throw std::invalid_argument("run spec: 'algorithms' must be a non-empty array");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < j.at("algorithms").size(); ++i) {
    const json& entry = j.at("algorithms").at(i);
    const std::string where = "algorithms[" + std::to_string(i) + "]";
    reject_unknown(entry, {"tag", "label", "T", "m", "eta", "nu", "stepsize"}, where);
    if (!entry.contains("tag")) throw std::invalid_argument(where + ": missing 'tag'");
    AlgorithmSpec a;
    a.algorithm = parse_algorithm_tag(entry.at("tag").get<std::string>());
    if (entry.contains("label")) a.label = entry.at("label").get<std::string>();
    a.iterations = positive_int(entry, "T", a.iterations, where);
    a.batch = positive_int(entry, "m", a.batch, where);
    if (entry.contains("eta")) a.eta = positive_real(entry, "eta", where);
    if (entry.contains("nu")) a.nu = positive_real(entry, "nu", where);
    if (entry.contains("stepsize")) {
      a.stepsize = parse_stepsize_tag(entry.at("stepsize").get<std::string>());
    }
    a.run_config(0, 1, false).validate();
    if (!names.insert(a.name()).second) {
      throw std::invalid_argument(where + ": duplicate algorithm name '" + a.name() +
                                  "'; set a distinct 'label'");
    }
    spec.algorithms.push_back(std::move(a));
  }

  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
    throw std::invalid_argument("run spec: 'seeds' must be a non-empty array");
  }
  spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (std::set<std::uint64_t>(spec.seeds.begin(), spec.seeds.end()).size() != spec.seeds.size()) {
    throw std::invalid_argument("run spec: 'seeds' contains duplicates");
  }
  if (j.contains("global_seed")) spec.global_seed = j.at("global_seed").get<std::uint64_t>();
  if (j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("emit_plot_data")) spec.emit_plot_data = j.at("emit_plot_data").get<bool>();
  spec.stationarity_eval_period =
      positive_int(j, "stationarity_eval_period", 1, "run spec");
  return spec;
}

RunSpec parse_run_spec_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open run spec '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in '" + path.string() + "': " + e.what());
  }
  return parse_run_spec(j);
}

std::uint64_t run_stream_seed(std::uint64_t global_seed, Algorithm algorithm,
                              std::uint64_t seed) {
  return mix64(global_seed ^ mix64(hash_tag(algorithm_tag(algorithm)) ^ mix64(seed)));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const Trace& trace) {
  std::string out = "iter,oracle_calls,objective,stationarity_sq_l1,alpha,eta,wall_ms\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',';
    out += std::to_string(r.oracle_calls);
    out += ',';
    out += format_double(r.objective);
    out += ',';
    if (r.stationarity_sq_l1) out += format_double(*r.stationarity_sq_l1);
    out += ',';
    out += format_double(r.alpha);
    out += ',';
    out += format_double(r.eta);
    out += ',';
    if (r.wall_ms) out += format_double(*r.wall_ms);
    out += '\n';
  }
  return out;
}

std::vector<RunOutcome> run_all(const RunSpec& spec, const ExecuteOptions& options) {
  const fs::path out_dir = options.output_dir ? *options.output_dir : spec.output_dir;
  const std::uint64_t global_seed = options.global_seed ? *options.global_seed : spec.global_seed;
  fs::create_directories(out_dir);

  const Problem problem = make_problem(spec.problem);

  std::vector<RunOutcome> outcomes;
  for (const auto& a : spec.algorithms) {
    for (std::uint64_t seed : spec.seeds) {
      RunOutcome o;
      o.name = a.name();
      o.algorithm = a.algorithm;
      o.seed = seed;
      o.run_seed = run_stream_seed(global_seed, a.algorithm, seed);
      o.config = a.run_config(o.run_seed, spec.stationarity_eval_period, !options.no_timing);
      outcomes.push_back(std::move(o));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < outcomes.size(); i = next++) {
      RunOutcome& o = outcomes[i];
      try {
        o.trace = run_solver(problem, o.config);
        write_atomically(out_dir / (o.name + "_" + std::to_string(o.seed) + ".csv"),
                         trace_csv(o.trace));
        o.ok = true;
      } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  json runs = json::array();
  for (const auto& o : outcomes) {
    json r{{"algorithm", algorithm_tag(o.algorithm)},
           {"name", o.name},
           {"seed", o.seed},
           {"run_seed", o.run_seed},
           {"status", o.ok ? "ok" : "failed"}};
    if (!o.ok) {
      r["error"] = o.error;
    } else {
      const auto& recs = o.trace.records;
      r["T"] = o.config.iterations;
      r["m"] = o.config.batch;
      r["eta"] = o.config.eta_base;
      r["nu"] = o.trace.nu;
      r["final_objective"] = recs.back().objective;
      r["total_oracle_calls"] = recs.back().oracle_calls;
      r["tau"] = o.trace.sampled_index;
      r["tau_objective"] = recs[static_cast<std::size_t>(o.trace.sampled_index - 1)].objective;
      double sum = 0.0;
      int count = 0;
      std::optional<double> last;
      for (const auto& rec : recs) {
        if (rec.stationarity_sq_l1) {
          sum += *rec.stationarity_sq_l1;
          ++count;
          last = rec.stationarity_sq_l1;
        }
      }
      if (count > 0) {
        r["final_stationarity"] = *last;
        r["mean_stationarity"] = sum / count;
      } else {
        r["final_stationarity"] = nullptr;
        r["mean_stationarity"] = nullptr;
      }
    }
    runs.push_back(std::move(r));
  }
  json summary{{"config", spec.to_json()}, {"runs", std::move(runs)}};
  summary["config"]["global_seed"] = global_seed;
  write_atomically(out_dir / "summary.json", summary.dump(2) + "\n");

  if (spec.emit_plot_data) {
    std::map<std::string, std::vector<const RunOutcome*>> by_name;
    for (const auto& o : outcomes) {
      if (o.ok) by_name[o.name].push_back(&o);
    }
    for (const auto& [name, runs_for] : by_name) {
      const std::size_t len = runs_for.front()->trace.records.size();
      std::string body = "iter,objective_mean,objective_std,runs\n";
      for (std::size_t t = 0; t < len; ++t) {
        double mean = 0.0;
        for (const auto* o : runs_for) mean += o->trace.records[t].objective;
        mean /= static_cast<double>(runs_for.size());
        double var = 0.0;
        for (const auto* o : runs_for) {
          const double dev = o->trace.records[t].objective - mean;
          var += dev * dev;
        }
        const double sd =
            runs_for.size() > 1 ? std::sqrt(var / static_cast<double>(runs_for.size() - 1)) : 0.0;
        body += std::to_string(t + 1) + "," + format_double(mean) + "," + format_double(sd) +
                "," + std::to_string(runs_for.size()) + "\n";
      }
      write_atomically(out_dir / (name + "_mean_curve.csv"), body);
    }
  }
  return outcomes;
}

int execute(const RunSpec& spec, const ExecuteOptions& options) {
  const auto outcomes = run_all(spec, options);
  for (const auto& o : outcomes) {
    if (!o.ok) return 1;
  }
  return 0;
}

}  // namespace zomirror
