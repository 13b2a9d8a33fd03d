#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"

#include "bsmx/io.hpp"
#include "bsmx/kernels.hpp"
#include "bsmx/pipeline.hpp"
#include "bsmx/sim.hpp"
#ifdef BSMX_HAS_ORACLE
#include "bsmx/benchmark.hpp"
#endif

namespace bsmx::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

// Settings shared by solve and check, filled from defaults, then the
// --config file, then explicit flags.
struct SolveSettings {
  std::string gain;
  std::string data;
  Index n_orient = 1;
  std::optional<double> lambda;
  double lambda_pct = 50.0;
  std::string method = "irmxne";
  int max_reweight = 30;
  double gap_tol = 1e-6;
  double reweight_tol = 1e-6;
  Index active_batch = 10;
  Index max_iter = 100000;
  std::optional<double> loose;
  std::optional<double> depth;
  bool debias = false;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out;
  std::string config;
  std::string estimate;
};

template <typename T>
void take(const json& doc, const char* key, T& into) {
  if (doc.contains(key)) into = doc.at(key).get<T>();
}

template <typename T>
void take(const json& doc, const char* key, std::optional<T>& into) {
  if (doc.contains(key) && !doc.at(key).is_null()) into = doc.at(key).get<T>();
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open config file");
  try {
    json doc = json::parse(in);
    if (!doc.is_object()) throw ParseError(path + ": config must be a JSON object");
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Overlays config-file values on `s` for every option not given on the
// command line.
void apply_config(SolveSettings& s, const CLI::App& cmd) {
  if (s.config.empty()) return;
  const json doc = read_config_file(s.config);
  auto unset = [&](const char* flag) { return cmd.count(flag) == 0; };
  try {
    if (unset("--gain")) take(doc, "gain", s.gain);
    if (unset("--data")) take(doc, "data", s.data);
    if (unset("--n-orient")) take(doc, "n_orient", s.n_orient);
    if (unset("--lambda") && unset("--lambda-pct")) {
      take(doc, "lambda", s.lambda);
      take(doc, "lambda_pct", s.lambda_pct);
    }
    if (unset("--method")) take(doc, "method", s.method);
    if (unset("--max-reweight")) take(doc, "max_reweight", s.max_reweight);
    if (unset("--gap-tol")) take(doc, "gap_tol", s.gap_tol);
    if (unset("--reweight-tol")) take(doc, "reweight_tol", s.reweight_tol);
    if (unset("--active-batch")) take(doc, "active_batch", s.active_batch);
    if (unset("--max-iter")) take(doc, "max_iter", s.max_iter);
    if (unset("--loose")) take(doc, "loose", s.loose);
    if (unset("--depth")) take(doc, "depth", s.depth);
    if (unset("--debias")) take(doc, "debias", s.debias);
    if (unset("--seed")) take(doc, "seed", s.seed);
  } catch (const json::exception& e) {
    throw ParseError(s.config + ": " + e.what());
  }
}

SolverConfig solver_config(const SolveSettings& s) {
  SolverConfig c;
  if (s.lambda) {
    c.lambda = *s.lambda;
    c.lambda_is_relative = false;
  } else {
    c.lambda = s.lambda_pct / 100.0;
    c.lambda_is_relative = true;
  }
  c.gap_tol = s.gap_tol;
  c.reweight_tol = s.reweight_tol;
  c.max_reweight = s.max_reweight;
  c.active_batch = s.active_batch;
  c.max_bcd_iter = s.max_iter;
  c.validate();
  return c;
}

json settings_json(const SolveSettings& s) {
  json j;
  j["gain"] = s.gain;
  j["data"] = s.data;
  j["n_orient"] = s.n_orient;
  j["lambda"] = s.lambda ? json(*s.lambda) : json(nullptr);
  j["lambda_pct"] = s.lambda ? json(nullptr) : json(s.lambda_pct);
  j["method"] = s.method;
  j["max_reweight"] = s.max_reweight;
  j["gap_tol"] = s.gap_tol;
  j["reweight_tol"] = s.reweight_tol;
  j["active_batch"] = s.active_batch;
  j["max_iter"] = s.max_iter;
  j["loose"] = s.loose ? json(*s.loose) : json(nullptr);
  j["depth"] = s.depth ? json(*s.depth) : json(nullptr);
  j["debias"] = s.debias;
  return j;
}

int default_jobs() {
  if (const char* env = std::getenv("BSMX_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string("BSMX_JOBS must be a positive integer, got '") + env + "'");
  }
  return kernels::max_threads();
}

int resolve_jobs(int flag) {
  const int jobs = flag > 0 ? flag : default_jobs();
  kernels::set_num_threads(jobs);
  return jobs;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed, std::ostream& err) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << s << " (generated)\n";
  return s;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ParseError(dir + ": cannot create output directory: " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ParseError(path.string() + ": cannot open for writing");
  return os;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& args, json config, json inputs,
                    const std::vector<std::uint64_t>& seeds, int jobs, Clock::time_point start) {
  json m;
  m["command"] = command;
  m["argv"] = args;
  m["config"] = std::move(config);
  m["inputs"] = std::move(inputs);
  m["version"] = BSMX_VERSION;
  m["seeds"] = seeds;
  m["jobs"] = jobs;
  m["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  auto os = open_out(dir / "manifest.json");
  os << m.dump(2) << '\n';
}

json input_entry(const std::string& path) {
  return {{"path", path}, {"digest", file_digest(path)}};
}

// Loads gain and data and checks that they agree, naming the files on
// failure.
std::pair<BlockDesign, Measurements> load_problem(const SolveSettings& s) {
  Matrix g = read_matrix(s.gain);
  Matrix m = read_matrix(s.data);
  if (s.n_orient < 1 || g.cols() % s.n_orient != 0) {
    throw DimensionError(s.gain + ": gain has " + std::to_string(g.rows()) + " x " +
                         std::to_string(g.cols()) + " entries; expected N x (S*" +
                         std::to_string(s.n_orient) + ") columns for n_orient = " +
                         std::to_string(s.n_orient));
  }
  if (m.rows() != g.rows()) {
    throw DimensionError(s.data + ": data has " + std::to_string(m.rows()) + " x " +
                         std::to_string(m.cols()) + " entries; expected " +
                         std::to_string(g.rows()) + " x T to match the " +
                         std::to_string(g.rows()) + " sensors of " + s.gain);
  }
  return {BlockDesign(std::move(g), s.n_orient), Measurements(std::move(m))};
}

void add_problem_options(CLI::App* cmd, SolveSettings& s) {
  cmd->add_option("--gain", s.gain, "Gain matrix, N x (S*O), CSV or binary");
  cmd->add_option("--data", s.data, "Measurements, N x T, CSV or binary");
  cmd->add_option("--n-orient", s.n_orient, "Orientations per location (1 or 3)");
  auto* abs = cmd->add_option("--lambda", s.lambda, "Absolute regularization weight");
  auto* pct = cmd->add_option("--lambda-pct", s.lambda_pct, "Lambda as percent of lambda_max");
  abs->excludes(pct);
  cmd->add_option("--loose", s.loose, "Loose orientation weight rho in (0, 1]");
  cmd->add_option("--depth", s.depth, "Depth weighting exponent gamma in [0, 1]");
  cmd->add_option("--config", s.config, "JSON config; flags take precedence");
}

void add_solver_options(CLI::App* cmd, SolveSettings& s) {
  cmd->add_option("--method", s.method, "mxne or irmxne");
  cmd->add_option("--max-reweight", s.max_reweight, "Maximum reweighting iterations");
  cmd->add_option("--gap-tol", s.gap_tol, "Duality gap tolerance");
  cmd->add_option("--reweight-tol", s.reweight_tol, "Max-abs change stopping the reweighting");
  cmd->add_option("--active-batch", s.active_batch, "Violators added per active-set step");
  cmd->add_option("--max-iter", s.max_iter, "BCD sweep cap per subproblem");
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidArgument(std::string(flag) + " is required");
}

// ---------------------------------------------------------------- solve

int cmd_solve(const SolveSettings& s, const std::vector<std::string>& args,
              std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  require(s.gain, "--gain");
  require(s.data, "--data");
  require(s.out, "--out");
  const int jobs = resolve_jobs(s.jobs);
  const std::uint64_t seed = resolve_seed(s.seed, err);

  auto [G, M] = load_problem(s);
  PipelineOptions opts;
  opts.method = parse_method(s.method);
  opts.config = solver_config(s);
  opts.loose = s.loose;
  opts.depth = s.depth;
  opts.debias = s.debias;

  err << "solve: " << G.n_sensors() << " sensors, " << G.n_locations() << " locations x "
      << G.n_orient() << ", " << M.n_times() << " times, method " << s.method << '\n';
  const PipelineResult r = run_pipeline(M, G, opts);

  ensure_dir(s.out);
  const fs::path dir(s.out);
  write_estimate(dir / "estimate.json", r.estimate);
  {
    auto os = open_out(dir / "trace.csv");
    r.fit.trace.write_csv(os);
  }
  {
    auto os = open_out(dir / "reweight.json");
    r.fit.state.write_json(os);
  }
  if (r.debiased) {
    write_estimate(dir / "estimate_debiased.json", *r.debiased);
    json d;
    d["locations"] = r.scaling ? r.scaling->locations : std::vector<Index>{};
    d["d"] = r.scaling ? std::vector<double>(r.scaling->d.data(),
                                             r.scaling->d.data() + r.scaling->d.size())
                       : std::vector<double>{};
    auto os = open_out(dir / "debias.json");
    os << d.dump(1) << '\n';
  }

  json config = settings_json(s);
  config["lambda_resolved"] = r.fit.lambda;
  config["lambda_max"] = r.lambda_max;
  write_manifest(dir, "solve", args, std::move(config),
                 {{"gain", input_entry(s.gain)}, {"data", input_entry(s.data)}}, {seed}, jobs,
                 start);

  const double final_gap = r.fit.trace.empty() ? 0.0 : r.fit.trace.back().gap;
  out << "lambda " << format_double(r.fit.lambda) << " (lambda_max "
      << format_double(r.lambda_max) << "), active set " << r.estimate.size() << ", "
      << r.fit.state.iterations << " reweighting iteration(s), final gap "
      << format_double(final_gap) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- check

int cmd_check(const SolveSettings& s, std::ostream& out) {
  require(s.gain, "--gain");
  require(s.data, "--data");
  require(s.estimate, "--estimate");
  auto [G, M] = load_problem(s);
  BlockSparseEstimate est = read_estimate(s.estimate, G.n_locations());
  check_dimensions(M, G, est);

  // Objectives are evaluated where the solver worked: on the transformed gain.
  BlockDesign work = G;
  if (s.loose) {
    work = apply_loose_orientation(work, *s.loose);
    est = to_transformed(est, OrientationWeights(*s.loose));
  }
  if (s.depth) {
    auto [weighted, weights] = apply_depth_weights(work, *s.depth);
    work = std::move(weighted);
    est = to_transformed(est, weights);
  }
  const double lmax = lambda_max(M, work);
  const double lambda = s.lambda ? *s.lambda : s.lambda_pct / 100.0 * lmax;
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");

  const GapReport gap = duality_gap(M, work, est, lambda);
  json doc;
  doc["lambda"] = lambda;
  doc["lambda_max"] = lmax;
  doc["active_set_size"] = est.size();
  doc["primal"] = gap.primal;
  doc["dual"] = gap.dual;
  doc["gap"] = gap.gap;
  doc["nonconvex_objective"] = nonconvex_objective(M, work, est, lambda);
  doc["residual_norm"] = residual(M, work, est).norm();
  out << doc.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateSettings {
  std::optional<std::uint64_t> seed;
  Index n_seeds = 1;
  sim::ScenarioSpec scenario;
  std::optional<double> target_snr;
  bool no_snr_target = false;
  std::vector<double> lambda_pcts{50.0};
  std::vector<std::string> methods{"mxne", "irmxne"};
  bool debias = false;
  Index resamples = 20;
  double resample_fraction = 0.8;
  double tp_radius = sim::kDefaultTpRadius;
  double gap_tol = 1e-6;
  int max_reweight = 30;
  int jobs = 0;
  std::string out;
};

int cmd_simulate(SimulateSettings s, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const auto start = Clock::now();
  require(s.out, "--out");
  const int jobs = resolve_jobs(s.jobs);
  const std::uint64_t seed = resolve_seed(s.seed, err);

  sim::SimulationSpec spec;
  spec.scenario = s.scenario;
  spec.scenario.seed = seed;
  if (s.no_snr_target) {
    spec.scenario.target_snr.reset();
  } else if (s.target_snr) {
    spec.scenario.target_snr = s.target_snr;
  }
  spec.n_seeds = s.n_seeds;
  spec.lambda_pcts = s.lambda_pcts;
  spec.methods.clear();
  for (const auto& m : s.methods) spec.methods.push_back(parse_method(m));
  spec.debias = s.debias;
  spec.tp_radius = s.tp_radius;
  spec.config.gap_tol = s.gap_tol;
  spec.config.max_reweight = s.max_reweight;

  err << "simulate: " << spec.n_seeds << " seed(s) x " << spec.lambda_pcts.size()
      << " lambda(s) x " << spec.methods.size() << " method(s)\n";
  const auto rows = sim::run_simulation(spec);

  ensure_dir(s.out);
  const fs::path dir(s.out);
  {
    auto os = open_out(dir / "metrics.csv");
    sim::write_metrics_csv(os, rows);
  }

  // Stability on the first seed's scenario, one entry per (lambda, method).
  json stability = json::array();
  if (s.resamples > 0) {
    sim::ScenarioSpec first = spec.scenario;
    const sim::Scenario sc = sim::generate_scenario(first);
    for (double pct : spec.lambda_pcts) {
      for (Method m : spec.methods) {
        sim::StabilityOptions so;
        so.fraction = s.resample_fraction;
        so.n_resamples = s.resamples;
        so.seed = seed;
        so.method = m;
        so.config = spec.config;
        so.config.lambda = pct / 100.0;
        so.config.lambda_is_relative = true;
        const auto rep = sim::resample_stability(sc.trials, sc.G, so);
        const Vector& p = rep.selection_probability;
        stability.push_back({{"seed", seed},
                             {"lambda_pct", pct},
                             {"method", to_string(m)},
                             {"n_resamples", s.resamples},
                             {"fraction", s.resample_fraction},
                             {"krippendorff_alpha", rep.krippendorff_alpha},
                             {"selection_probability",
                              std::vector<double>(p.data(), p.data() + p.size())}});
        err << "stability " << to_string(m) << " @ " << format_double(pct)
            << "%: alpha = " << format_double(rep.krippendorff_alpha) << '\n';
      }
    }
  }
  {
    auto os = open_out(dir / "stability.json");
    os << json{{"runs", std::move(stability)}}.dump(1) << '\n';
  }

  std::vector<std::uint64_t> seeds;
  for (Index i = 0; i < spec.n_seeds; ++i) seeds.push_back(seed + static_cast<std::uint64_t>(i));
  const auto& sc = spec.scenario;
  json config{{"n_seeds", spec.n_seeds},
              {"n_sensors", sc.n_sensors},
              {"n_locations", sc.n_locations},
              {"n_orient", sc.n_orient},
              {"n_times", sc.n_times},
              {"n_trials", sc.n_trials},
              {"n_noise_dipoles", sc.n_noise_dipoles},
              {"noise_dipole_amplitude", sc.noise_dipole_amplitude},
              {"gain_correlation_length", sc.gain_correlation_length},
              {"target_snr", sc.target_snr ? json(*sc.target_snr) : json(nullptr)},
              {"lambda_pct", spec.lambda_pcts},
              {"methods", s.methods},
              {"debias", spec.debias},
              {"resamples", s.resamples},
              {"resample_fraction", s.resample_fraction},
              {"tp_radius", spec.tp_radius},
              {"gap_tol", spec.config.gap_tol},
              {"max_reweight", spec.config.max_reweight}};
  write_manifest(dir, "simulate", args, std::move(config), json::object(), seeds, jobs, start);

  for (const auto& r : rows) {
    out << to_string(r.method) << " lambda " << format_double(r.lambda_pct) << "% seed " << r.seed
        << ": active " << r.metrics.active_set_size << ", tp " << r.metrics.true_positives
        << ", fp " << r.metrics.false_positives << ", gof "
        << format_double(100.0 * r.metrics.gof) << "%\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- benchmark

#ifdef BSMX_HAS_ORACLE
struct BenchmarkSettings {
  bench::ProblemSpec problem;
  std::optional<std::uint64_t> seed;
  std::vector<double> lambda_pcts{40, 50, 60, 70, 80, 90};
  std::vector<std::string> methods{"bcd", "bcd_as", "fista", "fista_as"};
  double gap_tol = 1e-6;
  int jobs = 0;
  std::string out;
};

int cmd_benchmark(BenchmarkSettings s, const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
  const auto start = Clock::now();
  require(s.out, "--out");
  const int jobs = resolve_jobs(s.jobs);
  s.problem.seed = resolve_seed(s.seed, err);
  std::vector<bench::Solver> solvers;
  for (const auto& m : s.methods) solvers.push_back(bench::parse_solver(m));
  SolverConfig config;
  config.gap_tol = s.gap_tol;

  const bench::Problem problem = bench::make_problem(s.problem);
  const auto rows = bench::run_benchmark(problem, solvers, s.lambda_pcts, config);

  ensure_dir(s.out);
  const fs::path dir(s.out);
  {
    auto os = open_out(dir / "benchmark.csv");
    bench::write_benchmark_csv(os, rows);
  }
  const auto& p = s.problem;
  json cfg{{"n_sensors", p.n_sensors}, {"n_locations", p.n_locations}, {"n_orient", p.n_orient},
           {"n_times", p.n_times},     {"n_active", p.n_active},       {"noise", p.noise},
           {"lambda_pct", s.lambda_pcts}, {"methods", s.methods},      {"gap_tol", s.gap_tol}};
  write_manifest(dir, "benchmark", args, std::move(cfg), json::object(), {p.seed}, jobs, start);
  bench::write_benchmark_csv(out, rows);
  return kExitOk;
}
#endif

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block-sparse MEG/EEG inverse solver (MxNE / irMxNE)", "bsmx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BSMX_VERSION);

  SolveSettings solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an external problem");
  add_problem_options(solve_cmd, solve);
  add_solver_options(solve_cmd, solve);
  solve_cmd->add_flag("--debias", solve.debias, "Also write the debiased estimate");
  solve_cmd->add_option("--out", solve.out, "Output directory");
  solve_cmd->add_option("--seed", solve.seed, "Recorded in the manifest");
  solve_cmd->add_option("--jobs", solve.jobs, "Worker threads (default: BSMX_JOBS)");

  SolveSettings check;
  auto* check_cmd = app.add_subcommand("check", "Recompute objectives and gap for an estimate");
  add_problem_options(check_cmd, check);
  check_cmd->add_option("--estimate", check.estimate, "Estimate JSON written by solve");

  SimulateSettings simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the synthetic evaluation");
  sim_cmd->add_option("--seed", simulate.seed, "Base seed; seed i uses seed + i");
  sim_cmd->add_option("--n-seeds", simulate.n_seeds, "Number of scenarios");
  sim_cmd->add_option("--n-sensors", simulate.scenario.n_sensors);
  sim_cmd->add_option("--n-locations", simulate.scenario.n_locations);
  sim_cmd->add_option("--n-orient", simulate.scenario.n_orient);
  sim_cmd->add_option("--n-times", simulate.scenario.n_times);
  sim_cmd->add_option("--n-trials", simulate.scenario.n_trials);
  sim_cmd->add_option("--n-noise-dipoles", simulate.scenario.n_noise_dipoles);
  sim_cmd->add_option("--noise-dipole-amplitude", simulate.scenario.noise_dipole_amplitude);
  sim_cmd->add_option("--gain-correlation", simulate.scenario.gain_correlation_length,
                      "Correlation length between gain columns (0: independent)");
  auto* snr = sim_cmd->add_option("--target-snr", simulate.target_snr, "Evoked SNR to calibrate to");
  sim_cmd->add_flag("--no-snr-target", simulate.no_snr_target,
                    "Use --sensor-noise as the per-trial noise std instead")
      ->excludes(snr);
  sim_cmd->add_option("--sensor-noise", simulate.scenario.sensor_noise);
  sim_cmd->add_option("--lambda-pct", simulate.lambda_pcts, "Repeatable");
  sim_cmd->add_option("--method", simulate.methods, "Repeatable: mxne, irmxne");
  sim_cmd->add_flag("--debias", simulate.debias);
  sim_cmd->add_option("--resamples", simulate.resamples, "Stability resamples (0 to skip)");
  sim_cmd->add_option("--resample-fraction", simulate.resample_fraction);
  sim_cmd->add_option("--tp-radius", simulate.tp_radius);
  sim_cmd->add_option("--gap-tol", simulate.gap_tol);
  sim_cmd->add_option("--max-reweight", simulate.max_reweight);
  sim_cmd->add_option("--jobs", simulate.jobs, "Worker threads (default: BSMX_JOBS)");
  sim_cmd->add_option("--out", simulate.out, "Output directory");

#ifdef BSMX_HAS_ORACLE
  BenchmarkSettings benchmark;
  auto* bench_cmd = app.add_subcommand("benchmark", "Time BCD against proximal gradient");
  bench_cmd->add_option("--n-sensors", benchmark.problem.n_sensors);
  bench_cmd->add_option("--n-locations", benchmark.problem.n_locations);
  bench_cmd->add_option("--n-orient", benchmark.problem.n_orient);
  bench_cmd->add_option("--n-times", benchmark.problem.n_times);
  bench_cmd->add_option("--n-active", benchmark.problem.n_active);
  bench_cmd->add_option("--noise", benchmark.problem.noise);
  bench_cmd->add_option("--seed", benchmark.seed);
  bench_cmd->add_option("--lambda-pct", benchmark.lambda_pcts, "Repeatable");
  bench_cmd->add_option("--method", benchmark.methods, "Repeatable: bcd, bcd_as, fista, fista_as");
  bench_cmd->add_option("--gap-tol", benchmark.gap_tol);
  bench_cmd->add_option("--jobs", benchmark.jobs);
  bench_cmd->add_option("--out", benchmark.out, "Output directory");
#endif

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) {
      apply_config(solve, *solve_cmd);
      return cmd_solve(solve, args, out, err);
    }
    if (*check_cmd) {
      apply_config(check, *check_cmd);
      return cmd_check(check, out);
    }
    if (*sim_cmd) return cmd_simulate(simulate, args, out, err);
#ifdef BSMX_HAS_ORACLE
    if (*bench_cmd) return cmd_benchmark(benchmark, args, out, err);
#endif
  } catch (const ConvergenceError& e) {
    err << "error: solver failed: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace bsmx::cli
