#include "bsmx/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <random>

#include "bsmx/io.hpp"

namespace bsmx::sim {

namespace {

using Rng = std::mt19937_64;

constexpr Index kArBurnIn = 200;

Eigen::Vector3d random_unit_vector(Rng& rng) {
  std::normal_distribution<double> normal;
  for (;;) {
    Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vector gaussian_time_course(Index n_times, double amplitude, double peak, double width) {
  Vector out(n_times);
  for (Index t = 0; t < n_times; ++t) {
    const double x = (static_cast<double>(t) / static_cast<double>(n_times) - peak) / width;
    out[t] = amplitude * std::exp(-0.5 * x * x);
  }
  return out;
}

// Last n_times samples of an AR process after burn-in, rescaled to the
// requested peak amplitude.
Vector ar_series(std::span<const double> a, Index n_times, double peak, Rng& rng) {
  std::normal_distribution<double> normal;
  const Index total = n_times + kArBurnIn;
  std::vector<double> x(static_cast<std::size_t>(total), 0.0);
  for (Index t = 0; t < total; ++t) {
    double v = normal(rng);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const Index lag = t - 1 - static_cast<Index>(k);
      if (lag >= 0) v += a[k] * x[static_cast<std::size_t>(lag)];
    }
    x[static_cast<std::size_t>(t)] = v;
  }
  Vector out(n_times);
  for (Index t = 0; t < n_times; ++t) out[t] = x[static_cast<std::size_t>(t + kArBurnIn)];
  const double max_abs = out.cwiseAbs().maxCoeff();
  if (max_abs > 0.0) out *= peak / max_abs;
  return out;
}

// Distinct locations drawn uniformly, skipping `excluded`, optionally with a
// minimum pairwise distance.
std::vector<Index> draw_locations(Index count, Index n_locations, const std::vector<Index>& excluded,
                                  const std::vector<Eigen::Vector3d>& positions, double min_dist,
                                  Rng& rng) {
  std::uniform_int_distribution<Index> pick(0, n_locations - 1);
  std::vector<Index> chosen;
  Index attempts = 0;
  while (static_cast<Index>(chosen.size()) < count) {
    if (++attempts > 100000) {
      throw InvalidArgument("cannot place " + std::to_string(count) +
                            " locations with the requested separation");
    }
    const Index s = pick(rng);
    if (std::find(excluded.begin(), excluded.end(), s) != excluded.end()) continue;
    if (std::find(chosen.begin(), chosen.end(), s) != chosen.end()) continue;
    const bool far = std::all_of(chosen.begin(), chosen.end(), [&](Index other) {
      return (positions[static_cast<std::size_t>(s)] - positions[static_cast<std::size_t>(other)])
                 .norm() >= min_dist;
    });
    if (!far) continue;
    chosen.push_back(s);
  }
  return chosen;
}

// O x 1 orientation for a dipole: a scalar for fixed orientation, a random
// unit vector otherwise.
Vector orientation(Index n_orient, Rng& rng) {
  if (n_orient == 1) return Vector::Ones(1);
  if (n_orient == 3) return random_unit_vector(rng);
  Vector v(n_orient);
  std::normal_distribution<double> normal;
  for (Index i = 0; i < n_orient; ++i) v[i] = normal(rng);
  return v.normalized();
}

// Lower Cholesky factor of K_ij = exp(-|p_i - p_j|^2 / (2 l^2)), with the
// smallest diagonal jitter that makes the factorization succeed.
Matrix correlation_factor(const std::vector<Eigen::Vector3d>& positions, double length) {
  const auto S = static_cast<Index>(positions.size());
  Matrix K(S, S);
  for (Index i = 0; i < S; ++i) {
    for (Index j = 0; j < S; ++j) {
      const double d2 =
          (positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)])
              .squaredNorm();
      K(i, j) = std::exp(-0.5 * d2 / (length * length));
    }
  }
  for (double jitter = 1e-10; jitter < 1.0; jitter *= 10.0) {
    Matrix Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(Kj);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw InvalidArgument("gain correlation matrix is not positive definite");
}

BlockSparseEstimate debiased(const Measurements& M, const BlockDesign& G,
                             const BlockSparseEstimate& est) {
  if (est.empty()) return est;
  return apply_scaling(est, estimate_scaling(M, G, est));
}

}  // namespace

void ScenarioSpec::validate() const {
  if (n_sensors < 1 || n_locations < 1 || n_orient < 1 || n_times < 1 || n_trials < 1) {
    throw InvalidArgument("scenario dimensions must be positive");
  }
  if (source_amplitudes.size() != source_peaks.size()) {
    throw InvalidArgument("one peak time per source amplitude");
  }
  if (static_cast<Index>(source_amplitudes.size()) + n_noise_dipoles > n_locations) {
    throw InvalidArgument("more dipoles than locations");
  }
  if (!(gain_correlation_length >= 0.0)) {
    throw InvalidArgument("gain_correlation_length must be >= 0");
  }
  if (!(source_width > 0.0)) throw InvalidArgument("source_width must be > 0");
  if (n_noise_dipoles < 0 || noise_dipole_amplitude < 0.0) {
    throw InvalidArgument("noise dipole settings must be nonnegative");
  }
  if (!ar_is_stable(ar_coefficients)) throw InvalidArgument("AR coefficients are not stable");
  if (target_snr && !(*target_snr > 0.0)) throw InvalidArgument("target_snr must be > 0");
  if (!(sensor_noise >= 0.0)) throw InvalidArgument("sensor_noise must be >= 0");
}

bool ar_is_stable(std::span<const double> a) {
  if (a.empty()) return true;
  const auto p = static_cast<Index>(a.size());
  Matrix companion = Matrix::Zero(p, p);
  for (Index k = 0; k < p; ++k) companion(0, k) = a[static_cast<std::size_t>(k)];
  for (Index k = 1; k < p; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Matrix> eig(companion, false);
  return (eig.eigenvalues().array().abs() < 1.0).all();
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal;
  const Index N = spec.n_sensors;
  const Index S = spec.n_locations;
  const Index O = spec.n_orient;
  const Index T = spec.n_times;

  std::vector<Eigen::Vector3d> positions;
  positions.reserve(static_cast<std::size_t>(S));
  for (Index s = 0; s < S; ++s) positions.push_back(random_unit_vector(rng));

  Matrix gain(N, S * O);
  for (Index j = 0; j < gain.cols(); ++j) {
    for (Index i = 0; i < N; ++i) gain(i, j) = normal(rng);
  }
  if (spec.gain_correlation_length > 0.0) {
    // Rows become draws of a unit-variance field: g = L z with L L^T = K.
    const Matrix L = correlation_factor(positions, spec.gain_correlation_length);
    for (Index o = 0; o < O; ++o) {
      Matrix z(N, S);
      for (Index s = 0; s < S; ++s) z.col(s) = gain.col(s * O + o);
      const Matrix field = z * L.transpose();
      for (Index s = 0; s < S; ++s) gain.col(s * O + o) = field.col(s);
    }
  }
  gain.colwise().normalize();
  BlockDesign G(std::move(gain), O);

  const auto n_sources = static_cast<Index>(spec.source_amplitudes.size());
  std::vector<Index> truth =
      draw_locations(n_sources, S, {}, positions, spec.min_source_separation, rng);
  std::vector<Index> background = draw_locations(spec.n_noise_dipoles, S, truth, positions, 0.0, rng);

  // True sources, sorted by location for the estimate.
  std::vector<std::pair<Index, Matrix>> sources;
  for (Index i = 0; i < n_sources; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Vector course = gaussian_time_course(T, spec.source_amplitudes[k], spec.source_peaks[k],
                                               spec.source_width);
    sources.emplace_back(truth[k], orientation(O, rng) * course.transpose());
  }
  std::sort(sources.begin(), sources.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Index> true_locs;
  std::vector<Matrix> true_blocks;
  for (auto& [s, b] : sources) {
    true_locs.push_back(s);
    true_blocks.push_back(std::move(b));
  }
  BlockSparseEstimate X_true =
      BlockSparseEstimate::from_blocks(S, O, T, true_locs, std::move(true_blocks));

  std::vector<Vector> noise_orient;
  for (std::size_t i = 0; i < background.size(); ++i) noise_orient.push_back(orientation(O, rng));

  const Matrix signal = predict(G, X_true);
  std::vector<Matrix> bg_trials;
  std::vector<Matrix> sensor_trials;
  Matrix bg_avg = Matrix::Zero(N, T);
  Matrix sensor_avg = Matrix::Zero(N, T);
  for (Index j = 0; j < spec.n_trials; ++j) {
    Matrix bg = Matrix::Zero(N, T);
    for (std::size_t i = 0; i < background.size(); ++i) {
      const Vector series = ar_series(spec.ar_coefficients, T, spec.noise_dipole_amplitude, rng);
      bg.noalias() += (G.block(background[i]) * noise_orient[i]) * series.transpose();
    }
    Matrix e(N, T);
    for (Index t = 0; t < T; ++t) {
      for (Index i = 0; i < N; ++i) e(i, t) = normal(rng);
    }
    bg_avg += bg;
    sensor_avg += e;
    bg_trials.push_back(std::move(bg));
    sensor_trials.push_back(std::move(e));
  }
  bg_avg /= static_cast<double>(spec.n_trials);
  sensor_avg /= static_cast<double>(spec.n_trials);

  double sigma = spec.sensor_noise;
  if (spec.target_snr) {
    // Pick sigma with ||bg_avg + sigma * sensor_avg||^2 = ||signal||^2 / snr.
    const double wanted = signal.squaredNorm() / *spec.target_snr;
    const double a = sensor_avg.squaredNorm();
    const double b = 2.0 * bg_avg.cwiseProduct(sensor_avg).sum();
    const double c = bg_avg.squaredNorm() - wanted;
    if (!(c < 0.0) || !(a > 0.0)) {
      throw InvalidArgument("target SNR " + std::to_string(*spec.target_snr) +
                            " is not reachable: background activity alone gives SNR " +
                            std::to_string(signal.squaredNorm() / bg_avg.squaredNorm()));
    }
    sigma = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
  }

  // Whiten so that per-trial sensor noise has unit variance.
  const double unit = sigma > 0.0 ? 1.0 / sigma : 1.0;
  std::vector<Matrix> trials;
  trials.reserve(static_cast<std::size_t>(spec.n_trials));
  Matrix avg = Matrix::Zero(N, T);
  for (Index j = 0; j < spec.n_trials; ++j) {
    const auto k = static_cast<std::size_t>(j);
    Matrix trial = unit * (signal + bg_trials[k] + sigma * sensor_trials[k]);
    avg += trial;
    trials.push_back(std::move(trial));
  }
  avg /= static_cast<double>(spec.n_trials);

  std::vector<Matrix> scaled_blocks;
  for (const auto& b : X_true.blocks()) scaled_blocks.push_back(unit * b);
  X_true = BlockSparseEstimate::from_blocks(S, O, T, X_true.active_set(), std::move(scaled_blocks));

  // Noise of the average from its parts, so that a noise-free scenario
  // gives exactly zero rather than averaging round-off.
  const double noise_energy = (unit * (bg_avg + sigma * sensor_avg)).squaredNorm();
  const double signal_energy = (unit * signal).squaredNorm();

  Scenario out{std::move(G),        std::move(positions), std::move(true_locs), std::move(background),
               std::move(X_true),   std::move(trials),    Measurements(avg),    0.0,
               false,               sigma,                spec.seed};
  if (noise_energy > 0.0) {
    out.snr = signal_energy / noise_energy;
  } else {
    out.snr = std::numeric_limits<double>::infinity();
    out.snr_infinite = true;
  }
  return out;
}

double goodness_of_fit(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est) {
  const double total = M.entries().squaredNorm();
  if (total == 0.0) return 0.0;
  return 1.0 - residual(M, G, est).squaredNorm() / total;
}

MetricsReport evaluate(const Scenario& scenario, const BlockSparseEstimate& est,
                       const BlockSparseEstimate& est_debiased, double radius) {
  MetricsReport report;
  report.active_set_size = static_cast<Index>(est.size());
  for (Index s : est.active_set()) {
    const auto& p = scenario.positions[static_cast<std::size_t>(s)];
    const bool hit = std::any_of(scenario.true_support.begin(), scenario.true_support.end(),
                                 [&](Index t) {
                                   return (p - scenario.positions[static_cast<std::size_t>(t)]).norm() <
                                          radius;
                                 });
    if (hit) {
      ++report.true_positives;
    } else {
      ++report.false_positives;
    }
  }
  const Matrix clean = predict(scenario.G, scenario.X_true);
  report.rmse = (clean - predict(scenario.G, est)).norm();
  report.rmse_debiased = (clean - predict(scenario.G, est_debiased)).norm();
  report.gof = goodness_of_fit(scenario.M_avg, scenario.G, est);
  report.gof_debiased = goodness_of_fit(scenario.M_avg, scenario.G, est_debiased);
  report.residual_norm = residual(scenario.M_avg, scenario.G, est).norm();
  report.residual_norm_debiased = residual(scenario.M_avg, scenario.G, est_debiased).norm();
  return report;
}

std::vector<SimulationRow> run_simulation(const SimulationSpec& spec) {
  spec.config.validate();
  if (spec.n_seeds < 1) throw InvalidArgument("n_seeds must be >= 1");
  for (double pct : spec.lambda_pcts) {
    if (!(pct > 0.0)) throw InvalidArgument("lambda percentages must be > 0");
  }

  const auto n_seeds = static_cast<std::size_t>(spec.n_seeds);
  std::vector<std::optional<Scenario>> scenarios(n_seeds);
  std::vector<std::exception_ptr> errors(n_seeds);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_seeds); ++i) {
    try {
      ScenarioSpec s = spec.scenario;
      s.seed = spec.scenario.seed + static_cast<std::uint64_t>(i);
      scenarios[static_cast<std::size_t>(i)] = generate_scenario(s);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::size_t n_lambda = spec.lambda_pcts.size();
  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_tasks = n_seeds * n_lambda * n_methods;
  std::vector<SimulationRow> rows(n_tasks);
  std::vector<std::exception_ptr> task_errors(n_tasks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(n_tasks); ++t) {
    const auto task = static_cast<std::size_t>(t);
    const std::size_t seed_i = task / (n_lambda * n_methods);
    const std::size_t lambda_i = (task / n_methods) % n_lambda;
    const std::size_t method_i = task % n_methods;
    try {
      const Scenario& sc = *scenarios[seed_i];
      SolverConfig config = spec.config;
      config.lambda_is_relative = true;
      config.lambda = spec.lambda_pcts[lambda_i] / 100.0;
      const Method method = spec.methods[method_i];
      const ReweightResult fit = solve_method(method, sc.M_avg, sc.G, config);
      const BlockSparseEstimate deb =
          spec.debias ? debiased(sc.M_avg, sc.G, fit.estimate) : fit.estimate;
      SimulationRow& row = rows[task];
      row.lambda_pct = spec.lambda_pcts[lambda_i];
      row.seed = sc.rng_seed;
      row.method = method;
      row.lambda = fit.lambda;
      row.snr = sc.snr;
      row.reweight_iterations = fit.state.iterations;
      row.metrics = evaluate(sc, fit.estimate, deb, spec.tp_radius);
    } catch (...) {
      task_errors[task] = std::current_exception();
    }
  }
  for (const auto& e : task_errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_metrics_csv(std::ostream& os, std::span<const SimulationRow> rows) {
  os << "lambda_pct,seed,method,lambda,snr,reweight_iterations,true_positives,false_positives,"
        "active_set_size,rmse,rmse_debiased,gof,gof_debiased,residual_norm,"
        "residual_norm_debiased\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << format_double(r.lambda_pct) << ',' << r.seed << ',' << to_string(r.method) << ','
       << format_double(r.lambda) << ',' << format_double(r.snr) << ',' << r.reweight_iterations
       << ',' << m.true_positives << ',' << m.false_positives << ',' << m.active_set_size << ','
       << format_double(m.rmse) << ',' << format_double(m.rmse_debiased) << ','
       << format_double(m.gof) << ',' << format_double(m.gof_debiased) << ','
       << format_double(m.residual_norm) << ',' << format_double(m.residual_norm_debiased)
       << '\n';
  }
}

}  // namespace bsmx::sim
