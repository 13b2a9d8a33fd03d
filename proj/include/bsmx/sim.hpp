#pragma once

// Synthetic evoked-response scenarios and evaluation metrics.
//
// A scenario has a random gain (standard normal entries, unit columns) over
// locations spread uniformly on the unit sphere. Each gain row is a smooth
// Gaussian field over the sphere, so nearby locations have correlated
// columns as in a real forward model. It also has a few true sources with
// Gaussian time courses, background dipoles driven by AR(5) noise and white
// sensor noise. Single trials are averaged into the evoked response.
//
// Default amplitudes and timings are scaled-down analogues of a classic
// auditory evoked field study: two sources peaking at 45% and 55% of the
// window with amplitudes in ratio 55:45, ten background dipoles driven by
// AR(5) noise, 100 averaged trials and an evoked SNR of 2.6. Units are
// arbitrary; only the shape of the setup is kept.
//
// Background dipoles peak at 50 rather than the 100 of the original study:
// with unit-norm random gain columns every background dipole reaches the
// sensors as strongly as a true source, and at 100 the background alone
// already pushes the evoked SNR below 2.6.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>

#include "bsmx/debias.hpp"
#include "bsmx/irmxne.hpp"

namespace bsmx::sim {

/// AR(5) coefficients x_t = sum_k a_k x_{t-k} + e_t with poles
/// {0.85, 0.6 e^{+-0.35i}, 0.5 e^{+-1.2i}}.
inline constexpr std::array<double, 5> kDefaultAr = {2.33960501, -2.28463104, 1.27795737,
                                                      -0.44042151, 0.0765};

struct ScenarioSpec {
  Index n_sensors = 60;
  Index n_locations = 500;
  Index n_orient = 1;
  Index n_times = 50;
  Index n_trials = 100;

  /// Length scale of the squared-exponential correlation between gain
  /// columns of nearby locations; 0 gives independent columns.
  double gain_correlation_length = 0.4;

  std::vector<double> source_amplitudes = {55.0, 45.0};
  /// Peak time of each source as a fraction of the window.
  std::vector<double> source_peaks = {0.45, 0.55};
  /// Standard deviation of the Gaussian time course, fraction of the window.
  double source_width = 0.08;
  /// True sources are at least this far apart on the sphere.
  double min_source_separation = 0.5;

  Index n_noise_dipoles = 10;
  double noise_dipole_amplitude = 50.0;
  std::vector<double> ar_coefficients{kDefaultAr.begin(), kDefaultAr.end()};

  /// Evoked SNR to calibrate to by choosing the sensor noise level. When
  /// unset, `sensor_noise` is used as the per-trial noise std.
  std::optional<double> target_snr = 2.6;
  double sensor_noise = 1.0;

  std::uint64_t seed = 0;

  void validate() const;
};

struct Scenario {
  BlockDesign G;
  std::vector<Eigen::Vector3d> positions;
  std::vector<Index> true_support;
  std::vector<Index> noise_support;
  BlockSparseEstimate X_true;
  std::vector<Matrix> trials;
  Measurements M_avg;
  /// ||G X_true||^2 / ||M_avg - G X_true||^2; +inf without noise.
  double snr = std::numeric_limits<double>::infinity();
  bool snr_infinite = true;
  /// Per-trial sensor noise std before whitening (data is divided by it).
  double sensor_noise = 0.0;
  std::uint64_t rng_seed = 0;
};

/// Deterministic in spec.seed. Data are whitened: per-trial sensor noise
/// has unit variance whenever sensor noise is present.
Scenario generate_scenario(const ScenarioSpec& spec);

/// True when every root of z^5 - a_1 z^4 - ... - a_5 lies inside the unit circle.
bool ar_is_stable(std::span<const double> coefficients);

/// Sensor-space metrics for one estimate.
struct MetricsReport {
  Index true_positives = 0;
  Index false_positives = 0;
  Index active_set_size = 0;
  /// ||G X_true - G X||_Fro
  double rmse = 0.0;
  double rmse_debiased = 0.0;
  /// 1 - ||M - G X||^2 / ||M||^2
  double gof = 0.0;
  double gof_debiased = 0.0;
  /// ||M - G X||_Fro before and after debiasing
  double residual_norm = 0.0;
  double residual_norm_debiased = 0.0;
};

inline constexpr double kDefaultTpRadius = 0.1;

/// An estimated source is a true positive when it lies within `radius`
/// (Euclidean, on the sphere) of any true source; several estimates may
/// match the same true source. All others are false positives.
MetricsReport evaluate(const Scenario& scenario, const BlockSparseEstimate& est,
                       const BlockSparseEstimate& est_debiased,
                       double radius = kDefaultTpRadius);

double goodness_of_fit(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est);

/// Krippendorff's alpha for binary nominal data, rows = coders (resamples),
/// columns = units (locations), no missing values. Only units selected by at
/// least one coder are used. With n_c the number of 0/1 values and
/// o_01 = sum_u n_u0 n_u1 / (m - 1) the off-diagonal coincidence count,
///
///     alpha = 1 - D_o / D_e = 1 - (n - 1) o_01 / (n_0 n_1).
///
/// Returns 1 when there is no variation at all (D_e = 0).
double krippendorff_alpha_binary(const Eigen::MatrixXi& selection);

struct StabilityReport {
  Eigen::MatrixXi selection_matrix;  // resamples x locations, 0/1
  Vector selection_probability;
  double krippendorff_alpha = 1.0;
};

struct StabilityOptions {
  double fraction = 0.8;
  Index n_resamples = 100;
  std::uint64_t seed = 0;
  Method method = Method::irmxne;
  SolverConfig config;
};

/// Averages a random `fraction` of the trials (without replacement) for each
/// resample, solves, and records which locations are active.
StabilityReport resample_stability(std::span<const Matrix> trials, const BlockDesign& G,
                                   const StabilityOptions& options);

/// One row of a simulation sweep.
struct SimulationRow {
  double lambda_pct = 0.0;
  std::uint64_t seed = 0;
  Method method = Method::irmxne;
  double lambda = 0.0;
  double snr = 0.0;
  int reweight_iterations = 0;
  MetricsReport metrics;
};

struct SimulationSpec {
  ScenarioSpec scenario;
  Index n_seeds = 1;
  std::vector<double> lambda_pcts = {50.0};
  std::vector<Method> methods = {Method::mxne, Method::irmxne};
  bool debias = false;
  SolverConfig config;
  double tp_radius = kDefaultTpRadius;
};

/// Runs every (seed, lambda, method) combination. Tasks may run
/// concurrently; rows come back ordered by seed, lambda, method.
std::vector<SimulationRow> run_simulation(const SimulationSpec& spec);

void write_metrics_csv(std::ostream& os, std::span<const SimulationRow> rows);

}  // namespace bsmx::sim
