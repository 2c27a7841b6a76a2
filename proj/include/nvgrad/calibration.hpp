#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>

#include "nvgrad/least_squares.hpp"
#include "nvgrad/probe.hpp"
#include "nvgrad/spin.hpp"
#include "nvgrad/table_io.hpp"

namespace nvgrad {

// ---------------------------------------------------------------------------
// Optical amplitude calibration

/// Confocal fluorescence profile along the oscillation axis:
/// h(z) = s0 + s / (w sqrt(pi/2)) exp(-2 ((z - z0) / w)^2).
struct GaussianProfile {
  double background;  // s0, counts
  double intensity;   // s, counts * m
  double width;       // w, m
  double center;      // z0, m

  double peak_height() const;  // Gaussian term at z0 (above background)
  double operator()(double z) const;
  Eigen::VectorXd operator()(const Eigen::VectorXd& z) const;
  void validate() const;
};

struct GaussianFit {
  GaussianProfile profile;
  Eigen::Vector4d standard_errors;  // (s0, s, w, z0)
  double rms_residual;
  int iterations;
};

/// Nonlinear least-squares fit of all four profile parameters.
GaussianFit fit_gaussian_profile(const Eigen::VectorXd& z, const Eigen::VectorXd& counts);

enum class Side { left, right };

/// Linearisation anchor: h(z) ~ slope * (z - z_half) + height near z_half.
struct HalfMaximumPoint {
  double z_half;
  double slope;   // dh/dz at z_half, counts/m
  double height;  // h(z_half), the re-anchored background of the linear model
};

HalfMaximumPoint half_maximum_point(const GaussianProfile& profile, Side side = Side::left);

/// Amplitude from the extreme counts of the linearised response (A >= 0).
double solve_amplitude(double h_max, double h_min, double slope, double z0, double s0);

struct PhotonTrace {
  Eigen::VectorXd times;   // s, strictly increasing
  Eigen::VectorXd counts;  // counts per bin
  double frequency;        // Hz

  void validate() const;
  Table to_table() const;
  static PhotonTrace from_table(const Table& table, double frequency);
};

struct TraceFit {
  double h_max;
  double h_min;
  double phase;   // rad
  double offset;  // c0
  double amplitude;  // |c1|
  bool negative_minimum;  // h_min < 0 flags an unphysical fit
};

/// Least squares of counts = c0 + c1 sin(2 pi f t + phase) at the known frequency.
TraceFit fit_photon_trace(const PhotonTrace& trace);

struct LineFit {
  double slope;
  double intercept;
  double r_squared;
  double slope_error;
  double intercept_error;
};

/// Ordinary least squares amplitude(drive). At least three points.
LineFit fit_amplitude_vs_voltage(const Eigen::VectorXd& drive, const Eigen::VectorXd& amplitude);

/// Trace of a sensor parked at `z_center` and oscillating with `amplitude`,
/// counts evaluated at bin centres.
PhotonTrace synthesize_photon_trace(const GaussianProfile& profile, double z_center,
                                    double amplitude, double frequency, double phase, int periods,
                                    int bins_per_period);

/// Poisson resampling with expected counts rescaled to `total_counts`.
PhotonTrace poisson_resample(const PhotonTrace& trace, double total_counts, std::uint64_t seed);

Eigen::VectorXd poisson_resample(const Eigen::VectorXd& expected, std::uint64_t seed);

struct AmplitudeCalibrationSetup {
  GaussianProfile truth{100.0, 2.5e-6 * 2000.0, 2.5e-6, 0.0};
  double amplitude = 0.8e-9;
  double frequency = 180e3;
  double phase = 0.3;
  Side side = Side::left;
  int profile_points = 61;
  double profile_half_span = 3.0;   // in units of w
  int periods = 20;
  int bins_per_period = 32;
  std::optional<double> profile_peak_counts;  // Poisson profile when set
  std::optional<double> trace_total_counts;   // Poisson trace when set
  std::uint64_t seed = 0;
};

struct AmplitudeCalibration {
  Eigen::VectorXd profile_z, profile_counts;
  GaussianFit profile_fit;
  HalfMaximumPoint anchor;
  PhotonTrace trace;
  TraceFit trace_fit;
  double amplitude;
};

/// Profile scan -> fit -> half-maximum anchor -> trace -> sinusoid fit -> amplitude.
AmplitudeCalibration run_amplitude_calibration(const AmplitudeCalibrationSetup& setup);

/// Same chain on measured/imported data.
AmplitudeCalibration calibrate_amplitude(const Eigen::VectorXd& profile_z,
                                         const Eigen::VectorXd& profile_counts,
                                         const PhotonTrace& trace, Side side = Side::left);

// ---------------------------------------------------------------------------
// Delay-sweep calibration

struct DelaySweep {
  Eigen::VectorXd tau_w, s_plus, s_minus, c_plus, c_minus;

  Table to_table() const;
  static DelaySweep from_table(const Table& table);
};

/// Populations for every programmable delay at fixed E_AC; optional additive
/// Gaussian noise of standard deviation `noise_sigma` on each population.
DelaySweep delay_sweep(double e_ac, const NVParams& params, const EchoTiming& timing_base,
                       const Eigen::VectorXd& tau_w_values, double noise_sigma = 0.0,
                       std::uint64_t seed = 0);

template <FieldSource Sampler>
DelaySweep delay_sweep(const Sampler& sampler, const NVParams& params, const OscillationSpec& spec,
                       const EchoTiming& timing_base, const Eigen::VectorXd& tau_w_values,
                       Projection projection = Projection::nv_transverse_cos,
                       double noise_sigma = 0.0, std::uint64_t seed = 0) {
  const double e_ac = ac_harmonic_amplitude(sampler, params, spec, projection).e_ac;
  return delay_sweep(e_ac, params, timing_base, tau_w_values, noise_sigma, seed);
}

enum class SweepModel { sine, cosine };

struct SweepFit {
  double e_ac;        // V/m, >= 0
  double tau_e;       // s; modulo 1/f (sine) or 1/(2f) (cosine)
  double e_ac_error;  // one standard deviation
  double tau_e_error;
  Eigen::Matrix2d covariance;  // (E_AC, tau_e)
  double rss;
};

/// Fit of P_s = sin(Phi) or P_c = cos(Phi) over the sweep for (E_AC, tau_e).
SweepFit fit_delay_sweep(const DelaySweep& sweep, const NVParams& params,
                         const EchoTiming& timing_base, SweepModel model);

}  // namespace nvgrad
