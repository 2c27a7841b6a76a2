#pragma once

#include <Eigen/Core>

#include <concepts>
#include <string>
#include <vector>

#include "nvgrad/constants.hpp"
#include "nvgrad/error.hpp"
#include "nvgrad/spin.hpp"

namespace nvgrad {

/// Anything that maps a lab-frame point to a field vector: FieldSampler or a lambda.
template <typename S>
concept FieldSource = requires(const S& s, const Eigen::Vector3d& r) {
  { s(r) } -> std::convertible_to<Eigen::Vector3d>;
};

/// Scalar reduction of the field vector fed to the echo.
enum class Projection { e_x, e_y, e_z, nv_transverse_cos };

std::string to_string(Projection p);
Projection parse_projection(const std::string& name);

double project_field(const NVParams& params, Projection projection, const Eigen::Vector3d& field);

/// Harmonic tip motion r(t) = center + axis * A sin(2 pi f t + phase).
struct OscillationSpec {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double amplitude = 0.8 * units::nm;
  double frequency = 180.0 * units::kHz;
  double phase = 0.0;
  Eigen::Vector3d center = Eigen::Vector3d(0.0, 0.0, 17.0 * units::nm);

  void validate() const;
  /// Additionally requires a vertical axis and an amplitude below the stand-off.
  void validate_intermittent() const;
};

enum class ReadoutAxis { y_pi_half, y_3pi_half, x_pi_half, x_3pi_half };

std::string to_string(ReadoutAxis a);
ReadoutAxis parse_readout_axis(const std::string& name);

struct EchoTiming {
  double frequency = 180.0 * units::kHz;
  double tau = 1.0 / (180.0 * units::kHz);
  double tau_e = 0.0;
  double tau_w = 0.0;
  ReadoutAxis readout_axis = ReadoutAxis::y_pi_half;

  /// Timing with tau = 1/f.
  static EchoTiming for_frequency(double f, double tau_e = 0.0, double tau_w = 0.0);

  double tau_t() const { return tau_e + tau_w; }
  void validate() const;
};

inline Eigen::Vector3d tip_position(const OscillationSpec& spec, double t) {
  return spec.center + spec.axis * (spec.amplitude * std::sin(kTwoPi * spec.frequency * t + spec.phase));
}

struct HarmonicAmplitude {
  double e_ac;  // in-phase fundamental coefficient, signed
  double dc;    // period average
};

/// Fundamental Fourier coefficient of the projected field along one period of the
/// trajectory, in phase with the displacement. Uniform time sampling (rectangle rule,
/// spectrally accurate for the periodic integrand).
template <FieldSource Sampler>
HarmonicAmplitude ac_harmonic_amplitude(const Sampler& sampler, const NVParams& params,
                                        const OscillationSpec& spec, Projection projection,
                                        int n_samples = 256) {
  if (n_samples < 64) throw DomainError("ac_harmonic_amplitude: n_samples must be at least 64");
  spec.validate();
  if (spec.amplitude == 0.0) {
    if (!(spec.center.z() > 0.0)) throw DomainError("ac_harmonic_amplitude: trajectory reaches the surface");
    return {0.0, project_field(params, projection, sampler(spec.center))};
  }
  double in_phase = 0.0, mean = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double theta = kTwoPi * k / n_samples + spec.phase;
    const Eigen::Vector3d r = spec.center + spec.axis * (spec.amplitude * std::sin(theta));
    if (!(r.z() > 0.0)) throw DomainError("ac_harmonic_amplitude: trajectory reaches the surface");
    const double s = project_field(params, projection, sampler(r));
    in_phase += s * std::sin(theta);
    mean += s;
  }
  return {2.0 * in_phase / n_samples, mean / n_samples};
}

/// Echo phase accumulated from the AC field seen by the oscillating sensor.
template <FieldSource Sampler>
double gradiometry_phase(const Sampler& sampler, const NVParams& params, const OscillationSpec& spec,
                         const EchoTiming& timing,
                         Projection projection = Projection::nv_transverse_cos, int n_samples = 256) {
  timing.validate();
  const double e_ac = ac_harmonic_amplitude(sampler, params, spec, projection, n_samples).e_ac;
  return echo_phase_closed(params.dipole_perp, e_ac, timing.frequency, timing.tau, timing.tau_t());
}

/// Rising-edge crossings of sin(2 pi f t + phase) through `threshold` in [0, horizon].
std::vector<double> comparator_trigger_times(const OscillationSpec& spec, double threshold,
                                             double horizon);

}  // namespace nvgrad
