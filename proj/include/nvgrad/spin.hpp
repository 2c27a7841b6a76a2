#pragma once

#include <Eigen/Core>

#include <cmath>

#include "nvgrad/constants.hpp"
#include "nvgrad/error.hpp"

namespace nvgrad {

/// NV frame for a (100)-cut tip: NV axis along [111], tilted arccos(1/sqrt(3))
/// from the surface normal towards +x; NV x axis in the lab x-z plane.
/// Rows are the NV frame axes in lab coordinates.
Eigen::Matrix3d tilted_nv_rotation();

/// Ground-state spin constants and sensor orientation (SI units).
struct NVParams {
  double zero_field_splitting = 2.87 * units::GHz;     // Hz
  double gyromagnetic_ratio = 28.024951 * units::GHz;  // Hz/T
  double dipole_perp = 17.0 * units::Hz_cm_per_V;      // Hz m/V
  double bias_perp = 1.0 * units::mT;                  // T
  double bias_azimuth = 0.0;                           // rad, in the NV frame
  Eigen::Matrix3d rotation = tilted_nv_rotation();     // lab -> NV frame

  /// Throws DomainError when an invariant is broken.
  void validate() const;
};

/// Field component perpendicular to the NV axis.
struct TransverseField {
  double magnitude = 0.0;  // V/m
  double azimuth = 0.0;    // rad, [0, 2 pi)
};

struct TransitionFrequencies {
  double f_minus;  // Hz
  double f_plus;   // Hz
  double splitting() const { return f_plus - f_minus; }
};

struct StarkShift {
  double plus;   // rad/s
  double minus;  // rad/s
};

TransverseField project_to_nv_frame(const NVParams& params, const Eigen::Vector3d& lab_field);

/// E_perp cos(2 phi_B + phi_E): the field combination that shifts the transitions.
double nv_transverse_cos(const NVParams& params, const Eigen::Vector3d& lab_field);

/// Copy of `params` with phi_B chosen so that cos(2 phi_B + phi_E) = 1 for `lab_field`.
/// Leaves phi_B unchanged when the field has no transverse part.
NVParams align_bias_azimuth(NVParams params, const Eigen::Vector3d& lab_field);

/// Spin-1 operators in the {|+1>, |0>, |-1>} basis.
struct Spin1 {
  Eigen::Matrix3cd x, y, z;
};
const Spin1& spin1_operators();

/// Ground-state Hamiltonian in Hz.
Eigen::Matrix3cd ground_state_hamiltonian(const NVParams& params, const TransverseField& field);

/// Transitions out of the eigenstate with the largest |0> overlap, sorted ascending.
TransitionFrequencies transition_frequencies(const NVParams& params, const TransverseField& field);

StarkShift stark_shift(const NVParams& params, const TransverseField& field);

/// Closed-form spin-echo phase for an AC field E_AC sin(w t + w tau_t),
/// free evolution tau, echo centred at t = 0.
template <typename Scalar>
Scalar echo_phase_closed(Scalar d_perp, Scalar e_ac, Scalar f, Scalar tau, Scalar tau_t) {
  using std::cos;
  using std::sin;
  if (!(f > Scalar(0))) throw DomainError("echo_phase_closed: frequency must be positive");
  const Scalar s = sin(Scalar(kPi) * f * tau / Scalar(2));
  return Scalar(4) * d_perp * e_ac * s * s / f * cos(Scalar(kTwoPi) * f * tau_t);
}

/// Composite Simpson quadrature of the sign-weighted phase integral, split at t = 0.
double echo_phase_numeric(double d_perp, double e_ac, double f, double tau, double tau_t,
                          long n_steps);

/// Final-pulse projections pi/2_y, 3pi/2_y, pi/2_x, 3pi/2_x.
template <typename Scalar>
struct Populations {
  Scalar s_plus, s_minus, c_plus, c_minus;
};

template <typename Scalar>
Populations<Scalar> readout_populations(Scalar phi) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(phi), c = cos(phi);
  return {Scalar(0.5) * (1 + s), Scalar(0.5) * (1 - s), Scalar(0.5) * (1 + c),
          Scalar(0.5) * (1 - c)};
}

template <typename Scalar>
struct DifferentialSignals {
  Scalar sine, cosine;
};

template <typename Scalar>
DifferentialSignals<Scalar> differential_signals(const Populations<Scalar>& p) {
  return {p.s_plus - p.s_minus, p.c_plus - p.c_minus};
}

}  // namespace nvgrad
