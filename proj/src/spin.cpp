#include "nvgrad/spin.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <complex>

namespace nvgrad {

Eigen::Matrix3d tilted_nv_rotation() {
  const double c = 1.0 / std::sqrt(3.0);
  const double s = std::sqrt(2.0 / 3.0);
  Eigen::Matrix3d r;
  r << c, 0.0, -s,   // NV x
      0.0, 1.0, 0.0,  // NV y
      s, 0.0, c;      // NV axis
  return r;
}

void NVParams::validate() const {
  detail::require(zero_field_splitting > 0, "NVParams: D_gs must be positive");
  detail::require(gyromagnetic_ratio > 0, "NVParams: gamma_e must be positive");
  detail::require(dipole_perp > 0, "NVParams: d_perp must be positive");
  detail::require(bias_perp >= 0, "NVParams: B_perp must be non-negative");
  detail::require(std::isfinite(bias_azimuth), "NVParams: phi_B must be finite");
  detail::require(rotation.allFinite(), "NVParams: rotation must be finite");
  const double orth = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  detail::require(orth <= 1e-12 && std::abs(rotation.determinant() - 1.0) <= 1e-12,
                  "NVParams: rotation must be orthonormal with determinant +1");
}

TransverseField project_to_nv_frame(const NVParams& params, const Eigen::Vector3d& lab_field) {
  const Eigen::Vector3d e = params.rotation * lab_field;
  TransverseField t;
  t.magnitude = std::hypot(e.x(), e.y());
  if (t.magnitude == 0.0) return t;
  t.azimuth = std::atan2(e.y(), e.x());
  if (t.azimuth < 0) t.azimuth += kTwoPi;
  if (t.azimuth >= kTwoPi) t.azimuth = 0.0;
  return t;
}

double nv_transverse_cos(const NVParams& params, const Eigen::Vector3d& lab_field) {
  // E_perp cos(2 phi_B + phi_E) = Re[(E_x + i E_y) e^{2 i phi_B}], linear in the field.
  const Eigen::Vector3d e = params.rotation * lab_field;
  const double a = 2.0 * params.bias_azimuth;
  return e.x() * std::cos(a) - e.y() * std::sin(a);
}

NVParams align_bias_azimuth(NVParams params, const Eigen::Vector3d& lab_field) {
  const TransverseField t = project_to_nv_frame(params, lab_field);
  if (t.magnitude > 0.0) {
    double phi = std::fmod(kTwoPi - t.azimuth, kTwoPi) / 2.0;
    params.bias_azimuth = phi;
  }
  return params;
}

const Spin1& spin1_operators() {
  static const Spin1 ops = [] {
    using C = std::complex<double>;
    const double r = 1.0 / std::sqrt(2.0);
    const C i(0.0, 1.0);
    Spin1 s;
    s.x << 0, r, 0, r, 0, r, 0, r, 0;
    s.y << C(0), -i * r, C(0), i * r, C(0), -i * r, C(0), i * r, C(0);
    s.z << 1, 0, 0, 0, 0, 0, 0, 0, -1;
    return s;
  }();
  return ops;
}

Eigen::Matrix3cd ground_state_hamiltonian(const NVParams& params, const TransverseField& field) {
  const Spin1& s = spin1_operators();
  const double gb = params.gyromagnetic_ratio * params.bias_perp;
  const double de = params.dipole_perp * field.magnitude;
  const Eigen::Matrix3cd sx2 = s.x * s.x, sy2 = s.y * s.y;
  const Eigen::Matrix3cd sxy = s.x * s.y + s.y * s.x;
  return params.zero_field_splitting * s.z * s.z +
         gb * (std::cos(params.bias_azimuth) * s.x + std::sin(params.bias_azimuth) * s.y) +
         de * (std::cos(field.azimuth) * (sx2 - sy2) - std::sin(field.azimuth) * sxy);
}

TransitionFrequencies transition_frequencies(const NVParams& params, const TransverseField& field) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(ground_state_hamiltonian(params, field));
  if (solver.info() != Eigen::Success) throw NumericError("transition_frequencies: eigensolve failed");
  const Eigen::Vector3d& energies = solver.eigenvalues();
  const Eigen::Matrix3cd& vectors = solver.eigenvectors();

  // Track the |0>-like state by overlap rather than energy order.
  Eigen::Index zero = 0;
  for (Eigen::Index k = 1; k < 3; ++k)
    if (std::norm(vectors(1, k)) > std::norm(vectors(1, zero))) zero = k;

  std::array<double, 2> f{};
  std::size_t n = 0;
  for (Eigen::Index k = 0; k < 3; ++k)
    if (k != zero) f[n++] = energies(k) - energies(zero);
  std::sort(f.begin(), f.end());
  return {f[0], f[1]};
}

StarkShift stark_shift(const NVParams& params, const TransverseField& field) {
  const double shift = kTwoPi * params.dipole_perp * field.magnitude *
                       std::cos(2.0 * params.bias_azimuth + field.azimuth);
  return {-shift, shift};
}

double echo_phase_numeric(double d_perp, double e_ac, double f, double tau, double tau_t,
                          long n_steps) {
  detail::require(tau > 0 && std::isfinite(tau), "echo_phase_numeric: tau must be positive");
  detail::require(n_steps >= 1000, "echo_phase_numeric: n_steps must be at least 1000");
  const double w = kTwoPi * f;
  const double amp = kTwoPi * d_perp * e_ac;
  long n = n_steps / 2;
  if (n % 2 != 0) ++n;
  const double h = 0.5 * tau / static_cast<double>(n);

  // Simpson on [a, a + n h]; the sign function is constant on each half.
  auto simpson = [&](double a) {
    double sum = std::sin(w * a + w * tau_t) + std::sin(w * (a + n * h) + w * tau_t);
    for (long k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * std::sin(w * (a + k * h) + w * tau_t);
    return sum * h / 3.0;
  };
  return amp * (simpson(0.0) - simpson(-0.5 * tau));
}

}  // namespace nvgrad
