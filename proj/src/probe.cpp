#include "nvgrad/probe.hpp"

#include <cmath>

namespace nvgrad {

std::string to_string(Projection p) {
  switch (p) {
    case Projection::e_x: return "E_x";
    case Projection::e_y: return "E_y";
    case Projection::e_z: return "E_z";
    case Projection::nv_transverse_cos: return "nv_transverse_cos";
  }
  return "?";
}

Projection parse_projection(const std::string& name) {
  if (name == "E_x" || name == "e_x") return Projection::e_x;
  if (name == "E_y" || name == "e_y") return Projection::e_y;
  if (name == "E_z" || name == "e_z") return Projection::e_z;
  if (name == "nv_transverse_cos") return Projection::nv_transverse_cos;
  throw DomainError("unknown projection '" + name + "'");
}

double project_field(const NVParams& params, Projection projection, const Eigen::Vector3d& field) {
  switch (projection) {
    case Projection::e_x: return field.x();
    case Projection::e_y: return field.y();
    case Projection::e_z: return field.z();
    case Projection::nv_transverse_cos: return nv_transverse_cos(params, field);
  }
  return 0.0;
}

void OscillationSpec::validate() const {
  detail::require(axis.allFinite() && std::abs(axis.norm() - 1.0) <= 1e-12,
                  "OscillationSpec: axis must be a unit vector");
  detail::require(std::isfinite(amplitude) && amplitude >= 0, "OscillationSpec: amplitude must be >= 0");
  detail::require(std::isfinite(frequency) && frequency > 0, "OscillationSpec: frequency must be positive");
  detail::require(std::isfinite(phase) && center.allFinite(), "OscillationSpec: non-finite phase or centre");
}

void OscillationSpec::validate_intermittent() const {
  validate();
  detail::require((axis - Eigen::Vector3d::UnitZ()).norm() <= 1e-12,
                  "intermittent contact: oscillation axis must be (0, 0, 1)");
  detail::require(amplitude < center.z(),
                  "intermittent contact: amplitude must be smaller than the NV-sample distance");
}

std::string to_string(ReadoutAxis a) {
  switch (a) {
    case ReadoutAxis::y_pi_half: return "y_pi_half";
    case ReadoutAxis::y_3pi_half: return "y_3pi_half";
    case ReadoutAxis::x_pi_half: return "x_pi_half";
    case ReadoutAxis::x_3pi_half: return "x_3pi_half";
  }
  return "?";
}

ReadoutAxis parse_readout_axis(const std::string& name) {
  for (auto a : {ReadoutAxis::y_pi_half, ReadoutAxis::y_3pi_half, ReadoutAxis::x_pi_half,
                 ReadoutAxis::x_3pi_half})
    if (to_string(a) == name) return a;
  throw DomainError("unknown readout axis '" + name + "'");
}

EchoTiming EchoTiming::for_frequency(double f, double tau_e, double tau_w) {
  detail::require(f > 0, "EchoTiming: frequency must be positive");
  EchoTiming t;
  t.frequency = f;
  t.tau = 1.0 / f;
  t.tau_e = tau_e;
  t.tau_w = tau_w;
  return t;
}

void EchoTiming::validate() const {
  detail::require(std::isfinite(frequency) && frequency > 0, "EchoTiming: frequency must be positive");
  detail::require(std::isfinite(tau) && tau > 0, "EchoTiming: tau must be positive");
  detail::require(std::isfinite(tau_e) && tau_e >= 0, "EchoTiming: tau_e must be >= 0");
  detail::require(std::isfinite(tau_w) && tau_w >= 0, "EchoTiming: tau_w must be >= 0");
}

std::vector<double> comparator_trigger_times(const OscillationSpec& spec, double threshold,
                                             double horizon) {
  detail::require(std::abs(threshold) < 1.0, "comparator_trigger_times: |threshold| must be < 1");
  detail::require(spec.frequency > 0 && horizon >= 0, "comparator_trigger_times: invalid horizon");
  const double period = 1.0 / spec.frequency;
  // Rising crossing where the phase equals asin(threshold) modulo 2 pi.
  double first = (std::asin(threshold) - spec.phase) / kTwoPi * period;
  first -= std::floor(first / period) * period;
  std::vector<double> times;
  for (long k = 0;; ++k) {
    const double t = first + static_cast<double>(k) * period;
    if (t > horizon) break;
    times.push_back(t);
  }
  return times;
}

}  // namespace nvgrad
