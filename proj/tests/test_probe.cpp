#include <doctest.h>

#include <cmath>

#include "nvgrad/fields.hpp"
#include "nvgrad/probe.hpp"

using namespace nvgrad;
using Eigen::Vector3d;

namespace {

OscillationSpec vertical(double a, double z0, double x = 0.0) {
  OscillationSpec s;
  s.amplitude = a;
  s.center = Vector3d(x, 0.0, z0);
  return s;
}

}  // namespace

TEST_CASE("tip position") {
  OscillationSpec s = vertical(0.0, 17e-9);
  for (double t : {0.0, 1e-6, 3.3e-6}) CHECK(tip_position(s, t) == s.center);
  s.amplitude = 2e-9;
  s.phase = 0.4;
  const double t_peak = (kPi / 2 - s.phase) / (kTwoPi * s.frequency);
  CHECK((tip_position(s, t_peak) - s.center - s.axis * s.amplitude).norm() < 1e-22);
  Vector3d mean = Vector3d::Zero();
  const int n = 1000;
  for (int k = 0; k < n; ++k) mean += tip_position(s, k / (n * s.frequency));
  CHECK((mean / n - s.center).norm() < 1e-10 * s.center.norm());
}

TEST_CASE("oscillation spec validation") {
  OscillationSpec s = vertical(1e-9, 17e-9);
  CHECK_NOTHROW(s.validate_intermittent());
  s.amplitude = 17e-9;
  CHECK_THROWS_AS(s.validate_intermittent(), DomainError);
  s.amplitude = 1e-9;
  s.axis = Vector3d(1, 0, 0);
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS(s.validate_intermittent(), DomainError);
  s.axis = Vector3d(1, 1, 0);
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("harmonic amplitude of simple fields") {
  const NVParams p;
  const OscillationSpec s = vertical(0.8e-9, 17e-9);
  const FieldSampler u = FieldSampler::uniform(Vector3d(1e4, -2e4, 3e5));
  const HarmonicAmplitude h = ac_harmonic_amplitude(u, p, s, Projection::e_z);
  CHECK(std::abs(h.e_ac) < 1e-9);
  CHECK(h.dc == doctest::Approx(3e5).epsilon(1e-14));

  const double g = 4.2e13;  // V/m per m
  auto linear = [&](const Vector3d& r) { return Vector3d(0.0, 0.0, g * r.z()); };
  CHECK(ac_harmonic_amplitude(linear, p, s, Projection::e_z).e_ac == doctest::Approx(g * s.amplitude).epsilon(1e-12));
  CHECK_THROWS_AS(ac_harmonic_amplitude(linear, p, s, Projection::e_z, 32), DomainError);
  CHECK_THROWS_AS(ac_harmonic_amplitude(linear, p, vertical(2e-9, 1e-9), Projection::e_z), DomainError);
}

TEST_CASE("small amplitude: E_AC approaches A times the directional derivative") {
  const NVParams p;
  const FieldSampler line = FieldSampler::line_charge(1e-10, FieldConvention::paper);
  const double z0 = 20e-9, x = 9e-9, dz = 1e-12;
  const double grad = (line(Vector3d(x, 0, z0 + dz)).z() - line(Vector3d(x, 0, z0 - dz)).z()) / (2 * dz);
  const double a = 0.01 * z0;
  const double e1 = ac_harmonic_amplitude(line, p, vertical(a, z0, x), Projection::e_z).e_ac;
  CHECK(e1 == doctest::Approx(a * grad).epsilon(0.01));
  // second order in A: halving A quarters the relative deviation
  const double big = 0.05 * z0;
  const double d1 = ac_harmonic_amplitude(line, p, vertical(big, z0, x), Projection::e_z).e_ac / big - grad;
  const double d2 = ac_harmonic_amplitude(line, p, vertical(big / 2, z0, x), Projection::e_z).e_ac / (big / 2) - grad;
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("E_AC is odd under A -> -A") {
  const NVParams p;
  const FieldSampler line = FieldSampler::line_charge(1e-10, FieldConvention::paper);
  for (Projection proj : {Projection::e_x, Projection::e_z, Projection::nv_transverse_cos}) {
    OscillationSpec s = vertical(3e-9, 20e-9, 6e-9);
    s.phase = 0.3;
    const double plus = ac_harmonic_amplitude(line, p, s, proj).e_ac;
    s.axis = -s.axis;  // r0 + (-axis) A sin = r0 + axis (-A) sin
    const double minus = ac_harmonic_amplitude(line, p, s, proj).e_ac;
    CHECK(std::abs(plus + minus) <= 1e-10 * std::abs(plus));
  }
}

TEST_CASE("oscillation along y over a y-uniform field gives no signal") {
  const NVParams p;
  const FieldSampler line = FieldSampler::line_charge(1e-10, FieldConvention::paper);
  OscillationSpec s = vertical(5e-9, 20e-9, 7e-9);
  s.axis = Vector3d::UnitY();
  const double ref = std::abs(ac_harmonic_amplitude(line, p, vertical(5e-9, 20e-9, 7e-9), Projection::e_z).e_ac);
  for (Projection proj : {Projection::e_x, Projection::e_z, Projection::nv_transverse_cos})
    CHECK(std::abs(ac_harmonic_amplitude(line, p, s, proj).e_ac) <= 1e-12 * ref);
}

TEST_CASE("gradiometry phase") {
  NVParams p;
  const FieldSampler line = FieldSampler::line_charge(1e-10, FieldConvention::paper);
  const EchoTiming timing = EchoTiming::for_frequency(180e3);
  CHECK(gradiometry_phase(line, p, vertical(0.0, 17e-9, 5e-9), timing) == 0.0);
  const EchoTiming quarter = EchoTiming::for_frequency(180e3, 0.25 / 180e3);
  const OscillationSpec s = vertical(0.8e-9, 17e-9, 5e-9);
  CHECK(std::abs(gradiometry_phase(line, p, s, quarter)) < 1e-12 * std::abs(gradiometry_phase(line, p, s, timing)));

  // periodic in tau_w with period 1/f
  const EchoTiming a = EchoTiming::for_frequency(180e3, 0.3e-6, 0.7e-6);
  const EchoTiming b = EchoTiming::for_frequency(180e3, 0.3e-6, 0.7e-6 + 3 / 180e3);
  CHECK(gradiometry_phase(line, p, s, b) == doctest::Approx(gradiometry_phase(line, p, s, a)).epsilon(1e-10));
}

TEST_CASE("full chain against gradient x amplitude x closed form") {
  NVParams p;
  p.rotation = Eigen::Matrix3d::Identity();
  const FieldSampler line = FieldSampler::line_charge(1e-10, FieldConvention::paper);
  const double z0 = 25e-9, x = 11e-9, a = 0.01 * z0, dz = 1e-12;
  const Vector3d r(x, 0, z0);
  p = align_bias_azimuth(p, line(r));
  const double grad = (nv_transverse_cos(p, line(r + Vector3d(0, 0, dz))) -
                       nv_transverse_cos(p, line(r - Vector3d(0, 0, dz)))) / (2 * dz);
  const EchoTiming t = EchoTiming::for_frequency(180e3, 0.2e-6);
  const double expected = echo_phase_closed(p.dipole_perp, a * grad, t.frequency, t.tau, t.tau_t());
  CHECK(gradiometry_phase(line, p, vertical(a, z0, x), t) == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("projections") {
  NVParams p;
  p.rotation = Eigen::Matrix3d::Identity();
  const Vector3d e(1.0, 2.0, 3.0);
  CHECK(project_field(p, Projection::e_x, e) == 1.0);
  CHECK(project_field(p, Projection::e_y, e) == 2.0);
  CHECK(project_field(p, Projection::e_z, e) == 3.0);
  CHECK(project_field(p, Projection::nv_transverse_cos, e) == doctest::Approx(1.0).epsilon(1e-15));
  for (Projection q : {Projection::e_x, Projection::e_y, Projection::e_z, Projection::nv_transverse_cos})
    CHECK(parse_projection(to_string(q)) == q);
  CHECK_THROWS_AS(parse_projection("e_w"), DomainError);
}

TEST_CASE("comparator trigger times") {
  OscillationSpec s;
  s.frequency = 180e3;
  const auto t0 = comparator_trigger_times(s, 0.0, 10 / s.frequency);
  REQUIRE(t0.size() >= 10);
  for (std::size_t k = 0; k < t0.size(); ++k) CHECK(t0[k] == doctest::Approx(k / s.frequency).epsilon(1e-12));
  for (std::size_t k = 1; k < t0.size(); ++k) CHECK(t0[k] - t0[k - 1] == doctest::Approx(1 / s.frequency).epsilon(1e-9));
  const auto t5 = comparator_trigger_times(s, 0.5, 2 / s.frequency);
  REQUIRE(!t5.empty());
  CHECK(t5.front() == doctest::Approx((kPi / 6) / (kTwoPi * s.frequency)).epsilon(1e-12));
  CHECK_THROWS_AS(comparator_trigger_times(s, 1.0, 1e-3), DomainError);
  CHECK_THROWS_AS(comparator_trigger_times(s, -1.2, 1e-3), DomainError);
}

TEST_CASE("echo timing") {
  const EchoTiming t = EchoTiming::for_frequency(200e3, 1e-6, 2e-6);
  CHECK(t.tau == doctest::Approx(5e-6));
  CHECK(t.tau_t() == doctest::Approx(3e-6));
  EchoTiming bad = t;
  bad.tau_w = -1e-9;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  for (ReadoutAxis a : {ReadoutAxis::y_pi_half, ReadoutAxis::y_3pi_half, ReadoutAxis::x_pi_half, ReadoutAxis::x_3pi_half})
    CHECK(parse_readout_axis(to_string(a)) == a);
}
