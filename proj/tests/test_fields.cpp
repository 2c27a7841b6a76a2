#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "nvgrad/fields.hpp"

using namespace nvgrad;
using Eigen::Vector3d;

namespace {

ChargeMap gaussian_blob(double sigma_width, double dx, Eigen::Index n, double peak = 1e-3) {
  Eigen::ArrayXXd s(n, n);
  const double x0 = -0.5 * static_cast<double>(n - 1) * dx;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = x0 + static_cast<double>(i) * dx, y = x0 + static_cast<double>(j) * dx;
      s(i, j) = peak * std::exp(-(x * x + y * y) / (2 * sigma_width * sigma_width));
    }
  return ChargeMap(dx, dx, x0, x0, s);
}

double rel(const Vector3d& a, const Vector3d& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("charge map geometry checks") {
  CHECK_THROWS_AS(ChargeMap(1e-9, 1e-9, 0, 0, Eigen::ArrayXXd::Zero(1, 4)), DomainError);
  CHECK_THROWS_AS(ChargeMap(0.0, 1e-9, 0, 0, Eigen::ArrayXXd::Zero(4, 4)), DomainError);
  Eigen::ArrayXXd bad = Eigen::ArrayXXd::Zero(4, 4);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(ChargeMap(1e-9, 1e-9, 0, 0, bad), DomainError);
}

TEST_CASE("zero charge gives zero field") {
  const ChargeMap zero(2e-9, 2e-9, -64e-9, -64e-9, Eigen::ArrayXXd::Zero(64, 64));
  const FieldSampler f = fourier_stray_field(zero, 10e-9);
  for (double x : {-30e-9, 0.0, 17e-9}) CHECK(f(Vector3d(x, 5e-9, 10e-9)).norm() == 0.0);
}

TEST_CASE("fourier sampler rejects bad heights") {
  const ChargeMap m = make_line_defect(1e-10, 2e-9, 200e-9);
  CHECK_THROWS_AS(fourier_stray_field(m, 0.0), DomainError);
  CHECK_THROWS_AS(fourier_stray_field(m, -1e-9), DomainError);
  const FieldSampler f = fourier_stray_field(m, 20e-9);
  CHECK_FALSE(f.contains(Vector3d(0, 0, 25e-9)));
  CHECK_THROWS_AS(f(Vector3d(0, 0, 25e-9)), DomainError);
}

TEST_CASE("line defect: E_x vanishes on the line") {
  const ChargeMap m = make_line_defect(1.0, 1e-9, 400e-9);
  const FieldSampler f = fourier_stray_field(m, 30e-9);
  const Vector3d e = f(Vector3d(0, 0, 30e-9));
  CHECK(std::abs(e.x()) <= 1e-12 * std::abs(e.z()));
}

TEST_CASE("line defect through the Fourier solver follows the analytic field") {
  // Long line (12 um) and wide padding keep the finite-size terms well under 1%.
  const double z = 30e-9, lambda = 1e-10;
  const ChargeMap m = make_line_defect(lambda, 2e-9, 12e-6, 200e-9, 12e-6);
  const FieldSampler f = fourier_stray_field(m, z, FieldConvention::textbook);
  double worst = 0.0;
  for (double x = -2 * z; x <= 2 * z + 1e-15; x += 4e-9) {
    const Vector3d a = analytic_line_charge_field(x, z, lambda, FieldConvention::textbook);
    worst = std::max(worst, rel(f(Vector3d(x, 0, z)), a));
  }
  CHECK(worst < 0.01);
}

TEST_CASE("line defect normalisation") {
  const double lambda = 3e-10, dx = 2e-9;
  const ChargeMap m = make_line_defect(lambda, dx, 100e-9);
  for (Eigen::Index j = 0; j < m.ny(); ++j) CHECK(m.sigma().col(j).sum() * dx == doctest::Approx(lambda).epsilon(1e-14));
  Eigen::Index nonzero = 0;
  for (Eigen::Index i = 0; i < m.nx(); ++i)
    if (m.sigma()(i, 0) != 0.0) {
      ++nonzero;
      CHECK(m.x(i) == doctest::Approx(0.0).scale(1e-9));
    }
  CHECK(nonzero == 1);
  CHECK_THROWS_AS(make_line_defect(lambda, dx, 5 * dx), DomainError);
}

TEST_CASE("analytic line charge field") {
  const double z = 30e-9, lambda = 1e-10;
  for (auto conv : {FieldConvention::paper, FieldConvention::textbook}) {
    CHECK(analytic_line_charge_field(0.0, z, lambda, conv).x() == 0.0);
    const Vector3d e = analytic_line_charge_field(z, z, lambda, conv);
    CHECK(std::abs(e.x()) == doctest::Approx(std::abs(e.z())).epsilon(1e-15));
    const Vector3d near = analytic_line_charge_field(12e-9, 7e-9, lambda, conv);
    const Vector3d far = analytic_line_charge_field(24e-9, 14e-9, lambda, conv);
    CHECK(far.norm() == doctest::Approx(0.5 * near.norm()).epsilon(1e-14));
  }
  // textbook: lambda / (2 pi eps0 r) pointing away from the line
  const Vector3d t = analytic_line_charge_field(0.0, z, lambda, FieldConvention::textbook);
  CHECK(t.z() == doctest::Approx(lambda / (2 * M_PI * kEpsilon0 * z)).epsilon(1e-14));
  const Vector3d p = analytic_line_charge_field(0.0, z, lambda, FieldConvention::paper);
  CHECK(p.z() == doctest::Approx(-lambda / (4 * M_PI * M_PI * kEpsilon0 * z)).epsilon(1e-14));
  CHECK_THROWS_AS(analytic_line_charge_field(1e-9, 0.0, lambda, FieldConvention::paper), DomainError);
}

TEST_CASE("decay: |E(0, z)| z is constant for the line charge") {
  const FieldSampler f = FieldSampler::line_charge(1e-10, FieldConvention::paper);
  const double ref = f(Vector3d(0, 0, 1e-9)).norm() * 1e-9;
  for (double z : {2e-9, 17e-9, 300e-9, 5e-6}) CHECK(f(Vector3d(0, 0, z)).norm() * z == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("coulomb oracle: point charge and symmetry") {
  Eigen::ArrayXXd s = Eigen::ArrayXXd::Zero(2, 2);
  s(0, 0) = 2e-3;
  const double dx = 1e-9, z = 7e-9;
  const ChargeMap one(dx, dx, 0.0, 0.0, s);
  const double q = 2e-3 * dx * dx;
  const Vector3d e = coulomb_brute_force(one, Vector3d(0, 0, z));
  CHECK(e.x() == 0.0);
  CHECK(e.y() == 0.0);
  CHECK(e.z() == doctest::Approx(q / (4 * M_PI * kEpsilon0 * z * z)).epsilon(1e-14));

  Eigen::ArrayXXd two = Eigen::ArrayXXd::Zero(3, 2);
  two(0, 0) = two(2, 0) = 1e-3;
  const ChargeMap pair(dx, dx, -dx, 0.0, two);
  CHECK(std::abs(coulomb_brute_force(pair, Vector3d(0, 0, z)).x()) < 1e-15);
  CHECK_THROWS_AS(coulomb_brute_force(pair, Vector3d(0, 0, 0)), DomainError);
}

TEST_CASE("coulomb oracle: dense line against the textbook line field") {
  const double dx = 1e-9, lambda = 1e-10, z = 10 * dx;
  Eigen::ArrayXXd s = Eigen::ArrayXXd::Zero(21, 4001);
  s.row(10).setConstant(lambda / dx);
  const ChargeMap m(dx, dx, -10 * dx, -2000 * dx, s);
  for (double x : {0.0, 5e-9, -10e-9}) {
    const Vector3d a = analytic_line_charge_field(x, z, lambda, FieldConvention::textbook);
    CHECK(rel(coulomb_brute_force(m, Vector3d(x, 0, z)), a) < 0.02);
  }
}

TEST_CASE("linearity of every solver") {
  const ChargeMap a = gaussian_blob(4e-9, 1e-9, 48);
  Eigen::ArrayXXd wave(48, 48);
  for (Eigen::Index j = 0; j < 48; ++j)
    for (Eigen::Index i = 0; i < 48; ++i) wave(i, j) = 2e-3 * std::sin(0.3 * i) * std::cos(0.17 * j);
  const ChargeMap b2 = a.with_sigma(wave);
  const ChargeMap sum = a + b2;
  const Vector3d r(1.5e-9, -2.2e-9, 6e-9);

  const Vector3d fa = fourier_stray_field(a, 6e-9)(r), fb = fourier_stray_field(b2, 6e-9)(r);
  CHECK(rel(fourier_stray_field(sum, 6e-9)(r), fa + fb) < 1e-10);

  const Vector3d ca = coulomb_brute_force(a, r), cb = coulomb_brute_force(b2, r);
  CHECK(rel(coulomb_brute_force(sum, r), ca + cb) < 1e-10);

  const Vector3d la = FieldSampler::line_charge(1e-10, FieldConvention::paper)(r);
  const Vector3d lb = FieldSampler::line_charge(-3e-10, FieldConvention::paper)(r);
  CHECK(rel(FieldSampler::line_charge(-2e-10, FieldConvention::paper)(r), la + lb) < 1e-10);
}

TEST_CASE("translation covariance of the Fourier sampler") {
  const ChargeMap m = gaussian_blob(5e-9, 1e-9, 40);
  const double a = 13.3e-9, b = -4.7e-9, z = 8e-9;
  const FieldSampler f = fourier_stray_field(m, z);
  const FieldSampler g = fourier_stray_field(m.shifted(a, b), z);
  for (const Vector3d& r : {Vector3d(0.3e-9, 0.1e-9, z), Vector3d(-6.2e-9, 4.9e-9, z)})
    CHECK(rel(g(r + Vector3d(a, b, 0)), f(r)) < 1e-6);
}

TEST_CASE("symmetry: even charge gives odd E_x and even E_z") {
  Eigen::ArrayXXd s(41, 16);
  for (Eigen::Index i = 0; i < 41; ++i) s.row(i).setConstant(std::exp(-std::pow((i - 20) / 4.0, 2)));
  const ChargeMap m(1e-9, 1e-9, -20e-9, -7.5e-9, s * 1e-3);
  const FieldSampler f = fourier_stray_field(m, 5e-9);
  double scale = 0.0;
  for (int i = -20; i <= 20; ++i) scale = std::max(scale, f(Vector3d(i * 1e-9, 0.5e-9, 5e-9)).norm());
  for (int i = 1; i <= 20; ++i) {
    const Vector3d p = f(Vector3d(i * 1e-9, 0.5e-9, 5e-9)), q = f(Vector3d(-i * 1e-9, 0.5e-9, 5e-9));
    CHECK(std::abs(p.x() + q.x()) / scale < 1e-9);
    CHECK(std::abs(p.z() - q.z()) / scale < 1e-9);
  }
}

TEST_CASE("Fourier solver agrees with the Coulomb sum on interior points") {
  const double dx = 1e-9, z = 3 * dx;
  const ChargeMap m = gaussian_blob(6e-9, dx, 64);
  const FieldSampler f = fourier_stray_field(m, z, FieldConvention::textbook);
  double worst = 0.0;
  for (int i = -6; i <= 6; i += 3)
    for (int j = -6; j <= 6; j += 3) {
      const Vector3d r(i * dx + 0.5 * dx, j * dx + 0.5 * dx, z);
      worst = std::max(worst, rel(f(r), coulomb_brute_force(m, r)));
    }
  CHECK(worst < 0.02);
}

TEST_CASE("slab sampler matches single planes") {
  const ChargeMap m = gaussian_blob(6e-9, 1e-9, 64);
  const FieldSampler slab = fourier_stray_field(m, 10e-9, 20e-9, FieldConvention::paper);
  for (double z : {10e-9, 13.7e-9, 20e-9}) {
    const FieldSampler plane = fourier_stray_field(m, z);
    const Vector3d r(2.5e-9, -1.5e-9, z);
    CHECK(rel(slab(r), plane(r)) < 1e-6);
  }
  CHECK_FALSE(slab.contains(Vector3d(0, 0, 21e-9)));
}

TEST_CASE("striped domains") {
  const ChargeMap m = make_striped_domains(10e-6, 0.5, 18e-6, 50e-9);
  // stripe centres sit at period/4 + k period/2 with alternating sign
  auto at = [&](double x) {
    const auto i = static_cast<Eigen::Index>(std::llround((x - m.x0()) / m.dx()));
    return m.sigma()(i, 3);
  };
  CHECK(at(2.5e-6) == 0.5);
  CHECK(at(-2.5e-6) == -0.5);
  CHECK(at(7.5e-6) == -0.5);
  CHECK(at(2.5e-6) == -at(7.5e-6));

  const ChargeMap p = make_striped_domains(1e-6, 0.3, 4e-6, 10e-9);
  CHECK(std::abs(p.sigma().mean()) < 1e-12);
  const ChargeMap s = make_striped_domains(1e-6, 0.3, 4e-6, 10e-9, 50e-9);
  CHECK(std::abs(s.sigma().mean()) < 1e-6);
  CHECK(s.sigma().abs().maxCoeff() <= 0.3 + 1e-12);
  CHECK_THROWS_AS(make_striped_domains(1e-6, 0.3, 4e-6, 0.3e-6), DomainError);
  CHECK_THROWS_AS(make_striped_domains(1e-6, 0.3, 0.5e-6, 10e-9), DomainError);
}

TEST_CASE("charge map text round trip") {
  const ChargeMap m = gaussian_blob(3e-9, 0.7e-9, 9).shifted(1e-7, -3.3e-8);
  std::stringstream ss;
  write_charge_map_text(ss, m);
  CHECK(ss.str().rfind("# nx ny dx dy x0 y0", 0) == 0);
  const ChargeMap back = read_charge_map_text(ss);
  CHECK(back.same_geometry(m));
  CHECK((back.sigma() == m.sigma()).all());
  std::stringstream bad("# nx ny dx dy x0 y0\n# 3 3 1 1 0 0\n1 2 3\n");
  CHECK_THROWS(read_charge_map_text(bad));
}

TEST_CASE("binary raster layout") {
  Eigen::ArrayXXd v(3, 2);
  v << 1, 2, 3, 4, 5, 6;
  std::stringstream ss;
  write_raster(ss, v, 2.5e-9);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 24 + 8 * 6);
  std::int64_t nx, ny;
  double dx, first;
  std::memcpy(&nx, bytes.data(), 8);
  std::memcpy(&ny, bytes.data() + 8, 8);
  std::memcpy(&dx, bytes.data() + 16, 8);
  std::memcpy(&first, bytes.data() + 24, 8);
  CHECK(nx == 3);
  CHECK(ny == 2);
  CHECK(dx == 2.5e-9);
  CHECK(first == 1.0);
  CHECK(static_cast<unsigned char>(bytes[0]) == 3);  // little endian
  double d = 0;
  const Eigen::ArrayXXd back = read_raster(ss, &d);
  CHECK((back == v).all());
  CHECK(d == 2.5e-9);
}
