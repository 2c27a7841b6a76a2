#include "nvgrad/fields.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace nvgrad {

namespace {

using Complex = std::complex<double>;

Eigen::Index good_fft_size(Eigen::Index n) {
  for (Eigen::Index m = std::max<Eigen::Index>(n, 1);; ++m) {
    Eigen::Index r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

void fft2(Eigen::MatrixXcd& a, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in, out;
  in.resize(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    std::copy(a.col(j).data(), a.col(j).data() + a.rows(), in.begin());
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    std::copy(out.begin(), out.end(), a.col(j).data());
  }
  in.resize(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) in[static_cast<std::size_t>(j)] = a(i, j);
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = out[static_cast<std::size_t>(j)];
  }
}

/// Angular wavenumbers of DFT bins; the Nyquist bin (even n) is reported separately.
Eigen::ArrayXd wavenumbers(Eigen::Index n, double spacing) {
  Eigen::ArrayXd k(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::Index folded = m <= n / 2 ? m : m - n;
    k(m) = kTwoPi * static_cast<double>(folded) / (static_cast<double>(n) * spacing);
  }
  return k;
}

int auto_level_count(double z_min, double z_max) {
  const double c = 0.5 * (z_min + z_max);
  const double h = 0.5 * (z_max - z_min);
  // Nearest singularity of the field as a function of height sits at z = 0;
  // Chebyshev interpolation converges like rho^-n with rho the Bernstein ellipse parameter.
  const double rho = (c + std::sqrt(c * c - h * h)) / h;
  const int n = static_cast<int>(std::ceil(std::log(1e11) / std::log(rho))) + 1;
  return std::clamp(n, 3, 48);
}

}  // namespace

namespace detail {

struct FourierGridData {
  Eigen::Index nx, ny;
  double dx, dy, x0, y0;
  FieldConvention convention;
  std::vector<double> heights;
  std::vector<double> weights;  // barycentric weights of the Chebyshev nodes
  std::vector<std::array<Eigen::ArrayXXd, 3>> planes;

  bool contains(const Eigen::Vector3d& r) const {
    const double tol = 1e-9;
    const double fx = (r.x() - x0) / dx;
    const double fy = (r.y() - y0) / dy;
    if (!(fx >= -tol && fx <= static_cast<double>(nx - 1) + tol)) return false;
    if (!(fy >= -tol && fy <= static_cast<double>(ny - 1) + tol)) return false;
    const auto [lo, hi] = std::minmax_element(heights.begin(), heights.end());
    const double ztol = 1e-9 * std::max(std::abs(*hi), 1e-300);
    return r.z() >= *lo - ztol && r.z() <= *hi + ztol;
  }

  Eigen::Vector3d bilinear(std::size_t level, double x, double y) const {
    const double fx = std::clamp((x - x0) / dx, 0.0, static_cast<double>(nx - 1));
    const double fy = std::clamp((y - y0) / dy, 0.0, static_cast<double>(ny - 1));
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(fx), nx - 2);
    const Eigen::Index j = std::min<Eigen::Index>(static_cast<Eigen::Index>(fy), ny - 2);
    const double tx = fx - static_cast<double>(i);
    const double ty = fy - static_cast<double>(j);
    Eigen::Vector3d e;
    for (int c = 0; c < 3; ++c) {
      const auto& p = planes[level][static_cast<std::size_t>(c)];
      e(c) = (1 - tx) * (1 - ty) * p(i, j) + tx * (1 - ty) * p(i + 1, j) +
             (1 - tx) * ty * p(i, j + 1) + tx * ty * p(i + 1, j + 1);
    }
    return e;
  }

  Eigen::Vector3d evaluate(const Eigen::Vector3d& r) const {
    if (planes.size() == 1) return bilinear(0, r.x(), r.y());
    Eigen::Vector3d num = Eigen::Vector3d::Zero();
    double den = 0.0;
    for (std::size_t k = 0; k < heights.size(); ++k) {
      const double dz = r.z() - heights[k];
      if (dz == 0.0) return bilinear(k, r.x(), r.y());
      const double c = weights[k] / dz;
      num += c * bilinear(k, r.x(), r.y());
      den += c;
    }
    return num / den;
  }
};

}  // namespace detail

std::string to_string(FieldConvention convention) {
  return convention == FieldConvention::paper ? "paper" : "textbook";
}

FieldConvention parse_convention(const std::string& name) {
  if (name == "paper") return FieldConvention::paper;
  if (name == "textbook") return FieldConvention::textbook;
  throw DomainError("unknown field convention '" + name + "'");
}

// ---------------------------------------------------------------------------
// ChargeMap

ChargeMap::ChargeMap(double dx, double dy, double x0, double y0, Eigen::ArrayXXd sigma)
    : dx_(dx), dy_(dy), x0_(x0), y0_(y0), sigma_(std::move(sigma)) {
  detail::require(sigma_.rows() >= 2 && sigma_.cols() >= 2, "ChargeMap: grid must be at least 2x2");
  detail::require(std::isfinite(dx_) && std::isfinite(dy_) && dx_ > 0 && dy_ > 0,
                  "ChargeMap: spacing must be positive");
  detail::require(std::isfinite(x0_) && std::isfinite(y0_), "ChargeMap: origin must be finite");
  detail::require(sigma_.allFinite(), "ChargeMap: charge density must be finite");
}

ChargeMap ChargeMap::shifted(double a, double b) const {
  return ChargeMap(dx_, dy_, x0_ + a, y0_ + b, sigma_);
}

ChargeMap ChargeMap::with_sigma(Eigen::ArrayXXd sigma) const {
  detail::require(sigma.rows() == nx() && sigma.cols() == ny(), "ChargeMap: shape mismatch");
  return ChargeMap(dx_, dy_, x0_, y0_, std::move(sigma));
}

bool ChargeMap::same_geometry(const ChargeMap& o) const {
  return nx() == o.nx() && ny() == o.ny() && dx_ == o.dx_ && dy_ == o.dy_ && x0_ == o.x0_ &&
         y0_ == o.y0_;
}

ChargeMap operator+(const ChargeMap& a, const ChargeMap& b) {
  detail::require(a.same_geometry(b), "ChargeMap: cannot add maps with different geometry");
  return a.with_sigma(a.sigma() + b.sigma());
}

// ---------------------------------------------------------------------------
// FieldSampler

FieldSampler FieldSampler::uniform(const Eigen::Vector3d& field) {
  return FieldSampler(detail::UniformField{field});
}

FieldSampler FieldSampler::line_charge(double lambda, FieldConvention convention, double x_line) {
  detail::require(std::isfinite(lambda) && std::isfinite(x_line), "line_charge: non-finite input");
  return FieldSampler(detail::LineChargeField{lambda, x_line, convention});
}

FieldSampler FieldSampler::coulomb(ChargeMap charge) {
  return FieldSampler(detail::CoulombField{std::make_shared<const ChargeMap>(std::move(charge))});
}

FieldSampler::Kind FieldSampler::kind() const {
  switch (impl_.index()) {
    case 0: return Kind::uniform;
    case 1: return Kind::analytic_line_charge;
    case 2: return Kind::coulomb_oracle;
    default: return Kind::fourier_grid;
  }
}

FieldConvention FieldSampler::convention() const {
  if (auto* l = std::get_if<detail::LineChargeField>(&impl_)) return l->convention;
  if (auto* g = std::get_if<detail::FourierGridField>(&impl_)) return g->data->convention;
  return FieldConvention::textbook;
}

bool FieldSampler::contains(const Eigen::Vector3d& r) const {
  if (!r.allFinite()) return false;
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, detail::UniformField>) {
          return true;
        } else if constexpr (std::is_same_v<T, detail::FourierGridField>) {
          return v.data->contains(r);
        } else {
          return r.z() > 0.0;
        }
      },
      impl_);
}

Eigen::Vector3d FieldSampler::operator()(const Eigen::Vector3d& r) const {
  if (!contains(r)) throw DomainError("FieldSampler: evaluation point outside the valid region");
  return std::visit(
      [&](const auto& v) -> Eigen::Vector3d {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, detail::UniformField>) {
          return v.value;
        } else if constexpr (std::is_same_v<T, detail::LineChargeField>) {
          return analytic_line_charge_field(r.x() - v.x_line, r.z(), v.lambda, v.convention);
        } else if constexpr (std::is_same_v<T, detail::CoulombField>) {
          return coulomb_brute_force(*v.charge, r);
        } else {
          return v.data->evaluate(r);
        }
      },
      impl_);
}

std::pair<double, double> FieldSampler::height_range() const {
  if (auto* g = std::get_if<detail::FourierGridField>(&impl_)) {
    const auto [lo, hi] = std::minmax_element(g->data->heights.begin(), g->data->heights.end());
    return {*lo, *hi};
  }
  return {0.0, std::numeric_limits<double>::infinity()};
}

// ---------------------------------------------------------------------------
// Fourier propagation

FieldSampler fourier_stray_field(const ChargeMap& charge, double z, FieldConvention convention) {
  return fourier_stray_field(charge, z, z, convention, 1);
}

FieldSampler fourier_stray_field(const ChargeMap& charge, double z_min, double z_max,
                                 FieldConvention convention, int n_levels) {
  detail::require(std::isfinite(z_min) && std::isfinite(z_max) && z_min > 0.0,
                  "fourier_stray_field: evaluation height must be positive");
  detail::require(z_max >= z_min, "fourier_stray_field: empty height interval");

  auto data = std::make_shared<detail::FourierGridData>();
  data->nx = charge.nx();
  data->ny = charge.ny();
  data->dx = charge.dx();
  data->dy = charge.dy();
  data->x0 = charge.x0();
  data->y0 = charge.y0();
  data->convention = convention;

  if (z_max == z_min) n_levels = 1;
  if (n_levels <= 0) n_levels = auto_level_count(z_min, z_max);
  if (n_levels == 1) {
    detail::require(z_max == z_min, "fourier_stray_field: a slab needs at least two levels");
    data->heights = {z_min};
    data->weights = {1.0};
  } else {
    const double c = 0.5 * (z_min + z_max);
    const double h = 0.5 * (z_max - z_min);
    for (int k = 0; k < n_levels; ++k) {
      data->heights.push_back(c + h * std::cos(kPi * k / (n_levels - 1)));
      double w = (k % 2 == 0) ? 1.0 : -1.0;
      if (k == 0 || k == n_levels - 1) w *= 0.5;
      data->weights.push_back(w);
    }
  }

  // Zero-pad to at least twice the extent so the periodic images stay clear of the window.
  const Eigen::Index px = good_fft_size(2 * charge.nx());
  const Eigen::Index py = good_fft_size(2 * charge.ny());
  Eigen::MatrixXcd spectrum = Eigen::MatrixXcd::Zero(px, py);
  spectrum.topLeftCorner(charge.nx(), charge.ny()) = charge.sigma().cast<Complex>().matrix();
  fft2(spectrum, false);

  const Eigen::ArrayXd kx = wavenumbers(px, charge.dx());
  const Eigen::ArrayXd ky = wavenumbers(py, charge.dy());
  const double prefactor = convention_scale(convention) / (2.0 * kEpsilon0);
  const Complex i_unit(0.0, 1.0);

  Eigen::MatrixXcd transverse(px, py);
  Eigen::MatrixXcd longitudinal(px, py);
  for (double z : data->heights) {
    for (Eigen::Index j = 0; j < py; ++j) {
      const bool nyquist_y = (py % 2 == 0) && j == py / 2;
      for (Eigen::Index i = 0; i < px; ++i) {
        const bool nyquist_x = (px % 2 == 0) && i == px / 2;
        const double k = std::hypot(kx(i), ky(j));
        const Complex base = prefactor * spectrum(i, j) * std::exp(-k * z);
        longitudinal(i, j) = base;
        if (k == 0.0) {
          // Uniform sheet: no transverse field.
          transverse(i, j) = 0.0;
          continue;
        }
        // Nyquist bins have no well-defined derivative sign; dropping them keeps
        // E_x and E_y real so both can share one inverse transform.
        const double fx = nyquist_x ? 0.0 : kx(i) / k;
        const double fy = nyquist_y ? 0.0 : ky(j) / k;
        const Complex ex = -i_unit * fx * base;
        const Complex ey = -i_unit * fy * base;
        transverse(i, j) = ex + i_unit * ey;
      }
    }
    fft2(transverse, true);
    fft2(longitudinal, true);
    std::array<Eigen::ArrayXXd, 3> plane;
    plane[0] = transverse.topLeftCorner(charge.nx(), charge.ny()).real().array();
    plane[1] = transverse.topLeftCorner(charge.nx(), charge.ny()).imag().array();
    plane[2] = longitudinal.topLeftCorner(charge.nx(), charge.ny()).real().array();
    data->planes.push_back(std::move(plane));
  }

  return FieldSampler(detail::FourierGridField{std::move(data)});
}

// ---------------------------------------------------------------------------
// Brute-force oracle

Eigen::Vector3d coulomb_brute_force(const ChargeMap& charge, const Eigen::Vector3d& point) {
  detail::require(point.allFinite() && point.z() > 0.0,
                  "coulomb_brute_force: point must lie strictly above the surface");
  const double k = charge.cell_area() / (2.0 * kTwoPi * kEpsilon0);
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  const double z2 = point.z() * point.z();
  for (Eigen::Index j = 0; j < charge.ny(); ++j) {
    const double ry = point.y() - charge.y(j);
    for (Eigen::Index i = 0; i < charge.nx(); ++i) {
      const double s = charge.sigma()(i, j);
      if (s == 0.0) continue;
      const double rx = point.x() - charge.x(i);
      const double r2 = rx * rx + ry * ry + z2;
      const double w = s / (r2 * std::sqrt(r2));
      e += w * Eigen::Vector3d(rx, ry, point.z());
    }
  }
  return k * e;
}

// ---------------------------------------------------------------------------
// Charge models

namespace {

/// Antiderivative of the unit square wave (+1 on [0, h), -1 on [h, 2h)).
double square_wave_integral(double x, double half_period) {
  const double period = 2.0 * half_period;
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  return r < half_period ? r : period - r;
}

double smoothed_square_wave(double x, double half_period, double smoothing) {
  const double reach = 10.0 * smoothing;
  const auto k_lo = static_cast<long long>(std::floor((x - reach) / half_period)) - 1;
  const auto k_hi = static_cast<long long>(std::floor((x + reach) / half_period)) + 1;
  const double s = std::sqrt(2.0) * smoothing;
  double v = 0.0;
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double a = static_cast<double>(k) * half_period;
    const double b = a + half_period;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    v += sign * 0.5 * (std::erf((x - a) / s) - std::erf((x - b) / s));
  }
  return v;
}

}  // namespace

ChargeMap make_striped_domains(double period, double sigma0, double extent, double resolution,
                               double smoothing) {
  detail::require(std::isfinite(period) && period > 0, "make_striped_domains: period must be positive");
  detail::require(resolution > 0 && resolution < period / 4,
                  "make_striped_domains: need 0 < resolution < period/4");
  detail::require(extent >= period, "make_striped_domains: extent must cover one period");
  detail::require(smoothing >= 0 && std::isfinite(sigma0), "make_striped_domains: invalid smoothing");

  const auto n = static_cast<Eigen::Index>(std::llround(extent / resolution));
  const double d = extent / static_cast<double>(n);
  const double start = -0.5 * extent + 0.5 * d;
  const double half = 0.5 * period;

  Eigen::ArrayXd column(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = start + static_cast<double>(i) * d;
    if (smoothing > 0) {
      column(i) = smoothed_square_wave(x, half, smoothing);
    } else if (const double k0 = std::floor((x - 0.5 * d) / half); k0 == std::floor((x + 0.5 * d) / half)) {
      column(i) = std::fmod(std::abs(k0), 2.0) == 0.0 ? 1.0 : -1.0;
    } else {
      // Cell average, so cells straddling a wall carry the right net charge.
      column(i) = (square_wave_integral(x + 0.5 * d, half) - square_wave_integral(x - 0.5 * d, half)) / d;
    }
  }
  Eigen::ArrayXXd sigma = (sigma0 * column).replicate(1, n);
  return ChargeMap(d, d, start, start, std::move(sigma));
}

ChargeMap make_line_defect(double lambda, double resolution, double extent) {
  return make_line_defect(lambda, resolution, extent, resolution, extent);
}

ChargeMap make_line_defect(double lambda, double resolution, double extent, double y_resolution,
                           double y_extent) {
  detail::require(resolution > 0 && extent > 10 * resolution,
                  "make_line_defect: need resolution > 0 and extent > 10*resolution");
  detail::require(y_resolution > 0 && y_extent >= 2 * y_resolution,
                  "make_line_defect: invalid y geometry");
  detail::require(std::isfinite(lambda), "make_line_defect: lambda must be finite");
  Eigen::Index nx = static_cast<Eigen::Index>(std::llround(extent / resolution));
  if (nx % 2 != 0) ++nx;
  const auto ny = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::llround(y_extent / y_resolution)));
  Eigen::ArrayXXd sigma = Eigen::ArrayXXd::Zero(nx, ny);
  sigma.row(nx / 2).setConstant(lambda / resolution);
  const double x0 = -static_cast<double>(nx / 2) * resolution;
  const double y0 = -0.5 * static_cast<double>(ny - 1) * y_resolution;
  return ChargeMap(resolution, y_resolution, x0, y0, std::move(sigma));
}

}  // namespace nvgrad
