#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <memory>
#include <string>
#include <variant>

#include "nvgrad/constants.hpp"
#include "nvgrad/error.hpp"

namespace nvgrad {

/// Prefactor convention for stray-field evaluation.
///
/// `textbook` is standard electrostatics (a line charge gives lambda/(2 pi eps0 r)).
/// `paper` reproduces the published figure normalisation, which is the textbook
/// field multiplied by -1/(2 pi). Every width metric is invariant under the choice.
enum class FieldConvention { paper, textbook };

template <typename Scalar = double>
constexpr Scalar convention_scale(FieldConvention convention) {
  return convention == FieldConvention::paper ? Scalar(-1) / Scalar(kTwoPi) : Scalar(1);
}

std::string to_string(FieldConvention convention);
FieldConvention parse_convention(const std::string& name);

/// Surface charge density sampled on a regular grid in the z = 0 plane.
///
/// `sigma(i, j)` is the density (C/m^2) of the cell centred at (x(i), y(j)).
class ChargeMap {
 public:
  ChargeMap(double dx, double dy, double x0, double y0, Eigen::ArrayXXd sigma);

  Eigen::Index nx() const { return sigma_.rows(); }
  Eigen::Index ny() const { return sigma_.cols(); }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double x(Eigen::Index i) const { return x0_ + static_cast<double>(i) * dx_; }
  double y(Eigen::Index j) const { return y0_ + static_cast<double>(j) * dy_; }
  double x_max() const { return x(nx() - 1); }
  double y_max() const { return y(ny() - 1); }
  double cell_area() const { return dx_ * dy_; }
  const Eigen::ArrayXXd& sigma() const { return sigma_; }

  ChargeMap shifted(double a, double b) const;
  ChargeMap with_sigma(Eigen::ArrayXXd sigma) const;
  bool same_geometry(const ChargeMap& other) const;

 private:
  double dx_, dy_, x0_, y0_;
  Eigen::ArrayXXd sigma_;
};

ChargeMap operator+(const ChargeMap& a, const ChargeMap& b);

namespace detail {
struct UniformField {
  Eigen::Vector3d value;
};
struct LineChargeField {
  double lambda;
  double x_line;
  FieldConvention convention;
};
struct CoulombField {
  std::shared_ptr<const ChargeMap> charge;
};
struct FourierGridData;
struct FourierGridField {
  std::shared_ptr<const FourierGridData> data;
};
}  // namespace detail

/// Electric field above the sample surface.
///
/// Immutable after construction; copies share the underlying grids and may be
/// evaluated concurrently.
class FieldSampler {
 public:
  enum class Kind { fourier_grid, analytic_line_charge, coulomb_oracle, uniform };

  static FieldSampler uniform(const Eigen::Vector3d& field);
  /// Infinite line charge along y through (x_line, *, 0).
  static FieldSampler line_charge(double lambda, FieldConvention convention,
                                  double x_line = 0.0);
  static FieldSampler coulomb(ChargeMap charge);

  Kind kind() const;
  FieldConvention convention() const;

  /// True if `r` lies inside the region the sampler can evaluate.
  bool contains(const Eigen::Vector3d& r) const;

  /// Field (V/m) at `r`; throws DomainError outside `contains`.
  Eigen::Vector3d operator()(const Eigen::Vector3d& r) const;

  /// Height interval covered by a Fourier grid sampler (equal ends for a single plane).
  std::pair<double, double> height_range() const;

 private:
  using Variant = std::variant<detail::UniformField, detail::LineChargeField,
                               detail::CoulombField, detail::FourierGridField>;
  explicit FieldSampler(Variant v) : impl_(std::move(v)) {}
  Variant impl_;

  friend FieldSampler fourier_stray_field(const ChargeMap&, double, double, FieldConvention, int);
};

/// Stray field on the plane at height z by Fourier propagation of the charge map.
FieldSampler fourier_stray_field(const ChargeMap& charge, double z,
                                 FieldConvention convention = FieldConvention::paper);

/// Stray field over the slab z_min <= z <= z_max: planes at Chebyshev heights,
/// interpolated in z. `n_levels <= 0` picks a level count from the slab geometry.
FieldSampler fourier_stray_field(const ChargeMap& charge, double z_min, double z_max,
                                 FieldConvention convention, int n_levels = 0);

/// Field (E_x, 0, E_z) of an infinite line charge along y at lateral offset x and height z.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> analytic_line_charge_field(Scalar x, Scalar z, Scalar lambda,
                                                       FieldConvention convention) {
  if (!(z > Scalar(0))) throw DomainError("analytic_line_charge_field: z must be positive");
  const Scalar r2 = x * x + z * z;
  const Scalar scale =
      convention_scale<Scalar>(convention) * lambda / (Scalar(kTwoPi) * Scalar(kEpsilon0) * r2);
  return {scale * x, Scalar(0), scale * z};
}

/// Direct Coulomb sum treating each cell as a point charge sigma*dx*dy (textbook prefactor).
Eigen::Vector3d coulomb_brute_force(const ChargeMap& charge, const Eigen::Vector3d& point);

/// Antiparallel domains: +sigma0 on [0, period/2), -sigma0 on [period/2, period), ...
/// along x, uniform along y, centred on the origin. `smoothing` is the standard
/// deviation of an optional Gaussian blur (0 disables it).
ChargeMap make_striped_domains(double period, double sigma0, double extent, double resolution,
                               double smoothing = 0.0);

/// Single column of density lambda/dx at x = 0 on a square map.
ChargeMap make_line_defect(double lambda, double resolution, double extent);

/// As above with independent y spacing/extent; useful to make the line long
/// compared with the observation distance without refining y.
ChargeMap make_line_defect(double lambda, double resolution, double extent, double y_resolution,
                           double y_extent);

// Text and raster I/O.
void write_charge_map_text(std::ostream& os, const ChargeMap& map);
ChargeMap read_charge_map_text(std::istream& is);
void write_charge_map_text(const std::string& path, const ChargeMap& map);
ChargeMap read_charge_map_text(const std::string& path);

/// Row-major little-endian float64 raster with a 24-byte header (nx, ny as int64, dx as float64).
void write_raster(std::ostream& os, const Eigen::ArrayXXd& values, double dx);
Eigen::ArrayXXd read_raster(std::istream& is, double* dx = nullptr);
void write_raster(const std::string& path, const Eigen::ArrayXXd& values, double dx);
Eigen::ArrayXXd read_raster(const std::string& path, double* dx = nullptr);

/// Same header layout as the charge-map text format, for arbitrary gridded values.
void write_grid_text(std::ostream& os, const Eigen::ArrayXXd& values, double dx, double dy,
                     double x0, double y0);

}  // namespace nvgrad
