#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

#include "nvgrad/fields.hpp"
#include "nvgrad/probe.hpp"
#include "nvgrad/spin.hpp"
#include "nvgrad/table_io.hpp"

namespace nvgrad {

enum class ScanMode { intermittent, shear_x };
enum class ScanOutput { e_ac, phase };

std::string to_string(ScanMode mode);
ScanMode parse_scan_mode(const std::string& name);
std::string to_string(ScanOutput output);
ScanOutput parse_scan_output(const std::string& name);

/// Pixel centres at (x0 + i * pitch, y0 + j * pitch).
struct ScanGrid {
  Eigen::Index nx = 0, ny = 0;
  double pitch = 0.0;
  double x0 = 0.0, y0 = 0.0;

  /// nx x ny pixels covering a square of side `extent` centred on (cx, cy).
  static ScanGrid centered(double extent, Eigen::Index pixels, double cx = 0.0, double cy = 0.0);

  double x(Eigen::Index i) const { return x0 + static_cast<double>(i) * pitch; }
  double y(Eigen::Index j) const { return y0 + static_cast<double>(j) * pitch; }
  double center_x() const { return x0 + 0.5 * static_cast<double>(nx - 1) * pitch; }
  double center_y() const { return y0 + 0.5 * static_cast<double>(ny - 1) * pitch; }
  void validate() const;
};

/// Everything about the probe that is common to all pixels of a scan.
struct ScanSettings {
  NVParams params;
  ScanMode mode = ScanMode::intermittent;
  double z_nv = 17e-9;
  double amplitude = 0.8e-9;
  EchoTiming timing;  // its frequency is also the oscillation frequency
  ScanOutput output = ScanOutput::e_ac;
  Projection projection = Projection::nv_transverse_cos;
  /// Choose phi_B so that cos(2 phi_B + phi_E) = 1 at the image centre.
  bool align_bias = true;
  int n_samples = 256;

  OscillationSpec oscillation_at(double x, double y) const;
  void validate() const;
};

struct ScanMeta {
  ScanMode mode;
  double z_nv;
  double amplitude;
  Projection projection;
  ScanOutput output;
  double bias_azimuth;  // phi_B actually used, rad
};

struct ScanImage {
  ScanGrid grid;
  Eigen::ArrayXXd values;  // (i, j) = pixel at (x(i), y(j))
  ScanMeta meta;

  std::string unit() const { return meta.output == ScanOutput::phase ? "rad" : "V/m"; }
  void validate() const;
};

/// Settings with the bias azimuth fixed: aligned to the field at the image centre
/// when `align_bias` is set, unchanged otherwise.
template <FieldSource Sampler>
ScanSettings resolve_bias(const Sampler& sampler, ScanSettings settings, double cx, double cy) {
  if (settings.align_bias && settings.projection == Projection::nv_transverse_cos) {
    settings.params = align_bias_azimuth(settings.params, sampler(Eigen::Vector3d(cx, cy, settings.z_nv)));
  }
  settings.align_bias = false;
  return settings;
}

/// Gradiometry signal of one pixel for already resolved settings.
template <FieldSource Sampler>
double pixel_signal(const Sampler& sampler, const ScanSettings& s, double x, double y) {
  const double e_ac =
      ac_harmonic_amplitude(sampler, s.params, s.oscillation_at(x, y), s.projection, s.n_samples).e_ac;
  if (s.output == ScanOutput::e_ac) return e_ac;
  return echo_phase_closed(s.params.dipole_perp, e_ac, s.timing.frequency, s.timing.tau,
                           s.timing.tau_t());
}

/// Image from an arbitrary field sampler; pixels evaluated in parallel.
ScanImage simulate_scan(const FieldSampler& sampler, const ScanSettings& settings,
                        const ScanGrid& grid);

/// Image of a charge map: builds the stray-field sampler over the heights swept by
/// the oscillation. The grid must keep a 25% margin from every map edge.
ScanImage simulate_scan(const ChargeMap& charge, const ScanSettings& settings, const ScanGrid& grid,
                        FieldConvention convention = FieldConvention::paper);

struct LineProfile {
  Eigen::VectorXd position;  // m, strictly increasing
  Eigen::VectorXd value;
  std::string unit = "V/m";

  double span() const { return position(position.size() - 1) - position(0); }
  void validate() const;
  Table to_table() const;
  static LineProfile from_table(const Table& table);
};

enum class Axis { x, y };

/// Profile along `axis` at the perpendicular coordinate `position` (m), linearly
/// interpolated between pixel rows.
LineProfile extract_profile(const ScanImage& image, Axis axis, double position);

/// Signal along a line of pixels; equals the matching row of simulate_scan.
LineProfile simulate_line(const FieldSampler& sampler, const ScanSettings& settings,
                          const Eigen::VectorXd& x, double y);

/// 10-90 % rise distance across the monotone transition between the global extremes.
double edge_width_10_90(const LineProfile& profile);

/// Full width at half maximum of a single-peaked profile above its baseline
/// (median of the outer 10 % of samples).
double fwhm(const LineProfile& profile);

/// Narrowest 10-90 width among the maximal monotone runs (>= 3 samples) of the profile.
double shear_sharpest_transition_width(const LineProfile& profile);

struct ResolutionReport {
  double edge_width_10_90;
  std::optional<double> fwhm;
  std::optional<double> shear_sharpest_width;
  LineProfile profile;
  std::string notes;
};

ResolutionReport resolution_report(const LineProfile& profile, ScanMode mode);

struct PsfOptions {
  NVParams params;
  Projection projection = Projection::nv_transverse_cos;
  FieldConvention convention = FieldConvention::paper;
  int n_points = 1024;
  double window = 10.0;  // half window in units of z_nv
  int n_samples = 256;
};

/// Gradiometry profile across an infinite line charge at x = 0 (analytic field).
LineProfile psf_delta_line(double z_nv, double amplitude, ScanMode mode, const PsfOptions& options = {});

/// Same profile computed with the Fourier solver on a line-defect grid of the given pitch.
LineProfile psf_delta_line_grid(double z_nv, double amplitude, ScanMode mode, double pitch,
                                const PsfOptions& options = {});

/// Width used for a mode: 10-90 edge width (intermittent) or sharpest transition (shear).
double mode_width(const LineProfile& profile, ScanMode mode);

struct ResolutionMap {
  ScanMode mode;
  Eigen::VectorXd z_values;
  Eigen::VectorXd a_values;
  Eigen::MatrixXd width;  // (iz, ia), NaN where masked
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // true = invalid (A >= z, intermittent)

  Table to_table() const;
};

ResolutionMap resolution_map(ScanMode mode, const Eigen::VectorXd& z_values,
                             const Eigen::VectorXd& a_values, const PsfOptions& options = {});

/// Period of the dominant oscillation: location of the highest autocorrelation peak
/// after the first negative lobe, refined by a parabola through the neighbours.
double autocorrelation_period(const LineProfile& profile);

// Scan export: binary raster plus a `key = value` sidecar with the geometry and meta.
void write_scan(const std::string& raster_path, const std::string& header_path, const ScanImage& image);
ScanImage read_scan(const std::string& raster_path, const std::string& header_path);
void write_scan_text(const std::string& path, const ScanImage& image);

}  // namespace nvgrad
