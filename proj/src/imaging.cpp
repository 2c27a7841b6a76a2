#include "nvgrad/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nvgrad/parallel.hpp"

namespace nvgrad {

std::string to_string(ScanMode mode) { return mode == ScanMode::intermittent ? "intermittent" : "shear_x"; }

ScanMode parse_scan_mode(const std::string& name) {
  if (name == "intermittent") return ScanMode::intermittent;
  if (name == "shear_x" || name == "shear") return ScanMode::shear_x;
  throw DomainError("unknown scan mode '" + name + "'");
}

std::string to_string(ScanOutput output) { return output == ScanOutput::e_ac ? "e_ac" : "phase"; }

ScanOutput parse_scan_output(const std::string& name) {
  if (name == "e_ac") return ScanOutput::e_ac;
  if (name == "phase") return ScanOutput::phase;
  throw DomainError("unknown scan output '" + name + "'");
}

ScanGrid ScanGrid::centered(double extent, Eigen::Index pixels, double cx, double cy) {
  detail::require(extent > 0 && pixels >= 2, "ScanGrid: need a positive extent and >= 2 pixels");
  ScanGrid g;
  g.nx = g.ny = pixels;
  g.pitch = extent / static_cast<double>(pixels);
  g.x0 = cx - 0.5 * extent + 0.5 * g.pitch;
  g.y0 = cy - 0.5 * extent + 0.5 * g.pitch;
  return g;
}

void ScanGrid::validate() const {
  detail::require(nx >= 1 && ny >= 1, "ScanGrid: empty grid");
  detail::require(std::isfinite(pitch) && pitch > 0, "ScanGrid: pitch must be positive");
  detail::require(std::isfinite(x0) && std::isfinite(y0), "ScanGrid: origin must be finite");
}

OscillationSpec ScanSettings::oscillation_at(double x, double y) const {
  OscillationSpec spec;
  spec.axis = mode == ScanMode::intermittent ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  spec.amplitude = amplitude;
  spec.frequency = timing.frequency;
  spec.phase = 0.0;
  spec.center = Eigen::Vector3d(x, y, z_nv);
  return spec;
}

void ScanSettings::validate() const {
  params.validate();
  timing.validate();
  detail::require(std::isfinite(z_nv) && z_nv > 0, "scan: z_nv must be positive");
  detail::require(std::isfinite(amplitude) && amplitude >= 0, "scan: amplitude must be >= 0");
  detail::require(n_samples >= 64, "scan: n_samples must be at least 64");
  if (mode == ScanMode::intermittent)
    detail::require(amplitude < z_nv, "intermittent contact: amplitude must be smaller than z_nv");
}

void ScanImage::validate() const {
  grid.validate();
  detail::require(values.rows() == grid.nx && values.cols() == grid.ny, "ScanImage: size mismatch");
  detail::require(values.allFinite(), "ScanImage: non-finite values");
  if (meta.mode == ScanMode::intermittent)
    detail::require(meta.amplitude < meta.z_nv, "ScanImage: amplitude must be below z_nv in intermittent mode");
}

// ---------------------------------------------------------------------------
// Scans

ScanImage simulate_scan(const FieldSampler& sampler, const ScanSettings& settings, const ScanGrid& grid) {
  settings.validate();
  grid.validate();
  const ScanSettings s = resolve_bias(sampler, settings, grid.center_x(), grid.center_y());

  ScanImage image;
  image.grid = grid;
  image.values.resize(grid.nx, grid.ny);
  const auto n = static_cast<std::size_t>(grid.nx * grid.ny);
  parallel_for(n, [&](std::size_t idx) {
    const auto i = static_cast<Eigen::Index>(idx) % grid.nx;
    const auto j = static_cast<Eigen::Index>(idx) / grid.nx;
    image.values(i, j) = pixel_signal(sampler, s, grid.x(i), grid.y(j));
  });
  if (!image.values.allFinite()) throw NumericError("simulate_scan: non-finite pixel values");
  image.meta = {s.mode, s.z_nv, s.amplitude, s.projection, s.output, s.params.bias_azimuth};
  return image;
}

ScanImage simulate_scan(const ChargeMap& charge, const ScanSettings& settings, const ScanGrid& grid,
                        FieldConvention convention) {
  settings.validate();
  grid.validate();
  const double lx = charge.x_max() - charge.x0();
  const double ly = charge.y_max() - charge.y0();
  const double reach_x = settings.mode == ScanMode::shear_x ? settings.amplitude : 0.0;
  const double tol = 1e-9 * std::max(lx, ly);
  const bool inside = grid.x0 - reach_x >= charge.x0() + 0.25 * lx - tol &&
                      grid.x(grid.nx - 1) + reach_x <= charge.x_max() - 0.25 * lx + tol &&
                      grid.y0 >= charge.y0() + 0.25 * ly - tol &&
                      grid.y(grid.ny - 1) <= charge.y_max() - 0.25 * ly + tol;
  detail::require(inside, "simulate_scan: scan grid must keep a 25% margin from the charge-map edges");

  const FieldSampler sampler =
      settings.mode == ScanMode::intermittent
          ? fourier_stray_field(charge, settings.z_nv - settings.amplitude,
                                settings.z_nv + settings.amplitude, convention)
          : fourier_stray_field(charge, settings.z_nv, convention);
  return simulate_scan(sampler, settings, grid);
}

LineProfile simulate_line(const FieldSampler& sampler, const ScanSettings& settings,
                          const Eigen::VectorXd& x, double y) {
  settings.validate();
  detail::require(x.size() >= 2, "simulate_line: need at least two positions");
  const ScanSettings s = resolve_bias(sampler, settings, 0.5 * (x(0) + x(x.size() - 1)), y);
  LineProfile p;
  p.position = x;
  p.value.resize(x.size());
  p.unit = s.output == ScanOutput::phase ? "rad" : "V/m";
  parallel_for(static_cast<std::size_t>(x.size()), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    p.value(i) = pixel_signal(sampler, s, x(i), y);
  });
  return p;
}

// ---------------------------------------------------------------------------
// Profiles

void LineProfile::validate() const {
  detail::require(position.size() == value.size(), "LineProfile: size mismatch");
  detail::require(position.size() >= 3, "LineProfile: need at least three samples");
  detail::require(position.allFinite() && value.allFinite(), "LineProfile: non-finite samples");
  for (Eigen::Index i = 1; i < position.size(); ++i)
    detail::require(position(i) > position(i - 1), "LineProfile: positions must increase");
}

Table LineProfile::to_table() const {
  Table t{{"position", "signal"}, {"m", unit}, Eigen::MatrixXd(position.size(), 2)};
  t.data.col(0) = position;
  t.data.col(1) = value;
  return t;
}

LineProfile LineProfile::from_table(const Table& table) {
  LineProfile p;
  p.position = table.column("position");
  const auto idx = table.column_index("signal");
  p.value = table.data.col(idx);
  if (static_cast<std::size_t>(idx) < table.units.size()) p.unit = table.units[static_cast<std::size_t>(idx)];
  p.validate();
  return p;
}

LineProfile extract_profile(const ScanImage& image, Axis axis, double position) {
  image.validate();
  const ScanGrid& g = image.grid;
  const bool along_x = axis == Axis::x;
  const Eigen::Index n_across = along_x ? g.ny : g.nx;
  const Eigen::Index n_along = along_x ? g.nx : g.ny;
  const double origin = along_x ? g.y0 : g.x0;
  const double f = (position - origin) / g.pitch;
  const double last = static_cast<double>(n_across - 1);
  detail::require(f >= -1e-9 && f <= last + 1e-9, "extract_profile: position outside the image");
  const double fc = std::clamp(f, 0.0, last);
  const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(fc), std::max<Eigen::Index>(n_across - 2, 0));
  const double t = n_across > 1 ? fc - static_cast<double>(k) : 0.0;

  LineProfile p;
  p.unit = image.unit();
  p.position.resize(n_along);
  p.value.resize(n_along);
  for (Eigen::Index m = 0; m < n_along; ++m) {
    p.position(m) = along_x ? g.x(m) : g.y(m);
    const double a = along_x ? image.values(m, k) : image.values(k, m);
    if (t == 0.0) {
      p.value(m) = a;
    } else {
      const double b = along_x ? image.values(m, k + 1) : image.values(k + 1, m);
      p.value(m) = (1.0 - t) * a + t * b;
    }
  }
  return p;
}

namespace {

struct Run {
  Eigen::Index begin, end;  // inclusive
  int direction;            // +1 rising, -1 falling
};

/// Maximal non-strict monotone runs in both directions (plateaus belong to both).
std::vector<Run> monotone_runs(const Eigen::VectorXd& v) {
  std::vector<Run> runs;
  const Eigen::Index n = v.size();
  for (int dir : {+1, -1}) {
    Eigen::Index s = 0;
    while (s < n - 1) {
      Eigen::Index e = s;
      while (e + 1 < n && dir * (v(e + 1) - v(e)) >= 0.0) ++e;
      if (e > s) runs.push_back({s, e, dir});
      s = e + 1;
    }
  }
  return runs;
}

/// 10-90 width of one monotone run, levels taken from the run's own range.
double run_width_10_90(const LineProfile& p, const Run& r) {
  auto w = [&](Eigen::Index i) { return r.direction * p.value(i); };
  const double lo = w(r.begin), hi = w(r.end);
  auto crossing = [&](double level) {
    for (Eigen::Index k = r.begin; k <= r.end; ++k) {
      if (w(k) >= level) {
        if (k == r.begin) return p.position(k);
        const double t = (level - w(k - 1)) / (w(k) - w(k - 1));
        return p.position(k - 1) + t * (p.position(k) - p.position(k - 1));
      }
    }
    return p.position(r.end);
  };
  return std::abs(crossing(lo + 0.9 * (hi - lo)) - crossing(lo + 0.1 * (hi - lo)));
}

double max_abs_slope(const LineProfile& p, const Run& r) {
  double best = 0.0;
  for (Eigen::Index k = r.begin; k < r.end; ++k)
    best = std::max(best, std::abs((p.value(k + 1) - p.value(k)) / (p.position(k + 1) - p.position(k))));
  return best;
}

}  // namespace

double edge_width_10_90(const LineProfile& profile) {
  profile.validate();
  const Eigen::VectorXd& v = profile.value;
  const double vmin = v.minCoeff(), vmax = v.maxCoeff();
  if (!(vmax > vmin)) throw DomainError("edge_width_10_90: flat profile, no transition");

  const Run* best = nullptr;
  double best_slope = -1.0;
  const auto runs = monotone_runs(v);
  for (const Run& r : runs) {
    const auto seg = v.segment(r.begin, r.end - r.begin + 1);
    if (seg.minCoeff() != vmin || seg.maxCoeff() != vmax) continue;
    const double slope = max_abs_slope(profile, r);
    if (slope > best_slope) {
      best_slope = slope;
      best = &r;
    }
  }
  if (!best) throw DomainError("edge_width_10_90: no monotone segment joins the global extremes");
  return run_width_10_90(profile, *best);
}

double fwhm(const LineProfile& profile) {
  profile.validate();
  const Eigen::VectorXd& v = profile.value;
  const Eigen::Index n = v.size();
  const Eigen::Index outer = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::lround(0.05 * n)));
  std::vector<double> edge;
  for (Eigen::Index i = 0; i < outer; ++i) {
    edge.push_back(v(i));
    edge.push_back(v(n - 1 - i));
  }
  std::sort(edge.begin(), edge.end());
  const std::size_t m = edge.size();
  const double baseline = m % 2 ? edge[m / 2] : 0.5 * (edge[m / 2 - 1] + edge[m / 2]);

  const Eigen::VectorXd d = v.array() - baseline;
  Eigen::Index peak = 0;
  d.cwiseAbs().maxCoeff(&peak);
  const double sign = d(peak) >= 0 ? 1.0 : -1.0;
  const double height = std::abs(d(peak));
  if (!(height > 1e-12 * v.cwiseAbs().maxCoeff()) || height == 0.0)
    throw DomainError("fwhm: profile is baseline dominated");
  const double half = 0.5 * height;
  auto h = [&](Eigen::Index i) { return sign * d(i); };

  Eigen::Index kl = peak;
  while (kl >= 0 && h(kl) > half) --kl;
  Eigen::Index kr = peak;
  while (kr < n && h(kr) > half) ++kr;
  if (kl < 0 || kr >= n) throw DomainError("fwhm: half maximum not reached inside the window");
  for (Eigen::Index i = 0; i < n; ++i)
    if ((i < kl || i > kr) && h(i) > half) throw DomainError("fwhm: profile is multi-peaked");

  auto cross = [&](Eigen::Index below, Eigen::Index above) {
    const double t = (half - h(below)) / (h(above) - h(below));
    return profile.position(below) + t * (profile.position(above) - profile.position(below));
  };
  return cross(kr, kr - 1) - cross(kl, kl + 1);
}

double shear_sharpest_transition_width(const LineProfile& profile) {
  profile.validate();
  const Eigen::VectorXd& v = profile.value;
  const double range = v.maxCoeff() - v.minCoeff();
  double best = std::numeric_limits<double>::infinity();
  if (range > 0) {
    for (const Run& r : monotone_runs(v)) {
      if (r.end - r.begin + 1 < 3) continue;
      if (std::abs(v(r.end) - v(r.begin)) < 1e-6 * range) continue;
      best = std::min(best, run_width_10_90(profile, r));
    }
  }
  if (!std::isfinite(best)) throw DomainError("shear_sharpest_transition_width: no monotone transition");
  return best;
}

ResolutionReport resolution_report(const LineProfile& profile, ScanMode mode) {
  ResolutionReport rep;
  rep.profile = profile;
  rep.edge_width_10_90 = edge_width_10_90(profile);
  rep.notes = "edge_width_10_90: 10-90% crossings on the monotone segment joining the global extremes";
  try {
    rep.fwhm = fwhm(profile);
    rep.notes += "; fwhm: half maximum above the median of the outer 10% of samples";
  } catch (const DomainError& e) {
    rep.notes += std::string("; fwhm not defined (") + e.what() + ")";
  }
  if (mode == ScanMode::shear_x) {
    rep.shear_sharpest_width = shear_sharpest_transition_width(profile);
    rep.notes += "; shear_sharpest_width: narrowest 10-90% width over maximal monotone runs";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Point spread function

namespace {

constexpr double kPsfLineDensity = 1e-10;  // C/m; widths do not depend on it

ScanSettings psf_settings(double z_nv, double amplitude, ScanMode mode, const PsfOptions& o) {
  ScanSettings s;
  s.params = o.params;
  s.mode = mode;
  s.z_nv = z_nv;
  s.amplitude = amplitude;
  s.projection = o.projection;
  s.n_samples = o.n_samples;
  s.output = ScanOutput::e_ac;
  return s;
}

Eigen::VectorXd psf_positions(double z_nv, const PsfOptions& o) {
  detail::require(o.n_points >= 512, "psf: at least 512 points");
  detail::require(o.window > 0, "psf: window must be positive");
  return Eigen::VectorXd::LinSpaced(o.n_points, -o.window * z_nv, o.window * z_nv);
}

}  // namespace

LineProfile psf_delta_line(double z_nv, double amplitude, ScanMode mode, const PsfOptions& options) {
  const ScanSettings s = psf_settings(z_nv, amplitude, mode, options);
  s.validate();
  const FieldSampler line = FieldSampler::line_charge(kPsfLineDensity, options.convention);
  return simulate_line(line, s, psf_positions(z_nv, options), 0.0);
}

LineProfile psf_delta_line_grid(double z_nv, double amplitude, ScanMode mode, double pitch,
                                const PsfOptions& options) {
  const ScanSettings s = psf_settings(z_nv, amplitude, mode, options);
  s.validate();
  detail::require(pitch > 0, "psf_delta_line_grid: pitch must be positive");
  // The lateral window covers half the map; y is coarse but long so the line looks infinite.
  const double extent = 4.0 * options.window * z_nv;
  const ChargeMap map = make_line_defect(kPsfLineDensity, pitch, extent, 2.0 * z_nv, 400.0 * z_nv);
  const FieldSampler sampler = mode == ScanMode::intermittent
                                   ? fourier_stray_field(map, z_nv - amplitude, z_nv + amplitude,
                                                         options.convention)
                                   : fourier_stray_field(map, z_nv, options.convention);
  return simulate_line(sampler, s, psf_positions(z_nv, options), 0.0);
}

double mode_width(const LineProfile& profile, ScanMode mode) {
  return mode == ScanMode::intermittent ? edge_width_10_90(profile)
                                        : shear_sharpest_transition_width(profile);
}

Table ResolutionMap::to_table() const {
  const Eigen::Index nz = z_values.size(), na = a_values.size();
  Table t{{"z_nv", "amplitude", "width", "masked"}, {"m", "m", "m", "1"}, Eigen::MatrixXd(nz * na, 4)};
  for (Eigen::Index iz = 0; iz < nz; ++iz)
    for (Eigen::Index ia = 0; ia < na; ++ia) {
      const Eigen::Index r = iz * na + ia;
      t.data.row(r) << z_values(iz), a_values(ia), width(iz, ia), mask(iz, ia) ? 1.0 : 0.0;
    }
  return t;
}

ResolutionMap resolution_map(ScanMode mode, const Eigen::VectorXd& z_values,
                             const Eigen::VectorXd& a_values, const PsfOptions& options) {
  detail::require(z_values.size() > 0 && a_values.size() > 0, "resolution_map: empty grid");
  detail::require((z_values.array() > 0).all() && (a_values.array() > 0).all(),
                  "resolution_map: distances and amplitudes must be positive");
  ResolutionMap map;
  map.mode = mode;
  map.z_values = z_values;
  map.a_values = a_values;
  const Eigen::Index nz = z_values.size(), na = a_values.size();
  map.width = Eigen::MatrixXd::Constant(nz, na, std::numeric_limits<double>::quiet_NaN());
  map.mask.setConstant(nz, na, false);
  for (Eigen::Index iz = 0; iz < nz; ++iz)
    for (Eigen::Index ia = 0; ia < na; ++ia)
      map.mask(iz, ia) = mode == ScanMode::intermittent && a_values(ia) >= z_values(iz);

  // Cells run serially here; each PSF is already parallel over positions.
  for (Eigen::Index iz = 0; iz < nz; ++iz)
    for (Eigen::Index ia = 0; ia < na; ++ia) {
      if (map.mask(iz, ia)) continue;
      map.width(iz, ia) = mode_width(psf_delta_line(z_values(iz), a_values(ia), mode, options), mode);
    }
  return map;
}

double autocorrelation_period(const LineProfile& profile) {
  profile.validate();
  const Eigen::Index n = profile.value.size();
  const Eigen::VectorXd v = profile.value.array() - profile.value.mean();
  const double pitch = profile.span() / static_cast<double>(n - 1);
  const Eigen::Index max_lag = (3 * n) / 4;
  Eigen::VectorXd r(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag; ++k)
    r(k) = v.head(n - k).dot(v.tail(n - k)) / static_cast<double>(n - k);
  if (!(r(0) > 0)) throw DomainError("autocorrelation_period: flat profile");

  Eigen::Index k = 1;
  while (k <= max_lag && r(k) >= 0) ++k;
  if (k > max_lag) throw DomainError("autocorrelation_period: no negative lobe within the window");
  Eigen::Index best = -1;
  for (Eigen::Index m = k + 1; m < max_lag; ++m)
    if (r(m) >= r(m - 1) && r(m) >= r(m + 1) && (best < 0 || r(m) > r(best))) best = m;
  if (best < 0) throw DomainError("autocorrelation_period: no peak after the first negative lobe");

  const double a = r(best - 1), b = r(best), c = r(best + 1);
  const double denom = a - 2.0 * b + c;
  const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return (static_cast<double>(best) + shift) * pitch;
}

}  // namespace nvgrad
