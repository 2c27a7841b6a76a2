#include "nvgrad/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "nvgrad/rng.hpp"

namespace nvgrad {

namespace {
const double kSqrtHalfPi = std::sqrt(kPi / 2.0);
}

// ---------------------------------------------------------------------------
// GaussianProfile

double GaussianProfile::peak_height() const { return intensity / (width * kSqrtHalfPi); }

double GaussianProfile::operator()(double z) const {
  const double u = (z - center) / width;
  return background + peak_height() * std::exp(-2.0 * u * u);
}

Eigen::VectorXd GaussianProfile::operator()(const Eigen::VectorXd& z) const {
  return z.unaryExpr([this](double v) { return (*this)(v); });
}

void GaussianProfile::validate() const {
  detail::require(width > 0 && std::isfinite(width), "GaussianProfile: width must be positive");
  detail::require(intensity > 0 && std::isfinite(intensity), "GaussianProfile: intensity must be positive");
  detail::require(background >= 0 && std::isfinite(background), "GaussianProfile: background must be >= 0");
  detail::require(std::isfinite(center), "GaussianProfile: centre must be finite");
}

GaussianFit fit_gaussian_profile(const Eigen::VectorXd& z, const Eigen::VectorXd& counts) {
  detail::require(z.size() == counts.size(), "fit_gaussian_profile: size mismatch");
  detail::require(z.size() >= 8, "fit_gaussian_profile: need at least 8 samples");
  detail::require(z.allFinite() && counts.allFinite(), "fit_gaussian_profile: non-finite samples");

  const double c_max = counts.maxCoeff();
  const double c_min = counts.minCoeff();
  if (!(c_max - c_min > 1e-9 * std::max(std::abs(c_max), 1e-300)))
    throw NumericError("fit_gaussian_profile: degenerate (flat) data");

  // Work in normalised coordinates so the solver sees O(1) parameters.
  const double z_mid = 0.5 * (z.maxCoeff() + z.minCoeff());
  const double z_scale = 0.5 * (z.maxCoeff() - z.minCoeff());
  detail::require(z_scale > 0, "fit_gaussian_profile: samples must span a range");
  const Eigen::VectorXd zn = (z.array() - z_mid) / z_scale;
  const Eigen::VectorXd cn = counts / c_max;

  // Start: s0 = min, z0 = argmax, w from the empirical half width, s from the peak.
  Eigen::Index imax = 0;
  cn.maxCoeff(&imax);
  const double s0 = c_min / c_max;
  const double peak = cn(imax) - s0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(zn.size()));
  for (Eigen::Index i = 0; i < zn.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return zn(a) < zn(b); });
  const auto pos = std::find(order.begin(), order.end(), imax) - order.begin();
  auto crossing = [&](int dir) {
    for (auto k = pos; k + dir >= 0 && k + dir < static_cast<long>(order.size()); k += dir) {
      const auto a = order[static_cast<std::size_t>(k)];
      const auto b = order[static_cast<std::size_t>(k + dir)];
      const double va = cn(a) - s0, vb = cn(b) - s0;
      if (vb <= 0.5 * peak) return zn(a) + (0.5 * peak - va) / (vb - va) * (zn(b) - zn(a));
    }
    return zn(order[static_cast<std::size_t>(dir > 0 ? order.size() - 1 : 0)]);
  };
  const double fwhm = std::max(crossing(+1) - crossing(-1), 1e-6);
  const double w = fwhm / std::sqrt(2.0 * std::log(2.0));
  Eigen::Vector4d p0(s0, peak * w * kSqrtHalfPi, w, zn(imax));

  auto residuals = [&](const Eigen::VectorXd& p) {
    const GaussianProfile g{p(0), p(1), p(2), p(3)};
    if (!(p(2) > 0)) return Eigen::VectorXd::Constant(zn.size(), 1e100).eval();
    return (g(zn) - cn).eval();
  };
  auto jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(zn.size(), 4);
    const double norm = 1.0 / (p(2) * kSqrtHalfPi);
    const double height = p(1) * norm;
    for (Eigen::Index i = 0; i < zn.size(); ++i) {
      const double u = (zn(i) - p(3)) / p(2);
      const double g = std::exp(-2.0 * u * u);
      j(i, 0) = 1.0;
      j(i, 1) = norm * g;
      j(i, 2) = height * g * (4.0 * u * u - 1.0) / p(2);
      j(i, 3) = height * g * 4.0 * u / p(2);
    }
    return j;
  };

  const LeastSquaresResult fit = levenberg_marquardt(residuals, jacobian, Eigen::VectorXd(p0));
  const Eigen::VectorXd& p = fit.params;

  GaussianFit out;
  out.profile = {p(0) * c_max, p(1) * c_max * z_scale, std::abs(p(2)) * z_scale,
                 p(3) * z_scale + z_mid};
  const Eigen::Vector4d unscale(c_max, c_max * z_scale, z_scale, z_scale);
  out.standard_errors = fit.standard_errors().cwiseProduct(unscale);
  out.rms_residual = std::sqrt(fit.rss / static_cast<double>(zn.size())) * c_max;
  out.iterations = fit.iterations;

  if (!(out.profile.intensity > 0 && out.profile.width > 0))
    throw NumericError("fit_gaussian_profile: fit converged to a non-peak");
  if (!(z.minCoeff() < out.profile.center - out.profile.width &&
        z.maxCoeff() > out.profile.center + out.profile.width))
    throw DomainError("fit_gaussian_profile: samples must extend beyond one width on each side");
  return out;
}

HalfMaximumPoint half_maximum_point(const GaussianProfile& profile, Side side) {
  profile.validate();
  const double offset = profile.width * std::sqrt(std::log(2.0) / 2.0);
  const double u = side == Side::left ? -offset : offset;
  const double peak = profile.peak_height();
  HalfMaximumPoint h;
  h.z_half = profile.center + u;
  h.slope = -2.0 * peak * u / (profile.width * profile.width);
  h.height = profile.background + 0.5 * peak;
  return h;
}

double solve_amplitude(double h_max, double h_min, double slope, double z0, double s0) {
  detail::require(h_min > 0, "solve_amplitude: h_min must be positive");
  detail::require(slope != 0.0, "solve_amplitude: zero gradient, amplitude unobservable");
  const double r = h_max / h_min;
  return std::abs((r - 1.0) * (slope * z0 + s0) / (slope * (r + 1.0)));
}

// ---------------------------------------------------------------------------
// Photon traces

void PhotonTrace::validate() const {
  detail::require(times.size() == counts.size() && times.size() >= 4, "PhotonTrace: need matching times/counts");
  detail::require(frequency > 0, "PhotonTrace: frequency must be positive");
  for (Eigen::Index i = 1; i < times.size(); ++i)
    detail::require(times(i) > times(i - 1), "PhotonTrace: times must be strictly increasing");
  detail::require((counts.array() >= 0).all(), "PhotonTrace: counts must be non-negative");
}

Table PhotonTrace::to_table() const {
  Table t{{"time", "counts"}, {"s", "counts"}, Eigen::MatrixXd(times.size(), 2)};
  t.data.col(0) = times;
  t.data.col(1) = counts;
  return t;
}

PhotonTrace PhotonTrace::from_table(const Table& table, double frequency) {
  PhotonTrace tr{table.column("time"), table.column("counts"), frequency};
  tr.validate();
  return tr;
}

TraceFit fit_photon_trace(const PhotonTrace& trace) {
  trace.validate();
  const Eigen::Index n = trace.times.size();
  const double dt = (trace.times(n - 1) - trace.times(0)) / static_cast<double>(n - 1);
  const double span_periods = (trace.times(n - 1) - trace.times(0) + dt) * trace.frequency;
  detail::require(span_periods >= 3.0 - 1e-9, "fit_photon_trace: trace must span at least 3 periods");

  Eigen::MatrixXd design(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wt = kTwoPi * trace.frequency * trace.times(i);
    design(i, 0) = 1.0;
    design(i, 1) = std::sin(wt);
    design(i, 2) = std::cos(wt);
  }
  const Eigen::Vector3d c = design.colPivHouseholderQr().solve(trace.counts);
  TraceFit fit;
  fit.offset = c(0);
  fit.amplitude = std::hypot(c(1), c(2));
  fit.phase = std::atan2(c(2), c(1));
  fit.h_max = c(0) + fit.amplitude;
  fit.h_min = c(0) - fit.amplitude;
  fit.negative_minimum = fit.h_min < 0;
  return fit;
}

LineFit fit_amplitude_vs_voltage(const Eigen::VectorXd& drive, const Eigen::VectorXd& amplitude) {
  detail::require(drive.size() == amplitude.size(), "fit_amplitude_vs_voltage: size mismatch");
  detail::require(drive.size() >= 3, "fit_amplitude_vs_voltage: need at least 3 points");
  const auto n = static_cast<double>(drive.size());
  const double mx = drive.mean(), my = amplitude.mean();
  const Eigen::ArrayXd dxv = drive.array() - mx, dyv = amplitude.array() - my;
  const double sxx = dxv.square().sum();
  detail::require(sxx > 0, "fit_amplitude_vs_voltage: drive values must not all be equal");
  LineFit f;
  f.slope = (dxv * dyv).sum() / sxx;
  f.intercept = my - f.slope * mx;
  const double ss_res = (dyv - f.slope * dxv).square().sum();
  const double ss_tot = dyv.square().sum();
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  const double s2 = n > 2 ? ss_res / (n - 2) : 0.0;
  f.slope_error = std::sqrt(s2 / sxx);
  f.intercept_error = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return f;
}

PhotonTrace synthesize_photon_trace(const GaussianProfile& profile, double z_center, double amplitude,
                                    double frequency, double phase, int periods, int bins_per_period) {
  detail::require(periods >= 1 && bins_per_period >= 4, "synthesize_photon_trace: invalid binning");
  detail::require(frequency > 0, "synthesize_photon_trace: frequency must be positive");
  const int n = periods * bins_per_period;
  const double dt = 1.0 / (frequency * bins_per_period);
  PhotonTrace tr{Eigen::VectorXd(n), Eigen::VectorXd(n), frequency};
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * dt;
    tr.times(i) = t;
    tr.counts(i) = profile(z_center + amplitude * std::sin(kTwoPi * frequency * t + phase));
  }
  return tr;
}

Eigen::VectorXd poisson_resample(const Eigen::VectorXd& expected, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd out(expected.size());
  for (Eigen::Index i = 0; i < expected.size(); ++i) out(i) = poisson_sample(expected(i), rng);
  return out;
}

PhotonTrace poisson_resample(const PhotonTrace& trace, double total_counts, std::uint64_t seed) {
  detail::require(total_counts > 0, "poisson_resample: total counts must be positive");
  PhotonTrace out = trace;
  out.counts = poisson_resample(trace.counts * (total_counts / trace.counts.sum()), seed);
  return out;
}

AmplitudeCalibration calibrate_amplitude(const Eigen::VectorXd& profile_z,
                                         const Eigen::VectorXd& profile_counts,
                                         const PhotonTrace& trace, Side side) {
  AmplitudeCalibration cal;
  cal.profile_z = profile_z;
  cal.profile_counts = profile_counts;
  cal.profile_fit = fit_gaussian_profile(profile_z, profile_counts);
  cal.anchor = half_maximum_point(cal.profile_fit.profile, side);
  cal.trace = trace;
  cal.trace_fit = fit_photon_trace(trace);
  // Linear model h = k (z - z_half) + h_half; the oscillation is centred on the
  // anchor, i.e. at z - z_half = 0 in the model's own coordinate.
  cal.amplitude = solve_amplitude(cal.trace_fit.h_max, cal.trace_fit.h_min, cal.anchor.slope, 0.0,
                                  cal.anchor.height);
  return cal;
}

AmplitudeCalibration run_amplitude_calibration(const AmplitudeCalibrationSetup& s) {
  s.truth.validate();
  detail::require(s.profile_points >= 8, "run_amplitude_calibration: need at least 8 profile points");
  const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(
      s.profile_points, s.truth.center - s.profile_half_span * s.truth.width,
      s.truth.center + s.profile_half_span * s.truth.width);
  Eigen::VectorXd counts = s.truth(z);
  if (s.profile_peak_counts) {
    counts *= *s.profile_peak_counts / counts.maxCoeff();
    counts = poisson_resample(counts, derive_seed(s.seed, 1));
  }

  // The sensor is parked at the true half-maximum point of the chosen flank.
  const HalfMaximumPoint park = half_maximum_point(s.truth, s.side);
  PhotonTrace trace = synthesize_photon_trace(s.truth, park.z_half, s.amplitude, s.frequency,
                                              s.phase, s.periods, s.bins_per_period);
  if (s.trace_total_counts) trace = poisson_resample(trace, *s.trace_total_counts, derive_seed(s.seed, 2));
  return calibrate_amplitude(z, counts, trace, s.side);
}

// ---------------------------------------------------------------------------
// Delay sweep

Table DelaySweep::to_table() const {
  Table t{{"tau_w", "P_s_plus", "P_s_minus", "P_c_plus", "P_c_minus"},
          {"s", "1", "1", "1", "1"},
          Eigen::MatrixXd(tau_w.size(), 5)};
  t.data << tau_w, s_plus, s_minus, c_plus, c_minus;
  return t;
}

DelaySweep DelaySweep::from_table(const Table& t) {
  return {t.column("tau_w"), t.column("P_s_plus"), t.column("P_s_minus"), t.column("P_c_plus"),
          t.column("P_c_minus")};
}

DelaySweep delay_sweep(double e_ac, const NVParams& params, const EchoTiming& timing_base,
                       const Eigen::VectorXd& tau_w_values, double noise_sigma, std::uint64_t seed) {
  detail::require(tau_w_values.size() > 0, "delay_sweep: empty sweep");
  detail::require(noise_sigma >= 0, "delay_sweep: noise must be non-negative");
  timing_base.validate();
  const Eigen::Index n = tau_w_values.size();
  DelaySweep sw{tau_w_values, Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n),
                Eigen::VectorXd(n)};
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
  auto jitter = [&] { return noise_sigma > 0 ? noise(rng) : 0.0; };
  for (Eigen::Index i = 0; i < n; ++i) {
    EchoTiming t = timing_base;
    t.tau_w = tau_w_values(i);
    t.validate();
    const double phi = echo_phase_closed(params.dipole_perp, e_ac, t.frequency, t.tau, t.tau_t());
    const auto p = readout_populations(phi);
    sw.s_plus(i) = p.s_plus + jitter();
    sw.s_minus(i) = p.s_minus + jitter();
    sw.c_plus(i) = p.c_plus + jitter();
    sw.c_minus(i) = p.c_minus + jitter();
  }
  return sw;
}

SweepFit fit_delay_sweep(const DelaySweep& sweep, const NVParams& params,
                         const EchoTiming& timing_base, SweepModel model) {
  timing_base.validate();
  const Eigen::Index n = sweep.tau_w.size();
  detail::require(n >= 8, "fit_delay_sweep: need at least 8 points");
  const double f = timing_base.frequency;
  const double w = kTwoPi * f;
  detail::require((sweep.tau_w.maxCoeff() - sweep.tau_w.minCoeff()) * f >= 0.5,
                  "fit_delay_sweep: sweep must cover at least half a period");

  const bool sine = model == SweepModel::sine;
  const Eigen::VectorXd data = sine ? Eigen::VectorXd(sweep.s_plus - sweep.s_minus)
                                    : Eigen::VectorXd(sweep.c_plus - sweep.c_minus);
  if (!(data.maxCoeff() - data.minCoeff() > 1e-12))
    throw NumericError("fit_delay_sweep: flat data, E_AC and tau_e are unidentifiable");

  // Parameters: peak phase phi_max = K E_AC and timing phase theta = w tau_e.
  const double sin_half = std::sin(kPi * f * timing_base.tau / 2.0);
  const double gain = 4.0 * params.dipole_perp * sin_half * sin_half / f;
  detail::require(gain > 0, "fit_delay_sweep: echo insensitive at this tau (filter zero)");

  auto predict = [&](double phi_max, double theta, Eigen::Index i, double* dphi, double* dtheta) {
    const double arg = theta + w * sweep.tau_w(i);
    const double phi = phi_max * std::cos(arg);
    const double value = sine ? std::sin(phi) : std::cos(phi);
    const double slope = sine ? std::cos(phi) : -std::sin(phi);
    if (dphi) *dphi = slope * std::cos(arg);
    if (dtheta) *dtheta = -slope * phi_max * std::sin(arg);
    return value;
  };

  // Coarse grid start; the model is multimodal in theta.
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d start(1.0, 0.0);
  for (int a = 0; a < 96; ++a) {
    const double theta = kTwoPi * a / 96.0;
    for (int b = 0; b < 80; ++b) {
      const double phi_max = 1e-3 * std::pow(1e4, b / 79.0);
      double rss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = predict(phi_max, theta, i, nullptr, nullptr) - data(i);
        rss += r * r;
      }
      if (rss < best) {
        best = rss;
        start = {phi_max, theta};
      }
    }
  }

  auto residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = predict(p(0), p(1), i, nullptr, nullptr) - data(i);
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) predict(p(0), p(1), i, &j(i, 0), &j(i, 1));
    return j;
  };
  const LeastSquaresResult fit = levenberg_marquardt(residuals, jacobian, Eigen::VectorXd(start));

  double phi_max = fit.params(0);
  double theta = fit.params(1);
  if (phi_max < 0) {
    phi_max = -phi_max;
    theta += kPi;
  }
  const double theta_period = sine ? kTwoPi : kPi;
  theta = std::fmod(theta, theta_period);
  if (theta < 0) theta += theta_period;

  SweepFit out;
  out.e_ac = phi_max / gain;
  out.tau_e = theta / w;
  const Eigen::Vector2d scale(1.0 / gain, 1.0 / w);
  out.covariance = scale.asDiagonal() * fit.covariance * scale.asDiagonal();
  out.e_ac_error = std::sqrt(out.covariance(0, 0));
  out.tau_e_error = std::sqrt(out.covariance(1, 1));
  out.rss = fit.rss;
  return out;
}

}  // namespace nvgrad
