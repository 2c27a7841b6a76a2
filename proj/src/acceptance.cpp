#include "nvgrad/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nvgrad/calibration.hpp"
#include "nvgrad/fields.hpp"
#include "nvgrad/imaging.hpp"
#include "nvgrad/rng.hpp"
#include "nvgrad/spin.hpp"

namespace nvgrad::acceptance {

namespace {

std::string sci(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Times `body`, which fills pass/detail; failures by exception are reported, not thrown.
template <typename Body>
Result timed(int id, std::string title, double budget, Body&& body) {
  Result r;
  r.id = id;
  r.title = std::move(title);
  r.budget = budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > budget) {
    r.pass = false;
    r.detail += "; over the runtime budget";
  }
  return r;
}

}  // namespace

Result closed_form_vs_quadrature() {
  return timed(1, "closed-form vs quadrature echo phase", 5.0, [](Result& r) {
    Rng rng(derive_seed(1, 0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double d = NVParams{}.dipole_perp;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double e = std::pow(10.0, 2.0 + 4.0 * u(rng));
      const double f = std::pow(10.0, 4.0 + 2.0 * u(rng));
      const double tau = (1.0 - u(rng)) * 4.0 / f;
      const double tau_t = u(rng) * 2.0 / f;
      const double closed = echo_phase_closed(d, e, f, tau, tau_t);
      const double numeric = echo_phase_numeric(d, e, f, tau, tau_t, 10000);
      worst = std::max(worst, std::abs(numeric - closed) / std::max(std::abs(closed), 1e-12));
    }
    r.pass = worst < 1e-8;
    r.detail = "max relative difference " + sci(worst) + " over 1000 draws (limit 1e-8)";
  });
}

Result field_solver_cross_check() {
  return timed(2, "Fourier solver and Coulomb sum vs analytic line charge", 30.0, [](Result& r) {
    const double lambda = 1e-10;
    const double z = 30e-9;
    // 1 nm pitch across a 32.8 um window; y is coarse but long.
    const ChargeMap line = make_line_defect(lambda, 1e-9, 32768e-9, 200e-9, 9.6e-6);
    const FieldSampler grid = fourier_stray_field(line, z, FieldConvention::paper);
    double worst_fft = 0.0;
    for (int k = -300; k <= 300; ++k) {
      const double x = k * 1e-9;
      const Eigen::Vector3d ref = analytic_line_charge_field(x, z, lambda, FieldConvention::paper);
      worst_fft = std::max(worst_fft, (grid(Eigen::Vector3d(x, 0.0, z)) - ref).norm() / ref.norm());
    }

    const ChargeMap small = make_line_defect(lambda, 1e-9, 64e-9);
    const double zc = 2e-9;
    double worst_coulomb = 0.0;
    for (int k = -8; k <= 8; ++k) {
      const double x = k * 0.5e-9;
      const Eigen::Vector3d ref = analytic_line_charge_field(x, zc, lambda, FieldConvention::textbook);
      const Eigen::Vector3d sum = coulomb_brute_force(small, Eigen::Vector3d(x, 0.0, zc));
      worst_coulomb = std::max(worst_coulomb, (sum - ref).norm() / ref.norm());
    }
    r.pass = worst_fft < 0.01 && worst_coulomb < 0.02;
    r.detail = "Fourier max rel " + sci(worst_fft) + " over |x| <= 10z (limit 0.01); Coulomb 64x64 max rel " +
               sci(worst_coulomb) + " (limit 0.02)";
  });
}

Result psf_headline_numbers() {
  return timed(3, "PSF: 10 nm edge width near 17 nm, FWHM in [12, 18] nm", 10.0, [](Result& r) {
    const double a = 0.8e-9;
    auto width = [&](double z) { return edge_width_10_90(psf_delta_line(z, a, ScanMode::intermittent)); };
    double lo = 12e-9, hi = 22e-9;
    double w_lo = width(lo) - 10e-9, w_hi = width(hi) - 10e-9;
    if (w_lo * w_hi > 0) {
      r.pass = false;
      r.detail = "edge width does not cross 10 nm on [12, 22] nm (" + sci(w_lo * 1e9 + 10) + ", " +
                 sci(w_hi * 1e9 + 10) + " nm)";
      return;
    }
    double z = 0.5 * (lo + hi), w = width(z) - 10e-9;
    for (int it = 0; it < 40 && std::abs(w) > 1e-13; ++it) {
      if ((w < 0) == (w_lo < 0)) {
        lo = z;
        w_lo = w;
      } else {
        hi = z;
      }
      z = 0.5 * (lo + hi);
      w = width(z) - 10e-9;
    }
    const double full = fwhm(psf_delta_line(z, a, ScanMode::intermittent));
    r.pass = std::abs(w) <= 0.5e-9 && full >= 12e-9 && full <= 18e-9;
    r.detail = "z* = " + sci(z * 1e9, 4) + " nm, edge width " + sci(w * 1e9 + 10, 4) + " nm, FWHM " +
               sci(full * 1e9, 4) + " nm";
  });
}

Result resolution_map_structure() {
  return timed(4, "resolution map mask and monotonicity", 120.0, [](Result& r) {
    Eigen::VectorXd z(10), a(10);
    z << 5, 10, 15, 20, 25, 30, 35, 40, 45, 50;
    a << 1, 3, 5, 8, 12, 16, 20, 25, 30, 40;
    z *= 1e-9;
    a *= 1e-9;
    const ResolutionMap map = resolution_map(ScanMode::intermittent, z, a);
    int mask_errors = 0, order_errors = 0, masked = 0;
    for (Eigen::Index ia = 0; ia < a.size(); ++ia) {
      double previous = -1.0;
      for (Eigen::Index iz = 0; iz < z.size(); ++iz) {
        const bool expect = a(ia) >= z(iz);
        masked += map.mask(iz, ia);
        if (map.mask(iz, ia) != expect || (expect != std::isnan(map.width(iz, ia)))) ++mask_errors;
        if (map.mask(iz, ia)) continue;
        if (previous >= 0 && map.width(iz, ia) < previous) ++order_errors;
        previous = map.width(iz, ia);
      }
    }
    r.pass = mask_errors == 0 && order_errors == 0;
    r.detail = std::to_string(masked) + " cells masked, " + std::to_string(mask_errors) + " mask errors, " +
               std::to_string(order_errors) + " monotonicity violations";
  });
}

Result striped_domain_period() {
  return timed(5, "striped domains: 10 um period from an 18 um scan", 120.0, [](Result& r) {
    const ChargeMap stripes = make_striped_domains(10e-6, 0.71, 36e-6, 50e-9, 200e-9);
    const ScanGrid grid = ScanGrid::centered(18e-6, 128);
    const ScanImage image = simulate_scan(stripes, ScanSettings{}, grid);
    const double period = autocorrelation_period(extract_profile(image, Axis::x, grid.center_y()));
    r.pass = std::abs(period - 10e-6) <= grid.pitch;
    r.detail = "period " + sci(period * 1e6, 5) + " um (pixel pitch " + sci(grid.pitch * 1e9, 4) + " nm)";
  });
}

Result amplitude_round_trip() {
  return timed(6, "amplitude calibration round trip", 30.0, [](Result& r) {
    double worst_clean = 0.0, worst_noisy = 0.0;
    int k = 0;
    for (double a : {0.2e-9, 0.8e-9, 2e-9, 5e-9}) {
      AmplitudeCalibrationSetup s;
      s.amplitude = a;
      worst_clean = std::max(worst_clean, std::abs(run_amplitude_calibration(s).amplitude / a - 1.0));
      s.profile_peak_counts = 1e6;
      s.trace_total_counts = 1e12;
      for (int trial = 0; trial < 20; ++trial) {
        s.seed = derive_seed(6, static_cast<std::uint64_t>(100 * k + trial));
        worst_noisy = std::max(worst_noisy, std::abs(run_amplitude_calibration(s).amplitude / a - 1.0));
      }
      ++k;
    }
    r.pass = worst_clean < 0.02 && worst_noisy < 0.05;
    r.detail = "noiseless max rel error " + sci(worst_clean) + " (limit 0.02); shot noise max rel error " +
               sci(worst_noisy) + " over 80 trials (limit 0.05)";
  });
}

Result delay_sweep_round_trip() {
  return timed(7, "delay-sweep round trip, sine and cosine models", 60.0, [](Result& r) {
    const NVParams params;
    const double e_true = 2.36 * units::kV_per_cm;
    const EchoTiming base = EchoTiming::for_frequency(180e3, 1.3e-6);
    const Eigen::VectorXd delays = Eigen::VectorXd::LinSpaced(41, 0.0, 40.0 / 41.0 / base.frequency);

    const DelaySweep clean = delay_sweep(e_true, params, base, delays);
    const double err_sin = std::abs(fit_delay_sweep(clean, params, base, SweepModel::sine).e_ac / e_true - 1);
    const double err_cos = std::abs(fit_delay_sweep(clean, params, base, SweepModel::cosine).e_ac / e_true - 1);

    const double noise = 0.044;
    int cover_sin = 0, cover_cos = 0;
    double sigma_sin = 0.0, sigma_cos = 0.0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
      const DelaySweep noisy = delay_sweep(e_true, params, base, delays, noise, derive_seed(7, t));
      const SweepFit fs = fit_delay_sweep(noisy, params, base, SweepModel::sine);
      const SweepFit fc = fit_delay_sweep(noisy, params, base, SweepModel::cosine);
      cover_sin += std::abs(fs.e_ac - e_true) <= fs.e_ac_error;
      cover_cos += std::abs(fc.e_ac - e_true) <= fc.e_ac_error;
      sigma_sin += fs.e_ac_error / e_true / trials;
      sigma_cos += fc.e_ac_error / e_true / trials;
    }
    const bool clean_ok = err_sin < 0.01 && err_cos < 0.01;
    const bool noise_ok = sigma_sin > 0.01 && sigma_sin < 0.04 && sigma_cos > sigma_sin;
    const bool cover_ok = cover_sin >= 30 && cover_cos >= 30;
    r.pass = clean_ok && noise_ok && cover_ok;
    r.detail = "noiseless rel error sine " + sci(err_sin) + ", cosine " + sci(err_cos) +
               "; mean rel sigma sine " + sci(sigma_sin) + ", cosine " + sci(sigma_cos) + "; coverage sine " +
               std::to_string(cover_sin) + "/50, cosine " + std::to_string(cover_cos) + "/50";
  });
}

Result hamiltonian_consistency() {
  return timed(8, "Hamiltonian splitting vs Stark-shift formula", 5.0, [](Result& r) {
    NVParams p;
    double worst_zero = 0.0, worst_slope = 0.0;
    p.bias_perp = 0.0;
    for (double phi_e : {0.0, 0.7, 2.0, 4.5}) {
      const double e = 1e7;
      const double s = transition_frequencies(p, {e, phi_e}).splitting();
      worst_zero = std::max(worst_zero, std::abs(s / (2.0 * p.dipole_perp * e) - 1.0));
    }
    p.bias_perp = 1.0 * units::mT;
    const double e0 = 1e-4 * p.gyromagnetic_ratio * p.bias_perp / p.dipole_perp;
    const double h = 1e-3 * e0;
    for (double phi_b : {0.0, 0.4, 1.3})
      for (double phi_e : {0.2, 1.9, 3.5, 5.0}) {
        const double c = std::cos(2.0 * phi_b + phi_e);
        if (std::abs(c) < 0.2) continue;
        p.bias_azimuth = phi_b;
        const double slope = (transition_frequencies(p, {e0 + h, phi_e}).splitting() -
                              transition_frequencies(p, {e0 - h, phi_e}).splitting()) /
                             (2.0 * h);
        worst_slope = std::max(worst_slope, std::abs(slope / (2.0 * p.dipole_perp * c) - 1.0));
      }
    // Diagnostics only: the aligned case cos = 1 and the same grid at d E = 1e-6 gamma B.
    auto slope_error = [&](double e, double phi_b, double phi_e) {
      p.bias_azimuth = phi_b;
      const double step = 1e-3 * e;
      const double s = (transition_frequencies(p, {e + step, phi_e}).splitting() -
                        transition_frequencies(p, {e - step, phi_e}).splitting()) /
                       (2.0 * step);
      return std::abs(s / (2.0 * p.dipole_perp * std::cos(2.0 * phi_b + phi_e)) - 1.0);
    };
    const double aligned = slope_error(e0, 0.4, kTwoPi - 0.8);
    double small_e = 0.0;
    for (double phi_b : {0.0, 0.4, 1.3})
      for (double phi_e : {0.2, 1.9, 3.5, 5.0})
        if (std::abs(std::cos(2.0 * phi_b + phi_e)) >= 0.2) small_e = std::max(small_e, slope_error(1e-2 * e0, phi_b, phi_e));
    r.pass = worst_zero < 1e-9 && worst_slope < 1e-3;
    r.detail = "B = 0 relative deviation " + sci(worst_zero) + " (limit 1e-9); dS/dE relative deviation at d E = 1e-4 gamma B " +
               sci(worst_slope) + " (limit 1e-3); cos = 1 only: " + sci(aligned) + "; at d E = 1e-6 gamma B: " + sci(small_e);
  });
}

std::vector<Result> run_all(const std::function<void(const Result&)>& on_result) {
  std::vector<Result> out;
  for (auto fn : {closed_form_vs_quadrature, field_solver_cross_check, psf_headline_numbers,
                  resolution_map_structure, striped_domain_period, amplitude_round_trip,
                  delay_sweep_round_trip, hamiltonian_consistency}) {
    out.push_back(fn());
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format(const Result& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  " << r.title << ": " << r.detail << " ("
     << sci(r.seconds, 3) << " s / " << sci(r.budget, 3) << " s)";
  return os.str();
}

}  // namespace nvgrad::acceptance
