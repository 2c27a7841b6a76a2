#include "nvgrad/commands.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "nvgrad/acceptance.hpp"
#include "nvgrad/calibration.hpp"
#include "nvgrad/imaging.hpp"
#include "nvgrad/rng.hpp"
#include "nvgrad/svg.hpp"
#include "nvgrad/table_io.hpp"

namespace nvgrad::cli {

namespace fs = std::filesystem;
using config::Dimension;
using config::to_si;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

OutputDir::OutputDir(const fs::path& dir, std::set<std::string> formats)
    : dir_(dir), formats_(std::move(formats)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  lock_ = dir_ / ".nvgrad.lock";
  FILE* f = std::fopen(lock_.c_str(), "wx");
  if (!f) {
    if (fs::exists(lock_))
      throw IoError("output directory '" + dir_.string() +
                    "' is in use by another run (delete .nvgrad.lock if that run is gone)");
    throw IoError("cannot create lock file '" + lock_.string() + "'");
  }
  std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
  std::fclose(f);
}

OutputDir::~OutputDir() {
  std::error_code ec;
  fs::remove(lock_, ec);
}

std::string OutputDir::path(const std::string& name) {
  written_.push_back(name);
  return (dir_ / name).string();
}

namespace {

void save_table(OutputDir& out, const std::string& name, const Table& t) { write_table(out.path(name), t); }

void save_grid_text(OutputDir& out, const std::string& name, const Eigen::ArrayXXd& v, double dx, double dy,
                    double x0, double y0) {
  const std::string p = out.path(name);
  std::ofstream os(p);
  if (!os) throw IoError("cannot open '" + p + "' for writing");
  write_grid_text(os, v, dx, dy, x0, y0);
  if (!os) throw IoError("write failed for '" + p + "'");
}

void save_text(OutputDir& out, const std::string& name, const std::string& text) {
  const std::string p = out.path(name);
  std::ofstream os(p);
  if (!os) throw IoError("cannot open '" + p + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + p + "'");
}

double try_period(const LineProfile& p) {
  try {
    return autocorrelation_period(p);
  } catch (const DomainError&) {
    return kNaN;
  }
}

svg::Series series(const Eigen::VectorXd& x, const Eigen::VectorXd& y, std::string label, std::string color,
                   bool markers = false) {
  return {x, y, std::move(label), std::move(color), markers};
}

std::string profile_svg(const LineProfile& p, const std::string& title) {
  const auto [scale, unit] = svg::length_unit(p.span());
  svg::Axes axes{title, "position (" + unit + ")", "signal (" + p.unit + ")", scale, 1.0};
  return svg::plot({series(p.position, p.value, "", "#1f77b4")}, axes);
}

double length(const config::Quantity& q) { return to_si(q, Dimension::length); }

}  // namespace

// ---------------------------------------------------------------------------

void cmd_field(const config::RunConfig& c, OutputDir& out) {
  const ChargeMap charge = config::build_sample(c);
  const double z = length(c.probe.z_nv);
  const FieldConvention conv = config::convention(c);
  const FieldSampler field = fourier_stray_field(charge, z, conv);

  const Eigen::Index nx = charge.nx(), ny = charge.ny();
  std::array<Eigen::ArrayXXd, 3> e;
  for (auto& a : e) a.resize(nx, ny);
  for (Eigen::Index j = 0; j < ny; ++j)
    for (Eigen::Index i = 0; i < nx; ++i) {
      const Eigen::Vector3d v = field(Eigen::Vector3d(charge.x(i), charge.y(j), z));
      for (int k = 0; k < 3; ++k) e[static_cast<std::size_t>(k)](i, j) = v(k);
    }
  const char* names[3] = {"Ex", "Ey", "Ez"};
  for (int k = 0; k < 3; ++k) {
    const auto& a = e[static_cast<std::size_t>(k)];
    const std::string base = std::string("field_") + names[k];
    if (out.wants("text")) save_grid_text(out, base + ".txt", a, charge.dx(), charge.dy(), charge.x0(), charge.y0());
    if (out.wants("binary")) write_raster(out.path(base + ".bin"), a, charge.dx());
    if (out.wants("svg") && k != 1) {
      svg::Heatmap h;
      h.values = a;
      h.x0 = charge.x0();
      h.y0 = charge.y0();
      h.dx = charge.dx();
      h.dy = charge.dy();
      h.title = std::string(names[k]) + " at z = " + format_number(z * 1e9) + " nm (" + to_string(conv) + ")";
      h.value_label = std::string(names[k]) + " (V/m)";
      svg::save(out.path(base + ".svg"), svg::heatmap(h));
    }
  }
  if (out.wants("binary")) {
    std::ostringstream hdr;
    hdr << "# field raster sidecar; lengths in m\nnx = " << nx << "\nny = " << ny
        << "\ndx = " << format_number(charge.dx()) << "\ndy = " << format_number(charge.dy())
        << "\nx0 = " << format_number(charge.x0()) << "\ny0 = " << format_number(charge.y0())
        << "\nz = " << format_number(z) << "\nunit = V/m\nconvention = " << to_string(conv) << '\n';
    save_text(out, "field.hdr", hdr.str());
  }

  // Profile along x through the row closest to y = 0.
  Eigen::Index j0 = 0;
  for (Eigen::Index j = 1; j < ny; ++j)
    if (std::abs(charge.y(j)) < std::abs(charge.y(j0))) j0 = j;
  const bool line = c.sample.model == "line_defect";
  Table prof{{"x", "E_x", "E_y", "E_z"}, {"m", "V/m", "V/m", "V/m"}, Eigen::MatrixXd(nx, line ? 6 : 4)};
  if (line) {
    prof.names.insert(prof.names.end(), {"E_x_analytic", "E_z_analytic"});
    prof.units.insert(prof.units.end(), {"V/m", "V/m"});
  }
  const double lambda = line ? to_si(*c.sample.lambda, Dimension::line_charge) : 0.0;
  for (Eigen::Index i = 0; i < nx; ++i) {
    prof.data(i, 0) = charge.x(i);
    for (int k = 0; k < 3; ++k) prof.data(i, k + 1) = e[static_cast<std::size_t>(k)](i, j0);
    if (line) {
      const Eigen::Vector3d a = analytic_line_charge_field(charge.x(i), z, lambda, conv);
      prof.data(i, 4) = a.x();
      prof.data(i, 5) = a.z();
    }
  }
  save_table(out, "field_profile.tsv", prof);

  LineProfile ez_profile{prof.data.col(0), prof.data.col(3), "V/m"};
  Table summary{{"z", "E_max", "dominant_period"}, {"m", "V/m", "m"}, Eigen::MatrixXd(1, 3)};
  double e_max = 0.0;
  for (Eigen::Index j = 0; j < ny; ++j)
    for (Eigen::Index i = 0; i < nx; ++i)
      e_max = std::max(e_max, std::sqrt(e[0](i, j) * e[0](i, j) + e[1](i, j) * e[1](i, j) + e[2](i, j) * e[2](i, j)));
  summary.data << z, e_max, try_period(ez_profile);
  save_table(out, "field_summary.tsv", summary);
}

void cmd_scan(const config::RunConfig& c, OutputDir& out) {
  const ChargeMap charge = config::build_sample(c);
  const ScanSettings settings = config::scan_settings(c);
  const ScanGrid grid = config::scan_grid(c);
  ScanImage image = simulate_scan(charge, settings, grid, config::convention(c));
  if (c.probe.magnitude) image.values = image.values.abs();

  if (out.wants("text")) write_scan_text(out.path("scan.txt"), image);
  if (out.wants("binary")) write_scan(out.path("scan.bin"), out.path("scan.hdr"), image);
  const LineProfile profile = extract_profile(image, Axis::x, grid.center_y());
  save_table(out, "scan_profile.tsv", profile.to_table());
  if (out.wants("svg")) {
    svg::Heatmap h;
    h.values = image.values;
    h.x0 = grid.x0;
    h.y0 = grid.y0;
    h.dx = h.dy = grid.pitch;
    h.title = "gradiometry scan, " + to_string(settings.mode) + ", z = " + format_number(settings.z_nv * 1e9) +
              " nm, A = " + format_number(settings.amplitude * 1e9) + " nm";
    h.value_label = (settings.output == ScanOutput::phase ? "phase" : "E_AC") + std::string(" (") + image.unit() + ")";
    svg::save(out.path("scan.svg"), svg::heatmap(h));
    svg::save(out.path("scan_profile.svg"), profile_svg(profile, "profile at the centre row"));
  }
  Table summary{{"pixels", "pitch", "bias_azimuth", "min", "max", "dominant_period"},
                {"1", "m", "rad", image.unit(), image.unit(), "m"},
                Eigen::MatrixXd(1, 6)};
  summary.data << static_cast<double>(grid.nx), grid.pitch, image.meta.bias_azimuth, image.values.minCoeff(),
      image.values.maxCoeff(), try_period(profile);
  save_table(out, "scan_summary.tsv", summary);
}

void cmd_psf(const config::RunConfig& c, OutputDir& out) {
  const ScanSettings s = config::scan_settings(c);
  LineProfile profile = psf_delta_line(s.z_nv, s.amplitude, s.mode, config::psf_options(c));
  if (c.probe.magnitude) profile.value = profile.value.cwiseAbs();
  const ResolutionReport rep = resolution_report(profile, s.mode);
  save_table(out, "psf.tsv", profile.to_table());
  Table t{{"z_nv", "amplitude", "edge_width_10_90", "fwhm", "shear_sharpest_width"},
          {"m", "m", "m", "m", "m"},
          Eigen::MatrixXd(1, 5)};
  t.data << s.z_nv, s.amplitude, rep.edge_width_10_90, rep.fwhm.value_or(kNaN), rep.shear_sharpest_width.value_or(kNaN);
  save_table(out, "psf_report.tsv", t);
  save_text(out, "psf_notes.txt", rep.notes + "\n");
  if (out.wants("svg"))
    svg::save(out.path("psf.svg"), profile_svg(profile, "line-charge PSF, " + to_string(s.mode) + ", z = " +
                                                            format_number(s.z_nv * 1e9) + " nm"));
}

void cmd_resolution_map(const config::RunConfig& c, OutputDir& out) {
  const auto zs = to_si(c.resolution.z_values, Dimension::length);
  const auto as = to_si(c.resolution.a_values, Dimension::length);
  const ScanMode mode = config::scan_mode(c);
  const ResolutionMap map =
      resolution_map(mode, Eigen::Map<const Eigen::VectorXd>(zs.data(), static_cast<Eigen::Index>(zs.size())),
                     Eigen::Map<const Eigen::VectorXd>(as.data(), static_cast<Eigen::Index>(as.size())),
                     config::psf_options(c));
  save_table(out, "resolution_map.tsv", map.to_table());
  if (out.wants("svg")) {
    svg::Heatmap h;
    h.values = (map.width.transpose() * 1e9).array();  // (amplitude, z)
    h.mask = map.mask.transpose();
    for (double a : as) h.x_categories.push_back(format_number(a * 1e9));
    for (double z : zs) h.y_categories.push_back(format_number(z * 1e9));
    h.x_label = "oscillation amplitude (nm)";
    h.y_label = "NV-sample distance (nm)";
    h.length_axes = false;
    h.title = "resolution, " + to_string(mode) + (mode == ScanMode::intermittent ? " (blank: A >= z)" : "");
    h.value_label = "width (nm)";
    svg::save(out.path("resolution_map.svg"), svg::heatmap(h));
  }
}

void cmd_calibrate_amplitude(const config::RunConfig& c, OutputDir& out) {
  std::vector<AmplitudeCalibration> runs;
  std::vector<double> truth;
  const auto volts = config::drive_voltages(c);
  const auto setups = config::calibration_setups(c);
  if (c.calibration.source == "imported") {
    const Table prof = read_table(*c.calibration.profile_path);
    const Table trace = read_table(*c.calibration.trace_path);
    const double f = to_si(c.probe.frequency, Dimension::frequency);
    runs.push_back(calibrate_amplitude(prof.column("z"), prof.column("counts"), PhotonTrace::from_table(trace, f),
                                       setups.front().side));
    truth.push_back(kNaN);
  } else {
    for (const auto& s : setups) {
      runs.push_back(run_amplitude_calibration(s));
      truth.push_back(s.amplitude);
    }
  }

  const auto n = static_cast<Eigen::Index>(runs.size());
  Table t{{"drive", "amplitude_true", "amplitude_fit", "relative_error", "h_max", "h_min", "slope", "z_half",
           "width_fit", "negative_minimum"},
          {"V", "m", "m", "1", "counts", "counts", "counts/m", "m", "m", "1"},
          Eigen::MatrixXd(n, 10)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& r = runs[static_cast<std::size_t>(k)];
    const double a_true = truth[static_cast<std::size_t>(k)];
    t.data.row(k) << (volts.empty() ? kNaN : volts[static_cast<std::size_t>(k)]), a_true, r.amplitude,
        r.amplitude / a_true - 1.0, r.trace_fit.h_max, r.trace_fit.h_min, r.anchor.slope, r.anchor.z_half,
        r.profile_fit.profile.width, r.trace_fit.negative_minimum ? 1.0 : 0.0;
  }
  save_table(out, "calibration.tsv", t);

  const AmplitudeCalibration& first = runs.front();
  Table prof{{"z", "counts", "fit"}, {"m", "counts", "counts"}, Eigen::MatrixXd(first.profile_z.size(), 3)};
  prof.data << first.profile_z, first.profile_counts, first.profile_fit.profile(first.profile_z);
  save_table(out, "calib_profile.tsv", prof);

  const PhotonTrace& tr = first.trace;
  Eigen::VectorXd fit(tr.times.size());
  for (Eigen::Index i = 0; i < fit.size(); ++i)
    fit(i) = first.trace_fit.offset +
             first.trace_fit.amplitude * std::sin(kTwoPi * tr.frequency * tr.times(i) + first.trace_fit.phase);
  Table trace{{"time", "counts", "fit"}, {"s", "counts", "counts"}, Eigen::MatrixXd(fit.size(), 3)};
  trace.data << tr.times, tr.counts, fit;
  save_table(out, "calib_trace.tsv", trace);

  std::optional<LineFit> lin;
  if (volts.size() >= 3 && c.calibration.source == "synthetic") {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(volts.data(), static_cast<Eigen::Index>(volts.size()));
    lin = fit_amplitude_vs_voltage(v, t.data.col(2));
    Table l{{"slope", "intercept", "r_squared", "slope_error", "intercept_error"},
            {"m/V", "m", "1", "m/V", "m"},
            Eigen::MatrixXd(1, 5)};
    l.data << lin->slope, lin->intercept, lin->r_squared, lin->slope_error, lin->intercept_error;
    save_table(out, "calibration_linearity.tsv", l);
  }

  if (out.wants("svg")) {
    const double zs = 1e6;
    svg::save(out.path("calib_profile.svg"),
              svg::plot({series(first.profile_z, first.profile_counts, "counts", "#1f77b4", true),
                         series(first.profile_z, prof.data.col(2), "Gaussian fit", "#d62728")},
                        {"fluorescence profile along the oscillation axis", "position (um)", "counts", zs, 1.0}));
    const Eigen::Index shown = std::min<Eigen::Index>(tr.times.size(), 3 * c.calibration.bins_per_period);
    svg::save(out.path("calib_trace.svg"),
              svg::plot({series(tr.times.head(shown), tr.counts.head(shown), "counts", "#1f77b4", true),
                         series(tr.times.head(shown), fit.head(shown), "sinusoid fit", "#d62728")},
                        {"photon trace at the half-maximum point", "time (us)", "counts per bin", 1e6, 1.0}));
    if (lin) {
      Eigen::VectorXd v = t.data.col(0);
      Eigen::VectorXd line = (lin->slope * v.array() + lin->intercept).matrix();
      svg::save(out.path("calibration_linearity.svg"),
                svg::plot({series(v, t.data.col(2), "fitted amplitude", "#1f77b4", true),
                           series(v, line, "linear fit", "#d62728")},
                          {"amplitude vs drive voltage", "drive (V)", "amplitude (nm)", 1.0, 1e9}));
    }
  }
}

void cmd_delay_sweep(const config::RunConfig& c, OutputDir& out) {
  const NVParams params = config::nv_params(c);
  EchoTiming base = config::echo_timing(c);
  base.tau_e = to_si(c.sweep.tau_e, Dimension::time);
  const double e_ac = to_si(c.sweep.e_ac, Dimension::electric_field);
  const Eigen::VectorXd delays = config::sweep_delays(c);
  const DelaySweep sweep = delay_sweep(e_ac, params, base, delays, c.sweep.noise, derive_seed(c.seed, 7));
  save_table(out, "sweep.tsv", sweep.to_table());

  const SweepFit fs = fit_delay_sweep(sweep, params, base, SweepModel::sine);
  const SweepFit fc = fit_delay_sweep(sweep, params, base, SweepModel::cosine);
  Table t{{"e_ac_true", "e_ac_sine", "e_ac_sine_error", "tau_e_sine", "tau_e_sine_error", "e_ac_cosine",
           "e_ac_cosine_error", "tau_e_cosine", "tau_e_cosine_error"},
          {"V/m", "V/m", "V/m", "s", "s", "V/m", "V/m", "s", "s"},
          Eigen::MatrixXd(1, 9)};
  t.data << e_ac, fs.e_ac, fs.e_ac_error, fs.tau_e, fs.tau_e_error, fc.e_ac, fc.e_ac_error, fc.tau_e, fc.tau_e_error;
  save_table(out, "sweep_fit.tsv", t);

  if (out.wants("svg")) {
    const Eigen::VectorXd fine = Eigen::VectorXd::LinSpaced(400, delays(0), delays(delays.size() - 1));
    Eigen::VectorXd ms(fine.size()), mc(fine.size());
    for (Eigen::Index i = 0; i < fine.size(); ++i) {
      ms(i) = std::sin(echo_phase_closed(params.dipole_perp, fs.e_ac, base.frequency, base.tau, fs.tau_e + fine(i)));
      mc(i) = std::cos(echo_phase_closed(params.dipole_perp, fc.e_ac, base.frequency, base.tau, fc.tau_e + fine(i)));
    }
    const Eigen::VectorXd ds = sweep.s_plus - sweep.s_minus;
    const Eigen::VectorXd dc = sweep.c_plus - sweep.c_minus;
    svg::save(out.path("sweep.svg"),
              svg::plot({series(delays, ds, "P_s+ - P_s-", "#1f77b4", true), series(fine, ms, "sine fit", "#1f77b4"),
                         series(delays, dc, "P_c+ - P_c-", "#d62728", true), series(fine, mc, "cosine fit", "#d62728")},
                        {"delay sweep", "tau_w (us)", "differential signal", 1e6, 1.0}));
  }
}

bool cmd_repro(OutputDir& out) {
  std::ostringstream report;
  bool all = true;
  acceptance::run_all([&](const acceptance::Result& r) {
    const std::string line = acceptance::format(r);
    std::cout << line << std::endl;
    report << line << '\n';
    all = all && r.pass;
  });
  save_text(out, "repro_report.txt", report.str());
  return all;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Scanning NV electric-field gradiometry simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format;
  std::uint64_t seed = 0;
  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const config::RunConfig&, OutputDir&);
  };
  const std::vector<Command> commands = {
      {"field", "stray-field maps of the sample at the NV height", cmd_field},
      {"scan", "gradiometry image of the sample", cmd_scan},
      {"psf", "line-charge point spread function and resolution report", cmd_psf},
      {"resolution-map", "resolution versus NV-sample distance and amplitude", cmd_resolution_map},
      {"calibrate-amplitude", "optical oscillation-amplitude calibration", cmd_calibrate_amplitude},
      {"delay-sweep", "delay-sweep E_AC calibration on synthetic data", cmd_delay_sweep},
  };
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "JSON run configuration");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "master seed (overrides seed)");
    sub->add_option("--format", format, "single output format (overrides output.formats)")
        ->check(CLI::IsMember({"text", "binary", "svg"}));
  };
  for (const auto& cmd : commands) add_common(app.add_subcommand(cmd.name, cmd.help), true);
  add_common(app.add_subcommand("repro", "run the acceptance suite and write a report"), false);
  app.add_subcommand("defaults", "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "defaults") {
      std::cout << config::emit(config::RunConfig{});
      return ok;
    }
    config::RunConfig cfg;
    if (!config_path.empty()) cfg = config::load(config_path);
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--out")) cfg.output.directory = out_dir;
    if (sub->count("--format")) cfg.output.formats = {format};
    if (name == "repro" && !sub->count("--out") && config_path.empty()) cfg.output.directory = "repro";

    OutputDir out(cfg.output.directory, {cfg.output.formats.begin(), cfg.output.formats.end()});
    int status = ok;
    if (name == "repro") {
      if (!cmd_repro(out)) status = numeric_error;
    } else {
      for (const auto& cmd : commands)
        if (name == cmd.name) cmd.fn(cfg, out);
    }
    for (const auto& f : out.written()) std::cout << (out.dir() / f).string() << '\n';
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "nvgrad: configuration error: " << e.what() << '\n';
    return config_error;
  } catch (const DomainError& e) {
    std::cerr << "nvgrad: invalid input: " << e.what() << '\n';
    return config_error;
  } catch (const NumericError& e) {
    std::cerr << "nvgrad: numerical failure: " << e.what() << '\n';
    return numeric_error;
  } catch (const IoError& e) {
    std::cerr << "nvgrad: I/O error: " << e.what() << '\n';
    return io_error;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "nvgrad: I/O error: " << e.what() << '\n';
    return io_error;
  } catch (const std::exception& e) {
    std::cerr << "nvgrad: internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nvgrad::cli
