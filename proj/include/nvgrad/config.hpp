#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvgrad/calibration.hpp"
#include "nvgrad/fields.hpp"
#include "nvgrad/imaging.hpp"
#include "nvgrad/probe.hpp"
#include "nvgrad/spin.hpp"

namespace nvgrad::config {

/// A number with an explicit unit string, kept as written so it re-emits unchanged.
struct Quantity {
  double value = 0.0;
  std::string unit;
};

struct QuantityList {
  std::vector<double> values;
  std::string unit;
};

enum class Dimension {
  length,
  frequency,
  time,
  magnetic_field,
  angle,
  electric_field,
  surface_charge,
  line_charge,
  dipole,
  gyromagnetic,
  voltage,
  length_per_voltage,
};

/// Conversion to SI; ConfigError for a unit that does not match the dimension.
double to_si(const Quantity& q, Dimension dim);
std::vector<double> to_si(const QuantityList& q, Dimension dim);

struct NvSection {
  Quantity D_gs{2.87, "GHz"};
  Quantity gamma_e{28.024951, "GHz/T"};
  Quantity d_perp{17.0, "Hz*cm/V"};
  Quantity B_perp{1.0, "mT"};
  std::optional<Quantity> phi_B;  // absent: aligned at the image centre
  std::string rotation = "tilted_111";  // or "axial" (NV axis along z)
};

struct ProbeSection {
  std::string mode = "intermittent";
  Quantity amplitude{0.8, "nm"};
  Quantity frequency{180.0, "kHz"};
  Quantity phase{0.0, "rad"};
  Quantity z_nv{17.0, "nm"};
  std::string projection = "nv_transverse_cos";
  int n_samples = 256;
  bool magnitude = false;  // write |signal| instead of the signed coefficient
};

struct TimingSection {
  std::optional<Quantity> tau;  // absent: 1 / frequency
  Quantity tau_e{0.0, "us"};
  Quantity tau_w{0.0, "us"};
  std::string readout_axis = "y_pi_half";
};

/// Defaults describe a line defect; a `sample` block in a config replaces them entirely.
struct SampleSection {
  std::string model = "line_defect";  // line_defect | striped | zero | file
  std::string convention = "paper";
  std::optional<Quantity> lambda = Quantity{0.1, "nC/m"};
  std::optional<Quantity> period, sigma0;
  std::optional<Quantity> extent = Quantity{1.0, "um"};
  std::optional<Quantity> resolution = Quantity{2.0, "nm"};
  std::optional<Quantity> smoothing;
  std::optional<std::string> path;
};

struct ScanSection {
  Quantity extent{0.4, "um"};
  int pixels = 128;
  std::string output = "e_ac";
};

struct OutputSection {
  std::string directory = "out";
  std::vector<std::string> formats{"text", "svg"};
};

struct CalibrationSection {
  std::string source = "synthetic";  // synthetic | imported
  double background = 100.0;         // counts per bin
  double peak_height = 1596.0;       // counts per bin above background
  Quantity width{2.5, "um"};
  std::optional<QuantityList> drive_voltages;
  std::optional<Quantity> response;  // amplitude per drive volt
  std::string side = "left";
  int profile_points = 61;
  double profile_half_span = 3.0;  // in units of the width
  int periods = 20;
  int bins_per_period = 32;
  std::optional<double> profile_peak_counts;
  std::optional<double> trace_total_counts;
  std::optional<std::string> profile_path, trace_path;
};

struct SweepSection {
  Quantity e_ac{2.36, "kV/cm"};
  Quantity tau_e{1.3, "us"};
  Quantity tau_w_start{0.0, "us"};
  Quantity tau_w_stop{5.5, "us"};
  int points = 41;
  double noise = 0.0;  // standard deviation added to each population
};

struct ResolutionSection {
  QuantityList z_values{{5, 10, 15, 20, 25, 30, 35, 40, 45, 50}, "nm"};
  QuantityList a_values{{1, 2, 4, 6, 8, 12, 16, 24, 32, 40}, "nm"};
  int n_points = 1024;
  double window = 10.0;  // half window in units of z_nv
};

struct RunConfig {
  NvSection nv;
  ProbeSection probe;
  TimingSection timing;
  SampleSection sample;
  ScanSection scan;
  OutputSection output;
  CalibrationSection calibration;
  SweepSection sweep;
  ResolutionSection resolution;
  std::uint64_t seed = 0;
};

/// Parses and validates a JSON document. Unknown keys, missing units and values that
/// break a module precondition are ConfigError.
RunConfig parse(const std::string& json_text);
RunConfig load(const std::string& path);

/// JSON text with every field, including defaults; parse(emit(c)) reproduces c.
std::string emit(const RunConfig& config);

void validate(const RunConfig& config);

// Typed views used by the commands.
NVParams nv_params(const RunConfig& config);
EchoTiming echo_timing(const RunConfig& config);
ScanMode scan_mode(const RunConfig& config);
ScanSettings scan_settings(const RunConfig& config);
FieldConvention convention(const RunConfig& config);
ChargeMap build_sample(const RunConfig& config);
ScanGrid scan_grid(const RunConfig& config);
PsfOptions psf_options(const RunConfig& config);
GaussianProfile calibration_profile(const RunConfig& config);
/// One setup per drive voltage (or a single one at the probe amplitude).
std::vector<AmplitudeCalibrationSetup> calibration_setups(const RunConfig& config);
std::vector<double> drive_voltages(const RunConfig& config);
Eigen::VectorXd sweep_delays(const RunConfig& config);

}  // namespace nvgrad::config
