#include "nvgrad/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nvgrad/rng.hpp"

namespace nvgrad::config {

using nlohmann::json;

namespace {

const std::map<std::string, double>& unit_table(Dimension dim) {
  static const std::map<Dimension, std::map<std::string, double>> tables = {
      {Dimension::length, {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"\xC2\xB5m", 1e-6}, {"nm", 1e-9}, {"pm", 1e-12}}},
      {Dimension::frequency, {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}},
      {Dimension::time, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"\xC2\xB5s", 1e-6}, {"ns", 1e-9}}},
      {Dimension::magnetic_field, {{"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6}, {"G", 1e-4}}},
      {Dimension::angle, {{"rad", 1.0}, {"deg", kPi / 180.0}}},
      {Dimension::electric_field,
       {{"V/m", 1.0}, {"kV/m", 1e3}, {"MV/m", 1e6}, {"V/cm", 1e2}, {"kV/cm", 1e5}}},
      {Dimension::surface_charge, {{"C/m^2", 1.0}, {"mC/m^2", 1e-3}, {"uC/cm^2", 1e-2}}},
      {Dimension::line_charge, {{"C/m", 1.0}, {"nC/m", 1e-9}, {"pC/m", 1e-12}, {"e/nm", 1.602176634e-10}}},
      {Dimension::dipole, {{"Hz*m/V", 1.0}, {"Hz*cm/V", 1e-2}, {"Hz/(V/m)", 1.0}, {"Hz/(V/cm)", 1e-2}}},
      {Dimension::gyromagnetic, {{"Hz/T", 1.0}, {"MHz/T", 1e6}, {"GHz/T", 1e9}, {"MHz/mT", 1e9}}},
      {Dimension::voltage, {{"V", 1.0}, {"mV", 1e-3}}},
      {Dimension::length_per_voltage, {{"m/V", 1.0}, {"um/V", 1e-6}, {"nm/V", 1e-9}}},
  };
  return tables.at(dim);
}

double unit_factor(const std::string& unit, Dimension dim) {
  const auto& t = unit_table(dim);
  const auto it = t.find(unit);
  if (it == t.end()) {
    std::string allowed;
    for (const auto& [name, f] : t) allowed += (allowed.empty() ? "" : ", ") + name;
    throw ConfigError("unit '" + unit + "' not allowed here (expected one of: " + allowed + ")");
  }
  return it->second;
}

/// Walks one JSON object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(where(key) + ": " + what);
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void quantity(const std::string& key, Quantity& q, Dimension dim) {
    if (!has(key)) return;
    q = read_quantity(key, dim);
  }

  void quantity(const std::string& key, std::optional<Quantity>& q, Dimension dim) {
    if (!has(key)) return;
    q = read_quantity(key, dim);
  }

  void quantity_list(const std::string& key, QuantityList& q, Dimension dim) {
    if (!has(key)) return;
    q = read_list(key, dim);
  }

  void quantity_list(const std::string& key, std::optional<QuantityList>& q, Dimension dim) {
    if (!has(key)) return;
    q = read_list(key, dim);
  }

  void string(const std::string& key, std::string& s) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    s = v.get<std::string>();
  }

  void string(const std::string& key, std::optional<std::string>& s) {
    if (!has(key)) return;
    std::string tmp;
    string(key, tmp);
    s = tmp;
  }

  void number(const std::string& key, double& x) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
  }

  void number(const std::string& key, std::optional<double>& x) {
    if (!has(key)) return;
    double tmp = 0;
    number(key, tmp);
    x = tmp;
  }

  void integer(const std::string& key, int& x) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    x = v.get<int>();
  }

  void boolean(const std::string& key, bool& x) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    x = v.get<bool>();
  }

  Reader child(const std::string& key) { return Reader(at(key), where(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) fail(key, "unknown key");
  }

 private:
  Quantity read_quantity(const std::string& key, Dimension dim) {
    const json& v = at(key);
    if (v.is_number()) fail(key, "a physical quantity needs an explicit unit, e.g. {\"value\": 1, \"unit\": \"nm\"}");
    Reader r(v, where(key));
    if (!r.has("value") || !r.has("unit")) fail(key, "expected {\"value\": ..., \"unit\": ...}");
    Quantity q;
    r.number("value", q.value);
    r.string("unit", q.unit);
    r.finish();
    try {
      unit_factor(q.unit, dim);
    } catch (const ConfigError& e) {
      fail(key, e.what());
    }
    return q;
  }

  QuantityList read_list(const std::string& key, Dimension dim) {
    const json& v = at(key);
    Reader r(v, where(key));
    if (!r.has("value") || !r.has("unit")) fail(key, "expected {\"value\": [...], \"unit\": ...}");
    QuantityList q;
    const json& arr = r.at("value");
    if (!arr.is_array() || arr.empty()) fail(key, "value must be a non-empty array of numbers");
    for (const auto& x : arr) {
      if (!x.is_number()) fail(key, "value must be a non-empty array of numbers");
      q.values.push_back(x.get<double>());
      if (!std::isfinite(q.values.back())) fail(key, "values must be finite");
    }
    r.string("unit", q.unit);
    r.finish();
    try {
      unit_factor(q.unit, dim);
    } catch (const ConfigError& e) {
      fail(key, e.what());
    }
    return q;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json to_json(const Quantity& q) { return json{{"value", q.value}, {"unit", q.unit}}; }
json to_json(const QuantityList& q) { return json{{"value", q.values}, {"unit", q.unit}}; }

const std::map<std::string, std::set<std::string>>& sample_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"line_defect", {"lambda", "resolution", "extent"}},
      {"striped", {"period", "sigma0", "extent", "resolution", "smoothing"}},
      {"zero", {"extent", "resolution"}},
      {"file", {"path"}},
  };
  return keys;
}

template <typename F>
auto checked(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

double to_si(const Quantity& q, Dimension dim) { return q.value * unit_factor(q.unit, dim); }

std::vector<double> to_si(const QuantityList& q, Dimension dim) {
  const double f = unit_factor(q.unit, dim);
  std::vector<double> out;
  for (double v : q.values) out.push_back(v * f);
  return out;
}

RunConfig parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(root, "");

  if (r.has("nv")) {
    Reader s = r.child("nv");
    s.quantity("D_gs", c.nv.D_gs, Dimension::frequency);
    s.quantity("gamma_e", c.nv.gamma_e, Dimension::gyromagnetic);
    s.quantity("d_perp", c.nv.d_perp, Dimension::dipole);
    s.quantity("B_perp", c.nv.B_perp, Dimension::magnetic_field);
    s.quantity("phi_B", c.nv.phi_B, Dimension::angle);
    s.string("rotation", c.nv.rotation);
    s.finish();
  }
  if (r.has("probe")) {
    Reader s = r.child("probe");
    s.string("mode", c.probe.mode);
    s.quantity("amplitude", c.probe.amplitude, Dimension::length);
    s.quantity("frequency", c.probe.frequency, Dimension::frequency);
    s.quantity("phase", c.probe.phase, Dimension::angle);
    s.quantity("z_nv", c.probe.z_nv, Dimension::length);
    s.string("projection", c.probe.projection);
    s.integer("n_samples", c.probe.n_samples);
    s.boolean("magnitude", c.probe.magnitude);
    s.finish();
  }
  if (r.has("timing")) {
    Reader s = r.child("timing");
    s.quantity("tau", c.timing.tau, Dimension::time);
    s.quantity("tau_e", c.timing.tau_e, Dimension::time);
    s.quantity("tau_w", c.timing.tau_w, Dimension::time);
    s.string("readout_axis", c.timing.readout_axis);
    s.finish();
  }
  if (r.has("sample")) {
    Reader s = r.child("sample");
    c.sample = SampleSection{};
    c.sample.lambda.reset();
    c.sample.extent.reset();
    c.sample.resolution.reset();
    s.string("model", c.sample.model);
    s.string("convention", c.sample.convention);
    s.quantity("lambda", c.sample.lambda, Dimension::line_charge);
    s.quantity("period", c.sample.period, Dimension::length);
    s.quantity("sigma0", c.sample.sigma0, Dimension::surface_charge);
    s.quantity("extent", c.sample.extent, Dimension::length);
    s.quantity("resolution", c.sample.resolution, Dimension::length);
    s.quantity("smoothing", c.sample.smoothing, Dimension::length);
    s.string("path", c.sample.path);
    s.finish();
  }
  if (r.has("scan")) {
    Reader s = r.child("scan");
    s.quantity("extent", c.scan.extent, Dimension::length);
    s.integer("pixels", c.scan.pixels);
    s.string("output", c.scan.output);
    s.finish();
  }
  if (r.has("output")) {
    Reader s = r.child("output");
    s.string("directory", c.output.directory);
    if (s.has("formats")) {
      const json& f = s.at("formats");
      if (!f.is_array()) s.fail("formats", "expected an array of strings");
      c.output.formats.clear();
      for (const auto& x : f) {
        if (!x.is_string()) s.fail("formats", "expected an array of strings");
        c.output.formats.push_back(x.get<std::string>());
      }
    }
    s.finish();
  }
  if (r.has("calibration")) {
    Reader s = r.child("calibration");
    auto& k = c.calibration;
    s.string("source", k.source);
    s.number("background", k.background);
    s.number("peak_height", k.peak_height);
    s.quantity("width", k.width, Dimension::length);
    s.quantity_list("drive_voltages", k.drive_voltages, Dimension::voltage);
    s.quantity("response", k.response, Dimension::length_per_voltage);
    s.string("side", k.side);
    s.integer("profile_points", k.profile_points);
    s.number("profile_half_span", k.profile_half_span);
    s.integer("periods", k.periods);
    s.integer("bins_per_period", k.bins_per_period);
    s.number("profile_peak_counts", k.profile_peak_counts);
    s.number("trace_total_counts", k.trace_total_counts);
    s.string("profile_path", k.profile_path);
    s.string("trace_path", k.trace_path);
    s.finish();
  }
  if (r.has("sweep")) {
    Reader s = r.child("sweep");
    s.quantity("e_ac", c.sweep.e_ac, Dimension::electric_field);
    s.quantity("tau_e", c.sweep.tau_e, Dimension::time);
    s.quantity("tau_w_start", c.sweep.tau_w_start, Dimension::time);
    s.quantity("tau_w_stop", c.sweep.tau_w_stop, Dimension::time);
    s.integer("points", c.sweep.points);
    s.number("noise", c.sweep.noise);
    s.finish();
  }
  if (r.has("resolution")) {
    Reader s = r.child("resolution");
    s.quantity_list("z_values", c.resolution.z_values, Dimension::length);
    s.quantity_list("a_values", c.resolution.a_values, Dimension::length);
    s.integer("n_points", c.resolution.n_points);
    s.number("window", c.resolution.window);
    s.finish();
  }
  if (r.has("seed")) {
    const json& v = r.at("seed");
    if (!v.is_number_unsigned()) r.fail("seed", "expected a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  }
  r.finish();

  validate(c);
  return c;
}

RunConfig load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string emit(const RunConfig& c) {
  json j;
  json nv{{"D_gs", to_json(c.nv.D_gs)},
          {"gamma_e", to_json(c.nv.gamma_e)},
          {"d_perp", to_json(c.nv.d_perp)},
          {"B_perp", to_json(c.nv.B_perp)},
          {"rotation", c.nv.rotation}};
  if (c.nv.phi_B) nv["phi_B"] = to_json(*c.nv.phi_B);
  j["nv"] = nv;
  j["probe"] = {{"mode", c.probe.mode},
                {"amplitude", to_json(c.probe.amplitude)},
                {"frequency", to_json(c.probe.frequency)},
                {"phase", to_json(c.probe.phase)},
                {"z_nv", to_json(c.probe.z_nv)},
                {"projection", c.probe.projection},
                {"n_samples", c.probe.n_samples},
                {"magnitude", c.probe.magnitude}};
  json timing{{"tau_e", to_json(c.timing.tau_e)},
              {"tau_w", to_json(c.timing.tau_w)},
              {"readout_axis", c.timing.readout_axis}};
  if (c.timing.tau) timing["tau"] = to_json(*c.timing.tau);
  j["timing"] = timing;
  json sample{{"model", c.sample.model}, {"convention", c.sample.convention}};
  auto opt = [](json& o, const char* key, const auto& v) {
    if (v) o[key] = to_json(*v);
  };
  opt(sample, "lambda", c.sample.lambda);
  opt(sample, "period", c.sample.period);
  opt(sample, "sigma0", c.sample.sigma0);
  opt(sample, "extent", c.sample.extent);
  opt(sample, "resolution", c.sample.resolution);
  opt(sample, "smoothing", c.sample.smoothing);
  if (c.sample.path) sample["path"] = *c.sample.path;
  j["sample"] = sample;
  j["scan"] = {{"extent", to_json(c.scan.extent)}, {"pixels", c.scan.pixels}, {"output", c.scan.output}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  const auto& k = c.calibration;
  json cal{{"source", k.source},
           {"background", k.background},
           {"peak_height", k.peak_height},
           {"width", to_json(k.width)},
           {"side", k.side},
           {"profile_points", k.profile_points},
           {"profile_half_span", k.profile_half_span},
           {"periods", k.periods},
           {"bins_per_period", k.bins_per_period}};
  opt(cal, "drive_voltages", k.drive_voltages);
  opt(cal, "response", k.response);
  if (k.profile_peak_counts) cal["profile_peak_counts"] = *k.profile_peak_counts;
  if (k.trace_total_counts) cal["trace_total_counts"] = *k.trace_total_counts;
  if (k.profile_path) cal["profile_path"] = *k.profile_path;
  if (k.trace_path) cal["trace_path"] = *k.trace_path;
  j["calibration"] = cal;
  j["sweep"] = {{"e_ac", to_json(c.sweep.e_ac)},
                {"tau_e", to_json(c.sweep.tau_e)},
                {"tau_w_start", to_json(c.sweep.tau_w_start)},
                {"tau_w_stop", to_json(c.sweep.tau_w_stop)},
                {"points", c.sweep.points},
                {"noise", c.sweep.noise}};
  j["resolution"] = {{"z_values", to_json(c.resolution.z_values)},
                     {"a_values", to_json(c.resolution.a_values)},
                     {"n_points", c.resolution.n_points},
                     {"window", c.resolution.window}};
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Typed views

NVParams nv_params(const RunConfig& c) {
  NVParams p;
  p.zero_field_splitting = to_si(c.nv.D_gs, Dimension::frequency);
  p.gyromagnetic_ratio = to_si(c.nv.gamma_e, Dimension::gyromagnetic);
  p.dipole_perp = to_si(c.nv.d_perp, Dimension::dipole);
  p.bias_perp = to_si(c.nv.B_perp, Dimension::magnetic_field);
  p.bias_azimuth = c.nv.phi_B ? to_si(*c.nv.phi_B, Dimension::angle) : 0.0;
  if (c.nv.rotation == "tilted_111") {
    p.rotation = tilted_nv_rotation();
  } else if (c.nv.rotation == "axial") {
    p.rotation = Eigen::Matrix3d::Identity();
  } else {
    throw ConfigError("nv.rotation: expected \"tilted_111\" or \"axial\"");
  }
  checked("nv", [&] {
    p.validate();
    return 0;
  });
  return p;
}

EchoTiming echo_timing(const RunConfig& c) {
  EchoTiming t;
  t.frequency = to_si(c.probe.frequency, Dimension::frequency);
  t.tau = c.timing.tau ? to_si(*c.timing.tau, Dimension::time) : 1.0 / t.frequency;
  t.tau_e = to_si(c.timing.tau_e, Dimension::time);
  t.tau_w = to_si(c.timing.tau_w, Dimension::time);
  t.readout_axis = checked("timing.readout_axis", [&] { return parse_readout_axis(c.timing.readout_axis); });
  checked("timing", [&] {
    t.validate();
    return 0;
  });
  return t;
}

ScanMode scan_mode(const RunConfig& c) {
  return checked("probe.mode", [&] { return parse_scan_mode(c.probe.mode); });
}

ScanSettings scan_settings(const RunConfig& c) {
  ScanSettings s;
  s.params = nv_params(c);
  s.mode = scan_mode(c);
  s.z_nv = to_si(c.probe.z_nv, Dimension::length);
  s.amplitude = to_si(c.probe.amplitude, Dimension::length);
  s.timing = echo_timing(c);
  s.output = checked("scan.output", [&] { return parse_scan_output(c.scan.output); });
  s.projection = checked("probe.projection", [&] { return parse_projection(c.probe.projection); });
  s.align_bias = !c.nv.phi_B.has_value();
  s.n_samples = c.probe.n_samples;
  checked("probe", [&] {
    s.validate();
    return 0;
  });
  return s;
}

FieldConvention convention(const RunConfig& c) {
  return checked("sample.convention", [&] { return parse_convention(c.sample.convention); });
}

namespace {

void check_sample(const RunConfig& c) {
  const auto& s = c.sample;
  const auto it = sample_keys().find(s.model);
  if (it == sample_keys().end())
    throw ConfigError("sample.model: expected line_defect, striped, zero or file, got '" + s.model + "'");
  const std::map<std::string, bool> present = {
      {"lambda", s.lambda.has_value()},   {"period", s.period.has_value()},
      {"sigma0", s.sigma0.has_value()},   {"extent", s.extent.has_value()},
      {"resolution", s.resolution.has_value()}, {"smoothing", s.smoothing.has_value()},
      {"path", s.path.has_value()}};
  for (const auto& [key, has] : present) {
    const bool used = it->second.count(key) > 0;
    if (has && !used) throw ConfigError("sample." + key + ": not used by sample model '" + s.model + "'");
    if (!has && used && key != "smoothing")
      throw ConfigError("sample." + key + ": required by sample model '" + s.model + "'");
  }
}

}  // namespace

ChargeMap build_sample(const RunConfig& c) {
  check_sample(c);
  const auto& s = c.sample;
  auto len = [](const std::optional<Quantity>& q) { return to_si(*q, Dimension::length); };
  if (s.model == "file") return read_charge_map_text(*s.path);
  return checked("sample", [&]() -> ChargeMap {
    if (s.model == "line_defect")
      return make_line_defect(to_si(*s.lambda, Dimension::line_charge), len(s.resolution), len(s.extent));
    if (s.model == "striped")
      return make_striped_domains(len(s.period), to_si(*s.sigma0, Dimension::surface_charge), len(s.extent),
                                  len(s.resolution), s.smoothing ? len(s.smoothing) : 0.0);
    // zero
    const double res = len(s.resolution);
    const auto n = static_cast<Eigen::Index>(std::lround(len(s.extent) / res));
    if (n < 2) throw DomainError("extent must hold at least two cells");
    const double origin = -0.5 * static_cast<double>(n) * res + 0.5 * res;
    return ChargeMap(res, res, origin, origin, Eigen::ArrayXXd::Zero(n, n));
  });
}

ScanGrid scan_grid(const RunConfig& c) {
  return checked("scan", [&] { return ScanGrid::centered(to_si(c.scan.extent, Dimension::length), c.scan.pixels); });
}

PsfOptions psf_options(const RunConfig& c) {
  PsfOptions o;
  o.params = nv_params(c);
  o.projection = checked("probe.projection", [&] { return parse_projection(c.probe.projection); });
  o.convention = convention(c);
  o.n_points = c.resolution.n_points;
  o.window = c.resolution.window;
  o.n_samples = c.probe.n_samples;
  if (o.n_points < 512) throw ConfigError("resolution.n_points: at least 512");
  if (!(o.window > 0)) throw ConfigError("resolution.window: must be positive");
  return o;
}

GaussianProfile calibration_profile(const RunConfig& c) {
  const auto& k = c.calibration;
  const double w = to_si(k.width, Dimension::length);
  GaussianProfile g{k.background, k.peak_height * w * std::sqrt(kPi / 2.0), w, 0.0};
  checked("calibration", [&] {
    g.validate();
    return 0;
  });
  return g;
}

std::vector<double> drive_voltages(const RunConfig& c) {
  const auto& k = c.calibration;
  if (k.drive_voltages.has_value() != k.response.has_value())
    throw ConfigError("calibration: drive_voltages and response must be given together");
  if (!k.drive_voltages) return {};
  return to_si(*k.drive_voltages, Dimension::voltage);
}

std::vector<AmplitudeCalibrationSetup> calibration_setups(const RunConfig& c) {
  const auto& k = c.calibration;
  std::vector<double> amplitudes;
  const auto volts = drive_voltages(c);
  if (volts.empty()) {
    amplitudes.push_back(to_si(c.probe.amplitude, Dimension::length));
  } else {
    const double response = to_si(*k.response, Dimension::length_per_voltage);
    for (double v : volts) amplitudes.push_back(std::abs(response * v));
  }
  Side side = Side::left;
  if (k.side == "right") side = Side::right;
  else if (k.side != "left") throw ConfigError("calibration.side: expected left or right");
  if (k.profile_points < 8) throw ConfigError("calibration.profile_points: at least 8");
  if (!(k.profile_half_span > 1.0)) throw ConfigError("calibration.profile_half_span: must exceed 1");
  if (k.periods < 3) throw ConfigError("calibration.periods: at least 3");
  if (k.bins_per_period < 4) throw ConfigError("calibration.bins_per_period: at least 4");
  if (k.profile_peak_counts && !(*k.profile_peak_counts > 0))
    throw ConfigError("calibration.profile_peak_counts: must be positive");
  if (k.trace_total_counts && !(*k.trace_total_counts > 0))
    throw ConfigError("calibration.trace_total_counts: must be positive");

  std::vector<AmplitudeCalibrationSetup> out;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    AmplitudeCalibrationSetup s;
    s.truth = calibration_profile(c);
    s.amplitude = amplitudes[i];
    s.frequency = to_si(c.probe.frequency, Dimension::frequency);
    s.phase = to_si(c.probe.phase, Dimension::angle);
    s.side = side;
    s.profile_points = k.profile_points;
    s.profile_half_span = k.profile_half_span;
    s.periods = k.periods;
    s.bins_per_period = k.bins_per_period;
    s.profile_peak_counts = k.profile_peak_counts;
    s.trace_total_counts = k.trace_total_counts;
    s.seed = derive_seed(c.seed, 100 + i);
    out.push_back(s);
  }
  return out;
}

Eigen::VectorXd sweep_delays(const RunConfig& c) {
  const auto& s = c.sweep;
  if (s.points < 8) throw ConfigError("sweep.points: at least 8");
  if (!(s.noise >= 0)) throw ConfigError("sweep.noise: must be >= 0");
  const double a = to_si(s.tau_w_start, Dimension::time);
  const double b = to_si(s.tau_w_stop, Dimension::time);
  if (!(a >= 0 && b > a)) throw ConfigError("sweep: need 0 <= tau_w_start < tau_w_stop");
  return Eigen::VectorXd::LinSpaced(s.points, a, b);
}

void validate(const RunConfig& c) {
  scan_settings(c);
  convention(c);
  check_sample(c);
  const auto check_len = [](const std::optional<Quantity>& q, const char* key) {
    if (q && !(to_si(*q, Dimension::length) > 0)) throw ConfigError(std::string("sample.") + key + ": must be positive");
  };
  check_len(c.sample.period, "period");
  check_len(c.sample.extent, "extent");
  check_len(c.sample.resolution, "resolution");
  if (c.sample.smoothing && !(to_si(*c.sample.smoothing, Dimension::length) >= 0))
    throw ConfigError("sample.smoothing: must be >= 0");
  scan_grid(c);
  if (c.scan.pixels < 2) throw ConfigError("scan.pixels: at least 2");
  for (const auto& f : c.output.formats)
    if (f != "text" && f != "binary" && f != "svg")
      throw ConfigError("output.formats: unknown format '" + f + "' (text, binary, svg)");
  if (c.output.directory.empty()) throw ConfigError("output.directory: must not be empty");
  psf_options(c);
  calibration_setups(c);
  if (c.calibration.source != "synthetic" && c.calibration.source != "imported")
    throw ConfigError("calibration.source: expected synthetic or imported");
  if (c.calibration.source == "imported" && (!c.calibration.profile_path || !c.calibration.trace_path))
    throw ConfigError("calibration: imported source needs profile_path and trace_path");
  sweep_delays(c);
  for (double z : to_si(c.resolution.z_values, Dimension::length))
    if (!(z > 0)) throw ConfigError("resolution.z_values: must be positive");
  for (double a : to_si(c.resolution.a_values, Dimension::length))
    if (!(a > 0)) throw ConfigError("resolution.a_values: must be positive");
}

}  // namespace nvgrad::config
