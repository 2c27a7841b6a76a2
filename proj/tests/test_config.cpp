#include <doctest.h>

#include <cmath>

#include "nvgrad/config.hpp"

using namespace nvgrad;
using namespace nvgrad::config;

TEST_CASE("defaults are valid and round trip") {
  const RunConfig c;
  CHECK_NOTHROW(validate(c));
  const std::string text = emit(c);
  CHECK(emit(parse(text)) == text);
}

TEST_CASE("non-default values round trip") {
  RunConfig c;
  c.probe.amplitude = {3.0, "nm"};
  c.probe.mode = "shear_x";
  c.nv.phi_B = Quantity{0.25, "rad"};
  c.timing.tau = Quantity{5.0, "us"};
  c.sample.model = "striped";
  c.sample.lambda.reset();
  c.sample.period = Quantity{10.0, "um"};
  c.sample.sigma0 = Quantity{0.71, "uC/cm^2"};
  c.sample.extent = Quantity{36.0, "um"};
  c.sample.resolution = Quantity{100.0, "nm"};
  c.sample.smoothing = Quantity{200.0, "nm"};
  c.scan.extent = {18.0, "um"};
  c.calibration.drive_voltages = QuantityList{{0.1, 0.2, 0.3}, "V"};
  c.calibration.response = Quantity{10.0, "nm/V"};
  c.seed = 12345678901234ULL;
  const std::string text = emit(c);
  const RunConfig back = parse(text);
  CHECK(emit(back) == text);
  CHECK(back.seed == c.seed);
  CHECK(back.probe.mode == "shear_x");
  CHECK(back.sample.period->value == 10.0);
}

TEST_CASE("unit conversion") {
  CHECK(to_si({17.0, "nm"}, Dimension::length) == doctest::Approx(17e-9));
  CHECK(to_si({2.36, "kV/cm"}, Dimension::electric_field) == doctest::Approx(2.36e5));
  CHECK(to_si({180.0, "kHz"}, Dimension::frequency) == doctest::Approx(180e3));
  CHECK(to_si({1.0, "mT"}, Dimension::magnetic_field) == doctest::Approx(1e-3));
  CHECK(to_si({17.0, "Hz*cm/V"}, Dimension::dipole) == doctest::Approx(0.17));
  CHECK_THROWS_AS(to_si({17.0, "nm"}, Dimension::time), ConfigError);
  CHECK_THROWS_AS(to_si({17.0, "furlong"}, Dimension::length), ConfigError);
}

TEST_CASE("strict parsing") {
  CHECK_NOTHROW(parse("{}"));
  CHECK_NOTHROW(parse(R"({"probe": {"z_nv": {"value": 20, "unit": "nm"}}})"));
  CHECK_THROWS_AS(parse(R"({"probe": {"z_nvv": {"value": 20, "unit": "nm"}}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"probes": {}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"probe": {"z_nv": 20}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"probe": {"z_nv": {"value": 20}}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"probe": {"z_nv": {"value": 20, "unit": "nm", "extra": 1}}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"probe": {"z_nv": {"value": 20, "unit": "GHz"}}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"probe": {"mode": "tapping"}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"probe": {"n_samples": "many"}})"), ConfigError);
  CHECK_THROWS_AS(parse("{not json"), ConfigError);
  CHECK_THROWS_AS(load("/nonexistent/nvgrad.json"), IoError);
}

TEST_CASE("precondition violations are config errors") {
  CHECK_THROWS_AS(parse(R"({"probe": {"amplitude": {"value": 17, "unit": "nm"}}})"), ConfigError);
  CHECK_NOTHROW(parse(R"({"probe": {"mode": "shear_x", "amplitude": {"value": 17, "unit": "nm"}}})"));
  CHECK_THROWS_AS(parse(R"({"probe": {"z_nv": {"value": -1, "unit": "nm"}}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"scan": {"pixels": 1}})"), ConfigError);
}

TEST_CASE("sample block replaces the default sample") {
  const RunConfig c = parse(R"({"sample": {"model": "zero", "extent": {"value": 1, "unit": "um"},
                                           "resolution": {"value": 4, "unit": "nm"}}})");
  CHECK_FALSE(c.sample.lambda.has_value());
  const ChargeMap m = build_sample(c);
  CHECK((m.sigma() == 0.0).all());
}

TEST_CASE("typed views") {
  const RunConfig c;
  const ScanSettings s = scan_settings(c);
  CHECK(s.z_nv == doctest::Approx(17e-9));
  CHECK(s.amplitude == doctest::Approx(0.8e-9));
  CHECK(scan_mode(c) == ScanMode::intermittent);
  CHECK(convention(c) == FieldConvention::paper);
  const EchoTiming t = echo_timing(c);
  CHECK(t.tau == doctest::Approx(1 / 180e3));
  const ScanGrid g = scan_grid(c);
  CHECK(g.nx == 128);
  CHECK(sweep_delays(c).size() == 41);
}
