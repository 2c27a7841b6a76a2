#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nvgrad/commands.hpp"
#include "nvgrad/table_io.hpp"

using namespace nvgrad;
namespace fs = std::filesystem;

namespace {

fs::path root() {
  const char* env = std::getenv("NVGRAD_TEST_TMP");
  const fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "nvgrad_cli";
  fs::create_directories(p);
  return p;
}

fs::path fresh(const std::string& name) {
  const fs::path p = root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int nvgrad_main(std::vector<std::string> args) {
  args.insert(args.begin(), "nvgrad");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

const char* kLine = R"({"probe": {"z_nv": {"value": 40, "unit": "nm"}},
  "scan": {"extent": {"value": 0.4, "unit": "um"}, "pixels": 16},
  "sample": {"model": "line_defect", "lambda": {"value": 0.1, "unit": "nC/m"},
             "extent": {"value": 8, "unit": "um"}, "resolution": {"value": 8, "unit": "nm"}}})";

}  // namespace

TEST_CASE("exit codes") {
  const fs::path d = fresh("exit");
  const auto good = write_file(d / "good.json", kLine).string();
  CHECK(nvgrad_main({"field", "--config", good, "--out", (d / "ok").string()}) == 0);
  CHECK(nvgrad_main({"field", "--config", (d / "missing.json").string(), "--out", (d / "x").string()}) == 4);
  const auto unknown = write_file(d / "unknown.json", R"({"probe": {"zz": 1}})").string();
  CHECK(nvgrad_main({"field", "--config", unknown, "--out", (d / "x").string()}) == 2);
  const auto unitless = write_file(d / "unitless.json", R"({"probe": {"z_nv": 17}})").string();
  CHECK(nvgrad_main({"scan", "--config", unitless, "--out", (d / "x").string()}) == 2);
  CHECK(nvgrad_main({"scan", "--config", good, "--format", "pdf"}) == 2);
  CHECK(nvgrad_main({"frobnicate"}) == 2);

  // a flat imported profile cannot be fitted
  write_file(d / "flat.tsv", "# z[m] counts[counts]\n0\t5\n1e-6\t5\n2e-6\t5\n3e-6\t5\n4e-6\t5\n5e-6\t5\n6e-6\t5\n7e-6\t5\n8e-6\t5\n9e-6\t5\n");
  write_file(d / "trace.tsv", "# time[s] counts[counts]\n0\t5\n1e-6\t6\n2e-6\t5\n3e-6\t4\n");
  const auto imported = write_file(d / "imported.json", "{\"calibration\": {\"source\": \"imported\", \"profile_path\": \"" +
                                                            (d / "flat.tsv").string() + "\", \"trace_path\": \"" +
                                                            (d / "trace.tsv").string() + "\"}}")
                            .string();
  CHECK(nvgrad_main({"calibrate-amplitude", "--config", imported, "--out", (d / "cal").string()}) == 3);

  // output path occupied by a regular file
  write_file(d / "blocker", "x");
  CHECK(nvgrad_main({"field", "--config", good, "--out", (d / "blocker" / "sub").string()}) == 4);
}

TEST_CASE("lock file") {
  const fs::path d = fresh("lock");
  const auto good = write_file(d / "good.json", kLine).string();
  const fs::path out = d / "out";
  CHECK(nvgrad_main({"field", "--config", good, "--out", out.string()}) == 0);
  CHECK_FALSE(fs::exists(out / ".nvgrad.lock"));
  write_file(out / ".nvgrad.lock", "12345");
  CHECK(nvgrad_main({"field", "--config", good, "--out", out.string()}) == 4);
  CHECK(fs::exists(out / ".nvgrad.lock"));
  fs::remove(out / ".nvgrad.lock");
  CHECK(nvgrad_main({"field", "--config", good, "--out", out.string()}) == 0);
}

TEST_CASE("reruns are byte identical") {
  const fs::path d = fresh("rerun");
  const auto good = write_file(d / "good.json", kLine).string();
  for (const std::string cmd : {"scan", "delay-sweep"}) {
    for (const std::string fmt : {"text", "binary"}) {
      const fs::path a = d / (cmd + fmt + "a"), b = d / (cmd + fmt + "b");
      REQUIRE(nvgrad_main({cmd, "--config", good, "--out", a.string(), "--seed", "7", "--format", fmt}) == 0);
      ::setenv("NVGRAD_THREADS", "3", 1);
      REQUIRE(nvgrad_main({cmd, "--config", good, "--out", b.string(), "--seed", "7", "--format", fmt}) == 0);
      ::unsetenv("NVGRAD_THREADS");
      int files = 0;
      for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        CHECK_MESSAGE(slurp(e.path()) == slurp(b / e.path().filename()), e.path().string());
      }
      CHECK(files > 0);
    }
  }
}

TEST_CASE("zero charge gives zero rasters") {
  const fs::path d = fresh("zero");
  const auto cfg = write_file(d / "zero.json", R"({"sample": {"model": "zero", "extent": {"value": 1, "unit": "um"},
      "resolution": {"value": 4, "unit": "nm"}}, "scan": {"extent": {"value": 0.2, "unit": "um"}, "pixels": 8}})")
                       .string();
  REQUIRE(nvgrad_main({"field", "--config", cfg, "--out", (d / "f").string(), "--format", "binary"}) == 0);
  REQUIRE(nvgrad_main({"scan", "--config", cfg, "--out", (d / "s").string(), "--format", "binary"}) == 0);
  for (const fs::path p : {d / "f" / "field_Ex.bin", d / "f" / "field_Ez.bin", d / "s" / "scan.bin"}) {
    const std::string bytes = slurp(p);
    REQUIRE(bytes.size() > 24);
    CHECK(bytes.find_first_not_of('\0', 24) == std::string::npos);
  }
}

TEST_CASE("line defect field profile matches the analytic field near the defect") {
  const fs::path d = fresh("profile");
  const auto cfg = write_file(d / "line.json", kLine).string();
  REQUIRE(nvgrad_main({"field", "--config", cfg, "--out", (d / "o").string()}) == 0);
  const Table t = read_table((d / "o" / "field_profile.tsv").string());
  const auto x = t.column("x"), ex = t.column("E_x"), ez = t.column("E_z");
  const auto ax = t.column("E_x_analytic"), az = t.column("E_z_analytic");
  const double z = 40e-9, scale = az.cwiseAbs().maxCoeff();
  int checked = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > 2 * z) continue;
    ++checked;
    CHECK(std::abs(ez(i) - az(i)) <= 0.02 * scale);
    CHECK(std::abs(ex(i) - ax(i)) <= 0.02 * scale);
  }
  CHECK(checked >= 10);
}

TEST_CASE("striped sample scan shows the domain period") {
  const fs::path d = fresh("stripes");
  const auto cfg = write_file(d / "stripes.json", R"({
    "sample": {"model": "striped", "period": {"value": 10, "unit": "um"}, "sigma0": {"value": 0.71, "unit": "uC/cm^2"},
               "extent": {"value": 36, "unit": "um"}, "resolution": {"value": 100, "unit": "nm"},
               "smoothing": {"value": 200, "unit": "nm"}},
    "scan": {"extent": {"value": 18, "unit": "um"}, "pixels": 64}})")
                       .string();
  REQUIRE(nvgrad_main({"scan", "--config", cfg, "--out", (d / "o").string()}) == 0);
  const Table t = read_table((d / "o" / "scan_summary.tsv").string());
  CHECK(std::abs(t.column("dominant_period")(0) - 10e-6) <= 18e-6 / 63);
}

TEST_CASE("every subcommand runs on defaults") {
  const fs::path d = fresh("all");
  const auto cfg = write_file(d / "small.json", R"({"resolution": {"z_values": {"value": [10, 20], "unit": "nm"},
      "a_values": {"value": [2, 15], "unit": "nm"}, "n_points": 512}, "scan": {"pixels": 8}})")
                       .string();
  for (const std::string cmd : {"field", "scan", "psf", "resolution-map", "calibrate-amplitude", "delay-sweep"}) {
    CHECK_MESSAGE(nvgrad_main({cmd, "--config", cfg, "--out", (d / cmd).string(), "--format", "svg"}) == 0, cmd);
    bool svg = false;
    for (const auto& e : fs::directory_iterator(d / cmd)) svg = svg || e.path().extension() == ".svg";
    CHECK_MESSAGE(svg, cmd);
  }
  CHECK(nvgrad_main({"defaults"}) == 0);
}
