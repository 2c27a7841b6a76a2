#include <fstream>
#include <map>
#include <sstream>

#include "nvgrad/imaging.hpp"

namespace nvgrad {

void write_scan(const std::string& raster_path, const std::string& header_path, const ScanImage& image) {
  image.validate();
  write_raster(raster_path, image.values, image.grid.pitch);
  std::ofstream os(header_path);
  if (!os) throw IoError("cannot open '" + header_path + "' for writing");
  os << "# scan sidecar; lengths in m, angles in rad\n";
  os << "nx = " << image.grid.nx << '\n';
  os << "ny = " << image.grid.ny << '\n';
  os << "pitch = " << format_number(image.grid.pitch) << '\n';
  os << "x0 = " << format_number(image.grid.x0) << '\n';
  os << "y0 = " << format_number(image.grid.y0) << '\n';
  os << "unit = " << image.unit() << '\n';
  os << "mode = " << to_string(image.meta.mode) << '\n';
  os << "z_nv = " << format_number(image.meta.z_nv) << '\n';
  os << "amplitude = " << format_number(image.meta.amplitude) << '\n';
  os << "projection = " << to_string(image.meta.projection) << '\n';
  os << "output = " << to_string(image.meta.output) << '\n';
  os << "bias_azimuth = " << format_number(image.meta.bias_azimuth) << '\n';
  if (!os) throw IoError("write failed for '" + header_path + "'");
}

ScanImage read_scan(const std::string& raster_path, const std::string& header_path) {
  std::ifstream is(header_path);
  if (!is) throw IoError("cannot open '" + header_path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError(header_path + ": malformed line '" + line + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError(header_path + ": missing key '" + key + "'");
    return it->second;
  };
  auto num = [&](const std::string& key) {
    try {
      return std::stod(get(key));
    } catch (const std::invalid_argument&) {
      throw IoError(header_path + ": key '" + key + "' is not a number");
    }
  };

  ScanImage image;
  double dx = 0.0;
  image.values = read_raster(raster_path, &dx);
  image.grid.nx = static_cast<Eigen::Index>(num("nx"));
  image.grid.ny = static_cast<Eigen::Index>(num("ny"));
  image.grid.pitch = num("pitch");
  image.grid.x0 = num("x0");
  image.grid.y0 = num("y0");
  if (image.values.rows() != image.grid.nx || image.values.cols() != image.grid.ny || dx != image.grid.pitch)
    throw IoError("scan raster '" + raster_path + "' does not match its header");
  try {
    image.meta = {parse_scan_mode(get("mode")), num("z_nv"), num("amplitude"),
                  parse_projection(get("projection")), parse_scan_output(get("output")),
                  num("bias_azimuth")};
  } catch (const DomainError& e) {
    throw IoError(header_path + ": " + e.what());
  }
  image.validate();
  return image;
}

void write_scan_text(const std::string& path, const ScanImage& image) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_grid_text(os, image.values, image.grid.pitch, image.grid.pitch, image.grid.x0, image.grid.y0);
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace nvgrad
