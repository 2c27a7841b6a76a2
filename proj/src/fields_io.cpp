#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nvgrad/fields.hpp"
#include "nvgrad/table_io.hpp"

namespace nvgrad {

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("raster: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_grid_text(std::ostream& os, const Eigen::ArrayXXd& values, double dx, double dy,
                     double x0, double y0) {
  os << "# nx ny dx dy x0 y0\n";
  os << "# " << values.rows() << ' ' << values.cols() << ' ' << format_number(dx) << ' '
     << format_number(dy) << ' ' << format_number(x0) << ' ' << format_number(y0) << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) os << ' ';
      os << format_number(values(i, j));
    }
    os << '\n';
  }
}

void write_charge_map_text(std::ostream& os, const ChargeMap& map) {
  write_grid_text(os, map.sigma(), map.dx(), map.dy(), map.x0(), map.y0());
}

ChargeMap read_charge_map_text(std::istream& is) {
  std::string line;
  bool have_geometry = false;
  long long nx = 0, ny = 0;
  double dx = 0, dy = 0, x0 = 0, y0 = 0;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (have_geometry) continue;
      std::istringstream hs(line.substr(1));
      if (hs >> nx >> ny >> dx >> dy >> x0 >> y0) have_geometry = true;
      continue;
    }
    for (const auto& f : split_fields(line)) {
      try {
        values.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw IoError("charge map: cannot parse value '" + f + "'");
      }
    }
  }
  if (!have_geometry) throw IoError("charge map: missing '# nx ny dx dy x0 y0' header");
  if (nx < 2 || ny < 2 || static_cast<long long>(values.size()) != nx * ny)
    throw IoError("charge map: value count does not match header dimensions");
  Eigen::ArrayXXd sigma(nx, ny);
  for (long long i = 0; i < nx; ++i)
    for (long long j = 0; j < ny; ++j) sigma(i, j) = values[static_cast<std::size_t>(i * ny + j)];
  return ChargeMap(dx, dy, x0, y0, std::move(sigma));
}

void write_charge_map_text(const std::string& path, const ChargeMap& map) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_charge_map_text(os, map);
  if (!os) throw IoError("write failed: '" + path + "'");
}

ChargeMap read_charge_map_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  try {
    return read_charge_map_text(is);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_raster(std::ostream& os, const Eigen::ArrayXXd& values, double dx) {
  put_le<std::int64_t>(os, values.rows());
  put_le<std::int64_t>(os, values.cols());
  put_le<double>(os, dx);
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) put_le<double>(os, values(i, j));
}

Eigen::ArrayXXd read_raster(std::istream& is, double* dx) {
  const auto nx = get_le<std::int64_t>(is);
  const auto ny = get_le<std::int64_t>(is);
  const auto d = get_le<double>(is);
  if (nx <= 0 || ny <= 0 || nx > (1LL << 31) || ny > (1LL << 31))
    throw IoError("raster: invalid dimensions");
  Eigen::ArrayXXd values(nx, ny);
  for (std::int64_t i = 0; i < nx; ++i)
    for (std::int64_t j = 0; j < ny; ++j) values(i, j) = get_le<double>(is);
  if (dx) *dx = d;
  return values;
}

void write_raster(const std::string& path, const Eigen::ArrayXXd& values, double dx) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_raster(os, values, dx);
  if (!os) throw IoError("write failed: '" + path + "'");
}

Eigen::ArrayXXd read_raster(const std::string& path, double* dx) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  try {
    return read_raster(is, dx);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace nvgrad
