#include "nvgrad/table_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvgrad/error.hpp"

namespace nvgrad {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == '\t' || c == ' ' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Eigen::Index Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  throw IoError("table has no column '" + name + "'");
}

Eigen::VectorXd Table::column(const std::string& name) const {
  return data.col(column_index(name));
}

void write_table(std::ostream& os, const Table& table) {
  os << "#";
  for (std::size_t i = 0; i < table.names.size(); ++i) {
    os << ' ' << table.names[i];
    if (i < table.units.size() && !table.units[i].empty()) os << '[' << table.units[i] << ']';
  }
  os << '\n';
  for (Eigen::Index r = 0; r < table.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.data.cols(); ++c) {
      if (c) os << '\t';
      os << format_number(table.data(r, c));
    }
    os << '\n';
  }
}

Table read_table(std::istream& is) {
  Table t;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (have_header) continue;
      for (const auto& f : split_fields(line.substr(1))) {
        const auto open = f.find('[');
        if (open != std::string::npos && f.back() == ']') {
          t.names.push_back(f.substr(0, open));
          t.units.push_back(f.substr(open + 1, f.size() - open - 2));
        } else {
          t.names.push_back(f);
          t.units.emplace_back();
        }
      }
      have_header = !t.names.empty();
      continue;
    }
    std::vector<double> row;
    for (const auto& f : split_fields(line)) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(f, &used));
        if (used != f.size()) throw std::invalid_argument(f);
      } catch (const std::exception&) {
        throw IoError("table: cannot parse number '" + f + "'");
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("table: ragged rows");
    rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError("table: missing '#' header line");
  const auto ncol = static_cast<Eigen::Index>(t.names.size());
  t.data.resize(static_cast<Eigen::Index>(rows.size()), ncol);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != ncol)
      throw IoError("table: row width does not match header");
    for (Eigen::Index c = 0; c < ncol; ++c)
      t.data(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return t;
}

void write_table(const std::string& path, const Table& table) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_table(os, table);
  if (!os) throw IoError("write failed: '" + path + "'");
}

Table read_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  try {
    return read_table(is);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace nvgrad
