#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace nvgrad {

/// Fixed 17-significant-digit formatting used by every text output.
std::string format_number(double value);

/// Splits a data line on commas, tabs and spaces.
std::vector<std::string> split_fields(const std::string& line);

/// Column-oriented numeric table with `name[unit]` column headers.
///
/// Text form:
///   # tau_w[s] P_s_plus[1] ...
///   1.0e-06 0.5 ...
struct Table {
  std::vector<std::string> names;
  std::vector<std::string> units;
  Eigen::MatrixXd data;  // rows x columns

  Eigen::Index column_index(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;
};

void write_table(std::ostream& os, const Table& table);
Table read_table(std::istream& is);
void write_table(const std::string& path, const Table& table);
Table read_table(const std::string& path);

}  // namespace nvgrad
