#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nvgrad/config.hpp"

namespace nvgrad::cli {

enum ExitCode : int { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

/// Output directory with the formats to emit. Holds `.nvgrad.lock` for its lifetime
/// so a second run into the same directory fails instead of interleaving files.
class OutputDir {
 public:
  OutputDir(const std::filesystem::path& dir, std::set<std::string> formats);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  bool wants(const std::string& format) const { return formats_.count(format) > 0; }
  std::string path(const std::string& name);  // records the file in `written()`
  const std::vector<std::string>& written() const { return written_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_, lock_;
  std::set<std::string> formats_;
  std::vector<std::string> written_;
};

void cmd_field(const config::RunConfig& config, OutputDir& out);
void cmd_scan(const config::RunConfig& config, OutputDir& out);
void cmd_psf(const config::RunConfig& config, OutputDir& out);
void cmd_resolution_map(const config::RunConfig& config, OutputDir& out);
void cmd_calibrate_amplitude(const config::RunConfig& config, OutputDir& out);
void cmd_delay_sweep(const config::RunConfig& config, OutputDir& out);
/// Acceptance suite; returns false when any criterion fails.
bool cmd_repro(OutputDir& out);

/// Full command line front end; returns the process exit code.
int run(int argc, char** argv);

}  // namespace nvgrad::cli
