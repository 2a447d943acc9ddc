#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xychain/localization.hpp"
#include "xychain/model.hpp"

namespace xychain {

/// Everything read from a config file. The flat key=value format and the
/// full key list are documented in the README; [section] headers are
/// organizational only.
struct RunConfig {
  EnsembleConfig ensemble;
  ObservablePair pair;
  double cluster_rate = 1.0;            // cluster_eta
  TimeGrid cluster_grid{12.0, 0.5};     // cluster_t_max / cluster_t_step
  TimeGrid lr_grid{16.0, 0.25};         // lr_t_max / lr_t_step
  TimeGrid small_time_grid{1.0, 0.02};  // smallt_max / smallt_step
  std::vector<double> epsilon_grid{0.0, 0.001, 0.002, 0.005, 0.01, 0.02};
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

struct RunSettings {
  RunConfig config;
  std::string config_path;
  std::filesystem::path output_dir;
  int workers = 1;
};

/// Coarse cluster grid plus a fixed set of refined small-t points, sorted
/// and deduplicated.
std::vector<double> cluster_time_points(const TimeGrid& coarse);

/// Union of the small-time and coarse sweeps for the lr command.
std::vector<double> merged_time_points(const TimeGrid& fine, const TimeGrid& coarse);

void cmd_diagonalize(const RunSettings& settings);
void cmd_dynloc(const RunSettings& settings);
void cmd_lr(const RunSettings& settings);
void cmd_cluster(const RunSettings& settings);
void cmd_gapstats(const RunSettings& settings);
void cmd_correlations(const RunSettings& settings);

/// Cross-engine invariant suite; returns true when every check passes.
/// negative_control flips the sign of one W column (without re-pairing) and
/// is expected to make the diagonalization residual check fail.
bool cmd_verify(const RunSettings& settings, bool negative_control);

}  // namespace xychain
