#pragma once

// Run configuration for the command-line tool.
//
// A config is one JSON object with optional sections cavity, receiver,
// signal, simulation and scan. Unknown keys anywhere are rejected. Rates and
// frequencies are given either dimensionless ("..._over_kloss") or in Hz
// ("..._hz") together with cavity.kappa_loss_hz; times likewise as
// "..._kloss" (time * kappa_loss) or "..._s". Internally every quantity is
// in units of kappa_loss.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axsq/cavity.hpp"
#include "axsq/estimation.hpp"

namespace axsq::cli {

struct SimulationSection {
  double dt = 0.02;
  std::size_t n_steps = 1 << 19;
  std::size_t n_trajectories = 16;
  std::uint64_t seed = 0;
  std::size_t segment_length = 1024;
  double overlap = 0.5;
  double tolerance = 0.05;
  double omega_max_over_kappa = 5.0;
  bool vacuum_start = false;
  bool dump_trajectory = false;
  std::size_t dump_max_rows = 100000;
  double max_z = 3.0;
};

struct ScanSection {
  double delta_a = 1e-6;
  double t_av_constant = 1.0;
  std::vector<double> gains{1.0};
  double kappa_m_min = 0.1;
  double kappa_m_max = 100.0;
  bool numeric = false;
  double omega_max = 10.0;
};

struct RunConfig {
  CavityParams params;
  ReceiverConfig receiver;
  std::optional<ForceSignal> signal;
  SimulationSection simulation;
  ScanSection scan;
  std::optional<double> kappa_loss_hz;
};

/// Parses and validates a config document. Throws ConfigError naming the
/// offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Every resolved parameter, in kappa_loss units, for the run manifest.
nlohmann::json resolved_parameters(const RunConfig& cfg);

}  // namespace axsq::cli
