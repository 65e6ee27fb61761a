#include "commands.hpp"

#include <CLI11.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "axsq/errors.hpp"
#include "axsq/langevin.hpp"
#include "axsq/scan.hpp"
#include "axsq/welch.hpp"

#ifndef AXSQ_VERSION
#define AXSQ_VERSION "unknown"
#endif

namespace axsq::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kManifestName = "manifest.json";

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_cell(const json& cell) {
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_number_unsigned()) return std::to_string(cell.get<std::uint64_t>());
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_null()) return "nan";
  return format_number(cell.get<double>());
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

ScanConfig scan_config(const RunConfig& cfg) {
  ScanConfig sc;
  sc.params = cfg.params;
  sc.cfg = cfg.receiver;
  sc.delta_a = cfg.scan.delta_a;
  sc.t_av_constant = cfg.scan.t_av_constant;
  return sc;
}

void require_axion(const RunConfig& cfg, const char* command) {
  if (cfg.receiver.axion.density(0.0) <= 0.0 || cfg.params.kappa_ax <= 0.0) {
    throw ConfigError(std::string(command) + " needs receiver.axion with n_ax > 0 and cavity.kappa_ax > 0");
  }
}

SimulationConfig simulation_config(const RunConfig& cfg) {
  SimulationConfig sim;
  sim.params = cfg.params;
  sim.cfg = cfg.receiver;
  sim.signal = cfg.signal;
  sim.dt = cfg.simulation.dt;
  sim.n_steps = cfg.simulation.n_steps;
  sim.n_trajectories = cfg.simulation.n_trajectories;
  sim.seed = cfg.simulation.seed;
  sim.validate();
  return sim;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string extension(Format f) { return f == Format::Csv ? ".csv" : ".json"; }

}  // namespace

std::string format_table(const Table& table, Format format) {
  if (format == Format::Json) {
    json j;
    j["manifest"] = kManifestName;
    j["columns"] = table.columns;
    json rows = json::array();
    for (const auto& r : table.rows) {
      json row = json::array();
      for (const auto& c : r) row.push_back(c.is_number_float() ? finite_or_null(c.get<double>()) : c);
      rows.push_back(row);
    }
    j["rows"] = rows;
    return j.dump(1) + "\n";
  }
  std::string out = std::string("# manifest: ") + kManifestName + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_cell(r[i]);
    out += "\n";
  }
  return out;
}

CommandResult cmd_spectrum(const RunConfig& cfg, std::size_t grid_points) {
  if (grid_points < 2) throw ConfigError("--grid-points must be >= 2 for spectrum");
  const auto& p = cfg.params;
  Table t{{"omega_over_kloss", "chi_mm_sq", "chi_ml_sq", "chi_ma_sq", "S_x_out", "sigma"}, {}};
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double w = cfg.scan.omega_max * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const auto chi = susceptibility(w, p);
    t.rows.push_back({w, std::norm(chi(0, 0)), std::norm(chi(0, 1)), std::norm(chi(0, 2)),
                      output_spectrum(w, p, cfg.receiver), sensitivity(w, p, cfg.receiver)});
  }
  json summary;
  const double sigma0 = sensitivity(0.0, p, cfg.receiver);
  summary["sigma_0"] = sigma0;
  summary["halfwidth_over_kloss"] = nullptr;
  if (sigma0 > 0.0) {
    try {
      summary["halfwidth_over_kloss"] = sensitivity_halfwidth(p, cfg.receiver);
    } catch (const UnboundedBandwidthError&) {
    }
  }
  return {{{"spectrum", t}}, summary, kExitOk, {}};
}

CommandResult cmd_optimize(const RunConfig& cfg) {
  require_axion(cfg, "optimize");
  const auto sc = scan_config(cfg);
  Table t{{"gain", "kappa_m_over_kloss", "rate_normalized", "advantage"}, {}};
  for (double g : cfg.scan.gains) {
    const auto opt = optimize_kappa_m(g, sc);
    t.rows.push_back({g, opt.kappa_m_opt, opt.rate_opt, opt.advantage});
  }
  return {{{"optimize", t}}, nullptr, kExitOk, {}};
}

CommandResult cmd_scan_rate(const RunConfig& cfg, std::size_t grid_points) {
  require_axion(cfg, "scan-rate");
  if (grid_points < 1) throw ConfigError("--grid-points must be >= 1 for scan-rate");
  const auto sc = scan_config(cfg);
  auto rate = [&](double g, double km) {
    return cfg.scan.numeric ? scan_rate_numeric(g, km, sc) : scan_rate_closed_form(g, km, sc);
  };
  // Advantage is relative to the unsqueezed optimum kappa_m = 2 kappa_loss.
  const double reference = rate(1.0, 2.0);
  Table t{{"gain", "kappa_m_over_kloss", "rate_normalized", "advantage"}, {}};
  for (double g : cfg.scan.gains) {
    for (double km : log_grid(cfg.scan.kappa_m_min, cfg.scan.kappa_m_max, grid_points)) {
      const double r = rate(g, km);
      t.rows.push_back({g, km, r, r / reference});
    }
  }
  return {{{"scan_rate", t}}, nullptr, kExitOk, {}};
}

CommandResult cmd_montecarlo(const RunConfig& cfg) {
  const auto sim = simulation_config(cfg);
  const auto init = cfg.simulation.vacuum_start ? InitialCondition::vacuum() : InitialCondition::stationary();
  const auto est = simulate_output_psd(sim, {cfg.simulation.segment_length, cfg.simulation.overlap}, init);
  const double omega_max = cfg.simulation.omega_max_over_kappa * cfg.params.kappa();
  const auto cmp = compare_with_analytic(est.spectrum, cfg.params, cfg.receiver, omega_max, cfg.simulation.tolerance);

  CommandResult res;
  Table psd{{"omega_over_kloss", "S_measured", "S_analytic", "rel_err"}, {}};
  for (const auto& r : cmp.rows) psd.rows.push_back({r.omega, r.measured, r.analytic, r.rel_err});
  res.tables.push_back({"psd", psd});
  if (cfg.simulation.dump_trajectory) {
    const auto traj = integrate_one(sim, 0, init);
    Table dump{{"time", "x", "y"}, {}};
    for (std::size_t k = 0; k < traj.times.size(); ++k) dump.rows.push_back({traj.times[k], traj.x[k], traj.y[k]});
    res.tables.push_back({"trajectory", dump});
  }
  const bool enough = est.segments >= kMinWelchSegments;
  const bool pass = cmp.pass && enough;
  res.summary = {{"segments", est.segments},
                 {"min_segments", kMinWelchSegments},
                 {"tolerance", cfg.simulation.tolerance},
                 {"omega_max_over_kloss", omega_max},
                 {"worst_rel_err", cmp.worst_rel_err},
                 {"worst_omega_over_kloss", cmp.worst_omega},
                 {"pass", pass}};
  if (!pass) {
    res.exit_code = kExitStatistical;
    res.message = !enough ? "only " + std::to_string(est.segments) + " Welch segments (need " +
                                std::to_string(kMinWelchSegments) + ")"
                          : "worst bin omega = " + format_number(cmp.worst_omega) + " has relative error " +
                                format_number(cmp.worst_rel_err) + " (tolerance " +
                                format_number(cfg.simulation.tolerance) + ")";
  }
  return res;
}

CommandResult cmd_estimate(const RunConfig& cfg) {
  const auto sim = simulation_config(cfg);
  if (sim.n_trajectories < kMinForceTrajectories) {
    throw ConfigError("estimate needs simulation.n_trajectories >= " + std::to_string(kMinForceTrajectories));
  }
  const double gain = cfg.receiver.gain.flat_value();
  const double csl = csl_variance(sim.duration());
  struct Row {
    const char* name;
    Protocol protocol;
    double gain;
  };
  const Row rows[] = {{"csl", Protocol::Csl, 1.0},
                      {"squeezed", Protocol::Squeezed, gain},
                      {"two_mode_fy", Protocol::TwoModeFy, gain},
                      {"two_mode_fx", Protocol::TwoModeFx, gain},
                      {"dissipative", Protocol::Dissipative, gain}};
  Table t{{"protocol", "gain", "t_s", "closed_form", "monte_carlo", "standard_error", "z_score", "ratio_to_csl"}, {}};
  double worst_z = 0.0;
  std::string worst_name;
  for (const auto& row : rows) {
    const auto est = estimate_force_variance(sim, row.protocol);
    const double z = (est.variance - est.expected) / est.standard_error;
    if (std::abs(z) > std::abs(worst_z)) {
      worst_z = z;
      worst_name = row.name;
    }
    t.rows.push_back({row.name, row.gain, est.t_s, est.expected, est.variance, est.standard_error, z,
                      est.expected / csl});
  }
  CommandResult res{{{"estimate", t}}, {{"max_abs_z", std::abs(worst_z)}, {"max_z", cfg.simulation.max_z}}, kExitOk, {}};
  res.summary["pass"] = std::abs(worst_z) <= cfg.simulation.max_z;
  if (std::abs(worst_z) > cfg.simulation.max_z) {
    res.exit_code = kExitStatistical;
    res.message = "protocol " + worst_name + " deviates by " + format_number(worst_z) + " standard errors";
  }
  return res;
}

int run(const Options& opts, std::ostream& err) {
  CommandResult result;
  json manifest;
  try {
    auto cfg = load_config(opts.config_path);
    if (opts.seed) cfg.simulation.seed = *opts.seed;
    const auto& cmd = opts.subcommand;
    std::optional<std::size_t> grid = opts.grid_points;
    if (cmd == "spectrum") {
      result = cmd_spectrum(cfg, grid.value_or(401));
    } else if (cmd == "optimize") {
      result = cmd_optimize(cfg);
    } else if (cmd == "scan-rate") {
      result = cmd_scan_rate(cfg, grid.value_or(50));
    } else if (cmd == "montecarlo") {
      result = cmd_montecarlo(cfg);
    } else if (cmd == "estimate") {
      result = cmd_estimate(cfg);
    } else {
      throw ConfigError("unknown subcommand '" + cmd + "'");
    }
    manifest["tool"] = "axsq";
    manifest["version"] = AXSQ_VERSION;
    manifest["csv_schema_version"] = kCsvSchemaVersion;
    manifest["subcommand"] = cmd;
    manifest["seed"] = cfg.simulation.seed;
    manifest["format"] = opts.format == Format::Csv ? "csv" : "json";
    manifest["grid_points"] = grid ? json(*grid) : json(nullptr);
    manifest["parameters"] = resolved_parameters(cfg);
    json outputs = json::array();
    for (const auto& a : result.tables) outputs.push_back(a.name + extension(opts.format));
    if (!result.summary.is_null()) outputs.push_back("summary.json");
    manifest["outputs"] = outputs;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    if (const auto* opt = dynamic_cast<const OptimizationError*>(&e)) err << opt->grid;
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }

  try {
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    write_file(dir / kManifestName, manifest.dump(2) + "\n");
    for (const auto& a : result.tables) write_file(dir / (a.name + extension(opts.format)), format_table(a.table, opts.format));
    if (!result.summary.is_null()) {
      json s = result.summary;
      s["manifest"] = kManifestName;
      write_file(dir / "summary.json", s.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kExitFailure;
  }
  if (result.exit_code != kExitOk) err << "statistical acceptance failed: " << result.message << "\n";
  return result.exit_code;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Squeezed-receiver haloscope models: spectra, scan rates and Monte Carlo checks"};
  app.set_version_flag("--version", AXSQ_VERSION);
  Options opts;
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::size_t grid = 0;
  app.require_subcommand(1, 1);
  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "susceptibility, output spectrum and sensitivity on a frequency grid"},
      {"optimize", "optimal kappa_m and quantum advantage for each gain in scan.gains"},
      {"scan-rate", "scan rate over a kappa_m grid for each gain in scan.gains"},
      {"montecarlo", "Welch spectrum of simulated output compared with the analytic spectrum"},
      {"estimate", "closed-form vs Monte Carlo force-estimator variances"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "JSON config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override simulation.seed");
    sub->add_option("--grid-points", grid, "grid size (spectrum: omega points, scan-rate: kappa_m points)");
    sub->add_option("--format", format, "data file format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  for (auto* sub : app.get_subcommands()) {
    opts.subcommand = sub->get_name();
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--grid-points")) opts.grid_points = grid;
  }
  opts.format = format == "json" ? Format::Json : Format::Csv;
  return run(opts, std::cerr);
}

}  // namespace axsq::cli
