#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "axsq/errors.hpp"

namespace axsq::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

// Reads keys from one JSON object and remembers which ones were consumed,
// so leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& obj, std::string path, std::optional<double> anchor)
      : obj_(obj), path_(std::move(path)), anchor_(anchor) {
    if (!obj_.is_object()) fail(path_, "must be a JSON object");
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }

  const json* raw(const std::string& key) {
    const auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  std::optional<double> number(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(field(key), "must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(field(key), "must be finite");
    return x;
  }

  double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  std::optional<std::uint64_t> integer(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned()) fail(field(key), "must be a nonnegative integer");
    return v->get<std::uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) fail(field(key), "must be true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(field(key), "must be a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->empty()) fail(field(key), "must be a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) fail(field(key), "must contain only finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  // A frequency-like quantity: base + "_over_kloss", or base + "_hz" with the anchor.
  std::optional<double> rate(const std::string& base) {
    const auto dimless = number(base + "_over_kloss");
    const auto hz = number(base + "_hz");
    if (dimless && hz) fail(field(base), "give either _over_kloss or _hz, not both");
    if (hz) return *hz / require_anchor(base + "_hz");
    return dimless;
  }

  std::optional<std::vector<double>> rates(const std::string& base) {
    const auto dimless = numbers(base + "_over_kloss");
    const auto hz = numbers(base + "_hz");
    if (dimless && hz) fail(field(base), "give either _over_kloss or _hz, not both");
    if (hz) {
      const double a = require_anchor(base + "_hz");
      auto out = *hz;
      for (auto& x : out) x /= a;
      return out;
    }
    return dimless;
  }

  // A time-like quantity: base + "_kloss" (time * kappa_loss), or base + "_s".
  std::optional<double> time(const std::string& base) {
    const auto dimless = number(base + "_kloss");
    const auto sec = number(base + "_s");
    if (dimless && sec) fail(field(base), "give either _kloss or _s, not both");
    if (sec) return *sec * require_anchor(base + "_s");
    return dimless;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) fail(field(it.key()), "unknown key");
    }
  }

 private:
  double require_anchor(const std::string& key) const {
    if (!anchor_) fail(field(key), "Hz/seconds values need cavity.kappa_loss_hz");
    return *anchor_;
  }

  const json& obj_;
  std::string path_;
  std::optional<double> anchor_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) fail(field, why);
}

void parse_cavity(const json& j, RunConfig& cfg) {
  // The anchor has to be known before any _hz key is converted.
  if (j.is_object() && j.contains("kappa_loss_hz")) {
    const auto& a = j.at("kappa_loss_hz");
    require(a.is_number() && a.get<double>() > 0.0 && std::isfinite(a.get<double>()), "cavity.kappa_loss_hz",
            "must be a positive number");
    cfg.kappa_loss_hz = a.get<double>();
  }
  Section s(j, "cavity", cfg.kappa_loss_hz);
  s.raw("kappa_loss_hz");
  cfg.params.kappa_loss = 1.0;
  cfg.params.kappa_m = s.rate("kappa_m").value_or(1.0);
  cfg.params.kappa_ax = s.rate("kappa_ax").value_or(1e-3);
  s.finish();
  require(cfg.params.kappa_m > 0.0, "cavity.kappa_m", "must be positive");
  require(cfg.params.kappa_ax >= 0.0, "cavity.kappa_ax", "must be >= 0");
}

AxionLineshape parse_axion(const json& j, std::optional<double> anchor) {
  Section s(j, "receiver.axion", anchor);
  const std::string model = s.string("model").value_or("none");
  AxionLineshape line;
  if (model == "none") {
    line = AxionLineshape::none();
  } else if (model == "flat") {
    const auto n = s.number("n_ax");
    require(n.has_value(), s.field("n_ax"), "required for model 'flat'");
    line = AxionLineshape::flat(*n);
  } else if (model == "lorentzian") {
    const auto n = s.number("n_ax");
    const auto width = s.rate("width");
    require(n.has_value(), s.field("n_ax"), "required for model 'lorentzian'");
    require(width.has_value(), s.field("width"), "required for model 'lorentzian'");
    line = AxionLineshape::lorentzian(s.rate("center").value_or(0.0), *width, *n);
  } else {
    fail(s.field("model"), "must be one of none, flat, lorentzian");
  }
  s.finish();
  try {
    line.validate();
  } catch (const std::invalid_argument& e) {
    fail("receiver.axion", e.what());
  }
  return line;
}

void parse_receiver(const json& j, RunConfig& cfg) {
  Section s(j, "receiver", cfg.kappa_loss_hz);
  const auto gain = s.number("gain");
  const json* profile = s.raw("gain_profile");
  require(!(gain && profile), "receiver.gain", "give either gain or gain_profile, not both");
  if (gain) {
    require(*gain >= 1.0, "receiver.gain", "must be >= 1");
    cfg.receiver.gain = GainProfile(*gain);
  } else if (profile) {
    Section p(*profile, "receiver.gain_profile", cfg.kappa_loss_hz);
    const auto omegas = p.rates("omega");
    const auto gains = p.numbers("gain");
    p.finish();
    require(omegas && gains, "receiver.gain_profile", "needs omega_over_kloss (or omega_hz) and gain arrays");
    try {
      cfg.receiver.gain = GainProfile(*omegas, *gains);
    } catch (const std::invalid_argument& e) {
      fail("receiver.gain_profile", e.what());
    }
  }
  const auto n_t = s.number("n_thermal");
  const auto temperature = s.number("temperature_k");
  const auto f_c = s.number("cavity_frequency_hz");
  require(!(n_t && (temperature || f_c)), "receiver.n_thermal", "give n_thermal or temperature_k, not both");
  if (temperature || f_c) {
    require(temperature && f_c, "receiver.temperature_k", "needs cavity_frequency_hz as well");
    require(*temperature >= 0.0, "receiver.temperature_k", "must be >= 0");
    require(*f_c > 0.0, "receiver.cavity_frequency_hz", "must be positive");
    cfg.receiver.n_thermal = thermal_occupation(2.0 * std::numbers::pi * *f_c, *temperature);
  } else {
    cfg.receiver.n_thermal = n_t.value_or(0.0);
    require(cfg.receiver.n_thermal >= 0.0, "receiver.n_thermal", "must be >= 0");
  }
  if (const json* ax = s.raw("axion")) cfg.receiver.axion = parse_axion(*ax, cfg.kappa_loss_hz);
  s.finish();
}

void parse_signal(const json& j, RunConfig& cfg) {
  if (j.is_null()) return;
  Section s(j, "signal", cfg.kappa_loss_hz);
  ForceSignal sig;
  sig.f0 = s.rate("f0").value_or(0.0);
  sig.phi = s.number_or("phi", 0.0);
  sig.delta = s.rate("delta").value_or(0.0);
  if (const auto tau0 = s.time("tau0")) sig.tau0 = *tau0;
  s.finish();
  require(sig.f0 >= 0.0, "signal.f0", "must be >= 0");
  require(sig.tau0 > 0.0, "signal.tau0", "must be positive");
  cfg.signal = sig;
}

void parse_simulation(const json& j, RunConfig& cfg) {
  Section s(j, "simulation", cfg.kappa_loss_hz);
  auto& sim = cfg.simulation;
  if (const auto dt = s.time("dt")) sim.dt = *dt;
  if (const auto v = s.integer("n_steps")) sim.n_steps = *v;
  if (const auto v = s.integer("n_trajectories")) sim.n_trajectories = *v;
  if (const auto v = s.integer("seed")) sim.seed = *v;
  if (const auto v = s.integer("segment_length")) sim.segment_length = *v;
  sim.overlap = s.number_or("overlap", sim.overlap);
  sim.tolerance = s.number_or("tolerance", sim.tolerance);
  sim.omega_max_over_kappa = s.number_or("omega_max_over_kappa", sim.omega_max_over_kappa);
  if (const auto init = s.string("initial")) {
    require(*init == "stationary" || *init == "vacuum", "simulation.initial", "must be 'stationary' or 'vacuum'");
    sim.vacuum_start = *init == "vacuum";
  }
  sim.dump_trajectory = s.boolean("dump_trajectory").value_or(false);
  if (const auto v = s.integer("dump_max_rows")) sim.dump_max_rows = *v;
  sim.max_z = s.number_or("max_z", sim.max_z);
  s.finish();
  require(sim.dt > 0.0, "simulation.dt", "must be positive");
  require(sim.n_steps > 0, "simulation.n_steps", "must be positive");
  require(sim.n_trajectories > 0, "simulation.n_trajectories", "must be positive");
  require(sim.segment_length >= 2, "simulation.segment_length", "must be >= 2");
  require(sim.overlap >= 0.0 && sim.overlap < 1.0, "simulation.overlap", "must lie in [0, 1)");
  require(sim.tolerance > 0.0, "simulation.tolerance", "must be positive");
  require(sim.omega_max_over_kappa > 0.0, "simulation.omega_max_over_kappa", "must be positive");
  require(sim.max_z > 0.0, "simulation.max_z", "must be positive");
  if (sim.dump_trajectory) {
    require(sim.n_steps + 1 <= sim.dump_max_rows, "simulation.dump_trajectory",
            "trajectory has more rows than dump_max_rows");
  }
}

void parse_scan(const json& j, RunConfig& cfg) {
  Section s(j, "scan", cfg.kappa_loss_hz);
  auto& sc = cfg.scan;
  sc.delta_a = s.rate("delta_a").value_or(sc.delta_a);
  sc.t_av_constant = s.number_or("t_av_constant", sc.t_av_constant);
  if (auto g = s.numbers("gains")) sc.gains = std::move(*g);
  sc.kappa_m_min = s.rate("kappa_m_min").value_or(sc.kappa_m_min);
  sc.kappa_m_max = s.rate("kappa_m_max").value_or(sc.kappa_m_max);
  if (const auto method = s.string("method")) {
    require(*method == "closed_form" || *method == "numeric", "scan.method", "must be 'closed_form' or 'numeric'");
    sc.numeric = *method == "numeric";
  }
  sc.omega_max = s.rate("omega_max").value_or(sc.omega_max);
  s.finish();
  require(sc.delta_a > 0.0, "scan.delta_a", "must be positive");
  require(sc.t_av_constant > 0.0, "scan.t_av_constant", "must be positive");
  for (double g : sc.gains) require(g >= 1.0, "scan.gains", "every gain must be >= 1");
  require(sc.kappa_m_min > 0.0 && sc.kappa_m_max > sc.kappa_m_min, "scan.kappa_m_min",
          "need 0 < kappa_m_min < kappa_m_max");
  require(sc.omega_max > 0.0, "scan.omega_max", "must be positive");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> sections{"cavity", "receiver", "signal", "simulation", "scan"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!sections.count(it.key())) fail(it.key(), "unknown section");
  }
  RunConfig cfg;
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& { return doc.contains(name) ? doc.at(name) : empty; };
  parse_cavity(section("cavity"), cfg);
  parse_receiver(section("receiver"), cfg);
  if (doc.contains("signal")) parse_signal(doc.at("signal"), cfg);
  parse_simulation(section("simulation"), cfg);
  parse_scan(section("scan"), cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json resolved_parameters(const RunConfig& cfg) {
  json j;
  j["units"] = "kappa_loss";
  if (cfg.kappa_loss_hz) j["kappa_loss_hz"] = *cfg.kappa_loss_hz;
  j["cavity"] = {{"kappa_m", cfg.params.kappa_m}, {"kappa_loss", cfg.params.kappa_loss}, {"kappa_ax", cfg.params.kappa_ax}};
  json gain;
  if (cfg.receiver.gain.is_flat()) {
    gain = cfg.receiver.gain.flat_value();
  } else {
    gain = {{"omega", cfg.receiver.gain.omegas()}, {"gain", cfg.receiver.gain.gains()}};
  }
  const auto& ax = cfg.receiver.axion;
  static const char* kinds[] = {"none", "flat", "lorentzian"};
  j["receiver"] = {{"gain", gain},
                   {"n_thermal", cfg.receiver.n_thermal},
                   {"axion",
                    {{"model", kinds[static_cast<int>(ax.kind)]},
                     {"n_ax", ax.peak},
                     {"center", ax.center},
                     {"width", ax.width}}}};
  if (cfg.signal) {
    const auto& s = *cfg.signal;
    j["signal"] = {{"f0", s.f0}, {"phi", s.phi}, {"delta", s.delta}};
    j["signal"]["tau0"] = s.coherent() ? json(nullptr) : json(s.tau0);
  } else {
    j["signal"] = nullptr;
  }
  const auto& sim = cfg.simulation;
  j["simulation"] = {{"dt", sim.dt},
                     {"n_steps", sim.n_steps},
                     {"n_trajectories", sim.n_trajectories},
                     {"seed", sim.seed},
                     {"segment_length", sim.segment_length},
                     {"overlap", sim.overlap},
                     {"tolerance", sim.tolerance},
                     {"omega_max_over_kappa", sim.omega_max_over_kappa},
                     {"initial", sim.vacuum_start ? "vacuum" : "stationary"},
                     {"dump_trajectory", sim.dump_trajectory},
                     {"dump_max_rows", sim.dump_max_rows},
                     {"max_z", sim.max_z}};
  const auto& sc = cfg.scan;
  j["scan"] = {{"delta_a", sc.delta_a},
               {"t_av_constant", sc.t_av_constant},
               {"gains", sc.gains},
               {"kappa_m_min", sc.kappa_m_min},
               {"kappa_m_max", sc.kappa_m_max},
               {"method", sc.numeric ? "numeric" : "closed_form"},
               {"omega_max", sc.omega_max}};
  return j;
}

}  // namespace axsq::cli
