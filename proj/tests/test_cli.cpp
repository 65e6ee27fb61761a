#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "axsq/errors.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace axsq;
using namespace axsq::cli;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("axsq_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cmd(const std::string& sub, const fs::path& config, const fs::path& out, Format format = Format::Csv,
            std::optional<std::uint64_t> seed = std::nullopt, std::optional<std::size_t> grid = std::nullopt) {
  Options o;
  o.subcommand = sub;
  o.config_path = config.string();
  o.out_dir = out.string();
  o.format = format;
  o.seed = seed;
  o.grid_points = grid;
  std::ostringstream err;
  return run(o, err);
}

const char* kSmallMontecarlo = R"({
  "cavity": {"kappa_m_over_kloss": 1.0, "kappa_ax_over_kloss": 0.0},
  "receiver": {"gain": 1.0},
  "simulation": {"dt_kloss": 0.02, "n_steps": 8192, "n_trajectories": 2, "segment_length": 256,
                 "tolerance": 0.5, "seed": 5}
})";

}  // namespace

TEST_CASE("defaults when sections are empty") {
  const auto cfg = parse_config(json::object());
  CHECK(cfg.params.kappa_loss == 1.0);
  CHECK(cfg.params.kappa_m == 1.0);
  CHECK(cfg.receiver.gain(0.0) == 1.0);
  CHECK_FALSE(cfg.signal.has_value());
  CHECK_FALSE(cfg.kappa_loss_hz.has_value());
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"cavty": {}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"cavity": {"kappa_m": 1}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"receiver": {"axion": {"model": "flat", "n_ax": 1, "nax": 2}}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"simulation": {"dt_kloss": 0.01, "steps": 10}})")), ConfigError);
}

TEST_CASE("error messages name the field") {
  try {
    parse_config(json::parse(R"({"scan": {"gains": [1, "x"]}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("scan.gains") != std::string::npos);
  }
}

TEST_CASE("Hz units convert through kappa_loss_hz") {
  const auto cfg = parse_config(json::parse(R"({
    "cavity": {"kappa_loss_hz": 2000.0, "kappa_m_hz": 6000.0, "kappa_ax_hz": 2.0},
    "simulation": {"dt_s": 1e-5},
    "scan": {"delta_a_hz": 0.5}
  })"));
  CHECK(cfg.params.kappa_m == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(cfg.params.kappa_ax == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(cfg.simulation.dt == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(cfg.scan.delta_a == doctest::Approx(2.5e-4).epsilon(1e-15));
}

TEST_CASE("Hz units require the anchor and exclude the dimensionless form") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"cavity": {"kappa_m_hz": 10.0}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(
                      R"({"cavity": {"kappa_loss_hz": 1.0, "kappa_m_hz": 1.0, "kappa_m_over_kloss": 1.0}})")),
                  ConfigError);
}

TEST_CASE("invalid physics values are config errors") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"cavity": {"kappa_m_over_kloss": -1}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"receiver": {"gain": 0}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"receiver": {"axion": {"model": "gaussian"}}})")), ConfigError);
}

TEST_CASE("malformed config exits 2 and writes nothing") {
  TempDir tmp;
  const auto out = tmp.path / "out";
  CHECK(run_cmd("spectrum", write_text(tmp.path / "bad.json", "{\"cavity\": {"), out) == kExitConfig);
  CHECK_FALSE(fs::exists(out));
  CHECK(run_cmd("spectrum", write_text(tmp.path / "unknown.json", R"({"cavity": {"kappa": 1}})"), out) ==
        kExitConfig);
  CHECK_FALSE(fs::exists(out));
  CHECK(run_cmd("spectrum", tmp.path / "missing.json", out) == kExitConfig);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("spectrum output is byte-identical across runs and starts with the manifest reference") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", R"({"receiver": {"gain": 4.0, "axion": {"model": "flat", "n_ax": 1}}})");
  REQUIRE(run_cmd("spectrum", cfg, tmp.path / "a", Format::Csv, std::nullopt, 64) == kExitOk);
  REQUIRE(run_cmd("spectrum", cfg, tmp.path / "b", Format::Csv, std::nullopt, 64) == kExitOk);
  for (const char* f : {"manifest.json", "spectrum.csv", "summary.json"}) {
    CHECK(read_text(tmp.path / "a" / f) == read_text(tmp.path / "b" / f));
  }
  const auto csv = read_text(tmp.path / "a" / "spectrum.csv");
  CHECK(csv.rfind("# manifest: manifest.json\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 2 + 64);
  const auto manifest = json::parse(read_text(tmp.path / "a" / "manifest.json"));
  CHECK(manifest.at("subcommand") == "spectrum");
  CHECK(manifest.at("parameters").at("receiver").at("gain") == 4.0);
}

TEST_CASE("json format data files carry the manifest and columns") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", R"({"receiver": {"axion": {"model": "flat", "n_ax": 1}}, "scan": {"gains": [1, 10]}})");
  REQUIRE(run_cmd("optimize", cfg, tmp.path / "o", Format::Json) == kExitOk);
  const auto doc = json::parse(read_text(tmp.path / "o" / "optimize.json"));
  CHECK(doc.at("manifest") == "manifest.json");
  REQUIRE(doc.at("rows").size() == 2);
  const auto& cols = doc.at("columns");
  const auto idx = std::find(cols.begin(), cols.end(), "kappa_m_over_kloss") - cols.begin();
  REQUIRE(idx < static_cast<std::ptrdiff_t>(cols.size()));
  // Analytic optimum at G = 10: [(2G - 1) + sqrt((2G - 1)^2 + 8)] / 2.
  const double g = 10.0;
  const double expected = ((2 * g - 1) + std::sqrt((2 * g - 1) * (2 * g - 1) + 8)) / 2;
  CHECK(doc.at("rows").at(1).at(idx).get<double>() == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("optimize without an axion signal is a config error") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", R"({"cavity": {"kappa_ax_over_kloss": 0.0}})");
  CHECK(run_cmd("optimize", cfg, tmp.path / "o") == kExitConfig);
  CHECK_FALSE(fs::exists(tmp.path / "o"));
}

TEST_CASE("scan-rate grid size follows --grid-points") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", R"({"receiver": {"axion": {"model": "flat", "n_ax": 1}}, "scan": {"gains": [1, 2, 3]}})");
  REQUIRE(run_cmd("scan-rate", cfg, tmp.path / "s", Format::Json, std::nullopt, 7) == kExitOk);
  const auto doc = json::parse(read_text(tmp.path / "s" / "scan_rate.json"));
  CHECK(doc.at("rows").size() == 3 * 7);
}

TEST_CASE("montecarlo is reproducible for a fixed seed and changes with the seed") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", kSmallMontecarlo);
  const int a = run_cmd("montecarlo", cfg, tmp.path / "a");
  const int b = run_cmd("montecarlo", cfg, tmp.path / "b");
  const int c = run_cmd("montecarlo", cfg, tmp.path / "c", Format::Csv, 6);
  CHECK(a == b);
  CHECK((a == kExitOk || a == kExitStatistical));
  CHECK((c == kExitOk || c == kExitStatistical));
  CHECK(read_text(tmp.path / "a" / "psd.csv") == read_text(tmp.path / "b" / "psd.csv"));
  CHECK(read_text(tmp.path / "a" / "psd.csv") != read_text(tmp.path / "c" / "psd.csv"));
  const auto manifest = json::parse(read_text(tmp.path / "c" / "manifest.json"));
  CHECK(manifest.at("seed") == 6);
}

TEST_CASE("estimate rows match the closed forms") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", R"({
    "cavity": {"kappa_m_over_kloss": 1.0, "kappa_ax_over_kloss": 0.0},
    "receiver": {"gain": 4.0},
    "simulation": {"dt_kloss": 0.025, "n_steps": 2000, "n_trajectories": 400, "seed": 11, "max_z": 5}
  })");
  const int code = run_cmd("estimate", cfg, tmp.path / "e", Format::Json);
  CHECK(code == kExitOk);
  const auto doc = json::parse(read_text(tmp.path / "e" / "estimate.json"));
  const auto& cols = doc.at("columns");
  auto col = [&](const char* name) { return std::find(cols.begin(), cols.end(), name) - cols.begin(); };
  const double t_s = 0.025 * 2000;
  for (const auto& row : doc.at("rows")) {
    const auto protocol = row.at(col("protocol")).get<std::string>();
    const double closed = row.at(col("closed_form")).get<double>();
    if (protocol == "csl") CHECK(closed == doctest::Approx(1.0 / (2 * t_s * t_s)));
    if (protocol == "squeezed") CHECK(closed == doctest::Approx(1.0 / (2 * 4.0 * t_s * t_s)));
    CHECK(std::abs(row.at(col("z_score")).get<double>()) <= 5.0);
  }
}

TEST_CASE("unknown subcommand is a config error") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", "{}");
  CHECK(run_cmd("fly", cfg, tmp.path / "x") == kExitConfig);
  CHECK_FALSE(fs::exists(tmp.path / "x"));
}

TEST_CASE("default montecarlo run matches the flat vacuum spectrum") {
  TempDir tmp;
  const auto cfg = write_text(tmp.path / "c.json", "{}");
  CHECK(run_cmd("montecarlo", cfg, tmp.path / "m") == kExitOk);
  const auto summary = json::parse(read_text(tmp.path / "m" / "summary.json"));
  CHECK(summary.at("pass") == true);
  CHECK(summary.at("segments").get<std::size_t>() >= kMinWelchSegments);
}
