#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cpt/run.hpp"

using namespace cpt;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cpt_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("parse_config defaults") {
  const RunConfig cfg = parse_config("");
  CHECK(cfg.params.beam_radius == doctest::Approx(1.5e-3));
  CHECK(cfg.params.cell_radius == doctest::Approx(5.0e-3));
  CHECK(cfg.params.rabi_1 == doctest::Approx(7.7e5));
  CHECK(cfg.params.rabi_2 == doctest::Approx(7.7e5));
  CHECK(cfg.params.elastic_prob == 0.0);
  CHECK(cfg.params.gamma_ground == doctest::Approx(300.0));
  CHECK(cfg.params.gamma_prime() == doctest::Approx(1.8e7));
  CHECK(cfg.params.temperature == doctest::Approx(293.15));
  CHECK(cfg.omega_points == 801);
  CHECK(cfg.omega_span == doctest::Approx(2.0 * M_PI * 50e3));
  CHECK(cfg.mode == RunMode::analytic);
}

TEST_CASE("parse_config values, comments, errors") {
  const RunConfig cfg = parse_config(
      "# comment line\n"
      "alpha = 0.5   # trailing comment\n"
      "rabi = 3.3e5\n"
      "mode = both\n"
      "atoms = 12345\n");
  CHECK(cfg.params.elastic_prob == doctest::Approx(0.5));
  CHECK(cfg.params.rabi_1 == doctest::Approx(3.3e5));
  CHECK(cfg.params.rabi_2 == doctest::Approx(3.3e5));
  CHECK(cfg.mode == RunMode::both);
  CHECK(cfg.mc.n_atoms == 12345);

  CHECK_THROWS_WITH_AS(parse_config("alpha = 1.5\n"),
                       doctest::Contains("elastic_prob"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("frobnicate = 3\n"),
                       doctest::Contains("line 1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("alpha = zero\n"),
                       doctest::Contains("not a number"), std::runtime_error);
  CHECK_THROWS(parse_config("alpha\n"));
  CHECK_THROWS(parse_config("mode = magic\n"));
}

TEST_CASE("config round trip") {
  RunConfig cfg = parse_config("");
  cfg.params.elastic_prob = 0.3;
  cfg.params.rabi_1 = 1.23456789012345e5;
  cfg.omega_points = 41;
  cfg.mode = RunMode::mc;
  cfg.mc.seed = 99;
  cfg.output_path = "x.csv";
  const RunConfig back = parse_config(serialize_config(cfg));
  CHECK(back.params.elastic_prob == cfg.params.elastic_prob);
  CHECK(back.params.rabi_1 == cfg.params.rabi_1);
  CHECK(back.omega_points == cfg.omega_points);
  CHECK(back.mode == cfg.mode);
  CHECK(back.mc.seed == cfg.mc.seed);
  CHECK(back.output_path == cfg.output_path);
  CHECK(serialize_config(back) == serialize_config(cfg));
}

TEST_CASE("omega grid symmetric and increasing") {
  RunConfig cfg = parse_config("omega_points = 11\nomega_span = 100\n");
  const std::vector<double> grid = cfg.omega_grid();
  REQUIRE(grid.size() == 11);
  CHECK(grid.front() == doctest::Approx(-100.0));
  CHECK(grid.back() == doctest::Approx(100.0));
  CHECK(grid[5] == doctest::Approx(0.0).scale(100.0));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("format_full_precision round trip") {
  // strtod instead of stod: stod reports subnormal results as out_of_range
  for (double x : {0.0, 1.0, -3.25e-17, 2.718281828459045, 1.7e300, 5.5e-324})
    CHECK(std::strtod(format_full_precision(x).c_str(), nullptr) == x);
}

TEST_CASE("structure_grid layout") {
  const std::vector<double> grid = structure_grid(1.0, 1e4, 6);
  REQUIRE(grid.size() % 2 == 1);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  const std::size_t center = grid.size() / 2;
  CHECK(grid[center] == 0.0);
  for (std::size_t k = 1; k <= center; ++k)
    CHECK(grid[center + k] == doctest::Approx(-grid[center - k]).epsilon(1e-14));
  CHECK(grid.back() == doctest::Approx(1e4));
  CHECK(grid[center + 1] == doctest::Approx(1.0));
  CHECK_THROWS(structure_grid(0.0, 10.0));
  CHECK_THROWS(structure_grid(10.0, 1.0));
}

TEST_CASE("run writes a reparsable spectrum") {
  TempDir dir;
  RunConfig cfg = parse_config("omega_points = 9\nomega_span = 6.0e4\n");
  cfg.output_path = (dir.path / "spec.csv").string();
  const RunArtifacts art = run(cfg);
  REQUIRE(art.written_files.size() == 2);
  CHECK(fs::exists(art.written_files[0]));
  CHECK(fs::exists(art.written_files[1]));
  CHECK(art.written_files[1] == cfg.output_path + ".meta.json");

  std::ifstream in(cfg.output_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "omega_rad_s,rho33_analytic");
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(std::stod(line.substr(0, comma)) == art.analytic.omega[row]);
    CHECK(std::stod(line.substr(comma + 1)) == art.analytic.rho33[row]);
    ++row;
  }
  CHECK(row == 9);
}

TEST_CASE("run in mc and both modes") {
  TempDir dir;
  RunConfig cfg = parse_config(
      "omega_points = 3\nomega_span = 1.0e4\nmode = both\n"
      "atoms = 300\nt_total = 0.03\nseed = 5\n");
  cfg.output_path = (dir.path / "both.csv").string();
  const RunArtifacts art = run(cfg);
  REQUIRE(art.mc.size() == 3);
  REQUIRE(art.analytic.rho33.size() == 3);
  CHECK(art.max_sigma_deviation.has_value());
  std::ifstream in(cfg.output_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "omega_rad_s,rho33_analytic,rho33_mc,mc_stderr");
}

TEST_CASE("panel datasets cover the six standard parameter sets") {
  TempDir dir;
  RunConfig cfg = parse_config("omega_points = 5\nomega_span = 3.0e4\n");
  const std::vector<std::string> files =
      write_panel_datasets(cfg, (dir.path / "fig5").string());
  REQUIRE(files.size() == 6);
  const char tags[] = {'a', 'b', 'c', 'd', 'e', 'f'};
  for (int i = 0; i < 6; ++i) {
    CHECK(files[i].find(std::string("fig5_") + tags[i] + ".csv") !=
          std::string::npos);
    std::ifstream in(files[i]);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    // one column per alpha value
    CHECK(std::count(header.begin(), header.end(), ',') == 5);
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);
  }
}

TEST_CASE("distribution tables") {
  TempDir dir;
  const std::string path = (dir.path / "dist.csv").string();
  write_distribution_tables(parse_config("").params, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,f_t_exact_scaled,f_t_fit,dark_cdf_exact_scaled,dark_cdf_fit");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1001);
}

TEST_CASE("report_structure flags") {
  // flat spectrum: all flags false
  Spectrum flat;
  for (int i = -20; i <= 20; ++i) {
    flat.omega.push_back(1e3 * i);
    flat.rho33.push_back(1e-5);
  }
  const StructureReport none = report_structure(flat);
  CHECK_FALSE(none.pedestal);
  CHECK_FALSE(none.narrow_peak);
  CHECK_FALSE(none.intermediate);

  PhysicalParams p = parse_config("").params;
  const std::vector<double> grid = structure_grid(2.0 * M_PI, 2.0 * M_PI * 50e3);

  const StructureReport a0 = report_structure(sweep(p, grid));
  CHECK(a0.pedestal);
  CHECK(a0.narrow_peak);
  CHECK_FALSE(a0.intermediate);
  CHECK(a0.narrow_width > 0.0);

  p.elastic_prob = 0.5;
  const StructureReport a5 = report_structure(sweep(p, grid));
  CHECK(a5.pedestal);
  CHECK(a5.narrow_peak);
  CHECK(a5.intermediate);

  p.elastic_prob = 1.0;
  const StructureReport a1 = report_structure(sweep(p, grid));
  CHECK(a1.pedestal);
  CHECK_FALSE(a1.narrow_peak);
  CHECK(a1.intermediate);
}

TEST_CASE("report_structure requires a symmetric grid") {
  Spectrum skew;
  for (int i = 0; i <= 40; ++i) {
    skew.omega.push_back(1e3 * i);
    skew.rho33.push_back(1e-5);
  }
  CHECK_THROWS(report_structure(skew));
}
