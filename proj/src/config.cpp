#include "cpt/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cpt {

void RunConfig::validate() const {
  params.validate();
  if (omega_points < 2)
    throw std::runtime_error("config: omega_points must be >= 2");
  if (!(omega_span > 0.0))
    throw std::runtime_error("config: omega_span must be > 0");
  if (quadrature_order < 2 || quadrature_order > 256)
    throw std::runtime_error("config: quadrature_order must be in [2, 256]");
  if (mc.n_atoms < 1) throw std::runtime_error("config: atoms must be >= 1");
  if (!(mc.t_total > 0.0))
    throw std::runtime_error("config: t_total must be > 0");
  if (mc.burn_in < 0.0)
    throw std::runtime_error("config: burn_in must be >= 0");
}

std::vector<double> RunConfig::omega_grid() const {
  std::vector<double> grid(omega_points);
  for (int i = 0; i < omega_points; ++i)
    grid[i] = -omega_span +
              2.0 * omega_span * static_cast<double>(i) / (omega_points - 1);
  return grid;
}

namespace {

std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x,
                                 std::chars_format::general, 17);
  return {buf, ptr};
}

double parse_double(const std::string& s, int line) {
  double x = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, x);
  if (ec != std::errc{} || ptr != end)
    throw std::runtime_error("config: line " + std::to_string(line) +
                             ": not a number: '" + s + "'");
  return x;
}

std::uint64_t parse_uint(const std::string& s, int line) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("config: line " + std::to_string(line) +
                             ": not a nonnegative integer: '" + s + "'");
  return x;
}

std::string trim(const std::string& s) {
  const auto lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  const auto hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               ": empty value for '" + key + "'");

    auto num = [&] { return parse_double(value, line_no); };
    // all physical keys are SI: rates 1/s, detunings rad/s, lengths m,
    // temperature K, mass kg, times s
    if (key == "gamma_ground") cfg.params.gamma_ground = num();
    else if (key == "gamma_excited") cfg.params.gamma_excited = num();
    else if (key == "laser_linewidth") cfg.params.laser_linewidth = num();
    else if (key == "rabi_1") cfg.params.rabi_1 = num();
    else if (key == "rabi_2") cfg.params.rabi_2 = num();
    else if (key == "rabi") cfg.params.rabi_1 = cfg.params.rabi_2 = num();
    else if (key == "detuning_optical") cfg.params.detuning_optical = num();
    else if (key == "wavenumber") cfg.params.wavenumber = num();
    else if (key == "temperature") cfg.params.temperature = num();
    else if (key == "atom_mass") cfg.params.atom_mass = num();
    else if (key == "cell_radius") cfg.params.cell_radius = num();
    else if (key == "beam_radius") cfg.params.beam_radius = num();
    else if (key == "alpha") cfg.params.elastic_prob = num();
    else if (key == "omega_span") cfg.omega_span = num();
    else if (key == "omega_points") cfg.omega_points = static_cast<int>(parse_uint(value, line_no));
    else if (key == "quadrature_order") cfg.quadrature_order = static_cast<int>(parse_uint(value, line_no));
    else if (key == "seed") cfg.mc.seed = parse_uint(value, line_no);
    else if (key == "atoms") cfg.mc.n_atoms = parse_uint(value, line_no);
    else if (key == "t_total") cfg.mc.t_total = num();
    else if (key == "burn_in") cfg.mc.burn_in = num();
    else if (key == "output") cfg.output_path = value;
    else if (key == "mode") {
      if (value == "analytic") cfg.mode = RunMode::analytic;
      else if (value == "mc") cfg.mode = RunMode::mc;
      else if (value == "both") cfg.mode = RunMode::both;
      else
        throw std::runtime_error("config: line " + std::to_string(line_no) +
                                 ": mode must be analytic|mc|both");
    } else if (key == "mc_mode") {
      if (value == "model") cfg.mc.mode = McMode::model_faithful;
      else if (value == "geometry") cfg.mc.mode = McMode::exact_geometry;
      else
        throw std::runtime_error("config: line " + std::to_string(line_no) +
                                 ": mc_mode must be model|geometry");
    } else {
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()));
  }
  return cfg;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "gamma_ground = " << format_double(c.params.gamma_ground) << "\n"
      << "gamma_excited = " << format_double(c.params.gamma_excited) << "\n"
      << "laser_linewidth = " << format_double(c.params.laser_linewidth) << "\n"
      << "rabi_1 = " << format_double(c.params.rabi_1) << "\n"
      << "rabi_2 = " << format_double(c.params.rabi_2) << "\n"
      << "detuning_optical = " << format_double(c.params.detuning_optical) << "\n"
      << "wavenumber = " << format_double(c.params.wavenumber) << "\n"
      << "temperature = " << format_double(c.params.temperature) << "\n"
      << "atom_mass = " << format_double(c.params.atom_mass) << "\n"
      << "cell_radius = " << format_double(c.params.cell_radius) << "\n"
      << "beam_radius = " << format_double(c.params.beam_radius) << "\n"
      << "alpha = " << format_double(c.params.elastic_prob) << "\n"
      << "omega_span = " << format_double(c.omega_span) << "\n"
      << "omega_points = " << c.omega_points << "\n"
      << "quadrature_order = " << c.quadrature_order << "\n"
      << "mode = "
      << (c.mode == RunMode::analytic ? "analytic"
                                      : c.mode == RunMode::mc ? "mc" : "both")
      << "\n"
      << "mc_mode = "
      << (c.mc.mode == McMode::model_faithful ? "model" : "geometry") << "\n"
      << "seed = " << c.mc.seed << "\n"
      << "atoms = " << c.mc.n_atoms << "\n"
      << "t_total = " << format_double(c.mc.t_total) << "\n"
      << "burn_in = " << format_double(c.mc.burn_in) << "\n"
      << "output = " << c.output_path << "\n";
  return out.str();
}

}  // namespace cpt
