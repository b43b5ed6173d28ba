#ifndef CPT_CONFIG_HPP
#define CPT_CONFIG_HPP

#include <string>

#include "cpt/montecarlo.hpp"
#include "cpt/params.hpp"

namespace cpt {

enum class RunMode { analytic, mc, both };

struct RunConfig {
  PhysicalParams params;
  double omega_span = 2.0 * 3.14159265358979323846 * 50e3;  // half-span, rad/s
  int omega_points = 801;
  RunMode mode = RunMode::analytic;
  TrajectoryConfig mc;
  std::string output_path = "spectrum.csv";
  int quadrature_order = 64;

  void validate() const;
  std::vector<double> omega_grid() const;
};

/// Parses the line-based "key = value" format ('#' comments). Unknown keys
/// and out-of-range values raise std::runtime_error with the line number.
RunConfig parse_config(const std::string& text);

/// Canonical text form; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& c);

}  // namespace cpt

#endif  // CPT_CONFIG_HPP
