#ifndef CPT_RUN_HPP
#define CPT_RUN_HPP

#include <optional>
#include <string>
#include <vector>

#include "cpt/averaging.hpp"
#include "cpt/config.hpp"
#include "cpt/montecarlo.hpp"

namespace cpt {

std::string format_full_precision(double x);

/// Structure summary of a resonance profile on a symmetric grid.
struct StructureReport {
  bool pedestal = false;
  bool narrow_peak = false;
  bool intermediate = false;
  double pedestal_depth = 0.0;     // baseline minus center value
  double narrow_width = 0.0;       // half-depth width of the narrow component, rad/s
  double narrow_depth = 0.0;
  std::vector<double> component_scales;  // detected widths, rad/s
  std::string thresholds;          // detector settings, for the report output
};

/// Decomposes the central dip into narrow / intermediate / pedestal scales.
/// Analytic spectra carry the exact memory-component breakdown and the flags
/// follow from the component depths; spectra without components fall back to
/// a scale-space analysis of the dip profile. Baseline window: outer 20% of
/// the grid. Peak presence: depth above 3x the local noise floor.
StructureReport report_structure(const Spectrum& spectrum);

/// Symmetric detuning grid {0, +-offsets} with log-spaced offsets, suited to
/// resolving structure scales from ~min_offset to max_offset rad/s.
std::vector<double> structure_grid(double min_offset, double max_offset,
                                   int per_decade = 12);

struct RunArtifacts {
  Spectrum analytic;                  // valid for modes analytic/both
  std::vector<McEstimate> mc;         // valid for modes mc/both
  std::optional<double> max_sigma_deviation;  // both mode comparison
  std::vector<std::string> written_files;
};

/// Executes a run configuration: sweeps, CSV + metadata sidecar, and the
/// analytic-vs-MC comparison summary in "both" mode.
RunArtifacts run(const RunConfig& cfg);

/// Datasets for the six standard (r, V) panels, alpha in {0, .25, .5, .75, 1}.
/// Writes <output_dir>/fig5_<a..f>.csv and returns the file list.
std::vector<std::string> write_panel_datasets(const RunConfig& base,
                                              const std::string& output_dir);

/// Exact-vs-fitted density/CDF tables for the time distributions.
void write_distribution_tables(const PhysicalParams& p,
                               const std::string& output_path);

}  // namespace cpt

#endif  // CPT_RUN_HPP
