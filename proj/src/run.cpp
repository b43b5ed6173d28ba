#include "cpt/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cpt {

std::string format_full_precision(double x) {
  char buf[40];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return {buf, ptr};
}

namespace {

using nlohmann::json;

json params_to_json(const PhysicalParams& p) {
  return json{{"gamma_ground", p.gamma_ground},
              {"gamma_excited", p.gamma_excited},
              {"laser_linewidth", p.laser_linewidth},
              {"rabi_1", p.rabi_1},
              {"rabi_2", p.rabi_2},
              {"detuning_optical", p.detuning_optical},
              {"wavenumber", p.wavenumber},
              {"temperature", p.temperature},
              {"atom_mass", p.atom_mass},
              {"cell_radius", p.cell_radius},
              {"beam_radius", p.beam_radius},
              {"alpha", p.elastic_prob}};
}

void write_metadata(const RunConfig& cfg, const std::string& csv_path,
                    const std::optional<double>& max_sigma) {
  json meta;
  meta["params"] = params_to_json(cfg.params);
  meta["quadrature_order"] = cfg.quadrature_order;
  meta["omega_span"] = cfg.omega_span;
  meta["omega_points"] = cfg.omega_points;
  meta["mode"] = cfg.mode == RunMode::analytic ? "analytic"
                 : cfg.mode == RunMode::mc     ? "mc"
                                               : "both";
  meta["seed"] = cfg.mc.seed;
  meta["atoms"] = cfg.mc.n_atoms;
  meta["mc_mode"] =
      cfg.mc.mode == McMode::model_faithful ? "model" : "geometry";
  meta["version"] = CPT_VERSION;
  if (max_sigma) meta["max_sigma_deviation"] = *max_sigma;
  std::ofstream out(csv_path + ".meta.json");
  if (!out) throw std::runtime_error("cannot write " + csv_path + ".meta.json");
  out << meta.dump(2) << "\n";
}

}  // namespace

StructureReport report_structure(const Spectrum& spectrum) {
  const auto& omega = spectrum.omega;
  const auto& s = spectrum.rho33;
  const std::size_t n = omega.size();
  StructureReport rep;
  rep.thresholds =
      "baseline=outer 20% mean; flat if total depth<=3x noise floor; "
      "component route (analytic spectra): pedestal/intermediate/narrow from "
      "the single-pass / elastic-chain / dark-memory depths, present if "
      "depth>max(0.5% of total, 3x noise), widths=half-depth offsets; "
      "fallback route (no components): scales=maxima of d(depth)/d(log "
      "offset) with prominence>0.08x total, narrow if >=2 scales separated "
      "8x, intermediate if >=3 scales";
  if (n < 16) return rep;
  if (std::abs(omega.front() + omega.back()) >
      1e-9 * std::max(std::abs(omega.front()), std::abs(omega.back())))
    throw std::invalid_argument("report_structure: grid must be symmetric");

  // baseline and noise floor from the outer 20% of the grid
  const std::size_t wing = std::max<std::size_t>(n / 10, 4);
  double baseline = 0.0;
  for (std::size_t i = 0; i < wing; ++i) baseline += s[i] + s[n - 1 - i];
  baseline /= static_cast<double>(2 * wing);
  double noise = 0.0;
  for (std::size_t i = 1; i < wing; ++i) {
    // first differences suppress the wing slope
    const double dl = s[i] - s[i - 1];
    const double dr = s[n - i] - s[n - 1 - i];
    noise += dl * dl + dr * dr;
  }
  noise = std::sqrt(noise / static_cast<double>(2 * (wing - 1)));
  noise = std::max(noise, 1e-14 * std::max(baseline, 1e-30));

  // symmetrized depth profile about the center
  const std::size_t half = n / 2;  // center index for odd n
  const std::size_t center = (n - 1) / 2;
  std::vector<double> depth(half);
  const double center_value =
      n % 2 == 1 ? s[center] : 0.5 * (s[center] + s[center + 1]);
  const double total_depth = baseline - center_value;
  rep.pedestal_depth = total_depth;
  if (total_depth <= 3.0 * noise) return rep;  // flat spectrum

  if (spectrum.has_components()) {
    // exact decomposition: depth and half-depth width per memory component
    auto depth_of = [&](const std::vector<double>& v) {
      double b = 0.0;
      for (std::size_t i = 0; i < wing; ++i) b += v[i] + v[n - 1 - i];
      b /= static_cast<double>(2 * wing);
      const double c =
          n % 2 == 1 ? v[center] : 0.5 * (v[center] + v[center + 1]);
      return b - c;
    };
    auto width_of = [&](const std::vector<double>& v, double depth) {
      const double c =
          n % 2 == 1 ? v[center] : 0.5 * (v[center] + v[center + 1]);
      double prev_off = 0.0, prev_val = c;
      for (std::size_t k = 1; k <= half; ++k) {
        const std::size_t right = center + k < n ? center + k : n - 1;
        const std::size_t left = center >= k ? center - k : 0;
        const double val = 0.5 * (v[left] + v[right]);
        const double off = 0.5 * (omega[right] - omega[left]);
        if (val - c >= 0.5 * depth) {
          const double t = (c + 0.5 * depth - prev_val) / (val - prev_val);
          return 2.0 * (prev_off + t * (off - prev_off));
        }
        prev_off = off;
        prev_val = val;
      }
      return 2.0 * prev_off;
    };

    // analytic components are deterministic (quadrature error ~1e-8
    // relative), so presence needs no noise allowance
    const double presence = 0.005 * total_depth;
    const double d_single = depth_of(spectrum.single_pass);
    const double d_chain = depth_of(spectrum.beam_chain);
    const double d_memory = depth_of(spectrum.dark_memory);
    rep.pedestal = d_single > presence;
    rep.intermediate = d_chain > presence;
    rep.narrow_peak = d_memory > presence;
    rep.narrow_depth = d_memory;
    if (rep.narrow_peak) {
      rep.narrow_width = width_of(spectrum.dark_memory, d_memory);
      rep.component_scales.push_back(rep.narrow_width);
    }
    if (rep.intermediate)
      rep.component_scales.push_back(width_of(spectrum.beam_chain, d_chain));
    if (rep.pedestal)
      rep.component_scales.push_back(
          width_of(spectrum.single_pass, d_single));
    std::sort(rep.component_scales.begin(), rep.component_scales.end());
    return rep;
  }

  rep.pedestal = true;

  std::vector<double> offsets(half), drop(half);
  for (std::size_t k = 1; k <= half; ++k) {
    const std::size_t right = center + k < n ? center + k : n - 1;
    const std::size_t left = center >= k ? center - k : 0;
    const double value = 0.5 * (s[left] + s[right]);
    offsets[k - 1] = 0.5 * (omega[right] - omega[left]);
    drop[k - 1] = value - center_value;
  }

  // derivative of the depth drop with respect to log offset, resampled on
  // a log-spaced offset grid
  const int m = 80;
  const double lo = std::log(offsets.front());
  const double hi = std::log(offsets.back());
  std::vector<double> log_s(m), resampled(m);
  for (int i = 0; i < m; ++i) {
    log_s[i] = lo + (hi - lo) * i / (m - 1);
    const double target = std::exp(log_s[i]);
    auto it = std::lower_bound(offsets.begin(), offsets.end(), target);
    if (it == offsets.begin()) {
      resampled[i] = drop.front();
    } else if (it == offsets.end()) {
      resampled[i] = drop.back();
    } else {
      const std::size_t j = it - offsets.begin();
      const double w =
          (target - offsets[j - 1]) / (offsets[j] - offsets[j - 1]);
      resampled[i] = (1.0 - w) * drop[j - 1] + w * drop[j];
    }
  }
  std::vector<double> deriv(m, 0.0);
  for (int i = 1; i + 1 < m; ++i)
    deriv[i] = (resampled[i + 1] - resampled[i - 1]) /
               (log_s[i + 1] - log_s[i - 1]);
  // light smoothing
  std::vector<double> smooth(deriv);
  for (int i = 2; i + 2 < m; ++i)
    smooth[i] = (deriv[i - 2] + 2 * deriv[i - 1] + 3 * deriv[i] +
                 2 * deriv[i + 1] + deriv[i + 2]) / 9.0;

  const double prominence = 0.08 * total_depth;
  for (int i = 1; i + 1 < m; ++i) {
    if (smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1] &&
        smooth[i] > prominence) {
      const double scale = std::exp(log_s[i]);
      if (!rep.component_scales.empty() &&
          scale < 2.0 * rep.component_scales.back())
        continue;  // merge near-duplicate maxima
      rep.component_scales.push_back(scale);
    }
  }

  if (!rep.component_scales.empty()) {
    const double widest = rep.component_scales.back();
    const double narrowest = rep.component_scales.front();
    rep.narrow_peak =
        rep.component_scales.size() >= 2 && narrowest < widest / 8.0;
    rep.intermediate = rep.component_scales.size() >= 3;
    if (rep.narrow_peak) {
      // half-depth width of the narrow component: drop at the valley after
      // the first scale bounds the narrow depth
      rep.narrow_width = 2.0 * narrowest;
      for (std::size_t k = 0; k < drop.size(); ++k) {
        if (offsets[k] >= narrowest) {
          rep.narrow_depth = drop[k];
          break;
        }
      }
    }
  }
  return rep;
}

std::vector<double> structure_grid(double min_offset, double max_offset,
                                   int per_decade) {
  if (!(min_offset > 0.0) || !(max_offset > min_offset) || per_decade < 1)
    throw std::invalid_argument("structure_grid: bad arguments");
  const double decades = std::log10(max_offset / min_offset);
  const int m = std::max(2, static_cast<int>(std::ceil(decades * per_decade)));
  std::vector<double> offsets(m + 1);
  for (int i = 0; i <= m; ++i)
    offsets[i] = min_offset * std::pow(max_offset / min_offset,
                                       static_cast<double>(i) / m);
  std::vector<double> grid;
  grid.reserve(2 * offsets.size() + 1);
  for (auto it = offsets.rbegin(); it != offsets.rend(); ++it)
    grid.push_back(-*it);
  grid.push_back(0.0);
  grid.insert(grid.end(), offsets.begin(), offsets.end());
  return grid;
}

RunArtifacts run(const RunConfig& cfg) {
  cfg.validate();
  RunArtifacts art;
  const std::vector<double> grid = cfg.omega_grid();

  const bool want_analytic =
      cfg.mode == RunMode::analytic || cfg.mode == RunMode::both;
  const bool want_mc = cfg.mode == RunMode::mc || cfg.mode == RunMode::both;

  if (want_analytic) art.analytic = sweep(cfg.params, grid, cfg.quadrature_order);
  if (want_mc) {
    art.mc.reserve(grid.size());
    for (double omega : grid)
      art.mc.push_back(estimate_rho33(cfg.params, omega, cfg.mc));
  }

  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + cfg.output_path);
  if (cfg.mode == RunMode::analytic) {
    out << "omega_rad_s,rho33_analytic\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << format_full_precision(grid[i]) << ','
          << format_full_precision(art.analytic.rho33[i]) << '\n';
  } else if (cfg.mode == RunMode::mc) {
    out << "omega_rad_s,rho33_mc,mc_stderr\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << format_full_precision(grid[i]) << ','
          << format_full_precision(art.mc[i].mean) << ','
          << format_full_precision(art.mc[i].std_error) << '\n';
  } else {
    out << "omega_rad_s,rho33_analytic,rho33_mc,mc_stderr\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << format_full_precision(grid[i]) << ','
          << format_full_precision(art.analytic.rho33[i]) << ','
          << format_full_precision(art.mc[i].mean) << ','
          << format_full_precision(art.mc[i].std_error) << '\n';
      if (art.mc[i].std_error > 0.0)
        worst = std::max(worst, std::abs(art.analytic.rho33[i] -
                                         art.mc[i].mean) /
                                    art.mc[i].std_error);
    }
    art.max_sigma_deviation = worst;
  }
  out.close();
  if (!out) throw std::runtime_error("write failed: " + cfg.output_path);
  art.written_files.push_back(cfg.output_path);

  write_metadata(cfg, cfg.output_path, art.max_sigma_deviation);
  art.written_files.push_back(cfg.output_path + ".meta.json");
  return art;
}

std::vector<std::string> write_panel_datasets(const RunConfig& base,
                                              const std::string& output_dir) {
  struct Panel {
    char tag;
    double beam_radius;
    double rabi;
  };
  const Panel panels[] = {{'a', 1.5e-3, 7.7e5},  {'b', 1.5e-3, 7.7e5},
                          {'c', 0.5e-3, 1.46e7}, {'d', 0.5e-3, 7.3e5},
                          {'e', 5.0e-3, 3.3e5},  {'f', 5.0e-3, 1.46e6}};
  const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};

  std::filesystem::create_directories(output_dir);
  std::vector<std::string> written;
  const std::vector<double> grid = base.omega_grid();
  for (const Panel& panel : panels) {
    PhysicalParams p = base.params;
    p.beam_radius = panel.beam_radius;
    p.rabi_1 = p.rabi_2 = panel.rabi;

    std::vector<Spectrum> spectra;
    for (double alpha : alphas) {
      p.elastic_prob = alpha;
      spectra.push_back(sweep(p, grid, base.quadrature_order));
    }

    const std::string path =
        output_dir + "/fig5_" + std::string(1, panel.tag) + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "omega_rad_s";
    for (double alpha : alphas)
      out << ",rho33_alpha" << format_full_precision(alpha);
    out << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << format_full_precision(grid[i]);
      for (const auto& spec : spectra)
        out << ',' << format_full_precision(spec.rho33[i]);
      out << '\n';
    }
    written.push_back(path);
  }
  return written;
}

void write_distribution_tables(const PhysicalParams& p,
                               const std::string& output_path) {
  const Geometry geom = Geometry::from(p);
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + output_path);
  out << "x,f_t_exact_scaled,f_t_fit,dark_cdf_exact_scaled,dark_cdf_fit\n";
  const double scale_t = geom.beam_radius / geom.v_thermal;
  const double scale_p = geom.ell_perp / geom.v_thermal;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 10.0 * i / 1000.0;
    out << format_full_precision(x) << ','
        << format_full_precision(observation_density(x * scale_t, geom) *
                                 scale_t)
        << ',' << format_full_precision(observation_density_approx(x)) << ','
        << format_full_precision(dark_chord_cdf(x * scale_p, geom)) << ','
        << format_full_precision(dark_chord_cdf_approx(x)) << '\n';
  }
}

}  // namespace cpt
