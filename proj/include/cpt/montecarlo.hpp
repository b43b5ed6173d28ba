#ifndef CPT_MONTECARLO_HPP
#define CPT_MONTECARLO_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "cpt/distributions.hpp"
#include "cpt/params.hpp"
#include "cpt/types.hpp"

namespace cpt {

enum class McMode { model_faithful, exact_geometry };

struct TrajectoryConfig {
  std::uint64_t n_atoms = 100000;
  double t_total = 0.05;   // simulated time per atom, s
  double burn_in = 0.0;    // excluded from averages; default set by validate_or_default
  McMode mode = McMode::model_faithful;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on bad values; fills burn_in with
  /// 5/Gamma when left at zero.
  void validate_or_default(const PhysicalParams& p);
};

/// Counter-based per-atom random stream; identical results for a given
/// (seed, atom index) regardless of scheduling.
class AtomRng {
 public:
  AtomRng(std::uint64_t seed, std::uint64_t atom_index);
  double uniform();           // (0, 1)
  double normal();            // standard normal
  double exponential();       // unit mean
 private:
  std::uint64_t s_[4];
  bool have_normal_ = false;
  double cached_normal_ = 0.0;
};

struct EntrySample {
  double phi;     // chord angle, beam-passing range
  double v_perp;  // transverse speed
  double v_z;     // longitudinal velocity
};

/// Draws (phi, v_perp, v_z) for an atom entering the beam-passing regime.
EntrySample sample_entry(const PhysicalParams& p, AtomRng& rng);

struct AtomResult {
  double rho33_time_integral = 0.0;  // over beam segments in the window
  double beam_time = 0.0;            // beam time in the window
  double total_time = 0.0;           // window length actually simulated
};

AtomResult simulate_atom(const PhysicalParams& p, double omega,
                         const TrajectoryConfig& cfg, AtomRng& rng);

struct EmpiricalCdf {
  std::vector<double> samples;  // sorted
  double mean() const;
  /// Kolmogorov-Smirnov distance against a reference CDF.
  double ks_distance(const std::function<double(double)>& cdf) const;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_effective = 0;
  double beam_fraction = 0.0;  // total beam time / total simulated time
  double beam_fraction_std_error = 0.0;
  EmpiricalCdf tau_hist;        // beam chord times
  EmpiricalCdf tau_prime_hist;  // dark chord times
  EmpiricalCdf tau_dark_hist;   // dark-regime times
  EmpiricalCdf collisions_hist; // elastic collision counts per cycle
};

/// Time-in-beam-weighted Monte Carlo estimate of <rho33>.
McEstimate estimate_rho33(const PhysicalParams& p, double omega,
                          const TrajectoryConfig& cfg, unsigned threads = 0);

/// Measured dark-regime durations in exact-geometry mode.
EmpiricalCdf empirical_tau_dark(const PhysicalParams& p,
                                const TrajectoryConfig& cfg);

}  // namespace cpt

#endif  // CPT_MONTECARLO_HPP
