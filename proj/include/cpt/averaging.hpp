#ifndef CPT_AVERAGING_HPP
#define CPT_AVERAGING_HPP

#include <functional>
#include <string>
#include <vector>

#include "cpt/core.hpp"
#include "cpt/distributions.hpp"
#include "cpt/numerics.hpp"
#include "cpt/params.hpp"
#include "cpt/types.hpp"

namespace cpt {

/// Laplace transform of a holding-time density, with the density itself
/// available for the quadrature fallback.
struct TimeAverage {
  std::function<Complex(Complex)> laplace;
  std::function<double(double)> density;
  double time_scale = 0.0;  // characteristic duration, sets the fallback range
};

TimeAverage time_average_t(const Geometry& g);
TimeAverage time_average_tau(const Geometry& g);
TimeAverage time_average_dark_chord(const Geometry& g);
TimeAverage time_average_dark_regime(const Geometry& g);

/// <exp(A * time)> over the given holding-time distribution.
/// Eigenbasis route when well conditioned, expm quadrature otherwise.
Mat3 averaged_propagator(const AffineGenerator& gen, const TimeAverage& avg);

/// <M^n> over the geometric collision-count distribution,
/// (1 - alpha)(I - alpha M)^{-1}. Throws on spectral radius alpha*M >= 1.
Mat3 geometric_average(const Mat3& m, double alpha);

/// Per-velocity-node integrands of the entry-state chain sums.
struct NodeContribution {
  Vec3 c;  // contribution to the entry-state source C
  Mat3 d;  // contribution to the re-entry transfer D
};

NodeContribution chain_matrices(const PhysicalParams& p, double v_z);

/// Entry-state fixed point <rho_b> = (I - Gd D)^{-1} Gd C.
BlochVector rho_b_average(const Vec3& c, const Mat3& d, const Mat3& dark_regime_avg);

/// Ensemble-averaged excited-state population at two-photon detuning omega.
double rho33_average(const PhysicalParams& p, double omega, int quad_order = 64);

/// rho33_average split by the origin of the ground-state memory:
///   single_pass — entry state forgotten (thermal equilibrium), the broad
///                 background formed by one beam crossing;
///   beam_chain  — memory of earlier chords within the same elastic
///                 (beam-passing) sequence; identically 0 at alpha = 0;
///   dark_memory — memory carried through sticking collisions and the dark
///                 regime; identically 0 at alpha = 1.
/// total = single_pass + beam_chain + dark_memory.
struct Rho33Breakdown {
  double total = 0.0;
  double single_pass = 0.0;
  double beam_chain = 0.0;
  double dark_memory = 0.0;
};

Rho33Breakdown rho33_components(const PhysicalParams& p, double omega,
                                int quad_order = 64);

struct SpectrumMeta {
  PhysicalParams params;
  int quad_order = 64;
  std::string mode = "analytic";
};

struct Spectrum {
  std::vector<double> omega;   // rad/s, strictly increasing
  std::vector<double> rho33;
  // component breakdown (see Rho33Breakdown); filled by analytic sweeps,
  // empty for Monte Carlo spectra
  std::vector<double> single_pass;
  std::vector<double> beam_chain;
  std::vector<double> dark_memory;
  SpectrumMeta meta;

  bool has_components() const { return single_pass.size() == omega.size(); }
};

/// One rho33_average per grid point; points are evaluated independently
/// (parallel across threads) and merged in grid order.
Spectrum sweep(const PhysicalParams& p, const std::vector<double>& omega_grid,
               int quad_order = 64, unsigned threads = 0);

}  // namespace cpt

#endif  // CPT_AVERAGING_HPP
