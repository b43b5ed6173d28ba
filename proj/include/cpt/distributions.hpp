#ifndef CPT_DISTRIBUTIONS_HPP
#define CPT_DISTRIBUTIONS_HPP

#include "cpt/params.hpp"
#include "cpt/types.hpp"

namespace cpt {

/// Derived kinematic quantities, computed once per parameter set.
struct Geometry {
  double v_thermal = 0.0;        // v_T
  double tau_bar = 0.0;          // mean beam-crossing time
  double ell_perp = 0.0;         // mean transverse dark-chord length
  double tau_bar_prime = 0.0;    // mean dark-chord time
  double tau0 = 0.0;             // minimal dark-regime time (R - r)/v_T
  double tau_bar_dark = 0.0;     // mean dark-regime time (inf when alpha = 1)
  double rate_dark = 0.0;        // h = 1/(tau_bar_dark - tau0)
  double mean_collisions = 0.0;  // N_bar = alpha/(1 - alpha)
  double beam_radius = 0.0;
  double cell_radius = 0.0;
  double elastic_prob = 0.0;

  bool has_dark_regime() const { return elastic_prob < 1.0; }

  /// Throws std::domain_error when the dark-regime model is undefined
  /// (tau_bar_dark <= tau0 at alpha < 1).
  static Geometry from(const PhysicalParams& p);
};

/// Mean transverse path length in the dark zone,
/// R sqrt(1 - r^2/R^2) - pi r/2 + (R^2/r) asin(r/R).
double ell_perp(const PhysicalParams& p);

/// Beam-crossing time of a straight chord at angle phi to the wall normal.
/// Valid for 0 <= phi <= asin(r/R); throws std::domain_error outside.
double chord_time(double v_perp, double phi, const PhysicalParams& p);

/// CDF of the beam-crossing time tau.
double beam_time_cdf(double tau, const Geometry& g);

/// Density of the continuous time already spent in the beam at observation,
/// f_t(t) = (1 - F_tau(t)) / tau_bar.
double observation_density(double t, const Geometry& g);

/// Dimensionless fit of the observation-time density (argument x = t v_T/r).
double observation_density_approx(double x);

/// CDF of the dark-chord time, exact form exp(-l_perp^2/(tau'^2 v_T^2)).
double dark_chord_cdf(double tau_prime, const Geometry& g);

/// Dimensionless fit of the dark-chord CDF (argument x = tau' v_T/l_perp).
double dark_chord_cdf_approx(double x);
/// Density of the fit (derivative of dark_chord_cdf_approx).
double dark_chord_density_approx(double x);

/// Mean dark-regime time from the time-balance condition.
/// Requires alpha < 1.
double mean_tau_dark(const Geometry& g);

// Laplace-type averages g(lambda) = <exp(lambda * time)>, each with
// g(0) = 1 and |g| <= 1 for Re lambda <= 0.
Complex laplace_t(Complex lambda, const Geometry& g);
Complex laplace_tau(Complex lambda, const Geometry& g);
Complex laplace_tau_prime(Complex lambda, const Geometry& g);
Complex laplace_tau_dark(Complex lambda, const Geometry& g);

// Dimensionless forms of the fitted transforms.
Complex laplace_t_scaled(Complex big_lambda);
Complex laplace_dark_chord_scaled(Complex big_lambda);

namespace fit {
// observation-time density coefficients; amp is fixed by the
// normalization of the density given the three decay constants
inline constexpr double t_a = 0.49;
inline constexpr double t_b = 2.286;
inline constexpr double t_c = 1.272;
double t_amp();
// dark-chord CDF coefficients
inline constexpr double p_a = 0.89;
inline constexpr double p_b = 2.56;
inline constexpr double p_x0 = 0.3864;
}  // namespace fit

}  // namespace cpt

#endif  // CPT_DISTRIBUTIONS_HPP
