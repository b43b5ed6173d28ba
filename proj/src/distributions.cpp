#include "cpt/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpt/numerics.hpp"

namespace cpt {

namespace {
constexpr double pi = 3.14159265358979323846;
const double pi32 = std::pow(pi, 1.5);
}  // namespace

namespace fit {
double t_amp() {
  // normalization of the three-term density fixes the amplitude of the
  // x exp(-c x) term
  static const double amp =
      t_c * t_c *
      (1.0 - 2.0 / (t_b * pi32) - 16.0 * t_a * std::log(4.0 / 3.0) / pi32);
  return amp;
}
}  // namespace fit

double ell_perp(const PhysicalParams& p) {
  const double r = p.beam_radius, cr = p.cell_radius;
  if (!(r > 0.0 && r <= cr))
    throw std::domain_error("ell_perp: need 0 < r <= R");
  const double ratio = r / cr;
  return cr * std::sqrt(1.0 - ratio * ratio) - 0.5 * pi * r +
         cr * cr / r * std::asin(ratio);
}

Geometry Geometry::from(const PhysicalParams& p) {
  p.validate();
  Geometry g;
  g.v_thermal = p.thermal_velocity();
  g.beam_radius = p.beam_radius;
  g.cell_radius = p.cell_radius;
  g.elastic_prob = p.elastic_prob;
  g.tau_bar = 0.5 * pi32 * p.beam_radius / g.v_thermal;
  g.ell_perp = cpt::ell_perp(p);
  g.tau_bar_prime = g.ell_perp * std::sqrt(pi) / g.v_thermal;
  g.tau0 = (p.cell_radius - p.beam_radius) / g.v_thermal;
  if (p.elastic_prob < 1.0) {
    g.mean_collisions = p.elastic_prob / (1.0 - p.elastic_prob);
    const double ratio = p.cell_radius / p.beam_radius;
    g.tau_bar_dark = (ratio * ratio - 1.0) * g.tau_bar * (g.mean_collisions + 1.0) -
                     g.tau_bar_prime * g.mean_collisions;
    if (g.tau_bar_dark < g.tau0)
      throw std::domain_error(
          "Geometry: mean dark-regime time does not exceed the kinematic "
          "minimum; the shifted-exponential dark model is undefined for "
          "these (R, r, alpha)");
    // equality (e.g. r = R) degenerates to a deterministic dark time tau0
    g.rate_dark = g.tau_bar_dark > g.tau0
                      ? 1.0 / (g.tau_bar_dark - g.tau0)
                      : std::numeric_limits<double>::infinity();
  } else {
    g.mean_collisions = std::numeric_limits<double>::infinity();
    g.tau_bar_dark = std::numeric_limits<double>::infinity();
    g.rate_dark = 0.0;
  }
  return g;
}

double chord_time(double v_perp, double phi, const PhysicalParams& p) {
  if (v_perp <= 0.0) throw std::domain_error("chord_time: v_perp must be > 0");
  const double sin_max = p.beam_radius / p.cell_radius;
  if (phi < 0.0 || std::sin(phi) > sin_max * (1.0 + 1e-12))
    throw std::domain_error("chord_time: chord misses the beam");
  const double s = p.cell_radius * std::sin(phi);
  const double inside = std::max(p.beam_radius * p.beam_radius - s * s, 0.0);
  return 2.0 * std::sqrt(inside) / v_perp;
}

double beam_time_cdf(double tau, const Geometry& g) {
  if (tau <= 0.0) return 0.0;
  const double x = 2.0 * g.beam_radius / (tau * g.v_thermal);
  return dawson(x) / x;
}

double observation_density(double t, const Geometry& g) {
  if (t < 0.0) return 0.0;
  return (1.0 - beam_time_cdf(t, g)) / g.tau_bar;
}

double observation_density_approx(double x) {
  if (x < 0.0) return 0.0;
  using namespace fit;
  const double middle =
      x < 1e-6 ? 16.0 * t_a * t_a * t_a * x / (3.0 * pi32)
               : 16.0 * std::pow(1.0 - std::exp(-t_a * x), 3) / (3.0 * pi32 * x * x);
  return 2.0 / pi32 * std::exp(-t_b * x) + middle + t_amp() * x * std::exp(-t_c * x);
}

double dark_chord_cdf(double tau_prime, const Geometry& g) {
  if (tau_prime <= 0.0) return g.ell_perp == 0.0 ? 1.0 : 0.0;
  const double y = g.ell_perp / (tau_prime * g.v_thermal);
  return std::exp(-y * y);
}

double dark_chord_cdf_approx(double x) {
  using namespace fit;
  if (x <= p_x0) return 0.0;
  const double y = x - p_x0;
  const double e = 1.0 - std::exp(-p_a * y);
  return 1.0 - e * e * e * e / (y * y) - std::exp(-p_b * y) * (1.0 + p_b * y);
}

double dark_chord_density_approx(double x) {
  using namespace fit;
  if (x <= p_x0) return 0.0;
  const double y = x - p_x0;
  const double em = std::exp(-p_a * y);
  const double e = 1.0 - em;
  const double e3 = e * e * e;
  return -4.0 * p_a * em * e3 / (y * y) + 2.0 * e3 * e / (y * y * y) +
         p_b * p_b * y * std::exp(-p_b * y);
}

namespace {

// p(beta) = beta ln(beta), principal branch, with the removable value 0
// at beta = 0
Complex plog(Complex beta) {
  if (beta == Complex(0.0, 0.0)) return {0.0, 0.0};
  return beta * std::log(beta);
}

}  // namespace

Complex laplace_t_scaled(Complex big_lambda) {
  using namespace fit;
  const Complex L = big_lambda;
  return 2.0 / pi32 / (t_b - L) + t_amp() / ((t_c - L) * (t_c - L)) +
         16.0 / (3.0 * pi32) *
             (plog(-L) - 3.0 * plog(t_a - L) + 3.0 * plog(2.0 * t_a - L) -
              plog(3.0 * t_a - L));
}

Complex laplace_dark_chord_scaled(Complex big_lambda) {
  using namespace fit;
  const Complex L = big_lambda;
  if (L == Complex(0.0, 0.0)) return {1.0, 0.0};
  const Complex bracket = (2.0 * p_b - L) / ((p_b - L) * (p_b - L)) +
                          plog(4.0 * p_a - L) - 4.0 * plog(3.0 * p_a - L) -
                          4.0 * plog(p_a - L) + 6.0 * plog(2.0 * p_a - L) +
                          plog(-L) + 1.0 / L;
  return L * std::exp(L * p_x0) * bracket;
}

Complex laplace_t(Complex lambda, const Geometry& g) {
  return laplace_t_scaled(lambda * g.beam_radius / g.v_thermal);
}

Complex laplace_tau(Complex lambda, const Geometry& g) {
  return 1.0 + lambda * g.tau_bar * laplace_t(lambda, g);
}

Complex laplace_tau_prime(Complex lambda, const Geometry& g) {
  if (g.ell_perp == 0.0) return {1.0, 0.0};  // r = R: no dark chord
  return laplace_dark_chord_scaled(lambda * g.ell_perp / g.v_thermal);
}

Complex laplace_tau_dark(Complex lambda, const Geometry& g) {
  if (!g.has_dark_regime())
    throw std::logic_error("laplace_tau_dark: no dark regime at alpha = 1");
  return std::exp(lambda * g.tau0) / (1.0 - lambda / g.rate_dark);
}

double mean_tau_dark(const Geometry& g) {
  if (!g.has_dark_regime())
    throw std::logic_error("mean_tau_dark: no dark regime at alpha = 1");
  return g.tau_bar_dark;
}

}  // namespace cpt
