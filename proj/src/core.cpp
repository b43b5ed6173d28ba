#include "cpt/core.hpp"

#include <cmath>
#include <stdexcept>

namespace cpt {

OpticalFactors optical_factors(const PhysicalParams& p, double v_z) {
  const double gp = p.gamma_prime();
  if (gp <= 0.0) throw std::invalid_argument("optical_factors: gamma_prime <= 0");
  const Complex lorentz = gp / Complex(gp, -(p.detuning_optical - p.wavenumber * v_z));
  OpticalFactors of;
  of.G = lorentz.real();
  of.F = lorentz.imag();
  of.W = of.G * (p.rabi_1 * p.rabi_1 + p.rabi_2 * p.rabi_2) / gp;
  of.Delta = of.F * (p.rabi_1 * p.rabi_1 - p.rabi_2 * p.rabi_2) / gp;
  return of;
}

AffineGenerator beam_generator(const PhysicalParams& p, double v_z) {
  p.validate();
  const OpticalFactors of = optical_factors(p, v_z);
  const double gp = p.gamma_prime();
  const double v1 = p.rabi_1, v2 = p.rabi_2;
  const double decay = of.W + p.gamma_ground;
  const double rotation = p.detuning_raman - of.Delta;
  const double coupling = of.F * v1 * v2 / gp;

  AffineGenerator g;
  g.zone = Zone::beam;
  g.A << -decay, 0.0, -4.0 * coupling,
         0.0, -decay, -rotation,
         coupling, rotation, -decay;
  g.B << of.G * (v2 * v2 - v1 * v1) / gp,
         -of.G * v1 * v2 / gp,
         0.0;
  return g;
}

AffineGenerator dark_generator(const PhysicalParams& p) {
  p.validate();
  const double gamma = p.gamma_ground;
  const double omega = p.detuning_raman;
  AffineGenerator g;
  g.zone = Zone::dark;
  g.A << -gamma, 0.0, 0.0,
         0.0, -gamma, -omega,
         0.0, omega, -gamma;
  g.B.setZero();
  return g;
}

Readout readout(const PhysicalParams& p, double v_z) {
  const double gamma = p.gamma_excited;
  if (gamma <= 0.0) throw std::invalid_argument("readout: gamma_excited <= 0");
  const OpticalFactors of = optical_factors(p, v_z);
  const double gp = p.gamma_prime();
  Readout ro;
  ro.U << of.G * (p.rabi_1 * p.rabi_1 - p.rabi_2 * p.rabi_2) / (gamma * gp),
          4.0 * of.G * p.rabi_1 * p.rabi_2 / (gamma * gp),
          0.0;
  ro.V = of.W / gamma;
  return ro;
}

BlochVector stationary_state(const AffineGenerator& g) {
  Eigen::FullPivLU<Mat3> lu(g.A);
  if (!lu.isInvertible())
    throw std::runtime_error("stationary_state: singular generator");
  if (g.B.isZero()) return BlochVector::Zero();
  return BlochVector(-lu.solve(g.B));
}

BlochVector propagate(const AffineGenerator& g, const BlochVector& rho0,
                      double dt) {
  if (dt < 0.0) throw std::invalid_argument("propagate: negative dt");
  const BlochVector rho_s = stationary_state(g);
  return rho_s + expm(g.A, dt) * (rho0 - rho_s);
}

Propagator::Propagator(const AffineGenerator& g)
    : gen_(g), stationary_(stationary_state(g)), es_(eigen_decompose(g.A)) {
  eigen_ok_ = es_.cond < eigen_cond_limit;
}

BlochVector Propagator::advance(const BlochVector& rho0, double dt) const {
  if (!eigen_ok_) return stationary_ + expm(gen_.A, dt) * (rho0 - stationary_);
  const Vec3c coeff = es_.inverse * (rho0 - stationary_);
  Vec3c scaled;
  for (int i = 0; i < 3; ++i) scaled(i) = std::exp(es_.values(i) * dt) * coeff(i);
  return stationary_ + (es_.vectors * scaled).real();
}

Vec3 Propagator::integral(const BlochVector& rho0, double dt) const {
  const Vec3 delta = rho0 - stationary_;
  if (!eigen_ok_) {
    // A is invertible for the generators in use (Gamma > 0)
    Eigen::FullPivLU<Mat3> lu(gen_.A);
    return stationary_ * dt +
           lu.solve((expm(gen_.A, dt) - Mat3::Identity()) * delta);
  }
  const Vec3c coeff = es_.inverse * delta;
  Vec3c scaled;
  for (int i = 0; i < 3; ++i) {
    const Complex lam = es_.values(i);
    const Complex phi = std::abs(lam) * dt < 1e-8
                            ? Complex(dt)
                            : (std::exp(lam * dt) - 1.0) / lam;
    scaled(i) = phi * coeff(i);
  }
  return stationary_ * dt + (es_.vectors * scaled).real();
}

}  // namespace cpt
