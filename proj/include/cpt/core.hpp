#ifndef CPT_CORE_HPP
#define CPT_CORE_HPP

#include "cpt/numerics.hpp"
#include "cpt/params.hpp"
#include "cpt/types.hpp"

namespace cpt {

/// Lorentzian field factors at longitudinal velocity v_z:
/// G + iF = gamma' / (gamma' - i(Omega_L - k v_z)),
/// W = G (V1^2 + V2^2) / gamma' (pumping rate),
/// Delta = F (V1^2 - V2^2) / gamma' (light shift).
struct OpticalFactors {
  double G;
  double F;
  double W;
  double Delta;
};

OpticalFactors optical_factors(const PhysicalParams& p, double v_z);

enum class Zone { beam, dark };

/// Generator of the reduced dynamics, rho_dot = A rho + B.
/// The dark zone has B = 0.
struct AffineGenerator {
  Mat3 A;
  Vec3 B;
  Zone zone;
};

AffineGenerator beam_generator(const PhysicalParams& p, double v_z);
AffineGenerator dark_generator(const PhysicalParams& p);

/// Excited-state readout rho33 = U^T rho + V.
struct Readout {
  Vec3 U;
  double V;
};

Readout readout(const PhysicalParams& p, double v_z);

inline double excited_population(const Readout& ro, const BlochVector& rho) {
  return ro.U.dot(rho) + ro.V;
}

/// Stationary solution rho_S = -A^{-1} B (zero for the dark zone).
/// Throws std::runtime_error if A is singular.
BlochVector stationary_state(const AffineGenerator& g);

/// Exact affine propagation over dt:
/// rho(dt) = rho_S + exp(A dt) (rho0 - rho_S).
BlochVector propagate(const AffineGenerator& g, const BlochVector& rho0,
                      double dt);

/// Precomputed propagator for repeated time steps with one generator.
/// Uses the eigenbasis when well conditioned, dense expm otherwise.
class Propagator {
 public:
  explicit Propagator(const AffineGenerator& g);

  const BlochVector& stationary() const { return stationary_; }

  BlochVector advance(const BlochVector& rho0, double dt) const;

  /// int_0^dt rho(t) dt, for time-resolved readout accumulation.
  Vec3 integral(const BlochVector& rho0, double dt) const;

 private:
  AffineGenerator gen_;
  BlochVector stationary_;
  EigenSystem es_;
  bool eigen_ok_;
};

}  // namespace cpt

#endif  // CPT_CORE_HPP
