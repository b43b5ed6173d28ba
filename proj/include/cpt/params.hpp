#ifndef CPT_PARAMS_HPP
#define CPT_PARAMS_HPP

namespace cpt {

namespace constants {
inline constexpr double k_boltzmann = 1.380649e-23;       // J/K
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double mass_rb87 = 86.909180527 * atomic_mass_unit;
inline constexpr double wavenumber_rb87_d1 = 2.0 * 3.14159265358979323846 / 795.0e-9;
}  // namespace constants

/// Cell, atom and field parameters. Rates are 1/s, angular detunings rad/s,
/// lengths m, temperature K, mass kg.
struct PhysicalParams {
  double gamma_ground = 300.0;        // ground-state relaxation Gamma
  double gamma_excited = 3.6e7;       // excited-state decay gamma
  double laser_linewidth = 0.0;       // Gamma_L
  double rabi_1 = 7.7e5;              // V1
  double rabi_2 = 7.7e5;              // V2
  double detuning_optical = 0.0;      // Omega_L, one-photon
  double detuning_raman = 0.0;        // Omega, two-photon
  double wavenumber = constants::wavenumber_rb87_d1;
  double temperature = 293.15;
  double atom_mass = constants::mass_rb87;
  double cell_radius = 5.0e-3;        // R
  double beam_radius = 1.5e-3;        // r
  double elastic_prob = 0.0;          // alpha, in [0,1]

  // (gamma + Gamma_L) / 2, relaxation of the optical coherences
  double gamma_prime() const { return 0.5 * (gamma_excited + laser_linewidth); }

  // most probable speed sqrt(2 kB T / m)
  double thermal_velocity() const;

  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;
};

}  // namespace cpt

#endif  // CPT_PARAMS_HPP
