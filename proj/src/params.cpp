#include "cpt/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cpt {

double PhysicalParams::thermal_velocity() const {
  return std::sqrt(2.0 * constants::k_boltzmann * temperature / atom_mass);
}

void PhysicalParams::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("PhysicalParams: " + what);
  };
  require(gamma_ground >= 0.0, "gamma_ground must be >= 0");
  require(gamma_excited >= 0.0, "gamma_excited must be >= 0");
  require(laser_linewidth >= 0.0, "laser_linewidth must be >= 0");
  require(gamma_prime() > 0.0, "gamma_prime must be > 0");
  require(rabi_1 >= 0.0 && rabi_2 >= 0.0, "Rabi frequencies must be >= 0");
  require(temperature > 0.0, "temperature must be > 0");
  require(atom_mass > 0.0, "atom_mass must be > 0");
  require(cell_radius > 0.0, "cell_radius must be > 0");
  require(beam_radius > 0.0 && beam_radius <= cell_radius,
          "beam_radius must satisfy 0 < r <= R");
  require(elastic_prob >= 0.0 && elastic_prob <= 1.0,
          "elastic_prob must be in [0,1]");
  require(std::isfinite(wavenumber) && wavenumber >= 0.0,
          "wavenumber must be finite and >= 0");
}

}  // namespace cpt
