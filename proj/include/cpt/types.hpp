#ifndef CPT_TYPES_HPP
#define CPT_TYPES_HPP

#include <complex>

#include <Eigen/Dense>

namespace cpt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3c = Eigen::Vector3cd;
using Mat3c = Eigen::Matrix3cd;
using Complex = std::complex<double>;

// Reduced ground-state block, components (f, R, J) with
// f = rho11 - rho22, R = Re rho12, J = Im rho12.
using BlochVector = Vec3;

}  // namespace cpt

#endif  // CPT_TYPES_HPP
