#ifndef CPT_NUMERICS_HPP
#define CPT_NUMERICS_HPP

#include <functional>
#include <vector>

#include "cpt/types.hpp"

namespace cpt {

/// Dawson integral D(x) = exp(-x^2) * int_0^x exp(t^2) dt.
/// Relative error below 1e-12 for |x| <= 50.
double dawson(double x);

struct EigenSystem {
  Vec3c values;    // complex-conjugate pairs adjacent
  Mat3c vectors;   // columns are eigenvectors
  Mat3c inverse;
  double cond = 0.0;  // Frobenius condition estimate of the eigenvector matrix
};

// Above this conditioning the eigenbasis is treated as unreliable and
// callers fall back to direct matrix-exponential quadrature.
inline constexpr double eigen_cond_limit = 1e8;

EigenSystem eigen_decompose(const Mat3& a);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for weight exp(-x^2) on (-inf, inf), 1 <= n <= 256.
QuadratureRule gauss_hermite(int n);

/// exp(a*t) by scaling-and-squaring (Pade).
Mat3 expm(const Mat3& a, double t);

/// Adaptive Simpson integration of a matrix-valued function on [lo, hi].
Mat3 integrate_matrix(const std::function<Mat3(double)>& f, double lo,
                      double hi, double tol);

}  // namespace cpt

#endif  // CPT_NUMERICS_HPP
