#include "cpt/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace cpt {

double dawson(double x) {
  const double ax = std::abs(x);
  double result;
  if (ax <= 6.0) {
    // D(x) = (sqrt(pi)/2) exp(-x^2) erfi(x); the erfi series has only
    // positive terms, so there is no cancellation before the final product.
    const double x2 = ax * ax;
    double term = ax;  // x^(2k+1) / k!
    double sum = term;
    for (int k = 1; k < 200; ++k) {
      term *= x2 / k;
      const double add = term / (2 * k + 1);
      sum += add;
      if (add < sum * 1e-17) break;
    }
    const double sqrt_pi = 1.7724538509055160273;
    result = 0.5 * sqrt_pi * std::exp(-x2) * (2.0 / sqrt_pi) * sum;
  } else {
    // asymptotic series 1/(2x) * sum (2k-1)!! / (2x^2)^k, truncated at the
    // smallest term
    const double inv2x2 = 1.0 / (2.0 * ax * ax);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
      const double next = term * (2 * k - 1) * inv2x2;
      if (next >= term && k > 1) break;  // series started diverging
      term = next;
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    result = sum / (2.0 * ax);
  }
  return x < 0.0 ? -result : result;
}

EigenSystem eigen_decompose(const Mat3& a) {
  if (!a.allFinite()) throw std::invalid_argument("eigen_decompose: non-finite input");
  Eigen::EigenSolver<Mat3> solver(a);
  EigenSystem es;
  es.values = solver.eigenvalues();
  es.vectors = solver.eigenvectors();

  // put complex-conjugate pairs in adjacent slots, conjugates together
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const Complex a_ = es.values(i), b_ = es.values(j);
    if (std::abs(a_.imag()) != std::abs(b_.imag()))
      return std::abs(a_.imag()) < std::abs(b_.imag());
    if (a_.real() != b_.real()) return a_.real() < b_.real();
    return a_.imag() > b_.imag();
  });
  Vec3c vals;
  Mat3c vecs;
  for (int i = 0; i < 3; ++i) {
    vals(i) = es.values(order[i]);
    vecs.col(i) = es.vectors.col(order[i]);
  }
  es.values = vals;
  es.vectors = vecs;

  Eigen::FullPivLU<Mat3c> lu(es.vectors);
  if (!lu.isInvertible()) {
    es.cond = std::numeric_limits<double>::infinity();
    es.inverse.setZero();
    return es;
  }
  es.inverse = lu.inverse();
  es.cond = es.vectors.norm() * es.inverse.norm();
  return es;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1 || n > 256)
    throw std::out_of_range("gauss_hermite: order must be in [1, 256]");
  // Golub-Welsch on the Jacobi matrix of the (physicists') Hermite recurrence
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(0.5 * i);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  const double sqrt_pi = 1.7724538509055160273;
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  // symmetrize against eigensolver roundoff
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -node;
    rule.nodes[j] = node;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Mat3 expm(const Mat3& a, double t) {
  if (!a.allFinite() || !std::isfinite(t))
    throw std::invalid_argument("expm: non-finite input");
  return Mat3((a * t).exp());
}

namespace {

Mat3 simpson(const std::function<Mat3(double)>& f, double lo, double hi,
             const Mat3& flo, const Mat3& fmid, const Mat3& fhi) {
  return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
}

void adaptive(const std::function<Mat3(double)>& f, double lo, double hi,
              const Mat3& flo, const Mat3& fmid, const Mat3& fhi,
              const Mat3& whole, double tol, int depth, Mat3& acc) {
  const double mid = 0.5 * (lo + hi);
  const Mat3 flm = f(0.5 * (lo + mid));
  const Mat3 fmh = f(0.5 * (mid + hi));
  const Mat3 left = simpson(f, lo, mid, flo, flm, fmid);
  const Mat3 right = simpson(f, mid, hi, fmid, fmh, fhi);
  const Mat3 delta = left + right - whole;
  if (depth <= 0 || delta.cwiseAbs().maxCoeff() < 15.0 * tol) {
    acc += left + right + delta / 15.0;
    return;
  }
  adaptive(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1, acc);
  adaptive(f, mid, hi, fmid, fmh, fhi, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace

Mat3 integrate_matrix(const std::function<Mat3(double)>& f, double lo,
                      double hi, double tol) {
  Mat3 acc = Mat3::Zero();
  const Mat3 flo = f(lo);
  const Mat3 fhi = f(hi);
  const Mat3 fmid = f(0.5 * (lo + hi));
  const Mat3 whole = simpson(f, lo, hi, flo, fmid, fhi);
  adaptive(f, lo, hi, flo, fmid, fhi, whole, tol, 40, acc);
  return acc;
}

}  // namespace cpt
