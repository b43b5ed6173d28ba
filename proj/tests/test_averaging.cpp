#include <doctest.h>

#include <cmath>
#include <random>

#include "cpt/averaging.hpp"
#include "cpt/core.hpp"

using namespace cpt;

namespace {

Mat3 dark_chord_average(const PhysicalParams& p, const Geometry& g) {
  const AffineGenerator dark = dark_generator(p);
  return averaged_propagator(dark, time_average_dark_chord(g));
}

Mat3 beam_tau_average(const PhysicalParams& p, double v_z, const Geometry& g) {
  return averaged_propagator(beam_generator(p, v_z), time_average_tau(g));
}

}  // namespace

TEST_CASE("averaged_propagator degenerate density is identity") {
  PhysicalParams p;
  TimeAverage delta;
  delta.laplace = [](Complex) { return Complex(1.0, 0.0); };
  delta.time_scale = 1e-9;
  const Mat3 out = averaged_propagator(beam_generator(p, 40.0), delta);
  CHECK((out - Mat3::Identity()).norm() < 1e-10);
}

TEST_CASE("averaged_propagator dark closed form") {
  PhysicalParams p;
  p.detuning_raman = 3.0e3;
  p.elastic_prob = 0.2;
  const Geometry g = Geometry::from(p);
  const Mat3 out = averaged_propagator(dark_generator(p), time_average_dark_regime(g));
  // eigenstructure {-Gamma, -Gamma +- i Omega}: f block scalar, (R, J) block
  // a scaled rotation
  const double gf = laplace_tau_dark(Complex(-p.gamma_ground, 0.0), g).real();
  const Complex m = laplace_tau_dark(Complex(-p.gamma_ground, p.detuning_raman), g);
  CHECK(out(0, 0) == doctest::Approx(gf).epsilon(1e-10));
  CHECK(out(1, 1) == doctest::Approx(m.real()).epsilon(1e-10));
  CHECK(out(2, 2) == doctest::Approx(m.real()).epsilon(1e-10));
  CHECK(out(2, 1) == doctest::Approx(m.imag()).epsilon(1e-10));
  CHECK(out(1, 2) == doctest::Approx(-m.imag()).epsilon(1e-10));
  CHECK(std::abs(out(0, 1)) + std::abs(out(0, 2)) + std::abs(out(1, 0)) +
            std::abs(out(2, 0)) < 1e-12);
}

TEST_CASE("averaged_propagator eigen path vs direct quadrature") {
  PhysicalParams p;
  p.detuning_raman = 1.2e3;
  const Geometry g = Geometry::from(p);
  // keep the Doppler shift moderate so the pumped modes decay well inside
  // the truncated quadrature window
  const AffineGenerator gen = beam_generator(p, 2.0);
  const Mat3 via_eigen = averaged_propagator(gen, time_average_t(g));
  const TimeAverage avg = time_average_t(g);
  const Mat3 via_quad = integrate_matrix(
      [&](double t) { return Mat3(expm(gen.A, t) * avg.density(t)); }, 0.0,
      80.0 * avg.time_scale, 1e-13);
  CHECK((via_eigen - via_quad).norm() <= 1e-8 * std::max(1.0, via_quad.norm()));
}

TEST_CASE("geometric_average closed cases") {
  const Mat3 m = 0.5 * Mat3::Identity();
  CHECK((geometric_average(m, 0.0) - Mat3::Identity()).norm() == 0.0);
  CHECK(geometric_average(m, 1.0).norm() == 0.0);
  CHECK((geometric_average(m, 0.5) - (2.0 / 3.0) * Mat3::Identity()).norm() < 1e-14);
  CHECK_THROWS(geometric_average(Mat3::Identity() * 2.5, 0.5));
}

TEST_CASE("geometric_average equals the series") {
  std::mt19937 gen(41);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (double alpha : {0.25, 0.5, 0.75}) {
    for (int trial = 0; trial < 10; ++trial) {
      Mat3 m;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = u(gen);
      Mat3 sum = Mat3::Zero();
      Mat3 pw = Mat3::Identity();
      double w = 1.0 - alpha;
      for (int n = 0; n < 200 && w > 1e-16; ++n) {
        sum += w * pw;
        pw = pw * m;
        w *= alpha;
      }
      CHECK((geometric_average(m, alpha) - sum).norm() < 1e-12);
    }
  }
}

TEST_CASE("chain_matrices collapses at alpha extremes") {
  PhysicalParams p;
  p.detuning_raman = 800.0;
  const double v_z = 30.0;

  p.elastic_prob = 0.0;
  const Geometry g0 = Geometry::from(p);
  const NodeContribution n0 = chain_matrices(p, v_z);
  const Mat3 g_tau = beam_tau_average(p, v_z, g0);
  const Vec3 rho_s = stationary_state(beam_generator(p, v_z));
  CHECK((n0.c - (Mat3::Identity() - g_tau) * rho_s).norm() <=
        1e-10 * rho_s.norm());
  CHECK((n0.d - g_tau).norm() <= 1e-10 * g_tau.norm());

  p.elastic_prob = 1.0;
  const NodeContribution n1 = chain_matrices(p, v_z);
  CHECK(n1.d.norm() == 0.0);
}

TEST_CASE("chain_matrices equals the collision-count series") {
  std::mt19937 gen(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double alpha : {0.25, 0.5, 0.75}) {
    for (int trial = 0; trial < 5; ++trial) {
      PhysicalParams p;
      p.elastic_prob = alpha;
      p.rabi_1 = 2e5 + 8e5 * u(gen);
      p.rabi_2 = 2e5 + 8e5 * u(gen);
      p.detuning_raman = 2e4 * (u(gen) - 0.5);
      const double v_z = 200.0 * (u(gen) - 0.5);

      const Geometry g = Geometry::from(p);
      const Mat3 g_tau = beam_tau_average(p, v_z, g);
      const Mat3 g_prime = dark_chord_average(p, g);
      const Vec3 rho_s = stationary_state(beam_generator(p, v_z));
      const Mat3 r = g_tau * g_prime;
      const Mat3 inv_r = (Mat3::Identity() - r).inverse();

      Vec3 c_series = Vec3::Zero();
      Mat3 d_series = Mat3::Zero();
      Mat3 r_pow = Mat3::Identity();           // R^N
      Mat3 rev_pow = Mat3::Identity();         // (G' G_tau)^N
      double w = 1.0 - alpha;
      for (int n = 0; w > 1e-12; ++n) {
        c_series += w * inv_r * (Mat3::Identity() - r_pow * r) *
                    (Mat3::Identity() - g_tau) * rho_s;
        d_series += w * g_tau * rev_pow;
        r_pow = r_pow * r;
        rev_pow = rev_pow * (g_prime * g_tau);
        w *= alpha;
      }

      const NodeContribution node = chain_matrices(p, v_z);
      CHECK((node.c - c_series).norm() <= 1e-10 * std::max(1.0, c_series.norm()));
      CHECK((node.d - d_series).norm() <= 1e-10 * std::max(1.0, d_series.norm()));
    }
  }
}

TEST_CASE("rho_b_average fixed point") {
  PhysicalParams p;
  p.detuning_raman = 600.0;
  p.elastic_prob = 0.5;
  const Geometry g = Geometry::from(p);
  const Mat3 g_dark = averaged_propagator(dark_generator(p), time_average_dark_regime(g));
  const NodeContribution node = chain_matrices(p, 15.0);

  CHECK(rho_b_average(Vec3::Zero(), node.d, g_dark).norm() == 0.0);
  CHECK((rho_b_average(node.c, Mat3::Zero(), g_dark) - g_dark * node.c).norm() <
        1e-14);

  const BlochVector rb = rho_b_average(node.c, node.d, g_dark);
  CHECK((rb - g_dark * (node.c + node.d * rb)).norm() <=
        1e-12 * std::max(1.0, rb.norm()));
}

TEST_CASE("rho33_average dark without light") {
  PhysicalParams p;
  p.rabi_1 = 0.0;
  p.rabi_2 = 0.0;
  CHECK(rho33_average(p, 0.0) == 0.0);
}

TEST_CASE("rho33_average symmetric in the two-photon detuning") {
  PhysicalParams p;
  p.elastic_prob = 0.5;
  double max_s = 0.0, max_asym = 0.0;
  for (double w : {0.0, 150.0, 2.0e3, 6.0e4, 3.0e5}) {
    const double sp = rho33_average(p, w);
    const double sm = rho33_average(p, -w);
    max_s = std::max(max_s, sp);
    max_asym = std::max(max_asym, std::abs(sp - sm));
    CHECK(sp >= 0.0);
    CHECK(sp <= 1.0);
  }
  CHECK(max_asym <= 1e-10 * max_s);
}

TEST_CASE("rho33_average order robustness") {
  PhysicalParams p;
  p.elastic_prob = 0.25;
  for (double w : {0.0, 500.0, 4.0e4}) {
    const double v64 = rho33_average(p, w, 64);
    const double v128 = rho33_average(p, w, 128);
    CHECK(std::abs(v128 - v64) <= 1e-8 * v64);
  }
}

TEST_CASE("rho33 components partition the total") {
  PhysicalParams p;
  for (double alpha : {0.0, 0.5, 1.0}) {
    p.elastic_prob = alpha;
    const Rho33Breakdown b = rho33_components(p, 300.0);
    CHECK(b.total ==
          doctest::Approx(b.single_pass + b.beam_chain + b.dark_memory)
              .epsilon(1e-12));
    if (alpha == 0.0) CHECK(b.beam_chain == 0.0);
    if (alpha == 1.0) CHECK(b.dark_memory == 0.0);
    if (alpha == 0.5) {
      CHECK(b.beam_chain != 0.0);
      CHECK(b.dark_memory != 0.0);
    }
  }
}

TEST_CASE("rho33_average far-detuned incoherent limit") {
  PhysicalParams p;
  const Geometry g = Geometry::from(p);
  // with rho12 forced to zero the readout reduces to W/gamma, averaged
  // over the Maxwell velocity profile
  double incoherent = 0.0;
  const double h = 2e-3;
  for (double x = -6.5; x <= 6.5; x += h) {
    const OpticalFactors of = optical_factors(p, g.v_thermal * x);
    incoherent += std::exp(-x * x) / std::sqrt(M_PI) * of.W / p.gamma_excited * h;
  }
  const double far = rho33_average(p, 2.0 * M_PI * 1.0e6);
  CHECK(std::abs(far - incoherent) <= 0.01 * incoherent);
}

TEST_CASE("sweep ordering and determinism") {
  PhysicalParams p;
  p.elastic_prob = 0.5;
  const std::vector<double> grid{-2e4, -1e3, 0.0, 1e3, 2e4};
  const Spectrum s1 = sweep(p, grid, 64, 1);
  const Spectrum s2 = sweep(p, grid, 64, 3);
  REQUIRE(s1.rho33.size() == grid.size());
  CHECK(s1.has_components());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(s1.rho33[i] == s2.rho33[i]);
    CHECK(s1.dark_memory[i] == s2.dark_memory[i]);
  }
  CHECK_THROWS(sweep(p, {0.0, 0.0}, 64));
  CHECK_THROWS(sweep(p, {1.0, -1.0}, 64));
}

TEST_CASE("rho33_average rejects bad quadrature order") {
  PhysicalParams p;
  CHECK_THROWS(rho33_average(p, 0.0, 0));
  CHECK_THROWS(rho33_average(p, 0.0, 300));
}
