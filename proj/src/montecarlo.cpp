#include "cpt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <thread>

#include "cpt/core.hpp"

namespace cpt {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

AtomRng::AtomRng(std::uint64_t seed, std::uint64_t atom_index) {
  std::uint64_t state = seed ^ (atom_index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  for (auto& s : s_) s = splitmix64(state);
}

double AtomRng::uniform() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return ((result >> 11) + 1) * 0x1.0p-53;  // (0, 1]
}

double AtomRng::normal() {
  if (have_normal_) {
    have_normal_ = false;
    return cached_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * 3.14159265358979323846 * uniform();
  cached_normal_ = radius * std::sin(angle);
  have_normal_ = true;
  return radius * std::cos(angle);
}

double AtomRng::exponential() { return -std::log(uniform()); }

void TrajectoryConfig::validate_or_default(const PhysicalParams& p) {
  if (n_atoms < 1) throw std::invalid_argument("TrajectoryConfig: n_atoms < 1");
  if (burn_in == 0.0 && p.gamma_ground > 0.0) burn_in = 5.0 / p.gamma_ground;
  if (!(t_total > burn_in) || burn_in < 0.0)
    throw std::invalid_argument("TrajectoryConfig: need t_total > burn_in >= 0");
}

EntrySample sample_entry(const PhysicalParams& p, AtomRng& rng) {
  EntrySample s;
  const double sin_max = p.beam_radius / p.cell_radius;
  s.phi = std::asin(sin_max * rng.uniform());
  const double v_t = p.thermal_velocity();
  s.v_perp = v_t * std::sqrt(-std::log(rng.uniform()));
  s.v_z = v_t / std::sqrt(2.0) * rng.normal();
  return s;
}

namespace {

inline BlochVector dark_step(const BlochVector& rho, double gamma, double omega,
                             double dt) {
  const double decay = std::exp(-gamma * dt);
  const double c = std::cos(omega * dt), s = std::sin(omega * dt);
  return {decay * rho(0), decay * (c * rho(1) - s * rho(2)),
          decay * (s * rho(1) + c * rho(2))};
}

struct SampleCollector {
  std::size_t cap = 0;
  std::vector<double> tau, tau_prime, tau_dark, collisions;
  void push(std::vector<double>& v, double x) {
    if (v.size() < cap) v.push_back(x);
  }
};

// Accumulates the readout integral over the part of a beam segment that
// falls inside the observation window.
struct Accumulator {
  double window_lo, window_hi;
  double rho33_integral = 0.0;
  double beam_time = 0.0;

  void beam_segment(const Propagator& prop, const Readout& ro,
                    BlochVector& rho, double start, double duration) {
    const double lo = std::max(start, window_lo);
    const double hi = std::min(start + duration, window_hi);
    if (hi > lo) {
      const BlochVector rho_lo = prop.advance(rho, lo - start);
      rho33_integral += ro.U.dot(prop.integral(rho_lo, hi - lo)) +
                        ro.V * (hi - lo);
      beam_time += hi - lo;
    }
    rho = prop.advance(rho, duration);
  }
};

AtomResult run_model_faithful(const PhysicalParams& p, double omega,
                              const TrajectoryConfig& cfg, AtomRng& rng,
                              SampleCollector* collect) {
  PhysicalParams pw = p;
  pw.detuning_raman = omega;
  const Geometry geom = Geometry::from(pw);
  const double alpha = pw.elastic_prob;
  const double gamma = pw.gamma_ground;
  const double v_t = geom.v_thermal;

  Accumulator acc{cfg.burn_in, cfg.t_total};
  BlochVector rho = BlochVector::Zero();
  double t = 0.0;
  double v_z = v_t / std::sqrt(2.0) * rng.normal();

  while (t < cfg.t_total) {
    // one beam-passing cycle: N + 1 beam chords, N dark chords
    std::uint64_t n_elastic;
    if (alpha == 0.0) {
      n_elastic = 0;
    } else if (alpha == 1.0) {
      n_elastic = std::numeric_limits<std::uint64_t>::max();
    } else {
      n_elastic = static_cast<std::uint64_t>(
          std::floor(std::log(rng.uniform()) / std::log(alpha)));
    }
    if (collect && n_elastic != std::numeric_limits<std::uint64_t>::max())
      collect->push(collect->collisions, static_cast<double>(n_elastic));

    const Propagator prop(beam_generator(pw, v_z));
    const Readout ro = readout(pw, v_z);

    for (std::uint64_t i = 0; i <= n_elastic && t < cfg.t_total; ++i) {
      const double sin_phi = geom.beam_radius / geom.cell_radius * rng.uniform();
      const double v_perp = v_t * std::sqrt(-std::log(rng.uniform()));
      const double s = geom.cell_radius * sin_phi;
      const double tau =
          2.0 * std::sqrt(std::max(
                    geom.beam_radius * geom.beam_radius - s * s, 0.0)) /
          v_perp;
      if (collect) collect->push(collect->tau, tau);
      acc.beam_segment(prop, ro, rho, t, tau);
      t += tau;

      if (i < n_elastic && t < cfg.t_total && geom.ell_perp > 0.0) {
        const double tau_prime =
            geom.ell_perp / (v_t * std::sqrt(-std::log(rng.uniform())));
        if (collect) collect->push(collect->tau_prime, tau_prime);
        rho = dark_step(rho, gamma, omega, tau_prime);
        t += tau_prime;
      }
    }
    if (t >= cfg.t_total) break;

    // sticking collision: thermal re-emission, dark-regime excursion
    v_z = v_t / std::sqrt(2.0) * rng.normal();
    const double tau_d = geom.tau0 + rng.exponential() / geom.rate_dark;
    if (collect) collect->push(collect->tau_dark, tau_d);
    rho = dark_step(rho, gamma, omega, tau_d);
    t += tau_d;
  }

  AtomResult res;
  res.rho33_time_integral = acc.rho33_integral;
  res.beam_time = acc.beam_time;
  res.total_time = cfg.t_total - cfg.burn_in;
  return res;
}

AtomResult run_exact_geometry(const PhysicalParams& p, double omega,
                              const TrajectoryConfig& cfg, AtomRng& rng,
                              SampleCollector* collect) {
  PhysicalParams pw = p;
  pw.detuning_raman = omega;
  const Geometry geom = Geometry::from(pw);
  const double alpha = pw.elastic_prob;
  const double gamma = pw.gamma_ground;
  const double v_t = geom.v_thermal;
  const double cell_r = geom.cell_radius, beam_r = geom.beam_radius;

  Accumulator acc{cfg.burn_in, cfg.t_total};
  BlochVector rho = BlochVector::Zero();
  double t = 0.0;

  auto thermal = [&](double& sin_phi, double& v_perp, double& v_z) {
    sin_phi = rng.uniform();  // cosine emission law, folded by left-right symmetry
    v_perp = v_t * std::sqrt(-std::log(rng.uniform()));
    v_z = v_t / std::sqrt(2.0) * rng.normal();
  };

  double sin_phi, v_perp, v_z;
  thermal(sin_phi, v_perp, v_z);

  std::unique_ptr<Propagator> prop;
  std::unique_ptr<Readout> ro;
  auto refresh = [&] {
    prop = std::make_unique<Propagator>(beam_generator(pw, v_z));
    ro = std::make_unique<Readout>(readout(pw, v_z));
  };
  refresh();

  // dark-regime bookkeeping: time since last beam-zone exit and whether a
  // sticking collision occurred in between
  double since_beam_exit = 0.0;
  bool saw_sticking = false;
  bool had_beam = false;

  while (t < cfg.t_total) {
    const double impact = cell_r * sin_phi;  // chord impact parameter
    const double half_chord = cell_r * std::sqrt(1.0 - sin_phi * sin_phi);
    const double chord_duration = 2.0 * half_chord / v_perp;

    if (impact < beam_r) {
      const double half_beam = std::sqrt(beam_r * beam_r - impact * impact);
      const double beam_duration = 2.0 * half_beam / v_perp;
      const double approach = (half_chord - half_beam) / v_perp;

      if (had_beam && collect) {
        const double gap = since_beam_exit + approach;
        if (saw_sticking)
          collect->push(collect->tau_dark, gap);
        else
          collect->push(collect->tau_prime, gap);
      }
      rho = dark_step(rho, gamma, omega, approach);
      t += approach;

      if (collect) collect->push(collect->tau, beam_duration);
      acc.beam_segment(*prop, *ro, rho, t, beam_duration);
      t += beam_duration;

      rho = dark_step(rho, gamma, omega, approach);
      t += approach;
      since_beam_exit = approach;
      saw_sticking = false;
      had_beam = true;
    } else {
      rho = dark_step(rho, gamma, omega, chord_duration);
      t += chord_duration;
      since_beam_exit += chord_duration;
    }

    // wall collision
    if (rng.uniform() < alpha) {
      // specular: chord angle and all velocity components preserved
    } else {
      thermal(sin_phi, v_perp, v_z);
      refresh();
      saw_sticking = true;
    }
  }

  AtomResult res;
  res.rho33_time_integral = acc.rho33_integral;
  res.beam_time = acc.beam_time;
  res.total_time = cfg.t_total - cfg.burn_in;
  return res;
}

AtomResult run_atom(const PhysicalParams& p, double omega,
                    const TrajectoryConfig& cfg, AtomRng& rng,
                    SampleCollector* collect) {
  return cfg.mode == McMode::model_faithful
             ? run_model_faithful(p, omega, cfg, rng, collect)
             : run_exact_geometry(p, omega, cfg, rng, collect);
}

}  // namespace

AtomResult simulate_atom(const PhysicalParams& p, double omega,
                         const TrajectoryConfig& cfg, AtomRng& rng) {
  PhysicalParams pw = p;
  pw.detuning_raman = omega;
  pw.validate();
  if (pw.rabi_1 == 0.0 && pw.rabi_2 == 0.0) {
    AtomResult res;
    res.total_time = cfg.t_total - cfg.burn_in;
    return res;
  }
  return run_atom(p, omega, cfg, rng, nullptr);
}

double EmpiricalCdf::mean() const {
  double sum = 0.0;
  for (double x : samples) sum += x;
  return samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
}

double EmpiricalCdf::ks_distance(const std::function<double(double)>& cdf) const {
  const auto n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    worst = std::max(worst, std::abs(f - static_cast<double>(i) / n));
    worst = std::max(worst, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return worst;
}

McEstimate estimate_rho33(const PhysicalParams& p, double omega,
                          const TrajectoryConfig& cfg_in, unsigned threads) {
  PhysicalParams pw = p;
  pw.detuning_raman = omega;
  pw.validate();
  TrajectoryConfig cfg = cfg_in;
  cfg.validate_or_default(pw);

  const std::uint64_t n = cfg.n_atoms;
  std::vector<AtomResult> results(n);
  // histograms come from a fixed prefix of atoms so that the output does
  // not depend on thread scheduling
  const std::uint64_t n_collect = std::min<std::uint64_t>(n, 4000);
  std::vector<SampleCollector> collectors(n_collect);

  const bool dark_field = pw.rabi_1 == 0.0 && pw.rabi_2 == 0.0;

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      AtomRng rng(cfg.seed, i);
      SampleCollector* collect = nullptr;
      if (i < n_collect) {
        collectors[i].cap = 256;
        collect = &collectors[i];
      }
      if (dark_field) {
        results[i].total_time = cfg.t_total - cfg.burn_in;
      } else {
        results[i] = run_atom(pw, omega, cfg, rng, collect);
      }
    }
  };
  if (threads <= 1 || n < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  McEstimate est;
  double sum_s = 0.0, sum_t = 0.0, sum_total = 0.0;
  for (const auto& r : results) {
    sum_s += r.rho33_time_integral;
    sum_t += r.beam_time;
    sum_total += r.total_time;
    if (r.beam_time > 0.0) ++est.n_effective;
  }
  est.mean = sum_t > 0.0 ? sum_s / sum_t : 0.0;
  est.beam_fraction = sum_total > 0.0 ? sum_t / sum_total : 0.0;

  // ratio-estimator standard errors
  double var_mean = 0.0, var_frac = 0.0;
  for (const auto& r : results) {
    const double d1 = r.rho33_time_integral - est.mean * r.beam_time;
    const double d2 = r.beam_time - est.beam_fraction * r.total_time;
    var_mean += d1 * d1;
    var_frac += d2 * d2;
  }
  const auto nn = static_cast<double>(n);
  if (n > 1) {
    if (sum_t > 0.0)
      est.std_error = std::sqrt(var_mean * nn / (nn - 1.0)) / sum_t;
    if (sum_total > 0.0)
      est.beam_fraction_std_error =
          std::sqrt(var_frac * nn / (nn - 1.0)) / sum_total;
  }

  auto merge = [&](std::vector<double> SampleCollector::* member,
                   EmpiricalCdf& out) {
    for (auto& c : collectors)
      out.samples.insert(out.samples.end(), (c.*member).begin(),
                         (c.*member).end());
    std::sort(out.samples.begin(), out.samples.end());
  };
  merge(&SampleCollector::tau, est.tau_hist);
  merge(&SampleCollector::tau_prime, est.tau_prime_hist);
  merge(&SampleCollector::tau_dark, est.tau_dark_hist);
  merge(&SampleCollector::collisions, est.collisions_hist);
  return est;
}

EmpiricalCdf empirical_tau_dark(const PhysicalParams& p,
                                const TrajectoryConfig& cfg_in) {
  PhysicalParams pw = p;
  pw.validate();
  TrajectoryConfig cfg = cfg_in;
  if (cfg.mode != McMode::exact_geometry)
    throw std::invalid_argument("empirical_tau_dark: exact-geometry mode only");
  cfg.validate_or_default(pw);

  EmpiricalCdf out;
  for (std::uint64_t i = 0; i < cfg.n_atoms; ++i) {
    AtomRng rng(cfg.seed, i);
    SampleCollector collect;
    collect.cap = 4096;
    run_exact_geometry(pw, pw.detuning_raman, cfg, rng, &collect);
    out.samples.insert(out.samples.end(), collect.tau_dark.begin(),
                       collect.tau_dark.end());
  }
  std::sort(out.samples.begin(), out.samples.end());
  return out;
}

}  // namespace cpt
