#pragma once

// Landauer cost arithmetic, the erasure ledger, the trusted lab's background
// heat model and the one-sided z-test that turns "monitor the local
// environment" into a decision rule.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdemon/parallel.hpp"
#include "qdemon/rng.hpp"

namespace qdemon {

// Exact SI value.
inline constexpr double kBoltzmannJPerK = 1.380649e-23;

inline double landauer_cost(double bits, double temperature_kelvin) {
  if (!(bits >= 0.0)) throw std::invalid_argument("landauer_cost: bits must be >= 0");
  if (!(temperature_kelvin > 0.0)) {
    throw std::invalid_argument("landauer_cost: temperature must be positive");
  }
  return bits * kBoltzmannJPerK * temperature_kelvin * std::numbers::ln2;
}

inline double kt_ln2(double temperature_kelvin) { return landauer_cost(1.0, temperature_kelvin); }

// Running total of the heat a demon dissipates by erasing its register.
// Erasures are counted as integers and bits/joules derived as products, so
// merging per-worker ledgers is exact and independent of the thread count.
class ThermalLedger {
 public:
  ThermalLedger(double temperature_kelvin, double bits_per_erasure)
      : temperature_(temperature_kelvin), bits_per_erasure_(bits_per_erasure) {
    if (!(temperature_kelvin > 0.0)) {
      throw std::invalid_argument("ThermalLedger: temperature must be positive");
    }
    if (!(bits_per_erasure > 0.0)) {
      throw std::invalid_argument("ThermalLedger: bits per erasure must be positive");
    }
  }

  void charge_erasure() { ++erasures_; }

  void merge(const ThermalLedger& other) {
    if (other.temperature_ != temperature_ || other.bits_per_erasure_ != bits_per_erasure_) {
      throw std::invalid_argument("ThermalLedger: cannot merge ledgers with different parameters");
    }
    erasures_ += other.erasures_;
  }

  long long erasures() const { return erasures_; }
  double temperature() const { return temperature_; }
  double bits_per_erasure() const { return bits_per_erasure_; }
  double bits() const { return static_cast<double>(erasures_) * bits_per_erasure_; }
  // Joules accumulate per erasure, so the total equals the erasure count times
  // the per-erasure cost with no summation-order dependence.
  double joules() const {
    return static_cast<double>(erasures_) * landauer_cost(bits_per_erasure_, temperature_);
  }

 private:
  double temperature_;
  double bits_per_erasure_;
  long long erasures_ = 0;
};

// Per-run background heat in the monitored environment, modelled as an
// independent Gaussian.
struct EnvironmentModel {
  double per_run_background_mean = 0.0;
  double per_run_background_std = 1.0;

  void validate() const {
    if (!(per_run_background_std > 0.0) || !std::isfinite(per_run_background_std) ||
        !std::isfinite(per_run_background_mean)) {
      throw std::invalid_argument("environment model needs a finite positive background std");
    }
  }
};

struct DetectorConfig {
  double alpha = 0.05;       // significance of the one-sided test
  double beta_power = 0.95;  // target power for required_runs

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("detector alpha must lie in (0, 1)");
    }
    if (!(beta_power > 0.0 && beta_power < 1.0)) {
      throw std::invalid_argument("detector power must lie in (0, 1)");
    }
  }
};

// Standard normal quantile, Wichura's PPND16 rational approximations
// (accurate to ~1e-15 over (0, 1)).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile needs p in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-9) * r +
                1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Per-run observed heat: seeded background draw plus the demon's contribution.
// Run i draws from stream (seed, i), so the record is reproducible and can be
// generated with any number of threads.
inline std::vector<double> simulate_heat_record(long long n_runs,
                                                std::span<const double> demon_heat_per_run,
                                                const EnvironmentModel& env, std::uint64_t seed,
                                                int threads = 1) {
  env.validate();
  if (n_runs < 0) throw std::invalid_argument("simulate_heat_record: n_runs must be >= 0");
  if (static_cast<long long>(demon_heat_per_run.size()) != n_runs) {
    throw std::invalid_argument("simulate_heat_record: demon heat list length must equal n_runs");
  }
  std::vector<double> out(static_cast<std::size_t>(n_runs));
  parallel_chunks(n_runs, threads, [&](int, long long begin, long long end) {
    for (long long i = begin; i < end; ++i) {
      RandomStream rs(seed, static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] =
          env.per_run_background_mean +
          env.per_run_background_std * normal_quantile(rs.next_uniform_open()) +
          demon_heat_per_run[static_cast<std::size_t>(i)];
    }
  });
  return out;
}

struct DetectionResult {
  bool reject = false;
  double z_score = 0.0;
  double p_value = 1.0;
  long long n = 0;
};

// One-sided test of H0: mean == background mean against H1: mean > background,
// with the environment std treated as known.
inline DetectionResult detect_anomaly(std::span<const double> heat_record,
                                      const EnvironmentModel& env, const DetectorConfig& cfg) {
  env.validate();
  cfg.validate();
  const long long n = static_cast<long long>(heat_record.size());
  if (n < 2) throw std::invalid_argument("detect_anomaly needs a heat record of at least 2 runs");
  double sum = 0.0;
  for (double h : heat_record) sum += h;
  const double mean = sum / static_cast<double>(n);
  DetectionResult r;
  r.n = n;
  r.z_score = (mean - env.per_run_background_mean) * std::sqrt(static_cast<double>(n)) /
              env.per_run_background_std;
  r.p_value = 1.0 - normal_cdf(r.z_score);
  r.reject = r.p_value < cfg.alpha;
  return r;
}

// Smallest n at which the test reaches the target power against a constant
// per-run excess: ceil(((z_alpha + z_power) * std / excess)^2).
inline long long required_runs(double per_run_excess, const EnvironmentModel& env,
                               const DetectorConfig& cfg) {
  env.validate();
  cfg.validate();
  if (!(per_run_excess > 0.0)) {
    throw std::invalid_argument("required_runs: excess must be positive (an inactive demon is undetectable)");
  }
  const double z_alpha = normal_quantile(1.0 - cfg.alpha);
  const double z_power = normal_quantile(cfg.beta_power);
  const double root = (z_alpha + z_power) * env.per_run_background_std / per_run_excess;
  const double n = std::ceil(root * root);
  return std::max(1ll, static_cast<long long>(n));
}

}  // namespace qdemon
