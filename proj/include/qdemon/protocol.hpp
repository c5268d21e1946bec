#pragma once

// Honest steering and Bell test execution with transcript recording, plus the
// estimators for the steering parameter S_n and the CHSH value. Runs are
// mutually independent given per-run random streams derived from
// (seed, run_index), so the run loops parallelize without changing output.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdemon/bounds.hpp"
#include "qdemon/common.hpp"
#include "qdemon/parallel.hpp"
#include "qdemon/qlin.hpp"
#include "qdemon/rng.hpp"

namespace qdemon {

// Whether Bob fixes the whole run list of settings up front or chooses per
// run. Statistically identical for honest parties; the two demon capture
// paths differ.
enum class SettingChoiceMode { pre_settled_list, per_run_quantum };

struct SteeringConfig {
  int m = 2;
  std::vector<double> setting_angles;  // radians, x-z plane
  long long n_runs = 1;
  SettingChoiceMode setting_choice_mode = SettingChoiceMode::per_run_quantum;

  void validate() const {
    if (m < 2) throw std::invalid_argument("steering config: m must be >= 2");
    if (static_cast<int>(setting_angles.size()) != m) {
      throw std::invalid_argument("steering config: m must equal the number of setting angles");
    }
    for (double a : setting_angles) {
      if (!std::isfinite(a)) throw std::invalid_argument("steering config: non-finite angle");
    }
    for (std::size_t i = 0; i < setting_angles.size(); ++i) {
      for (std::size_t j = i + 1; j < setting_angles.size(); ++j) {
        if (std::abs(setting_angles[i] - setting_angles[j]) < 1e-15) {
          throw std::invalid_argument("steering config: setting angles must be pairwise distinct");
        }
      }
    }
    if (n_runs < 1) throw std::invalid_argument("steering config: n_runs must be >= 1");
  }

  std::vector<MeasurementSetting> settings() const {
    std::vector<MeasurementSetting> out;
    out.reserve(setting_angles.size());
    for (int k = 0; k < m; ++k) {
      out.push_back(setting_from_angle(setting_angles[static_cast<std::size_t>(k)], k));
    }
    return out;
  }
};

struct BellConfig {
  std::array<double, 2> alice_angles{0.0, std::numbers::pi / 2};
  std::array<double, 2> bob_angles{std::numbers::pi / 4, 3 * std::numbers::pi / 4};
  long long n_runs = 1;

  void validate() const {
    for (double a : alice_angles) {
      if (!std::isfinite(a)) throw std::invalid_argument("bell config: non-finite Alice angle");
    }
    for (double a : bob_angles) {
      if (!std::isfinite(a)) throw std::invalid_argument("bell config: non-finite Bob angle");
    }
    if (n_runs < 1) throw std::invalid_argument("bell config: n_runs must be >= 1");
  }

  std::array<MeasurementSetting, 2> settings_a() const {
    return {setting_from_angle(alice_angles[0], 0), setting_from_angle(alice_angles[1], 1)};
  }
  std::array<MeasurementSetting, 2> settings_b() const {
    return {setting_from_angle(bob_angles[0], 0), setting_from_angle(bob_angles[1], 1)};
  }
};

struct RunRecord {
  long long run_index = 0;
  int setting_a = -1;    // Alice's setting index; -1 in steering transcripts
  int setting_b = 0;     // Bob's setting index
  int declared_a = +1;   // Alice's declared (steering) or measured (Bell) outcome
  int measured_b = +1;   // Bob's measured outcome
  bool demon_active = false;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct Transcript {
  std::vector<RunRecord> records;
  std::string config_summary;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<int> draw_setting_list(int m, long long n, std::uint64_t seed) {
  RandomStream rs(seed, kAuxStreamBase);
  std::vector<int> list(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    list[static_cast<std::size_t>(i)] = uniform_index(rs.next_uniform(), m);
  }
  return list;
}

}  // namespace detail

// Honest run: Bob announces setting k, Alice measures her half of |Φ+> along
// the same axis and declares the result, Bob measures his half.
inline Transcript run_steering_honest(const SteeringConfig& cfg, std::uint64_t seed,
                                      int threads = 1) {
  cfg.validate();
  const auto settings = cfg.settings();
  const PairState shared = bell_phi_plus();
  std::vector<JointProbs> jp;
  jp.reserve(settings.size());
  for (const MeasurementSetting& s : settings) {
    jp.push_back(joint_probabilities(shared, s, s));
  }
  const bool pre_settled = cfg.setting_choice_mode == SettingChoiceMode::pre_settled_list;
  const std::vector<int> list =
      pre_settled ? detail::draw_setting_list(cfg.m, cfg.n_runs, seed) : std::vector<int>{};

  Transcript t;
  t.seed = seed;
  t.config_summary = "steering_honest m=" + std::to_string(cfg.m) +
                     " n=" + std::to_string(cfg.n_runs);
  t.records.resize(static_cast<std::size_t>(cfg.n_runs));
  parallel_chunks(cfg.n_runs, threads, [&](int, long long begin, long long end) {
    for (long long i = begin; i < end; ++i) {
      RandomStream rs(seed, static_cast<std::uint64_t>(i));
      const int k = pre_settled ? list[static_cast<std::size_t>(i)]
                                : uniform_index(rs.next_uniform(), cfg.m);
      const auto [alice, bob] =
          sample_joint(jp[static_cast<std::size_t>(k)], rs.next_uniform(), rs.next_uniform());
      t.records[static_cast<std::size_t>(i)] = {i, -1, k, value(alice), value(bob), false};
    }
  });
  return t;
}

// Optimal no-demon cheat: Alice sends the fixed pure state maximizing the
// LHS value and declares the matching deterministic outcomes, so the
// transcript's expected S_n equals the classical bound C_m.
inline Transcript run_steering_lhs_baseline(const SteeringConfig& cfg, std::uint64_t seed,
                                            int threads = 1) {
  cfg.validate();
  const auto settings = cfg.settings();
  const SteeringBound bound = lhs_bound(settings);
  std::vector<double> p_plus(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) {
    p_plus[k] = plus_probability(bound.witness_state, settings[k]);
  }
  const bool pre_settled = cfg.setting_choice_mode == SettingChoiceMode::pre_settled_list;
  const std::vector<int> list =
      pre_settled ? detail::draw_setting_list(cfg.m, cfg.n_runs, seed) : std::vector<int>{};

  Transcript t;
  t.seed = seed;
  t.config_summary = "steering_lhs m=" + std::to_string(cfg.m) + " n=" + std::to_string(cfg.n_runs);
  t.records.resize(static_cast<std::size_t>(cfg.n_runs));
  parallel_chunks(cfg.n_runs, threads, [&](int, long long begin, long long end) {
    for (long long i = begin; i < end; ++i) {
      RandomStream rs(seed, static_cast<std::uint64_t>(i));
      const int k = pre_settled ? list[static_cast<std::size_t>(i)]
                                : uniform_index(rs.next_uniform(), cfg.m);
      const int measured = rs.next_uniform() < p_plus[static_cast<std::size_t>(k)] ? +1 : -1;
      const int declared = bound.witness_signs[static_cast<std::size_t>(k)];
      t.records[static_cast<std::size_t>(i)] = {i, -1, k, declared, measured, false};
    }
  });
  return t;
}

// Honest CHSH run on |Φ+>: independent uniform setting choices, joint Born
// measurement.
inline Transcript run_bell_honest(const BellConfig& cfg, std::uint64_t seed, int threads = 1) {
  cfg.validate();
  const auto sa = cfg.settings_a();
  const auto sb = cfg.settings_b();
  const PairState shared = bell_phi_plus();
  std::array<std::array<JointProbs, 2>, 2> jp;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      jp[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
          joint_probabilities(shared, sa[static_cast<std::size_t>(x)], sb[static_cast<std::size_t>(y)]);
    }
  }
  Transcript t;
  t.seed = seed;
  t.config_summary = "bell_honest n=" + std::to_string(cfg.n_runs);
  t.records.resize(static_cast<std::size_t>(cfg.n_runs));
  parallel_chunks(cfg.n_runs, threads, [&](int, long long begin, long long end) {
    for (long long i = begin; i < end; ++i) {
      RandomStream rs(seed, static_cast<std::uint64_t>(i));
      const int x = uniform_index(rs.next_uniform(), 2);
      const int y = uniform_index(rs.next_uniform(), 2);
      const auto [alice, bob] = sample_joint(jp[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)],
                                             rs.next_uniform(), rs.next_uniform());
      t.records[static_cast<std::size_t>(i)] = {i, x, y, value(alice), value(bob), false};
    }
  });
  return t;
}

struct SteeringEstimate {
  double s_n = 0.0;
  double std_err = 0.0;
  std::vector<double> per_setting_correlations;
};

// S_n = (1/n) sum_j declared_j * measured_j, std_err = sample std of the
// per-run product over sqrt(n). Settings never sampled report correlation 0.
inline SteeringEstimate steering_parameter(const Transcript& t, int m) {
  if (t.records.empty()) throw std::invalid_argument("steering_parameter: empty transcript");
  if (m < 1) throw std::invalid_argument("steering_parameter: m must be >= 1");
  std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
  std::vector<long long> counts(static_cast<std::size_t>(m), 0);
  double sum = 0.0;
  for (const RunRecord& r : t.records) {
    if (r.setting_b < 0 || r.setting_b >= m) {
      throw std::invalid_argument("steering_parameter: record has setting index " +
                                  std::to_string(r.setting_b) + " outside 0.." +
                                  std::to_string(m - 1));
    }
    const double product = static_cast<double>(r.declared_a * r.measured_b);
    sum += product;
    sums[static_cast<std::size_t>(r.setting_b)] += product;
    ++counts[static_cast<std::size_t>(r.setting_b)];
  }
  const double n = static_cast<double>(t.records.size());
  SteeringEstimate est;
  est.s_n = sum / n;
  // products are ±1, so sum of squares is n exactly
  const double var = t.records.size() > 1 ? std::max(0.0, (n - n * est.s_n * est.s_n) / (n - 1.0))
                                          : 0.0;
  est.std_err = std::sqrt(var / n);
  est.per_setting_correlations.resize(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < m; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) {
      est.per_setting_correlations[static_cast<std::size_t>(k)] =
          sums[static_cast<std::size_t>(k)] / static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
  }
  return est;
}

struct ChshEstimate {
  double s = 0.0;
  double std_err = 0.0;
  std::array<std::array<double, 2>, 2> cell_means{};
  std::array<std::array<long long, 2>, 2> cell_counts{};
};

// S = E(0,0) + E(1,0) + E(1,1) - E(0,1) from conditional sample means; the
// standard error combines the four cell errors in quadrature. A setting pair
// that never occurs is an error rather than an imputed value.
inline ChshEstimate chsh_value(const Transcript& t) {
  if (t.records.empty()) throw std::invalid_argument("chsh_value: empty transcript");
  std::array<std::array<double, 2>, 2> sums{};
  std::array<std::array<long long, 2>, 2> counts{};
  for (const RunRecord& r : t.records) {
    if (r.setting_a < 0 || r.setting_a > 1 || r.setting_b < 0 || r.setting_b > 1) {
      throw std::invalid_argument("chsh_value: record lacks a valid pair of setting indices");
    }
    sums[static_cast<std::size_t>(r.setting_a)][static_cast<std::size_t>(r.setting_b)] +=
        static_cast<double>(r.declared_a * r.measured_b);
    ++counts[static_cast<std::size_t>(r.setting_a)][static_cast<std::size_t>(r.setting_b)];
  }
  ChshEstimate est;
  double var_total = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const long long c = counts[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      if (c == 0) {
        throw insufficient_data("chsh_value: no runs with settings (" + std::to_string(x) + ", " +
                                std::to_string(y) + ")");
      }
      const double mean = sums[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] /
                          static_cast<double>(c);
      est.cell_means[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = mean;
      est.cell_counts[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = c;
      const double cn = static_cast<double>(c);
      const double var = c > 1 ? std::max(0.0, (cn - cn * mean * mean) / (cn - 1.0)) : 0.0;
      var_total += var / cn;
    }
  }
  est.s = est.cell_means[0][0] + est.cell_means[1][0] + est.cell_means[1][1] - est.cell_means[0][1];
  est.std_err = std::sqrt(var_total);
  return est;
}

inline double quantum_value_chsh(const PairState& state, const BellConfig& cfg) {
  cfg.validate();
  return quantum_value_chsh(state, std::span<const double, 2>(cfg.alice_angles),
                            std::span<const double, 2>(cfg.bob_angles));
}

}  // namespace qdemon
