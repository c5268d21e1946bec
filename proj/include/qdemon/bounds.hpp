#pragma once

// Brute-force oracles for the classical bounds that define "violation": the
// local-hidden-state bound on the steering parameter and the local
// deterministic bound on CHSH.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdemon/qlin.hpp"

namespace qdemon {

// Enumerating 2^m sign vectors beyond this many settings is refused.
inline constexpr int kMaxEnumeratedSettings = 24;

// C_m = max over sign vectors a of ||sum_k a_k n_k|| / m, together with the
// maximizing sign vector and the qubit state that attains it.
struct SteeringBound {
  double value = 0.0;
  std::vector<int> witness_signs;        // a_k in {+1, -1}
  std::array<double, 3> witness_bloch{};
  Qubit witness_state;
  long long enumerated_count = 0;
};

inline SteeringBound lhs_bound(std::span<const MeasurementSetting> settings) {
  const int m = static_cast<int>(settings.size());
  if (m < 1) throw std::invalid_argument("lhs_bound needs at least one setting");
  if (m > kMaxEnumeratedSettings) {
    throw std::invalid_argument("lhs_bound enumerates 2^m sign vectors and refuses m > " +
                                std::to_string(kMaxEnumeratedSettings) +
                                "; sample sign vectors instead");
  }
  for (const MeasurementSetting& s : settings) require_unit_bloch(s);

  SteeringBound best;
  best.enumerated_count = 1ll << m;
  std::vector<int> signs(static_cast<std::size_t>(m), +1);
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::array<double, 3> sum{0.0, 0.0, 0.0};
    for (int k = 0; k < m; ++k) {
      const double a = (mask >> k) & 1u ? -1.0 : 1.0;
      signs[static_cast<std::size_t>(k)] = a > 0 ? +1 : -1;
      for (int c = 0; c < 3; ++c) sum[static_cast<std::size_t>(c)] += a * settings[k].bloch[static_cast<std::size_t>(c)];
    }
    const double norm = bloch_norm(sum);
    const double val = norm / m;
    if (val > best.value) {
      best.value = val;
      best.witness_signs = signs;
      if (norm > 0.0) {
        for (int c = 0; c < 3; ++c) best.witness_bloch[static_cast<std::size_t>(c)] = sum[static_cast<std::size_t>(c)] / norm;
      } else {
        best.witness_bloch = {0.0, 0.0, 1.0};
      }
    }
  }
  best.witness_state = eigenstate(MeasurementSetting{best.witness_bloch, 0}, Outcome::plus);
  return best;
}

// Evaluates a steering witness the way the LHS cheat plays it: fixed state,
// deterministic declarations. Returns (1/m) sum_k a_k <n_k·σ>.
inline double evaluate_steering_witness(std::span<const MeasurementSetting> settings,
                                        std::span<const int> signs, const Qubit& state) {
  if (settings.size() != signs.size()) {
    throw std::invalid_argument("witness sign count must match setting count");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < settings.size(); ++k) {
    acc += signs[k] * expectation(state, pauli_observable(settings[k]));
  }
  return acc / static_cast<double>(settings.size());
}

// Best deterministic local response pair for the CHSH combination
// E(0,0) + E(1,0) + E(1,1) - E(0,1). The maximum over all 16 pairs is 2.
struct ChshBound {
  double value = 0.0;
  std::array<int, 2> alice_signs{+1, +1};
  std::array<int, 2> bob_signs{+1, +1};
  long long enumerated_count = 16;
};

inline double evaluate_chsh_responses(const std::array<int, 2>& a, const std::array<int, 2>& b) {
  return static_cast<double>(a[0] * b[0] + a[1] * b[0] + a[1] * b[1] - a[0] * b[1]);
}

inline ChshBound lhv_chsh_bound() {
  ChshBound best;
  best.value = -8.0;
  const int signs[2] = {+1, -1};
  for (int a0 : signs) {
    for (int a1 : signs) {
      for (int b0 : signs) {
        for (int b1 : signs) {
          const double s = evaluate_chsh_responses({a0, a1}, {b0, b1});
          if (s > best.value) {
            best.value = s;
            best.alice_signs = {a0, a1};
            best.bob_signs = {b0, b1};
          }
        }
      }
    }
  }
  return best;
}

// CHSH combination of the four quantum correlators for angle pairs in the x-z
// plane; the analytic target the honest Bell run converges to.
inline double quantum_value_chsh(const PairState& state, std::span<const double, 2> alice_angles,
                                 std::span<const double, 2> bob_angles) {
  require_normalized(state);
  std::array<std::array<double, 2>, 2> e{};
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      e[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = expectation_joint(
          state, setting_from_angle(alice_angles[static_cast<std::size_t>(x)], x),
          setting_from_angle(bob_angles[static_cast<std::size_t>(y)], y));
    }
  }
  return e[0][0] + e[1][0] + e[1][1] - e[0][1];
}

}  // namespace qdemon
