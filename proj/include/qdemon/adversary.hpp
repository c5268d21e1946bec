#pragma once

// Maxwell-demon cheating strategies: capture of the trusted party's setting
// choice (pre-settled list or quantum generator), rotation of the carrier
// qubit into an eigenstate per a pre-agreed table, informed declarations,
// partial activation, and the two-demon Bell attack in its non-signaling and
// signaling variants. Every capture charges the thermal ledger when the
// demon's register is erased back to its standard state.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qdemon/common.hpp"
#include "qdemon/parallel.hpp"
#include "qdemon/protocol.hpp"
#include "qdemon/qlin.hpp"
#include "qdemon/rng.hpp"
#include "qdemon/thermo.hpp"

namespace qdemon {

// Register state 0 is the standard (erased) state; k+1 records setting k.
// Capacity is log2(m) bits: one setting record.
struct DemonMemory {
  int m = 2;
  int register_state = 0;

  double bits_capacity() const { return std::log2(static_cast<double>(m)); }
};

inline DemonMemory make_demon_memory(int m) {
  if (m < 2) throw std::invalid_argument("demon memory needs m >= 2 distinguishable settings");
  return DemonMemory{m, 0};
}

// Models entangling with the quantum setting generator followed by the
// trusted party's confirmation measurement: the register collapses to a
// uniform setting index, which is also the setting used this run.
inline int entangle_with_setting_source(int m, double u, DemonMemory& memory) {
  if (m < 2) throw std::invalid_argument("entangle_with_setting_source needs m >= 2");
  if (memory.m != m) {
    throw std::invalid_argument("demon memory was sized for m = " + std::to_string(memory.m));
  }
  if (memory.register_state != 0) {
    throw protocol_violation("demon captured a setting without erasing its previous record");
  }
  const int k = uniform_index(u, m);
  memory.register_state = k + 1;
  return k;
}

// The pre-settled variant: the run list already exists as classical data and
// the demon simply memorizes the current entry.
inline int capture_pre_settled(std::span<const int> settings_list, long long run_index,
                               DemonMemory& memory) {
  if (memory.register_state != 0) {
    throw protocol_violation("demon captured a setting without erasing its previous record");
  }
  if (run_index < 0 || run_index >= static_cast<long long>(settings_list.size())) {
    throw std::invalid_argument("capture_pre_settled: run index " + std::to_string(run_index) +
                                " outside the settled list of length " +
                                std::to_string(settings_list.size()));
  }
  const int k = settings_list[static_cast<std::size_t>(run_index)];
  if (k < 0 || k >= memory.m) {
    throw std::invalid_argument("capture_pre_settled: settled list entry outside 0..m-1");
  }
  memory.register_state = k + 1;
  return k;
}

// Records a setting index the demon observed directly (the Bell wings, where
// the choice is announced locally).
inline void capture_observed_setting(int k, DemonMemory& memory) {
  if (memory.register_state != 0) {
    throw protocol_violation("demon captured a setting without erasing its previous record");
  }
  if (k < 0 || k >= memory.m) {
    throw std::invalid_argument("capture_observed_setting: index outside 0..m-1");
  }
  memory.register_state = k + 1;
}

struct CheatEntry {
  int target_sign = +1;   // eigenstate sign the qubit is rotated into
  int declaration = +1;   // what Alice is told to declare
};

// Keyed by setting index; in the signaling Bell variant the key is the pair
// index 2*x + y instead.
struct CheatTable {
  std::vector<CheatEntry> entries;

  void validate(int expected_size) const {
    if (static_cast<int>(entries.size()) != expected_size) {
      throw std::invalid_argument("cheat table has " + std::to_string(entries.size()) +
                                  " entries, expected " + std::to_string(expected_size));
    }
    for (const CheatEntry& e : entries) {
      outcome_from_sign(e.target_sign);
      outcome_from_sign(e.declaration);
    }
  }
};

// Every assisted run contributes product +1 to S_n.
inline CheatTable correlated_steering_table(int m) {
  CheatTable t;
  t.entries.assign(static_cast<std::size_t>(m), CheatEntry{+1, +1});
  return t;
}

inline std::pair<Qubit, Outcome> demon_transform(int k, const CheatTable& table,
                                                 std::span<const MeasurementSetting> settings) {
  if (k < 0 || k >= static_cast<int>(settings.size())) {
    throw std::invalid_argument("demon_transform: setting index out of range");
  }
  if (k >= static_cast<int>(table.entries.size())) {
    throw std::invalid_argument("demon_transform: cheat table is not defined at index " +
                                std::to_string(k));
  }
  const CheatEntry& e = table.entries[static_cast<std::size_t>(k)];
  return {eigenstate(settings[static_cast<std::size_t>(k)], outcome_from_sign(e.target_sign)),
          outcome_from_sign(e.declaration)};
}

// Erasure back to the standard state; charges log2(m) bits at the ledger's
// temperature.
inline void erase(DemonMemory& memory, ThermalLedger& ledger) {
  if (memory.register_state == 0) {
    throw protocol_violation("demon erased an already-standard memory");
  }
  if (ledger.bits_per_erasure() != memory.bits_capacity()) {
    throw std::invalid_argument("ledger bits-per-erasure does not match the demon register size");
  }
  memory.register_state = 0;
  ledger.charge_erasure();
}

enum class BellMode { non_signaling, signaling };
enum class InactiveAliceBehavior { uniform_random, fixed_plus };

struct DemonPolicy {
  double activation_probability = 1.0;
  BellMode bell_mode = BellMode::non_signaling;
  InactiveAliceBehavior inactive_alice_behavior = InactiveAliceBehavior::uniform_random;

  void validate() const {
    if (!(activation_probability >= 0.0 && activation_probability <= 1.0)) {
      throw std::invalid_argument("demon activation probability must lie in [0, 1]");
    }
  }
};

// The fixed pure state the cheating source emits on runs the demon sits out.
// The y-axis eigenstate is uncorrelated with every x-z plane setting, so idle
// runs carry no signal.
inline Qubit default_idle_source() {
  return eigenstate(MeasurementSetting{{0.0, 1.0, 0.0}, 0}, Outcome::plus);
}

struct DemonSteeringResult {
  Transcript transcript;
  ThermalLedger ledger;
};

inline DemonSteeringResult run_steering_demon(const SteeringConfig& cfg, const DemonPolicy& policy,
                                              const CheatTable& table, double temperature,
                                              std::uint64_t seed, int threads = 1,
                                              const Qubit& idle_source = default_idle_source()) {
  cfg.validate();
  policy.validate();
  table.validate(cfg.m);
  require_normalized(idle_source);
  const auto settings = cfg.settings();
  const double p = policy.activation_probability;
  const bool pre_settled = cfg.setting_choice_mode == SettingChoiceMode::pre_settled_list;
  const std::vector<int> list =
      pre_settled ? detail::draw_setting_list(cfg.m, cfg.n_runs, seed) : std::vector<int>{};

  // Assisted runs hand Bob an eigenstate; idle runs hand him the fixed source.
  std::vector<Qubit> assisted_state(settings.size());
  std::vector<int> assisted_declare(settings.size());
  std::vector<double> assisted_p_plus(settings.size());
  std::vector<double> idle_p_plus(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto [qubit, declared] = demon_transform(static_cast<int>(k), table, settings);
    assisted_state[k] = qubit;
    assisted_declare[k] = value(declared);
    assisted_p_plus[k] = plus_probability(qubit, settings[k]);
    idle_p_plus[k] = plus_probability(idle_source, settings[k]);
  }

  Transcript t;
  t.seed = seed;
  t.config_summary = "steering_demon m=" + std::to_string(cfg.m) +
                     " n=" + std::to_string(cfg.n_runs) + " p=" + std::to_string(p);
  t.records.resize(static_cast<std::size_t>(cfg.n_runs));

  const int workers = static_cast<int>(std::min<long long>(std::max(threads, 1), cfg.n_runs));
  std::vector<ThermalLedger> worker_ledgers(static_cast<std::size_t>(std::max(workers, 1)),
                                            ThermalLedger(temperature, make_demon_memory(cfg.m).bits_capacity()));
  parallel_chunks(cfg.n_runs, threads, [&](int worker, long long begin, long long end) {
    DemonMemory memory = make_demon_memory(cfg.m);
    ThermalLedger& ledger = worker_ledgers[static_cast<std::size_t>(worker)];
    for (long long i = begin; i < end; ++i) {
      RandomStream rs(seed, static_cast<std::uint64_t>(i));
      const bool active = rs.next_uniform() < p;
      int k;
      if (pre_settled) {
        k = active ? capture_pre_settled(list, i, memory) : list[static_cast<std::size_t>(i)];
      } else {
        const double u = rs.next_uniform();
        k = active ? entangle_with_setting_source(cfg.m, u, memory) : uniform_index(u, cfg.m);
      }
      int declared, measured;
      if (active) {
        measured = rs.next_uniform() < assisted_p_plus[static_cast<std::size_t>(k)] ? +1 : -1;
        declared = assisted_declare[static_cast<std::size_t>(k)];
        erase(memory, ledger);
      } else {
        measured = rs.next_uniform() < idle_p_plus[static_cast<std::size_t>(k)] ? +1 : -1;
        declared = policy.inactive_alice_behavior == InactiveAliceBehavior::uniform_random
                       ? (rs.next_uniform() < 0.5 ? +1 : -1)
                       : +1;
      }
      t.records[static_cast<std::size_t>(i)] = {i, -1, k, declared, measured, active};
    }
    if (memory.register_state != 0) {
      throw protocol_violation("demon memory left in a non-standard state");
    }
  });

  DemonSteeringResult result{std::move(t),
                             ThermalLedger(temperature, make_demon_memory(cfg.m).bits_capacity())};
  for (const ThermalLedger& l : worker_ledgers) result.ledger.merge(l);
  return result;
}

struct DemonBellResult {
  Transcript transcript;
  ThermalLedger ledger;
};

// Two demons, one per wing. In the non-signaling variant each sees only its
// local setting index and its outcome is a deterministic function of it; in
// the signaling variant both see the pair (x, y) and the tables are keyed by
// 2*x + y. Each demon's register still holds one two-valued setting record,
// so every assisted run charges 2 * log2(2) bits total.
inline DemonBellResult run_bell_demon(const BellConfig& cfg, const DemonPolicy& policy,
                                      const CheatTable& table_a, const CheatTable& table_b,
                                      double temperature, std::uint64_t seed, int threads = 1,
                                      const Qubit& idle_source = default_idle_source()) {
  cfg.validate();
  policy.validate();
  require_normalized(idle_source);
  const bool signaling = policy.bell_mode == BellMode::signaling;
  const int table_size = signaling ? 4 : 2;
  table_a.validate(table_size);
  table_b.validate(table_size);
  const auto sa = cfg.settings_a();
  const auto sb = cfg.settings_b();

  std::array<double, 2> idle_p_a{}, idle_p_b{};
  for (int x = 0; x < 2; ++x) idle_p_a[static_cast<std::size_t>(x)] = plus_probability(idle_source, sa[static_cast<std::size_t>(x)]);
  for (int y = 0; y < 2; ++y) idle_p_b[static_cast<std::size_t>(y)] = plus_probability(idle_source, sb[static_cast<std::size_t>(y)]);

  // Assisted outcome probabilities per (wing setting, table key).
  auto assisted_p = [](const MeasurementSetting& s, const CheatEntry& e) {
    return plus_probability(eigenstate(s, outcome_from_sign(e.target_sign)), s);
  };

  Transcript t;
  t.seed = seed;
  t.config_summary = std::string("bell_demon_") + (signaling ? "signaling" : "nonsignaling") +
                     " n=" + std::to_string(cfg.n_runs) +
                     " p=" + std::to_string(policy.activation_probability);
  t.records.resize(static_cast<std::size_t>(cfg.n_runs));

  const int workers = static_cast<int>(std::min<long long>(std::max(threads, 1), cfg.n_runs));
  std::vector<ThermalLedger> worker_ledgers(static_cast<std::size_t>(std::max(workers, 1)),
                                            ThermalLedger(temperature, 1.0));
  const double p = policy.activation_probability;
  parallel_chunks(cfg.n_runs, threads, [&](int worker, long long begin, long long end) {
    DemonMemory memory_a = make_demon_memory(2);
    DemonMemory memory_b = make_demon_memory(2);
    ThermalLedger& ledger = worker_ledgers[static_cast<std::size_t>(worker)];
    for (long long i = begin; i < end; ++i) {
      RandomStream rs(seed, static_cast<std::uint64_t>(i));
      const bool active = rs.next_uniform() < p;
      const int x = uniform_index(rs.next_uniform(), 2);
      const int y = uniform_index(rs.next_uniform(), 2);
      int out_a, out_b;
      if (active) {
        // Each register records the local setting choice.
        capture_observed_setting(x, memory_a);
        capture_observed_setting(y, memory_b);
        const int key_a = signaling ? 2 * x + y : x;
        const int key_b = signaling ? 2 * x + y : y;
        const double pa = assisted_p(sa[static_cast<std::size_t>(x)],
                                     table_a.entries[static_cast<std::size_t>(key_a)]);
        const double pb = assisted_p(sb[static_cast<std::size_t>(y)],
                                     table_b.entries[static_cast<std::size_t>(key_b)]);
        out_a = rs.next_uniform() < pa ? +1 : -1;
        out_b = rs.next_uniform() < pb ? +1 : -1;
        erase(memory_a, ledger);
        erase(memory_b, ledger);
      } else {
        out_a = rs.next_uniform() < idle_p_a[static_cast<std::size_t>(x)] ? +1 : -1;
        out_b = rs.next_uniform() < idle_p_b[static_cast<std::size_t>(y)] ? +1 : -1;
      }
      t.records[static_cast<std::size_t>(i)] = {i, x, y, out_a, out_b, active};
    }
    if (memory_a.register_state != 0 || memory_b.register_state != 0) {
      throw protocol_violation("demon memory left in a non-standard state");
    }
  });

  DemonBellResult result{std::move(t), ThermalLedger(temperature, 1.0)};
  for (const ThermalLedger& l : worker_ledgers) result.ledger.merge(l);
  return result;
}

// Signaling tables attaining the algebraic maximum CHSH = 4: products are +1
// on (0,0), (1,0), (1,1) and -1 on (0,1).
inline std::pair<CheatTable, CheatTable> signaling_max_tables() {
  CheatTable a, b;
  a.entries.assign(4, CheatEntry{+1, +1});
  b.entries.assign(4, CheatEntry{+1, +1});
  b.entries[1] = CheatEntry{-1, -1};  // pair key 2*0+1 = (x=0, y=1)
  return {a, b};
}

struct NonsignalingSearchResult {
  CheatTable table_a;
  CheatTable table_b;
  double chsh = 0.0;
  long long enumerated_count = 16;
};

// Exhaustive search over the 16 deterministic local table pairs. Outcomes of
// the literal strategy depend only on the local setting, so the achievable
// maximum is the local bound 2 whatever the angles are.
inline NonsignalingSearchResult best_nonsignaling_tables(
    std::span<const MeasurementSetting> settings_a, std::span<const MeasurementSetting> settings_b) {
  if (settings_a.size() != 2 || settings_b.size() != 2) {
    throw std::invalid_argument("best_nonsignaling_tables expects two settings per wing");
  }
  for (const MeasurementSetting& s : settings_a) require_unit_bloch(s);
  for (const MeasurementSetting& s : settings_b) require_unit_bloch(s);
  NonsignalingSearchResult best;
  best.chsh = -8.0;
  const int signs[2] = {+1, -1};
  for (int a0 : signs) {
    for (int a1 : signs) {
      for (int b0 : signs) {
        for (int b1 : signs) {
          const double s = evaluate_chsh_responses({a0, a1}, {b0, b1});
          if (s > best.chsh) {
            best.chsh = s;
            best.table_a.entries = {CheatEntry{a0, a0}, CheatEntry{a1, a1}};
            best.table_b.entries = {CheatEntry{b0, b0}, CheatEntry{b1, b1}};
          }
        }
      }
    }
  }
  return best;
}

}  // namespace qdemon
