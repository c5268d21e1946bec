#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "qdemon/adversary.hpp"
#include "qdemon/rng.hpp"

using namespace qdemon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SteeringConfig steering_config(std::initializer_list<double> degrees, long long n,
                               SettingChoiceMode mode = SettingChoiceMode::per_run_quantum) {
  SteeringConfig cfg;
  cfg.setting_angles.clear();
  for (double d : degrees) cfg.setting_angles.push_back(d * std::numbers::pi / 180.0);
  cfg.m = static_cast<int>(cfg.setting_angles.size());
  cfg.n_runs = n;
  cfg.setting_choice_mode = mode;
  return cfg;
}

}  // namespace

TEST_CASE("entangle_with_setting_source collapses to a uniform register", "[adversary][statistical]") {
  RandomStream rs(901, 0);
  ThermalLedger ledger(300.0, 1.0);
  DemonMemory memory = make_demon_memory(2);
  long long zeros = 0;
  const long long n = 1000000;
  for (long long i = 0; i < n; ++i) {
    const int k = entangle_with_setting_source(2, rs.next_uniform(), memory);
    CHECK(memory.register_state == k + 1);
    if (k == 0) ++zeros;
    erase(memory, ledger);
  }
  CHECK_THAT(static_cast<double>(zeros) / static_cast<double>(n), WithinAbs(0.5, 0.002));
  CHECK(ledger.erasures() == n);
}

TEST_CASE("entangle_with_setting_source enforces its preconditions", "[adversary]") {
  DemonMemory memory = make_demon_memory(2);
  CHECK_THROWS_AS(entangle_with_setting_source(1, 0.3, memory), std::invalid_argument);
  CHECK_THROWS_AS(make_demon_memory(1), std::invalid_argument);
  CHECK_THROWS_AS(entangle_with_setting_source(3, 0.3, memory), std::invalid_argument);

  entangle_with_setting_source(2, 0.3, memory);
  CHECK_THROWS_AS(entangle_with_setting_source(2, 0.7, memory), protocol_violation);
}

TEST_CASE("capture_pre_settled reads the settled list", "[adversary]") {
  const std::vector<int> list{0, 1, 1, 0};
  DemonMemory memory = make_demon_memory(2);
  CHECK(capture_pre_settled(list, 2, memory) == 1);
  CHECK(memory.register_state == 2);
  CHECK_THROWS_AS(capture_pre_settled(list, 3, memory), protocol_violation);
  memory.register_state = 0;
  CHECK_THROWS_AS(capture_pre_settled(list, 4, memory), std::invalid_argument);
  CHECK_THROWS_AS(capture_pre_settled(list, -1, memory), std::invalid_argument);

  const std::vector<int> single{0};
  DemonMemory memory1 = make_demon_memory(2);
  CHECK(capture_pre_settled(single, 0, memory1) == 0);
}

TEST_CASE("demon_transform hands over eigenstates and declarations", "[adversary]") {
  const auto settings = steering_config({0.0, 90.0}, 1).settings();
  CheatTable table;
  table.entries = {CheatEntry{+1, +1}, CheatEntry{-1, -1}};

  const auto [qubit0, declared0] = demon_transform(0, table, settings);
  CHECK_THAT(std::abs(qubit0.amps[0] - cplx(1.0, 0.0)), WithinAbs(0.0, 1e-12));
  CHECK(declared0 == Outcome::plus);
  // Bob's measurement of the handed-over eigenstate is certain
  CHECK(born_measure_single(qubit0, settings[0], 1.0 - 0x1.0p-53).first == Outcome::plus);

  const auto [qubit1, declared1] = demon_transform(1, table, settings);
  const double r = 1.0 / std::numbers::sqrt2;
  CHECK_THAT(std::abs(qubit1.amps[0] - cplx(r, 0.0)), WithinAbs(0.0, 1e-12));
  CHECK_THAT(std::abs(qubit1.amps[1] + cplx(r, 0.0)), WithinAbs(0.0, 1e-12));
  CHECK(declared1 == Outcome::minus);
  CHECK(born_measure_single(qubit1, settings[1], 1.0 - 0x1.0p-53).first == Outcome::minus);

  CHECK_THROWS_AS(demon_transform(2, table, settings), std::invalid_argument);
  CheatTable bad;
  bad.entries = {CheatEntry{+2, +1}};
  CHECK_THROWS_AS(bad.validate(1), std::invalid_argument);
}

TEST_CASE("erase charges the ledger per register size", "[adversary]") {
  ThermalLedger ledger2(300.0, make_demon_memory(2).bits_capacity());
  DemonMemory memory2 = make_demon_memory(2);
  entangle_with_setting_source(2, 0.9, memory2);
  erase(memory2, ledger2);
  CHECK(memory2.register_state == 0);
  CHECK_THAT(ledger2.joules(), WithinRel(2.8709788850787239e-21, 1e-12));
  CHECK_THROWS_AS(erase(memory2, ledger2), protocol_violation);

  ThermalLedger ledger4(300.0, make_demon_memory(4).bits_capacity());
  DemonMemory memory4 = make_demon_memory(4);
  entangle_with_setting_source(4, 0.9, memory4);
  erase(memory4, ledger4);
  CHECK(ledger4.bits() == 2.0);
  CHECK_THAT(ledger4.joules(), WithinRel(5.741957770157448e-21, 1e-12));

  // a ledger sized for a different register is rejected
  DemonMemory other = make_demon_memory(4);
  entangle_with_setting_source(4, 0.1, other);
  CHECK_THROWS_AS(erase(other, ledger2), std::invalid_argument);
}

TEST_CASE("fully active steering demon fakes S_n = 1 and pays n erasures", "[adversary]") {
  for (SettingChoiceMode mode :
       {SettingChoiceMode::per_run_quantum, SettingChoiceMode::pre_settled_list}) {
    const SteeringConfig cfg = steering_config({0.0, 90.0}, 10000, mode);
    DemonPolicy policy;  // p = 1
    const auto result =
        run_steering_demon(cfg, policy, correlated_steering_table(cfg.m), 300.0, 4242);
    for (const RunRecord& r : result.transcript.records) {
      REQUIRE(r.declared_a * r.measured_b == 1);
      REQUIRE(r.demon_active);
    }
    const SteeringEstimate est = steering_parameter(result.transcript, cfg.m);
    CHECK(est.s_n == 1.0);
    CHECK(result.ledger.erasures() == cfg.n_runs);
    CHECK_THAT(result.ledger.joules(),
               WithinRel(landauer_cost(static_cast<double>(cfg.n_runs), 300.0), 1e-12));
  }
}

TEST_CASE("inactive demon leaves no signal and no heat", "[adversary][statistical]") {
  SteeringConfig cfg = steering_config({0.0, 90.0}, 1000000);
  DemonPolicy policy;
  policy.activation_probability = 0.0;
  const auto result =
      run_steering_demon(cfg, policy, correlated_steering_table(cfg.m), 300.0, 808);
  const SteeringEstimate est = steering_parameter(result.transcript, cfg.m);
  CHECK_THAT(est.s_n, WithinAbs(0.0, 4.0 * est.std_err));
  CHECK(est.std_err < 0.0011);
  CHECK(result.ledger.erasures() == 0);
  for (const RunRecord& r : result.transcript.records) {
    REQUIRE_FALSE(r.demon_active);
  }
}

TEST_CASE("fixed_plus idle declarations still decorrelate from the y-axis source", "[adversary][statistical]") {
  SteeringConfig cfg = steering_config({0.0, 90.0}, 200000);
  DemonPolicy policy;
  policy.activation_probability = 0.0;
  policy.inactive_alice_behavior = InactiveAliceBehavior::fixed_plus;
  const auto result =
      run_steering_demon(cfg, policy, correlated_steering_table(cfg.m), 300.0, 809);
  for (const RunRecord& r : result.transcript.records) {
    REQUIRE(r.declared_a == +1);
  }
  const SteeringEstimate est = steering_parameter(result.transcript, cfg.m);
  CHECK_THAT(est.s_n, WithinAbs(0.0, 4.0 * est.std_err));
}

TEST_CASE("partial activation mixes the two strategies linearly", "[adversary][statistical]") {
  const double temperature = 300.0;
  for (double p : {0.25, 0.5, 0.75}) {
    SteeringConfig cfg = steering_config({0.0, 90.0}, 1000000);
    DemonPolicy policy;
    policy.activation_probability = p;
    const auto result = run_steering_demon(cfg, policy, correlated_steering_table(cfg.m),
                                           temperature, 7000 + static_cast<std::uint64_t>(p * 100));
    const SteeringEstimate est = steering_parameter(result.transcript, cfg.m);
    CHECK_THAT(est.s_n, WithinAbs(p, 4.0 * est.std_err));

    long long active = 0;
    for (const RunRecord& r : result.transcript.records) {
      if (r.demon_active) ++active;
    }
    CHECK(result.ledger.erasures() == active);  // ledger exactness
    const double sigma = std::sqrt(static_cast<double>(cfg.n_runs) * p * (1.0 - p));
    CHECK_THAT(static_cast<double>(active),
               WithinAbs(p * static_cast<double>(cfg.n_runs), 4.0 * sigma));
    CHECK_THAT(result.ledger.joules(),
               WithinRel(static_cast<double>(active) * kt_ln2(temperature), 1e-12));
  }
}

TEST_CASE("demon runs are reproducible and thread-invariant", "[adversary]") {
  SteeringConfig cfg = steering_config({0.0, 90.0, 30.0}, 20000);
  DemonPolicy policy;
  policy.activation_probability = 0.6;
  const CheatTable table = correlated_steering_table(cfg.m);
  const auto a = run_steering_demon(cfg, policy, table, 300.0, 2, 1);
  const auto b = run_steering_demon(cfg, policy, table, 300.0, 2, 8);
  CHECK(a.transcript.records == b.transcript.records);
  CHECK(a.ledger.erasures() == b.ledger.erasures());
  CHECK(a.ledger.joules() == b.ledger.joules());

  BellConfig bell;
  bell.n_runs = 20000;
  DemonPolicy bp;
  bp.activation_probability = 0.4;
  const auto [ta, tb] = signaling_max_tables();
  bp.bell_mode = BellMode::signaling;
  const auto ra = run_bell_demon(bell, bp, ta, tb, 300.0, 3, 1);
  const auto rb = run_bell_demon(bell, bp, ta, tb, 300.0, 3, 6);
  CHECK(ra.transcript.records == rb.transcript.records);
  CHECK(ra.ledger.erasures() == rb.ledger.erasures());
}

TEST_CASE("non-signaling Bell demons cap at the local bound", "[adversary]") {
  BellConfig cfg;
  cfg.n_runs = 1000000;
  const auto search = best_nonsignaling_tables(cfg.settings_a(), cfg.settings_b());
  CHECK(search.chsh == 2.0);
  CHECK(search.enumerated_count == 16);

  DemonPolicy policy;  // non_signaling, p = 1
  const auto result =
      run_bell_demon(cfg, policy, search.table_a, search.table_b, 300.0, 12);
  const ChshEstimate est = chsh_value(result.transcript);
  CHECK(est.s == 2.0);
  CHECK(est.std_err == 0.0);
  CHECK(result.ledger.erasures() == 2 * cfg.n_runs);

  // partial activation dilutes towards the uncorrelated idle source
  DemonPolicy half;
  half.activation_probability = 0.5;
  const auto diluted =
      run_bell_demon(cfg, half, search.table_a, search.table_b, 300.0, 13);
  const ChshEstimate diluted_est = chsh_value(diluted.transcript);
  CHECK(diluted_est.s <= 2.0 + 4.0 * diluted_est.std_err);
  CHECK_THAT(diluted_est.s, WithinAbs(1.0, 4.0 * diluted_est.std_err));
}

TEST_CASE("best non-signaling tables stay at 2 for arbitrary angles", "[adversary]") {
  RandomStream rs(77, 0);
  for (int rep = 0; rep < 10; ++rep) {
    BellConfig cfg;
    cfg.alice_angles = {rs.next_uniform() * 6.28, rs.next_uniform() * 6.28};
    cfg.bob_angles = {rs.next_uniform() * 6.28, rs.next_uniform() * 6.28};
    CHECK(best_nonsignaling_tables(cfg.settings_a(), cfg.settings_b()).chsh == 2.0);
  }
  CheatTable all_plus;
  all_plus.entries = {CheatEntry{+1, +1}, CheatEntry{+1, +1}};
  CHECK(evaluate_chsh_responses({+1, +1}, {+1, +1}) == 2.0);
}

TEST_CASE("signaling Bell demons reach the algebraic maximum", "[adversary]") {
  BellConfig cfg;
  cfg.n_runs = 10000;
  DemonPolicy policy;
  policy.bell_mode = BellMode::signaling;
  const auto [ta, tb] = signaling_max_tables();
  const auto result = run_bell_demon(cfg, policy, ta, tb, 300.0, 21);
  const ChshEstimate est = chsh_value(result.transcript);
  CHECK(est.s == 4.0);
  CHECK(est.std_err == 0.0);
  CHECK(result.ledger.erasures() == 2 * cfg.n_runs);
  CHECK_THAT(result.ledger.joules(),
             WithinRel(landauer_cost(2.0 * static_cast<double>(cfg.n_runs), 300.0), 1e-12));
}

TEST_CASE("bell demon table sizes must match the mode", "[adversary]") {
  BellConfig cfg;
  cfg.n_runs = 10;
  DemonPolicy policy;  // non_signaling expects 2-entry tables
  const auto [ta, tb] = signaling_max_tables();
  CHECK_THROWS_AS(run_bell_demon(cfg, policy, ta, tb, 300.0, 1), std::invalid_argument);

  policy.bell_mode = BellMode::signaling;
  const auto search = best_nonsignaling_tables(cfg.settings_a(), cfg.settings_b());
  CHECK_THROWS_AS(run_bell_demon(cfg, policy, search.table_a, search.table_b, 300.0, 1),
                  std::invalid_argument);

  DemonPolicy bad;
  bad.activation_probability = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("observed-setting capture enforces hygiene", "[adversary]") {
  DemonMemory memory = make_demon_memory(2);
  capture_observed_setting(1, memory);
  CHECK(memory.register_state == 2);
  CHECK_THROWS_AS(capture_observed_setting(0, memory), protocol_violation);
  ThermalLedger ledger(300.0, 1.0);
  erase(memory, ledger);
  CHECK_THROWS_AS(capture_observed_setting(2, memory), std::invalid_argument);
}
