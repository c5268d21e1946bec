#pragma once

// Experiment orchestration: spec validation, strict JSON config loading,
// end-to-end scenario execution with file outputs, and the activation sweep
// linking dissipated heat to inequality violation. All file I/O lives here;
// the compute modules never touch files.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qdemon/adversary.hpp"
#include "qdemon/bounds.hpp"
#include "qdemon/common.hpp"
#include "qdemon/io.hpp"
#include "qdemon/protocol.hpp"
#include "qdemon/qlin.hpp"
#include "qdemon/rng.hpp"
#include "qdemon/thermo.hpp"

namespace qdemon {

using ordered_json = nlohmann::ordered_json;

enum class Scenario {
  steering_honest,
  steering_lhs,
  steering_demon,
  bell_honest,
  bell_demon_nonsignaling,
  bell_demon_signaling,
};

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::steering_honest: return "steering_honest";
    case Scenario::steering_lhs: return "steering_lhs";
    case Scenario::steering_demon: return "steering_demon";
    case Scenario::bell_honest: return "bell_honest";
    case Scenario::bell_demon_nonsignaling: return "bell_demon_nonsignaling";
    case Scenario::bell_demon_signaling: return "bell_demon_signaling";
  }
  return "unknown";
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "steering_honest") return Scenario::steering_honest;
  if (s == "steering_lhs") return Scenario::steering_lhs;
  if (s == "steering_demon") return Scenario::steering_demon;
  if (s == "bell_honest") return Scenario::bell_honest;
  if (s == "bell_demon_nonsignaling") return Scenario::bell_demon_nonsignaling;
  if (s == "bell_demon_signaling") return Scenario::bell_demon_signaling;
  throw validation_error("unknown scenario '" + s + "'");
}

inline bool is_steering(Scenario s) {
  return s == Scenario::steering_honest || s == Scenario::steering_lhs ||
         s == Scenario::steering_demon;
}

inline bool is_demon(Scenario s) {
  return s == Scenario::steering_demon || s == Scenario::bell_demon_nonsignaling ||
         s == Scenario::bell_demon_signaling;
}

enum class OutputFormat { csv, json };

inline OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw validation_error("unknown output format '" + s + "' (expected csv or json)");
}

struct SweepParams {
  std::vector<double> p_values;
  int repetitions = 1;
};

// Seed splitting (documented in the README): child seeds are derived from the
// master seed with fixed purpose tags, and sweep repetition (point i, rep r)
// uses derive_seed(derive_seed(master, kSeedSweepBase + i), r).
inline constexpr std::uint64_t kSeedPurposeRuns = 1;
inline constexpr std::uint64_t kSeedPurposeHeat = 2;
inline constexpr std::uint64_t kSeedSweepBase = 100;

struct ExperimentSpec {
  Scenario scenario = Scenario::steering_honest;
  std::uint64_t seed = 1;
  double temperature = 300.0;  // kelvin
  std::optional<SteeringConfig> steering;
  std::optional<BellConfig> bell;
  DemonPolicy policy;
  std::optional<CheatTable> steering_table;  // default: correlated table
  std::optional<CheatTable> bell_table_a;    // default: per bell mode
  std::optional<CheatTable> bell_table_b;
  std::array<double, 3> idle_source_bloch{0.0, 1.0, 0.0};
  std::optional<EnvironmentModel> environment;  // default: mean 0, std = kT ln2
  DetectorConfig detector;
  std::optional<SweepParams> sweep;
  std::filesystem::path out_dir = "out";
  OutputFormat format = OutputFormat::csv;
  int threads = 1;

  EnvironmentModel effective_environment() const {
    if (environment) return *environment;
    return EnvironmentModel{0.0, kt_ln2(temperature)};
  }

  Qubit idle_source() const {
    return eigenstate(MeasurementSetting{idle_source_bloch, 0}, Outcome::plus);
  }

  CheatTable effective_steering_table() const {
    if (steering_table) return *steering_table;
    return correlated_steering_table(steering ? steering->m : 2);
  }

  std::pair<CheatTable, CheatTable> effective_bell_tables() const {
    if (bell_table_a != std::nullopt || bell_table_b != std::nullopt) {
      if (!bell_table_a || !bell_table_b) {
        throw validation_error("bell tables must be given for both wings or neither");
      }
      return {*bell_table_a, *bell_table_b};
    }
    if (scenario == Scenario::bell_demon_signaling) return signaling_max_tables();
    BellConfig cfg = bell.value_or(BellConfig{});
    const auto search = best_nonsignaling_tables(cfg.settings_a(), cfg.settings_b());
    return {search.table_a, search.table_b};
  }

  // Collects every offending field before failing.
  void validate() const {
    std::vector<std::string> problems;
    auto check = [&problems](const auto& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        problems.emplace_back(e.what());
      }
    };
    if (is_steering(scenario)) {
      if (!steering) {
        problems.emplace_back("scenario " + to_string(scenario) + " needs a steering config");
      } else {
        check([&] { steering->validate(); });
      }
    } else {
      if (!bell) {
        problems.emplace_back("scenario " + to_string(scenario) + " needs a bell config");
      } else {
        check([&] { bell->validate(); });
      }
    }
    check([&] { policy.validate(); });
    if (scenario == Scenario::bell_demon_nonsignaling && policy.bell_mode != BellMode::non_signaling) {
      problems.emplace_back("scenario bell_demon_nonsignaling requires bell_mode non_signaling");
    }
    if (scenario == Scenario::bell_demon_signaling && policy.bell_mode != BellMode::signaling) {
      problems.emplace_back("scenario bell_demon_signaling requires bell_mode signaling");
    }
    if (!(temperature > 0.0)) problems.emplace_back("temperature_K must be positive");
    check([&] { effective_environment().validate(); });
    check([&] { detector.validate(); });
    check([&] {
      if (std::abs(bloch_norm(idle_source_bloch) - 1.0) > kAlgebraTol) {
        throw validation_error("source_bloch must be a unit vector");
      }
    });
    if (steering_table && steering) {
      check([&] { steering_table->validate(steering->m); });
    }
    if (is_demon(scenario) && !is_steering(scenario)) {
      const int table_size = scenario == Scenario::bell_demon_signaling ? 4 : 2;
      if (bell_table_a) check([&] { bell_table_a->validate(table_size); });
      if (bell_table_b) check([&] { bell_table_b->validate(table_size); });
    }
    if (sweep) {
      if (sweep->p_values.empty()) problems.emplace_back("sweep.p_values must not be empty");
      for (double p : sweep->p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
          problems.emplace_back("sweep.p_values entries must lie in [0, 1]");
          break;
        }
      }
      for (std::size_t i = 1; i < sweep->p_values.size(); ++i) {
        if (!(sweep->p_values[i] > sweep->p_values[i - 1])) {
          problems.emplace_back("sweep.p_values must be strictly increasing");
          break;
        }
      }
      if (sweep->repetitions < 1) problems.emplace_back("sweep.repetitions must be >= 1");
    }
    if (threads < 1) problems.emplace_back("threads must be >= 1");
    if (!problems.empty()) {
      std::string msg = "invalid experiment spec:";
      for (const std::string& p : problems) msg += "\n  - " + p;
      throw validation_error(msg);
    }
  }
};

namespace detail {

inline void require_keys(const ordered_json& obj, std::string_view context,
                         std::initializer_list<std::string_view> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (std::string_view key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw validation_error("unknown key '" + it.key() + "' in " + std::string(context));
    }
  }
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline CheatTable cheat_table_from_json(const ordered_json& arr, std::string_view context) {
  if (!arr.is_array() || arr.empty()) {
    throw validation_error(std::string(context) + " must be a non-empty array of table entries");
  }
  std::vector<std::optional<CheatEntry>> slots(arr.size());
  for (const auto& item : arr) {
    require_keys(item, context, {"key", "sign", "declaration"});
    const int key = item.at("key").get<int>();
    if (key < 0 || key >= static_cast<int>(arr.size())) {
      throw validation_error(std::string(context) + ": key " + std::to_string(key) +
                             " outside 0.." + std::to_string(arr.size() - 1));
    }
    if (slots[static_cast<std::size_t>(key)]) {
      throw validation_error(std::string(context) + ": duplicate key " + std::to_string(key));
    }
    slots[static_cast<std::size_t>(key)] =
        CheatEntry{item.at("sign").get<int>(), item.at("declaration").get<int>()};
  }
  CheatTable table;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (!slots[k]) {
      throw validation_error(std::string(context) + ": missing key " + std::to_string(k));
    }
    table.entries.push_back(*slots[k]);
  }
  return table;
}

inline ordered_json cheat_table_to_json(const CheatTable& table) {
  ordered_json arr = ordered_json::array();
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    arr.push_back({{"key", k},
                   {"sign", table.entries[k].target_sign},
                   {"declaration", table.entries[k].declaration}});
  }
  return arr;
}

}  // namespace detail

inline ExperimentSpec spec_from_json(const ordered_json& j) {
  try {
    detail::require_keys(j, "config root",
                         {"scenario", "seed", "temperature_K", "steering", "bell", "demon",
                          "environment", "detector", "sweep"});
    ExperimentSpec spec;
    spec.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("temperature_K")) spec.temperature = j.at("temperature_K").get<double>();
    if (j.contains("steering")) {
      const auto& s = j.at("steering");
      detail::require_keys(s, "steering", {"m", "angles_deg", "n_runs", "setting_choice_mode"});
      SteeringConfig cfg;
      cfg.m = s.at("m").get<int>();
      cfg.setting_angles.clear();
      for (double deg : s.at("angles_deg").get<std::vector<double>>()) {
        cfg.setting_angles.push_back(detail::deg_to_rad(deg));
      }
      cfg.n_runs = s.at("n_runs").get<long long>();
      if (s.contains("setting_choice_mode")) {
        const std::string mode = s.at("setting_choice_mode").get<std::string>();
        if (mode == "pre_settled_list") {
          cfg.setting_choice_mode = SettingChoiceMode::pre_settled_list;
        } else if (mode == "per_run_quantum") {
          cfg.setting_choice_mode = SettingChoiceMode::per_run_quantum;
        } else {
          throw validation_error("unknown setting_choice_mode '" + mode + "'");
        }
      }
      spec.steering = cfg;
    }
    if (j.contains("bell")) {
      const auto& b = j.at("bell");
      detail::require_keys(b, "bell", {"alice_angles_deg", "bob_angles_deg", "n_runs"});
      BellConfig cfg;
      const auto aa = b.at("alice_angles_deg").get<std::vector<double>>();
      const auto bb = b.at("bob_angles_deg").get<std::vector<double>>();
      if (aa.size() != 2 || bb.size() != 2) {
        throw validation_error("bell angle lists must have exactly two entries");
      }
      cfg.alice_angles = {detail::deg_to_rad(aa[0]), detail::deg_to_rad(aa[1])};
      cfg.bob_angles = {detail::deg_to_rad(bb[0]), detail::deg_to_rad(bb[1])};
      cfg.n_runs = b.at("n_runs").get<long long>();
      spec.bell = cfg;
    }
    if (j.contains("demon")) {
      const auto& d = j.at("demon");
      detail::require_keys(d, "demon",
                           {"activation_probability", "bell_mode", "inactive_alice_behavior",
                            "steering_table", "bell_table_a", "bell_table_b", "source_bloch"});
      if (d.contains("activation_probability")) {
        spec.policy.activation_probability = d.at("activation_probability").get<double>();
      }
      if (d.contains("bell_mode")) {
        const std::string mode = d.at("bell_mode").get<std::string>();
        if (mode == "non_signaling") {
          spec.policy.bell_mode = BellMode::non_signaling;
        } else if (mode == "signaling") {
          spec.policy.bell_mode = BellMode::signaling;
        } else {
          throw validation_error("unknown bell_mode '" + mode + "'");
        }
      }
      if (d.contains("inactive_alice_behavior")) {
        const std::string b = d.at("inactive_alice_behavior").get<std::string>();
        if (b == "uniform_random") {
          spec.policy.inactive_alice_behavior = InactiveAliceBehavior::uniform_random;
        } else if (b == "fixed_plus") {
          spec.policy.inactive_alice_behavior = InactiveAliceBehavior::fixed_plus;
        } else {
          throw validation_error("unknown inactive_alice_behavior '" + b + "'");
        }
      }
      if (d.contains("steering_table")) {
        spec.steering_table = detail::cheat_table_from_json(d.at("steering_table"), "steering_table");
      }
      if (d.contains("bell_table_a")) {
        spec.bell_table_a = detail::cheat_table_from_json(d.at("bell_table_a"), "bell_table_a");
      }
      if (d.contains("bell_table_b")) {
        spec.bell_table_b = detail::cheat_table_from_json(d.at("bell_table_b"), "bell_table_b");
      }
      if (d.contains("source_bloch")) {
        const auto v = d.at("source_bloch").get<std::vector<double>>();
        if (v.size() != 3) throw validation_error("source_bloch must have three components");
        spec.idle_source_bloch = {v[0], v[1], v[2]};
      }
    }
    if (j.contains("environment")) {
      const auto& e = j.at("environment");
      detail::require_keys(e, "environment", {"background_mean_J", "background_std_J"});
      EnvironmentModel env;
      if (e.contains("background_mean_J")) {
        env.per_run_background_mean = e.at("background_mean_J").get<double>();
      }
      env.per_run_background_std = e.at("background_std_J").get<double>();
      spec.environment = env;
    }
    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      detail::require_keys(d, "detector", {"alpha", "power"});
      if (d.contains("alpha")) spec.detector.alpha = d.at("alpha").get<double>();
      if (d.contains("power")) spec.detector.beta_power = d.at("power").get<double>();
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      detail::require_keys(s, "sweep", {"p_values", "repetitions"});
      SweepParams params;
      params.p_values = s.at("p_values").get<std::vector<double>>();
      if (s.contains("repetitions")) params.repetitions = s.at("repetitions").get<int>();
      spec.sweep = params;
    }
    // Auto-align the bell mode with an explicit bell demon scenario when the
    // config omitted it.
    if (!j.contains("demon") || !j.at("demon").contains("bell_mode")) {
      if (spec.scenario == Scenario::bell_demon_signaling) {
        spec.policy.bell_mode = BellMode::signaling;
      }
    }
    return spec;
  } catch (const ordered_json::exception& e) {
    throw validation_error(std::string("config error: ") + e.what());
  }
}

inline ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path));
  } catch (const ordered_json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

// Settings for running the detector standalone on a stored heat record.
struct DetectSettings {
  EnvironmentModel environment;
  DetectorConfig detector;
};

inline DetectSettings detect_settings_from_json(const ordered_json& j) {
  try {
    detail::require_keys(j, "detect settings", {"environment", "detector"});
    DetectSettings s;
    const auto& e = j.at("environment");
    detail::require_keys(e, "environment", {"background_mean_J", "background_std_J"});
    if (e.contains("background_mean_J")) {
      s.environment.per_run_background_mean = e.at("background_mean_J").get<double>();
    }
    s.environment.per_run_background_std = e.at("background_std_J").get<double>();
    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      detail::require_keys(d, "detector", {"alpha", "power"});
      if (d.contains("alpha")) s.detector.alpha = d.at("alpha").get<double>();
      if (d.contains("power")) s.detector.beta_power = d.at("power").get<double>();
    }
    s.environment.validate();
    s.detector.validate();
    return s;
  } catch (const ordered_json::exception& e) {
    throw validation_error(std::string("detect settings error: ") + e.what());
  }
}

inline DetectSettings load_detect_settings(const std::filesystem::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path));
  } catch (const ordered_json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  return detect_settings_from_json(j);
}

inline ordered_json config_echo_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["scenario"] = to_string(spec.scenario);
  j["seed"] = spec.seed;
  j["temperature_K"] = spec.temperature;
  if (spec.steering) {
    ordered_json s;
    s["m"] = spec.steering->m;
    s["angles_rad"] = spec.steering->setting_angles;
    s["n_runs"] = spec.steering->n_runs;
    s["setting_choice_mode"] =
        spec.steering->setting_choice_mode == SettingChoiceMode::pre_settled_list
            ? "pre_settled_list"
            : "per_run_quantum";
    j["steering"] = s;
  }
  if (spec.bell) {
    ordered_json b;
    b["alice_angles_rad"] = spec.bell->alice_angles;
    b["bob_angles_rad"] = spec.bell->bob_angles;
    b["n_runs"] = spec.bell->n_runs;
    j["bell"] = b;
  }
  if (is_demon(spec.scenario)) {
    ordered_json d;
    d["activation_probability"] = spec.policy.activation_probability;
    d["inactive_alice_behavior"] =
        spec.policy.inactive_alice_behavior == InactiveAliceBehavior::uniform_random
            ? "uniform_random"
            : "fixed_plus";
    d["source_bloch"] = spec.idle_source_bloch;
    if (is_steering(spec.scenario)) {
      d["steering_table"] = detail::cheat_table_to_json(spec.effective_steering_table());
    } else {
      d["bell_mode"] =
          spec.policy.bell_mode == BellMode::signaling ? "signaling" : "non_signaling";
      const auto [ta, tb] = spec.effective_bell_tables();
      d["bell_table_a"] = detail::cheat_table_to_json(ta);
      d["bell_table_b"] = detail::cheat_table_to_json(tb);
    }
    j["demon"] = d;
  }
  const EnvironmentModel env = spec.effective_environment();
  j["environment"] = {{"background_mean_J", env.per_run_background_mean},
                      {"background_std_J", env.per_run_background_std}};
  j["detector"] = {{"alpha", spec.detector.alpha}, {"power", spec.detector.beta_power}};
  return j;
}

// In-memory result of one scenario execution, before any files are written.
struct ScenarioOutcome {
  Transcript transcript;
  long long ledger_erasures = 0;
  double ledger_bits = 0.0;
  double ledger_joules = 0.0;
  int demons = 0;               // demons erasing per active run
  double bits_per_demon = 0.0;  // register size each erases
  double value = 0.0;           // S_n or CHSH
  double std_err = 0.0;
  std::optional<SteeringEstimate> steering_estimate;
  std::optional<ChshEstimate> chsh_estimate;

  double bits_per_active_run() const { return demons * bits_per_demon; }
};

inline ScenarioOutcome execute_scenario(const ExperimentSpec& spec, std::uint64_t run_seed,
                                        int threads) {
  ScenarioOutcome out;
  switch (spec.scenario) {
    case Scenario::steering_honest:
      out.transcript = run_steering_honest(*spec.steering, run_seed, threads);
      break;
    case Scenario::steering_lhs:
      out.transcript = run_steering_lhs_baseline(*spec.steering, run_seed, threads);
      break;
    case Scenario::steering_demon: {
      auto result = run_steering_demon(*spec.steering, spec.policy, spec.effective_steering_table(),
                                       spec.temperature, run_seed, threads, spec.idle_source());
      out.transcript = std::move(result.transcript);
      out.ledger_erasures = result.ledger.erasures();
      out.ledger_bits = result.ledger.bits();
      out.ledger_joules = result.ledger.joules();
      out.demons = 1;
      out.bits_per_demon = result.ledger.bits_per_erasure();
      break;
    }
    case Scenario::bell_honest:
      out.transcript = run_bell_honest(*spec.bell, run_seed, threads);
      break;
    case Scenario::bell_demon_nonsignaling:
    case Scenario::bell_demon_signaling: {
      const auto [ta, tb] = spec.effective_bell_tables();
      auto result = run_bell_demon(*spec.bell, spec.policy, ta, tb, spec.temperature, run_seed,
                                   threads, spec.idle_source());
      out.transcript = std::move(result.transcript);
      out.ledger_erasures = result.ledger.erasures();
      out.ledger_bits = result.ledger.bits();
      out.ledger_joules = result.ledger.joules();
      out.demons = 2;
      out.bits_per_demon = 1.0;
      break;
    }
  }
  if (is_steering(spec.scenario)) {
    out.steering_estimate = steering_parameter(out.transcript, spec.steering->m);
    out.value = out.steering_estimate->s_n;
    out.std_err = out.steering_estimate->std_err;
  } else {
    out.chsh_estimate = chsh_value(out.transcript);
    out.value = out.chsh_estimate->s;
    out.std_err = out.chsh_estimate->std_err;
  }
  return out;
}

// Heat an active run injects, in the exact per-erasure quantum the ledger
// charges: `demons` times landauer_cost(bits per register), so per-run sums
// reproduce the ledger total exactly.
inline double per_active_run_excess(const ScenarioOutcome& outcome, double temperature) {
  if (outcome.demons <= 0) return 0.0;
  return outcome.demons * landauer_cost(outcome.bits_per_demon, temperature);
}

inline std::vector<double> demon_heat_contributions(const ScenarioOutcome& outcome,
                                                    double temperature) {
  std::vector<double> heat(outcome.transcript.records.size(), 0.0);
  const double per_run = per_active_run_excess(outcome, temperature);
  if (per_run <= 0.0) return heat;
  for (std::size_t i = 0; i < heat.size(); ++i) {
    if (outcome.transcript.records[i].demon_active) heat[i] = per_run;
  }
  return heat;
}

struct ExperimentSummary {
  Scenario scenario = Scenario::steering_honest;
  std::uint64_t seed = 0;
  long long n_runs = 0;
  long long active_runs = 0;
  double value = 0.0;
  double std_err = 0.0;
  std::optional<SteeringEstimate> steering_estimate;
  std::optional<ChshEstimate> chsh_estimate;
  long long ledger_erasures = 0;
  double ledger_bits = 0.0;
  double ledger_joules = 0.0;
  double per_active_run_excess_joules = 0.0;
  DetectionResult detection;
  ordered_json json;
};

inline ordered_json summary_to_json(const ExperimentSpec& spec, const ExperimentSummary& s) {
  ordered_json j;
  j["scenario"] = to_string(s.scenario);
  j["seed"] = s.seed;
  j["n_runs"] = s.n_runs;
  j["config"] = config_echo_json(spec);
  ordered_json est;
  if (s.steering_estimate) {
    est["s_n"] = s.steering_estimate->s_n;
    est["std_err"] = s.steering_estimate->std_err;
    est["per_setting_correlations"] = s.steering_estimate->per_setting_correlations;
  }
  if (s.chsh_estimate) {
    est["chsh"] = s.chsh_estimate->s;
    est["std_err"] = s.chsh_estimate->std_err;
    est["cell_means"] = {
        {"E00", s.chsh_estimate->cell_means[0][0]},
        {"E01", s.chsh_estimate->cell_means[0][1]},
        {"E10", s.chsh_estimate->cell_means[1][0]},
        {"E11", s.chsh_estimate->cell_means[1][1]},
    };
  }
  j["estimates"] = est;
  j["ledger"] = {{"erasures", s.ledger_erasures},
                 {"bits", s.ledger_bits},
                 {"joules", s.ledger_joules},
                 {"temperature_K", spec.temperature},
                 {"active_runs", s.active_runs},
                 {"per_active_run_excess_J", s.per_active_run_excess_joules}};
  j["detector"] = {{"n", s.detection.n},
                   {"z_score", s.detection.z_score},
                   {"p_value", s.detection.p_value},
                   {"reject", s.detection.reject}};
  j["files"] = {{"transcript_csv", "transcript.csv"}, {"heat_csv", "heat.csv"}};
  return j;
}

// Runs the scenario end to end and writes transcript.csv, heat.csv and
// summary.json into spec.out_dir.
inline ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const ScenarioOutcome outcome =
      execute_scenario(spec, derive_seed(spec.seed, kSeedPurposeRuns), spec.threads);
  const EnvironmentModel env = spec.effective_environment();
  const std::vector<double> contributions = demon_heat_contributions(outcome, spec.temperature);
  const std::vector<double> heat =
      simulate_heat_record(static_cast<long long>(contributions.size()), contributions, env,
                           derive_seed(spec.seed, kSeedPurposeHeat), spec.threads);

  ExperimentSummary s;
  s.scenario = spec.scenario;
  s.seed = spec.seed;
  s.n_runs = static_cast<long long>(outcome.transcript.records.size());
  for (const RunRecord& r : outcome.transcript.records) {
    if (r.demon_active) ++s.active_runs;
  }
  s.value = outcome.value;
  s.std_err = outcome.std_err;
  s.steering_estimate = outcome.steering_estimate;
  s.chsh_estimate = outcome.chsh_estimate;
  s.ledger_erasures = outcome.ledger_erasures;
  s.ledger_bits = outcome.ledger_bits;
  s.ledger_joules = outcome.ledger_joules;
  s.per_active_run_excess_joules = per_active_run_excess(outcome, spec.temperature);
  s.detection = detect_anomaly(heat, env, spec.detector);
  s.json = summary_to_json(spec, s);

  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + spec.out_dir.string() + ": " +
                             ec.message());
  }
  write_transcript_csv(spec.out_dir / "transcript.csv", outcome.transcript);
  write_heat_csv(spec.out_dir / "heat.csv", heat);
  write_text_file(spec.out_dir / "summary.json", s.json.dump(2) + "\n");
  return s;
}

struct SweepRow {
  double p = 0.0;
  double value = 0.0;
  double std_err = 0.0;
  double heat_per_run_joules = 0.0;
  double heat_per_run_kt_ln2 = 0.0;
  double detected_fraction = 0.0;
};

struct SweepResult {
  Scenario scenario = Scenario::steering_demon;
  std::vector<SweepRow> rows;
  double classical_bound = 0.0;
  double assisted_value = 0.0;       // violation value at full activation
  double faking_threshold = 0.0;     // p* = classical bound / assisted value
  double bits_per_active_run = 0.0;  // total over demons
  double threshold_heat_kt_ln2 = 0.0;
  double temperature = 300.0;
  double kt_ln2_joules = 0.0;
};

// For each activation probability: repeated seeded experiments, mean
// violation value, per-run dissipated heat in joules and in kT ln2 units, and
// the fraction of repetitions flagged by the detector.
inline SweepResult sweep_activation(const ExperimentSpec& base, std::span<const double> p_values,
                                    int repetitions) {
  if (p_values.empty()) throw validation_error("sweep needs a non-empty p list");
  if (repetitions < 1) throw validation_error("sweep needs repetitions >= 1");
  if (!is_demon(base.scenario)) {
    throw validation_error("sweep_activation requires a demon scenario");
  }
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0)) {
      throw validation_error("sweep p values must lie in [0, 1]");
    }
    if (i > 0 && !(p_values[i] > p_values[i - 1])) {
      throw validation_error("sweep p values must be strictly increasing");
    }
  }
  {
    ExperimentSpec probe = base;
    probe.sweep.reset();
    probe.validate();
  }

  const EnvironmentModel env = base.effective_environment();
  SweepResult result;
  result.scenario = base.scenario;
  result.temperature = base.temperature;
  result.kt_ln2_joules = kt_ln2(base.temperature);

  for (std::size_t pi = 0; pi < p_values.size(); ++pi) {
    ExperimentSpec spec = base;
    spec.policy.activation_probability = p_values[pi];
    double value_sum = 0.0;
    double var_sum = 0.0;
    double heat_sum = 0.0;
    int detected = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
      const std::uint64_t rep_seed =
          derive_seed(derive_seed(base.seed, kSeedSweepBase + pi), static_cast<std::uint64_t>(rep));
      const ScenarioOutcome outcome =
          execute_scenario(spec, derive_seed(rep_seed, kSeedPurposeRuns), base.threads);
      if (outcome.bits_per_active_run() > 0.0) {
        result.bits_per_active_run = outcome.bits_per_active_run();
      }
      const auto contributions = demon_heat_contributions(outcome, base.temperature);
      const auto heat = simulate_heat_record(static_cast<long long>(contributions.size()),
                                             contributions, env,
                                             derive_seed(rep_seed, kSeedPurposeHeat), base.threads);
      const DetectionResult det = detect_anomaly(heat, env, base.detector);
      value_sum += outcome.value;
      var_sum += outcome.std_err * outcome.std_err;
      heat_sum += outcome.ledger_joules / static_cast<double>(outcome.transcript.records.size());
      if (det.reject) ++detected;
    }
    SweepRow row;
    row.p = p_values[pi];
    row.value = value_sum / repetitions;
    row.std_err = std::sqrt(var_sum) / repetitions;
    row.heat_per_run_joules = heat_sum / repetitions;
    row.heat_per_run_kt_ln2 = row.heat_per_run_joules / result.kt_ln2_joules;
    row.detected_fraction = static_cast<double>(detected) / repetitions;
    result.rows.push_back(row);
  }

  if (base.scenario == Scenario::steering_demon) {
    result.classical_bound = lhs_bound(base.steering->settings()).value;
  } else {
    result.classical_bound = lhv_chsh_bound().value;
  }
  result.assisted_value = base.scenario == Scenario::bell_demon_signaling  ? 4.0
                          : base.scenario == Scenario::bell_demon_nonsignaling ? 2.0
                                                                               : 1.0;
  for (const SweepRow& row : result.rows) {
    if (row.p == 1.0) result.assisted_value = row.value;
  }
  result.faking_threshold = result.classical_bound / result.assisted_value;
  result.threshold_heat_kt_ln2 = result.faking_threshold * result.bits_per_active_run;
  return result;
}

inline std::string sweep_to_csv(const SweepResult& result) {
  std::string out = "p,value,std_err,heat_per_run_J,heat_per_run_kTln2,detected_fraction\n";
  for (const SweepRow& r : result.rows) {
    out += fmt_double(r.p) + "," + fmt_double(r.value) + "," + fmt_double(r.std_err) + "," +
           fmt_double(r.heat_per_run_joules) + "," + fmt_double(r.heat_per_run_kt_ln2) + "," +
           fmt_double(r.detected_fraction) + "\n";
  }
  return out;
}

inline void emit_plot_data(const SweepResult& result, const std::filesystem::path& path) {
  if (result.rows.empty()) throw std::invalid_argument("emit_plot_data: empty sweep result");
  write_text_file(path, sweep_to_csv(result));
}

inline std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::vector<SweepRow> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string line = content.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      if (line != "p,value,std_err,heat_per_run_J,heat_per_run_kTln2,detected_fraction") {
        throw std::runtime_error(path.string() + ": unexpected sweep header");
      }
      header = false;
      continue;
    }
    SweepRow row;
    double* fields[6] = {&row.p, &row.value, &row.std_err, &row.heat_per_run_joules,
                         &row.heat_per_run_kt_ln2, &row.detected_fraction};
    std::size_t start = 0;
    for (int f = 0; f < 6; ++f) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      *fields[f] = std::stod(line.substr(start, comma - start));
      start = comma + 1;
    }
    rows.push_back(row);
  }
  return rows;
}

inline ordered_json sweep_to_json(const SweepResult& result) {
  ordered_json j;
  j["scenario"] = to_string(result.scenario);
  j["classical_bound"] = result.classical_bound;
  j["assisted_value"] = result.assisted_value;
  j["faking_threshold"] = result.faking_threshold;
  j["bits_per_active_run"] = result.bits_per_active_run;
  j["threshold_heat_kTln2"] = result.threshold_heat_kt_ln2;
  j["temperature_K"] = result.temperature;
  j["kT_ln2_J"] = result.kt_ln2_joules;
  ordered_json rows = ordered_json::array();
  for (const SweepRow& r : result.rows) {
    rows.push_back({{"p", r.p},
                    {"value", r.value},
                    {"std_err", r.std_err},
                    {"heat_per_run_J", r.heat_per_run_joules},
                    {"heat_per_run_kTln2", r.heat_per_run_kt_ln2},
                    {"detected_fraction", r.detected_fraction}});
  }
  j["rows"] = rows;
  return j;
}

}  // namespace qdemon
