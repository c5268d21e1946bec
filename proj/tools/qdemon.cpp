// Command-line front end: single experiments, activation sweeps, classical
// bounds, anomaly detection on stored heat records, and the canned
// demonstration suite.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qdemon/demo.hpp"
#include "qdemon/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace qdemon;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 1;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
  auto* opt = cmd->add_option("--config", flags.config, "JSON config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", flags.seed, "override the config's master seed");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--threads", flags.threads, "worker threads (outputs do not depend on this)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", flags.format, "stdout format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
}

ExperimentSpec load_spec(const CommonFlags& flags) {
  ExperimentSpec spec = load_experiment_spec(flags.config);
  if (flags.seed) spec.seed = *flags.seed;
  if (flags.out) spec.out_dir = *flags.out;
  spec.threads = flags.threads;
  spec.format = output_format_from_string(flags.format);
  return spec;
}

int cmd_run(const CommonFlags& flags) {
  const ExperimentSpec spec = load_spec(flags);
  const ExperimentSummary summary = run_experiment(spec);
  if (spec.format == OutputFormat::json) {
    std::cout << summary.json.dump(2) << "\n";
  } else {
    std::cout << "scenario,value,std_err,ledger_joules,detector_reject\n"
              << to_string(summary.scenario) << "," << fmt_double(summary.value) << ","
              << fmt_double(summary.std_err) << "," << fmt_double(summary.ledger_joules) << ","
              << (summary.detection.reject ? 1 : 0) << "\n";
  }
  std::cerr << "outputs written to " << spec.out_dir.string() << "\n";
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  const ExperimentSpec spec = load_spec(flags);
  if (!spec.sweep) {
    throw validation_error("sweep requires a 'sweep' section in the config");
  }
  const SweepResult result = sweep_activation(spec, spec.sweep->p_values, spec.sweep->repetitions);
  fs::create_directories(spec.out_dir);
  emit_plot_data(result, spec.out_dir / "sweep.csv");
  write_text_file(spec.out_dir / "sweep.json", sweep_to_json(result).dump(2) + "\n");
  if (spec.format == OutputFormat::json) {
    std::cout << sweep_to_json(result).dump(2) << "\n";
  } else {
    std::cout << sweep_to_csv(result);
  }
  std::cerr << "outputs written to " << spec.out_dir.string() << "\n";
  return 0;
}

// Settings file for `bounds`: {"angles_deg": [...]} for the x-z plane, or
// {"bloch_vectors": [[x,y,z], ...]} for arbitrary directions.
std::vector<MeasurementSetting> load_settings_file(const fs::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path));
  } catch (const ordered_json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  detail::require_keys(j, "settings file", {"angles_deg", "bloch_vectors"});
  std::vector<MeasurementSetting> settings;
  if (j.contains("angles_deg")) {
    int label = 0;
    for (double deg : j.at("angles_deg").get<std::vector<double>>()) {
      settings.push_back(setting_from_angle(deg * std::numbers::pi / 180.0, label++));
    }
  } else if (j.contains("bloch_vectors")) {
    int label = 0;
    for (const auto& v : j.at("bloch_vectors").get<std::vector<std::vector<double>>>()) {
      if (v.size() != 3) throw validation_error("bloch_vectors entries need three components");
      settings.push_back(MeasurementSetting{{v[0], v[1], v[2]}, label++});
    }
  } else {
    throw validation_error(path.string() + ": expected angles_deg or bloch_vectors");
  }
  return settings;
}

int cmd_bounds(const CommonFlags& flags) {
  const std::vector<MeasurementSetting> settings = load_settings_file(flags.config);
  const SteeringBound steering = lhs_bound(settings);
  const ChshBound chsh = lhv_chsh_bound();

  ordered_json j;
  j["lhs_bound"] = {{"value", steering.value},
                    {"witness",
                     {{"signs", steering.witness_signs},
                      {"bloch", steering.witness_bloch}}},
                    {"enumerated_count", steering.enumerated_count}};
  j["lhv_chsh_bound"] = {{"value", chsh.value},
                         {"witness",
                          {{"alice_signs", chsh.alice_signs}, {"bob_signs", chsh.bob_signs}}},
                         {"enumerated_count", chsh.enumerated_count}};
  if (output_format_from_string(flags.format) == OutputFormat::json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "bound,value,enumerated_count\n"
              << "lhs," << fmt_double(steering.value) << "," << steering.enumerated_count << "\n"
              << "lhv_chsh," << fmt_double(chsh.value) << "," << chsh.enumerated_count << "\n";
  }
  return 0;
}

int cmd_detect(const CommonFlags& flags, const std::string& heat_csv) {
  const DetectSettings settings = load_detect_settings(flags.config);
  const std::vector<double> record = read_heat_csv(heat_csv);
  const DetectionResult r = detect_anomaly(record, settings.environment, settings.detector);
  ordered_json j = {{"n", r.n}, {"z_score", r.z_score}, {"p_value", r.p_value}, {"reject", r.reject}};
  if (output_format_from_string(flags.format) == OutputFormat::json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "n,z_score,p_value,reject\n"
              << r.n << "," << fmt_double(r.z_score) << "," << fmt_double(r.p_value) << ","
              << (r.reject ? 1 : 0) << "\n";
  }
  return 0;
}

int cmd_demo(const CommonFlags& flags) {
  DemoOptions opts;
  if (flags.out) opts.out_dir = *flags.out;
  if (flags.seed) opts.seed = *flags.seed;
  opts.threads = flags.threads;
  const auto checks = run_demo_suite(opts);
  print_demo_table(std::cout, checks);
  std::cerr << "outputs written to " << opts.out_dir.string() << "\n";
  return all_pass(checks) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steering/Bell test simulator with Maxwell-demon adversaries and Landauer accounting"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, bounds_flags, detect_flags, demo_flags;
  std::string heat_csv;

  CLI::App* run = app.add_subcommand("run", "run a single experiment from a config file");
  add_common(run, run_flags);

  CLI::App* sweep = app.add_subcommand("sweep", "run an activation-probability sweep");
  add_common(sweep, sweep_flags);

  CLI::App* bounds = app.add_subcommand("bounds", "print classical bounds for a settings file");
  add_common(bounds, bounds_flags);

  CLI::App* detect = app.add_subcommand("detect", "run the anomaly detector on a heat CSV");
  detect->add_option("heat_csv", heat_csv, "heat record CSV (run_index,joules)")->required();
  add_common(detect, detect_flags);

  CLI::App* demo = app.add_subcommand(
      "demo-paper", "run the canned scenario suite and print its pass/fail table");
  add_common(demo, demo_flags, /*config_required=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (bounds->parsed()) return cmd_bounds(bounds_flags);
    if (detect->parsed()) return cmd_detect(detect_flags, heat_csv);
    if (demo->parsed()) return cmd_demo(demo_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
