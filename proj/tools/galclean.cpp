#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "galclean/harness.hpp"

namespace {

constexpr const char* kVersion = "galclean 0.1.0";

// exit codes: 0 ok, 2 config error, 3 runtime failure
constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

galclean::ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                                       const std::string& output_override, int jobs_override) {
  galclean::KvConfig kv =
      path.empty() ? galclean::KvConfig::from_string("") : galclean::KvConfig::from_file(path);
  for (const std::string& kvpair : overrides) {
    const auto eq = kvpair.find('=');
    if (eq == std::string::npos) throw galclean::ConfigError("--set expects key=value, got '" + kvpair + "'");
    kv.override_value(kvpair.substr(0, eq), kvpair.substr(eq + 1));
  }
  auto cfg = galclean::ExperimentConfig::from_kv(kv);
  if (!output_override.empty()) cfg.output_dir = output_override;
  if (jobs_override > 0) {
    cfg.jobs = jobs_override;
  } else if (const char* env = std::getenv("GALCLEAN_JOBS"); env != nullptr && *env != '\0') {
    cfg.jobs = std::max(1, std::atoi(env));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative graph active learning with structure cleaning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::vector<std::string> overrides;
  int jobs_override = 0;

  auto add_config_options = [&](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("config", config_path, "experiment config file (key = value lines)");
    if (config_required) opt->required();
    cmd->add_option("--set", overrides, "override a config key, e.g. --set repr.alpha=0.5");
    cmd->add_option("--out", output_override, "output directory override");
    cmd->add_option("--jobs", jobs_override, "concurrent grid cells (default: GALCLEAN_JOBS or config)");
  };

  auto* run_cmd = app.add_subcommand("run", "run the configured method over the noise-ratio x seed grid");
  add_config_options(run_cmd, true);

  auto* ablate_cmd = app.add_subcommand("ablate", "paired ablation runs");
  std::string which;
  ablate_cmd->add_option("which", which, "cleanliness | refinement | kappa_sweep | budget_sweep")->required();
  add_config_options(ablate_cmd, true);

  auto* synth_cmd = app.add_subcommand("synth", "generate an SBM bundle (optionally with planted noise)");
  galclean::SynthSpec spec;
  double synth_noise = 0.0;
  std::uint64_t synth_noise_seed = 1;
  std::string synth_out = "bundle";
  synth_cmd->add_option("--classes", spec.classes, "number of classes");
  synth_cmd->add_option("--per-class", spec.per_class, "nodes per class");
  synth_cmd->add_option("--p-in", spec.p_in, "intra-class edge probability");
  synth_cmd->add_option("--p-out", spec.p_out, "inter-class edge probability");
  synth_cmd->add_option("--feature-dim", spec.feature_dim, "feature dimension");
  synth_cmd->add_option("--feature-noise", spec.feature_noise, "Gaussian feature noise scale");
  synth_cmd->add_option("--seed", spec.seed, "generator seed");
  synth_cmd->add_option("--noise-ratio", synth_noise, "planted inter-class edge ratio");
  synth_cmd->add_option("--noise-seed", synth_noise_seed, "noise injection seed");
  synth_cmd->add_option("--out", synth_out, "bundle output directory")->required();

  auto* clean_cmd = app.add_subcommand("clean", "run graph cleaning on a bundle and export weighted edges");
  std::string clean_bundle;
  std::string clean_out = "edges_weighted.csv";
  clean_cmd->add_option("bundle", clean_bundle, "bundle directory")->required();
  clean_cmd->add_option("--out", clean_out, "weighted edge CSV path");
  clean_cmd->add_option("--set", overrides, "override a config key");
  clean_cmd->add_option("config", config_path, "optional experiment config file");

  auto* version_cmd = app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (version_cmd->parsed()) {
      std::cout << kVersion << "\n";
      return 0;
    }
    if (run_cmd->parsed()) {
      auto cfg = load_config(config_path, overrides, output_override, jobs_override);
      const auto rows = galclean::run_experiment(cfg);
      std::cout << "wrote " << rows.size() << " result rows to " << cfg.output_dir << "\n";
      return 0;
    }
    if (ablate_cmd->parsed()) {
      auto cfg = load_config(config_path, overrides, output_override, jobs_override);
      const auto rows = galclean::run_ablation(cfg, galclean::ablation_from_string(which));
      std::cout << "wrote " << rows.size() << " ablation rows to " << cfg.output_dir << "\n";
      return 0;
    }
    if (synth_cmd->parsed()) {
      galclean::write_synth_bundle(spec, synth_noise, synth_noise_seed, synth_out);
      std::cout << "wrote bundle to " << synth_out << "\n";
      return 0;
    }
    if (clean_cmd->parsed()) {
      auto cfg = load_config(config_path, overrides, "", 0);
      cfg.dataset = clean_bundle;
      galclean::clean_bundle_to_csv(cfg, clean_out);
      std::cout << "wrote " << clean_out << "\n";
      return 0;
    }
  } catch (const galclean::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return 0;
}
