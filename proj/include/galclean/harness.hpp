#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "galclean/driver.hpp"
#include "galclean/gcn.hpp"

namespace galclean {

// Config-file or CLI usage errors; the CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` config file; '#' starts a comment. Every key must be
// consumed by the time parsing finishes, so typos fail loudly.
class KvConfig {
 public:
  static KvConfig from_file(const std::filesystem::path& path);
  static KvConfig from_string(const std::string& text);

  void override_value(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::uint64_t> get_seed_list(const std::string& key, const std::vector<std::uint64_t>& fallback);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void fail_on_unconsumed() const;
  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

enum class Method { galclean, galclean_plus, random, random_precleaned };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

struct SynthSpec {
  int classes = 4;
  int per_class = 100;
  double p_in = 0.2;
  double p_out = 0.0;
  int feature_dim = 16;
  double feature_noise = 0.4;
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  std::string dataset = "synth";  // bundle directory or "synth"
  SynthSpec synth;
  std::string noise_mechanism = "random";  // random | none
  std::vector<double> noise_ratios = {1.0};
  Method method = Method::galclean_plus;
  GalcleanConfig gal;
  GcnConfig gcn;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string output_dir = "out";
  int budget_per_class = 8;            // B = per_class * C
  std::optional<int> budget_absolute;  // overrides budget_per_class
  double preclean_threshold = 0.0;
  int valid_size = 50;
  int test_size = 1000;
  int jobs = 1;

  static ExperimentConfig from_kv(KvConfig& kv);
};

struct ResultRow {
  std::string dataset;
  std::string method;
  std::string scenario;
  double noise_ratio = 0.0;
  std::uint64_t seed = 0;
  int budget = 0;
  double test_accuracy = 0.0;
  double runtime_seconds = 0.0;
  double final_mean_clean_edge_weight = std::numeric_limits<double>::quiet_NaN();
  double final_mean_noisy_edge_weight = std::numeric_limits<double>::quiet_NaN();
  std::string setting;  // ablation arm; empty for plain runs
};

// csv helpers (stable schema; see README)
std::string result_csv_header(bool with_setting);
std::string to_csv_row(const ResultRow& row, bool with_setting);
ResultRow result_row_from_csv(const std::string& line, bool with_setting);

struct AggregateRow {
  std::string dataset;
  std::string method;
  std::string scenario;
  double noise_ratio = 0.0;
  int budget = 0;
  std::string setting;
  int runs = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows);

// Loaded dataset plus the per-cell derived graphs.
struct LoadedData {
  Bundle bundle;
  std::string name;
};

LoadedData load_dataset(const ExperimentConfig& cfg);

// One grid cell, fully deterministic given (cfg, ratio, seed). The data
// seeds depend only on (ratio, seed) so ablation arms stay paired.
struct CellOutcome {
  ResultRow row;
  RunTrace trace;
  double accuracy_before_refinement = std::numeric_limits<double>::quiet_NaN();
};

CellOutcome run_cell(const ExperimentConfig& cfg, const LoadedData& data, double noise_ratio, std::uint64_t seed);

// `run` subcommand: the ratio x seed grid for the configured method.
// Writes results.csv, aggregate.csv, and one trace JSON per cell.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

enum class Ablation { cleanliness, refinement, kappa_sweep, budget_sweep };
Ablation ablation_from_string(const std::string& s);

std::vector<ResultRow> run_ablation(const ExperimentConfig& cfg, Ablation which);

// `synth` subcommand: writes a bundle (noisy when ratio > 0) plus
// noise_edges.csv provenance.
void write_synth_bundle(const SynthSpec& spec, double noise_ratio, std::uint64_t noise_seed,
                        const std::filesystem::path& out_dir);

// `clean` subcommand: full GALClean+ pass over a bundle; writes
// edges_weighted.csv with 6-decimal weights.
void clean_bundle_to_csv(const ExperimentConfig& cfg, const std::filesystem::path& out_csv);

}  // namespace galclean
