#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "galclean/cleaning.hpp"
#include "galclean/graph.hpp"
#include "galclean/representation.hpp"
#include "galclean/selection.hpp"

namespace galclean {

// Ground-truth label source with budget accounting. Every successful query
// charges exactly one unit; re-querying a node is a bug in the caller and
// throws rather than silently double-charging.
class LabelOracle {
 public:
  LabelOracle(const LabelStore& labels, int budget_total);

  int query(int v);
  bool queried(int v) const { return queried_[v] != 0; }
  int budget_total() const { return budget_total_; }
  int budget_used() const { return budget_used_; }
  int budget_remaining() const { return budget_total_ - budget_used_; }

 private:
  const LabelStore* labels_;
  int budget_total_;
  int budget_used_ = 0;
  std::vector<char> queried_;
};

enum class Scenario { noise_free, perturbed_data_only, perturbed_full, precleaned };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

struct CleaningConfig {
  double kappa = 0.9;
  int edge_epochs = 100;
  int hidden_dim = 64;
  int z_dim = 64;
  bool warm_start = false;  // fresh edge predictor each iteration by default
  AdamConfig opt;
};

struct GalcleanConfig {
  ReprConfig repr;
  SelectConfig select;
  CleaningConfig cleaning;
  int budget = 0;
  int refinement_iters = 3;  // extra EM rounds after the budget is exhausted
  Scenario scenario = Scenario::perturbed_full;
  // Experimental: feed confident pseudo-labeled nodes into the
  // classification loss during refinement.
  bool refine_pseudo_in_classification = false;
};

struct IterationRecord {
  int iteration = 0;
  bool refinement = false;
  std::vector<int> selected;
  int labeled_size = 0;
  double repr_loss = 0.0;
  double edge_loss = 0.0;
  bool cleaned = false;  // false when the edge training set degenerated
  // mean learned weight on clean / injected edges, when provenance is known
  std::optional<double> mean_clean_weight;
  std::optional<double> mean_noisy_weight;
  std::optional<double> downstream_accuracy;
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
};

struct DataView {
  const WeightedGraph* graph = nullptr;
  const DenseMatrix* x = nullptr;
  const LabelStore* labels = nullptr;
  // injected edges (canonical u<v) when the harness knows them
  const std::vector<std::pair<int, int>>* noise_provenance = nullptr;
};

struct GalcleanResult {
  std::vector<int> labeled;  // sorted
  WeightedGraph graph;       // G^(K)
  RunTrace trace;
  // carried state for refinement
  ReprModel model;
  bool has_model = false;
  DenseMatrix logits;
  std::vector<int> pool;  // remaining pool
};

// One full budgeted run: iterate representation learning, node selection,
// oracle queries, and graph cleaning until the budget is exhausted.
GalcleanResult run_galclean(const DataView& data, const SplitSet& splits, LabelOracle& oracle,
                            const GalcleanConfig& cfg, std::uint64_t rng_seed);

// Post-budget EM rounds on the fixed labeled set; no oracle access.
void run_refinement(GalcleanResult& state, const DataView& data, const GalcleanConfig& cfg, int extra_iters,
                    std::uint64_t rng_seed);

// Random baseline: budget-many uniform pool nodes, no cleaning.
GalcleanResult run_random_baseline(const DataView& data, const SplitSet& splits, LabelOracle& oracle,
                                   const GalcleanConfig& cfg, std::uint64_t rng_seed);

}  // namespace galclean
