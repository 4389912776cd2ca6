#include "galclean/driver.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <stdexcept>

namespace galclean {

LabelOracle::LabelOracle(const LabelStore& labels, int budget_total)
    : labels_(&labels), budget_total_(budget_total), queried_(labels.num_nodes(), 0) {
  if (budget_total < 0) throw std::invalid_argument("LabelOracle: negative budget");
}

int LabelOracle::query(int v) {
  if (v < 0 || v >= labels_->num_nodes()) throw std::invalid_argument("LabelOracle: node out of range");
  if (queried_[v]) throw std::logic_error("LabelOracle: repeated query for node " + std::to_string(v));
  if (budget_used_ >= budget_total_) throw std::runtime_error("LabelOracle: budget exhausted");
  queried_[v] = 1;
  ++budget_used_;
  return labels_->label(v);
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "noise_free") return Scenario::noise_free;
  if (s == "perturbed_data_only") return Scenario::perturbed_data_only;
  if (s == "perturbed_full") return Scenario::perturbed_full;
  if (s == "precleaned") return Scenario::precleaned;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::noise_free: return "noise_free";
    case Scenario::perturbed_data_only: return "perturbed_data_only";
    case Scenario::perturbed_full: return "perturbed_full";
    case Scenario::precleaned: return "precleaned";
  }
  return "?";
}

namespace {

void record_edge_weight_means(const DataView& data, const WeightedGraph& g, IterationRecord& rec) {
  if (data.noise_provenance == nullptr || data.noise_provenance->empty()) return;
  std::set<std::pair<int, int>> noisy(data.noise_provenance->begin(), data.noise_provenance->end());
  double clean_sum = 0.0, noisy_sum = 0.0;
  std::size_t clean_n = 0, noisy_n = 0;
  for (const Edge& e : g.edge_list()) {
    if (noisy.count({e.u, e.v})) {
      noisy_sum += e.weight;
      ++noisy_n;
    } else {
      clean_sum += e.weight;
      ++clean_n;
    }
  }
  if (clean_n > 0) rec.mean_clean_weight = clean_sum / static_cast<double>(clean_n);
  if (noisy_n > 0) rec.mean_noisy_weight = noisy_sum / static_cast<double>(noisy_n);
}

DenseMatrix gather_rows(const DenseMatrix& m, std::span<const int> rows) {
  DenseMatrix out(static_cast<int>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row(rows[i]);
    auto dst = out.row(static_cast<int>(i));
    for (int j = 0; j < m.cols(); ++j) dst[j] = src[j];
  }
  return out;
}

// E-step: pseudo labels -> edge training set -> reweighted original graph.
// Returns false (leaving the graph untouched) when either training side is
// empty, which the caller records as a skipped cleaning round.
bool clean_graph(const DataView& data, const DenseMatrix& logits, std::span<const int> labeled,
                 const GalcleanConfig& cfg, std::uint64_t seed, const EdgePredictor* warm_init, WeightedGraph& g_cur,
                 EdgePredictor& predictor_out, double& edge_loss_out) {
  const PseudoLabels pl = pseudo_labels(logits, labeled, *data.labels);
  const EdgeTrainingSet ts = build_edge_training_set(*data.graph, pl, cfg.cleaning.kappa);
  if (ts.positives.empty() || ts.negatives.empty()) return false;
  EdgeTrainOptions options;
  options.hidden_dim = cfg.cleaning.hidden_dim;
  options.z_dim = cfg.cleaning.z_dim;
  options.opt = cfg.cleaning.opt;
  auto trained = train_edge_predictor(*data.x, ts, cfg.cleaning.edge_epochs, seed,
                                      cfg.cleaning.warm_start && warm_init != nullptr ? warm_init : nullptr, options);
  g_cur = reweight_graph(*data.graph, trained.predictor, *data.x);
  predictor_out = std::move(trained.predictor);
  edge_loss_out = trained.loss_curve.empty() ? 0.0 : trained.loss_curve.back();
  return true;
}

}  // namespace

GalcleanResult run_galclean(const DataView& data, const SplitSet& splits, LabelOracle& oracle,
                            const GalcleanConfig& cfg, std::uint64_t rng_seed) {
  if (data.graph == nullptr || data.x == nullptr || data.labels == nullptr)
    throw std::invalid_argument("run_galclean: incomplete data view");

  GalcleanResult result;
  result.labeled = splits.initial;
  std::sort(result.labeled.begin(), result.labeled.end());
  result.pool = splits.pool;
  std::sort(result.pool.begin(), result.pool.end());
  result.graph = *data.graph;  // G^(0): observed graph, unit weights

  // Cleanliness is defined on the observed graph and raw features, so it is
  // iteration-independent and computed once.
  const std::vector<double> clean_scores = cleanliness_all(*data.graph, *data.x);

  EdgePredictor predictor;
  bool have_predictor = false;

  int iteration = 0;
  while (oracle.budget_remaining() > 0) {
    ++iteration;
    const int request = std::min(cfg.select.batch_size, oracle.budget_remaining());

    // M-step
    auto repr = train_representation(*data.x, result.graph, result.labeled, *data.labels, cfg.repr,
                                     cfg.repr.warm_start && result.has_model ? &result.model : nullptr,
                                     mix_seed(rng_seed, 0xA000 + iteration));

    // node selection
    const std::vector<int> v_filter =
        remove_well_represented(result.pool, result.labeled, repr.embeddings, cfg.select.coverage_factor);
    const DenseMatrix points = gather_rows(repr.embeddings, v_filter);
    const ClusterAssignment clusters =
        kmeans(points, request, cfg.select.kmeans_iters, mix_seed(rng_seed, 0xB000 + iteration));
    const std::vector<int> selected =
        select_batch(v_filter, clusters, repr.embeddings, clean_scores, cfg.select.beta, cfg.select.global_argmin);
    if (selected.empty()) throw std::runtime_error("run_galclean: selection produced no candidates");
    assert(static_cast<int>(selected.size()) <= request);

    for (int v : selected) {
      assert(!std::binary_search(result.labeled.begin(), result.labeled.end(), v));
      oracle.query(v);
    }
    result.labeled.insert(result.labeled.end(), selected.begin(), selected.end());
    std::sort(result.labeled.begin(), result.labeled.end());
    std::vector<int> sorted_selected = selected;
    std::sort(sorted_selected.begin(), sorted_selected.end());
    std::vector<int> remaining;
    remaining.reserve(result.pool.size() - selected.size());
    std::set_difference(result.pool.begin(), result.pool.end(), sorted_selected.begin(), sorted_selected.end(),
                        std::back_inserter(remaining));
    result.pool = std::move(remaining);

    IterationRecord rec;
    rec.iteration = iteration;
    rec.selected = selected;
    rec.labeled_size = static_cast<int>(result.labeled.size());
    rec.repr_loss = repr.loss_curve.empty() ? 0.0 : repr.loss_curve.back();

    // E-step on the updated labeled set
    rec.cleaned = clean_graph(data, repr.logits, result.labeled, cfg, mix_seed(rng_seed, 0xC000),
                              have_predictor ? &predictor : nullptr, result.graph, predictor, rec.edge_loss);
    have_predictor = have_predictor || rec.cleaned;
    record_edge_weight_means(data, result.graph, rec);
    result.trace.iterations.push_back(std::move(rec));

    result.model = std::move(repr.model);
    result.has_model = true;
    result.logits = std::move(repr.logits);
  }
  return result;
}

void run_refinement(GalcleanResult& state, const DataView& data, const GalcleanConfig& cfg, int extra_iters,
                    std::uint64_t rng_seed) {
  if (extra_iters < 0) throw std::invalid_argument("run_refinement: negative iteration count");
  EdgePredictor predictor;
  bool have_predictor = false;
  int iteration = state.trace.iterations.empty() ? 0 : state.trace.iterations.back().iteration;

  for (int r = 0; r < extra_iters; ++r) {
    ++iteration;

    // The gradient always comes from the fixed labeled set; optionally (and
    // experimentally) confident pseudo-labeled nodes join the label term.
    std::vector<int> train_nodes = state.labeled;
    LabelStore train_labels = *data.labels;
    if (cfg.refine_pseudo_in_classification && state.logits.rows() == data.labels->num_nodes()) {
      const PseudoLabels pl = pseudo_labels(state.logits, state.labeled, *data.labels);
      for (int v = 0; v < data.labels->num_nodes(); ++v) {
        if (pl.source[v] == LabelSource::oracle) continue;
        if (pl.confidence[v] < cfg.cleaning.kappa) continue;
        train_nodes.push_back(v);
        train_labels.labels[v] = pl.label[v];
      }
      std::sort(train_nodes.begin(), train_nodes.end());
    }

    auto repr = train_representation(*data.x, state.graph, train_nodes, train_labels, cfg.repr,
                                     cfg.repr.warm_start && state.has_model ? &state.model : nullptr,
                                     mix_seed(rng_seed, 0xA000 + iteration));

    IterationRecord rec;
    rec.iteration = iteration;
    rec.refinement = true;
    rec.labeled_size = static_cast<int>(state.labeled.size());
    rec.repr_loss = repr.loss_curve.empty() ? 0.0 : repr.loss_curve.back();
    rec.cleaned = clean_graph(data, repr.logits, state.labeled, cfg, mix_seed(rng_seed, 0xC000),
                              have_predictor ? &predictor : nullptr, state.graph, predictor, rec.edge_loss);
    have_predictor = have_predictor || rec.cleaned;
    record_edge_weight_means(data, state.graph, rec);
    state.trace.iterations.push_back(std::move(rec));

    state.model = std::move(repr.model);
    state.has_model = true;
    state.logits = std::move(repr.logits);
  }
}

GalcleanResult run_random_baseline(const DataView& data, const SplitSet& splits, LabelOracle& oracle,
                                   const GalcleanConfig& cfg, std::uint64_t rng_seed) {
  if (data.graph == nullptr || data.x == nullptr || data.labels == nullptr)
    throw std::invalid_argument("run_random_baseline: incomplete data view");
  (void)cfg;
  GalcleanResult result;
  result.labeled = splits.initial;
  std::sort(result.labeled.begin(), result.labeled.end());
  result.graph = *data.graph;

  const std::vector<int> selected = random_select(splits.pool, oracle.budget_remaining(), rng_seed);
  for (int v : selected) oracle.query(v);
  result.labeled.insert(result.labeled.end(), selected.begin(), selected.end());
  std::sort(result.labeled.begin(), result.labeled.end());

  std::vector<int> sorted_selected = selected;
  std::sort(sorted_selected.begin(), sorted_selected.end());
  result.pool.clear();
  std::set_difference(splits.pool.begin(), splits.pool.end(), sorted_selected.begin(), sorted_selected.end(),
                      std::back_inserter(result.pool));

  IterationRecord rec;
  rec.iteration = 1;
  rec.selected = selected;
  rec.labeled_size = static_cast<int>(result.labeled.size());
  record_edge_weight_means(data, result.graph, rec);
  result.trace.iterations.push_back(std::move(rec));
  return result;
}

}  // namespace galclean
