#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "galclean/graph.hpp"
#include "galclean/nn.hpp"

namespace galclean {

enum class LabelSource : std::uint8_t { model = 0, oracle = 1 };

struct PseudoLabels {
  std::vector<int> label;
  std::vector<double> confidence;
  std::vector<LabelSource> source;
};

// Argmax of the softmaxed logits (ties to the lowest class id); labeled
// nodes are overridden with their oracle label at confidence 1.
PseudoLabels pseudo_labels(const DenseMatrix& logits, std::span<const int> labeled, const LabelStore& labels);

struct EdgeTrainingSet {
  std::vector<std::pair<int, int>> positives;  // same pseudo label, both endpoints confident
  std::vector<std::pair<int, int>> negatives;  // different pseudo labels, no confidence requirement
};

EdgeTrainingSet build_edge_training_set(const WeightedGraph& original, const PseudoLabels& pl, double kappa);

struct EdgePredictor {
  MlpParams mlp3;  // raw features -> score embedding z
};

// sigma(z_i . z_j); exactly symmetric in (i, j).
double edge_probability(const EdgePredictor& ep, const DenseMatrix& x, int i, int j);

// z rows for all nodes; used to batch edge inference.
DenseMatrix edge_embeddings(const EdgePredictor& ep, const DenseMatrix& x);

struct EdgeTrainOptions {
  int hidden_dim = 64;
  int z_dim = 64;
  AdamConfig opt;
};

// Loss = -mean over positives of log p - mean over negatives of log(1-p);
// per-set means keep the heavily imbalanced negative set from drowning the
// positives. Gradient accumulates into `grads` when non-null.
double edge_loss_and_grad(const EdgePredictor& ep, const DenseMatrix& x, const EdgeTrainingSet& ts,
                          MlpParams* grads);

struct EdgeTrainResult {
  EdgePredictor predictor;
  std::vector<double> loss_curve;
};

// Throws std::invalid_argument when either side of the training set is
// empty; the driver treats that as "skip cleaning this iteration".
EdgeTrainResult train_edge_predictor(const DenseMatrix& x, const EdgeTrainingSet& ts, int epochs,
                                     std::uint64_t rng_seed, const EdgePredictor* init,
                                     const EdgeTrainOptions& options = {});

// Every original edge reweighted to p(e clean); non-edges stay absent.
WeightedGraph reweight_graph(const WeightedGraph& original, const EdgePredictor& ep, const DenseMatrix& x);

// Drops edges whose endpoint feature similarity falls below the threshold.
// Jaccard on binarized features when every entry is 0/1, cosine otherwise.
WeightedGraph jaccard_preclean(const WeightedGraph& g, const DenseMatrix& x, double threshold);

}  // namespace galclean
