#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "galclean/graph.hpp"
#include "galclean/nn.hpp"

namespace galclean {

struct ReprConfig {
  double alpha = 1.0;  // balance between label and graph terms
  double tau = 0.5;    // contrastive temperature
  // Negatives per anchor when sampling; every other node serves as a
  // negative while N <= full_negative_limit.
  int negatives_per_node = 256;
  int full_negative_limit = 5000;
  int epochs = 200;
  int hidden_dim = 64;
  int embed_dim = 64;
  bool warm_start = true;
  AdamConfig opt;
};

// mlp1: features -> embeddings; mlp2: embeddings -> class logits.
struct ReprModel {
  MlpParams mlp1;
  MlpParams mlp2;

  static ReprModel init(int feature_dim, int num_classes, const ReprConfig& cfg, std::uint64_t seed);
  static ReprModel zeros_like(const ReprModel& other);
  std::vector<std::span<double>> param_views();
  std::vector<std::span<const double>> param_views() const;
};

// Which nodes serve as negatives for each anchor. `all` means every node
// except the anchor itself; otherwise `lists[v]` holds the sampled negatives
// (anchor excluded, duplicates count twice).
struct NegativeView {
  bool all = true;
  const std::vector<std::vector<int>>* lists = nullptr;
};

// Mean cross-entropy of the model's softmaxed logits over the labeled nodes.
double classification_loss(const ReprModel& model, const DenseMatrix& x, std::span<const int> labeled,
                           const LabelStore& labels);

// Weighted neighborhood contrastive loss. Nodes with zero weighted degree
// are skipped; every contributing node must have a non-empty negative set.
double contrastive_loss(const DenseMatrix& embeds, const WeightedGraph& graph, double tau,
                        const std::vector<std::vector<int>>& negatives);

// Contrastive loss plus its gradient with respect to the embeddings,
// accumulated into d_embeds (shape N x embed_dim).
double contrastive_loss_and_grad(const DenseMatrix& embeds, const WeightedGraph& graph, double tau,
                                 const NegativeView& negatives, DenseMatrix& d_embeds);

// Combined loss L = L_l + alpha * L_g at the given parameters. When `grads`
// is non-null the full parameter gradient is accumulated into it. Exposed
// separately from training so finite-difference checks can drive it.
double repr_loss_and_grad(const ReprModel& model, const DenseMatrix& x, const WeightedGraph& graph,
                          std::span<const int> labeled, const LabelStore& labels, double alpha, double tau,
                          const NegativeView& negatives, ReprModel* grads);

struct ReprResult {
  ReprModel model;
  DenseMatrix embeddings;  // N x embed_dim
  DenseMatrix logits;      // N x C
  std::vector<double> loss_curve;
};

ReprResult train_representation(const DenseMatrix& x, const WeightedGraph& graph, std::span<const int> labeled,
                                const LabelStore& labels, const ReprConfig& cfg, const ReprModel* init,
                                std::uint64_t rng_seed);

}  // namespace galclean
