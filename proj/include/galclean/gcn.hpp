#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "galclean/graph.hpp"
#include "galclean/kernels.hpp"
#include "galclean/nn.hpp"

namespace galclean {

struct GcnConfig {
  int hidden_dim = 16;  // 128 for the wide datasets
  int max_epochs = 300;
  int patience = 30;  // early stopping on validation accuracy
  AdamConfig opt;
};

// Two-layer GCN, no biases: softmax(A_hat relu(A_hat X W0) W1).
struct GcnParams {
  DenseMatrix w0;
  DenseMatrix w1;

  static GcnParams init(int feature_dim, int hidden_dim, int num_classes, std::uint64_t seed);
  static GcnParams zeros_like(const GcnParams& other);
  std::vector<std::span<double>> param_views();
  std::vector<std::span<const double>> param_views() const;
};

// D^{-1/2} (A + I) D^{-1/2} over weighted degrees; the self-loop keeps every
// degree >= 1.
kern::SparseMatrix normalize_adjacency(const WeightedGraph& g);

DenseMatrix gcn_logits(const GcnParams& params, const kern::SparseMatrix& a_hat, const DenseMatrix& x);

// Cross-entropy over the labeled nodes; gradient accumulated when non-null.
double gcn_loss_and_grad(const GcnParams& params, const kern::SparseMatrix& a_hat, const DenseMatrix& x,
                         std::span<const int> labeled, const LabelStore& labels, GcnParams* grads);

// Full-batch training with early stopping on validation accuracy (best
// parameters returned). An empty valid set disables early stopping.
GcnParams train_gcn(const WeightedGraph& g, const DenseMatrix& x, std::span<const int> labeled,
                    const LabelStore& labels, std::span<const int> valid, const GcnConfig& cfg, std::uint64_t seed);

// Fraction of argmax predictions matching the ground truth.
double evaluate(const GcnParams& params, const WeightedGraph& g, const DenseMatrix& x, std::span<const int> nodes,
                const LabelStore& labels);

}  // namespace galclean
