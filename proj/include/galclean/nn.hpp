#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "galclean/dense.hpp"

namespace galclean {

// Two-layer perceptron: out = relu(x * w_in + b_in) * w_out + b_out.
// The same shape backs the representation encoder, the class head, and the
// edge-predictor embedding.
struct MlpParams {
  DenseMatrix w_in;
  std::vector<double> b_in;
  DenseMatrix w_out;
  std::vector<double> b_out;

  static MlpParams init(int d_in, int d_hidden, int d_out, std::mt19937_64& rng);
  static MlpParams zeros_like(const MlpParams& other);

  int in_dim() const { return w_in.rows(); }
  int hidden_dim() const { return w_in.cols(); }
  int out_dim() const { return w_out.cols(); }

  void zero();
  std::vector<std::span<double>> param_views();
  std::vector<std::span<const double>> param_views() const;
};

struct MlpForward {
  DenseMatrix hidden_pre;  // x * w_in + b_in
  DenseMatrix hidden;      // relu(hidden_pre)
  DenseMatrix out;
};

MlpForward mlp_forward(const MlpParams& p, const DenseMatrix& x);

// Accumulates parameter gradients into `grads` (shapes must mirror `p`) and
// returns dL/dx when need_dx is set.
DenseMatrix mlp_backward(const MlpParams& p, const DenseMatrix& x, const MlpForward& fwd, const DenseMatrix& d_out,
                         MlpParams& grads, bool need_dx);

// Row-wise softmax with max-subtraction.
DenseMatrix softmax_rows(const DenseMatrix& m);

// Mean over rows of -log(prob of true class), clipped at 1e-12.
double cross_entropy(const DenseMatrix& probs, std::span<const int> target_class);
// One-hot-rows variant; each target row must contain exactly one 1.
double cross_entropy(const DenseMatrix& probs, const DenseMatrix& one_hot_targets);

// Cosine similarity; 0 by convention when either vector is zero.
double cosine(std::span<const double> u, std::span<const double> v);

struct AdamConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;  // decoupled
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const AdamConfig& cfg, const std::vector<std::span<double>>& params);

  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads);
  long step_count() const { return step_; }

 private:
  AdamConfig cfg_;
  long step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Central finite differences against the supplied analytic gradient; returns
// the max relative error over a sampled subset of coordinates (all of them
// when a tensor has <= max_coords entries).
double grad_check(const std::function<double()>& loss, const std::vector<std::span<double>>& params,
                  const std::vector<std::span<const double>>& analytic, double epsilon, int max_coords = 200,
                  std::uint64_t seed = 0);

}  // namespace galclean
