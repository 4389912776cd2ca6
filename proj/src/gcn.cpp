#include "galclean/gcn.hpp"

#include <cmath>
#include <stdexcept>

namespace galclean {

GcnParams GcnParams::init(int feature_dim, int hidden_dim, int num_classes, std::uint64_t seed) {
  GcnParams p;
  auto rng = make_rng(seed, 0x67636eULL);  // "gcn" stream
  p.w0 = gaussian_matrix(feature_dim, hidden_dim, std::sqrt(2.0 / (feature_dim + hidden_dim)), rng);
  p.w1 = gaussian_matrix(hidden_dim, num_classes, std::sqrt(2.0 / (hidden_dim + num_classes)), rng);
  return p;
}

GcnParams GcnParams::zeros_like(const GcnParams& other) {
  GcnParams p;
  p.w0 = DenseMatrix(other.w0.rows(), other.w0.cols());
  p.w1 = DenseMatrix(other.w1.rows(), other.w1.cols());
  return p;
}

std::vector<std::span<double>> GcnParams::param_views() { return {w0.data(), w1.data()}; }
std::vector<std::span<const double>> GcnParams::param_views() const { return {w0.data(), w1.data()}; }

kern::SparseMatrix normalize_adjacency(const WeightedGraph& g) {
  const int n = g.num_nodes();
  std::vector<double> inv_sqrt_deg(n);
  for (int v = 0; v < n; ++v) inv_sqrt_deg[v] = 1.0 / std::sqrt(g.weighted_degree(v) + 1.0);  // + self-loop

  kern::SparseMatrix s;
  s.n = n;
  s.row_ptr.resize(n + 1);
  s.row_ptr[0] = 0;
  for (int v = 0; v < n; ++v) s.row_ptr[v + 1] = s.row_ptr[v] + static_cast<int>(g.neighbors(v).size()) + 1;
  s.col.resize(s.row_ptr[n]);
  s.val.resize(s.row_ptr[n]);
  for (int v = 0; v < n; ++v) {
    int p = s.row_ptr[v];
    bool self_written = false;
    auto write = [&](int col, double val) {
      s.col[p] = col;
      s.val[p] = val;
      ++p;
    };
    for (const Neighbor& nb : g.neighbors(v)) {
      if (!self_written && nb.id > v) {
        write(v, inv_sqrt_deg[v] * inv_sqrt_deg[v]);
        self_written = true;
      }
      write(nb.id, nb.weight * inv_sqrt_deg[v] * inv_sqrt_deg[nb.id]);
    }
    if (!self_written) write(v, inv_sqrt_deg[v] * inv_sqrt_deg[v]);
  }
  return s;
}

namespace {

struct GcnForward {
  DenseMatrix ax;        // A_hat X
  DenseMatrix pre;       // A_hat X W0
  DenseMatrix hidden;    // relu(pre)
  DenseMatrix ah;        // A_hat hidden
  DenseMatrix logits;    // A_hat hidden W1
};

GcnForward gcn_forward(const GcnParams& params, const kern::SparseMatrix& a_hat, const DenseMatrix& x) {
  GcnForward f;
  kern::spmm(a_hat, x, f.ax);
  kern::matmul(f.ax, params.w0, f.pre);
  f.hidden = f.pre;
  for (double& v : f.hidden.data()) v = v > 0.0 ? v : 0.0;
  kern::spmm(a_hat, f.hidden, f.ah);
  kern::matmul(f.ah, params.w1, f.logits);
  return f;
}

}  // namespace

DenseMatrix gcn_logits(const GcnParams& params, const kern::SparseMatrix& a_hat, const DenseMatrix& x) {
  return gcn_forward(params, a_hat, x).logits;
}

double gcn_loss_and_grad(const GcnParams& params, const kern::SparseMatrix& a_hat, const DenseMatrix& x,
                         std::span<const int> labeled, const LabelStore& labels, GcnParams* grads) {
  if (labeled.empty()) throw std::invalid_argument("gcn_loss_and_grad: empty labeled set");
  GcnForward f = gcn_forward(params, a_hat, x);
  const int nl = static_cast<int>(labeled.size());
  DenseMatrix sub(nl, f.logits.cols());
  std::vector<int> targets(labeled.size());
  for (int i = 0; i < nl; ++i) {
    auto src = f.logits.row(labeled[i]);
    auto dst = sub.row(i);
    for (int j = 0; j < sub.cols(); ++j) dst[j] = src[j];
    targets[i] = labels.label(labeled[i]);
  }
  DenseMatrix probs = softmax_rows(sub);
  const double loss = cross_entropy(probs, targets);

  if (grads != nullptr) {
    DenseMatrix d_logits(f.logits.rows(), f.logits.cols());
    for (int i = 0; i < nl; ++i) {
      auto dst = d_logits.row(labeled[i]);
      auto p = probs.row(i);
      for (int j = 0; j < d_logits.cols(); ++j) dst[j] += (p[j] - (j == targets[i] ? 1.0 : 0.0)) / nl;
    }
    DenseMatrix dw1;
    kern::matmul_at_b(f.ah, d_logits, dw1);
    grads->w1.add_scaled(dw1, 1.0);
    DenseMatrix d_ah;
    kern::matmul_a_bt(d_logits, params.w1, d_ah);
    DenseMatrix d_hidden;
    kern::spmm(a_hat, d_ah, d_hidden);  // A_hat is symmetric
    for (int r = 0; r < d_hidden.rows(); ++r) {
      auto dh = d_hidden.row(r);
      auto pre = f.pre.row(r);
      for (int c = 0; c < d_hidden.cols(); ++c)
        if (pre[c] <= 0.0) dh[c] = 0.0;
    }
    DenseMatrix dw0;
    kern::matmul_at_b(f.ax, d_hidden, dw0);
    grads->w0.add_scaled(dw0, 1.0);
  }
  return loss;
}

GcnParams train_gcn(const WeightedGraph& g, const DenseMatrix& x, std::span<const int> labeled,
                    const LabelStore& labels, std::span<const int> valid, const GcnConfig& cfg, std::uint64_t seed) {
  if (labeled.empty()) throw std::invalid_argument("train_gcn: empty labeled set");
  const kern::SparseMatrix a_hat = normalize_adjacency(g);
  GcnParams params = GcnParams::init(x.cols(), cfg.hidden_dim, labels.num_classes, seed);
  GcnParams best = params;
  double best_valid_acc = -1.0;
  int since_best = 0;

  Adam opt(cfg.opt, params.param_views());
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    GcnParams grads = GcnParams::zeros_like(params);
    const double loss = gcn_loss_and_grad(params, a_hat, x, labeled, labels, &grads);
    if (!std::isfinite(loss)) throw std::runtime_error("train_gcn: non-finite loss at epoch " + std::to_string(epoch));
    opt.step(params.param_views(), std::as_const(grads).param_views());

    if (!valid.empty()) {
      DenseMatrix logits = gcn_logits(params, a_hat, x);
      int hits = 0;
      for (int v : valid) {
        int arg = 0;
        for (int c = 1; c < logits.cols(); ++c)
          if (logits(v, c) > logits(v, arg)) arg = c;
        hits += arg == labels.label(v);
      }
      const double acc = static_cast<double>(hits) / static_cast<double>(valid.size());
      if (acc > best_valid_acc) {
        best_valid_acc = acc;
        best = params;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }
  return valid.empty() ? params : best;
}

double evaluate(const GcnParams& params, const WeightedGraph& g, const DenseMatrix& x, std::span<const int> nodes,
                const LabelStore& labels) {
  if (nodes.empty()) throw std::invalid_argument("evaluate: empty node set");
  const kern::SparseMatrix a_hat = normalize_adjacency(g);
  const DenseMatrix logits = gcn_logits(params, a_hat, x);
  int hits = 0;
  for (int v : nodes) {
    int arg = 0;
    for (int c = 1; c < logits.cols(); ++c)
      if (logits(v, c) > logits(v, arg)) arg = c;
    hits += arg == labels.label(v);
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

}  // namespace galclean
