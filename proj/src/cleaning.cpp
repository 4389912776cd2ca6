#include "galclean/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "galclean/kernels.hpp"

namespace galclean {

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

PseudoLabels pseudo_labels(const DenseMatrix& logits, std::span<const int> labeled, const LabelStore& labels) {
  if (logits.rows() != labels.num_nodes()) throw std::invalid_argument("pseudo_labels: logit row count != N");
  const int n = logits.rows();
  PseudoLabels pl;
  pl.label.resize(n);
  pl.confidence.resize(n);
  pl.source.assign(n, LabelSource::model);
  DenseMatrix probs = softmax_rows(logits);
  for (int v = 0; v < n; ++v) {
    int best = 0;
    for (int c = 1; c < probs.cols(); ++c)
      if (probs(v, c) > probs(v, best)) best = c;
    pl.label[v] = best;
    pl.confidence[v] = probs(v, best);
  }
  for (int v : labeled) {
    pl.label[v] = labels.label(v);
    pl.confidence[v] = 1.0;
    pl.source[v] = LabelSource::oracle;
  }
  return pl;
}

EdgeTrainingSet build_edge_training_set(const WeightedGraph& original, const PseudoLabels& pl, double kappa) {
  EdgeTrainingSet ts;
  for (const Edge& e : original.edge_list()) {
    if (pl.label[e.u] != pl.label[e.v]) {
      ts.negatives.emplace_back(e.u, e.v);
    } else if (pl.confidence[e.u] >= kappa && pl.confidence[e.v] >= kappa) {
      ts.positives.emplace_back(e.u, e.v);
    }
  }
  return ts;
}

DenseMatrix edge_embeddings(const EdgePredictor& ep, const DenseMatrix& x) { return mlp_forward(ep.mlp3, x).out; }

double edge_probability(const EdgePredictor& ep, const DenseMatrix& x, int i, int j) {
  DenseMatrix xi(1, x.cols());
  DenseMatrix xj(1, x.cols());
  for (int c = 0; c < x.cols(); ++c) {
    xi(0, c) = x(i, c);
    xj(0, c) = x(j, c);
  }
  const DenseMatrix zi = mlp_forward(ep.mlp3, xi).out;
  const DenseMatrix zj = mlp_forward(ep.mlp3, xj).out;
  return sigmoid(kern::dot(zi.row(0), zj.row(0)));
}

double edge_loss_and_grad(const EdgePredictor& ep, const DenseMatrix& x, const EdgeTrainingSet& ts, MlpParams* grads) {
  auto fwd = mlp_forward(ep.mlp3, x);
  const DenseMatrix& z = fwd.out;

  const double wp = ts.positives.empty() ? 0.0 : 1.0 / static_cast<double>(ts.positives.size());
  const double wn = ts.negatives.empty() ? 0.0 : 1.0 / static_cast<double>(ts.negatives.size());

  const std::size_t np = ts.positives.size();
  const std::size_t nn = ts.negatives.size();
  std::vector<double> loss_terms(np + nn, 0.0);
  const std::int64_t total = static_cast<std::int64_t>(np + nn);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < total; ++t) {
    const bool pos = t < static_cast<std::int64_t>(np);
    const auto [i, j] = pos ? ts.positives[t] : ts.negatives[t - np];
    const double p = sigmoid(kern::dot(z.row(i), z.row(j)));
    loss_terms[t] = pos ? -wp * std::log(std::max(p, 1e-12)) : -wn * std::log(std::max(1.0 - p, 1e-12));
  }
  double loss = 0.0;
  for (double v : loss_terms) loss += v;

  if (grads != nullptr) {
    // dL/d(z_i . z_j) = w * (p - target); accumulate dZ serially in edge
    // order, then push through the MLP.
    DenseMatrix dz(z.rows(), z.cols());
    auto accumulate = [&](const std::pair<int, int>& e, double target, double w) {
      const auto [i, j] = e;
      const double p = sigmoid(kern::dot(z.row(i), z.row(j)));
      const double coef = w * (p - target);
      auto zi = z.row(i);
      auto zj = z.row(j);
      auto di = dz.row(i);
      auto dj = dz.row(j);
      for (int c = 0; c < z.cols(); ++c) {
        di[c] += coef * zj[c];
        dj[c] += coef * zi[c];
      }
    };
    for (const auto& e : ts.positives) accumulate(e, 1.0, wp);
    for (const auto& e : ts.negatives) accumulate(e, 0.0, wn);
    mlp_backward(ep.mlp3, x, fwd, dz, *grads, false);
  }
  return loss;
}

EdgeTrainResult train_edge_predictor(const DenseMatrix& x, const EdgeTrainingSet& ts, int epochs,
                                     std::uint64_t rng_seed, const EdgePredictor* init, const EdgeTrainOptions& options) {
  if (ts.positives.empty()) throw std::invalid_argument("train_edge_predictor: empty positive set");
  if (ts.negatives.empty()) throw std::invalid_argument("train_edge_predictor: empty negative set");
  if (epochs < 0) throw std::invalid_argument("train_edge_predictor: negative epochs");

  EdgeTrainResult result;
  if (init != nullptr) {
    result.predictor = *init;
  } else {
    auto rng = make_rng(rng_seed, 0x6d6c7033ULL);
    result.predictor.mlp3 = MlpParams::init(x.cols(), options.hidden_dim, options.z_dim, rng);
  }

  Adam opt(options.opt, result.predictor.mlp3.param_views());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    MlpParams grads = MlpParams::zeros_like(result.predictor.mlp3);
    const double loss = edge_loss_and_grad(result.predictor, x, ts, &grads);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_edge_predictor: non-finite loss at epoch " + std::to_string(epoch));
    result.loss_curve.push_back(loss);
    opt.step(result.predictor.mlp3.param_views(), std::as_const(grads).param_views());
  }
  return result;
}

WeightedGraph reweight_graph(const WeightedGraph& original, const EdgePredictor& ep, const DenseMatrix& x) {
  const DenseMatrix z = edge_embeddings(ep, x);
  const auto& edges = original.edge_list();
  std::vector<double> weights(edges.size(), 0.0);
  const std::int64_t m = static_cast<std::int64_t>(edges.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < m; ++e) weights[e] = sigmoid(kern::dot(z.row(edges[e].u), z.row(edges[e].v)));
  return original.with_weights(weights);
}

WeightedGraph jaccard_preclean(const WeightedGraph& g, const DenseMatrix& x, double threshold) {
  bool binary = true;
  for (double v : x.data())
    if (v != 0.0 && v != 1.0) {
      binary = false;
      break;
    }
  auto similarity = [&](int u, int v) {
    if (!binary) return cosine(x.row(u), x.row(v));
    int inter = 0, uni = 0;
    auto xu = x.row(u);
    auto xv = x.row(v);
    for (int c = 0; c < x.cols(); ++c) {
      const bool a = xu[c] != 0.0, b = xv[c] != 0.0;
      inter += a && b;
      uni += a || b;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
  };
  GraphBuilder builder(g.num_nodes());
  for (const Edge& e : g.edge_list())
    if (similarity(e.u, e.v) >= threshold) builder.add_edge(e.u, e.v, e.weight);
  return builder.build();
}

}  // namespace galclean
