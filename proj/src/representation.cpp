#include "galclean/representation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "galclean/kernels.hpp"

namespace galclean {

namespace {

constexpr double kLogFloor = 1e-12;

struct ContrastiveScratch {
  DenseMatrix unit;           // row-normalized embeddings
  std::vector<double> norms;  // original row norms
  std::vector<double> num;    // weighted positive mass per anchor
  std::vector<double> den;    // negative mass per anchor
  std::vector<char> active;   // weighted degree > 0
  std::vector<double> terms;  // per-anchor loss terms
};

// Per-anchor numerator/denominator masses and loss terms. Parallel over
// anchors; the final sum stays serial so results do not depend on the
// thread count.
double contrastive_forward(const DenseMatrix& embeds, const WeightedGraph& graph, double tau,
                           const NegativeView& negatives, ContrastiveScratch& s, bool check_nonempty) {
  const int n = embeds.rows();
  kern::normalize_rows(embeds, s.unit, s.norms);
  s.num.assign(n, 0.0);
  s.den.assign(n, 0.0);
  s.active.assign(n, 0);
  s.terms.assign(n, 0.0);

#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    if (graph.weighted_degree(i) <= 0.0) continue;
    s.active[i] = 1;
    auto ei = s.unit.row(i);
    double num = 0.0;
    for (const Neighbor& nb : graph.neighbors(i))
      num += nb.weight * std::exp(kern::dot(ei, s.unit.row(nb.id)) / tau);
    double den = 0.0;
    if (negatives.all) {
      for (int m = 0; m < n; ++m) {
        if (m == i) continue;
        den += std::exp(kern::dot(ei, s.unit.row(m)) / tau);
      }
    } else {
      for (int m : (*negatives.lists)[i]) den += std::exp(kern::dot(ei, s.unit.row(m)) / tau);
    }
    s.num[i] = num;
    s.den[i] = den;
    s.terms[i] = -std::log(std::max(num, kLogFloor)) + std::log(std::max(den, kLogFloor));
  }

  if (check_nonempty && !negatives.all) {
    for (int i = 0; i < n; ++i)
      if (s.active[i] && (*negatives.lists)[i].empty())
        throw std::invalid_argument("contrastive_loss: node " + std::to_string(i) +
                                    " contributes a term but has no negatives");
  }

  double loss = 0.0;
  for (int i = 0; i < n; ++i) loss += s.terms[i];
  return loss;
}

// dL_g/dE accumulated receiver-side: each output row is owned by one thread
// and its additions run in a fixed order, so gradients are bit-reproducible.
void contrastive_backward(const DenseMatrix& embeds, const WeightedGraph& graph, double tau,
                          const NegativeView& negatives, const ContrastiveScratch& s, double scale, DenseMatrix& d_embeds) {
  const int n = embeds.rows();
  const int dim = embeds.cols();

  // Anchors that sampled node r as a negative (inverse of negatives.lists).
  std::vector<std::vector<int>> incoming;
  if (!negatives.all) {
    incoming.assign(n, {});
    for (int a = 0; a < n; ++a) {
      if (!s.active[a]) continue;
      for (int m : (*negatives.lists)[a]) incoming[m].push_back(a);
    }
  }

#pragma omp parallel for schedule(static)
  for (int r = 0; r < n; ++r) {
    if (s.norms[r] == 0.0) continue;  // cosine is flat at a zero row
    auto er = s.unit.row(r);
    std::vector<double> acc(dim, 0.0);
    double scal = 0.0;
    auto take = [&](int other, double coef) {
      auto eo = s.unit.row(other);
      const double c = kern::dot(er, eo);
      for (int k = 0; k < dim; ++k) acc[k] += coef * eo[k];
      scal += coef * c;
    };

    // numerator terms: r as anchor and r as a neighbor of anchor a
    for (const Neighbor& nb : graph.neighbors(r)) {
      const int a = nb.id;
      const double c = kern::dot(er, s.unit.row(a));
      const double sv = std::exp(c / tau);
      double coef = 0.0;
      if (s.active[r] && s.num[r] > kLogFloor) coef -= nb.weight * sv / (tau * s.num[r]);
      if (s.active[a] && s.num[a] > kLogFloor) coef -= nb.weight * sv / (tau * s.num[a]);
      if (coef != 0.0) {
        auto eo = s.unit.row(a);
        for (int k = 0; k < dim; ++k) acc[k] += coef * eo[k];
        scal += coef * c;
      }
    }

    // denominator terms
    if (negatives.all) {
      const bool r_anchor = s.active[r] && s.den[r] > kLogFloor;
      for (int m = 0; m < n; ++m) {
        if (m == r) continue;
        const double c = kern::dot(er, s.unit.row(m));
        const double sv = std::exp(c / tau);
        double coef = 0.0;
        if (r_anchor) coef += sv / (tau * s.den[r]);
        if (s.active[m] && s.den[m] > kLogFloor) coef += sv / (tau * s.den[m]);
        if (coef != 0.0) {
          auto eo = s.unit.row(m);
          for (int k = 0; k < dim; ++k) acc[k] += coef * eo[k];
          scal += coef * c;
        }
      }
    } else {
      if (s.active[r] && s.den[r] > kLogFloor)
        for (int m : (*negatives.lists)[r]) take(m, std::exp(kern::dot(er, s.unit.row(m)) / tau) / (tau * s.den[r]));
      for (int a : incoming[r])
        if (s.den[a] > kLogFloor) take(a, std::exp(kern::dot(er, s.unit.row(a)) / tau) / (tau * s.den[a]));
    }

    // chain through the row normalization: d cos/dE_r = (unit_j - c * unit_r) / ||E_r||
    auto dst = d_embeds.row(r);
    for (int k = 0; k < dim; ++k) dst[k] += scale * (acc[k] - scal * er[k]) / s.norms[r];
  }
}

}  // namespace

ReprModel ReprModel::init(int feature_dim, int num_classes, const ReprConfig& cfg, std::uint64_t seed) {
  ReprModel m;
  auto rng1 = make_rng(seed, 0x6d6c7031ULL);
  auto rng2 = make_rng(seed, 0x6d6c7032ULL);
  m.mlp1 = MlpParams::init(feature_dim, cfg.hidden_dim, cfg.embed_dim, rng1);
  m.mlp2 = MlpParams::init(cfg.embed_dim, cfg.hidden_dim, num_classes, rng2);
  return m;
}

ReprModel ReprModel::zeros_like(const ReprModel& other) {
  return {MlpParams::zeros_like(other.mlp1), MlpParams::zeros_like(other.mlp2)};
}

std::vector<std::span<double>> ReprModel::param_views() {
  auto v1 = mlp1.param_views();
  auto v2 = mlp2.param_views();
  v1.insert(v1.end(), v2.begin(), v2.end());
  return v1;
}

std::vector<std::span<const double>> ReprModel::param_views() const {
  auto v1 = mlp1.param_views();
  auto v2 = mlp2.param_views();
  v1.insert(v1.end(), v2.begin(), v2.end());
  return v1;
}

double classification_loss(const ReprModel& model, const DenseMatrix& x, std::span<const int> labeled,
                           const LabelStore& labels) {
  if (labeled.empty()) throw std::invalid_argument("classification_loss: empty labeled set");
  auto f1 = mlp_forward(model.mlp1, x);
  auto f2 = mlp_forward(model.mlp2, f1.out);
  DenseMatrix sub(static_cast<int>(labeled.size()), f2.out.cols());
  std::vector<int> targets(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    auto src = f2.out.row(labeled[i]);
    auto dst = sub.row(static_cast<int>(i));
    for (int j = 0; j < sub.cols(); ++j) dst[j] = src[j];
    targets[i] = labels.label(labeled[i]);
  }
  return cross_entropy(softmax_rows(sub), targets);
}

double contrastive_loss(const DenseMatrix& embeds, const WeightedGraph& graph, double tau,
                        const std::vector<std::vector<int>>& negatives) {
  if (tau <= 0.0) throw std::invalid_argument("contrastive_loss: tau must be > 0");
  if (embeds.rows() != graph.num_nodes()) throw std::invalid_argument("contrastive_loss: embed/graph size mismatch");
  NegativeView view{false, &negatives};
  ContrastiveScratch scratch;
  return contrastive_forward(embeds, graph, tau, view, scratch, true);
}

double contrastive_loss_and_grad(const DenseMatrix& embeds, const WeightedGraph& graph, double tau,
                                 const NegativeView& negatives, DenseMatrix& d_embeds) {
  ContrastiveScratch scratch;
  const double loss = contrastive_forward(embeds, graph, tau, negatives, scratch, true);
  contrastive_backward(embeds, graph, tau, negatives, scratch, 1.0, d_embeds);
  return loss;
}

double repr_loss_and_grad(const ReprModel& model, const DenseMatrix& x, const WeightedGraph& graph,
                          std::span<const int> labeled, const LabelStore& labels, double alpha, double tau,
                          const NegativeView& negatives, ReprModel* grads) {
  if (labeled.empty()) throw std::invalid_argument("repr_loss_and_grad: empty labeled set");
  auto f1 = mlp_forward(model.mlp1, x);
  const DenseMatrix& embeds = f1.out;
  auto f2 = mlp_forward(model.mlp2, embeds);

  // label term over the labeled rows
  const int nl = static_cast<int>(labeled.size());
  DenseMatrix sub(nl, f2.out.cols());
  std::vector<int> targets(labeled.size());
  for (int i = 0; i < nl; ++i) {
    auto src = f2.out.row(labeled[i]);
    auto dst = sub.row(i);
    for (int j = 0; j < sub.cols(); ++j) dst[j] = src[j];
    targets[i] = labels.label(labeled[i]);
  }
  DenseMatrix probs = softmax_rows(sub);
  double loss = cross_entropy(probs, targets);

  ContrastiveScratch scratch;
  double graph_loss = 0.0;
  if (alpha != 0.0) {
    graph_loss = contrastive_forward(embeds, graph, tau, negatives, scratch, false);
    loss += alpha * graph_loss;
  }

  if (grads != nullptr) {
    // d loss / d logits = (softmax - onehot) / |labeled| scattered to rows
    DenseMatrix d_logits(f2.out.rows(), f2.out.cols());
    for (int i = 0; i < nl; ++i) {
      auto dst = d_logits.row(labeled[i]);
      auto p = probs.row(i);
      for (int j = 0; j < d_logits.cols(); ++j) dst[j] += (p[j] - (j == targets[i] ? 1.0 : 0.0)) / nl;
    }
    DenseMatrix d_embeds = mlp_backward(model.mlp2, embeds, f2, d_logits, grads->mlp2, true);
    if (alpha != 0.0) contrastive_backward(embeds, graph, tau, negatives, scratch, alpha, d_embeds);
    mlp_backward(model.mlp1, x, f1, d_embeds, grads->mlp1, false);
  }
  return loss;
}

ReprResult train_representation(const DenseMatrix& x, const WeightedGraph& graph, std::span<const int> labeled,
                                const LabelStore& labels, const ReprConfig& cfg, const ReprModel* init,
                                std::uint64_t rng_seed) {
  if (labeled.empty()) throw std::invalid_argument("train_representation: empty labeled set");
  if (x.rows() != graph.num_nodes()) throw std::invalid_argument("train_representation: feature/graph size mismatch");
  if (cfg.tau <= 0.0) throw std::invalid_argument("train_representation: tau must be > 0");
  if (cfg.epochs < 0) throw std::invalid_argument("train_representation: negative epochs");

  ReprResult result;
  result.model = init != nullptr ? *init : ReprModel::init(x.cols(), labels.num_classes, cfg, rng_seed);

  const int n = x.rows();
  const bool use_all = n <= cfg.full_negative_limit;
  std::vector<std::vector<int>> sampled;
  NegativeView view;
  if (!use_all) {
    sampled.assign(n, {});
    view = {false, &sampled};
  }

  Adam opt(cfg.opt, result.model.param_views());
  auto neg_rng = make_rng(rng_seed, 0x6e656773ULL);
  std::uniform_int_distribution<int> pick(0, n - 1);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.alpha != 0.0 && !use_all) {
      // fresh uniform negatives each epoch (anchor excluded)
      for (int v = 0; v < n; ++v) {
        auto& list = sampled[v];
        list.clear();
        while (static_cast<int>(list.size()) < cfg.negatives_per_node) {
          const int m = pick(neg_rng);
          if (m != v) list.push_back(m);
        }
      }
    }
    ReprModel grads = ReprModel::zeros_like(result.model);
    const double loss = repr_loss_and_grad(result.model, x, graph, labeled, labels, cfg.alpha, cfg.tau, view, &grads);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_representation: non-finite loss at epoch " + std::to_string(epoch));
    result.loss_curve.push_back(loss);
    auto params = result.model.param_views();
    auto gviews = std::as_const(grads).param_views();
    opt.step(params, gviews);
  }

  auto f1 = mlp_forward(result.model.mlp1, x);
  auto f2 = mlp_forward(result.model.mlp2, f1.out);
  if (!f1.out.all_finite()) throw std::runtime_error("train_representation: non-finite embeddings");
  result.embeddings = std::move(f1.out);
  result.logits = std::move(f2.out);
  return result;
}

}  // namespace galclean
