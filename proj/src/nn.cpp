#include "galclean/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "galclean/kernels.hpp"

namespace galclean {

MlpParams MlpParams::init(int d_in, int d_hidden, int d_out, std::mt19937_64& rng) {
  MlpParams p;
  p.w_in = gaussian_matrix(d_in, d_hidden, std::sqrt(2.0 / (d_in + d_hidden)), rng);
  // small positive biases keep freshly initialized relu units off the kink
  // and keep fully-dead rows away from the zero-vector cosine singularity
  p.b_in.assign(d_hidden, 0.01);
  p.w_out = gaussian_matrix(d_hidden, d_out, std::sqrt(2.0 / (d_hidden + d_out)), rng);
  p.b_out.assign(d_out, 0.01);
  return p;
}

MlpParams MlpParams::zeros_like(const MlpParams& other) {
  MlpParams p;
  p.w_in = DenseMatrix(other.w_in.rows(), other.w_in.cols());
  p.b_in.assign(other.b_in.size(), 0.0);
  p.w_out = DenseMatrix(other.w_out.rows(), other.w_out.cols());
  p.b_out.assign(other.b_out.size(), 0.0);
  return p;
}

void MlpParams::zero() {
  w_in.fill(0.0);
  std::fill(b_in.begin(), b_in.end(), 0.0);
  w_out.fill(0.0);
  std::fill(b_out.begin(), b_out.end(), 0.0);
}

std::vector<std::span<double>> MlpParams::param_views() {
  return {w_in.data(), {b_in.data(), b_in.size()}, w_out.data(), {b_out.data(), b_out.size()}};
}

std::vector<std::span<const double>> MlpParams::param_views() const {
  return {w_in.data(), {b_in.data(), b_in.size()}, w_out.data(), {b_out.data(), b_out.size()}};
}

MlpForward mlp_forward(const MlpParams& p, const DenseMatrix& x) {
  if (x.cols() != p.w_in.rows()) throw std::invalid_argument("mlp_forward: input dim mismatch");
  MlpForward f;
  kern::matmul(x, p.w_in, f.hidden_pre);
  kern::add_row_vector(f.hidden_pre, p.b_in);
  f.hidden = f.hidden_pre;
  for (double& v : f.hidden.data()) v = v > 0.0 ? v : 0.0;
  kern::matmul(f.hidden, p.w_out, f.out);
  kern::add_row_vector(f.out, p.b_out);
  return f;
}

DenseMatrix mlp_backward(const MlpParams& p, const DenseMatrix& x, const MlpForward& fwd, const DenseMatrix& d_out,
                         MlpParams& grads, bool need_dx) {
  DenseMatrix dw;
  kern::matmul_at_b(fwd.hidden, d_out, dw);
  grads.w_out.add_scaled(dw, 1.0);
  std::vector<double> db(p.b_out.size());
  kern::colsum(d_out, db);
  for (std::size_t i = 0; i < db.size(); ++i) grads.b_out[i] += db[i];

  DenseMatrix d_hidden;
  kern::matmul_a_bt(d_out, p.w_out, d_hidden);
  // relu mask from the pre-activation
  for (int r = 0; r < d_hidden.rows(); ++r) {
    auto dh = d_hidden.row(r);
    auto pre = fwd.hidden_pre.row(r);
    for (int c = 0; c < d_hidden.cols(); ++c)
      if (pre[c] <= 0.0) dh[c] = 0.0;
  }
  kern::matmul_at_b(x, d_hidden, dw);
  grads.w_in.add_scaled(dw, 1.0);
  db.assign(p.b_in.size(), 0.0);
  kern::colsum(d_hidden, db);
  for (std::size_t i = 0; i < db.size(); ++i) grads.b_in[i] += db[i];

  DenseMatrix dx;
  if (need_dx) kern::matmul_a_bt(d_hidden, p.w_in, dx);
  return dx;
}

DenseMatrix softmax_rows(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  const int rows = m.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    auto src = m.row(i);
    auto dst = out.row(i);
    double mx = src[0];
    for (int j = 1; j < m.cols(); ++j) mx = std::max(mx, src[j]);
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      dst[j] = std::exp(src[j] - mx);
      sum += dst[j];
    }
    for (int j = 0; j < m.cols(); ++j) dst[j] /= sum;
  }
  return out;
}

double cross_entropy(const DenseMatrix& probs, std::span<const int> target_class) {
  if (probs.rows() != static_cast<int>(target_class.size()))
    throw std::invalid_argument("cross_entropy: row count mismatch");
  if (probs.rows() == 0) throw std::invalid_argument("cross_entropy: empty input");
  double total = 0.0;
  for (int i = 0; i < probs.rows(); ++i) {
    const int t = target_class[i];
    if (t < 0 || t >= probs.cols()) throw std::invalid_argument("cross_entropy: target out of range");
    total += -std::log(std::max(probs(i, t), 1e-12));
  }
  return total / probs.rows();
}

double cross_entropy(const DenseMatrix& probs, const DenseMatrix& one_hot_targets) {
  if (!probs.same_shape(one_hot_targets)) throw std::invalid_argument("cross_entropy: shape mismatch");
  std::vector<int> targets(probs.rows());
  for (int i = 0; i < probs.rows(); ++i) {
    int t = -1;
    for (int j = 0; j < probs.cols(); ++j)
      if (one_hot_targets(i, j) == 1.0) {
        t = j;
        break;
      }
    if (t < 0) throw std::invalid_argument("cross_entropy: target row is not one-hot");
    targets[i] = t;
  }
  return cross_entropy(probs, targets);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: size mismatch");
  const double nu = std::sqrt(kern::dot(u, u));
  const double nv = std::sqrt(kern::dot(v, v));
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return kern::dot(u, v) / (nu * nv);
}

Adam::Adam(const AdamConfig& cfg, const std::vector<std::span<double>>& params) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw std::invalid_argument("Adam::step: tensor count mismatch");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    if (p.size() != m_[t].size() || g.size() != m_[t].size()) throw std::invalid_argument("Adam::step: shape mismatch");
    auto& m = m_[t];
    auto& v = v_[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p[i]);
    }
  }
}

double grad_check(const std::function<double()>& loss, const std::vector<std::span<double>>& params,
                  const std::vector<std::span<const double>>& analytic, double epsilon, int max_coords,
                  std::uint64_t seed) {
  if (params.size() != analytic.size()) throw std::invalid_argument("grad_check: tensor count mismatch");
  auto rng = make_rng(seed, 0x67636865636bULL);
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto a = analytic[t];
    std::vector<std::size_t> coords;
    if (static_cast<int>(p.size()) <= max_coords) {
      coords.resize(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) coords[i] = i;
    } else {
      std::uniform_int_distribution<std::size_t> d(0, p.size() - 1);
      for (int i = 0; i < max_coords; ++i) coords.push_back(d(rng));
    }
    for (std::size_t i : coords) {
      const double saved = p[i];
      p[i] = saved + epsilon;
      const double up = loss();
      p[i] = saved - epsilon;
      const double down = loss();
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double err = std::abs(numeric - a[i]) / std::max({1.0, std::abs(numeric), std::abs(a[i])});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace galclean
