#include "galclean/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace galclean::kern {

namespace {

void check_mul(const DenseMatrix& a, const DenseMatrix& b, int ar, int ac, int br) {
  if (ac != br) throw std::invalid_argument("matmul: inner dimension mismatch");
  (void)a;
  (void)b;
  (void)ar;
}

// One output row of C = A * B. k-inner order is the contract: it fixes the
// reduction order so threaded and serial runs agree bitwise.
inline void matmul_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, int i) {
  const int n = b.cols(), kk = a.cols();
  std::span<double> dst = out.row(i);
  for (int j = 0; j < n; ++j) dst[j] = 0.0;
  std::span<const double> ai = a.row(i);
  for (int k = 0; k < kk; ++k) {
    const double av = ai[k];
    if (av == 0.0) continue;
    std::span<const double> bk = b.row(k);
    for (int j = 0; j < n; ++j) dst[j] += av * bk[j];
  }
}

inline void matmul_at_b_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, int i) {
  // out(i, :) = sum_r a(r, i) * b(r, :)
  const int n = b.cols(), rr = a.rows();
  std::span<double> dst = out.row(i);
  for (int j = 0; j < n; ++j) dst[j] = 0.0;
  for (int r = 0; r < rr; ++r) {
    const double av = a(r, i);
    if (av == 0.0) continue;
    std::span<const double> br = b.row(r);
    for (int j = 0; j < n; ++j) dst[j] += av * br[j];
  }
}

inline void matmul_a_bt_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, int i) {
  const int n = b.rows();
  std::span<const double> ai = a.row(i);
  std::span<double> dst = out.row(i);
  for (int j = 0; j < n; ++j) dst[j] = dot(ai, b.row(j));
}

inline void spmm_row(const SparseMatrix& s, const DenseMatrix& dense, DenseMatrix& out, int i) {
  const int n = dense.cols();
  std::span<double> dst = out.row(i);
  for (int j = 0; j < n; ++j) dst[j] = 0.0;
  for (int p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
    const double v = s.val[p];
    std::span<const double> dr = dense.row(s.col[p]);
    for (int j = 0; j < n; ++j) dst[j] += v * dr[j];
  }
}

inline int nearest_row(const DenseMatrix& points, const DenseMatrix& centroids, int p) {
  double best = std::numeric_limits<double>::infinity();
  int best_idx = 0;
  std::span<const double> pt = points.row(p);
  for (int c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(pt, centroids.row(c));
    if (d < best) {
      best = d;
      best_idx = c;
    }
  }
  return best_idx;
}

inline double min_dist_row(const DenseMatrix& embeds, int node, std::span<const int> refs) {
  double best = std::numeric_limits<double>::infinity();
  std::span<const double> e = embeds.row(node);
  for (int r : refs) best = std::min(best, squared_distance(e, embeds.row(r)));
  return std::sqrt(best);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void matmul_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  check_mul(a, b, a.rows(), a.cols(), b.rows());
  out = DenseMatrix(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
}

void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  check_mul(a, b, a.rows(), a.cols(), b.rows());
  out = DenseMatrix(a.rows(), b.cols());
  const int m = a.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) matmul_row(a, b, out, i);
}

void matmul_at_b_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at_b: row mismatch");
  out = DenseMatrix(a.cols(), b.cols());
  for (int i = 0; i < a.cols(); ++i) matmul_at_b_row(a, b, out, i);
}

void matmul_at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at_b: row mismatch");
  out = DenseMatrix(a.cols(), b.cols());
  const int m = a.cols();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) matmul_at_b_row(a, b, out, i);
}

void matmul_a_bt_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_a_bt: col mismatch");
  out = DenseMatrix(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) matmul_a_bt_row(a, b, out, i);
}

void matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_a_bt: col mismatch");
  out = DenseMatrix(a.rows(), b.rows());
  const int m = a.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) matmul_a_bt_row(a, b, out, i);
}

void add_row_vector(DenseMatrix& m, std::span<const double> v) {
  if (static_cast<int>(v.size()) != m.cols()) throw std::invalid_argument("add_row_vector: size mismatch");
  const int rows = m.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    std::span<double> r = m.row(i);
    for (int j = 0; j < m.cols(); ++j) r[j] += v[j];
  }
}

void colsum(const DenseMatrix& m, std::span<double> out) {
  if (static_cast<int>(out.size()) != m.cols()) throw std::invalid_argument("colsum: size mismatch");
  for (int j = 0; j < m.cols(); ++j) out[j] = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    std::span<const double> r = m.row(i);
    for (int j = 0; j < m.cols(); ++j) out[j] += r[j];
  }
}

void spmm_serial(const SparseMatrix& s, const DenseMatrix& dense, DenseMatrix& out) {
  if (s.n != dense.rows()) throw std::invalid_argument("spmm: dimension mismatch");
  out = DenseMatrix(s.n, dense.cols());
  for (int i = 0; i < s.n; ++i) spmm_row(s, dense, out, i);
}

void spmm(const SparseMatrix& s, const DenseMatrix& dense, DenseMatrix& out) {
  if (s.n != dense.rows()) throw std::invalid_argument("spmm: dimension mismatch");
  out = DenseMatrix(s.n, dense.cols());
  const int n = s.n;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) spmm_row(s, dense, out, i);
}

void normalize_rows(const DenseMatrix& in, DenseMatrix& out, std::vector<double>& norms) {
  out = DenseMatrix(in.rows(), in.cols());
  norms.assign(in.rows(), 0.0);
  const int rows = in.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    std::span<const double> r = in.row(i);
    const double n = std::sqrt(dot(r, r));
    norms[i] = n;
    if (n > 0.0) {
      std::span<double> o = out.row(i);
      for (int j = 0; j < in.cols(); ++j) o[j] = r[j] / n;
    }
  }
}

void nearest_centroid_serial(const DenseMatrix& points, const DenseMatrix& centroids, std::vector<int>& assign) {
  assign.assign(points.rows(), 0);
  for (int p = 0; p < points.rows(); ++p) assign[p] = nearest_row(points, centroids, p);
}

void nearest_centroid(const DenseMatrix& points, const DenseMatrix& centroids, std::vector<int>& assign) {
  assign.assign(points.rows(), 0);
  const int n = points.rows();
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) assign[p] = nearest_row(points, centroids, p);
}

void min_distance_to_set_serial(const DenseMatrix& embeds, std::span<const int> pool, std::span<const int> refs,
                                std::vector<double>& out) {
  out.assign(pool.size(), 0.0);
  for (std::size_t i = 0; i < pool.size(); ++i) out[i] = min_dist_row(embeds, pool[i], refs);
}

void min_distance_to_set(const DenseMatrix& embeds, std::span<const int> pool, std::span<const int> refs,
                         std::vector<double>& out) {
  out.assign(pool.size(), 0.0);
  const std::int64_t n = static_cast<std::int64_t>(pool.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = min_dist_row(embeds, pool[i], refs);
}

}  // namespace galclean::kern
