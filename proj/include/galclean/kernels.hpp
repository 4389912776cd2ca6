#pragma once

#include <span>
#include <vector>

#include "galclean/dense.hpp"

// Data-parallel kernels shared by the learning modules. Every kernel comes in
// two flavours: a plain serial reference (suffix _serial) and an OpenMP
// version parallelized over independent output rows. The per-element
// reduction order is identical in both, so the results are bit-identical for
// any thread count; tests/test_kernels.cpp asserts this and
// bench/bench_kernels.cpp compares their throughput.
namespace galclean::kern {

// out = a * b
void matmul_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// out = a^T * b
void matmul_at_b_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
void matmul_at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// out = a * b^T
void matmul_a_bt_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
void matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// m.row(r) += v for every row
void add_row_vector(DenseMatrix& m, std::span<const double> v);

// out[c] = sum over rows of m(r, c)
void colsum(const DenseMatrix& m, std::span<double> out);

// Symmetric sparse matrix in CSR form; produced by normalize_adjacency and
// consumed by the GCN propagation.
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;  // size n + 1
  std::vector<int> col;
  std::vector<double> val;
};

// out = s * dense
void spmm_serial(const SparseMatrix& s, const DenseMatrix& dense, DenseMatrix& out);
void spmm(const SparseMatrix& s, const DenseMatrix& dense, DenseMatrix& out);

// Unit-normalize each row (zero rows stay zero); norms receives the original
// L2 norm of every row.
void normalize_rows(const DenseMatrix& in, DenseMatrix& out, std::vector<double>& norms);

// assign[p] = index of the centroid nearest to points.row(p), Euclidean
// distance, ties to the lowest index.
void nearest_centroid_serial(const DenseMatrix& points, const DenseMatrix& centroids, std::vector<int>& assign);
void nearest_centroid(const DenseMatrix& points, const DenseMatrix& centroids, std::vector<int>& assign);

// out[i] = min over r in refs of ||embeds.row(pool[i]) - embeds.row(r)||
void min_distance_to_set_serial(const DenseMatrix& embeds, std::span<const int> pool, std::span<const int> refs,
                                std::vector<double>& out);
void min_distance_to_set(const DenseMatrix& embeds, std::span<const int> pool, std::span<const int> refs,
                         std::vector<double>& out);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace galclean::kern
