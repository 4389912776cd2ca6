#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace galclean {

// Row-major dense matrix of doubles. The only numeric container used by the
// learning modules; kernels operating on it live in kernels.hpp.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static DenseMatrix filled(int rows, int cols, double value);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<double> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  std::span<double> data() { return {data_.data(), data_.size()}; }
  std::span<const double> data() const { return {data_.data(), data_.size()}; }

  bool same_shape(const DenseMatrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  void fill(double value);
  void scale(double s);
  // this += s * other; shapes must match
  void add_scaled(const DenseMatrix& other, double s);
  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// SplitMix64 step; used to derive independent RNG streams from one master
// seed so that unrelated components never share a stream.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) { return std::mt19937_64(mix_seed(seed, stream)); }

DenseMatrix gaussian_matrix(int rows, int cols, double stddev, std::mt19937_64& rng);

}  // namespace galclean
