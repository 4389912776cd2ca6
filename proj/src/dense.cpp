#include "galclean/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace galclean {

DenseMatrix DenseMatrix::filled(int rows, int cols, double value) {
  DenseMatrix m(rows, cols);
  m.fill(value);
  return m;
}

void DenseMatrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void DenseMatrix::scale(double s) {
  for (double& v : data_) v *= s;
}

void DenseMatrix::add_scaled(const DenseMatrix& other, double s) {
  if (!same_shape(other)) throw std::invalid_argument("DenseMatrix::add_scaled: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

bool DenseMatrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DenseMatrix gaussian_matrix(int rows, int cols, double stddev, std::mt19937_64& rng) {
  DenseMatrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

}  // namespace galclean
