#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "galclean/graph.hpp"

namespace galclean {

struct SelectConfig {
  int batch_size = 10;           // S
  double coverage_factor = 2.0;  // h, nodes covered per labeled node
  double beta = 1.0;             // cleanliness weight
  int kmeans_iters = 100;
  // When set, the per-cluster argmin ranges over all of V_filter instead of
  // the cluster's own members (duplicates collapse).
  bool global_argmin = false;
};

// Drops the floor(|labeled| * h) pool nodes closest to the labeled set in
// embedding space (labeled nodes themselves sort first at distance 0).
// Returns the surviving pool sorted by id.
std::vector<int> remove_well_represented(std::span<const int> pool, std::span<const int> labeled,
                                         const DenseMatrix& embeds, double h);

struct ClusterAssignment {
  DenseMatrix centroids;        // k x dim
  std::vector<int> membership;  // aligned with the points that were clustered
};

// k-means++ seeding followed by Lloyd iterations; empty clusters are
// reseeded to the point farthest from its centroid. Deterministic per seed.
ClusterAssignment kmeans(const DenseMatrix& points, int k, int iters, std::uint64_t rng_seed);

// 1 / (distance to centroid + guard)
double representativeness(const DenseMatrix& embeds, int v, std::span<const double> centroid);

// Sum of raw-feature cosines to the node's neighbors in the observed graph.
double cleanliness(int v, const WeightedGraph& observed, const DenseMatrix& x);
std::vector<double> cleanliness_all(const WeightedGraph& observed, const DenseMatrix& x);

// Rank-based percentiles: scores sorted non-increasing (ties by node id),
// percentile = (rank-1)/(n-1); the best score maps to 0.
std::vector<double> percentiles(std::span<const int> nodes, std::span<const double> scores);

// One node per cluster minimizing r-hat + beta * cl-hat over percentiles
// computed across all of v_filter. `cleanliness_scores` is indexed by node
// id over the full graph (see cleanliness_all).
std::vector<int> select_batch(std::span<const int> v_filter, const ClusterAssignment& assignment,
                              const DenseMatrix& embeds, std::span<const double> cleanliness_scores, double beta,
                              bool global_argmin = false);

// Uniform sample without replacement, deterministic per seed.
std::vector<int> random_select(std::span<const int> pool, int k, std::uint64_t rng_seed);

}  // namespace galclean
