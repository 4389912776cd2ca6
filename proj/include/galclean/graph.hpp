#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "galclean/dense.hpp"

namespace galclean {

struct Neighbor {
  int id;
  double weight;
};

// Canonical undirected edge, u < v.
struct Edge {
  int u;
  int v;
  double weight;
};

// Symmetric weighted graph with weights in [0, 1], no self-loops. Immutable
// after construction; adjacency lists are sorted by neighbor id and the edge
// list enumerates each unordered pair exactly once, so iteration order is
// deterministic everywhere.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  int num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Neighbor>& neighbors(int v) const { return adj_[v]; }
  const std::vector<Edge>& edge_list() const { return edges_; }

  bool has_edge(int u, int v) const;
  double weight(int u, int v) const;  // 0 for absent pairs
  double weighted_degree(int v) const { return wdeg_[v]; }

  // Same support, new weights aligned with edge_list() order.
  WeightedGraph with_weights(std::span<const double> weights) const;

 private:
  friend class GraphBuilder;
  int num_nodes_ = 0;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<Edge> edges_;
  std::vector<double> wdeg_;
};

class GraphBuilder {
 public:
  explicit GraphBuilder(int num_nodes);

  // Duplicate pairs collapse at build() time, first weight wins. Throws on
  // self-loops, out-of-range endpoints, and weights outside [0, 1].
  void add_edge(int u, int v, double weight = 1.0);

  WeightedGraph build();

 private:
  int num_nodes_;
  std::vector<Edge> edges_;
};

struct LabelStore {
  std::vector<int> labels;  // node -> class index in [0, num_classes)
  int num_classes = 0;

  int num_nodes() const { return static_cast<int>(labels.size()); }
  int label(int v) const { return labels[v]; }
};

struct SplitSet {
  std::vector<int> initial;
  std::vector<int> pool;
  std::vector<int> valid;
  std::vector<int> test;
};

struct Bundle {
  WeightedGraph graph;
  DenseMatrix features;
  LabelStore labels;
};

// Bundle directory layout: nodes.csv with header `id,label,f0,...,f{d-1}`
// and edges.csv with header `src,dst`. Node ids must be the dense range
// 0..N-1. Duplicate edge rows are merged with a warning on stderr;
// self-loops and out-of-range endpoints are errors.
Bundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const std::filesystem::path& dir, const Bundle& bundle);

struct InjectionResult {
  WeightedGraph graph;
  std::vector<std::pair<int, int>> added;  // canonical (u < v)
};

// Adds floor(ratio * |E_original|) unit-weight edges between previously
// unconnected nodes of different classes. `original_edge_count` overrides the
// base count when chaining injections; 0 means "use g.num_edges()".
InjectionResult inject_random_interclass_edges(const WeightedGraph& g, const LabelStore& labels, double ratio,
                                               std::uint64_t rng_seed, std::size_t original_edge_count = 0);

// Two nodes per class into `initial`, then valid_size/test_size draws, rest
// is the pool. All four sets are disjoint and sorted by id.
SplitSet make_splits(const LabelStore& labels, std::uint64_t rng_seed, int valid_size, int test_size);

// Stochastic block model fixture: `classes` blocks of `nodes_per_class`
// nodes, intra-class edge probability p_in, inter-class p_out. Features are
// a per-class mean plus Gaussian noise of scale feature_noise.
Bundle generate_sbm(int classes, int nodes_per_class, double p_in, double p_out, int feature_dim, double feature_noise,
                    std::uint64_t rng_seed);

}  // namespace galclean
