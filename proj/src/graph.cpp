#include "galclean/graph.hpp"

#include "galclean/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace galclean {

namespace {

// Packs an unordered pair into one key for dedup sets.
std::uint64_t pair_key(int u, int v) {
  const std::uint64_t a = static_cast<std::uint32_t>(std::min(u, v));
  const std::uint64_t b = static_cast<std::uint32_t>(std::max(u, v));
  return (a << 32) | b;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

bool WeightedGraph::has_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_) return false;
  const auto& nbrs = adj_[u];
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v, [](const Neighbor& n, int id) { return n.id < id; });
  return it != nbrs.end() && it->id == v;
}

double WeightedGraph::weight(int u, int v) const {
  if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_) return 0.0;
  const auto& nbrs = adj_[u];
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v, [](const Neighbor& n, int id) { return n.id < id; });
  return (it != nbrs.end() && it->id == v) ? it->weight : 0.0;
}

WeightedGraph WeightedGraph::with_weights(std::span<const double> weights) const {
  if (weights.size() != edges_.size()) throw std::invalid_argument("with_weights: weight count != edge count");
  GraphBuilder b(num_nodes_);
  for (std::size_t i = 0; i < edges_.size(); ++i) b.add_edge(edges_[i].u, edges_[i].v, weights[i]);
  return b.build();
}

GraphBuilder::GraphBuilder(int num_nodes) : num_nodes_(num_nodes) {
  if (num_nodes < 0) throw std::invalid_argument("GraphBuilder: negative node count");
}

void GraphBuilder::add_edge(int u, int v, double weight) {
  if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_)
    throw std::invalid_argument("add_edge: endpoint out of range: (" + std::to_string(u) + "," + std::to_string(v) + ")");
  if (u == v) throw std::invalid_argument("add_edge: self-loop at node " + std::to_string(u));
  if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("add_edge: weight outside [0,1]");
  edges_.push_back({std::min(u, v), std::max(u, v), weight});
}

WeightedGraph GraphBuilder::build() {
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  // First occurrence wins on duplicates.
  std::vector<Edge> unique_edges;
  unique_edges.reserve(edges_.size());
  for (const Edge& e : edges_) {
    if (!unique_edges.empty() && unique_edges.back().u == e.u && unique_edges.back().v == e.v) continue;
    unique_edges.push_back(e);
  }
  WeightedGraph g;
  g.num_nodes_ = num_nodes_;
  g.edges_ = std::move(unique_edges);
  g.adj_.assign(num_nodes_, {});
  g.wdeg_.assign(num_nodes_, 0.0);
  for (const Edge& e : g.edges_) {
    g.adj_[e.u].push_back({e.v, e.weight});
    g.adj_[e.v].push_back({e.u, e.weight});
    g.wdeg_[e.u] += e.weight;
    g.wdeg_[e.v] += e.weight;
  }
  for (auto& nbrs : g.adj_)
    std::sort(nbrs.begin(), nbrs.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
  return g;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

long parse_int(const std::string& s, const std::string& what) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("bundle: bad " + what + " value '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("bundle: bad " + what + " value '" + s + "'");
  return v;
}

}  // namespace

Bundle load_bundle(const std::filesystem::path& dir) {
  const auto nodes_path = dir / "nodes.csv";
  const auto edges_path = dir / "edges.csv";
  std::ifstream nodes_in(nodes_path);
  if (!nodes_in) throw std::runtime_error("bundle: missing file " + nodes_path.string());
  std::ifstream edges_in(edges_path);
  if (!edges_in) throw std::runtime_error("bundle: missing file " + edges_path.string());

  std::string line;
  if (!std::getline(nodes_in, line)) throw std::runtime_error("bundle: empty nodes.csv");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label")
    throw std::runtime_error("bundle: nodes.csv header must be id,label,f0,...");
  const int dim = static_cast<int>(header.size()) - 2;

  struct NodeRow {
    int id;
    int label;
    std::vector<double> feats;
  };
  std::vector<NodeRow> rows;
  while (std::getline(nodes_in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != dim + 2)
      throw std::runtime_error("bundle: nodes.csv row has wrong column count: " + line);
    NodeRow r;
    r.id = static_cast<int>(parse_int(cells[0], "node id"));
    r.label = static_cast<int>(parse_int(cells[1], "label"));
    if (r.label < 0) throw std::runtime_error("bundle: negative label for node " + std::to_string(r.id));
    r.feats.reserve(dim);
    for (int f = 0; f < dim; ++f) r.feats.push_back(parse_double(cells[2 + f], "feature"));
    rows.push_back(std::move(r));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw std::runtime_error("bundle: nodes.csv has no rows");

  std::sort(rows.begin(), rows.end(), [](const NodeRow& a, const NodeRow& b) { return a.id < b.id; });
  for (int i = 0; i < n; ++i)
    if (rows[i].id != i)
      throw std::runtime_error("bundle: node ids must be contiguous 0..N-1 (missing or duplicate id " +
                               std::to_string(i) + ")");

  Bundle bundle;
  bundle.features = DenseMatrix(n, dim);
  bundle.labels.labels.resize(n);
  int max_label = 0;
  for (int i = 0; i < n; ++i) {
    bundle.labels.labels[i] = rows[i].label;
    max_label = std::max(max_label, rows[i].label);
    for (int f = 0; f < dim; ++f) bundle.features(i, f) = rows[i].feats[f];
  }
  bundle.labels.num_classes = max_label + 1;

  if (!std::getline(edges_in, line)) throw std::runtime_error("bundle: empty edges.csv");
  {
    const auto eh = split_csv_line(line);
    if (eh.size() != 2 || eh[0] != "src" || eh[1] != "dst")
      throw std::runtime_error("bundle: edges.csv header must be src,dst");
  }
  GraphBuilder builder(n);
  std::unordered_set<std::uint64_t> seen;
  std::size_t duplicates = 0;
  while (std::getline(edges_in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw std::runtime_error("bundle: edges.csv row has wrong column count: " + line);
    const int u = static_cast<int>(parse_int(cells[0], "src"));
    const int v = static_cast<int>(parse_int(cells[1], "dst"));
    if (u == v) throw std::runtime_error("bundle: self-loop row (" + std::to_string(u) + "," + std::to_string(v) + ")");
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::runtime_error("bundle: edge endpoint out of range (" + std::to_string(u) + "," + std::to_string(v) + ")");
    if (!seen.insert(pair_key(u, v)).second) {
      ++duplicates;
      continue;
    }
    builder.add_edge(u, v, 1.0);
  }
  if (duplicates > 0)
    std::cerr << "warning: bundle " << dir.string() << ": deduplicated " << duplicates << " edge row(s)\n";
  bundle.graph = builder.build();
  return bundle;
}

void save_bundle(const std::filesystem::path& dir, const Bundle& bundle) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "nodes.csv", std::ios::binary);
    if (!out) throw std::runtime_error("bundle: cannot write " + (dir / "nodes.csv").string());
    out << "id,label";
    for (int f = 0; f < bundle.features.cols(); ++f) out << ",f" << f;
    out << "\n";
    for (int i = 0; i < bundle.features.rows(); ++i) {
      out << i << "," << bundle.labels.labels[i];
      for (int f = 0; f < bundle.features.cols(); ++f) out << "," << format_double(bundle.features(i, f));
      out << "\n";
    }
  }
  {
    std::ofstream out(dir / "edges.csv", std::ios::binary);
    if (!out) throw std::runtime_error("bundle: cannot write " + (dir / "edges.csv").string());
    out << "src,dst\n";
    for (const Edge& e : bundle.graph.edge_list()) out << e.u << "," << e.v << "\n";
  }
}

InjectionResult inject_random_interclass_edges(const WeightedGraph& g, const LabelStore& labels, double ratio,
                                               std::uint64_t rng_seed, std::size_t original_edge_count) {
  if (ratio < 0.0) throw std::invalid_argument("inject: ratio must be >= 0");
  if (g.num_edges() == 0) throw std::invalid_argument("inject: graph has no edges");
  if (labels.num_nodes() != g.num_nodes()) throw std::invalid_argument("inject: label/graph size mismatch");
  const std::size_t base = original_edge_count == 0 ? g.num_edges() : original_edge_count;
  const std::size_t needed = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(base)));

  GraphBuilder builder(g.num_nodes());
  for (const Edge& e : g.edge_list()) builder.add_edge(e.u, e.v, e.weight);
  InjectionResult result;
  if (needed == 0) {
    result.graph = builder.build();
    return result;
  }

  auto rng = make_rng(rng_seed, 0x6e6f697365ULL);  // "noise" stream
  std::uniform_int_distribution<int> pick(0, g.num_nodes() - 1);
  std::unordered_set<std::uint64_t> added;
  const std::size_t max_attempts = 100 * needed;
  std::size_t attempts = 0;
  while (result.added.size() < needed && attempts < max_attempts) {
    ++attempts;
    const int u = pick(rng);
    const int v = pick(rng);
    if (u == v || labels.label(u) == labels.label(v)) continue;
    if (g.has_edge(u, v)) continue;
    if (!added.insert(pair_key(u, v)).second) continue;
    result.added.emplace_back(std::min(u, v), std::max(u, v));
  }
  if (result.added.size() < needed) {
    // Rejection sampling stalled (dense graph); enumerate remaining candidates.
    std::vector<std::pair<int, int>> candidates;
    for (int u = 0; u < g.num_nodes(); ++u)
      for (int v = u + 1; v < g.num_nodes(); ++v) {
        if (labels.label(u) == labels.label(v) || g.has_edge(u, v)) continue;
        if (added.count(pair_key(u, v))) continue;
        candidates.emplace_back(u, v);
      }
    const std::size_t still_needed = needed - result.added.size();
    if (candidates.size() < still_needed)
      throw std::runtime_error("inject: not enough unconnected inter-class pairs (need " + std::to_string(still_needed) +
                               ", have " + std::to_string(candidates.size()) + ")");
    // Partial Fisher-Yates over the enumerated candidates.
    for (std::size_t i = 0; i < still_needed; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[d(rng)]);
      result.added.push_back(candidates[i]);
    }
  }
  std::sort(result.added.begin(), result.added.end());
  for (const auto& [u, v] : result.added) builder.add_edge(u, v, 1.0);
  result.graph = builder.build();
  return result;
}

SplitSet make_splits(const LabelStore& labels, std::uint64_t rng_seed, int valid_size, int test_size) {
  const int n = labels.num_nodes();
  const int c = labels.num_classes;
  if (valid_size < 0 || test_size < 0) throw std::invalid_argument("make_splits: negative split size");
  std::vector<std::vector<int>> by_class(c);
  for (int v = 0; v < n; ++v) by_class[labels.label(v)].push_back(v);
  for (int k = 0; k < c; ++k)
    if (static_cast<int>(by_class[k].size()) < 2)
      throw std::runtime_error("make_splits: class " + std::to_string(k) + " has fewer than 2 nodes");
  if (n <= 2 * c + valid_size + test_size)
    throw std::runtime_error("make_splits: sizes leave an empty pool (N=" + std::to_string(n) + ")");

  auto rng = make_rng(rng_seed, 0x73706c6974ULL);  // "split" stream
  SplitSet s;
  std::vector<char> taken(n, 0);
  for (int k = 0; k < c; ++k) {
    auto& members = by_class[k];
    for (int pick = 0; pick < 2; ++pick) {
      std::uniform_int_distribution<std::size_t> d(pick, members.size() - 1);
      std::swap(members[pick], members[d(rng)]);
      s.initial.push_back(members[pick]);
      taken[members[pick]] = 1;
    }
  }
  std::vector<int> rest;
  rest.reserve(n);
  for (int v = 0; v < n; ++v)
    if (!taken[v]) rest.push_back(v);
  // One shuffle, then carve valid / test off the front.
  for (std::size_t i = 0; i + 1 < rest.size(); ++i) {
    std::uniform_int_distribution<std::size_t> d(i, rest.size() - 1);
    std::swap(rest[i], rest[d(rng)]);
  }
  s.valid.assign(rest.begin(), rest.begin() + valid_size);
  s.test.assign(rest.begin() + valid_size, rest.begin() + valid_size + test_size);
  s.pool.assign(rest.begin() + valid_size + test_size, rest.end());
  std::sort(s.initial.begin(), s.initial.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.pool.begin(), s.pool.end());
  return s;
}

Bundle generate_sbm(int classes, int nodes_per_class, double p_in, double p_out, int feature_dim, double feature_noise,
                    std::uint64_t rng_seed) {
  if (classes < 1 || nodes_per_class < 1) throw std::invalid_argument("generate_sbm: empty blocks");
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0))
    throw std::invalid_argument("generate_sbm: require 0 <= p_out < p_in <= 1");
  if (feature_dim < 1) throw std::invalid_argument("generate_sbm: feature_dim must be >= 1");

  const int n = classes * nodes_per_class;
  Bundle bundle;
  bundle.labels.num_classes = classes;
  bundle.labels.labels.resize(n);
  for (int v = 0; v < n; ++v) bundle.labels.labels[v] = v / nodes_per_class;

  auto rng = make_rng(rng_seed, 0x73626dULL);  // "sbm" stream
  // Class means drawn once; unit-normalized so feature_noise is relative to
  // a fixed signal scale.
  DenseMatrix means = gaussian_matrix(classes, feature_dim, 1.0, rng);
  for (int k = 0; k < classes; ++k) {
    auto row = means.row(k);
    const double norm = std::sqrt(kern::dot(row, row));
    if (norm > 0)
      for (double& x : row) x /= norm;
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  bundle.features = DenseMatrix(n, feature_dim);
  for (int v = 0; v < n; ++v) {
    const auto mean = means.row(bundle.labels.labels[v]);
    auto row = bundle.features.row(v);
    for (int f = 0; f < feature_dim; ++f) row[f] = mean[f] + feature_noise * noise(rng);
  }

  GraphBuilder builder(n);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const double p = bundle.labels.labels[u] == bundle.labels.labels[v] ? p_in : p_out;
      if (p > 0.0 && coin(rng) < p) builder.add_edge(u, v, 1.0);
    }
  bundle.graph = builder.build();
  return bundle;
}

}  // namespace galclean
