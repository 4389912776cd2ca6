#include "galclean/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "galclean/kernels.hpp"
#include "galclean/nn.hpp"

namespace galclean {

std::vector<int> remove_well_represented(std::span<const int> pool, std::span<const int> labeled,
                                         const DenseMatrix& embeds, double h) {
  if (labeled.empty()) throw std::invalid_argument("remove_well_represented: empty labeled set");
  if (h <= 1.0) throw std::invalid_argument("remove_well_represented: coverage factor h must be > 1");
  const std::size_t to_remove = static_cast<std::size_t>(std::floor(static_cast<double>(labeled.size()) * h));
  if (pool.size() <= to_remove)
    throw std::runtime_error("remove_well_represented: pool exhausted (" + std::to_string(pool.size()) +
                             " candidates, removing " + std::to_string(to_remove) + ")");

  std::vector<double> dist;
  kern::min_distance_to_set(embeds, pool, labeled, dist);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return pool[a] < pool[b];
  });
  std::vector<int> filtered;
  filtered.reserve(pool.size() - to_remove);
  for (std::size_t i = to_remove; i < order.size(); ++i) filtered.push_back(pool[order[i]]);
  std::sort(filtered.begin(), filtered.end());
  return filtered;
}

namespace {

void update_centroids(const DenseMatrix& points, const std::vector<int>& assign, DenseMatrix& centroids) {
  const int k = centroids.rows();
  const int dim = points.cols();
  std::vector<int> counts(k, 0);
  DenseMatrix sums(k, dim);
  for (int p = 0; p < points.rows(); ++p) {
    const int c = assign[p];
    ++counts[c];
    auto src = points.row(p);
    auto dst = sums.row(c);
    for (int j = 0; j < dim; ++j) dst[j] += src[j];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;  // repaired by the caller
    auto dst = centroids.row(c);
    auto src = sums.row(c);
    for (int j = 0; j < dim; ++j) dst[j] = src[j] / counts[c];
  }
  // reseed empty clusters to the point farthest from its own centroid
  for (int c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    double far_d = -1.0;
    int far_p = 0;
    for (int p = 0; p < points.rows(); ++p) {
      const double d = kern::squared_distance(points.row(p), centroids.row(assign[p]));
      if (d > far_d) {
        far_d = d;
        far_p = p;
      }
    }
    auto dst = centroids.row(c);
    auto src = points.row(far_p);
    for (int j = 0; j < dim; ++j) dst[j] = src[j];
    ++counts[c];
  }
}

}  // namespace

ClusterAssignment kmeans(const DenseMatrix& points, int k, int iters, std::uint64_t rng_seed) {
  const int m = points.rows();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (m < k) throw std::invalid_argument("kmeans: fewer points (" + std::to_string(m) + ") than clusters (" +
                                         std::to_string(k) + ")");
  if (iters < 0) throw std::invalid_argument("kmeans: negative iteration count");

  auto rng = make_rng(rng_seed, 0x6b6d65616e73ULL);  // "kmeans" stream
  ClusterAssignment result;
  result.centroids = DenseMatrix(k, points.cols());

  // k-means++ seeding
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(m, 0);
  std::uniform_int_distribution<int> first(0, m - 1);
  int seed_idx = first(rng);
  for (int c = 0; c < k; ++c) {
    chosen[seed_idx] = 1;
    auto dst = result.centroids.row(c);
    auto src = points.row(seed_idx);
    for (int j = 0; j < points.cols(); ++j) dst[j] = src[j];
    if (c + 1 == k) break;
    double total = 0.0;
    for (int p = 0; p < m; ++p) {
      d2[p] = std::min(d2[p], kern::squared_distance(points.row(p), src));
      if (!chosen[p]) total += d2[p];
    }
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      seed_idx = -1;
      for (int p = 0; p < m; ++p) {
        if (chosen[p]) continue;
        target -= d2[p];
        if (target <= 0.0) {
          seed_idx = p;
          break;
        }
      }
      if (seed_idx < 0)  // numeric slack: fall back to the last unchosen
        for (int p = m - 1; p >= 0; --p)
          if (!chosen[p]) {
            seed_idx = p;
            break;
          }
    } else {
      // all remaining points coincide with a centroid; take the lowest id
      seed_idx = -1;
      for (int p = 0; p < m; ++p)
        if (!chosen[p]) {
          seed_idx = p;
          break;
        }
    }
  }

  kern::nearest_centroid(points, result.centroids, result.membership);
  for (int it = 0; it < iters; ++it) {
    update_centroids(points, result.membership, result.centroids);
    std::vector<int> next;
    kern::nearest_centroid(points, result.centroids, next);
    if (next == result.membership) break;
    result.membership = std::move(next);
  }
  return result;
}

double representativeness(const DenseMatrix& embeds, int v, std::span<const double> centroid) {
  const double d = std::sqrt(kern::squared_distance(embeds.row(v), centroid));
  return 1.0 / (d + 1e-12);
}

double cleanliness(int v, const WeightedGraph& observed, const DenseMatrix& x) {
  double total = 0.0;
  for (const Neighbor& nb : observed.neighbors(v)) total += cosine(x.row(v), x.row(nb.id));
  return total;
}

std::vector<double> cleanliness_all(const WeightedGraph& observed, const DenseMatrix& x) {
  std::vector<double> out(observed.num_nodes(), 0.0);
  const int n = observed.num_nodes();
#pragma omp parallel for schedule(static)
  for (int v = 0; v < n; ++v) out[v] = cleanliness(v, observed, x);
  return out;
}

std::vector<double> percentiles(std::span<const int> nodes, std::span<const double> scores) {
  if (nodes.empty()) throw std::invalid_argument("percentiles: empty input");
  if (nodes.size() != scores.size()) throw std::invalid_argument("percentiles: size mismatch");
  const std::size_t n = nodes.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return nodes[a] < nodes[b];
  });
  std::vector<double> out(n, 0.0);
  for (std::size_t rank = 0; rank < n; ++rank)
    out[order[rank]] = n == 1 ? 0.0 : static_cast<double>(rank) / static_cast<double>(n - 1);
  return out;
}

std::vector<int> select_batch(std::span<const int> v_filter, const ClusterAssignment& assignment,
                              const DenseMatrix& embeds, std::span<const double> cleanliness_scores, double beta,
                              bool global_argmin) {
  if (v_filter.empty()) throw std::invalid_argument("select_batch: empty candidate pool");
  if (assignment.membership.size() != v_filter.size())
    throw std::invalid_argument("select_batch: membership/filter size mismatch");
  const int k = assignment.centroids.rows();
  const std::size_t m = v_filter.size();

  std::vector<double> clean_sub(m);
  for (std::size_t i = 0; i < m; ++i) clean_sub[i] = cleanliness_scores[v_filter[i]];
  const std::vector<double> clean_pct = percentiles(v_filter, clean_sub);

  std::vector<int> picked;
  std::vector<char> taken(m, 0);
  for (int s = 0; s < k; ++s) {
    // representativeness percentiles for this cluster, ranked over all of v_filter
    std::vector<double> rep(m);
    for (std::size_t i = 0; i < m; ++i) rep[i] = representativeness(embeds, v_filter[i], assignment.centroids.row(s));
    const std::vector<double> rep_pct = percentiles(v_filter, rep);

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!global_argmin && assignment.membership[i] != s) continue;
      const double score = rep_pct[i] + beta * clean_pct[i];
      if (score < best) {
        best = score;
        best_i = i;
      }
    }
    if (best_i == m || taken[best_i]) continue;  // empty cluster / duplicate under global argmin
    taken[best_i] = 1;
    picked.push_back(v_filter[best_i]);
  }
  return picked;
}

std::vector<int> random_select(std::span<const int> pool, int k, std::uint64_t rng_seed) {
  if (k < 0) throw std::invalid_argument("random_select: negative k");
  if (static_cast<std::size_t>(k) > pool.size()) throw std::runtime_error("random_select: pool too small");
  std::vector<int> items(pool.begin(), pool.end());
  std::sort(items.begin(), items.end());
  auto rng = make_rng(rng_seed, 0x72616e64ULL);  // "rand" stream
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, items.size() - 1);
    std::swap(items[i], items[d(rng)]);
  }
  items.resize(k);
  return items;
}

}  // namespace galclean
