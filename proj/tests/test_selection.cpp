#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "galclean/nn.hpp"
#include "galclean/kernels.hpp"
#include "galclean/selection.hpp"

using namespace galclean;

namespace kern = galclean::kern;

namespace {

DenseMatrix embeddings_1d(std::initializer_list<double> values) {
  DenseMatrix m(static_cast<int>(values.size()), 1);
  int i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

}  // namespace

TEST_CASE("remove_well_represented") {
  SUBCASE("1-D fixture: remove the two closest, keep the far pair") {
    DenseMatrix e = embeddings_1d({0.0, 1.0, 5.0, 6.0});
    std::vector<int> pool{0, 1, 2, 3};
    std::vector<int> labeled{0};
    auto kept = remove_well_represented(pool, labeled, e, 2.0);
    CHECK(kept == std::vector<int>{2, 3});
  }
  SUBCASE("labeled nodes present in the pool are always removed") {
    DenseMatrix e = embeddings_1d({0.0, 10.0, 20.0, 30.0, 40.0, 50.0});
    std::vector<int> pool{0, 1, 2, 3, 4, 5};
    std::vector<int> labeled{0, 3};
    auto kept = remove_well_represented(pool, labeled, e, 1.5);  // floor(2*1.5) = 3 removed
    CHECK(kept.size() == 3);
    CHECK(std::find(kept.begin(), kept.end(), 0) == kept.end());
    CHECK(std::find(kept.begin(), kept.end(), 3) == kept.end());
  }
  SUBCASE("exact removal count") {
    DenseMatrix e = embeddings_1d({0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0});
    std::vector<int> pool{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> labeled{0, 8};
    auto kept = remove_well_represented(pool, labeled, e, 2.0);  // floor(2*2) = 4
    CHECK(kept.size() == pool.size() - 4);
  }
  SUBCASE("pool exhaustion is an error") {
    DenseMatrix e = embeddings_1d({0.0, 1.0, 2.0});
    std::vector<int> pool{1, 2};
    std::vector<int> labeled{0};
    CHECK_THROWS_WITH_AS(remove_well_represented(pool, labeled, e, 2.5), doctest::Contains("pool exhausted"),
                         std::runtime_error);
  }
}

TEST_CASE("kmeans") {
  SUBCASE("k equal to point count gives zero distortion") {
    DenseMatrix pts = embeddings_1d({-3.0, 0.0, 2.0, 9.0});
    auto a = kmeans(pts, 4, 10, 1);
    std::set<int> clusters(a.membership.begin(), a.membership.end());
    CHECK(clusters.size() == 4);
    for (int p = 0; p < 4; ++p)
      CHECK(kern::squared_distance(pts.row(p), a.centroids.row(a.membership[p])) == doctest::Approx(0.0));
  }
  SUBCASE("two far blobs split into the two clusters") {
    DenseMatrix pts(4, 2);
    pts(0, 0) = 0.0;
    pts(1, 0) = 0.2;
    pts(2, 0) = 100.0;
    pts(3, 0) = 100.3;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      auto a = kmeans(pts, 2, 20, seed);
      CHECK(a.membership[0] == a.membership[1]);
      CHECK(a.membership[2] == a.membership[3]);
      CHECK(a.membership[0] != a.membership[2]);
      // enumerating both balanced assignments: the blob split strictly wins
      double blob_cost = 2 * 0.1 * 0.1 + 2 * 0.15 * 0.15;
      double got = 0.0;
      for (int p = 0; p < 4; ++p) got += kern::squared_distance(pts.row(p), a.centroids.row(a.membership[p]));
      CHECK(got == doctest::Approx(blob_cost));
    }
  }
  SUBCASE("iters=0 assigns to the nearest seed") {
    auto rng = make_rng(3, 0);
    DenseMatrix pts = gaussian_matrix(20, 3, 1.0, rng);
    auto a = kmeans(pts, 4, 0, 7);
    std::vector<int> expect;
    kern::nearest_centroid(pts, a.centroids, expect);
    CHECK(a.membership == expect);
  }
  SUBCASE("every node is assigned to its nearest centroid after convergence") {
    auto rng = make_rng(4, 0);
    DenseMatrix pts = gaussian_matrix(60, 4, 1.0, rng);
    auto a = kmeans(pts, 5, 50, 11);
    std::vector<int> expect;
    kern::nearest_centroid(pts, a.centroids, expect);
    CHECK(a.membership == expect);
  }
  SUBCASE("deterministic per seed") {
    auto rng = make_rng(5, 0);
    DenseMatrix pts = gaussian_matrix(30, 2, 1.0, rng);
    auto a = kmeans(pts, 3, 25, 13);
    auto b = kmeans(pts, 3, 25, 13);
    CHECK(a.membership == b.membership);
  }
  SUBCASE("fewer points than clusters is an error") {
    DenseMatrix pts = embeddings_1d({1.0, 2.0});
    CHECK_THROWS(kmeans(pts, 3, 5, 1));
  }
}

TEST_CASE("representativeness") {
  DenseMatrix e = embeddings_1d({0.0, 2.0, 5.0});
  std::vector<double> centroid{0.0};
  CHECK(representativeness(e, 0, centroid) > 1e11);  // at the centroid
  CHECK(representativeness(e, 1, centroid) == doctest::Approx(0.5));
  CHECK(representativeness(e, 2, centroid) < representativeness(e, 1, centroid));
}

TEST_CASE("cleanliness") {
  DenseMatrix x(4, 2);
  x(0, 0) = 1.0;           // anchor
  x(1, 0) = 1.0;           // identical to anchor
  x(2, 0) = 1.0;           // identical to anchor
  x(3, 1) = 1.0;           // orthogonal
  GraphBuilder b(4);
  b.add_edge(0, 1);
  b.add_edge(0, 2);
  b.add_edge(1, 3);
  auto g = b.build();
  CHECK(cleanliness(0, g, x) == doctest::Approx(2.0));  // two identical neighbors
  CHECK(cleanliness(2, g, x) == doctest::Approx(1.0));
  CHECK(cleanliness(3, g, x) == doctest::Approx(0.0));  // one orthogonal neighbor
  GraphBuilder iso(2);
  iso.add_edge(0, 1);
  auto g2 = iso.build();
  DenseMatrix x2(2, 2);
  x2(0, 0) = 1.0;
  x2(1, 0) = 1.0;
  // isolated node in a graph with no incident edges
  GraphBuilder b3(3);
  b3.add_edge(0, 1);
  CHECK(cleanliness(2, b3.build(), x) == 0.0);
  auto all = cleanliness_all(g, x);
  for (int v = 0; v < 4; ++v) CHECK(all[v] == doctest::Approx(cleanliness(v, g, x)));
}

TEST_CASE("percentiles") {
  SUBCASE("definition") {
    std::vector<int> nodes{10, 20, 30};
    std::vector<double> scores{0.9, 0.5, 0.1};
    auto p = percentiles(nodes, scores);
    CHECK(p[0] == doctest::Approx(0.0));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(1.0));
  }
  SUBCASE("single node maps to zero") {
    std::vector<int> nodes{5};
    std::vector<double> scores{42.0};
    CHECK(percentiles(nodes, scores)[0] == 0.0);
  }
  SUBCASE("ties resolve by node id") {
    std::vector<int> nodes{7, 3, 5};
    std::vector<double> scores{1.0, 1.0, 1.0};
    auto p = percentiles(nodes, scores);
    CHECK(p[1] == doctest::Approx(0.0));  // node 3
    CHECK(p[2] == doctest::Approx(0.5));  // node 5
    CHECK(p[0] == doctest::Approx(1.0));  // node 7
  }
  SUBCASE("order preservation over 100 random cases") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    std::uniform_int_distribution<int> size(2, 40);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = size(rng);
      std::vector<int> nodes(n);
      std::vector<double> scores(n);
      for (int i = 0; i < n; ++i) {
        nodes[i] = i;
        scores[i] = d(rng);
      }
      auto p = percentiles(nodes, scores);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (scores[a] > scores[b]) CHECK(p[a] < p[b]);
    }
  }
}

TEST_CASE("select_batch") {
  SUBCASE("single-member cluster selects that member") {
    DenseMatrix e = embeddings_1d({0.0, 10.0, 11.0});
    std::vector<int> v_filter{0, 1, 2};
    ClusterAssignment a;
    a.centroids = DenseMatrix(2, 1);
    a.centroids(0, 0) = 0.0;
    a.centroids(1, 0) = 10.5;
    a.membership = {0, 1, 1};
    std::vector<double> clean{0.0, 0.0, 0.0};
    auto picked = select_batch(v_filter, a, e, clean, 1.0);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0] == 0);
  }
  SUBCASE("beta=0 picks the member nearest its centroid") {
    DenseMatrix e = embeddings_1d({0.0, 1.0, 9.0, 10.0});
    std::vector<int> v_filter{0, 1, 2, 3};
    ClusterAssignment a;
    a.centroids = DenseMatrix(2, 1);
    a.centroids(0, 0) = 0.4;
    a.centroids(1, 0) = 9.4;
    a.membership = {0, 0, 1, 1};
    std::vector<double> clean{0.0, 5.0, 0.0, 5.0};  // would prefer 1 and 3 if beta mattered
    auto picked = select_batch(v_filter, a, e, clean, 0.0);
    CHECK(picked == std::vector<int>{0, 2});
  }
  SUBCASE("6-node fixture matches exhaustive evaluation of the combined objective") {
    DenseMatrix e(6, 1);
    const double vals[6] = {0.0, 0.6, 1.4, 8.0, 8.9, 9.4};
    for (int i = 0; i < 6; ++i) e(i, 0) = vals[i];
    std::vector<int> v_filter{0, 1, 2, 3, 4, 5};
    ClusterAssignment a;
    a.centroids = DenseMatrix(2, 1);
    a.centroids(0, 0) = 0.7;
    a.centroids(1, 0) = 8.8;
    a.membership = {0, 0, 0, 1, 1, 1};
    std::vector<double> clean{3.0, 1.0, 2.5, 0.5, 2.0, 1.5};
    const double beta = 0.7;
    auto picked = select_batch(v_filter, a, e, clean, beta);

    // exhaustive re-derivation with an independent percentile routine
    auto pct = [&](std::vector<double> scores) {
      // rank non-increasing, ties by id; percentile = rank/(n-1)
      std::vector<int> idx(scores.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int p, int q) {
        if (scores[p] != scores[q]) return scores[p] > scores[q];
        return p < q;
      });
      std::vector<double> out(scores.size());
      for (std::size_t r = 0; r < idx.size(); ++r) out[idx[r]] = static_cast<double>(r) / (scores.size() - 1);
      return out;
    };
    auto clean_pct = pct(clean);
    std::vector<int> expected;
    for (int s = 0; s < 2; ++s) {
      std::vector<double> rep(6);
      for (int i = 0; i < 6; ++i) rep[i] = 1.0 / (std::abs(vals[i] - a.centroids(s, 0)) + 1e-12);
      auto rep_pct = pct(rep);
      double best = std::numeric_limits<double>::infinity();
      int best_i = -1;
      for (int i = 0; i < 6; ++i) {
        if (a.membership[i] != s) continue;
        const double sc = rep_pct[i] + beta * clean_pct[i];
        if (sc < best) {
          best = sc;
          best_i = i;
        }
      }
      expected.push_back(best_i);
    }
    CHECK(picked == expected);
  }
  SUBCASE("scaling all cleanliness scores leaves the selection unchanged") {
    auto rng = make_rng(21, 0);
    DenseMatrix e = gaussian_matrix(30, 3, 1.0, rng);
    std::vector<int> v_filter(30);
    std::iota(v_filter.begin(), v_filter.end(), 0);
    auto a = kmeans(e, 5, 20, 3);
    std::vector<double> clean(30);
    std::uniform_real_distribution<double> d(0.0, 4.0);
    for (double& v : clean) v = d(rng);
    auto p1 = select_batch(v_filter, a, e, clean, 1.0);
    std::vector<double> scaled = clean;
    for (double& v : scaled) v *= 17.5;
    auto p2 = select_batch(v_filter, a, e, scaled, 1.0);
    CHECK(p1 == p2);
  }
  SUBCASE("output is distinct and within the filtered pool") {
    auto rng = make_rng(22, 0);
    DenseMatrix e = gaussian_matrix(40, 4, 1.0, rng);
    std::vector<int> v_filter;
    for (int i = 0; i < 40; i += 2) v_filter.push_back(i);  // even ids only
    DenseMatrix pts(static_cast<int>(v_filter.size()), 4);
    for (std::size_t i = 0; i < v_filter.size(); ++i)
      for (int j = 0; j < 4; ++j) pts(static_cast<int>(i), j) = e(v_filter[i], j);
    auto a = kmeans(pts, 6, 20, 9);
    std::vector<double> clean(40, 1.0);
    auto picked = select_batch(v_filter, a, e, clean, 1.0);
    CHECK(picked.size() <= 6);
    std::set<int> uniq(picked.begin(), picked.end());
    CHECK(uniq.size() == picked.size());
    for (int v : picked) CHECK(v % 2 == 0);
  }
  SUBCASE("global argmin mode can collapse clusters but stays distinct") {
    DenseMatrix e = embeddings_1d({0.0, 5.0, 10.0});
    std::vector<int> v_filter{0, 1, 2};
    ClusterAssignment a;
    a.centroids = DenseMatrix(2, 1);
    a.centroids(0, 0) = 1.0;
    a.centroids(1, 0) = 2.0;  // both centroids nearest to node 0 region
    a.membership = {0, 1, 1};
    std::vector<double> clean{10.0, 0.0, 0.0};
    auto picked = select_batch(v_filter, a, e, clean, 0.0, true);
    std::set<int> uniq(picked.begin(), picked.end());
    CHECK(uniq.size() == picked.size());
  }
}

TEST_CASE("random_select") {
  std::vector<int> pool(100);
  std::iota(pool.begin(), pool.end(), 0);
  SUBCASE("k equal to pool returns the whole pool") {
    auto got = random_select(pool, 100, 1);
    std::set<int> s(got.begin(), got.end());
    CHECK(s.size() == 100);
  }
  SUBCASE("k=0 empty") { CHECK(random_select(pool, 0, 1).empty()); }
  SUBCASE("two seeds differ") {
    auto a = random_select(pool, 10, 1);
    auto b = random_select(pool, 10, 2);
    CHECK(a != b);
    CHECK(a == random_select(pool, 10, 1));
  }
  SUBCASE("too-small pool throws") {
    std::vector<int> tiny{1, 2};
    CHECK_THROWS(random_select(tiny, 3, 1));
  }
}
