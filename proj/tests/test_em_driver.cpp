#include "doctest.h"

#include <algorithm>
#include <set>

#include "galclean/driver.hpp"

using namespace galclean;

namespace {

// Desk-scale noisy fixture shared by the driver tests: SBM with planted
// inter-class noise and fast training settings.
struct Fixture {
  Bundle bundle;
  InjectionResult injected;
  SplitSet splits;
  DataView data;
  GalcleanConfig cfg;

  explicit Fixture(int classes = 4, int per_class = 50, double noise_ratio = 1.0, std::uint64_t seed = 11) {
    bundle = generate_sbm(classes, per_class, 0.2, 0.0, 8, 0.4, seed);
    injected = inject_random_interclass_edges(bundle.graph, bundle.labels, noise_ratio, seed + 1);
    splits = make_splits(bundle.labels, seed + 2, 10, 20);
    data.graph = &injected.graph;
    data.x = &bundle.features;
    data.labels = &bundle.labels;
    data.noise_provenance = &injected.added;

    cfg.repr.epochs = 30;
    cfg.repr.hidden_dim = 16;
    cfg.repr.embed_dim = 8;
    cfg.select.batch_size = 10;
    cfg.cleaning.edge_epochs = 40;
    cfg.cleaning.hidden_dim = 16;
    cfg.cleaning.z_dim = 8;
  }
};

}  // namespace

TEST_CASE("LabelOracle accounting") {
  LabelStore labels{{0, 1, 0, 1}, 2};
  LabelOracle oracle(labels, 2);
  CHECK(oracle.query(1) == 1);
  CHECK(oracle.budget_used() == 1);
  CHECK_THROWS_AS(oracle.query(1), std::logic_error);  // repeat rejected, not charged
  CHECK(oracle.budget_used() == 1);
  CHECK(oracle.query(2) == 0);
  CHECK_THROWS_AS(oracle.query(3), std::runtime_error);  // budget exhausted
  CHECK(oracle.budget_used() == 2);
}

TEST_CASE("run_galclean budget arithmetic") {
  SUBCASE("B=0 returns the initial set and the observed graph unchanged") {
    Fixture f;
    f.cfg.budget = 0;
    LabelOracle oracle(f.bundle.labels, 0);
    auto res = run_galclean(f.data, f.splits, oracle, f.cfg, 1);
    CHECK(res.trace.iterations.empty());
    CHECK(res.labeled == f.splits.initial);
    CHECK(res.graph.num_edges() == f.injected.graph.num_edges());
    for (const Edge& e : res.graph.edge_list()) CHECK(e.weight == 1.0);
  }
  SUBCASE("B=20, S=10: two iterations, labeled set grows 2C -> 2C+10 -> 2C+20") {
    Fixture f;
    f.cfg.budget = 20;
    LabelOracle oracle(f.bundle.labels, 20);
    auto res = run_galclean(f.data, f.splits, oracle, f.cfg, 1);
    REQUIRE(res.trace.iterations.size() == 2);
    CHECK(res.trace.iterations[0].labeled_size == 8 + 10);
    CHECK(res.trace.iterations[1].labeled_size == 8 + 20);
    CHECK(oracle.budget_used() == 20);
  }
  SUBCASE("C=7, B=8C=56, S=10: six iterations with a final batch of 6") {
    Fixture f(7, 40, 1.0, 21);
    f.cfg.budget = 56;
    LabelOracle oracle(f.bundle.labels, 56);
    auto res = run_galclean(f.data, f.splits, oracle, f.cfg, 2);
    REQUIRE(res.trace.iterations.size() == 6);
    CHECK(res.trace.iterations.back().selected.size() == 6);
    CHECK(oracle.budget_used() == 56);
    CHECK(res.labeled.size() == 14 + 56);
  }
}

TEST_CASE("run_galclean invariants") {
  Fixture f;
  f.cfg.budget = 30;
  LabelOracle oracle(f.bundle.labels, 30);
  auto res = run_galclean(f.data, f.splits, oracle, f.cfg, 5);

  SUBCASE("budget safety and growth") {
    CHECK(oracle.budget_used() <= oracle.budget_total());
    CHECK(res.labeled.size() == f.splits.initial.size() + 30);
    int prev = static_cast<int>(f.splits.initial.size());
    for (const auto& rec : res.trace.iterations) {
      CHECK(rec.labeled_size == prev + static_cast<int>(rec.selected.size()));
      prev = rec.labeled_size;
    }
  }
  SUBCASE("selections are disjoint from earlier labeled sets and the splits") {
    std::set<int> seen(f.splits.initial.begin(), f.splits.initial.end());
    std::set<int> off_pool(f.splits.valid.begin(), f.splits.valid.end());
    off_pool.insert(f.splits.test.begin(), f.splits.test.end());
    for (const auto& rec : res.trace.iterations)
      for (int v : rec.selected) {
        CHECK(seen.insert(v).second);
        CHECK(!off_pool.count(v));
      }
  }
  SUBCASE("cleaned graph keeps the observed support") {
    CHECK(res.graph.num_edges() == f.injected.graph.num_edges());
    for (const Edge& e : res.graph.edge_list()) {
      CHECK(f.injected.graph.has_edge(e.u, e.v));
      CHECK(e.weight > 0.0);
      CHECK(e.weight <= 1.0);
    }
  }
  SUBCASE("full pipeline determinism") {
    LabelOracle o2(f.bundle.labels, 30);
    auto res2 = run_galclean(f.data, f.splits, o2, f.cfg, 5);
    CHECK(res2.labeled == res.labeled);
    REQUIRE(res2.graph.num_edges() == res.graph.num_edges());
    for (std::size_t i = 0; i < res.graph.edge_list().size(); ++i)
      CHECK(res.graph.edge_list()[i].weight == res2.graph.edge_list()[i].weight);
    REQUIRE(res2.trace.iterations.size() == res.trace.iterations.size());
    for (std::size_t i = 0; i < res.trace.iterations.size(); ++i) {
      CHECK(res.trace.iterations[i].selected == res2.trace.iterations[i].selected);
      CHECK(res.trace.iterations[i].repr_loss == res2.trace.iterations[i].repr_loss);
    }
  }
  SUBCASE("a different seed selects differently") {
    LabelOracle o3(f.bundle.labels, 30);
    auto res3 = run_galclean(f.data, f.splits, o3, f.cfg, 6);
    CHECK(res3.labeled != res.labeled);
  }
}

TEST_CASE("run_refinement") {
  Fixture f;
  f.cfg.budget = 20;
  LabelOracle oracle(f.bundle.labels, 20);
  auto res = run_galclean(f.data, f.splits, oracle, f.cfg, 7);
  const auto labeled_before = res.labeled;

  SUBCASE("zero extra iterations change nothing") {
    auto copy = res;
    run_refinement(copy, f.data, f.cfg, 0, 7);
    CHECK(copy.trace.iterations.size() == res.trace.iterations.size());
    for (std::size_t i = 0; i < res.graph.edge_list().size(); ++i)
      CHECK(copy.graph.edge_list()[i].weight == res.graph.edge_list()[i].weight);
  }
  SUBCASE("no oracle queries and a fixed labeled set") {
    const int used = oracle.budget_used();
    run_refinement(res, f.data, f.cfg, 3, 7);
    CHECK(oracle.budget_used() == used);
    CHECK(res.labeled == labeled_before);
    int refinement_records = 0;
    for (const auto& rec : res.trace.iterations)
      if (rec.refinement) {
        ++refinement_records;
        CHECK(rec.selected.empty());
      }
    CHECK(refinement_records == 3);
  }
  SUBCASE("refinement keeps pushing injected-edge weights down on the noisy fixture") {
    auto before = res.trace.iterations.back();
    REQUIRE(before.mean_noisy_weight.has_value());
    run_refinement(res, f.data, f.cfg, 3, 7);
    auto after = res.trace.iterations.back();
    REQUIRE(after.mean_noisy_weight.has_value());
    CHECK(*after.mean_noisy_weight <= *before.mean_noisy_weight + 0.02);
  }
}

TEST_CASE("run_random_baseline") {
  Fixture f;
  f.cfg.budget = 25;
  SUBCASE("labels exactly initial + B nodes, disjoint from initial") {
    LabelOracle oracle(f.bundle.labels, 25);
    auto res = run_random_baseline(f.data, f.splits, oracle, f.cfg, 3);
    CHECK(res.labeled.size() == f.splits.initial.size() + 25);
    CHECK(oracle.budget_used() == 25);
    std::set<int> initial(f.splits.initial.begin(), f.splits.initial.end());
    for (int v : res.trace.iterations[0].selected) CHECK(!initial.count(v));
  }
  SUBCASE("deterministic per seed") {
    LabelOracle o1(f.bundle.labels, 25);
    LabelOracle o2(f.bundle.labels, 25);
    auto r1 = run_random_baseline(f.data, f.splits, o1, f.cfg, 3);
    auto r2 = run_random_baseline(f.data, f.splits, o2, f.cfg, 3);
    CHECK(r1.labeled == r2.labeled);
  }
  SUBCASE("graph passes through unchanged") {
    LabelOracle oracle(f.bundle.labels, 25);
    auto res = run_random_baseline(f.data, f.splits, oracle, f.cfg, 3);
    CHECK(res.graph.num_edges() == f.injected.graph.num_edges());
    for (const Edge& e : res.graph.edge_list()) CHECK(e.weight == 1.0);
  }
}
