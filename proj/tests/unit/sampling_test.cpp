#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "crowdorg/sampling.hpp"
#include "crowdorg/simulation.hpp"
#include "fixtures.hpp"

using namespace crowdorg;

namespace {

// Direct evaluation of the bound with long double, kept apart from the
// library's implementation.
double bound_oracle(int n, int f) {
  long double np1 = n + 1.0L;
  long double v = 1.0L - (f / np1) * std::pow(1.0L - 1.0L / np1, static_cast<long double>(n));
  return static_cast<double>(std::clamp(v, 0.0L, 1.0L));
}

ItemCorpus flat_corpus(int count) {
  Rng rng(1);
  return generate_flat_corpus(FlatSpec::image_categories(count, 5), rng);
}

}  // namespace

TEST(CoverageBound, ReferenceOperatingPoint) {
  EXPECT_NEAR(coverage_lower_bound(115, 16), 0.949038186638006, 1e-12);
  EXPECT_NEAR(variance_upper_bound(115, 16), 0.09932652030284528, 1e-12);
  EXPECT_LE(variance_upper_bound(115, 16), 0.1);
  EXPECT_DOUBLE_EQ(coverage_lower_bound(1, 1), 0.75);
  EXPECT_DOUBLE_EQ(variance_upper_bound(1, 1), 0.4375);
}

TEST(CoverageBound, ClampsWhenFIsLarge) {
  EXPECT_EQ(coverage_lower_bound(1, 10), 0.0);
  EXPECT_EQ(variance_upper_bound(1, 10), 1.0);
  EXPECT_EQ(coverage_lower_bound(10, 0), 1.0);
}

TEST(SolveSampleSize, Values) {
  EXPECT_EQ(solve_sample_size(0.95, 16), 118);
  EXPECT_EQ(solve_sample_size(0.5, 1), 1);
  EXPECT_EQ(solve_sample_size(0.95, 20), 147);
  EXPECT_EQ(solve_sample_size(0.9, 0), 0);
  EXPECT_LT(coverage_lower_bound(115, 16), 0.95);  // the rounded preset sits just under delta
  EXPECT_THROW(solve_sample_size(1.0, 3), Error);
  EXPECT_THROW(solve_sample_size(0.0, 3), Error);
}

TEST(SolveIterations, Values) {
  EXPECT_EQ(solve_iterations(115, 16, 35), 6);
  EXPECT_EQ(solve_iterations(118, 16, 35), 6);
  EXPECT_EQ(solve_iterations(147, 20, 35), 9);
  EXPECT_EQ(solve_iterations(30, 16, 35), 1);
  EXPECT_THROW(solve_iterations(100, 35, 35), Error);
  EXPECT_EQ(planned_clustering_tasks(115, 16, 35, 15), 15LL * 6);
}

// Property: the solver returns the smallest n meeting delta, checked against
// the direct bound over a grid.
TEST(SamplingProperty, SolverIsMinimalOverGrid) {
  int cases = 0;
  for (int f = 1; f <= 40; ++f) {
    for (double delta : {0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.95, 0.975, 0.99}) {
      int n = solve_sample_size(delta, f);
      ASSERT_GE(bound_oracle(n, f), delta);
      if (n > 1) ASSERT_LT(bound_oracle(n - 1, f), delta) << "f=" << f << " delta=" << delta;
      ++cases;
    }
  }
  EXPECT_EQ(cases, 360);
}

// Property: the bound matches the oracle and is non-decreasing in n,
// non-increasing in f.
TEST(SamplingProperty, BoundMonotone) {
  for (int f = 0; f <= 30; ++f) {
    for (int n = 1; n <= 60; ++n) {
      ASSERT_NEAR(coverage_lower_bound(n, f), bound_oracle(n, f), 1e-12);
      ASSERT_LE(coverage_lower_bound(n, f), coverage_lower_bound(n + 1, f) + 1e-15);
      ASSERT_GE(coverage_lower_bound(n, f), coverage_lower_bound(n, f + 1) - 1e-15);
    }
  }
}

TEST(GenerateSample, FirstIterationHasNoKernel) {
  auto corpus = flat_corpus(100);
  Rng rng(2);
  auto s = generate_sample(nullptr, 35, corpus, {}, rng, 1, "cluster-1");
  EXPECT_EQ(s.items.size(), 35U);
  EXPECT_TRUE(s.kernel.empty());
  EXPECT_EQ(s.sample_id, "cluster-1");
}

TEST(GenerateSample, ShortCorpusYieldsSmallerSample) {
  auto corpus = flat_corpus(10);
  Rng rng(2);
  auto s = generate_sample(nullptr, 35, corpus, {}, rng);
  EXPECT_EQ(s.items.size(), 10U);
}

TEST(GenerateSample, KernelTooLargeThrows) {
  auto corpus = flat_corpus(100);
  auto id_set = corpus.ids();
  std::vector<ItemId> ids(id_set.begin(), id_set.end());
  Hierarchy t = Hierarchy::universe({});
  for (std::size_t i = 0; i < 4; ++i) t.add_items(t.add_child(t.root), {ids[i]});
  Rng rng(3);
  EXPECT_THROW(generate_sample(&t, 3, corpus, {}, rng), Error);
  EXPECT_THROW(generate_sample(&t, 4, corpus, {}, rng), Error);
}

// Property: one kernel item per leaf, new items fresh and disjoint from the
// hierarchy and the used set, total size h when the corpus allows.
TEST(SamplingProperty, SampleShape) {
  auto corpus = flat_corpus(200);
  auto id_set = corpus.ids();
  std::vector<ItemId> ids(id_set.begin(), id_set.end());
  fixtures::Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    // hierarchy over a random prefix of the corpus
    int covered = 5 + trial % 40;
    Hierarchy t = Hierarchy::universe({});
    std::vector<NodeId> leaves{t.add_child(t.root), t.add_child(t.root)};
    if (trial % 3 == 0) leaves.push_back(t.add_child(t.root));
    for (int i = 0; i < covered; ++i) {
      t.add_items(leaves[static_cast<std::size_t>(i) % leaves.size()], {ids[static_cast<std::size_t>(i)]});
    }
    ItemSet used;
    for (int i = covered; i < covered + trial % 7; ++i) used.insert(ids[static_cast<std::size_t>(i)]);
    auto s = generate_sample(&t, 20, corpus, used, rng, 2);
    ASSERT_EQ(s.kernel.size(), leaves.size());
    auto index = t.leaf_index();
    std::set<NodeId> hit;
    for (const auto& k : s.kernel) hit.insert(index.at(k));
    ASSERT_EQ(hit.size(), leaves.size());
    for (const auto& item : s.new_items()) {
      ASSERT_FALSE(t.covered_items.contains(item));
      ASSERT_FALSE(used.contains(item));
    }
    ASSERT_EQ(s.items.size(), 20U);
  }
}

TEST(SplitKernel, ContiguousBalancedPortions) {
  ItemSet k{"a", "b", "c", "d", "e"};
  auto parts = split_kernel(k, 2);
  ASSERT_EQ(parts.size(), 2U);
  EXPECT_EQ(parts[0], (ItemSet{"a", "b", "c"}));
  EXPECT_EQ(parts[1], (ItemSet{"d", "e"}));
  EXPECT_THROW(split_kernel(k, 6), Error);
  EXPECT_THROW(split_kernel(k, 0), Error);
}

TEST(IterationSamples, LargeKernelSplitsAndSharesNewItems) {
  auto corpus = flat_corpus(200);
  auto id_set = corpus.ids();
  std::vector<ItemId> ids(id_set.begin(), id_set.end());
  Hierarchy t = Hierarchy::universe({});
  for (int i = 0; i < 10; ++i) t.add_items(t.add_child(t.root), {ids[static_cast<std::size_t>(i)]});
  Rng rng(4);
  auto samples = generate_iteration_samples(&t, 12, 4, corpus, {}, rng, 3, "cluster");
  ASSERT_EQ(samples.size(), 3U);
  EXPECT_EQ(samples[0].sample_id, "cluster-3.1");
  for (const auto& s : samples) {
    EXPECT_LE(s.kernel.size(), 4U);
    EXPECT_EQ(s.new_items(), samples[0].new_items());
    EXPECT_EQ(s.new_items().size(), 8U);
  }
  auto single = generate_iteration_samples(&t, 35, 16, corpus, {}, rng, 2, "cluster");
  ASSERT_EQ(single.size(), 1U);
  EXPECT_EQ(single[0].sample_id, "cluster-2");
}

TEST(SampledCoverage, SingleConceptAlwaysCovered) {
  Rng rng(1);
  EXPECT_DOUBLE_EQ(sampled_frontier_coverage({1.0}, 1, rng), 1.0);
  EXPECT_DOUBLE_EQ(sampled_frontier_coverage({0.5, 0.5}, 0, rng), 0.0);
}

// Monte Carlo: a small grid of (f, n) pairs at delta = 0.9 with uniform and
// skewed concept distributions stays above the bound on average.
TEST(SamplingProperty, MonteCarloCoverageMeetsBound) {
  Rng rng(99);
  for (int f : {1, 3, 8}) {
    int n = solve_sample_size(0.9, f);
    for (bool skewed : {false, true}) {
      std::vector<double> p(static_cast<std::size_t>(f));
      for (int i = 0; i < f; ++i) p[static_cast<std::size_t>(i)] = skewed ? 1.0 / (i + 1) : 1.0;
      double total = std::accumulate(p.begin(), p.end(), 0.0);
      for (auto& x : p) x /= total;
      double sum = 0;
      for (int trial = 0; trial < 1000; ++trial) sum += sampled_frontier_coverage(p, n, rng);
      EXPECT_GE(sum / 1000, 0.9) << "f=" << f << " skewed=" << skewed;
    }
  }
}
