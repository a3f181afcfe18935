#include "blueprint/kmeans.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace blueprint {
namespace {

PointSet random_points(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 5.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n * d);
  for (auto& x : v) x = g(rng);
  return PointSet(d, std::move(v));
}

TEST(KMeans, TwoExactClusters) {
  const auto pts = PointSet::from_rows({{0}, {0}, {10}, {10}});
  const auto m = kmeans_fit(pts, {2, 10, 300, 1});
  std::vector<double> c = m.centroids;
  std::sort(c.begin(), c.end());
  EXPECT_EQ(c, (std::vector<double>{0.0, 10.0}));
  EXPECT_EQ(m.inertia, 0.0);
}

TEST(KMeans, SingleClusterIsTheMean) {
  const auto pts = PointSet::from_rows({{1, 2}, {3, 4}, {5, 0}, {-1, 2}});
  const auto m = kmeans_fit(pts, {1, 3, 300, 0});
  EXPECT_NEAR(m.centroids[0], 2.0, 1e-12);
  EXPECT_NEAR(m.centroids[1], 2.0, 1e-12);
  // Sum of squared deviations: x {1,1,9,9}, y {0,4,4,0}.
  EXPECT_NEAR(m.inertia, 28.0, 1e-12);
}

TEST(KMeans, MatchesExhaustivePartitionOracle) {
  int cases = 0;
  for (std::size_t n = 3; n <= 8; ++n) {
    for (std::size_t k = 1; k <= 3 && k <= n; ++k) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto pts = random_points(n, 1 + seed % 2, 100 * n + 10 * k + seed);
        const auto m = kmeans_fit(pts, {k, 50, 300, seed});
        EXPECT_NEAR(m.inertia, testing::exhaustive_kmeans_inertia(pts, k), 1e-9)
            << "n=" << n << " k=" << k << " seed=" << seed;
        ++cases;
      }
    }
  }
  EXPECT_GT(cases, 60);
}

TEST(KMeans, InertiaIsMonotonePerIteration) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pts = random_points(300, 2, seed);
    KMeansTrace trace;
    kmeans_fit(pts, {4, 10, 300, seed}, &trace);
    ASSERT_EQ(trace.inertia_per_restart.size(), 10u);
    for (const auto& run : trace.inertia_per_restart) {
      ASSERT_FALSE(run.empty());
      for (std::size_t i = 1; i < run.size(); ++i) EXPECT_LE(run[i], run[i - 1] * (1 + 1e-12));
    }
  }
}

TEST(KMeans, SeededDeterminism) {
  const auto pts = random_points(200, 3, 9);
  const auto a = kmeans_fit(pts, {4, 10, 300, 77});
  const auto b = kmeans_fit(pts, {4, 10, 300, 77});
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.inertia, b.inertia);
  EXPECT_EQ(a.best_restart, b.best_restart);
}

TEST(KMeans, ConvergedModelIsAFixedPointAndLocallyOptimal) {
  const auto pts = random_points(120, 2, 4);
  const auto m = kmeans_fit(pts, {4, 10, 300, 4});
  const auto labels = assign_all(m, pts);
  EXPECT_NEAR(wcss(m.centroids, pts, labels), m.inertia, 1e-9 * m.inertia);

  std::vector<double> sums(m.k * 2, 0.0);
  std::vector<double> counts(m.k, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    counts[labels[i]] += 1;
    sums[labels[i] * 2] += pts.row(i)[0];
    sums[labels[i] * 2 + 1] += pts.row(i)[1];
  }
  for (std::size_t j = 0; j < m.k; ++j) {
    ASSERT_GT(counts[j], 0.0);
    EXPECT_NEAR(m.centroids[j * 2], sums[j * 2] / counts[j], 1e-9);
    EXPECT_NEAR(m.centroids[j * 2 + 1], sums[j * 2 + 1] / counts[j], 1e-9);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double own = squared_distance(pts.row(i), m.centroid(labels[i]));
    for (std::size_t j = 0; j < m.k; ++j) EXPECT_LE(own, squared_distance(pts.row(i), m.centroid(j)));
  }
}

TEST(KMeans, DuplicatePointsKeepAllClusters) {
  const auto pts = PointSet::from_rows({{1}, {1}, {1}, {1}, {1}, {2}});
  const auto m = kmeans_fit(pts, {4, 5, 300, 0});
  EXPECT_EQ(m.k, 4u);
  EXPECT_EQ(m.centroids.size(), 4u);
  EXPECT_NEAR(m.inertia, 0.0, 1e-12);
}

TEST(KMeans, Errors) {
  EXPECT_THROW(kmeans_fit(PointSet::from_rows({{1}, {2}}), {3, 1, 10, 0}), std::invalid_argument);
  EXPECT_THROW(kmeans_fit(PointSet::from_rows({{1}, {2}}), {0, 1, 10, 0}), std::invalid_argument);
}

TEST(Assign, NearestWithLowestIndexTieBreak) {
  KMeansModel m;
  m.k = 3;
  m.dim = 1;
  m.centroids = {0.0, 5.0, 10.0};
  EXPECT_EQ(assign(m, std::vector<double>{10.0}), 2u);
  EXPECT_EQ(assign(m, std::vector<double>{5.0}), 1u);
  EXPECT_EQ(assign(m, std::vector<double>{2.4}), 0u);
  EXPECT_EQ(assign(m, std::vector<double>{2.6}), 1u);

  KMeansModel tie;
  tie.k = 3;
  tie.dim = 1;
  tie.centroids = {-1.0, 7.0, 1.0};
  EXPECT_EQ(assign(tie, std::vector<double>{0.0}), 0u);
  EXPECT_THROW(assign(tie, std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST(Wcss, Examples) {
  const auto pts = PointSet::from_rows({{3, 0}, {1, 1}});
  const std::vector<double> centroids{0, 0, 1, 1};
  const std::vector<std::size_t> labels{0, 1};
  EXPECT_EQ(wcss(centroids, pts, labels), 9.0);
  const std::vector<std::size_t> same{1, 1};
  EXPECT_EQ(wcss(centroids, pts, same), 5.0);
}

}  // namespace
}  // namespace blueprint
