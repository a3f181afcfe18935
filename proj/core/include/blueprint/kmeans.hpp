#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace blueprint {

/// Row-major n x d matrix of points.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> values;

  PointSet() = default;
  PointSet(std::size_t d, std::vector<double> v) : dim(d), values(std::move(v)) {}
  static PointSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return dim ? values.size() / dim : 0; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

struct KMeansModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k x dim
  double inertia = 0.0;
  int iterations = 0;
  std::size_t best_restart = 0;

  std::span<const double> centroid(std::size_t j) const { return {centroids.data() + j * dim, dim}; }
};

struct KMeansOptions {
  std::size_t k = 4;
  int n_init = 10;
  int max_iter = 300;
  std::uint64_t seed = 0;
};

/// Inertia recorded after every assignment step of one restart.
struct KMeansTrace {
  std::vector<std::vector<double>> inertia_per_restart;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing (or max_iter), repeated n_init times; the restart with the lowest
/// inertia wins, ties going to the earlier restart. An empty cluster takes
/// the point farthest from its currently assigned centroid.
/// Throws std::invalid_argument when there are fewer points than clusters.
KMeansModel kmeans_fit(const PointSet& points, const KMeansOptions& options,
                       KMeansTrace* trace = nullptr);

/// Nearest centroid by squared distance; ties go to the lowest index.
std::size_t assign(const KMeansModel& model, std::span<const double> point);
std::vector<std::size_t> assign_all(const KMeansModel& model, const PointSet& points);

/// Sum of squared distances from each point to the centroid of its label.
double wcss(std::span<const double> centroids, const PointSet& points,
            std::span<const std::size_t> labels);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace blueprint
