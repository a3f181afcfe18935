#include "blueprint/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "blueprint/random.hpp"

namespace blueprint {

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
  PointSet ps;
  if (rows.empty()) return ps;
  ps.dim = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != ps.dim) throw std::invalid_argument("PointSet: ragged rows");
    ps.values.insert(ps.values.end(), r.begin(), r.end());
  }
  return ps;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

std::size_t nearest(std::span<const double> centroids, std::size_t k, std::size_t dim,
                    std::span<const double> p, double* dist_out = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const double d = squared_distance(centroids.subspan(j * dim, dim), p);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

std::vector<double> kmeanspp_init(const PointSet& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.size();
  const std::size_t d = pts.dim;
  std::vector<double> centroids;
  centroids.reserve(k * d);
  const auto first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  centroids.insert(centroids.end(), pts.row(first).begin(), pts.row(first).end());

  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = squared_distance(pts.row(i), pts.row(first));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : closest) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (target < closest[i]) {
          pick = i;
          break;
        }
        target -= closest[i];
      }
    } else {
      // Every point coincides with a chosen center.
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    const auto row = pts.row(pick);
    centroids.insert(centroids.end(), row.begin(), row.end());
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], squared_distance(pts.row(i), row));
    }
  }
  return centroids;
}

struct LloydResult {
  std::vector<double> centroids;
  double inertia = 0.0;
  int iterations = 0;
};

LloydResult lloyd(const PointSet& pts, std::size_t k, std::vector<double> centroids, int max_iter,
                  std::vector<double>* trace) {
  const std::size_t n = pts.size();
  const std::size_t d = pts.dim;
  std::vector<std::size_t> labels(n, k);  // k marks "unassigned"
  std::vector<double> dist(n);
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);
  LloydResult res;

  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = nearest(centroids, k, d, pts.row(i), &dist[i]);
      changed |= j != labels[i];
      labels[i] = j;
      inertia += dist[i];
    }
    if (trace) trace->push_back(inertia);
    res.iterations = it + 1;
    res.inertia = inertia;
    if (!changed) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[labels[i]];
      const auto p = pts.row(i);
      for (std::size_t c = 0; c < d; ++c) sums[labels[i] * d + c] += p[c];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) {
        // Relocate to the point worst served by its current centroid; that
        // point leaves a cluster with at least two members or the distance
        // would be zero.
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (dist[i] > dist[far]) far = i;
        }
        const std::size_t from = labels[far];
        const auto p = pts.row(far);
        for (std::size_t c = 0; c < d; ++c) {
          sums[from * d + c] -= p[c];
          sums[j * d + c] = p[c];
        }
        --counts[from];
        counts[j] = 1;
        labels[far] = j;
        dist[far] = 0.0;
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;  // duplicate points exhausted the donors
      for (std::size_t c = 0; c < d; ++c) centroids[j * d + c] = sums[j * d + c] / counts[j];
    }
  }

  // A max_iter stop leaves centroids that were updated after the last
  // assignment; report the inertia they actually achieve.
  double final_inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double di = 0.0;
    nearest(centroids, k, d, pts.row(i), &di);
    final_inertia += di;
  }
  res.inertia = final_inertia;
  res.centroids = std::move(centroids);
  return res;
}

}  // namespace

KMeansModel kmeans_fit(const PointSet& points, const KMeansOptions& options, KMeansTrace* trace) {
  const std::size_t n = points.size();
  if (options.k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (n < options.k) {
    throw std::invalid_argument("kmeans: " + std::to_string(n) + " points cannot form " +
                                std::to_string(options.k) + " clusters");
  }
  if (options.n_init < 1 || options.max_iter < 1) {
    throw std::invalid_argument("kmeans: n_init and max_iter must be positive");
  }
  for (double v : points.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("kmeans: non-finite point");
  }

  KMeansModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  if (trace) trace->inertia_per_restart.assign(static_cast<std::size_t>(options.n_init), {});

  for (int r = 0; r < options.n_init; ++r) {
    Rng rng(derive_seed(options.seed, streams::kmeans + static_cast<std::uint64_t>(r)));
    auto init = kmeanspp_init(points, options.k, rng);
    auto run = lloyd(points, options.k, std::move(init), options.max_iter,
                     trace ? &trace->inertia_per_restart[static_cast<std::size_t>(r)] : nullptr);
    if (run.inertia < best.inertia) {
      best.k = options.k;
      best.dim = points.dim;
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.iterations = run.iterations;
      best.best_restart = static_cast<std::size_t>(r);
    }
  }
  return best;
}

std::size_t assign(const KMeansModel& model, std::span<const double> point) {
  if (point.size() != model.dim) throw std::invalid_argument("assign: dimension mismatch");
  return nearest(model.centroids, model.k, model.dim, point);
}

std::vector<std::size_t> assign_all(const KMeansModel& model, const PointSet& points) {
  std::vector<std::size_t> labels(points.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = assign(model, points.row(i));
  return labels;
}

double wcss(std::span<const double> centroids, const PointSet& points,
            std::span<const std::size_t> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    s += squared_distance(points.row(i), centroids.subspan(labels[i] * points.dim, points.dim));
  }
  return s;
}

}  // namespace blueprint
