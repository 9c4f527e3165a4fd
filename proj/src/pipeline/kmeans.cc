// Copyright 2026 The s2ut Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "s2ut/kmeans.h"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "s2ut/error.h"

namespace s2ut {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

int kmeans_assign(std::span<const double> point, const Tensor& centroids) {
  if (point.size() != centroids.cols()) {
    throw ShapeError("point of width " + std::to_string(point.size()) +
                     " against centroids " + centroids.shape_str());
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.rows(); ++k) {
    const double d = sq_dist(point, centroids.row(k));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

double kmeans_objective(const Tensor& points, const Tensor& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += sq_dist(points.row(i), centroids.row(kmeans_assign(points.row(i), centroids)));
  }
  return total;
}

KMeansResult kmeans_fit(const Tensor& points, int K, int iterations, std::uint64_t seed) {
  if (K < 1) throw RangeError("K must be >= 1");
  if (points.rank() != 2) throw ShapeError("kmeans expects a matrix, got " + points.shape_str());
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();

  // k-means++ seeding: each new centroid is a data point drawn with
  // probability proportional to its squared distance from the chosen ones.
  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < n && distinct.size() < std::size_t(K); ++i) {
    const auto row = points.row(i);
    distinct.insert(std::vector<double>(row.begin(), row.end()));
  }
  if (distinct.size() < std::size_t(K)) {
    throw RangeError("kmeans needs at least " + std::to_string(K) + " distinct points, got " +
                     std::to_string(distinct.size()));
  }
  std::mt19937_64 rng(seed);
  KMeansResult r;
  r.centroids = Tensor::matrix(K, dim);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (int k = 0; k < K; ++k) {
    if (k > 0) {
      double total = 0.0;
      for (double d : nearest) total += d;
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        pick = i;
        target -= nearest[i];
        if (target < 0.0) break;
      }
    }
    const auto row = points.row(pick);
    std::copy(row.begin(), row.end(), r.centroids.row(k).begin());
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(points.row(i), row));
    }
  }

  std::vector<int> assign(n, -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = kmeans_assign(points.row(i), r.centroids);
      objective += sq_dist(points.row(i), r.centroids.row(a));
      if (a != assign[i]) changed = true;
      assign[i] = a;
    }
    r.trace.push_back(objective);
    r.iterations = it + 1;
    if (!changed) break;
    Tensor sums = Tensor::matrix(K, dim);
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(assign[i]);
      const auto p = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
      ++counts[assign[i]];
    }
    for (int k = 0; k < K; ++k) {
      if (counts[k] == 0) continue;
      auto c = r.centroids.row(k);
      const auto s = sums.row(k);
      for (std::size_t j = 0; j < dim; ++j) c[j] = s[j] / double(counts[k]);
    }
  }
  r.objective = kmeans_objective(points, r.centroids);
  return r;
}

KMeansResult kmeans_fit_restarts(const Tensor& points, int K, int iterations,
                                 std::uint64_t seed, int restarts) {
  KMeansResult best;
  for (int i = 0; i < std::max(restarts, 1); ++i) {
    KMeansResult r = kmeans_fit(points, K, iterations, seed + i);
    if (i == 0 || r.objective < best.objective) best = std::move(r);
  }
  return best;
}

}  // namespace s2ut
