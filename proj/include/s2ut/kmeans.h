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

#ifndef S2UT_KMEANS_H_
#define S2UT_KMEANS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "s2ut/tensor.h"

namespace s2ut {

struct KMeansResult {
  Tensor centroids;                 // K x dim
  double objective = 0.0;           // sum of squared distances
  std::vector<double> trace;        // objective after each assignment pass
  std::size_t iterations = 0;
};

// Lloyd iterations from K distinct data points picked with the seed by
// k-means++ (squared-distance weighted) sampling. Stops
// early when assignments no longer change. An emptied cluster keeps its
// previous centroid. Throws RangeError with fewer than K distinct points.
KMeansResult kmeans_fit(const Tensor& points, int K, int iterations, std::uint64_t seed);

// Best of several seeded runs (seed, seed+1, ...) by final objective.
KMeansResult kmeans_fit_restarts(const Tensor& points, int K, int iterations,
                                 std::uint64_t seed, int restarts);

// Nearest centroid, lowest index on ties.
int kmeans_assign(std::span<const double> point, const Tensor& centroids);

double kmeans_objective(const Tensor& points, const Tensor& centroids);

}  // namespace s2ut

#endif  // S2UT_KMEANS_H_
