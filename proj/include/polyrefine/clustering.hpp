// Copyright 2026 The polyrefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "polyrefine/geometry.hpp"

namespace polyrefine {

struct KMeansConfig {
  int n_grid_points = 20 * 20 * 20;
  int max_iterations = 100;
  std::uint64_t rng_seed = 0;
  // Start from the two farthest-apart grid points instead of random ones.
  bool deterministic_init = false;
};

struct KMeansResult {
  CuttingPlane plane;
  Point3 c1 = Point3::Zero();
  Point3 c2 = Point3::Zero();
  std::vector<int> assignment;   // 0 or 1 per point
  std::vector<double> objective; // within-cluster sum of squares per iteration
  int iterations = 0;
  int reseeds = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

// Cell-centered lattice with ceil(n^(1/3)) points per axis over the bounding
// box of p, keeping only points inside p.
std::vector<Point3> interior_grid_points(const Polyhedron& p, int n);

// Lloyd iteration for two clusters from the given initial centroids.
KMeansResult two_means(const std::vector<Point3>& points, Point3 c1, Point3 c2,
                       int max_iterations);

KMeansResult kmeans_cutting_plane(const Polyhedron& p, const KMeansConfig& cfg);

}  // namespace polyrefine
