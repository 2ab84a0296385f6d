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
#include <string>
#include <vector>

#include "polyrefine/geometry.hpp"
#include "polyrefine/labels.hpp"
#include "polyrefine/random.hpp"
#include "polyrefine/voxel.hpp"

namespace polyrefine {

enum class Split : std::uint8_t { kTrain = 0, kValidation = 1, kTest = 2 };

const char* to_string(Split split);

struct Sample {
  BinaryImage image;
  ShapeLabel label = ShapeLabel::kOther;
  Split split = Split::kTrain;
};

struct LabeledDataset {
  std::vector<Sample> samples;
  std::uint64_t rng_seed = 0;

  std::vector<std::size_t> indices(Split split) const;
  std::size_t count(ShapeLabel label, Split split) const;
};

struct PerturbationConfig {
  bool enabled = true;
  double stretch_min = 0.6;
  double stretch_max = 1.6;
  double rotation_probability = 0.5;
  double reflection_probability = 0.5;
  double jitter = 0.05;  // fraction of the shape diameter
};

struct DatasetConfig {
  int per_shape = 600;
  int other = 450;
  std::uint64_t rng_seed = 0;
  int threads = 1;
  PerturbationConfig perturbation;
  int min_other_seeds = 8;
  int max_other_seeds = 64;
};

inline constexpr int kMinOccupiedVoxels = 32;

// Regular tetrahedron, regular triangular prism (unit edges), unit cube.
Polyhedron base_shape(ShapeLabel label);

Eigen::Matrix3d random_rotation(Rng& rng);

Polyhedron perturbed_shape(ShapeLabel label, Rng& rng,
                           const PerturbationConfig& cfg);

// Sample i draws from its own stream mix_seed(rng_seed, i).
std::vector<Sample> gen_shape_samples(ShapeLabel label, int count,
                                      std::uint64_t rng_seed,
                                      const PerturbationConfig& cfg = {},
                                      int threads = 1);
std::vector<Sample> gen_other_samples(int count, std::uint64_t rng_seed,
                                      int min_seeds = 8, int max_seeds = 64,
                                      int threads = 1);

// Stratified 60/20/20 assignment with a seeded shuffle per class.
LabeledDataset split(std::vector<Sample> samples, std::uint64_t rng_seed);

LabeledDataset generate_dataset(const DatasetConfig& cfg);

// Binary records of 4096 voxel bytes, a label byte and a split byte, plus a
// JSON manifest at `path + ".manifest.json"`.
void save_dataset(const LabeledDataset& data, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

}  // namespace polyrefine
