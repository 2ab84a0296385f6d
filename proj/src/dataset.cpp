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

#include "polyrefine/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "polyrefine/error.hpp"
#include "polyrefine/grid_gen.hpp"
#include "polyrefine/parallel.hpp"

namespace polyrefine {

namespace {

constexpr int kRecordBytes = kImageVoxels + 2;
constexpr int kMaxAttempts = 100;
constexpr const char* kGeneratorVersion = "polyrefine-dataset/1";

}  // namespace

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "unknown";
}

std::vector<std::size_t> LabeledDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == split) out.push_back(i);
  }
  return out;
}

std::size_t LabeledDataset::count(ShapeLabel label, Split split) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [&](const Sample& s) {
        return s.label == label && s.split == split;
      }));
}

Polyhedron base_shape(ShapeLabel label) {
  switch (label) {
    case ShapeLabel::kTetrahedron:
      return make_regular_tetrahedron(1.0);
    case ShapeLabel::kPrism:
      return make_prism({0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2.0, 0},
                        {0, 0, 1});
    case ShapeLabel::kCube:
      return make_box({0, 0, 0}, {1, 1, 1});
    case ShapeLabel::kOther:
      break;
  }
  throw Error(ErrorCode::kUsage, "class 'other' has no base shape");
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  // Shoemake's uniform unit quaternion.
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(2 * M_PI * u3), a * std::sin(2 * M_PI * u2),
                             a * std::cos(2 * M_PI * u2), b * std::sin(2 * M_PI * u3));
  return q.normalized().toRotationMatrix();
}

Polyhedron perturbed_shape(ShapeLabel label, Rng& rng,
                           const PerturbationConfig& cfg) {
  Polyhedron p = base_shape(label);
  if (!cfg.enabled) return p;
  const Vec3 stretch(rng.uniform(cfg.stretch_min, cfg.stretch_max),
                     rng.uniform(cfg.stretch_min, cfg.stretch_max),
                     rng.uniform(cfg.stretch_min, cfg.stretch_max));
  Eigen::Matrix3d linear = stretch.asDiagonal();
  if (rng.bernoulli(cfg.rotation_probability)) linear = random_rotation(rng) * linear;
  if (rng.bernoulli(cfg.reflection_probability)) {
    linear.row(0) *= -1.0;
  }
  p = transformed(p, linear, Vec3::Zero());
  const double amplitude = cfg.jitter * diameter(p);
  std::vector<Point3> points = p.vertices;
  for (auto& v : points) {
    v += Vec3(rng.uniform(-amplitude, amplitude), rng.uniform(-amplitude, amplitude),
              rng.uniform(-amplitude, amplitude));
  }
  return convex_hull(points);
}

std::vector<Sample> gen_shape_samples(ShapeLabel label, int count,
                                      std::uint64_t rng_seed,
                                      const PerturbationConfig& cfg,
                                      int threads) {
  if (count < 1) throw Error(ErrorCode::kUsage, "sample count must be positive");
  std::vector<Sample> out(count);
  std::vector<int> failed(count, 0);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
    Rng rng(mix_seed(rng_seed, i));
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      try {
        const BinaryImage img = voxelize(perturbed_shape(label, rng, cfg));
        if (img.occupied() < kMinOccupiedVoxels) continue;
        out[i].image = img;
        out[i].label = label;
        return;
      } catch (const Error&) {
      }
    }
    failed[i] = 1;
  });
  if (std::find(failed.begin(), failed.end(), 1) != failed.end()) {
    throw Error(ErrorCode::kDegenerateElement, "could not generate a valid sample");
  }
  return out;
}

std::vector<Sample> gen_other_samples(int count, std::uint64_t rng_seed,
                                      int min_seeds, int max_seeds, int threads) {
  if (count < 1) throw Error(ErrorCode::kUsage, "sample count must be positive");
  if (min_seeds < 2 || max_seeds < min_seeds) {
    throw Error(ErrorCode::kUsage, "invalid Voronoi seed range");
  }
  std::vector<Sample> out(count);
  std::vector<int> failed(count, 0);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
    Rng rng(mix_seed(rng_seed, i));
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      try {
        const int n = min_seeds + static_cast<int>(rng.below(max_seeds - min_seeds + 1));
        std::vector<Point3> seeds(n);
        for (auto& s : seeds) {
          const double x = rng.uniform(), y = rng.uniform(), z = rng.uniform();
          s = Point3(x, y, z);
        }
        const BinaryImage img = voxelize(voronoi_cell(seeds, rng.below(n)));
        if (img.occupied() < kMinOccupiedVoxels) continue;
        out[i].image = img;
        out[i].label = ShapeLabel::kOther;
        return;
      } catch (const Error&) {
      }
    }
    failed[i] = 1;
  });
  if (std::find(failed.begin(), failed.end(), 1) != failed.end()) {
    throw Error(ErrorCode::kDegenerateElement, "could not generate a valid sample");
  }
  return out;
}

LabeledDataset split(std::vector<Sample> samples, std::uint64_t rng_seed) {
  LabeledDataset data;
  data.rng_seed = rng_seed;
  Rng rng(rng_seed);
  for (ShapeLabel label : kAllLabels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].label == label) idx.push_back(i);
    }
    if (idx.size() < 5) {
      throw Error(ErrorCode::kEmptySplit,
                  std::string("class '") + to_string(label) +
                      "' needs at least 5 samples to split");
    }
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[rng.below(i)]);
    }
    const auto n = static_cast<double>(idx.size());
    const std::size_t n_train = static_cast<std::size_t>(std::lround(0.6 * n));
    const std::size_t n_val = static_cast<std::size_t>(std::lround(0.2 * n));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      samples[idx[k]].split = k < n_train           ? Split::kTrain
                              : k < n_train + n_val ? Split::kValidation
                                                    : Split::kTest;
    }
  }
  data.samples = std::move(samples);
  return data;
}

LabeledDataset generate_dataset(const DatasetConfig& cfg) {
  std::vector<Sample> all;
  int stream = 0;
  for (ShapeLabel label :
       {ShapeLabel::kTetrahedron, ShapeLabel::kPrism, ShapeLabel::kCube}) {
    auto part = gen_shape_samples(label, cfg.per_shape,
                                  mix_seed(cfg.rng_seed, stream++),
                                  cfg.perturbation, cfg.threads);
    all.insert(all.end(), part.begin(), part.end());
  }
  auto other = gen_other_samples(cfg.other, mix_seed(cfg.rng_seed, stream++),
                                 cfg.min_other_seeds, cfg.max_other_seeds,
                                 cfg.threads);
  all.insert(all.end(), other.begin(), other.end());
  return split(std::move(all), mix_seed(cfg.rng_seed, stream));
}

void save_dataset(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const Sample& s : data.samples) {
    out.write(reinterpret_cast<const char*>(s.image.voxels.data()), kImageVoxels);
    out.put(static_cast<char>(s.label));
    out.put(static_cast<char>(s.split));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);

  nlohmann::ordered_json manifest;
  manifest["generator"] = kGeneratorVersion;
  manifest["rng_seed"] = data.rng_seed;
  manifest["record_bytes"] = kRecordBytes;
  manifest["samples"] = data.samples.size();
  nlohmann::ordered_json counts;
  for (ShapeLabel label : kAllLabels) {
    nlohmann::ordered_json per;
    for (Split sp : {Split::kTrain, Split::kValidation, Split::kTest}) {
      per[to_string(sp)] = data.count(label, sp);
    }
    counts[to_string(label)] = per;
  }
  manifest["counts"] = counts;
  std::ofstream m(path + ".manifest.json");
  if (!m) throw Error(ErrorCode::kIo, "cannot write manifest for " + path);
  m << manifest.dump(2) << "\n";
}

LabeledDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (bytes.size() % kRecordBytes != 0) {
    throw Error(ErrorCode::kFormat,
                path + ": size " + std::to_string(bytes.size()) +
                    " is not a multiple of the record size " +
                    std::to_string(kRecordBytes));
  }
  LabeledDataset data;
  const std::size_t records = bytes.size() / kRecordBytes;
  data.samples.resize(records);
  for (std::size_t r = 0; r < records; ++r) {
    const std::size_t base = r * kRecordBytes;
    Sample& s = data.samples[r];
    for (int v = 0; v < kImageVoxels; ++v) {
      const auto b = static_cast<unsigned char>(bytes[base + v]);
      if (b > 1) {
        throw Error(ErrorCode::kFormat, path + ": non-binary voxel at offset " +
                                            std::to_string(base + v));
      }
      s.image.voxels[v] = b;
    }
    const auto label = static_cast<unsigned char>(bytes[base + kImageVoxels]);
    const auto sp = static_cast<unsigned char>(bytes[base + kImageVoxels + 1]);
    if (label >= kNumLabels || sp > 2) {
      throw Error(ErrorCode::kFormat, path + ": bad label or split byte at offset " +
                                          std::to_string(base + kImageVoxels));
    }
    s.label = static_cast<ShapeLabel>(label);
    s.split = static_cast<Split>(sp);
  }
  std::ifstream m(path + ".manifest.json");
  if (m) {
    try {
      const auto manifest = nlohmann::json::parse(m);
      data.rng_seed = manifest.value("rng_seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ".manifest.json: " + e.what());
    }
  }
  return data;
}

}  // namespace polyrefine
