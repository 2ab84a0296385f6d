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

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "polyrefine/geometry.hpp"
#include "polyrefine/mesh.hpp"

namespace polyrefine {

inline constexpr int kHistogramBins = 20;

double uniformity_factor(const Polyhedron& p, const Mesh& m);
double uniformity_factor(const Polyhedron& p, double mesh_h);
// Inscribed-ball radius over diam(p) / 2.
double circle_ratio(const Polyhedron& p);

struct ElementQuality {
  ElementId id = kNoElement;
  double uf = 0.0;
  double cr = 0.0;
};

// Percentage of values per bin of width 1/20 over [0, 1]; 1.0 falls in the
// last bin.
using Histogram = std::array<double, kHistogramBins>;
Histogram histogram(const std::vector<double>& values);

struct QualityReport {
  std::vector<ElementQuality> elements;
  Histogram uf_histogram{};
  Histogram cr_histogram{};
  double mean_uf = 0.0;
  double mean_cr = 0.0;
  ComplexityStats stats;
};

QualityReport quality_report(const Mesh& m, const ComplexityStats& stats,
                             int threads = 1);

void write_quality_csv(const QualityReport& r, const std::string& path);
void write_histogram_csv(const QualityReport& r, const std::string& path);
// One row per labelled run; timing columns only when `timings` is set.
void write_complexity_csv(
    const std::vector<std::pair<std::string, ComplexityStats>>& rows,
    const std::string& path, bool timings);

}  // namespace polyrefine
