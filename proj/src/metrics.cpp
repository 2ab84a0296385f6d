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

#include "polyrefine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "polyrefine/error.hpp"
#include "polyrefine/parallel.hpp"

namespace polyrefine {

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double uniformity_factor(const Polyhedron& p, double mesh_h) {
  if (!(mesh_h > 0.0)) throw Error(ErrorCode::kDegenerateElement, "mesh size is zero");
  return diameter(p) / mesh_h;
}

double uniformity_factor(const Polyhedron& p, const Mesh& m) {
  return uniformity_factor(p, mesh_size(m));
}

double circle_ratio(const Polyhedron& p) {
  const double d = diameter(p);
  if (!(d > 0.0) || !(volume(p) > 0.0)) {
    throw Error(ErrorCode::kDegenerateElement, "circle ratio of a flat element");
  }
  return std::min(1.0, inscribed_radius(p) / (0.5 * d));
}

Histogram histogram(const std::vector<double>& values) {
  Histogram h{};
  if (values.empty()) return h;
  for (double v : values) {
    const int bin = std::clamp(static_cast<int>(std::floor(v * kHistogramBins)), 0,
                               kHistogramBins - 1);
    h[bin] += 1.0;
  }
  for (double& x : h) x *= 100.0 / static_cast<double>(values.size());
  return h;
}

QualityReport quality_report(const Mesh& m, const ComplexityStats& stats, int threads) {
  QualityReport r;
  r.stats = stats;
  std::vector<const Polyhedron*> elements;
  for (const auto& [id, p] : m.elements) {
    elements.push_back(&p);
    r.elements.push_back({id, 0.0, 0.0});
  }
  const double h = mesh_size(m);
  parallel_for(elements.size(), threads, [&](std::size_t i) {
    r.elements[i].uf = uniformity_factor(*elements[i], h);
    r.elements[i].cr = circle_ratio(*elements[i]);
  });
  std::vector<double> uf, cr;
  for (const auto& e : r.elements) {
    uf.push_back(e.uf);
    cr.push_back(e.cr);
    r.mean_uf += e.uf;
    r.mean_cr += e.cr;
  }
  if (!r.elements.empty()) {
    r.mean_uf /= static_cast<double>(r.elements.size());
    r.mean_cr /= static_cast<double>(r.elements.size());
  }
  r.uf_histogram = histogram(uf);
  r.cr_histogram = histogram(cr);
  return r;
}

void write_quality_csv(const QualityReport& r, const std::string& path) {
  auto out = open_csv(path);
  out << "id,uf,cr\n";
  for (const auto& e : r.elements) {
    out << e.id << ',' << fmt(e.uf) << ',' << fmt(e.cr) << '\n';
  }
}

void write_histogram_csv(const QualityReport& r, const std::string& path) {
  auto out = open_csv(path);
  out << "bin_lo,bin_hi,uf_percent,cr_percent\n";
  for (int b = 0; b < kHistogramBins; ++b) {
    out << fmt(b / double(kHistogramBins)) << ',' << fmt((b + 1) / double(kHistogramBins))
        << ',' << fmt(r.uf_histogram[b]) << ',' << fmt(r.cr_histogram[b]) << '\n';
  }
}

void write_complexity_csv(
    const std::vector<std::pair<std::string, ComplexityStats>>& rows,
    const std::string& path, bool timings) {
  auto out = open_csv(path);
  out << "run,elements,vertices,edges,faces";
  if (timings) out << ",total_refine_seconds,mean_seconds_per_element";
  out << '\n';
  for (const auto& [name, s] : rows) {
    out << name << ',' << s.n_elements << ',' << s.n_vertices << ',' << s.n_edges << ','
        << s.n_faces;
    if (timings) out << ',' << fmt(s.total_refine_time) << ',' << fmt(s.mean_time_per_element);
    out << '\n';
  }
}

}  // namespace polyrefine
