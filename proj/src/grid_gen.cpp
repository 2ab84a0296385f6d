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

#include "polyrefine/grid_gen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "polyrefine/error.hpp"
#include "polyrefine/parallel.hpp"
#include "polyrefine/random.hpp"

namespace polyrefine {

const char* to_string(GridKind kind) {
  switch (kind) {
    case GridKind::kTetrahedra: return "tetrahedra";
    case GridKind::kCubes: return "cubes";
    case GridKind::kPrisms: return "prisms";
    case GridKind::kVoronoi: return "voronoi";
    case GridKind::kCvt: return "cvt";
  }
  return "unknown";
}

GridKind parse_grid_kind(const std::string& name) {
  for (GridKind k : {GridKind::kTetrahedra, GridKind::kCubes, GridKind::kPrisms,
                     GridKind::kVoronoi, GridKind::kCvt}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::kUsage, "unknown grid kind '" + name + "'");
}

Mesh structured_grid(const GridSpec& spec) {
  if (spec.resolution < 1) {
    throw Error(ErrorCode::kUsage, "grid resolution must be at least 1");
  }
  const int n = spec.resolution;
  auto coord = [n](int i) { return i == n ? 1.0 : static_cast<double>(i) / n; };
  Mesh mesh;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const Point3 lo(coord(i), coord(j), coord(k));
        const Point3 hi(coord(i + 1), coord(j + 1), coord(k + 1));
        auto corner = [&](int bits) {
          return Point3((bits & 1) ? hi.x() : lo.x(), (bits & 2) ? hi.y() : lo.y(),
                        (bits & 4) ? hi.z() : lo.z());
        };
        switch (spec.kind) {
          case GridKind::kCubes:
            mesh.add(make_box(lo, hi));
            break;
          case GridKind::kPrisms: {
            const Vec3 up(0, 0, hi.z() - lo.z());
            if ((i + j) % 2 == 0) {
              mesh.add(make_prism(corner(0), corner(1), corner(3), up));
              mesh.add(make_prism(corner(0), corner(3), corner(2), up));
            } else {
              mesh.add(make_prism(corner(0), corner(1), corner(2), up));
              mesh.add(make_prism(corner(1), corner(3), corner(2), up));
            }
            break;
          }
          case GridKind::kTetrahedra: {
            // Kuhn subdivision: one tetrahedron per monotone path 0 -> 7.
            std::array<int, 3> axes{1, 2, 4};
            do {
              mesh.add(make_tetrahedron(corner(0), corner(axes[0]),
                                        corner(axes[0] | axes[1]), corner(7)));
            } while (std::next_permutation(axes.begin(), axes.end()));
            break;
          }
          default:
            throw Error(ErrorCode::kUsage, "not a structured grid kind");
        }
      }
    }
  }
  return mesh;
}

std::vector<Point3> random_seeds(int count, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  std::vector<Point3> seeds(count);
  for (auto& s : seeds) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    const double z = rng.uniform();
    s = Point3(x, y, z);
  }
  return seeds;
}

Polyhedron voronoi_cell(const std::vector<Point3>& seeds, std::size_t i) {
  const Point3& s = seeds[i];
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(seeds.size());
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    if (j != i) order.emplace_back((seeds[j] - s).squaredNorm(), j);
  }
  std::sort(order.begin(), order.end());
  Polyhedron cell = make_box(Point3::Zero(), Point3::Ones());
  double reach = 0.0;  // squared distance from s to the farthest cell vertex
  for (const auto& v : cell.vertices) reach = std::max(reach, (v - s).squaredNorm());
  for (const auto& [d2, j] : order) {
    // Bisectors farther than twice the cell radius cannot cut the cell.
    if (d2 > 4.0 * reach) break;
    const Vec3 n = seeds[j] - s;
    const auto clipped =
        clip_convex(cell, CuttingPlane::make(0.5 * (s + seeds[j]), n));
    if (!clipped) {
      throw Error(ErrorCode::kDegenerateElement, "empty Voronoi cell");
    }
    cell = std::move(*clipped);
    reach = 0.0;
    for (const auto& v : cell.vertices) {
      reach = std::max(reach, (v - s).squaredNorm());
    }
  }
  return cell;
}

Mesh voronoi_from_seeds(const std::vector<Point3>& seeds, int threads) {
  if (seeds.empty()) throw Error(ErrorCode::kUsage, "no Voronoi seeds");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if ((seeds[i] - seeds[j]).norm() < 1e-9) {
        throw Error(ErrorCode::kReseed, "duplicate Voronoi seeds " +
                                            std::to_string(i) + " and " +
                                            std::to_string(j));
      }
    }
  }
  std::vector<Polyhedron> cells(seeds.size());
  std::vector<std::string> failures(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    try {
      cells[i] = voronoi_cell(seeds, i);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (const auto& f : failures) {
    if (!f.empty()) throw Error(ErrorCode::kDegenerateElement, f);
  }
  Mesh mesh;
  for (auto& c : cells) mesh.add(std::move(c));
  return mesh;
}

Mesh voronoi_grid(const GridSpec& spec) {
  if (spec.resolution < 2) {
    throw Error(ErrorCode::kUsage, "a Voronoi grid needs at least 2 seeds");
  }
  return voronoi_from_seeds(random_seeds(spec.resolution, spec.rng_seed),
                            spec.threads);
}

CvtResult lloyd(std::vector<Point3> seeds, int max_iterations, double tolerance,
                int threads) {
  CvtResult result;
  result.mesh = voronoi_from_seeds(seeds, threads);
  for (int it = 0; it < max_iterations; ++it) {
    double moved = 0.0;
    std::size_t i = 0;
    for (const auto& [id, cell] : result.mesh.elements) {
      const Point3 c = centroid(cell);
      moved = std::max(moved, (c - seeds[i]).norm());
      seeds[i++] = c;
    }
    result.mesh = voronoi_from_seeds(seeds, threads);
    result.iterations = it + 1;
    result.last_displacement = moved;
    if (moved < tolerance) break;
  }
  result.seeds = std::move(seeds);
  return result;
}

Mesh cvt_grid(const GridSpec& spec) {
  if (spec.resolution < 1) {
    throw Error(ErrorCode::kUsage, "a CVT needs at least 1 seed");
  }
  return lloyd(random_seeds(spec.resolution, spec.rng_seed), spec.cvt_iterations,
               spec.cvt_tolerance, spec.threads)
      .mesh;
}

Mesh generate_grid(const GridSpec& spec) {
  switch (spec.kind) {
    case GridKind::kVoronoi: return voronoi_grid(spec);
    case GridKind::kCvt: return cvt_grid(spec);
    default: return structured_grid(spec);
  }
}

}  // namespace polyrefine
