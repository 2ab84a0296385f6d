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
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace polyrefine {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using ElementId = std::int64_t;

inline constexpr ElementId kNoElement = -1;

// Oriented plane {x : normal . (x - origin) = 0}. The positive side is the one
// the normal points into.
struct CuttingPlane {
  Point3 origin = Point3::Zero();
  Vec3 normal = Vec3::UnitX();

  // Normalizes `normal`; throws kMalformedInput on a zero vector.
  static CuttingPlane make(const Point3& origin, const Vec3& normal);
  // Plane through three points, normal oriented by the right-hand rule.
  static std::optional<CuttingPlane> through(const Point3& a, const Point3& b,
                                             const Point3& c);

  double signed_distance(const Point3& q) const {
    return normal.dot(q - origin);
  }
};

// Vertex loop of one planar face, counter-clockwise seen from outside.
struct PolyFace {
  std::vector<int> loop;
};

struct Polyhedron {
  std::vector<Point3> vertices;
  std::vector<PolyFace> faces;
  ElementId id = kNoElement;
};

struct BoundingBox {
  Point3 lo = Point3::Zero();
  Point3 hi = Point3::Zero();

  Vec3 extent() const { return hi - lo; }
  Point3 center() const { return 0.5 * (lo + hi); }
};

struct Diameter {
  double length = 0.0;
  int first = -1;
  int second = -1;
};

// Result of the combinatorial checks behind the Polyhedron invariants.
struct TopologyReport {
  bool faces_valid = true;  // >= 3 distinct indices, in range
  bool watertight = true;   // each undirected edge in exactly 2 faces
  bool oriented = true;     // shared edges traversed in opposite directions
  int vertices = 0;         // referenced vertices
  int edges = 0;
  int faces = 0;
  int components = 0;
  int euler = 0;            // V - E + F over referenced vertices

  bool closed_genus0() const {
    return faces_valid && watertight && oriented && components == 1 &&
           euler == 2;
  }
};

// ---- constructors for common solids ----

Polyhedron make_box(const Point3& lo, const Point3& hi);
Polyhedron make_tetrahedron(const Point3& a, const Point3& b, const Point3& c,
                            const Point3& d);
// Triangular prism with bottom (a, b, c) and top (a, b, c) + offset.
Polyhedron make_prism(const Point3& a, const Point3& b, const Point3& c,
                      const Vec3& offset);
Polyhedron make_regular_tetrahedron(double edge = 1.0);

// ---- measures ----

BoundingBox bounding_box(const Polyhedron& p);
// Maximum vertex distance; ties resolve to the lowest (first, second) pair.
Diameter diameter_pair(const Polyhedron& p);
double diameter(const Polyhedron& p);
double volume(const Polyhedron& p);
// Volume without the orientation check; negative for inverted surfaces.
double signed_volume(const Polyhedron& p);
Point3 centroid(const Polyhedron& p);

// Newell normal scaled by the face area.
Vec3 face_area_vector(const Polyhedron& p, const PolyFace& f);
Vec3 face_normal(const Polyhedron& p, const PolyFace& f);
double face_area(const Polyhedron& p, const PolyFace& f);

TopologyReport check_topology(const Polyhedron& p);
// Topology + positive volume.
bool is_valid(const Polyhedron& p);
bool is_convex(const Polyhedron& p, double rel_tol = 1e-9);

int count_edges(const Polyhedron& p);

// ---- predicates and constructions ----

// Quickhull; output faces are outward-oriented triangles and only hull
// vertices are kept.
Polyhedron convex_hull(const std::vector<Point3>& points);

// Point membership. Convex elements use the face half-space test, others use
// ray-crossing parity with re-cast rays on grazing hits.
class PointLocator {
 public:
  explicit PointLocator(const Polyhedron& p, double boundary_tol = 1e-12);

  bool contains(const Point3& q) const;
  bool convex() const { return convex_; }
  // Euclidean distance from q to the boundary surface.
  double distance_to_boundary(const Point3& q) const;

 private:
  struct FaceData {
    Vec3 normal;
    double offset = 0.0;  // normal . x = offset on the face plane
    int drop_axis = 0;
    std::vector<Eigen::Vector2d> polygon;
    std::vector<Point3> corners;
  };

  bool on_boundary(const Point3& q) const;
  std::optional<int> cast_parity(const Point3& q, const Vec3& dir) const;

  std::vector<FaceData> faces_;
  double tol_;
  double scale_;
  bool convex_ = true;
};

bool contains_point(const Polyhedron& p, const Point3& q);

// Pieces that failed to close into a genus-0 solid during a cut.
struct ClipDefect {
  int side = 0;        // -1 or +1
  int euler = 0;       // V - E + F of the offending component
  std::string reason;
};

struct ClipResult {
  std::vector<Polyhedron> negative;
  std::vector<Polyhedron> positive;
  std::vector<ClipDefect> defects;

  bool ok() const { return defects.empty(); }
  std::vector<Polyhedron> children() const;
};

// Splits p by the plane into connected negative and positive pieces, closing
// each with section faces. Throws kNoCut if the plane misses the interior.
ClipResult clip_by_plane(const Polyhedron& p, const CuttingPlane& plane);

// Convex fast path: keeps the part of a convex polyhedron on the negative side.
// Returns nullopt if nothing remains; returns p unchanged if nothing is cut.
std::optional<Polyhedron> clip_convex(const Polyhedron& p,
                                      const CuttingPlane& plane);

// Every edge length >= threshold and every face area >= threshold^2.
bool small_feature_check(const Polyhedron& p, double threshold);
double min_edge_length(const Polyhedron& p);

double inscribed_radius(const Polyhedron& p);

// ---- rigid and similarity transforms ----

Polyhedron transformed(const Polyhedron& p, const Eigen::Matrix3d& linear,
                       const Vec3& translation);
// Reverses every face loop; needed after an orientation-reversing transform.
void flip_orientation(Polyhedron& p);

}  // namespace polyrefine
