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

#include "polyrefine/refine.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Eigenvalues>

#include "polyrefine/error.hpp"
#include "polyrefine/parallel.hpp"
#include "polyrefine/voxel.hpp"

namespace polyrefine {

namespace {

// Sizes equal to the target up to rounding count as reached.
constexpr double kSizeSlack = 1e-9;
// Largest child diameter over parent diameter for an affine image of the
// reference shape; well above it the reference shape is a poor fit.
double pattern_shrink(ShapeLabel label) {
  return label == ShapeLabel::kTetrahedron ? std::sqrt(0.5) : 0.5;
}
constexpr double kPatternSlack = 1.1;

using Key = std::array<double, 3>;

Key key(const Point3& p) { return {p.x(), p.y(), p.z()}; }

double element_tol(const RefineConfig& cfg, double diam) {
  return cfg.tol > 0.0 ? cfg.tol : cfg.tol_factor * diam;
}

double element_target(const RefineConfig& cfg, double diam) {
  return cfg.target_h > 0.0 ? cfg.target_h : cfg.target_factor * diam;
}

bool straddles(const Polyhedron& p, const CuttingPlane& plane, double band) {
  bool neg = false, pos = false;
  for (const auto& v : p.vertices) {
    const double d = plane.signed_distance(v);
    neg |= d < -band;
    pos |= d > band;
  }
  return neg && pos;
}

Vec3 random_axis(Rng& rng) {
  while (true) {
    const Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double n = v.norm();
    if (n > 1e-6 && n <= 1.0) return v / n;
  }
}

struct CutOutcome {
  bool ok = false;
  std::vector<Polyhedron> children;
  int emergency_attempts = 0;
};

CutOutcome attempt_cut(const Polyhedron& piece, const CuttingPlane& plane,
                       double tol, const RefineConfig& cfg, Rng& rng) {
  CutOutcome out;
  const SnapResult snap = snap_plane(plane, piece, tol);
  try {
    const ClipResult cut = clip_by_plane(piece, snap.plane);
    if (validity_check(piece, cut, tol)) {
      out.ok = true;
      out.children = cut.children();
      return out;
    }
  } catch (const Error&) {
  }
  try {
    const EmergencyResult em = emergency_strategy(piece, plane, tol, cfg, rng);
    out.ok = true;
    out.children = em.cut.children();
    out.emergency_attempts = em.attempts;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnrefinable) throw;
    out.emergency_attempts = cfg.emergency_attempts;
  }
  return out;
}

CuttingPlane kmeans_source(const Polyhedron& piece, const RefineConfig& cfg,
                           Rng& rng) {
  KMeansConfig kc;
  kc.n_grid_points = cfg.kmeans_grid_points;
  kc.max_iterations = cfg.kmeans_max_iterations;
  kc.rng_seed = rng();
  try {
    return kmeans_cutting_plane(piece, kc).plane;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kResolutionTooCoarse &&
        e.code() != ErrorCode::kDegenerateElement) {
      throw;
    }
    return diameter_plane(piece);
  }
}

ElementResult kmeans_refine(const Polyhedron& p, const RefineConfig& cfg,
                            Rng& rng) {
  ElementResult r = refine_with_source(
      p, [&cfg](const Polyhedron& piece, Rng& g) { return kmeans_source(piece, cfg, g); },
      cfg, rng);
  r.applied = Strategy::kKMeans;
  return r;
}

Strategy classical_for(ShapeLabel label) {
  switch (label) {
    case ShapeLabel::kTetrahedron: return Strategy::kClassicalTet;
    case ShapeLabel::kPrism: return Strategy::kClassicalPrism;
    default: return Strategy::kClassicalCube;
  }
}

// Classical pattern for `label`, or k-means when the reference shape cannot
// be built or none of its planes cuts.
ElementResult classical_refine(const Polyhedron& p, ShapeLabel label,
                               const RefineConfig& cfg, Rng& rng) {
  try {
    const ReferenceShape ref = reference_shape(p, label);
    ElementResult r = refine_with_pattern(p, classical_planes(ref), cfg, rng);
    double largest = 0.0;
    for (const auto& c : r.children) largest = std::max(largest, diameter(c));
    if (!r.unrefinable && largest <= kPatternSlack * pattern_shrink(label) * diameter(p)) {
      r.applied = classical_for(label);
      return r;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateReference) throw;
  }
  ElementResult r = kmeans_refine(p, cfg, rng);
  r.note = "reference shape unusable, k-means fallback";
  return r;
}

Rng element_rng(const Polyhedron& p, const RefineConfig& cfg) {
  return Rng(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(p.id)));
}

}  // namespace

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kDiameter: return "diameter";
    case Strategy::kKMeans: return "kmeans";
    case Strategy::kCnn: return "cnn";
    case Strategy::kClassicalTet: return "classical:tet";
    case Strategy::kClassicalPrism: return "classical:prism";
    case Strategy::kClassicalCube: return "classical:cube";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::kDiameter, Strategy::kKMeans, Strategy::kCnn,
                     Strategy::kClassicalTet, Strategy::kClassicalPrism,
                     Strategy::kClassicalCube}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::kUsage, "unknown strategy '" + name + "'");
}

SnapResult snap_plane(const CuttingPlane& plane, const Polyhedron& p, double tol) {
  std::vector<int> near;
  for (std::size_t i = 0; i < p.vertices.size(); ++i) {
    if (std::abs(plane.signed_distance(p.vertices[i])) <= tol) {
      near.push_back(static_cast<int>(i));
    }
  }
  SnapResult r{plane, static_cast<int>(near.size()), false};
  const auto oriented = [&](Vec3 n) {
    return n.dot(plane.normal) < 0.0 ? Vec3(-n) : n;
  };
  const auto through_two = [&](const Point3& a, const Point3& b) {
    const Vec3 dir = (b - a).normalized();
    const Vec3 n = plane.normal - plane.normal.dot(dir) * dir;
    if (n.norm() < 1e-12) return CuttingPlane{a, plane.normal};
    return CuttingPlane{a, oriented(n.normalized())};
  };
  if (near.empty()) return r;
  const auto& v = p.vertices;
  if (near.size() == 1) {
    r.plane.origin = v[near[0]];
  } else if (near.size() == 2) {
    r.plane = through_two(v[near[0]], v[near[1]]);
  } else if (near.size() == 3) {
    const auto exact = CuttingPlane::through(v[near[0]], v[near[1]], v[near[2]]);
    if (exact) {
      r.plane = {exact->origin, oriented(exact->normal)};
    } else {
      // Collinear: use the two farthest apart.
      int a = 0, b = 1;
      double best = -1.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
          const double d = (v[near[i]] - v[near[j]]).norm();
          if (d > best) {
            best = d;
            a = i;
            b = j;
          }
        }
      }
      r.plane = through_two(v[near[a]], v[near[b]]);
    }
  } else {
    Point3 mean = Point3::Zero();
    for (int i : near) mean += v[i];
    mean /= static_cast<double>(near.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int i : near) cov += (v[i] - mean) * (v[i] - mean).transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    r.plane = {mean, oriented(eig.eigenvectors().col(0).normalized())};
    r.least_squares = true;
  }
  return r;
}

bool validity_check(const std::vector<Polyhedron>& children, double tol) {
  for (const auto& c : children) {
    if (!check_topology(c).closed_genus0()) return false;
    if (!(signed_volume(c) > 0.0)) return false;
    if (!small_feature_check(c, tol)) return false;
  }
  return !children.empty();
}

bool validity_check(const Polyhedron& parent, const ClipResult& cut, double tol) {
  if (!cut.ok() || cut.negative.empty() || cut.positive.empty()) return false;
  std::set<Key> parent_vertices;
  for (const auto& v : parent.vertices) parent_vertices.insert(key(v));
  std::set<std::pair<Key, Key>> parent_edges;
  std::set<std::vector<Key>> parent_faces;
  for (const auto& f : parent.faces) {
    std::vector<Key> corners;
    for (std::size_t i = 0; i < f.loop.size(); ++i) {
      const Key a = key(parent.vertices[f.loop[i]]);
      const Key b = key(parent.vertices[f.loop[(i + 1) % f.loop.size()]]);
      parent_edges.emplace(std::min(a, b), std::max(a, b));
      corners.push_back(a);
    }
    std::sort(corners.begin(), corners.end());
    parent_faces.insert(std::move(corners));
  }
  for (const auto& child : cut.children()) {
    if (!check_topology(child).closed_genus0()) return false;
    if (!(signed_volume(child) > 0.0)) return false;
    for (const auto& f : child.faces) {
      std::vector<Key> corners;
      for (std::size_t i = 0; i < f.loop.size(); ++i) {
        const Point3& pa = child.vertices[f.loop[i]];
        const Point3& pb = child.vertices[f.loop[(i + 1) % f.loop.size()]];
        corners.push_back(key(pa));
        if ((pb - pa).norm() >= tol) continue;
        const Key a = key(pa), b = key(pb);
        if (!parent_edges.count({std::min(a, b), std::max(a, b)})) return false;
      }
      if (face_area(child, f) >= tol * tol) continue;
      std::sort(corners.begin(), corners.end());
      if (!parent_faces.count(corners)) return false;
    }
  }
  return true;
}

EmergencyResult emergency_strategy(const Polyhedron& p, const CuttingPlane& plane,
                                   double tol, const RefineConfig& cfg, Rng& rng) {
  const double diam = diameter(p);
  const double max_angle = cfg.emergency_angle_deg * M_PI / 180.0;
  for (int attempt = 1; attempt <= cfg.emergency_attempts; ++attempt) {
    const double shift = rng.uniform(-1.0, 1.0) * cfg.emergency_shift * diam;
    const Vec3 axis = random_axis(rng);
    const double angle = rng.uniform(0.0, max_angle);
    const Vec3 normal = Eigen::AngleAxisd(angle, axis) * plane.normal;
    const CuttingPlane candidate =
        CuttingPlane::make(plane.origin + shift * plane.normal, normal);
    try {
      ClipResult cut = clip_by_plane(p, candidate);
      if (validity_check(p, cut, tol)) {
        return {candidate, std::move(cut), attempt};
      }
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::kUnrefinable,
              "no valid cut after " + std::to_string(cfg.emergency_attempts) +
                  " perturbed planes");
}

CuttingPlane diameter_plane(const Polyhedron& p) {
  const Diameter d = diameter_pair(p);
  const Point3& a = p.vertices[d.first];
  const Point3& b = p.vertices[d.second];
  return CuttingPlane::make(0.5 * (a + b), b - a);
}

ReferenceShape reference_shape(const Polyhedron& p, ShapeLabel shape_type) {
  int n = 0, quads = 0;
  switch (shape_type) {
    case ShapeLabel::kTetrahedron: n = 4; quads = 0; break;
    case ShapeLabel::kPrism: n = 6; quads = 3; break;
    case ShapeLabel::kCube: n = 8; quads = 6; break;
    case ShapeLabel::kOther:
      throw Error(ErrorCode::kDegenerateReference, "no reference shape for 'other'");
  }
  const auto& v = p.vertices;
  if (static_cast<int>(v.size()) < n) {
    throw Error(ErrorCode::kDegenerateReference, "too few vertices");
  }
  // Farthest-first traversal seeded at the vertex farthest from the centroid.
  const Point3 c = centroid(p);
  std::vector<double> reach(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) reach[i] = (v[i] - c).norm();
  std::vector<char> taken(v.size(), 0);
  ReferenceShape ref;
  ref.shape_type = shape_type;
  for (int k = 0; k < n; ++k) {
    int best = -1;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!taken[i] && (best < 0 || reach[i] > reach[best])) best = static_cast<int>(i);
    }
    taken[best] = 1;
    ref.picked.push_back(best);
    for (std::size_t i = 0; i < v.size(); ++i) {
      reach[i] = std::min(reach[i], (v[i] - v[best]).norm());
    }
  }
  std::vector<Point3> chosen;
  for (int i : ref.picked) chosen.push_back(v[i]);
  Polyhedron hull;
  try {
    hull = convex_hull(chosen);
  } catch (const Error&) {
    throw Error(ErrorCode::kDegenerateReference, "picked vertices are coplanar");
  }
  if (static_cast<int>(hull.vertices.size()) != n) {
    throw Error(ErrorCode::kDegenerateReference, "a picked vertex is not extreme");
  }
  // Pair up neighboring triangles whose normals agree best.
  std::vector<Vec3> normals;
  for (const auto& f : hull.faces) normals.push_back(face_normal(hull, f));
  std::map<std::pair<int, int>, int> owner;
  for (std::size_t f = 0; f < hull.faces.size(); ++f) {
    const auto& l = hull.faces[f].loop;
    for (int i = 0; i < 3; ++i) owner[{l[i], l[(i + 1) % 3]}] = static_cast<int>(f);
  }
  struct Candidate {
    double angle;
    int f, g, a, b;
  };
  std::vector<Candidate> candidates;
  for (const auto& [edge, f] : owner) {
    const int g = owner.at({edge.second, edge.first});
    if (f >= g) continue;
    const double cosine = std::clamp(normals[f].dot(normals[g]), -1.0, 1.0);
    candidates.push_back({std::acos(cosine), f, g, edge.first, edge.second});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.angle < y.angle; });
  std::vector<char> merged(hull.faces.size(), 0);
  std::vector<PolyFace> faces;
  int made = 0;
  for (const auto& cand : candidates) {
    if (made == quads) break;
    if (merged[cand.f] || merged[cand.g]) continue;
    merged[cand.f] = merged[cand.g] = 1;
    const auto apex = [&](int face) {
      for (int x : hull.faces[face].loop) {
        if (x != cand.a && x != cand.b) return x;
      }
      return -1;
    };
    // f runs a -> b -> c, g runs b -> a -> d; the quad is a, d, b, c.
    faces.push_back({{cand.a, apex(cand.g), cand.b, apex(cand.f)}});
    ++made;
  }
  if (made != quads) {
    throw Error(ErrorCode::kDegenerateReference, "not enough triangle pairs");
  }
  for (std::size_t f = 0; f < hull.faces.size(); ++f) {
    if (!merged[f]) faces.push_back(hull.faces[f]);
  }
  ref.vertices = hull.vertices;
  ref.faces = faces;

  // Check the combinatorial type.
  std::vector<int> degree(n, 0);
  std::vector<const PolyFace*> triangles;
  for (const auto& f : faces) {
    for (int x : f.loop) ++degree[x];
    if (f.loop.size() == 3) triangles.push_back(&f);
  }
  bool ok = std::all_of(degree.begin(), degree.end(), [](int d) { return d == 3; });
  if (shape_type == ShapeLabel::kPrism && ok) {
    ok = triangles.size() == 2;
    for (int x : triangles[0]->loop) {
      for (int y : triangles[1]->loop) ok &= x != y;
    }
  }
  if (!ok) {
    throw Error(ErrorCode::kDegenerateReference,
                std::string("hull of picked vertices is not a ") + to_string(shape_type));
  }
  return ref;
}

namespace {

std::vector<CuttingPlane> cube_planes(const ReferenceShape& ref) {
  const auto& v = ref.vertices;
  std::set<std::pair<int, int>> edges;
  for (const auto& f : ref.faces) {
    for (std::size_t i = 0; i < f.loop.size(); ++i) {
      const int a = f.loop[i], b = f.loop[(i + 1) % f.loop.size()];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  }
  std::vector<CuttingPlane> planes;
  std::vector<char> used(ref.faces.size(), 0);
  for (std::size_t q = 0; q < ref.faces.size(); ++q) {
    if (used[q]) continue;
    const auto& a = ref.faces[q].loop;
    for (std::size_t r = q + 1; r < ref.faces.size(); ++r) {
      const auto& b = ref.faces[r].loop;
      const bool disjoint = std::none_of(a.begin(), a.end(), [&](int x) {
        return std::find(b.begin(), b.end(), x) != b.end();
      });
      if (!disjoint) continue;
      used[q] = used[r] = 1;
      std::vector<Point3> mid;
      for (int x : a) {
        for (int y : b) {
          if (edges.count({std::min(x, y), std::max(x, y)})) {
            mid.push_back(0.5 * (v[x] + v[y]));
          }
        }
      }
      if (mid.size() != 4) throw Error(ErrorCode::kDegenerateReference, "bad cube");
      const Vec3 n = (mid[2] - mid[0]).cross(mid[3] - mid[1]);
      planes.push_back(CuttingPlane::make(0.25 * (mid[0] + mid[1] + mid[2] + mid[3]), n));
      break;
    }
  }
  if (planes.size() != 3) throw Error(ErrorCode::kDegenerateReference, "bad cube");
  return planes;
}

std::vector<CuttingPlane> prism_planes(const ReferenceShape& ref) {
  const auto& v = ref.vertices;
  std::vector<std::vector<int>> tri;
  for (const auto& f : ref.faces) {
    if (f.loop.size() == 3) tri.push_back(f.loop);
  }
  std::set<std::pair<int, int>> edges;
  for (const auto& f : ref.faces) {
    for (std::size_t i = 0; i < f.loop.size(); ++i) {
      const int a = f.loop[i], b = f.loop[(i + 1) % f.loop.size()];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  }
  // partner[i] is the vertex of the second triangle joined to tri[0][i].
  std::array<int, 3> partner{-1, -1, -1};
  for (int i = 0; i < 3; ++i) {
    for (int y : tri[1]) {
      const int x = tri[0][i];
      if (edges.count({std::min(x, y), std::max(x, y)})) partner[i] = y;
    }
    if (partner[i] < 0) throw Error(ErrorCode::kDegenerateReference, "bad prism");
  }
  std::vector<CuttingPlane> planes;
  std::array<Point3, 3> lateral_mid;
  Vec3 axis = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    lateral_mid[i] = 0.5 * (v[tri[0][i]] + v[partner[i]]);
    axis += v[partner[i]] - v[tri[0][i]];
  }
  const Vec3 n0 = (lateral_mid[1] - lateral_mid[0]).cross(lateral_mid[2] - lateral_mid[0]);
  planes.push_back(CuttingPlane::make(
      (lateral_mid[0] + lateral_mid[1] + lateral_mid[2]) / 3.0, n0));
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const Point3 m1 = 0.5 * (v[tri[0][i]] + v[tri[0][j]]);
    const Point3 m2 = 0.5 * (v[tri[0][i]] + v[tri[0][k]]);
    const Point3 m3 = 0.5 * (v[partner[i]] + v[partner[j]]);
    const Point3 m4 = 0.5 * (v[partner[i]] + v[partner[k]]);
    const Vec3 n = (m2 - m1 + m4 - m3).cross(axis);
    planes.push_back(CuttingPlane::make(0.25 * (m1 + m2 + m3 + m4), n));
  }
  return planes;
}

// Corner planes cut only the piece holding their corner, the octahedron plane
// only the piece holding the center.
std::vector<PatternPlane> tet_planes(const ReferenceShape& ref) {
  const auto& v = ref.vertices;
  const Point3 centroid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
  std::vector<PatternPlane> planes;
  for (int i = 0; i < 4; ++i) {
    std::vector<Point3> mids;
    for (int j = 0; j < 4; ++j) {
      if (j != i) mids.push_back(0.5 * (v[i] + v[j]));
    }
    Vec3 n = (mids[1] - mids[0]).cross(mids[2] - mids[0]);
    if (n.dot(v[i] - mids[0]) < 0.0) n = -n;
    planes.push_back({CuttingPlane::make((mids[0] + mids[1] + mids[2]) / 3.0, n),
                      v[i] + 0.1 * (centroid - v[i])});
  }
  // Diagonals of the midpoint octahedron join midpoints of opposite edges.
  struct Diagonal {
    Point3 a, b;
    double length;
  };
  std::vector<Diagonal> diag;
  const int opposite[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
  for (const auto& o : opposite) {
    const Point3 a = 0.5 * (v[o[0]] + v[o[1]]);
    const Point3 b = 0.5 * (v[o[2]] + v[o[3]]);
    diag.push_back({a, b, (b - a).norm()});
  }
  std::stable_sort(diag.begin(), diag.end(),
                   [](const Diagonal& x, const Diagonal& y) { return x.length < y.length; });
  const Vec3 n = (diag[0].b - diag[0].a).cross(diag[1].b - diag[1].a);
  const Point3 center = 0.25 * (diag[0].a + diag[0].b + diag[1].a + diag[1].b);
  planes.push_back({CuttingPlane::make(center, n), centroid});
  return planes;
}

std::vector<PatternPlane> unanchored(const std::vector<CuttingPlane>& planes) {
  std::vector<PatternPlane> out;
  for (const auto& plane : planes) out.push_back({plane, std::nullopt});
  return out;
}

}  // namespace

std::vector<PatternPlane> classical_planes(const ReferenceShape& ref) {
  switch (ref.shape_type) {
    case ShapeLabel::kCube: return unanchored(cube_planes(ref));
    case ShapeLabel::kPrism: return unanchored(prism_planes(ref));
    case ShapeLabel::kTetrahedron: return tet_planes(ref);
    case ShapeLabel::kOther: break;
  }
  throw Error(ErrorCode::kDegenerateReference, "no classical pattern for 'other'");
}

ShapeLabel CnnClassifier::classify(const Polyhedron& p) const {
  return predict(model_, voxelize(p));
}

ElementResult refine_with_pattern(const Polyhedron& p,
                                  const std::vector<PatternPlane>& planes,
                                  const RefineConfig& cfg, Rng& rng) {
  const double diam0 = diameter(p);
  const double tol = element_tol(cfg, diam0);
  const double target = element_target(cfg, diam0) * (1.0 + kSizeSlack);
  ElementResult result;
  std::vector<Polyhedron> pieces{p};
  std::vector<double> sizes{diam0};
  for (const auto& [plane, anchor] : planes) {
    const std::size_t current = pieces.size();
    for (std::size_t i = 0; i < current; ++i) {
      if (static_cast<int>(pieces.size()) >= cfg.nmax) break;
      if (anchor && !contains_point(pieces[i], *anchor)) continue;
      if (sizes[i] <= target || !straddles(pieces[i], plane, tol)) continue;
      CutOutcome cut = attempt_cut(pieces[i], plane, tol, cfg, rng);
      result.emergency_attempts += cut.emergency_attempts;
      if (!cut.ok ||
          pieces.size() - 1 + cut.children.size() > static_cast<std::size_t>(cfg.nmax)) {
        continue;
      }
      ++result.cuts;
      pieces[i] = std::move(cut.children[0]);
      sizes[i] = diameter(pieces[i]);
      for (std::size_t c = 1; c < cut.children.size(); ++c) {
        sizes.push_back(diameter(cut.children[c]));
        pieces.push_back(std::move(cut.children[c]));
      }
    }
  }
  result.unrefinable = result.cuts == 0;
  result.children = std::move(pieces);
  return result;
}

ElementResult refine_with_source(
    const Polyhedron& p,
    const std::function<CuttingPlane(const Polyhedron&, Rng&)>& source,
    const RefineConfig& cfg, Rng& rng) {
  const double diam0 = diameter(p);
  const double tol = element_tol(cfg, diam0);
  const double target = element_target(cfg, diam0) * (1.0 + kSizeSlack);
  ElementResult result;
  std::vector<Polyhedron> pieces{p};
  std::vector<double> sizes{diam0};
  std::vector<char> stuck{0};
  while (static_cast<int>(pieces.size()) < cfg.nmax) {
    int pick = -1;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (stuck[i] || sizes[i] <= target) continue;
      if (pick < 0 || sizes[i] > sizes[pick]) pick = static_cast<int>(i);
    }
    if (pick < 0) break;
    CutOutcome cut = attempt_cut(pieces[pick], source(pieces[pick], rng), tol, cfg, rng);
    result.emergency_attempts += cut.emergency_attempts;
    if (!cut.ok ||
        pieces.size() - 1 + cut.children.size() > static_cast<std::size_t>(cfg.nmax)) {
      stuck[pick] = 1;
      continue;
    }
    ++result.cuts;
    pieces[pick] = std::move(cut.children[0]);
    sizes[pick] = diameter(pieces[pick]);
    for (std::size_t c = 1; c < cut.children.size(); ++c) {
      sizes.push_back(diameter(cut.children[c]));
      stuck.push_back(0);
      pieces.push_back(std::move(cut.children[c]));
    }
  }
  result.unrefinable = result.cuts == 0;
  result.children = std::move(pieces);
  return result;
}

ElementResult cnn_refine(const Polyhedron& p, const ShapeClassifier& classifier,
                         const RefineConfig& cfg) {
  Rng rng = element_rng(p, cfg);
  ShapeLabel label;
  try {
    label = classifier.classify(p);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateElement) throw;
    ElementResult r = kmeans_refine(p, cfg, rng);
    r.note = "element too small to voxelize, k-means fallback";
    return r;
  }
  ElementResult r = label == ShapeLabel::kOther ? kmeans_refine(p, cfg, rng)
                                                : classical_refine(p, label, cfg, rng);
  r.label = label;
  return r;
}

ElementResult refine_element(const Polyhedron& p, const RefineConfig& cfg,
                             const ShapeClassifier* classifier) {
  if (cfg.nmax < 2) throw Error(ErrorCode::kUsage, "nmax must be at least 2");
  Rng rng = element_rng(p, cfg);
  ElementResult r;
  switch (cfg.strategy) {
    case Strategy::kDiameter:
      r = refine_with_source(
          p, [](const Polyhedron& piece, Rng&) { return diameter_plane(piece); }, cfg,
          rng);
      r.applied = Strategy::kDiameter;
      break;
    case Strategy::kKMeans:
      r = kmeans_refine(p, cfg, rng);
      break;
    case Strategy::kCnn:
      if (!classifier) {
        throw Error(ErrorCode::kUsage, "the cnn strategy needs a trained model");
      }
      return cnn_refine(p, *classifier, cfg);
    case Strategy::kClassicalTet:
      r = classical_refine(p, ShapeLabel::kTetrahedron, cfg, rng);
      break;
    case Strategy::kClassicalPrism:
      r = classical_refine(p, ShapeLabel::kPrism, cfg, rng);
      break;
    case Strategy::kClassicalCube:
      r = classical_refine(p, ShapeLabel::kCube, cfg, rng);
      break;
  }
  return r;
}

double boundary_layer_field(const Point3& x) {
  return (1.0 - std::exp(-10.0 * x.x())) * (x.x() - 1.0) * std::sin(M_PI * x.y()) *
         std::sin(M_PI * x.z());
}

ScalarField field_by_name(const std::string& name) {
  if (name == "boundary_layer") return boundary_layer_field;
  if (name == "constant") return [](const Point3&) { return 1.0; };
  throw Error(ErrorCode::kUsage, "unknown field '" + name + "'");
}

double error_indicator(const Polyhedron& p, const ScalarField& u) {
  constexpr int kSide = 5;
  const BoundingBox box = bounding_box(p);
  const Vec3 step = box.extent() / kSide;
  const PointLocator locator(p);
  std::vector<double> values;
  for (int k = 0; k < kSide; ++k) {
    for (int j = 0; j < kSide; ++j) {
      for (int i = 0; i < kSide; ++i) {
        const Point3 q = box.lo + Vec3((i + 0.5) * step.x(), (j + 0.5) * step.y(),
                                       (k + 0.5) * step.z());
        if (locator.contains(q)) values.push_back(u(q));
      }
    }
  }
  if (values.empty()) {
    for (const auto& v : p.vertices) values.push_back(u(v));
  }
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double x : values) var += (x - mean) * (x - mean);
  var /= static_cast<double>(values.size());
  return std::sqrt(volume(p) * var);
}

std::size_t marked_count(double r, std::size_t n) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw Error(ErrorCode::kUsage, "refinement fraction must be in (0, 1]");
  }
  const double exact = r * static_cast<double>(n);
  // Guard against 0.4 * 64 landing a hair above an integer.
  const auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9 * exact));
  return std::min(n, std::max<std::size_t>(count, n > 0 ? 1 : 0));
}

namespace {

void refine_marked(DriverResult& d, const std::vector<ElementId>& marked,
                   const RefineConfig& cfg, const ShapeClassifier* classifier,
                   int threads, int step) {
  std::vector<ElementResult> results(marked.size());
  std::vector<double> seconds(marked.size(), 0.0);
  std::vector<const Polyhedron*> elements;
  for (ElementId id : marked) elements.push_back(&d.mesh.elements.at(id));
  parallel_for(marked.size(), threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      results[i] = refine_element(*elements[i], cfg, classifier);
    } catch (const std::exception& e) {
      results[i].unrefinable = true;
      results[i].note = e.what();
    }
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                     .count();
  });
  StepSummary summary;
  summary.step = step;
  summary.elements_before = d.mesh.size();
  summary.marked = marked.size();
  for (std::size_t i = 0; i < marked.size(); ++i) {
    ElementResult& r = results[i];
    RefineLogEntry entry;
    entry.step = step;
    entry.id = marked[i];
    entry.strategy = r.applied;
    entry.label = r.label;
    entry.seconds = seconds[i];
    entry.emergency_attempts = r.emergency_attempts;
    d.timings.record(to_string(cfg.strategy), seconds[i]);
    ++d.attempted;
    if (r.unrefinable || r.children.size() < 2) {
      entry.unrefinable = true;
      entry.children = 1;
      ++summary.unrefinable;
      ++d.unrefinable;
    } else {
      entry.children = static_cast<int>(r.children.size());
      replace_element(d.mesh, marked[i], std::move(r.children));
    }
    d.log.push_back(entry);
  }
  d.mesh.generation += 1;
  summary.elements_after = d.mesh.size();
  summary.mesh_size = mesh_size(d.mesh);
  summary.stats = complexity_stats(d.mesh, d.timings);
  d.steps.push_back(summary);
}

}  // namespace

DriverResult uniform_refine(Mesh mesh, const RefineConfig& cfg, int steps,
                            const ShapeClassifier* classifier, int threads) {
  DriverResult d;
  d.mesh = std::move(mesh);
  for (int step = 1; step <= steps; ++step) {
    std::vector<ElementId> ids;
    for (const auto& [id, p] : d.mesh.elements) ids.push_back(id);
    refine_marked(d, ids, cfg, classifier, threads, step);
  }
  return d;
}

DriverResult adaptive_refine(Mesh mesh, const RefineConfig& cfg,
                             const ScalarField& field, double r, int steps,
                             const ShapeClassifier* classifier, int threads) {
  DriverResult d;
  d.mesh = std::move(mesh);
  for (int step = 1; step <= steps; ++step) {
    std::vector<ElementId> ids;
    std::vector<const Polyhedron*> elements;
    for (const auto& [id, p] : d.mesh.elements) {
      ids.push_back(id);
      elements.push_back(&p);
    }
    std::vector<double> eta(ids.size());
    parallel_for(ids.size(), threads,
                 [&](std::size_t i) { eta[i] = error_indicator(*elements[i], field); });
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return eta[a] > eta[b]; });
    std::vector<ElementId> marked;
    const std::size_t k = marked_count(r, ids.size());
    for (std::size_t i = 0; i < k; ++i) marked.push_back(ids[order[i]]);
    std::sort(marked.begin(), marked.end());
    refine_marked(d, marked, cfg, classifier, threads, step);
  }
  return d;
}

}  // namespace polyrefine
