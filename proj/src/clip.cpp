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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "polyrefine/error.hpp"
#include "polyrefine/geometry.hpp"

namespace polyrefine {

std::vector<Polyhedron> ClipResult::children() const {
  std::vector<Polyhedron> all = negative;
  all.insert(all.end(), positive.begin(), positive.end());
  return all;
}

namespace {

using Loop = std::vector<int>;

struct AmbiguousSection {};

Vec3 loop_area_vector(const std::vector<Point3>& verts, const Loop& loop) {
  Vec3 n = Vec3::Zero();
  for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
    n += (verts[loop[i]] - verts[loop[0]])
             .cross(verts[loop[i + 1]] - verts[loop[0]]);
  }
  return 0.5 * n;
}

// Splits the vertices and edges of one polyhedron against a plane and emits
// the closed boundary loops of each side.
class PlaneSplitter {
 public:
  PlaneSplitter(const Polyhedron& p, const CuttingPlane& plane)
      : p_(p), plane_(plane) {
    diam_ = diameter(p);
    const double band = 1e-12 * diam_;
    verts_ = p.vertices;
    for (const auto& v : p.vertices) {
      const double d = plane.signed_distance(v);
      dist_.push_back(d);
      side_.push_back(std::abs(d) <= band ? 0 : (d < 0.0 ? -1 : 1));
    }
    face_normals_.reserve(p.faces.size());
    for (const auto& f : p.faces) face_normals_.push_back(face_normal(p, f));
  }

  bool straddles() const {
    const bool neg = std::find(side_.begin(), side_.end(), -1) != side_.end();
    const bool pos = std::find(side_.begin(), side_.end(), 1) != side_.end();
    return neg && pos;
  }

  void augment() {
    for (const auto& f : p_.faces) {
      Loop aug;
      const std::size_t k = f.loop.size();
      for (std::size_t i = 0; i < k; ++i) {
        const int a = f.loop[i];
        const int b = f.loop[(i + 1) % k];
        aug.push_back(a);
        if (side_[a] * side_[b] == -1) aug.push_back(cut_vertex(a, b));
      }
      augmented_.push_back(std::move(aug));
    }
  }

  // Face polygons on `sigma` plus open section edges, before closing.
  std::vector<Loop> side_faces(int sigma) const {
    std::vector<Loop> out;
    for (std::size_t fi = 0; fi < augmented_.size(); ++fi) {
      split_face(fi, sigma, &out);
    }
    return out;
  }

  const std::vector<Point3>& verts() const { return verts_; }
  const std::vector<int>& sides() const { return side_; }
  double diam() const { return diam_; }
  const CuttingPlane& plane() const { return plane_; }

 private:
  int cut_vertex(int a, int b) {
    const int lo = std::min(a, b);
    const int hi = std::max(a, b);
    const auto it = cuts_.find({lo, hi});
    if (it != cuts_.end()) return it->second;
    const double t = dist_[lo] / (dist_[lo] - dist_[hi]);
    verts_.push_back(verts_[lo] + t * (verts_[hi] - verts_[lo]));
    dist_.push_back(0.0);
    side_.push_back(0);
    const int id = static_cast<int>(verts_.size()) - 1;
    cuts_.emplace(std::make_pair(lo, hi), id);
    return id;
  }

  void split_face(std::size_t fi, int sigma, std::vector<Loop>* out) const {
    const Loop& loop = augmented_[fi];
    const std::size_t k = loop.size();
    const Vec3& nf = face_normals_[fi];

    bool all_zero = true;
    int first_nonzero = 0;
    for (int v : loop) {
      if (side_[v] != 0) {
        all_zero = false;
        first_nonzero = side_[v];
        break;
      }
    }
    if (all_zero) {
      const double s = nf.dot(plane_.normal);
      if ((s > 0.0 ? -1 : 1) == sigma) out->push_back(loop);
      return;
    }

    std::vector<char> in(k, 0);
    int count_in = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const int a = loop[i];
      const int b = loop[(i + 1) % k];
      if (side_[a] == sigma || side_[b] == sigma) {
        in[i] = 1;
      } else if (side_[a] == 0 && side_[b] == 0) {
        const Vec3 edge = verts_[b] - verts_[a];
        const double s = nf.cross(edge).dot(plane_.normal);
        const int interior =
            std::abs(s) > 1e-12 * edge.norm() ? (s > 0.0 ? 1 : -1)
                                              : first_nonzero;
        in[i] = interior == sigma;
      }
      count_in += in[i];
    }
    if (count_in == 0) return;
    if (count_in == static_cast<int>(k)) {
      out->push_back(loop);
      return;
    }

    std::size_t start = 0;
    while (!(in[start] && !in[(start + k - 1) % k])) ++start;
    std::vector<Loop> chains;
    bool open = false;
    for (std::size_t step = 0; step < k; ++step) {
      const std::size_t e = (start + step) % k;
      if (in[e]) {
        if (!open) {
          chains.push_back({loop[e]});
          open = true;
        }
        chains.back().push_back(loop[(e + 1) % k]);
      } else {
        open = false;
      }
    }

    Vec3 dir = nf.cross(plane_.normal);
    if (dir.norm() < 1e-14) throw AmbiguousSection{};
    dir.normalize();
    struct End {
      double tau;
      int chain;
      bool is_end;
    };
    std::vector<End> ends;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      ends.push_back({dir.dot(verts_[chains[c].front()]), static_cast<int>(c),
                      false});
      ends.push_back({dir.dot(verts_[chains[c].back()]), static_cast<int>(c),
                      true});
    }
    std::sort(ends.begin(), ends.end(), [](const End& x, const End& y) {
      if (x.tau != y.tau) return x.tau < y.tau;
      return x.chain < y.chain;
    });
    std::vector<int> next(chains.size(), -1);
    for (std::size_t i = 0; i + 1 < ends.size(); i += 2) {
      const End& x = ends[i];
      const End& y = ends[i + 1];
      if (x.is_end == y.is_end) throw AmbiguousSection{};
      const End& e = x.is_end ? x : y;
      const End& s = x.is_end ? y : x;
      if (next[e.chain] != -1) throw AmbiguousSection{};
      next[e.chain] = s.chain;
    }
    std::vector<char> used(chains.size(), 0);
    for (std::size_t c = 0; c < chains.size(); ++c) {
      if (used[c]) continue;
      Loop poly;
      int cur = static_cast<int>(c);
      while (cur >= 0 && !used[cur]) {
        used[cur] = 1;
        poly.insert(poly.end(), chains[cur].begin(), chains[cur].end());
        cur = next[cur];
      }
      if (cur != static_cast<int>(c)) throw AmbiguousSection{};
      out->push_back(std::move(poly));
    }
  }

  const Polyhedron& p_;
  CuttingPlane plane_;
  double diam_ = 0.0;
  std::vector<Point3> verts_;
  std::vector<double> dist_;
  std::vector<int> side_;
  std::vector<Vec3> face_normals_;
  std::vector<Loop> augmented_;
  std::map<std::pair<int, int>, int> cuts_;
};

// Closes the open boundary of `faces` with loops on the cutting plane. Loops
// with negative orientation around the outward normal bound holes.
bool close_section(const std::vector<Point3>& verts, const std::vector<int>& side,
                   const Vec3& outward, std::vector<Loop>* faces,
                   std::vector<char>* is_hole) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& loop : *faces) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      ++directed[{loop[i], loop[(i + 1) % loop.size()]}];
    }
  }
  std::multimap<int, int> open;
  for (const auto& [e, count] : directed) {
    if (count != 1) return false;
    if (directed.count({e.second, e.first}) == 0) {
      if (side[e.first] != 0 || side[e.second] != 0) return false;
      open.emplace(e.second, e.first);
    }
  }
  is_hole->assign(faces->size(), 0);
  while (!open.empty()) {
    auto it = open.begin();
    const int start = it->first;
    Loop loop{start};
    int prev = start;
    int cur = it->second;
    open.erase(it);
    int guard = 0;
    while (cur != start) {
      if (++guard > 1000000) return false;
      loop.push_back(cur);
      auto [lo, hi] = open.equal_range(cur);
      if (lo == hi) return false;
      auto pick = lo;
      if (std::next(lo) != hi) {
        // Pinched section: take the sharpest left turn to stay on one loop.
        const Vec3 in_dir = (verts[cur] - verts[prev]).normalized();
        double best = -10.0;
        for (auto c = lo; c != hi; ++c) {
          const Vec3 out_dir = (verts[c->second] - verts[cur]).normalized();
          const double turn = std::atan2(in_dir.cross(out_dir).dot(outward),
                                         in_dir.dot(out_dir));
          if (turn > best) {
            best = turn;
            pick = c;
          }
        }
      }
      prev = cur;
      cur = pick->second;
      open.erase(pick);
    }
    if (loop.size() < 3) return false;
    const bool hole = loop_area_vector(verts, loop).dot(outward) < 0.0;
    faces->push_back(std::move(loop));
    is_hole->push_back(hole ? 1 : 0);
  }
  return true;
}

// Splices loop b into loop a across the shared edge (u, v) of a.
std::optional<Loop> splice(const Loop& a, const Loop& b, int u, int v) {
  const auto ia = std::find(a.begin(), a.end(), v) - a.begin();
  const auto ib = std::find(b.begin(), b.end(), u) - b.begin();
  Loop merged;
  for (std::size_t i = 0; i < a.size(); ++i) {
    merged.push_back(a[(ia + i) % a.size()]);  // v ... u
  }
  for (std::size_t i = 1; i + 1 < b.size(); ++i) {
    merged.push_back(b[(ib + i) % b.size()]);  // after u ... before v
  }
  // Remove spikes x, y, x left by multi-edge contacts.
  bool changed = true;
  while (changed && merged.size() >= 3) {
    changed = false;
    const std::size_t n = merged.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (merged[(i + n - 1) % n] == merged[(i + 1) % n]) {
        const std::size_t j = (i + 1) % n;
        if (i < j) {
          merged.erase(merged.begin() + j);
          merged.erase(merged.begin() + i);
        } else {
          merged.erase(merged.begin() + i);
          merged.erase(merged.begin() + j);
        }
        changed = true;
        break;
      }
    }
  }
  std::set<int> distinct(merged.begin(), merged.end());
  if (merged.size() < 3 || distinct.size() != merged.size()) {
    return std::nullopt;
  }
  return merged;
}

void merge_coplanar(const std::vector<Point3>& verts, std::vector<Loop>* faces,
                    std::vector<char>* is_hole) {
  constexpr double kAngle = 1e-6;
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<int, int>, int> owner;
    for (std::size_t f = 0; f < faces->size(); ++f) {
      const Loop& loop = (*faces)[f];
      for (std::size_t i = 0; i < loop.size(); ++i) {
        owner[{loop[i], loop[(i + 1) % loop.size()]}] = static_cast<int>(f);
      }
    }
    for (std::size_t f = 0; f < faces->size() && !changed; ++f) {
      if ((*is_hole)[f]) continue;
      const Loop& loop = (*faces)[f];
      const Vec3 nf = loop_area_vector(verts, loop).normalized();
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const int u = loop[i];
        const int v = loop[(i + 1) % loop.size()];
        const auto it = owner.find({v, u});
        if (it == owner.end()) continue;
        const int g = it->second;
        if (g == static_cast<int>(f) || (*is_hole)[g]) continue;
        const Vec3 ng = loop_area_vector(verts, (*faces)[g]).normalized();
        if (nf.dot(ng) <= 0.0 || nf.cross(ng).norm() >= kAngle) continue;
        auto merged = splice(loop, (*faces)[g], u, v);
        if (!merged) continue;
        (*faces)[f] = std::move(*merged);
        faces->erase(faces->begin() + g);
        is_hole->erase(is_hole->begin() + g);
        changed = true;
        break;
      }
    }
  }
}

// Drops vertices that sit on a straight edge between exactly two faces.
void remove_collinear(const std::vector<Point3>& verts, double tol,
                      std::vector<Loop>* faces) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<int, std::vector<int>> incident;
    for (std::size_t f = 0; f < faces->size(); ++f) {
      for (int v : (*faces)[f]) incident[v].push_back(static_cast<int>(f));
    }
    for (const auto& [v, fs] : incident) {
      if (fs.size() != 2) continue;
      bool straight = true;
      for (int f : fs) {
        const Loop& loop = (*faces)[f];
        if (loop.size() <= 3) {
          straight = false;
          break;
        }
        const auto pos = std::find(loop.begin(), loop.end(), v) - loop.begin();
        const Point3& a = verts[loop[(pos + loop.size() - 1) % loop.size()]];
        const Point3& b = verts[loop[(pos + 1) % loop.size()]];
        const Vec3 ab = b - a;
        const double len = ab.norm();
        if (len == 0.0 || ab.cross(verts[v] - a).norm() / len > tol ||
            (verts[v] - a).dot(ab) <= 0.0 || (verts[v] - b).dot(ab) >= 0.0) {
          straight = false;
          break;
        }
      }
      if (!straight) continue;
      for (int f : fs) {
        Loop& loop = (*faces)[f];
        loop.erase(std::find(loop.begin(), loop.end(), v));
      }
      changed = true;
      break;
    }
  }
}

bool inside_loop(const std::vector<Point3>& verts, const Loop& loop,
                 const Point3& q, const Vec3& u, const Vec3& w) {
  bool inside = false;
  const double qx = q.dot(u), qy = q.dot(w);
  for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    const double xi = verts[loop[i]].dot(u), yi = verts[loop[i]].dot(w);
    const double xj = verts[loop[j]].dot(u), yj = verts[loop[j]].dot(w);
    if ((yi > qy) != (yj > qy) &&
        qx < (xj - xi) * (qy - yi) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

void emit_components(const std::vector<Point3>& verts,
                     const std::vector<int>& side, const Vec3& outward,
                     const std::vector<Loop>& faces,
                     const std::vector<char>& is_hole, int sigma,
                     std::vector<Polyhedron>* pieces,
                     std::vector<ClipDefect>* defects) {
  const std::size_t nf = faces.size();
  std::vector<int> parent(nf);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<std::pair<int, int>, int> owner;
  for (std::size_t f = 0; f < nf; ++f) {
    const Loop& loop = faces[f];
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i];
      const int b = loop[(i + 1) % loop.size()];
      const auto [it, inserted] =
          owner.emplace(std::make_pair(std::min(a, b), std::max(a, b)),
                        static_cast<int>(f));
      if (!inserted) parent[find(static_cast<int>(f))] = find(it->second);
    }
  }
  // A hole belongs to the same piece as the section loop around it.
  const Vec3 u = outward.unitOrthogonal();
  const Vec3 w = outward.cross(u);
  for (std::size_t h = 0; h < nf; ++h) {
    if (!is_hole[h]) continue;
    int best = -1;
    double best_area = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
      if (is_hole[f]) continue;
      const Loop& loop = faces[f];
      const bool on_plane = std::all_of(loop.begin(), loop.end(),
                                        [&](int v) { return side[v] == 0; });
      if (!on_plane) continue;
      const double area = loop_area_vector(verts, loop).dot(outward);
      if (area <= 0.0) continue;
      Point3 probe = Point3::Zero();
      for (int v : faces[h]) probe += verts[v];
      probe /= static_cast<double>(faces[h].size());
      if (!inside_loop(verts, loop, verts[faces[h][0]], u, w) &&
          !inside_loop(verts, loop, probe, u, w)) {
        continue;
      }
      if (best < 0 || area < best_area) {
        best = static_cast<int>(f);
        best_area = area;
      }
    }
    if (best >= 0) parent[find(static_cast<int>(h))] = find(best);
  }
  std::map<int, std::vector<int>> groups;
  for (std::size_t f = 0; f < nf; ++f) {
    groups[find(static_cast<int>(f))].push_back(static_cast<int>(f));
  }
  std::vector<std::vector<int>> ordered;
  for (auto& [root, members] : groups) ordered.push_back(members);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });

  for (const auto& members : ordered) {
    std::set<int> used;
    int holes = 0;
    for (int f : members) {
      used.insert(faces[f].begin(), faces[f].end());
      holes += is_hole[f];
    }
    Polyhedron piece;
    std::map<int, int> remap;
    for (int v : used) {
      remap[v] = static_cast<int>(piece.vertices.size());
      piece.vertices.push_back(verts[v]);
    }
    for (int f : members) {
      PolyFace face;
      for (int v : faces[f]) face.loop.push_back(remap[v]);
      piece.faces.push_back(std::move(face));
    }
    const TopologyReport topo = check_topology(piece);
    if (holes > 0) {
      defects->push_back({sigma, topo.euler - 2 * holes,
                          "section face with a hole"});
      continue;
    }
    if (!topo.closed_genus0()) {
      defects->push_back({sigma, topo.euler, "not a closed genus-0 surface"});
      continue;
    }
    if (!(signed_volume(piece) > 0.0)) {
      defects->push_back({sigma, topo.euler, "non-positive volume"});
      continue;
    }
    pieces->push_back(std::move(piece));
  }
}

}  // namespace

ClipResult clip_by_plane(const Polyhedron& p, const CuttingPlane& plane) {
  PlaneSplitter splitter(p, plane);
  if (!splitter.straddles()) {
    throw Error(ErrorCode::kNoCut, "plane does not cut the element interior");
  }
  splitter.augment();
  ClipResult result;
  for (int sigma : {-1, 1}) {
    std::vector<Loop> faces;
    try {
      faces = splitter.side_faces(sigma);
    } catch (const AmbiguousSection&) {
      result.defects.push_back({sigma, 0, "ambiguous section"});
      continue;
    }
    std::vector<char> is_hole;
    const Vec3 outward = -static_cast<double>(sigma) * plane.normal;
    if (!close_section(splitter.verts(), splitter.sides(), outward, &faces,
                       &is_hole)) {
      result.defects.push_back({sigma, 0, "open or non-manifold section"});
      continue;
    }
    merge_coplanar(splitter.verts(), &faces, &is_hole);
    remove_collinear(splitter.verts(), 1e-9 * splitter.diam(), &faces);
    emit_components(splitter.verts(), splitter.sides(), outward, faces,
                    is_hole, sigma,
                    sigma < 0 ? &result.negative : &result.positive,
                    &result.defects);
  }
  for (auto& piece : result.negative) piece.id = p.id;
  for (auto& piece : result.positive) piece.id = p.id;
  return result;
}

std::optional<Polyhedron> clip_convex(const Polyhedron& p,
                                      const CuttingPlane& plane) {
  const double band = 1e-12 * bounding_box(p).extent().norm();
  const std::size_t n = p.vertices.size();
  std::vector<double> dist(n);
  std::vector<int> side(n);
  bool neg = false, pos = false;
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = plane.signed_distance(p.vertices[i]);
    side[i] = std::abs(dist[i]) <= band ? 0 : (dist[i] < 0.0 ? -1 : 1);
    neg |= side[i] < 0;
    pos |= side[i] > 0;
  }
  if (!pos) return p;
  if (!neg) return std::nullopt;

  std::vector<Point3> verts = p.vertices;
  std::vector<char> on_plane(n, 0);
  for (std::size_t i = 0; i < n; ++i) on_plane[i] = side[i] == 0;
  std::map<std::pair<int, int>, int> cuts;
  auto cut = [&](int a, int b) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    const auto it = cuts.find({lo, hi});
    if (it != cuts.end()) return it->second;
    const double t = dist[lo] / (dist[lo] - dist[hi]);
    verts.push_back(verts[lo] + t * (verts[hi] - verts[lo]));
    on_plane.push_back(1);
    const int id = static_cast<int>(verts.size()) - 1;
    cuts.emplace(std::make_pair(lo, hi), id);
    return id;
  };

  std::vector<Loop> faces;
  std::set<int> section;
  for (const auto& f : p.faces) {
    Loop kept;
    const std::size_t k = f.loop.size();
    bool all_zero = true;
    for (std::size_t i = 0; i < k; ++i) {
      const int a = f.loop[i];
      const int b = f.loop[(i + 1) % k];
      all_zero &= side[a] == 0;
      if (side[a] <= 0) kept.push_back(a);
      if (side[a] * side[b] == -1) kept.push_back(cut(a, b));
    }
    if (all_zero) {
      // Face already lies on the plane; it becomes the cap.
      return p;
    }
    if (kept.size() < 3) continue;
    for (int v : kept) {
      if (on_plane[v]) section.insert(v);
    }
    faces.push_back(std::move(kept));
  }
  if (section.size() >= 3) {
    Point3 mid = Point3::Zero();
    for (int v : section) mid += verts[v];
    mid /= static_cast<double>(section.size());
    const Vec3 u = plane.normal.unitOrthogonal();
    const Vec3 w = plane.normal.cross(u);
    std::vector<std::pair<double, int>> order;
    for (int v : section) {
      const Vec3 r = verts[v] - mid;
      order.emplace_back(std::atan2(r.dot(w), r.dot(u)), v);
    }
    std::sort(order.begin(), order.end());
    Loop cap;
    for (const auto& [angle, v] : order) cap.push_back(v);
    faces.push_back(std::move(cap));
  }

  Polyhedron out;
  out.id = p.id;
  std::map<int, int> remap;
  for (const auto& loop : faces) {
    for (int v : loop) remap.emplace(v, 0);
  }
  for (auto& [old_index, new_index] : remap) {
    new_index = static_cast<int>(out.vertices.size());
    out.vertices.push_back(verts[old_index]);
  }
  for (const auto& loop : faces) {
    PolyFace face;
    for (int v : loop) face.loop.push_back(remap.at(v));
    out.faces.push_back(std::move(face));
  }
  if (!(signed_volume(out) > 0.0)) return std::nullopt;
  return out;
}

}  // namespace polyrefine
