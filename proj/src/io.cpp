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

#include "polyrefine/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "polyrefine/error.hpp"

namespace polyrefine {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

// Line and column of a byte offset, both 1-based.
std::string position(const std::string& text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column) +
         " (offset " + std::to_string(offset) + ")";
}

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kFormat, "mesh: " + what);
}

}  // namespace

std::string mesh_to_json(const Mesh& m) {
  VertexWelder welder;
  ordered_json elements = ordered_json::array();
  for (const auto& [id, p] : m.elements) {
    std::vector<int> global;
    for (const auto& v : p.vertices) global.push_back(welder.insert(v));
    ordered_json faces = ordered_json::array();
    for (const auto& f : p.faces) {
      ordered_json loop = ordered_json::array();
      for (int i : f.loop) loop.push_back(global[i]);
      faces.push_back(std::move(loop));
    }
    const auto parent = m.parent.find(id);
    ordered_json e;
    e["id"] = id;
    e["parent"] = parent == m.parent.end() ? kNoElement : parent->second;
    e["faces"] = std::move(faces);
    elements.push_back(std::move(e));
  }
  ordered_json flat = ordered_json::array();
  for (const auto& v : welder.points()) {
    flat.push_back(v.x());
    flat.push_back(v.y());
    flat.push_back(v.z());
  }
  ordered_json doc;
  doc["format"] = "polyrefine-mesh";
  doc["version"] = 1;
  doc["domain"] = {{"lo", {m.domain.lo.x(), m.domain.lo.y(), m.domain.lo.z()}},
                   {"hi", {m.domain.hi.x(), m.domain.hi.y(), m.domain.hi.z()}}};
  doc["generation"] = m.generation;
  doc["next_id"] = m.next_id;
  doc["vertices"] = std::move(flat);
  doc["elements"] = std::move(elements);
  return doc.dump() + "\n";
}

Mesh mesh_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad("invalid JSON at " + position(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) bad("top level is not an object");
  if (!doc.contains("vertices") || !doc["vertices"].is_array()) {
    bad("missing \"vertices\" array");
  }
  if (!doc.contains("elements") || !doc["elements"].is_array()) {
    bad("missing \"elements\" array");
  }
  const auto& flat = doc["vertices"];
  if (flat.size() % 3 != 0) bad("\"vertices\" length is not a multiple of 3");
  std::vector<Point3> points;
  for (std::size_t i = 0; i < flat.size(); i += 3) {
    for (std::size_t k = 0; k < 3; ++k) {
      if (!flat[i + k].is_number()) {
        bad("vertex coordinate " + std::to_string(i + k) + " is not a number");
      }
    }
    points.emplace_back(flat[i].get<double>(), flat[i + 1].get<double>(),
                        flat[i + 2].get<double>());
  }
  Mesh m;
  if (doc.contains("domain")) {
    try {
      const auto& d = doc["domain"];
      m.domain.lo = Point3(d["lo"][0].get<double>(), d["lo"][1].get<double>(),
                           d["lo"][2].get<double>());
      m.domain.hi = Point3(d["hi"][0].get<double>(), d["hi"][1].get<double>(),
                           d["hi"][2].get<double>());
    } catch (const nlohmann::json::exception&) {
      bad("malformed \"domain\"");
    }
  }
  m.generation = doc.value("generation", 0);
  ElementId max_id = -1;
  const auto& elements = doc["elements"];
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const std::string where = "element " + std::to_string(e);
    const auto& el = elements[e];
    if (!el.is_object() || !el.contains("faces") || !el["faces"].is_array()) {
      bad(where + ": missing \"faces\"");
    }
    ElementId id = static_cast<ElementId>(e);
    if (el.contains("id")) {
      if (!el["id"].is_number_integer()) bad(where + ": \"id\" is not an integer");
      id = el["id"].get<ElementId>();
    }
    if (id < 0 || m.elements.count(id)) bad(where + ": duplicate or negative id");
    Polyhedron p;
    p.id = id;
    std::map<int, int> local;
    for (const auto& loop : el["faces"]) {
      if (!loop.is_array() || loop.size() < 3) bad(where + ": face with fewer than 3 vertices");
      PolyFace f;
      for (const auto& idx : loop) {
        if (!idx.is_number_integer()) bad(where + ": vertex index is not an integer");
        const long long g = idx.get<long long>();
        if (g < 0 || g >= static_cast<long long>(points.size())) {
          bad(where + ": vertex index " + std::to_string(g) + " out of range");
        }
        const auto [it, fresh] = local.emplace(static_cast<int>(g), static_cast<int>(p.vertices.size()));
        if (fresh) p.vertices.push_back(points[g]);
        f.loop.push_back(it->second);
      }
      p.faces.push_back(std::move(f));
    }
    if (!is_valid(p)) bad(where + ": not a closed, consistently oriented polyhedron");
    if (el.contains("parent") && el["parent"].is_number_integer()) {
      const ElementId parent = el["parent"].get<ElementId>();
      if (parent != kNoElement) m.parent[id] = parent;
    }
    max_id = std::max(max_id, id);
    m.elements.emplace(id, std::move(p));
  }
  m.next_id = std::max<ElementId>(doc.value("next_id", max_id + 1), max_id + 1);
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& contents) {
  auto out = open_out(path);
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

void write_mesh(const Mesh& m, const std::string& path) {
  write_file(path, mesh_to_json(m));
}

Mesh read_mesh(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return mesh_from_json(text);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_vtk(const Mesh& m, const std::string& path,
               const std::vector<int>& cell_labels) {
  VertexWelder welder;
  std::vector<std::vector<int>> cells;
  std::size_t stream = 0;
  for (const auto& [id, p] : m.elements) {
    std::vector<int> global;
    for (const auto& v : p.vertices) global.push_back(welder.insert(v));
    std::vector<int> cell{static_cast<int>(p.faces.size())};
    for (const auto& f : p.faces) {
      cell.push_back(static_cast<int>(f.loop.size()));
      for (int i : f.loop) cell.push_back(global[i]);
    }
    stream += cell.size() + 1;
    cells.push_back(std::move(cell));
  }
  auto out = open_out(path);
  out << "# vtk DataFile Version 4.2\npolyrefine mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << welder.points().size() << " double\n";
  for (const auto& v : welder.points()) {
    out << fmt(v.x()) << ' ' << fmt(v.y()) << ' ' << fmt(v.z()) << '\n';
  }
  out << "CELLS " << cells.size() << ' ' << stream << '\n';
  for (const auto& c : cells) {
    out << c.size();
    for (int x : c) out << ' ' << x;
    out << '\n';
  }
  out << "CELL_TYPES " << cells.size() << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) out << "42\n";
  out << "CELL_DATA " << cells.size() << "\nSCALARS element_id int 1\nLOOKUP_TABLE default\n";
  for (const auto& [id, p] : m.elements) out << id << '\n';
  if (cell_labels.size() == cells.size()) {
    out << "SCALARS label int 1\nLOOKUP_TABLE default\n";
    for (int l : cell_labels) out << l << '\n';
  }
}

void write_labels_csv(const std::vector<ElementLabel>& labels, const std::string& path) {
  auto out = open_out(path);
  out << "id,label\n";
  for (const auto& l : labels) out << l.id << ',' << to_string(l.label) << '\n';
}

void write_refine_log_csv(const std::vector<RefineLogEntry>& log, const std::string& path,
                          bool timings) {
  auto out = open_out(path);
  out << "step,id,strategy,label,children,emergency_attempts,unrefinable";
  if (timings) out << ",seconds";
  out << '\n';
  for (const auto& e : log) {
    out << e.step << ',' << e.id << ',' << to_string(e.strategy) << ','
        << (e.label ? to_string(*e.label) : "") << ',' << e.children << ','
        << e.emergency_attempts << ',' << (e.unrefinable ? 1 : 0);
    if (timings) out << ',' << fmt(e.seconds);
    out << '\n';
  }
}

void write_steps_csv(const std::vector<StepSummary>& steps, const std::string& path,
                     bool timings) {
  auto out = open_out(path);
  out << "step,elements_before,marked,unrefinable,elements_after,mesh_size,vertices,edges,"
         "faces";
  if (timings) out << ",total_refine_seconds,mean_seconds_per_element";
  out << '\n';
  for (const auto& s : steps) {
    out << s.step << ',' << s.elements_before << ',' << s.marked << ',' << s.unrefinable
        << ',' << s.elements_after << ',' << fmt(s.mesh_size) << ',' << s.stats.n_vertices
        << ',' << s.stats.n_edges << ',' << s.stats.n_faces;
    if (timings) {
      out << ',' << fmt(s.stats.total_refine_time) << ','
          << fmt(s.stats.mean_time_per_element);
    }
    out << '\n';
  }
}

void write_history_csv(const TrainResult& r, const std::string& path) {
  auto out = open_out(path);
  out << "epoch,train_loss,val_loss,val_accuracy\n";
  for (const auto& e : r.history) {
    out << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.val_loss) << ','
        << fmt(e.val_accuracy) << '\n';
  }
}

}  // namespace polyrefine
