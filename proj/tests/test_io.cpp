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
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "polyrefine/error.hpp"
#include "polyrefine/grid_gen.hpp"
#include "polyrefine/io.hpp"

using namespace polyrefine;

namespace {

std::string format_error(const std::string& text) {
  try {
    mesh_from_json(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
    return e.what();
  }
  FAIL("malformed mesh accepted");
  return {};
}

}  // namespace

TEST_CASE("mesh JSON round-trip") {
  GridSpec spec;
  spec.kind = GridKind::kVoronoi;
  spec.resolution = 12;
  Mesh m = generate_grid(spec);
  const auto pieces = clip_by_plane(m.elements.at(3), CuttingPlane::make(
                                                          centroid(m.elements.at(3)),
                                                          {0.3, 1, 0.2}))
                          .children();
  replace_element(m, 3, pieces);
  const std::string text = mesh_to_json(m);
  const Mesh back = mesh_from_json(text);
  REQUIRE(back.size() == m.size());
  CHECK(back.next_id == m.next_id);
  CHECK(back.parent == m.parent);
  for (const auto& [id, p] : m.elements) {
    const auto& q = back.elements.at(id);
    CHECK(q.faces.size() == p.faces.size());
    CHECK(volume(q) == doctest::Approx(volume(p)).epsilon(1e-12));
  }
  // Reading renumbers vertices by first use; after that the text is stable.
  const std::string again = mesh_to_json(back);
  CHECK(mesh_to_json(mesh_from_json(again)) == again);

  const std::string path = "/tmp/polyrefine_io_test.json";
  write_mesh(m, path);
  CHECK(read_mesh(path).size() == m.size());
  write_vtk(m, "/tmp/polyrefine_io_test.vtk");
  const std::string vtk = read_file("/tmp/polyrefine_io_test.vtk");
  CHECK(vtk.find("CELL_TYPES " + std::to_string(m.size())) != std::string::npos);
  std::remove(path.c_str());
  std::remove("/tmp/polyrefine_io_test.vtk");
}

TEST_CASE("shared vertices are stored once") {
  GridSpec spec;
  spec.resolution = 2;
  const auto doc = nlohmann::json::parse(mesh_to_json(structured_grid(spec)));
  CHECK(doc["vertices"].size() == 27 * 3);
}

TEST_CASE("malformed meshes report where they fail") {
  CHECK(format_error("{\"vertices\": [0, 0,\n  0, 1, }").find("line 2") != std::string::npos);
  CHECK(format_error("[1, 2]").find("not an object") != std::string::npos);
  CHECK(format_error("{\"vertices\": [0, 0], \"elements\": []}").find("multiple of 3") !=
        std::string::npos);
  const std::string tet_vertices = "\"vertices\": [0,0,0, 1,0,0, 0,1,0, 0,0,1]";
  CHECK(format_error("{" + tet_vertices +
                     ", \"elements\": [{\"faces\": [[0,2,1],[0,1,3],[0,3,2],[1,2,9]]}]}")
            .find("element 0: vertex index 9") != std::string::npos);
  CHECK(format_error("{" + tet_vertices +
                     ", \"elements\": [{\"faces\": [[0,1,2],[0,1,3],[0,3,2],[1,2,3]]}]}")
            .find("element 0: not a closed") != std::string::npos);
  const Mesh ok = mesh_from_json(
      "{" + tet_vertices + ", \"elements\": [{\"faces\": [[0,2,1],[0,1,3],[0,3,2],[1,2,3]]}]}");
  CHECK(volume(ok.elements.at(0)) == doctest::Approx(1.0 / 6));
  CHECK_THROWS_AS(read_mesh("/tmp/does/not/exist.json"), Error);
}
