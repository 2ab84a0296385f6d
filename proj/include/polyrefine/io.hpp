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

#include <string>
#include <vector>

#include "polyrefine/cnn.hpp"
#include "polyrefine/labels.hpp"
#include "polyrefine/mesh.hpp"
#include "polyrefine/refine.hpp"

namespace polyrefine {

// {"vertices": [x0, y0, z0, ...], "elements": [{"id", "parent", "faces"}]}
// with vertices shared between elements. Coordinates closer than 1e-9 are
// merged on write.
std::string mesh_to_json(const Mesh& m);
// Throws kFormat with a line/column or element diagnostic.
Mesh mesh_from_json(const std::string& text);
void write_mesh(const Mesh& m, const std::string& path);
Mesh read_mesh(const std::string& path);

// Legacy VTK unstructured grid of polyhedron cells, for viewing only.
void write_vtk(const Mesh& m, const std::string& path,
               const std::vector<int>& cell_labels = {});

struct ElementLabel {
  ElementId id = kNoElement;
  ShapeLabel label = ShapeLabel::kOther;
};
void write_labels_csv(const std::vector<ElementLabel>& labels,
                      const std::string& path);

void write_refine_log_csv(const std::vector<RefineLogEntry>& log,
                          const std::string& path, bool timings);
void write_steps_csv(const std::vector<StepSummary>& steps,
                     const std::string& path, bool timings);
void write_history_csv(const TrainResult& r, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace polyrefine
