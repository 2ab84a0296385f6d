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
#include <string>

#include "doctest.h"
#include "polyrefine/polyrefine.h"

TEST_CASE("grid, refine and write through the C interface") {
  pr_mesh* mesh = nullptr;
  REQUIRE(pr_grid_generate("cubes", 2, 0, 1, &mesh) == PR_OK);
  CHECK(pr_mesh_element_count(mesh) == 8);
  pr_refine_config cfg = pr_refine_config_default();
  cfg.strategy = "classical:cube";
  cfg.steps = 1;
  pr_refine_report report{};
  REQUIRE(pr_refine(mesh, &cfg, nullptr, nullptr, nullptr, 0, &report) == PR_OK);
  CHECK(report.elements == 64);
  CHECK(report.unrefinable == 0);
  CHECK(pr_mesh_volume(mesh) == doctest::Approx(1.0));
  CHECK(pr_mesh_count_in_slab(mesh, 0.0, 0.25) == 16);

  pr_complexity stats{};
  REQUIRE(pr_mesh_complexity(mesh, &stats) == PR_OK);
  CHECK(stats.vertices == 125);

  pr_quality q{};
  REQUIRE(pr_quality_report(mesh, nullptr, nullptr, 1, &q) == PR_OK);
  CHECK(q.mean_uf == doctest::Approx(1.0));

  const char* path = "/tmp/polyrefine_capi_test.json";
  REQUIRE(pr_mesh_write(mesh, path) == PR_OK);
  pr_mesh* back = nullptr;
  REQUIRE(pr_mesh_read(path, &back) == PR_OK);
  CHECK(pr_mesh_element_count(back) == 64);
  std::remove(path);
  pr_mesh_free(back);
  pr_mesh_free(mesh);
}

TEST_CASE("errors map to status codes with messages") {
  pr_mesh* mesh = nullptr;
  CHECK(pr_grid_generate("hexagons", 2, 0, 1, &mesh) == PR_ERR_USAGE);
  CHECK(std::string(pr_last_error()).find("hexagons") != std::string::npos);
  CHECK(pr_mesh_read("/tmp/does/not/exist.json", &mesh) == PR_ERR_IO);
  std::FILE* f = std::fopen("/tmp/polyrefine_capi_bad.json", "w");
  std::fputs("{\"vertices\": [1, 2", f);
  std::fclose(f);
  CHECK(pr_mesh_read("/tmp/polyrefine_capi_bad.json", &mesh) == PR_ERR_FORMAT);
  std::remove("/tmp/polyrefine_capi_bad.json");
  CHECK(mesh == nullptr);

  REQUIRE(pr_grid_generate("cubes", 1, 0, 1, &mesh) == PR_OK);
  pr_refine_config cfg = pr_refine_config_default();
  cfg.strategy = "cnn";
  CHECK(pr_refine(mesh, &cfg, nullptr, nullptr, nullptr, 0, nullptr) == PR_ERR_USAGE);
  cfg.strategy = "diameter";
  cfg.nmax = 1;
  CHECK(pr_refine(mesh, &cfg, nullptr, nullptr, nullptr, 0, nullptr) == PR_ERR_USAGE);
  CHECK(pr_mesh_element_count(mesh) == 1);
  pr_mesh_free(mesh);
  CHECK(pr_mesh_element_count(nullptr) == 0);
  CHECK(std::string(pr_status_name(PR_ERR_FORMAT)) == "format");
}

TEST_CASE("dataset and model handles") {
  pr_dataset_config dc = pr_dataset_config_default();
  CHECK(dc.per_shape == 600);
  dc.per_shape = 10;
  dc.other = 10;
  pr_dataset* data = nullptr;
  REQUIRE(pr_dataset_generate(&dc, &data) == PR_OK);
  CHECK(pr_dataset_size(data) == 40);
  CHECK(pr_dataset_count(data, 2, 0) == 6);

  pr_model* model = nullptr;
  REQUIRE(pr_model_new(1, &model) == PR_OK);
  CHECK(pr_model_parameter_count(model) == 8988);
  pr_train_config tc = pr_train_config_default();
  tc.max_epochs = 1;
  int best = -1;
  REQUIRE(pr_model_train(model, data, &tc, nullptr, &best) == PR_OK);
  CHECK(best == 1);
  pr_evaluation e{};
  REQUIRE(pr_model_evaluate(model, data, 2, 1, &e) == PR_OK);
  CHECK(e.samples == 8);
  CHECK(pr_model_evaluate(model, data, 7, 1, &e) == PR_ERR_USAGE);

  pr_mesh* mesh = nullptr;
  REQUIRE(pr_grid_generate("prisms", 1, 0, 1, &mesh) == PR_OK);
  size_t counts[4];
  REQUIRE(pr_classify(model, mesh, nullptr, counts) == PR_OK);
  CHECK(counts[0] + counts[1] + counts[2] + counts[3] == 2);
  pr_refine_config cfg = pr_refine_config_default();
  cfg.strategy = "cnn";
  REQUIRE(pr_refine(mesh, &cfg, model, nullptr, nullptr, 0, nullptr) == PR_OK);
  CHECK(pr_mesh_volume(mesh) == doctest::Approx(1.0));
  CHECK(std::string(pr_label_name(3)) == "other");

  pr_mesh_free(mesh);
  pr_model_free(model);
  pr_dataset_free(data);
}
