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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "polyrefine/dataset.hpp"
#include "polyrefine/labels.hpp"
#include "polyrefine/voxel.hpp"

namespace polyrefine {

struct CnnArchitecture {
  int input_side = kImageSide;
  std::vector<int> kernels = {8, 4, 2};
  std::vector<int> filters = {8, 8, 8};
  int classes = kNumLabels;

  int blocks() const { return static_cast<int>(kernels.size()); }
  int dense_inputs() const;
  void validate() const;
};

// Conv(same padding, stride 1) -> ReLU -> AvgPool(2, 2) blocks, then a dense
// layer and softmax. Parameters live in one flat vector, layer by layer,
// weights before biases.
class CnnModel {
 public:
  explicit CnnModel(CnnArchitecture arch = {});

  const CnnArchitecture& architecture() const { return arch_; }
  std::size_t parameter_count() const {
    return static_cast<std::size_t>(params_.size());
  }
  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  void initialize(std::uint64_t rng_seed);

  struct Offsets {
    std::size_t weights = 0;
    std::size_t biases = 0;
    int rows = 0;  // output channels / classes
    int cols = 0;  // input channels * kernel^3 / dense inputs
  };
  const Offsets& conv(int block) const { return conv_[block]; }
  const Offsets& dense() const { return dense_; }

 private:
  CnnArchitecture arch_;
  std::vector<Offsets> conv_;
  Offsets dense_;
  Eigen::VectorXd params_;
};

using Probabilities = std::array<double, kNumLabels>;

// Input is side^3 x channels with voxel row (z * side + y) * side + x.
Eigen::MatrixXd image_tensor(const BinaryImage& image);

Eigen::VectorXd logits(const CnnModel& model, const Eigen::MatrixXd& input);
Eigen::VectorXd softmax(const Eigen::VectorXd& z);
Probabilities forward(const CnnModel& model, const BinaryImage& image);

double cross_entropy(const Eigen::VectorXd& probs, int label);

// Returns the loss and adds its gradient into `grad`.
double backward(const CnnModel& model, const Eigen::MatrixXd& input, int label,
                Eigen::VectorXd& grad);

int argmax(const Eigen::VectorXd& v);
ShapeLabel predict(const CnnModel& model, const BinaryImage& image);

struct TrainConfig {
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 16;
  int max_epochs = 100;
  int patience = 12;
  // Learning rate is multiplied by lr_decay after every lr_patience epochs
  // without a new best validation loss; 0 disables.
  int lr_patience = 4;
  // Decoupled weight decay per unit learning rate.
  double weight_decay = 0.1;
  double lr_decay = 0.5;
  std::uint64_t rng_seed = 0;
  int threads = 1;
  bool verbose = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  bool early_stopped = false;
};

// Minibatch Adam with early stopping; leaves the best-validation parameters
// in `model`.
TrainResult train(CnnModel& model, const LabeledDataset& data,
                  const TrainConfig& cfg);

struct Evaluation {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> counts{};
  std::array<std::array<double, kNumLabels>, kNumLabels> normalized{};
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::size_t samples = 0;
};

Evaluation evaluate(const CnnModel& model, const LabeledDataset& data,
                    Split split, int threads = 1);
Evaluation evaluate(const std::vector<ShapeLabel>& truth,
                    const std::vector<ShapeLabel>& predicted);

void save_model(const CnnModel& model, const std::string& path);
CnnModel load_model(const std::string& path);

}  // namespace polyrefine
