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

#include "polyrefine/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>

#include "polyrefine/error.hpp"
#include "polyrefine/parallel.hpp"
#include "polyrefine/random.hpp"

namespace polyrefine {

namespace {

int cube(int s) { return s * s * s; }

using RowVector = Eigen::RowVectorXd;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

// Activations are stored as (voxels x channels), so each channel is a
// contiguous column.
struct Trace {
  std::vector<Eigen::MatrixXd> cols;    // voxels x (in_channels * k^3)
  std::vector<Eigen::MatrixXd> pre;     // voxels x filters, before ReLU
  std::vector<Eigen::MatrixXd> pooled;  // (voxels / 8) x filters
  Eigen::VectorXd z;
};

void im2col(const Eigen::MatrixXd& in, int side, int k, Eigen::MatrixXd& cols) {
  const int channels = static_cast<int>(in.cols());
  const int pad = (k - 1) / 2;
  const int k3 = cube(k);
  cols.setZero(cube(side), channels * k3);
  for (int c = 0; c < channels; ++c) {
    const double* src = in.col(c).data();
    for (int tz = 0; tz < k; ++tz) {
      for (int ty = 0; ty < k; ++ty) {
        for (int tx = 0; tx < k; ++tx) {
          double* dst = cols.col(c * k3 + (tz * k + ty) * k + tx).data();
          const int x0 = std::max(0, pad - tx);
          const int x1 = std::min(side, side + pad - tx);
          if (x0 >= x1) continue;
          for (int z = 0; z < side; ++z) {
            const int iz = z - pad + tz;
            if (iz < 0 || iz >= side) continue;
            for (int y = 0; y < side; ++y) {
              const int iy = y - pad + ty;
              if (iy < 0 || iy >= side) continue;
              const int out_row = (z * side + y) * side;
              const int in_row = (iz * side + iy) * side - pad + tx;
              std::memcpy(dst + out_row + x0, src + in_row + x0,
                          sizeof(double) * (x1 - x0));
            }
          }
        }
      }
    }
  }
}

void col2im(const Eigen::MatrixXd& cols, int side, int k, int channels,
            Eigen::MatrixXd& out) {
  const int pad = (k - 1) / 2;
  const int k3 = cube(k);
  out.setZero(cube(side), channels);
  for (int c = 0; c < channels; ++c) {
    double* dst = out.col(c).data();
    for (int tz = 0; tz < k; ++tz) {
      for (int ty = 0; ty < k; ++ty) {
        for (int tx = 0; tx < k; ++tx) {
          const double* src = cols.col(c * k3 + (tz * k + ty) * k + tx).data();
          const int x0 = std::max(0, pad - tx);
          const int x1 = std::min(side, side + pad - tx);
          for (int z = 0; z < side; ++z) {
            const int iz = z - pad + tz;
            if (iz < 0 || iz >= side) continue;
            for (int y = 0; y < side; ++y) {
              const int iy = y - pad + ty;
              if (iy < 0 || iy >= side) continue;
              const int out_row = (z * side + y) * side;
              const int in_row = (iz * side + iy) * side - pad + tx;
              for (int x = x0; x < x1; ++x) dst[in_row + x] += src[out_row + x];
            }
          }
        }
      }
    }
  }
}

// ReLU followed by 2x2x2 average pooling.
void relu_pool(const Eigen::MatrixXd& pre, int side, Eigen::MatrixXd& out) {
  const int half = side / 2;
  out.setZero(cube(half), pre.cols());
  for (int c = 0; c < pre.cols(); ++c) {
    const double* src = pre.col(c).data();
    double* dst = out.col(c).data();
    for (int z = 0; z < side; ++z) {
      for (int y = 0; y < side; ++y) {
        const int row = (z * side + y) * side;
        const int pooled_row = ((z / 2) * half + y / 2) * half;
        for (int x = 0; x < side; ++x) {
          dst[pooled_row + x / 2] += std::max(0.0, src[row + x]);
        }
      }
    }
  }
  out *= 0.125;
}

void relu_pool_backward(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& d_out,
                        int side, Eigen::MatrixXd& d_pre) {
  const int half = side / 2;
  d_pre.resize(pre.rows(), pre.cols());
  for (int c = 0; c < pre.cols(); ++c) {
    const double* p = pre.col(c).data();
    const double* g = d_out.col(c).data();
    double* d = d_pre.col(c).data();
    for (int z = 0; z < side; ++z) {
      for (int y = 0; y < side; ++y) {
        const int row = (z * side + y) * side;
        const int pooled_row = ((z / 2) * half + y / 2) * half;
        for (int x = 0; x < side; ++x) {
          d[row + x] = p[row + x] > 0.0 ? 0.125 * g[pooled_row + x / 2] : 0.0;
        }
      }
    }
  }
}

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Calls visit(u, v, t) for every input voxel u with a nonzero value, output
// voxel v and kernel offset t such that output v reads input u through t.
template <typename Visit>
void for_each_tap(const double* in, int side, int k, Visit&& visit) {
  const int pad = (k - 1) / 2;
  for (int uz = 0; uz < side; ++uz) {
    for (int uy = 0; uy < side; ++uy) {
      for (int ux = 0; ux < side; ++ux) {
        const int u = (uz * side + uy) * side + ux;
        if (in[u] == 0.0) continue;
        const int tz0 = std::max(0, uz + pad - side + 1), tz1 = std::min(k, uz + pad + 1);
        const int ty0 = std::max(0, uy + pad - side + 1), ty1 = std::min(k, uy + pad + 1);
        const int tx0 = std::max(0, ux + pad - side + 1), tx1 = std::min(k, ux + pad + 1);
        for (int tz = tz0; tz < tz1; ++tz) {
          for (int ty = ty0; ty < ty1; ++ty) {
            const int v_row = ((uz + pad - tz) * side + (uy + pad - ty)) * side;
            const int t_row = (tz * k + ty) * k;
            for (int tx = tx0; tx < tx1; ++tx) {
              visit(u, v_row + ux + pad - tx, t_row + tx);
            }
          }
        }
      }
    }
  }
}

template <int F>
void axpy(double a, const double* x, double* y, int f) {
  if constexpr (F > 0) {
    for (int i = 0; i < F; ++i) y[i] += a * x[i];
  } else {
    for (int i = 0; i < f; ++i) y[i] += a * x[i];
  }
}

// Single-channel convolution by scattering the nonzero input voxels; the
// binary images are mostly empty, so this beats the im2col product.
template <int F>
void scatter_conv(const double* in, int side, int k, int f, const double* w_tf,
                  double* out_vf) {
  for_each_tap(in, side, k, [&](int u, int v, int t) {
    axpy<F>(in[u], w_tf + t * f, out_vf + v * f, f);
  });
}

template <int F>
void scatter_conv_grad(const double* in, int side, int k, int f,
                       const double* d_vf, double* dw_tf) {
  for_each_tap(in, side, k, [&](int u, int v, int t) {
    axpy<F>(in[u], d_vf + v * f, dw_tf + t * f, f);
  });
}

Eigen::Map<const Eigen::MatrixXd> weights_t(const CnnModel& m,
                                            const CnnModel::Offsets& o) {
  // Row-major (rows x cols) storage read as its column-major transpose.
  return {m.parameters().data() + o.weights, o.cols, o.rows};
}

Eigen::Map<const RowVector> biases(const CnnModel& m, const CnnModel::Offsets& o) {
  return {m.parameters().data() + o.biases, o.rows};
}

void run_forward(const CnnModel& model, const Eigen::MatrixXd& input, Trace& t) {
  const CnnArchitecture& arch = model.architecture();
  if (input.rows() != cube(arch.input_side) || input.cols() != 1) {
    throw Error(ErrorCode::kShape, "input must be a " +
                                       std::to_string(arch.input_side) +
                                       "^3 single-channel image");
  }
  const int blocks = arch.blocks();
  t.cols.resize(blocks);
  t.pre.resize(blocks);
  t.pooled.resize(blocks);
  int side = arch.input_side;
  const Eigen::MatrixXd* in = &input;
  for (int b = 0; b < blocks; ++b) {
    const auto& o = model.conv(b);
    if (in->cols() == 1) {
      thread_local RowMatrix w_tf, out;
      w_tf = weights_t(model, o);
      out.setZero(cube(side), o.rows);
      if (o.rows == 8) {
        scatter_conv<8>(in->data(), side, arch.kernels[b], o.rows, w_tf.data(),
                        out.data());
      } else {
        scatter_conv<0>(in->data(), side, arch.kernels[b], o.rows, w_tf.data(),
                        out.data());
      }
      t.pre[b] = out;
    } else {
      im2col(*in, side, arch.kernels[b], t.cols[b]);
      t.pre[b].noalias() = t.cols[b] * weights_t(model, o);
    }
    t.pre[b].rowwise() += biases(model, o);
    relu_pool(t.pre[b], side, t.pooled[b]);
    in = &t.pooled[b];
    side /= 2;
  }
  const auto& d = model.dense();
  const ConstMatrixMap flat(t.pooled.back().data(), d.cols, 1);
  t.z = weights_t(model, d).transpose() * flat;
  t.z += biases(model, d).transpose();
}

double log_sum_exp(const Eigen::VectorXd& z) {
  const double top = z.maxCoeff();
  return top + std::log((z.array() - top).exp().sum());
}

}  // namespace

int CnnArchitecture::dense_inputs() const {
  const int side = input_side >> blocks();
  return cube(side) * filters.back();
}

void CnnArchitecture::validate() const {
  if (kernels.empty() || kernels.size() != filters.size() || classes < 2 ||
      input_side < 2 || input_side % (1 << blocks()) != 0) {
    throw Error(ErrorCode::kShape, "inconsistent CNN architecture");
  }
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    if (kernels[i] < 1 || filters[i] < 1) {
      throw Error(ErrorCode::kShape, "kernel sizes and filters must be positive");
    }
  }
}

CnnModel::CnnModel(CnnArchitecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  std::size_t offset = 0;
  int channels = 1;
  for (int b = 0; b < arch_.blocks(); ++b) {
    Offsets o;
    o.rows = arch_.filters[b];
    o.cols = channels * cube(arch_.kernels[b]);
    o.weights = offset;
    offset += static_cast<std::size_t>(o.rows) * o.cols;
    o.biases = offset;
    offset += o.rows;
    conv_.push_back(o);
    channels = arch_.filters[b];
  }
  dense_.rows = arch_.classes;
  dense_.cols = arch_.dense_inputs();
  dense_.weights = offset;
  offset += static_cast<std::size_t>(dense_.rows) * dense_.cols;
  dense_.biases = offset;
  offset += dense_.rows;
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

void CnnModel::initialize(std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  params_.setZero();
  auto fill = [&](const Offsets& o, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < o.rows * o.cols; ++i) {
      params_[o.weights + i] = rng.uniform(-limit, limit);
    }
  };
  int channels = 1;
  for (int b = 0; b < arch_.blocks(); ++b) {
    const int k3 = cube(arch_.kernels[b]);
    fill(conv_[b], channels * k3, arch_.filters[b] * k3);
    channels = arch_.filters[b];
  }
  fill(dense_, dense_.cols, dense_.rows);
}

Eigen::MatrixXd image_tensor(const BinaryImage& image) {
  Eigen::MatrixXd m(kImageVoxels, 1);
  for (int i = 0; i < kImageVoxels; ++i) m(i, 0) = image.voxels[i];
  return m;
}

Eigen::VectorXd logits(const CnnModel& model, const Eigen::MatrixXd& input) {
  thread_local Trace t;
  run_forward(model, input, t);
  return t.z;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const Eigen::ArrayXd e = (z.array() - z.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

Probabilities forward(const CnnModel& model, const BinaryImage& image) {
  const Eigen::VectorXd p = softmax(logits(model, image_tensor(image)));
  if (p.size() != kNumLabels) {
    throw Error(ErrorCode::kShape, "model does not have 4 output classes");
  }
  Probabilities out;
  for (int i = 0; i < kNumLabels; ++i) out[i] = p[i];
  return out;
}

double cross_entropy(const Eigen::VectorXd& probs, int label) {
  return -std::log(probs[label]);
}

double backward(const CnnModel& model, const Eigen::MatrixXd& input, int label,
                Eigen::VectorXd& grad) {
  const CnnArchitecture& arch = model.architecture();
  if (grad.size() != model.parameters().size()) {
    grad = Eigen::VectorXd::Zero(model.parameters().size());
  }
  // Reused per thread so the large buffers are not re-faulted per sample.
  thread_local Trace t;
  thread_local Eigen::MatrixXd d_pooled, d_pre, d_cols;
  thread_local RowMatrix d_vf, dw_tf;
  run_forward(model, input, t);
  const double lse = log_sum_exp(t.z);
  const double loss = lse - t.z[label];
  Eigen::VectorXd dz = (t.z.array() - lse).exp().matrix();
  dz[label] -= 1.0;

  const auto& d = model.dense();
  const ConstMatrixMap flat(t.pooled.back().data(), d.cols, 1);
  // dW (rows x cols, row-major) == flat * dz^T in column-major (cols x rows).
  Eigen::Map<Eigen::MatrixXd>(grad.data() + d.weights, d.cols, d.rows).noalias() +=
      flat * dz.transpose();
  Eigen::Map<Eigen::VectorXd>(grad.data() + d.biases, d.rows) += dz;

  d_pooled = weights_t(model, d) * dz;  // flat gradient
  d_pooled.resize(t.pooled.back().rows(), t.pooled.back().cols());

  for (int b = arch.blocks() - 1; b >= 0; --b) {
    const int side = arch.input_side >> b;
    const auto& o = model.conv(b);
    relu_pool_backward(t.pre[b], d_pooled, side, d_pre);
    Eigen::Map<Eigen::MatrixXd> d_wt(grad.data() + o.weights, o.cols, o.rows);
    if (b == 0 && input.cols() == 1) {
      d_vf = d_pre;
      dw_tf.setZero(o.cols, o.rows);
      if (o.rows == 8) {
        scatter_conv_grad<8>(input.data(), side, arch.kernels[b], o.rows,
                             d_vf.data(), dw_tf.data());
      } else {
        scatter_conv_grad<0>(input.data(), side, arch.kernels[b], o.rows,
                             d_vf.data(), dw_tf.data());
      }
      d_wt += dw_tf;
    } else {
      d_wt.noalias() += t.cols[b].transpose() * d_pre;
    }
    Eigen::Map<RowVector>(grad.data() + o.biases, o.rows) += d_pre.colwise().sum();
    if (b == 0) break;
    d_cols.noalias() = d_pre * weights_t(model, o).transpose();
    col2im(d_cols, side, arch.kernels[b], static_cast<int>(t.pooled[b - 1].cols()),
           d_pooled);
  }
  return loss;
}

int argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

ShapeLabel predict(const CnnModel& model, const BinaryImage& image) {
  return static_cast<ShapeLabel>(argmax(logits(model, image_tensor(image))));
}

namespace {

struct BatchResult {
  double loss = 0.0;
  std::size_t correct = 0;
};

// Sums per-sample gradients over fixed chunks so the reduction order does not
// depend on the thread count.
double batch_gradient(const CnnModel& model, const LabeledDataset& data,
                      const std::vector<std::size_t>& batch, int threads,
                      Eigen::VectorXd& grad) {
  constexpr std::size_t kChunk = 8;
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<Eigen::VectorXd> partial(chunks);
  std::vector<double> losses(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    partial[c] = Eigen::VectorXd::Zero(model.parameters().size());
    for (std::size_t i = c * kChunk; i < std::min(batch.size(), (c + 1) * kChunk);
         ++i) {
      const Sample& s = data.samples[batch[i]];
      losses[c] += backward(model, image_tensor(s.image),
                            static_cast<int>(s.label), partial[c]);
    }
  });
  grad.setZero(model.parameters().size());
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    grad += partial[c];
    loss += losses[c];
  }
  return loss;
}

BatchResult score(const CnnModel& model, const LabeledDataset& data,
                  const std::vector<std::size_t>& idx, int threads,
                  std::vector<int>* predictions = nullptr) {
  std::vector<double> loss(idx.size());
  std::vector<int> pred(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t i) {
    const Sample& s = data.samples[idx[i]];
    const Eigen::VectorXd z = logits(model, image_tensor(s.image));
    loss[i] = log_sum_exp(z) - z[static_cast<int>(s.label)];
    pred[i] = argmax(z);
  });
  BatchResult r;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    r.loss += loss[i];
    r.correct += pred[i] == static_cast<int>(data.samples[idx[i]].label);
  }
  if (predictions) *predictions = std::move(pred);
  return r;
}

}  // namespace

TrainResult train(CnnModel& model, const LabeledDataset& data,
                  const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0) || cfg.batch_size < 1 ||
      cfg.lr_patience < 0 || !(cfg.weight_decay >= 0.0) || !(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) {
    throw Error(ErrorCode::kUsage, "invalid training configuration");
  }
  std::vector<std::size_t> train_idx = data.indices(Split::kTrain);
  const std::vector<std::size_t> val_idx = data.indices(Split::kValidation);
  if (train_idx.empty() || val_idx.empty()) {
    throw Error(ErrorCode::kEmptySplit, "training and validation splits must be non-empty");
  }
  Rng rng(cfg.rng_seed);
  const Eigen::Index n = model.parameters().size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad(n);
  Eigen::VectorXd best = model.parameters();
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long long step = 0;
  double rate = cfg.learning_rate;
  TrainResult result;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i > 1; --i) {
      std::swap(train_idx[i - 1], train_idx[rng.below(i)]);
    }
    double train_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::vector<std::size_t> batch(
          train_idx.begin() + start,
          train_idx.begin() +
              std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size)));
      train_loss += batch_gradient(model, data, batch, cfg.threads, grad);
      grad /= static_cast<double>(batch.size());
      ++step;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      if (cfg.weight_decay > 0.0) model.parameters() *= 1.0 - rate * cfg.weight_decay;
      model.parameters().array() -=
          rate * (m.array() / c1) /
          ((v.array() / c2).sqrt() + cfg.epsilon);
    }
    const BatchResult val = score(model, data, val_idx, cfg.threads);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss / static_cast<double>(train_idx.size());
    rec.val_loss = val.loss / static_cast<double>(val_idx.size());
    rec.val_accuracy =
        static_cast<double>(val.correct) / static_cast<double>(val_idx.size());
    result.history.push_back(rec);
    if (cfg.verbose) {
      std::cerr << "epoch " << epoch << " train_loss " << rec.train_loss
                << " val_loss " << rec.val_loss << " val_acc "
                << rec.val_accuracy << "\n";
    }
    if (rec.val_loss < best_loss) {
      best_loss = rec.val_loss;
      best = model.parameters();
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      result.early_stopped = true;
      break;
    } else if (cfg.lr_patience > 0 && since_best % cfg.lr_patience == 0) {
      rate *= cfg.lr_decay;
    }
  }
  model.parameters() = best;
  return result;
}

Evaluation evaluate(const std::vector<ShapeLabel>& truth,
                    const std::vector<ShapeLabel>& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kShape, "label vectors differ in length");
  }
  Evaluation e;
  e.samples = truth.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++e.counts[static_cast<int>(truth[i])][static_cast<int>(predicted[i])];
    correct += truth[i] == predicted[i];
  }
  for (int r = 0; r < kNumLabels; ++r) {
    const std::size_t total =
        std::accumulate(e.counts[r].begin(), e.counts[r].end(), std::size_t{0});
    for (int c = 0; c < kNumLabels; ++c) {
      e.normalized[r][c] =
          total ? static_cast<double>(e.counts[r][c]) / static_cast<double>(total)
                : 0.0;
    }
  }
  e.accuracy = e.samples ? static_cast<double>(correct) / e.samples : 0.0;
  return e;
}

Evaluation evaluate(const CnnModel& model, const LabeledDataset& data,
                    Split split, int threads) {
  const std::vector<std::size_t> idx = data.indices(split);
  std::vector<int> pred;
  const BatchResult r = score(model, data, idx, threads, &pred);
  std::vector<ShapeLabel> truth, predicted;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    truth.push_back(data.samples[idx[i]].label);
    predicted.push_back(static_cast<ShapeLabel>(pred[i]));
  }
  Evaluation e = evaluate(truth, predicted);
  e.mean_loss = idx.empty() ? 0.0 : r.loss / static_cast<double>(idx.size());
  return e;
}

namespace {

constexpr char kModelMagic[6] = {'P', 'R', 'C', 'N', 'N', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw Error(ErrorCode::kFormat, "truncated model header");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_model(const CnnModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  const CnnArchitecture& a = model.architecture();
  out.write(kModelMagic, sizeof(kModelMagic));
  put_u32(out, static_cast<std::uint32_t>(a.input_side));
  put_u32(out, static_cast<std::uint32_t>(a.blocks()));
  for (int b = 0; b < a.blocks(); ++b) {
    put_u32(out, static_cast<std::uint32_t>(a.kernels[b]));
    put_u32(out, static_cast<std::uint32_t>(a.filters[b]));
  }
  put_u32(out, static_cast<std::uint32_t>(a.classes));
  for (Eigen::Index i = 0; i < model.parameters().size(); ++i) {
    put_f64(out, model.parameters()[i]);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

CnnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  char magic[sizeof(kModelMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kFormat, path + ": not a PRCNN1 model file");
  }
  CnnArchitecture a;
  a.input_side = static_cast<int>(get_u32(in));
  const std::uint32_t blocks = get_u32(in);
  if (blocks == 0 || blocks > 16) {
    throw Error(ErrorCode::kFormat, path + ": bad block count");
  }
  a.kernels.clear();
  a.filters.clear();
  for (std::uint32_t b = 0; b < blocks; ++b) {
    a.kernels.push_back(static_cast<int>(get_u32(in)));
    a.filters.push_back(static_cast<int>(get_u32(in)));
  }
  a.classes = static_cast<int>(get_u32(in));
  try {
    a.validate();
  } catch (const Error&) {
    throw Error(ErrorCode::kFormat, path + ": inconsistent architecture");
  }
  CnnModel model(a);
  for (Eigen::Index i = 0; i < model.parameters().size(); ++i) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
      throw Error(ErrorCode::kFormat, path + ": truncated parameter block");
    }
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    double d;
    std::memcpy(&d, &bits, 8);
    model.parameters()[i] = d;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormat, path + ": trailing bytes after parameters");
  }
  return model;
}

}  // namespace polyrefine
