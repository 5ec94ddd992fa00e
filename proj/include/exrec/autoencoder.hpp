// Copyright 2026 The exrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "exrec/neighborhood.hpp"
#include "exrec/ratings.hpp"

namespace exrec {

enum class ModelVariant { baseline, explainable };

// How the explainable variant combines the rating vector r with the
// side-input vector e. `concatenate` doubles the input width; `add` is an
// experimental alternative kept behind this flag.
enum class InputCombine { concatenate, add };

const char* to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& s);

// Single-hidden-layer autoencoder: sigmoid encoder, identity decoder.
struct ModelParams {
  ModelVariant variant = ModelVariant::baseline;
  InputCombine combine = InputCombine::concatenate;
  Eigen::MatrixXd encoder_weights;  // hidden x input_dim
  Eigen::VectorXd encoder_bias;     // hidden
  Eigen::MatrixXd decoder_weights;  // items x hidden
  Eigen::VectorXd decoder_bias;     // items

  int hidden_units() const { return static_cast<int>(encoder_bias.size()); }
  int num_items() const { return static_cast<int>(decoder_bias.size()); }
  int input_dim() const { return static_cast<int>(encoder_weights.cols()); }
};

int input_dim_for(ModelVariant variant, InputCombine combine, int num_items);

struct TrainConfig {
  int hidden_units = 300;
  double lambda = 0.01;          // L2 coefficient on both weight matrices
  double learning_rate = 0.01;
  int epochs = 50;
  int batch_size = 32;           // users per mini-batch
  uint64_t seed = 1;
  ModelVariant variant = ModelVariant::baseline;
  InputCombine combine = InputCombine::concatenate;
  // Forwarded to the neighborhood stage when variant == explainable.
  double theta = 0.0;
  int neighborhood_size = 50;
};

// Uniform Glorot-style init: weights in +-sqrt(6 / (fan_in + fan_out)),
// biases zero, deterministic for a given seed. The decoder matrix is drawn
// first so both variants share its initial values under the same seed (the
// encoder widths differ).
ModelParams init_params(const TrainConfig& config, int num_items,
                        uint64_t seed);

// sigmoid(W_enc . input + b), where input is the rating vector, optionally
// combined with the explainability vector for the explainable variant.
Eigen::VectorXd encode(const ModelParams& params,
                       const Eigen::VectorXd& ratings);
Eigen::VectorXd encode(const ModelParams& params,
                       const Eigen::VectorXd& ratings,
                       const Eigen::VectorXd& explain);

// W_dec . hidden + decoder bias; identity output activation.
Eigen::VectorXd decode(const ModelParams& params,
                       const Eigen::VectorXd& hidden);

Eigen::VectorXd predict(const ModelParams& params,
                        const Eigen::VectorXd& ratings);
Eigen::VectorXd predict(const ModelParams& params,
                        const Eigen::VectorXd& ratings,
                        const Eigen::VectorXd& explain);

struct ForwardCache {
  Eigen::VectorXd input;
  Eigen::VectorXd hidden;
  Eigen::VectorXd reconstruction;
  Eigen::VectorXd mask;
};

ForwardCache forward(const ModelParams& params, const Eigen::VectorXd& ratings,
                     const Eigen::VectorXd& mask,
                     const Eigen::VectorXd* explain = nullptr);

// A batch of users, one column each.
struct Batch {
  Eigen::MatrixXd input;   // input_dim x batch
  Eigen::MatrixXd target;  // items x batch (normalized ratings, 0-imputed)
  Eigen::MatrixXd mask;    // items x batch (1 where observed)
};

Batch make_batch(const RatingMatrix& train, std::span<const int> users,
                 const ExplainabilityMatrix* explain, ModelVariant variant,
                 InputCombine combine = InputCombine::concatenate);

// Masked squared reconstruction error summed over the batch plus
// (lambda/2) * (||W_enc||_F^2 + ||W_dec||_F^2). The mask restricts the error
// term to observed entries; unobserved positions only influence the loss
// through the encoder input.
double loss(const ModelParams& params, const Batch& batch, double lambda);

struct Gradients {
  Eigen::MatrixXd encoder_weights;
  Eigen::VectorXd encoder_bias;
  Eigen::MatrixXd decoder_weights;
  Eigen::VectorXd decoder_bias;
};

// Analytic partials of `loss` with respect to every parameter. The output
// layer error term is 2 * mask (.) (reconstruction - target); the hidden
// layer backpropagates through sigmoid'(z) = h (1 - h).
Gradients gradients(const ModelParams& params, const Batch& batch,
                    double lambda);

struct EpochRow {
  int epoch = 0;          // 1-based
  double train_loss = 0;  // full training objective after the epoch
  double test_rmse = 0;   // raw 1-5 scale, predictions clipped to [1,5]
  double test_rmse_norm = 0;  // normalized scale, clipped to [0,1]
};

using ProgressSink = std::function<void(const EpochRow&)>;

struct TrainResult {
  ModelParams params;
  std::vector<EpochRow> history;
};

// Mini-batch gradient descent over users. The per-epoch user order is a
// deterministic shuffle derived from the seed; identical config + seed
// reproduce bit-identical parameters. Aborts with a diagnostic if the loss
// stops being finite. `explain` must be present iff the variant is
// explainable.
TrainResult train(const DataSplit& split, const ExplainabilityMatrix* explain,
                  const TrainConfig& config, const ProgressSink& sink = {});

// Versioned binary checkpoint: shapes + config echo + row-major weights.
// Round-trips parameters bit-exactly.
struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  int epochs_trained = 0;
};

void save_checkpoint(const ModelParams& params, const TrainConfig& config,
                     int epochs_trained, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace exrec
