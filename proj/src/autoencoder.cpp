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

#include "exrec/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "exrec/rng.hpp"

namespace exrec {

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  return 1.0 / (1.0 + (-z).exp());
}

void check_batch(const ModelParams& params, const Batch& batch) {
  if (batch.input.cols() == 0) {
    throw std::invalid_argument("empty batch");
  }
  if (batch.input.rows() != params.input_dim() ||
      batch.target.rows() != params.num_items() ||
      batch.mask.rows() != params.num_items() ||
      batch.target.cols() != batch.input.cols() ||
      batch.mask.cols() != batch.input.cols()) {
    throw std::invalid_argument("batch dimensions do not match model");
  }
}

// Hidden activations and reconstructions for a batch, one column per user.
void forward_batch(const ModelParams& params, const Eigen::MatrixXd& input,
                   Eigen::MatrixXd& hidden, Eigen::MatrixXd& reconstruction) {
  hidden = sigmoid(((params.encoder_weights * input).colwise() +
                    params.encoder_bias)
                       .array());
  reconstruction =
      (params.decoder_weights * hidden).colwise() + params.decoder_bias;
}

Eigen::VectorXd combine_input(const Eigen::VectorXd& ratings,
                              const Eigen::VectorXd& explain,
                              InputCombine combine) {
  if (ratings.size() != explain.size()) {
    throw std::invalid_argument("rating and explainability vector lengths differ");
  }
  if (combine == InputCombine::add) {
    return ratings + explain;
  }
  Eigen::VectorXd input(ratings.size() + explain.size());
  input << ratings, explain;
  return input;
}

}  // namespace

const char* to_string(ModelVariant v) {
  return v == ModelVariant::baseline ? "baseline" : "explainable";
}

ModelVariant variant_from_string(const std::string& s) {
  if (s == "baseline") return ModelVariant::baseline;
  if (s == "explainable") return ModelVariant::explainable;
  throw std::invalid_argument("unknown model variant: " + s);
}

int input_dim_for(ModelVariant variant, InputCombine combine, int num_items) {
  if (variant == ModelVariant::explainable &&
      combine == InputCombine::concatenate) {
    return 2 * num_items;
  }
  return num_items;
}

ModelParams init_params(const TrainConfig& config, int num_items,
                        uint64_t seed) {
  if (num_items < 1) {
    throw std::invalid_argument("need at least one item");
  }
  if (config.hidden_units < 1) {
    throw std::invalid_argument("need at least one hidden unit");
  }
  const int hidden = config.hidden_units;
  const int input = input_dim_for(config.variant, config.combine, num_items);

  ModelParams params;
  params.variant = config.variant;
  params.combine = config.combine;
  params.encoder_weights.resize(hidden, input);
  params.encoder_bias = Eigen::VectorXd::Zero(hidden);
  params.decoder_weights.resize(num_items, hidden);
  params.decoder_bias = Eigen::VectorXd::Zero(num_items);

  Rng rng(seed);
  // Decoder first: its shape does not depend on the variant, so equal seeds
  // give both variants the same decoder start.
  const double decoder_limit = std::sqrt(6.0 / (hidden + num_items));
  for (int r = 0; r < num_items; ++r) {
    for (int c = 0; c < hidden; ++c) {
      params.decoder_weights(r, c) =
          rng.next_double(-decoder_limit, decoder_limit);
    }
  }
  const double encoder_limit = std::sqrt(6.0 / (input + hidden));
  for (int r = 0; r < hidden; ++r) {
    for (int c = 0; c < input; ++c) {
      params.encoder_weights(r, c) =
          rng.next_double(-encoder_limit, encoder_limit);
    }
  }
  return params;
}

Eigen::VectorXd encode(const ModelParams& params,
                       const Eigen::VectorXd& ratings) {
  if (params.variant != ModelVariant::baseline) {
    throw std::invalid_argument(
        "explainable variant requires an explainability vector");
  }
  if (ratings.size() != params.input_dim()) {
    throw std::invalid_argument("rating vector length does not match model");
  }
  return sigmoid((params.encoder_weights * ratings + params.encoder_bias).array());
}

Eigen::VectorXd encode(const ModelParams& params,
                       const Eigen::VectorXd& ratings,
                       const Eigen::VectorXd& explain) {
  if (params.variant != ModelVariant::explainable) {
    throw std::invalid_argument(
        "baseline variant does not take an explainability vector");
  }
  const Eigen::VectorXd input = combine_input(ratings, explain, params.combine);
  if (input.size() != params.input_dim()) {
    throw std::invalid_argument("input length does not match model");
  }
  return sigmoid((params.encoder_weights * input + params.encoder_bias).array());
}

Eigen::VectorXd decode(const ModelParams& params,
                       const Eigen::VectorXd& hidden) {
  if (hidden.size() != params.hidden_units()) {
    throw std::invalid_argument("hidden vector length does not match model");
  }
  return params.decoder_weights * hidden + params.decoder_bias;
}

Eigen::VectorXd predict(const ModelParams& params,
                        const Eigen::VectorXd& ratings) {
  return decode(params, encode(params, ratings));
}

Eigen::VectorXd predict(const ModelParams& params,
                        const Eigen::VectorXd& ratings,
                        const Eigen::VectorXd& explain) {
  return decode(params, encode(params, ratings, explain));
}

ForwardCache forward(const ModelParams& params, const Eigen::VectorXd& ratings,
                     const Eigen::VectorXd& mask,
                     const Eigen::VectorXd* explain) {
  ForwardCache cache;
  cache.mask = mask;
  if (params.variant == ModelVariant::explainable) {
    if (explain == nullptr) {
      throw std::invalid_argument("explainability vector required");
    }
    cache.input = combine_input(ratings, *explain, params.combine);
    cache.hidden = encode(params, ratings, *explain);
  } else {
    cache.input = ratings;
    cache.hidden = encode(params, ratings);
  }
  cache.reconstruction = decode(params, cache.hidden);
  return cache;
}

Batch make_batch(const RatingMatrix& train, std::span<const int> users,
                 const ExplainabilityMatrix* explain, ModelVariant variant,
                 InputCombine combine) {
  if (users.empty()) {
    throw std::invalid_argument("empty batch");
  }
  const int n = train.num_items();
  if (variant == ModelVariant::explainable) {
    if (explain == nullptr) {
      throw std::invalid_argument("explainability matrix required");
    }
    if (explain->num_users() != train.num_users() ||
        explain->num_items() != n) {
      throw std::invalid_argument("explainability matrix shape mismatch");
    }
  }
  const int d = input_dim_for(variant, combine, n);
  const int b = static_cast<int>(users.size());

  Batch batch;
  batch.input = Eigen::MatrixXd::Zero(d, b);
  batch.target = Eigen::MatrixXd::Zero(n, b);
  batch.mask = Eigen::MatrixXd::Zero(n, b);
  for (int col = 0; col < b; ++col) {
    const int u = users[col];
    for (const auto& e : train.row(u)) {
      batch.target(e.item, col) = e.value;
      batch.mask(e.item, col) = 1.0;
    }
    if (variant == ModelVariant::explainable) {
      if (combine == InputCombine::concatenate) {
        batch.input.block(0, col, n, 1) = batch.target.col(col);
        batch.input.block(n, col, n, 1) = explain->user_row(u);
      } else {
        batch.input.col(col) =
            batch.target.col(col) + explain->user_row(u);
      }
    } else {
      batch.input.col(col) = batch.target.col(col);
    }
  }
  return batch;
}

double loss(const ModelParams& params, const Batch& batch, double lambda) {
  check_batch(params, batch);
  Eigen::MatrixXd hidden, reconstruction;
  forward_batch(params, batch.input, hidden, reconstruction);
  const double data_term =
      (batch.mask.array() * (batch.target - reconstruction).array())
          .square()
          .sum();
  return data_term + 0.5 * lambda *
                         (params.encoder_weights.squaredNorm() +
                          params.decoder_weights.squaredNorm());
}

Gradients gradients(const ModelParams& params, const Batch& batch,
                    double lambda) {
  check_batch(params, batch);
  Eigen::MatrixXd hidden, reconstruction;
  forward_batch(params, batch.input, hidden, reconstruction);

  // d(loss)/d(reconstruction), nonzero only at observed entries.
  const Eigen::MatrixXd delta_out =
      2.0 * (batch.mask.array() * (reconstruction - batch.target).array())
                .matrix();

  Gradients g;
  g.decoder_weights =
      delta_out * hidden.transpose() + lambda * params.decoder_weights;
  g.decoder_bias = delta_out.rowwise().sum();

  const Eigen::MatrixXd delta_hidden =
      ((params.decoder_weights.transpose() * delta_out).array() *
       hidden.array() * (1.0 - hidden.array()))
          .matrix();
  g.encoder_weights =
      delta_hidden * batch.input.transpose() + lambda * params.encoder_weights;
  g.encoder_bias = delta_hidden.rowwise().sum();
  return g;
}

namespace {

constexpr int kEvalChunk = 512;

EpochRow evaluate_epoch(
    const ModelParams& params, const DataSplit& split,
    const ExplainabilityMatrix* explain,
    const std::vector<std::vector<std::pair<int, double>>>& test_by_user,
    double lambda, int epoch) {
  const RatingMatrix& train_matrix = split.train;
  const int m = train_matrix.num_users();

  double data_term = 0.0;
  double err_raw = 0.0;
  double err_norm = 0.0;
  size_t test_count = 0;

  std::vector<int> chunk;
  for (int start = 0; start < m; start += kEvalChunk) {
    const int count = std::min(kEvalChunk, m - start);
    chunk.resize(count);
    std::iota(chunk.begin(), chunk.end(), start);
    const Batch batch = make_batch(train_matrix, chunk, explain,
                                   params.variant, params.combine);
    Eigen::MatrixXd hidden, reconstruction;
    forward_batch(params, batch.input, hidden, reconstruction);
    data_term += (batch.mask.array() *
                  (batch.target - reconstruction).array())
                     .square()
                     .sum();
    for (int col = 0; col < count; ++col) {
      const int u = start + col;
      for (const auto& [item, value] : test_by_user[u]) {
        const double p = reconstruction(item, col);
        const double p_raw = std::clamp(5.0 * p, 1.0, 5.0);
        const double actual_raw =
            static_cast<double>(std::lround(5.0 * value));
        err_raw += (p_raw - actual_raw) * (p_raw - actual_raw);
        const double p_norm = std::clamp(p, 0.0, 1.0);
        err_norm += (p_norm - value) * (p_norm - value);
        ++test_count;
      }
    }
  }

  EpochRow row;
  row.epoch = epoch;
  row.train_loss = data_term + 0.5 * lambda *
                                   (params.encoder_weights.squaredNorm() +
                                    params.decoder_weights.squaredNorm());
  row.test_rmse =
      test_count == 0 ? 0.0 : std::sqrt(err_raw / static_cast<double>(test_count));
  row.test_rmse_norm =
      test_count == 0 ? 0.0 : std::sqrt(err_norm / static_cast<double>(test_count));
  return row;
}

}  // namespace

TrainResult train(const DataSplit& split, const ExplainabilityMatrix* explain,
                  const TrainConfig& config, const ProgressSink& sink) {
  const RatingMatrix& train_matrix = split.train;
  const int m = train_matrix.num_users();
  const int n = train_matrix.num_items();
  if (m < 1 || n < 1) {
    throw std::invalid_argument("empty training matrix");
  }
  if (config.epochs < 1) {
    throw std::invalid_argument("epochs must be >= 1");
  }
  if (config.batch_size < 1 || config.batch_size > m) {
    throw std::invalid_argument("batch_size must lie in [1, num_users]");
  }
  if (config.lambda < 0.0) {
    throw std::invalid_argument("lambda must be >= 0");
  }
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  const bool wants_explain = config.variant == ModelVariant::explainable;
  if (wants_explain != (explain != nullptr)) {
    throw std::invalid_argument(
        "explainability matrix must be present iff variant is explainable");
  }

  ModelParams params = init_params(config, n, config.seed);

  // Separate stream from init so the shuffle order is independent of the
  // number of weights drawn.
  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ull);

  std::vector<std::vector<std::pair<int, double>>> test_by_user(m);
  for (const auto& t : split.test) {
    test_by_user[t.user].emplace_back(t.item, t.value);
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.history.reserve(config.epochs);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (int start = 0; start < m; start += config.batch_size) {
      const int count = std::min(config.batch_size, m - start);
      const Batch batch =
          make_batch(train_matrix,
                     std::span<const int>(order.data() + start, count),
                     explain, config.variant, config.combine);
      const Gradients g = gradients(params, batch, config.lambda);
      params.encoder_weights -= config.learning_rate * g.encoder_weights;
      params.encoder_bias -= config.learning_rate * g.encoder_bias;
      params.decoder_weights -= config.learning_rate * g.decoder_weights;
      params.decoder_bias -= config.learning_rate * g.decoder_bias;
    }
    const EpochRow row = evaluate_epoch(params, split, explain, test_by_user,
                                        config.lambda, epoch);
    if (!std::isfinite(row.train_loss)) {
      throw std::runtime_error("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    result.history.push_back(row);
    if (sink) sink(row);
  }
  result.params = std::move(params);
  return result;
}

namespace {

constexpr char kCheckpointMagic[8] = {'E', 'X', 'R', 'E', 'C', 'K', 'P', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw std::runtime_error("truncated checkpoint");
  }
  return value;
}

void write_matrix_row_major(std::ofstream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      write_pod(out, m(r, c));
    }
  }
}

void read_matrix_row_major(std::ifstream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = read_pod<double>(in);
    }
  }
}

}  // namespace

void save_checkpoint(const ModelParams& params, const TrainConfig& config,
                     int epochs_trained, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint for writing: " + path);
  }
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod(out, static_cast<int32_t>(1));  // version
  write_pod(out, static_cast<int32_t>(params.variant));
  write_pod(out, static_cast<int32_t>(params.combine));
  write_pod(out, static_cast<int32_t>(params.hidden_units()));
  write_pod(out, static_cast<int32_t>(params.num_items()));
  write_pod(out, static_cast<int32_t>(params.input_dim()));
  write_pod(out, static_cast<int32_t>(epochs_trained));
  write_pod(out, static_cast<int32_t>(config.batch_size));
  write_pod(out, static_cast<int32_t>(config.neighborhood_size));
  write_pod(out, static_cast<uint64_t>(config.seed));
  write_pod(out, config.lambda);
  write_pod(out, config.learning_rate);
  write_pod(out, config.theta);
  write_matrix_row_major(out, params.encoder_weights);
  for (Eigen::Index i = 0; i < params.encoder_bias.size(); ++i) {
    write_pod(out, params.encoder_bias[i]);
  }
  write_matrix_row_major(out, params.decoder_weights);
  for (Eigen::Index i = 0; i < params.decoder_bias.size(); ++i) {
    write_pod(out, params.decoder_bias[i]);
  }
  if (!out) {
    throw std::runtime_error("I/O error while writing " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const int32_t version = read_pod<int32_t>(in);
  if (version != 1) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }

  Checkpoint ckpt;
  const auto variant = static_cast<ModelVariant>(read_pod<int32_t>(in));
  const auto combine = static_cast<InputCombine>(read_pod<int32_t>(in));
  const int32_t hidden = read_pod<int32_t>(in);
  const int32_t items = read_pod<int32_t>(in);
  const int32_t input = read_pod<int32_t>(in);
  ckpt.epochs_trained = read_pod<int32_t>(in);
  ckpt.config.batch_size = read_pod<int32_t>(in);
  ckpt.config.neighborhood_size = read_pod<int32_t>(in);
  ckpt.config.seed = read_pod<uint64_t>(in);
  ckpt.config.lambda = read_pod<double>(in);
  ckpt.config.learning_rate = read_pod<double>(in);
  ckpt.config.theta = read_pod<double>(in);
  ckpt.config.variant = variant;
  ckpt.config.combine = combine;
  ckpt.config.hidden_units = hidden;
  ckpt.config.epochs = std::max(1, ckpt.epochs_trained);

  if (hidden < 1 || items < 1 ||
      input != input_dim_for(variant, combine, items)) {
    throw std::runtime_error("inconsistent checkpoint dimensions");
  }

  ckpt.params.variant = variant;
  ckpt.params.combine = combine;
  ckpt.params.encoder_weights.resize(hidden, input);
  ckpt.params.encoder_bias.resize(hidden);
  ckpt.params.decoder_weights.resize(items, hidden);
  ckpt.params.decoder_bias.resize(items);
  read_matrix_row_major(in, ckpt.params.encoder_weights);
  for (Eigen::Index i = 0; i < hidden; ++i) {
    ckpt.params.encoder_bias[i] = read_pod<double>(in);
  }
  read_matrix_row_major(in, ckpt.params.decoder_weights);
  for (Eigen::Index i = 0; i < items; ++i) {
    ckpt.params.decoder_bias[i] = read_pod<double>(in);
  }
  if (!ckpt.params.encoder_weights.allFinite() ||
      !ckpt.params.decoder_weights.allFinite() ||
      !ckpt.params.encoder_bias.allFinite() ||
      !ckpt.params.decoder_bias.allFinite()) {
    throw std::runtime_error("checkpoint contains non-finite parameters");
  }
  return ckpt;
}

}  // namespace exrec
