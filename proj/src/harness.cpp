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

#include "exrec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace exrec {

namespace {

std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string part;
  std::stringstream ss(s);
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

}  // namespace

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::epochs: return "epochs";
    case SweepAxis::n_top: return "n_top";
    case SweepAxis::hidden_units: return "hidden_units";
    case SweepAxis::neighborhood_size: return "neighborhood_size";
    case SweepAxis::theta: return "theta";
  }
  return "unknown";
}

SweepAxis axis_from_string(const std::string& s) {
  if (s == "epochs") return SweepAxis::epochs;
  if (s == "n_top") return SweepAxis::n_top;
  if (s == "hidden_units") return SweepAxis::hidden_units;
  if (s == "neighborhood_size") return SweepAxis::neighborhood_size;
  if (s == "theta") return SweepAxis::theta;
  throw std::invalid_argument("unknown sweep axis: " + s);
}

std::string csv_filename_for(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::epochs: return "fig3_rmse_vs_epochs.csv";
    case SweepAxis::n_top: return "fig4_topn.csv";
    case SweepAxis::hidden_units: return "fig5_hidden.csv";
    case SweepAxis::neighborhood_size:
    case SweepAxis::theta: return "fig6_neighbors_theta.csv";
  }
  return "sweep.csv";
}

void apply_default_axis_values(ExperimentSpec& spec) {
  if (!spec.axis_values.empty()) return;
  switch (spec.axis) {
    case SweepAxis::epochs:
      spec.axis_values = {static_cast<double>(spec.base.epochs)};
      break;
    case SweepAxis::n_top:
      spec.axis_values = {5, 10, 20, 50};
      break;
    case SweepAxis::hidden_units:
      spec.axis_values = {50, 100, 200, 300, 500};
      break;
    case SweepAxis::neighborhood_size:
      spec.axis_values = {10, 25, 50, 100};
      break;
    case SweepAxis::theta:
      spec.axis_values = {0, 1, 2, 3, 4};
      break;
  }
}

ExperimentSpec load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open experiment file: " + path);
  }
  ExperimentSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "data") {
        spec.data_path = value;
      } else if (key == "format") {
        if (value == "tsv") spec.format = RatingFileFormat::tsv;
        else if (value == "csv") spec.format = RatingFileFormat::csv;
        else throw std::invalid_argument("unknown format: " + value);
      } else if (key == "out_dir") {
        spec.out_dir = value;
      } else if (key == "test_fraction") {
        spec.test_fraction = std::stod(value);
      } else if (key == "split_seed") {
        spec.split_seed = std::stoull(value);
      } else if (key == "seed") {
        spec.base.seed = std::stoull(value);
      } else if (key == "variants") {
        spec.variants.clear();
        if (value == "both") {
          spec.variants = {ModelVariant::baseline, ModelVariant::explainable};
        } else {
          for (const auto& v : split_list(value)) {
            spec.variants.push_back(variant_from_string(v));
          }
        }
      } else if (key == "sweep") {
        spec.axis = axis_from_string(value);
      } else if (key == "values") {
        spec.axis_values.clear();
        for (const auto& v : split_list(value)) {
          spec.axis_values.push_back(std::stod(v));
        }
      } else if (key == "hidden_units") {
        spec.base.hidden_units = std::stoi(value);
      } else if (key == "lambda") {
        spec.base.lambda = std::stod(value);
      } else if (key == "learning_rate") {
        spec.base.learning_rate = std::stod(value);
      } else if (key == "epochs") {
        spec.base.epochs = std::stoi(value);
      } else if (key == "batch_size") {
        spec.base.batch_size = std::stoi(value);
      } else if (key == "theta") {
        spec.base.theta = std::stod(value);
      } else if (key == "neighborhood_size") {
        spec.base.neighborhood_size = std::stoi(value);
      } else if (key == "n_top") {
        spec.n_top = std::stoi(value);
      } else if (key == "relevance_threshold") {
        spec.relevance_threshold = std::stoi(value);
      } else if (key == "input_combine") {
        if (value == "concatenate") spec.base.combine = InputCombine::concatenate;
        else if (value == "add") spec.base.combine = InputCombine::add;
        else throw std::invalid_argument("unknown input_combine: " + value);
      } else {
        throw std::invalid_argument("unknown key: " + key);
      }
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return spec;
}

namespace {

void validate_spec(ExperimentSpec& spec) {
  apply_default_axis_values(spec);
  if (spec.axis_values.empty()) {
    throw std::invalid_argument("sweep axis values must be nonempty");
  }
  for (size_t i = 1; i < spec.axis_values.size(); ++i) {
    if (!(spec.axis_values[i] > spec.axis_values[i - 1])) {
      throw std::invalid_argument("sweep axis values must be strictly increasing");
    }
  }
  if (spec.variants.empty()) {
    throw std::invalid_argument("at least one model variant required");
  }
  if (spec.n_top < 1) {
    throw std::invalid_argument("n_top must be >= 1");
  }
}

bool any_explainable(const std::vector<ModelVariant>& variants) {
  return std::any_of(variants.begin(), variants.end(), [](ModelVariant v) {
    return v == ModelVariant::explainable;
  });
}

}  // namespace

ExperimentDriver::ExperimentDriver(ExperimentSpec spec)
    : ExperimentDriver(std::move(spec), std::vector<RawRating>{}) {}

ExperimentDriver::ExperimentDriver(ExperimentSpec spec,
                                   const std::vector<RawRating>& ratings)
    : spec_(std::move(spec)) {
  validate_spec(spec_);
  if (!ratings.empty()) {
    split_ = split_ratings(ratings, spec_.test_fraction, spec_.split_seed);
  } else {
    const auto parsed = parse_movielens(spec_.data_path, spec_.format);
    split_ = split_ratings(parsed, spec_.test_fraction, spec_.split_seed);
  }
}

std::vector<int> ExperimentDriver::integer_axis_values(int minimum) const {
  std::vector<int> values;
  values.reserve(spec_.axis_values.size());
  for (double v : spec_.axis_values) {
    const int i = static_cast<int>(std::llround(v));
    if (static_cast<double>(i) != v || i < minimum) {
      throw std::invalid_argument(std::string("axis ") +
                                  axis_name(spec_.axis) +
                                  " requires integer values >= " +
                                  std::to_string(minimum));
    }
    values.push_back(i);
  }
  return values;
}

std::string ExperimentDriver::run_csv() {
  switch (spec_.axis) {
    case SweepAxis::epochs: return run_epoch_curve();
    case SweepAxis::n_top: return run_topn_sweep();
    case SweepAxis::hidden_units: return run_hidden_units_sweep();
    case SweepAxis::neighborhood_size: return run_neighborhood_sweep();
    case SweepAxis::theta: return run_theta_sweep();
  }
  throw std::logic_error("unreachable sweep axis");
}

std::string ExperimentDriver::run_and_write() {
  const std::string csv = run_csv();
  std::filesystem::create_directories(spec_.out_dir);
  const std::string path =
      (std::filesystem::path(spec_.out_dir) / csv_filename_for(spec_.axis))
          .string();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  out << csv;
  if (!out) {
    throw std::runtime_error("I/O error while writing " + path);
  }
  return path;
}

std::string ExperimentDriver::run_epoch_curve() {
  const std::vector<int> values = integer_axis_values(1);
  const int epochs = values.back();

  ExplainabilityMatrix explain;
  if (any_explainable(spec_.variants)) {
    explain = build_explainability_matrix(
        split_.train, spec_.base.neighborhood_size, spec_.base.theta);
  }

  std::vector<std::vector<EpochRow>> histories;
  for (ModelVariant variant : spec_.variants) {
    TrainConfig cfg = spec_.base;
    cfg.variant = variant;
    cfg.epochs = epochs;
    const auto* e =
        variant == ModelVariant::explainable ? &explain : nullptr;
    histories.push_back(train(split_, e, cfg).history);
  }

  std::ostringstream out;
  out << "epoch,variant,test_rmse,test_rmse_norm,train_loss,hidden_units,"
         "lambda,learning_rate,batch_size,neighborhood_size,theta,"
         "split_seed,model_seed\n";
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (size_t v = 0; v < spec_.variants.size(); ++v) {
      const EpochRow& row = histories[v][epoch - 1];
      out << epoch << ',' << to_string(spec_.variants[v]) << ','
          << csv_num(row.test_rmse) << ',' << csv_num(row.test_rmse_norm)
          << ',' << csv_num(row.train_loss) << ',' << spec_.base.hidden_units
          << ',' << csv_num(spec_.base.lambda) << ','
          << csv_num(spec_.base.learning_rate) << ',' << spec_.base.batch_size
          << ',' << spec_.base.neighborhood_size << ','
          << csv_num(spec_.base.theta) << ',' << spec_.split_seed << ','
          << spec_.base.seed << '\n';
    }
  }
  return out.str();
}

std::string ExperimentDriver::run_topn_sweep() {
  const std::vector<int> n_tops = integer_axis_values(1);

  ExplainabilityMatrix explain = build_explainability_matrix(
      split_.train, spec_.base.neighborhood_size, spec_.base.theta);

  // One training per variant; lists are re-cut per list size.
  std::vector<std::vector<EvalReport>> reports;
  for (ModelVariant variant : spec_.variants) {
    TrainConfig cfg = spec_.base;
    cfg.variant = variant;
    const auto* e = variant == ModelVariant::explainable ? &explain : nullptr;
    const TrainResult result = train(split_, e, cfg);
    reports.push_back(evaluate_model(result.params, split_, e, explain, n_tops,
                                     spec_.relevance_threshold));
  }

  std::ostringstream out;
  out << "n_top,variant,map,mep,rmse,hidden_units,lambda,learning_rate,"
         "batch_size,epochs,neighborhood_size,theta,relevance_threshold,"
         "split_seed,model_seed\n";
  for (size_t i = 0; i < n_tops.size(); ++i) {
    for (size_t v = 0; v < spec_.variants.size(); ++v) {
      const EvalReport& r = reports[v][i];
      out << n_tops[i] << ',' << to_string(spec_.variants[v]) << ','
          << csv_num(r.map) << ',' << csv_num(r.mep) << ',' << csv_num(r.rmse)
          << ',' << spec_.base.hidden_units << ',' << csv_num(spec_.base.lambda)
          << ',' << csv_num(spec_.base.learning_rate) << ','
          << spec_.base.batch_size << ',' << spec_.base.epochs << ','
          << spec_.base.neighborhood_size << ',' << csv_num(spec_.base.theta)
          << ',' << spec_.relevance_threshold << ',' << spec_.split_seed << ','
          << spec_.base.seed << '\n';
    }
  }
  return out.str();
}

std::string ExperimentDriver::run_hidden_units_sweep() {
  const std::vector<int> sizes = integer_axis_values(1);

  ExplainabilityMatrix explain = build_explainability_matrix(
      split_.train, spec_.base.neighborhood_size, spec_.base.theta);

  std::ostringstream out;
  out << "hidden_units,variant,map,mep,rmse,n_top,lambda,learning_rate,"
         "batch_size,epochs,neighborhood_size,theta,relevance_threshold,"
         "split_seed,model_seed\n";
  for (size_t i = 0; i < sizes.size(); ++i) {
    const uint64_t model_seed = spec_.base.seed + static_cast<uint64_t>(i);
    for (ModelVariant variant : spec_.variants) {
      TrainConfig cfg = spec_.base;
      cfg.variant = variant;
      cfg.hidden_units = sizes[i];
      cfg.seed = model_seed;
      const auto* e =
          variant == ModelVariant::explainable ? &explain : nullptr;
      const TrainResult result = train(split_, e, cfg);
      const EvalReport r =
          evaluate_model(result.params, split_, e, explain, spec_.n_top,
                         spec_.relevance_threshold);
      out << sizes[i] << ',' << to_string(variant) << ',' << csv_num(r.map)
          << ',' << csv_num(r.mep) << ',' << csv_num(r.rmse) << ','
          << spec_.n_top << ',' << csv_num(spec_.base.lambda) << ','
          << csv_num(spec_.base.learning_rate) << ',' << spec_.base.batch_size
          << ',' << spec_.base.epochs << ',' << spec_.base.neighborhood_size
          << ',' << csv_num(spec_.base.theta) << ','
          << spec_.relevance_threshold << ',' << spec_.split_seed << ','
          << model_seed << '\n';
    }
  }
  return out.str();
}

namespace {

std::string fig6_header() {
  return "axis,axis_value,variant,map,mep,n_top,hidden_units,lambda,"
         "learning_rate,batch_size,epochs,neighborhood_size,theta,"
         "relevance_threshold,split_seed,model_seed\n";
}

}  // namespace

std::string ExperimentDriver::run_neighborhood_sweep() {
  const std::vector<int> sizes = integer_axis_values(1);

  // The baseline does not consume the explainability matrix: train it once,
  // its lists and MAP stay fixed while MEP is recomputed against each matrix.
  TrainResult baseline_result;
  const bool has_baseline =
      std::find(spec_.variants.begin(), spec_.variants.end(),
                ModelVariant::baseline) != spec_.variants.end();
  if (has_baseline) {
    TrainConfig cfg = spec_.base;
    cfg.variant = ModelVariant::baseline;
    baseline_result = train(split_, nullptr, cfg);
  }

  std::ostringstream out;
  out << fig6_header();
  for (size_t i = 0; i < sizes.size(); ++i) {
    const uint64_t model_seed = spec_.base.seed + static_cast<uint64_t>(i);
    const ExplainabilityMatrix explain = build_explainability_matrix(
        split_.train, sizes[i], spec_.base.theta);
    for (ModelVariant variant : spec_.variants) {
      EvalReport r;
      uint64_t row_seed = spec_.base.seed;
      if (variant == ModelVariant::baseline) {
        r = evaluate_model(baseline_result.params, split_, nullptr, explain,
                           spec_.n_top, spec_.relevance_threshold);
      } else {
        TrainConfig cfg = spec_.base;
        cfg.variant = variant;
        cfg.neighborhood_size = sizes[i];
        cfg.seed = model_seed;
        row_seed = model_seed;
        const TrainResult result = train(split_, &explain, cfg);
        r = evaluate_model(result.params, split_, &explain, explain,
                           spec_.n_top, spec_.relevance_threshold);
      }
      out << "neighborhood_size," << sizes[i] << ',' << to_string(variant)
          << ',' << csv_num(r.map) << ',' << csv_num(r.mep) << ','
          << spec_.n_top << ',' << spec_.base.hidden_units << ','
          << csv_num(spec_.base.lambda) << ','
          << csv_num(spec_.base.learning_rate) << ',' << spec_.base.batch_size
          << ',' << spec_.base.epochs << ',' << sizes[i] << ','
          << csv_num(spec_.base.theta) << ',' << spec_.relevance_threshold
          << ',' << spec_.split_seed << ',' << row_seed << '\n';
    }
  }
  return out.str();
}

std::string ExperimentDriver::run_theta_sweep() {
  for (double v : spec_.axis_values) {
    if (v < 0.0) {
      throw std::invalid_argument("theta values must be >= 0");
    }
  }

  // The threshold only decides which items count as explainable, so both
  // variants are trained once at the fixed configuration (the explainable
  // model consumes the matrix built at the base theta) and their lists stay
  // put; each axis value re-thresholds the matrix the metric is measured
  // against. This keeps MEP non-increasing in theta by construction.
  const std::vector<NeighborSet> neighbors =
      all_neighbors(split_.train, spec_.base.neighborhood_size);
  const ExplainabilityMatrix input_explain =
      assemble_explainability(split_.train, neighbors, spec_.base.theta);

  std::vector<std::pair<ModelVariant, TrainResult>> trained;
  for (ModelVariant variant : spec_.variants) {
    TrainConfig cfg = spec_.base;
    cfg.variant = variant;
    const auto* e =
        variant == ModelVariant::explainable ? &input_explain : nullptr;
    trained.emplace_back(variant, train(split_, e, cfg));
  }

  std::ostringstream out;
  out << fig6_header();
  for (size_t i = 0; i < spec_.axis_values.size(); ++i) {
    const double theta = spec_.axis_values[i];
    const ExplainabilityMatrix explain =
        assemble_explainability(split_.train, neighbors, theta);
    for (const auto& [variant, result] : trained) {
      const auto* e =
          variant == ModelVariant::explainable ? &input_explain : nullptr;
      const EvalReport r =
          evaluate_model(result.params, split_, e, explain, spec_.n_top,
                         spec_.relevance_threshold);
      // MAP is not part of the theta report; the cell stays empty.
      out << "theta," << csv_num(theta) << ',' << to_string(variant) << ",,"
          << csv_num(r.mep) << ',' << spec_.n_top << ','
          << spec_.base.hidden_units << ',' << csv_num(spec_.base.lambda)
          << ',' << csv_num(spec_.base.learning_rate) << ','
          << spec_.base.batch_size << ',' << spec_.base.epochs << ','
          << spec_.base.neighborhood_size << ',' << csv_num(theta) << ','
          << spec_.relevance_threshold << ',' << spec_.split_seed << ','
          << spec_.base.seed << '\n';
    }
  }
  return out.str();
}

ExplanationRecord explain_recommendation(const ModelParams& params,
                                         const RatingMatrix& train,
                                         const ExplainabilityMatrix& e,
                                         int user_id, int item_id) {
  const int u = train.user_index(user_id);
  const int i = train.item_index(item_id);
  if (u < 0) {
    throw std::invalid_argument("unknown user id: " + std::to_string(user_id));
  }
  if (i < 0) {
    throw std::invalid_argument("unknown item id: " + std::to_string(item_id));
  }
  if (e.num_users() != train.num_users() ||
      e.num_items() != train.num_items()) {
    throw std::invalid_argument("explainability matrix shape mismatch");
  }

  const NeighborSet neighbors =
      find_neighbors(train, u, e.neighborhood_size());

  ExplanationRecord record;
  record.user_id = user_id;
  record.item_id = item_id;
  record.rating_histogram = neighbor_rating_counts(train, neighbors, i);
  for (int x = 1; x <= 5; ++x) {
    record.neighbors_rated += record.rating_histogram[x];
  }
  record.expected_neighbor_rating = explainability_score(train, neighbors, i);
  record.explainability = e.at(u, i);
  record.explainable = record.explainability > 0.0;
  record.neighborhood_size = e.neighborhood_size();
  record.theta = e.theta();

  const Eigen::VectorXd r = train.user_vector(u);
  const Eigen::VectorXd prediction =
      params.variant == ModelVariant::explainable
          ? predict(params, r, e.user_row(u))
          : predict(params, r);
  record.predicted_raw = std::clamp(5.0 * prediction[i], 1.0, 5.0);
  return record;
}

std::string format_explanation(const ExplanationRecord& record) {
  std::ostringstream out;
  out << "user " << record.user_id << ", item " << record.item_id << '\n'
      << "  predicted rating: " << csv_num(record.predicted_raw) << '\n'
      << "  explainability: " << csv_num(record.explainability)
      << " (expected neighbor rating " << csv_num(record.expected_neighbor_rating)
      << ", theta " << csv_num(record.theta) << ", neighborhood "
      << record.neighborhood_size << ")\n"
      << "  neighbors who rated it: " << record.neighbors_rated << " of "
      << record.neighborhood_size << '\n'
      << "  neighbor rating histogram:";
  for (int x = 1; x <= 5; ++x) {
    out << ' ' << x << ':' << record.rating_histogram[x];
  }
  out << '\n'
      << "  " << (record.explainable ? "explainable" : "not explainable")
      << '\n';
  return out.str();
}

}  // namespace exrec
