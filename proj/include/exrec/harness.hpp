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

#include <array>
#include <string>
#include <vector>

#include "exrec/autoencoder.hpp"
#include "exrec/metrics.hpp"
#include "exrec/neighborhood.hpp"
#include "exrec/ratings.hpp"

namespace exrec {

enum class SweepAxis { epochs, n_top, hidden_units, neighborhood_size, theta };

const char* axis_name(SweepAxis axis);
SweepAxis axis_from_string(const std::string& s);

// One experiment: dataset, split, fixed parameters, and one swept axis.
struct ExperimentSpec {
  std::string data_path;
  RatingFileFormat format = RatingFileFormat::tsv;
  double test_fraction = 0.1;
  uint64_t split_seed = 42;
  std::vector<ModelVariant> variants = {ModelVariant::baseline,
                                        ModelVariant::explainable};
  SweepAxis axis = SweepAxis::epochs;
  std::vector<double> axis_values;  // defaulted per axis when empty
  TrainConfig base;                 // fixed parameters when not swept
  int n_top = 10;
  int relevance_threshold = 4;
  std::string out_dir = ".";
};

// `key = value` lines, '#' comments. Unknown keys are an error.
ExperimentSpec load_experiment_file(const std::string& path);

// Fills axis_values when empty with the documented per-axis defaults.
void apply_default_axis_values(ExperimentSpec& spec);

// Canonical output file for each swept axis.
std::string csv_filename_for(SweepAxis axis);

// Runs one experiment end to end. All outputs are deterministic functions of
// the spec, so reruns produce byte-identical CSVs. Training and
// explainability construction only ever see the train side of the split.
class ExperimentDriver {
 public:
  explicit ExperimentDriver(ExperimentSpec spec);
  ExperimentDriver(ExperimentSpec spec, const std::vector<RawRating>& ratings);

  // Returns the CSV body for the spec's axis.
  std::string run_csv();

  // Writes the CSV under out_dir and returns the file path.
  std::string run_and_write();

  const ExperimentSpec& spec() const { return spec_; }
  const DataSplit& split() const { return split_; }

 private:
  std::string run_epoch_curve();
  std::string run_topn_sweep();
  std::string run_hidden_units_sweep();
  std::string run_neighborhood_sweep();
  std::string run_theta_sweep();

  std::vector<int> integer_axis_values(int minimum) const;

  ExperimentSpec spec_;
  DataSplit split_;
};

// Human-readable justification payload for one (user, item) pair.
struct ExplanationRecord {
  int user_id = 0;
  int item_id = 0;
  double predicted_raw = 0.0;          // clipped to [1, 5]
  double explainability = 0.0;         // matrix value in [0, 1]
  double expected_neighbor_rating = 0; // raw score in [0, 5]
  int neighbors_rated = 0;             // neighbors who rated the item
  std::array<int, 6> rating_histogram{};  // index = star value, [1..5]
  int neighborhood_size = 0;
  double theta = 0.0;
  bool explainable = false;
};

ExplanationRecord explain_recommendation(const ModelParams& params,
                                         const RatingMatrix& train,
                                         const ExplainabilityMatrix& e,
                                         int user_id, int item_id);

std::string format_explanation(const ExplanationRecord& record);

}  // namespace exrec
