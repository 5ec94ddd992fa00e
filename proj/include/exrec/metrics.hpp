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
#include <span>
#include <vector>

#include "exrec/autoencoder.hpp"
#include "exrec/neighborhood.hpp"
#include "exrec/ratings.hpp"

namespace exrec {

// Highest-scored items the user has not rated in training, scores
// non-increasing, ties broken by ascending item index.
struct TopNList {
  int user = -1;
  std::vector<int> items;
  std::vector<double> scores;
};

// Plain root mean square error over paired values. Throws on empty or
// mismatched input.
double rmse(std::span<const double> predicted, std::span<const double> actual);

TopNList top_n(int user, const Eigen::VectorXd& predictions,
               const Eigen::VectorXd& train_mask, int n_top);

// Mean fraction of recommended items that are explainable (E > 0).
// Users with empty recommendation lists are skipped.
double mep_at_n(std::span<const TopNList> lists, const ExplainabilityMatrix& e,
                int n_top);

// Mean average precision at n. Relevant items are test ratings with raw
// value >= relevance_threshold; users without relevant test items are
// skipped. Per user: AP = (1/min(|relevant|, n_top)) * sum over relevant
// ranked positions of precision@rank.
double map_at_n(std::span<const TopNList> lists,
                std::span<const TestRating> test, int n_top,
                int relevance_threshold);

struct EvalReport {
  ModelVariant variant = ModelVariant::baseline;
  int hidden_units = 0;
  int neighborhood_size = 0;
  double theta = 0.0;
  int n_top = 0;
  double rmse = 0.0;       // raw 1-5 scale, predictions clipped to [1,5]
  double rmse_norm = 0.0;  // normalized scale, clipped to [0,1]
  double map = 0.0;
  double mep = 0.0;
};

// Full held-out evaluation: one report per requested list size. Lists are
// built for the users that appear in the test split. `input_explain` feeds
// the model when the variant is explainable; `mep_explain` is the matrix
// MEP is measured against (they differ in threshold sweeps, where the
// baseline's lists stay fixed but its MEP is recomputed per matrix).
std::vector<EvalReport> evaluate_model(const ModelParams& params,
                                       const DataSplit& split,
                                       const ExplainabilityMatrix* input_explain,
                                       const ExplainabilityMatrix& mep_explain,
                                       std::span<const int> n_tops,
                                       int relevance_threshold);

EvalReport evaluate_model(const ModelParams& params, const DataSplit& split,
                          const ExplainabilityMatrix* input_explain,
                          const ExplainabilityMatrix& mep_explain, int n_top,
                          int relevance_threshold);

}  // namespace exrec
