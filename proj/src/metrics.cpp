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

#include "exrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace exrec {

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  if (predicted.empty()) {
    throw std::invalid_argument("rmse: empty input");
  }
  double sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

TopNList top_n(int user, const Eigen::VectorXd& predictions,
               const Eigen::VectorXd& train_mask, int n_top) {
  if (n_top < 1) {
    throw std::invalid_argument("n_top must be >= 1");
  }
  if (predictions.size() != train_mask.size()) {
    throw std::invalid_argument("prediction and mask lengths differ");
  }
  std::vector<int> candidates;
  candidates.reserve(predictions.size());
  for (int i = 0; i < predictions.size(); ++i) {
    if (train_mask[i] == 0.0) candidates.push_back(i);
  }
  const size_t keep = std::min(candidates.size(), static_cast<size_t>(n_top));
  std::partial_sort(candidates.begin(), candidates.begin() + keep,
                    candidates.end(), [&](int a, int b) {
                      if (predictions[a] != predictions[b]) {
                        return predictions[a] > predictions[b];
                      }
                      return a < b;
                    });
  candidates.resize(keep);

  TopNList list;
  list.user = user;
  list.items = std::move(candidates);
  list.scores.reserve(list.items.size());
  for (int i : list.items) list.scores.push_back(predictions[i]);
  return list;
}

double mep_at_n(std::span<const TopNList> lists, const ExplainabilityMatrix& e,
                int n_top) {
  double sum = 0.0;
  size_t counted = 0;
  for (const auto& list : lists) {
    if (list.items.empty()) continue;
    if (static_cast<int>(list.items.size()) > n_top) {
      throw std::invalid_argument("recommendation list longer than n_top");
    }
    int explainable = 0;
    for (int item : list.items) {
      if (e.at(list.user, item) > 0.0) ++explainable;
    }
    sum += static_cast<double>(explainable) /
           static_cast<double>(list.items.size());
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

double map_at_n(std::span<const TopNList> lists,
                std::span<const TestRating> test, int n_top,
                int relevance_threshold) {
  if (relevance_threshold < 1 || relevance_threshold > 5) {
    throw std::invalid_argument("relevance threshold must lie in [1, 5]");
  }
  std::map<int, std::set<int>> relevant;
  for (const auto& t : test) {
    if (denormalize_rating(t.value) >= relevance_threshold) {
      relevant[t.user].insert(t.item);
    }
  }

  double sum = 0.0;
  size_t counted = 0;
  for (const auto& list : lists) {
    auto it = relevant.find(list.user);
    if (it == relevant.end() || it->second.empty()) continue;
    const auto& rel = it->second;
    int hits = 0;
    double ap = 0.0;
    for (size_t rank = 0; rank < list.items.size(); ++rank) {
      if (rel.count(list.items[rank]) > 0) {
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
      }
    }
    ap /= static_cast<double>(
        std::min(rel.size(), static_cast<size_t>(n_top)));
    sum += ap;
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

std::vector<EvalReport> evaluate_model(const ModelParams& params,
                                       const DataSplit& split,
                                       const ExplainabilityMatrix* input_explain,
                                       const ExplainabilityMatrix& mep_explain,
                                       std::span<const int> n_tops,
                                       int relevance_threshold) {
  if (n_tops.empty()) {
    throw std::invalid_argument("need at least one list size");
  }
  if (split.test.empty()) {
    throw std::invalid_argument("empty test set");
  }
  const bool wants_explain = params.variant == ModelVariant::explainable;
  if (wants_explain != (input_explain != nullptr)) {
    throw std::invalid_argument(
        "explainability matrix must be present iff variant is explainable");
  }

  // Evaluated users are the ones holding test ratings.
  std::vector<char> in_test(split.train.num_users(), 0);
  for (const auto& t : split.test) in_test[t.user] = 1;
  std::vector<int> users;
  for (int u = 0; u < split.train.num_users(); ++u) {
    if (in_test[u]) users.push_back(u);
  }

  // One forward pass per user, shared across list sizes.
  std::vector<Eigen::VectorXd> predictions(users.size());
  std::vector<Eigen::VectorXd> masks(users.size());
  for (size_t idx = 0; idx < users.size(); ++idx) {
    const int u = users[idx];
    const Eigen::VectorXd r = split.train.user_vector(u);
    masks[idx] = split.train.user_mask(u);
    predictions[idx] = wants_explain
                           ? predict(params, r, input_explain->user_row(u))
                           : predict(params, r);
  }

  std::vector<size_t> slot(split.train.num_users(), 0);
  for (size_t idx = 0; idx < users.size(); ++idx) slot[users[idx]] = idx;

  double err_raw = 0.0, err_norm = 0.0;
  for (const auto& t : split.test) {
    const double p = predictions[slot[t.user]][t.item];
    const double p_raw = std::clamp(5.0 * p, 1.0, 5.0);
    const double actual_raw = static_cast<double>(std::lround(5.0 * t.value));
    err_raw += (p_raw - actual_raw) * (p_raw - actual_raw);
    const double p_norm = std::clamp(p, 0.0, 1.0);
    err_norm += (p_norm - t.value) * (p_norm - t.value);
  }
  const double rmse_raw =
      std::sqrt(err_raw / static_cast<double>(split.test.size()));
  const double rmse_norm =
      std::sqrt(err_norm / static_cast<double>(split.test.size()));

  std::vector<EvalReport> reports;
  reports.reserve(n_tops.size());
  for (int n : n_tops) {
    std::vector<TopNList> lists;
    lists.reserve(users.size());
    for (size_t idx = 0; idx < users.size(); ++idx) {
      lists.push_back(top_n(users[idx], predictions[idx], masks[idx], n));
    }
    EvalReport report;
    report.variant = params.variant;
    report.hidden_units = params.hidden_units();
    report.neighborhood_size = mep_explain.neighborhood_size();
    report.theta = mep_explain.theta();
    report.n_top = n;
    report.rmse = rmse_raw;
    report.rmse_norm = rmse_norm;
    report.map = map_at_n(lists, split.test, n, relevance_threshold);
    report.mep = mep_at_n(lists, mep_explain, n);
    reports.push_back(report);
  }
  return reports;
}

EvalReport evaluate_model(const ModelParams& params, const DataSplit& split,
                          const ExplainabilityMatrix* input_explain,
                          const ExplainabilityMatrix& mep_explain, int n_top,
                          int relevance_threshold) {
  const int n_tops[] = {n_top};
  return evaluate_model(params, split, input_explain, mep_explain, n_tops,
                        relevance_threshold)
      .front();
}

}  // namespace exrec
