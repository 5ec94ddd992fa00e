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
#include <array>
#include <span>
#include <string>
#include <vector>

#include "exrec/ratings.hpp"

namespace exrec {

// The k most cosine-similar users to `user`, similarity descending, ties
// broken by ascending user index.
struct NeighborSet {
  int user = -1;
  std::vector<std::pair<int, double>> neighbors;  // (user index, similarity)
};

// Cosine over dense zero-imputed vectors; 0 when either norm vanishes.
// Non-negative inputs make the result land in [0, 1].
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Same value computed from the sparse rows directly.
double cosine_similarity(const RatingMatrix& m, int u, int v);

NeighborSet find_neighbors(const RatingMatrix& m, int user, int size);
std::vector<NeighborSet> all_neighbors(const RatingMatrix& m, int size);

// Histogram of raw star values the neighbors gave to `item`;
// counts[x] for x in 1..5, counts[0] unused.
std::array<int, 6> neighbor_rating_counts(const RatingMatrix& train,
                                          const NeighborSet& neighbors,
                                          int item);

// |{v in N_u : v rated item with raw value x}| / |N_u|. Defined as 0 for an
// empty neighbor set.
double rating_probability(const RatingMatrix& train,
                          const NeighborSet& neighbors, int item,
                          int raw_value);

// Expected neighbor rating of `item`: sum over x in 1..5 of
// x * rating_probability(x). 0 when no neighbor rated the item.
double explainability_score(const RatingMatrix& train,
                            const NeighborSet& neighbors, int item);

// Dense user x item grid of thresholded expected-neighbor-rating scores,
// rescaled to [0, 1]. Row u is the side-input vector fed to the explainable
// model variant.
class ExplainabilityMatrix {
 public:
  ExplainabilityMatrix() = default;
  ExplainabilityMatrix(Eigen::MatrixXd scores, double theta,
                       int neighborhood_size);

  int num_users() const { return static_cast<int>(scores_.rows()); }
  int num_items() const { return static_cast<int>(scores_.cols()); }
  double at(int user, int item) const { return scores_(user, item); }
  Eigen::VectorXd user_row(int user) const {
    return scores_.row(user).transpose();
  }
  const Eigen::MatrixXd& values() const { return scores_; }
  double theta() const { return theta_; }
  int neighborhood_size() const { return neighborhood_size_; }
  std::size_t num_nonzero() const;

 private:
  Eigen::MatrixXd scores_;
  double theta_ = 0.0;
  int neighborhood_size_ = 0;
};

// Raw scores above `theta` (strict) survive and are divided by 5; the rest
// are zeroed. Computed from training data only.
ExplainabilityMatrix build_explainability_matrix(const RatingMatrix& train,
                                                 int neighborhood_size,
                                                 double theta);

// Same, reusing precomputed neighbor sets (e.g. across a theta sweep).
ExplainabilityMatrix assemble_explainability(
    const RatingMatrix& train, const std::vector<NeighborSet>& neighbors,
    double theta);

// Sparse CSV persistence (`user_id,item_id,score` over nonzeros, with a
// metadata line recording the neighborhood size and theta) so training runs
// can reuse a cached matrix. Scores round-trip bit-exactly.
void save_explainability_csv(const ExplainabilityMatrix& e,
                             const RatingMatrix& index_source,
                             const std::string& path);
ExplainabilityMatrix load_explainability_csv(const std::string& path,
                                             const RatingMatrix& index_source);

}  // namespace exrec
