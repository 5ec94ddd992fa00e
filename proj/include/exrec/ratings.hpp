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
#include <string>
#include <unordered_map>
#include <vector>

namespace exrec {

// One line of a MovieLens-style ratings file.
struct RawRating {
  int user_id = 0;
  int item_id = 0;
  int rating = 0;         // integer stars on the original 1-5 scale
  int64_t timestamp = 0;  // parsed, ignored downstream
};

enum class RatingFileFormat { tsv, csv };

// Reads `user<sep>item<sep>rating<sep>timestamp` lines, one rating per line.
// Empty lines are skipped. Throws std::runtime_error naming the offending
// line number on malformed input, ratings outside [1,5] or duplicate
// (user, item) pairs.
std::vector<RawRating> parse_movielens(
    const std::string& path, RatingFileFormat format = RatingFileFormat::tsv);

// Maps {1..5} onto (0, 1] as raw / 5, keeping 0 reserved for "unobserved" so
// a true rating of 1 stays distinguishable from a missing entry.
double normalize_rating(int raw);

// Recovers the integer star value from a stored normalized rating.
int denormalize_rating(double value);

struct RatingEntry {
  int item = 0;        // dense item index
  double value = 0.0;  // normalized rating in (0, 1]
};

// Sparse user x item matrix of normalized ratings plus the external-id
// bijections. Rows are kept sorted by item index; unobserved entries read
// as 0.
class RatingMatrix {
 public:
  RatingMatrix() = default;

  // Identity id maps: external ids coincide with dense indices. Used for
  // synthetic fixtures and tests.
  RatingMatrix(int num_users, int num_items);

  // Explicit id maps in first-appearance order.
  static RatingMatrix with_id_maps(std::vector<int> user_ids,
                                   std::vector<int> item_ids);

  // Inserts one observed entry. Throws on out-of-range indices, values
  // outside (0, 1] or duplicate positions.
  void add(int user, int item, double value);

  int num_users() const { return static_cast<int>(rows_.size()); }
  int num_items() const { return num_items_; }
  std::size_t num_entries() const { return num_entries_; }

  const std::vector<RatingEntry>& row(int user) const;

  // 0.0 when (user, item) is unobserved.
  double value_at(int user, int item) const;
  // Raw 1-5 star value; 0 when unobserved.
  int raw_at(int user, int item) const;

  // Dense length-n vector with normalized ratings at observed positions and
  // 0 elsewhere.
  Eigen::VectorXd user_vector(int user) const;
  // Dense 0/1 observed mask for the same row.
  Eigen::VectorXd user_mask(int user) const;

  // Mean of raw star values over all observed entries. Throws when empty.
  double mean_raw_rating() const;

  // External id lookups; index lookups return -1 for unknown ids.
  int user_index(int user_id) const;
  int item_index(int item_id) const;
  int user_id(int user) const;
  int item_id(int item) const;

 private:
  void check_user(int user) const;

  std::vector<std::vector<RatingEntry>> rows_;
  int num_items_ = 0;
  std::size_t num_entries_ = 0;
  std::vector<int> user_ids_;
  std::vector<int> item_ids_;
  std::unordered_map<int, int> user_index_;
  std::unordered_map<int, int> item_index_;
};

// One held-out rating, in dense indices of the accompanying train matrix.
struct TestRating {
  int user = 0;
  int item = 0;
  double value = 0.0;  // normalized
};

// Random holdout split. The train matrix's id maps cover the full dataset,
// so users or items that only occur in the test portion keep valid indices
// (their predictions fall back to the decoder bias path).
struct DataSplit {
  RatingMatrix train;
  std::vector<TestRating> test;
  uint64_t seed = 0;
};

// Uniform random split over individual ratings, deterministic for a given
// seed. |test| = round(|ratings| * test_fraction).
DataSplit split_ratings(const std::vector<RawRating>& ratings,
                        double test_fraction, uint64_t seed);

struct DatasetStats {
  int num_users = 0;
  int num_items = 0;
  std::size_t num_ratings = 0;
  int min_ratings_per_user = 0;
};

DatasetStats dataset_stats(const std::vector<RawRating>& ratings);

// The 943 x 1682 x 100K benchmark guarantees at least 20 ratings per user,
// so a violation on that shape is a hard error. On other datasets a
// non-empty warning string is returned instead; empty means fine.
std::string audit_min_ratings(const DatasetStats& stats, int minimum = 20);

// CSV `user_id,item_id,rating,fold` in file order, for reproducibility
// audits of a split.
void write_split_manifest(const std::vector<RawRating>& ratings,
                          const DataSplit& split, const std::string& path);

}  // namespace exrec
