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

#include "exrec/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "exrec/rng.hpp"

namespace exrec {

namespace {

// Key packing external (user, item) pairs for duplicate detection.
uint64_t pair_key(int user_id, int item_id) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(user_id)) << 32) |
         static_cast<uint32_t>(item_id);
}

bool parse_int_field(const std::string& s, int64_t& out) {
  if (s.empty()) return false;
  size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

}  // namespace

std::vector<RawRating> parse_movielens(const std::string& path,
                                       RatingFileFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open ratings file: " + path);
  }
  const char sep = format == RatingFileFormat::tsv ? '\t' : ',';

  std::vector<RawRating> ratings;
  std::unordered_map<uint64_t, int> seen;  // pair key -> first line number
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string fields[4];
    int field = 0;
    for (char c : line) {
      if (c == sep) {
        if (++field > 3) break;
      } else {
        fields[field].push_back(c);
      }
    }
    if (field != 3) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 4 fields, got " +
                               std::to_string(field + 1));
    }

    int64_t values[4];
    for (int i = 0; i < 4; ++i) {
      if (!parse_int_field(fields[i], values[i])) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": malformed field '" + fields[i] + "'");
      }
    }
    if (values[2] < 1 || values[2] > 5) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": rating out of range: " +
                               std::to_string(values[2]));
    }

    const uint64_t key = pair_key(static_cast<int>(values[0]),
                                  static_cast<int>(values[1]));
    auto [it, inserted] = seen.emplace(key, line_no);
    if (!inserted) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate (user, item) pair, first seen on line " +
                               std::to_string(it->second));
    }

    ratings.push_back(RawRating{static_cast<int>(values[0]),
                                static_cast<int>(values[1]),
                                static_cast<int>(values[2]), values[3]});
  }
  if (in.bad()) {
    throw std::runtime_error("I/O error while reading " + path);
  }
  return ratings;
}

double normalize_rating(int raw) {
  if (raw < 1 || raw > 5) {
    throw std::out_of_range("rating out of range: " + std::to_string(raw));
  }
  return static_cast<double>(raw) / 5.0;
}

int denormalize_rating(double value) {
  return static_cast<int>(std::lround(value * 5.0));
}

RatingMatrix::RatingMatrix(int num_users, int num_items) {
  if (num_users < 0 || num_items < 0) {
    throw std::invalid_argument("negative matrix dimensions");
  }
  rows_.resize(num_users);
  num_items_ = num_items;
  user_ids_.resize(num_users);
  item_ids_.resize(num_items);
  for (int u = 0; u < num_users; ++u) {
    user_ids_[u] = u;
    user_index_.emplace(u, u);
  }
  for (int i = 0; i < num_items; ++i) {
    item_ids_[i] = i;
    item_index_.emplace(i, i);
  }
}

RatingMatrix RatingMatrix::with_id_maps(std::vector<int> user_ids,
                                        std::vector<int> item_ids) {
  RatingMatrix m;
  m.rows_.resize(user_ids.size());
  m.num_items_ = static_cast<int>(item_ids.size());
  m.user_ids_ = std::move(user_ids);
  m.item_ids_ = std::move(item_ids);
  for (size_t u = 0; u < m.user_ids_.size(); ++u) {
    if (!m.user_index_.emplace(m.user_ids_[u], static_cast<int>(u)).second) {
      throw std::invalid_argument("duplicate user id in id map");
    }
  }
  for (size_t i = 0; i < m.item_ids_.size(); ++i) {
    if (!m.item_index_.emplace(m.item_ids_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate item id in id map");
    }
  }
  return m;
}

void RatingMatrix::add(int user, int item, double value) {
  check_user(user);
  if (item < 0 || item >= num_items_) {
    throw std::out_of_range("item index out of range");
  }
  if (!(value > 0.0) || value > 1.0) {
    throw std::invalid_argument("normalized rating must lie in (0, 1]");
  }
  auto& row = rows_[user];
  auto it = std::lower_bound(
      row.begin(), row.end(), item,
      [](const RatingEntry& e, int i) { return e.item < i; });
  if (it != row.end() && it->item == item) {
    throw std::invalid_argument("duplicate rating for (user, item)");
  }
  row.insert(it, RatingEntry{item, value});
  ++num_entries_;
}

const std::vector<RatingEntry>& RatingMatrix::row(int user) const {
  check_user(user);
  return rows_[user];
}

double RatingMatrix::value_at(int user, int item) const {
  check_user(user);
  if (item < 0 || item >= num_items_) {
    throw std::out_of_range("item index out of range");
  }
  const auto& row = rows_[user];
  auto it = std::lower_bound(
      row.begin(), row.end(), item,
      [](const RatingEntry& e, int i) { return e.item < i; });
  if (it != row.end() && it->item == item) return it->value;
  return 0.0;
}

int RatingMatrix::raw_at(int user, int item) const {
  const double v = value_at(user, item);
  return v == 0.0 ? 0 : denormalize_rating(v);
}

Eigen::VectorXd RatingMatrix::user_vector(int user) const {
  check_user(user);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(num_items_);
  for (const auto& e : rows_[user]) v[e.item] = e.value;
  return v;
}

Eigen::VectorXd RatingMatrix::user_mask(int user) const {
  check_user(user);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(num_items_);
  for (const auto& e : rows_[user]) m[e.item] = 1.0;
  return m;
}

double RatingMatrix::mean_raw_rating() const {
  if (num_entries_ == 0) {
    throw std::runtime_error("mean of an empty rating matrix");
  }
  double sum = 0.0;
  for (const auto& row : rows_) {
    for (const auto& e : row) sum += denormalize_rating(e.value);
  }
  return sum / static_cast<double>(num_entries_);
}

int RatingMatrix::user_index(int user_id) const {
  auto it = user_index_.find(user_id);
  return it == user_index_.end() ? -1 : it->second;
}

int RatingMatrix::item_index(int item_id) const {
  auto it = item_index_.find(item_id);
  return it == item_index_.end() ? -1 : it->second;
}

int RatingMatrix::user_id(int user) const {
  check_user(user);
  return user_ids_[user];
}

int RatingMatrix::item_id(int item) const {
  if (item < 0 || item >= num_items_) {
    throw std::out_of_range("item index out of range");
  }
  return item_ids_[item];
}

void RatingMatrix::check_user(int user) const {
  if (user < 0 || user >= static_cast<int>(rows_.size())) {
    throw std::out_of_range("user index out of range");
  }
}

DataSplit split_ratings(const std::vector<RawRating>& ratings,
                        double test_fraction, uint64_t seed) {
  if (ratings.empty()) {
    throw std::invalid_argument("cannot split an empty rating list");
  }
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }

  // Id maps over the full dataset, in first-appearance order, so test-only
  // users and items keep dense indices.
  std::vector<int> user_ids, item_ids;
  std::unordered_map<int, int> user_of, item_of;
  for (const auto& r : ratings) {
    if (user_of.emplace(r.user_id, static_cast<int>(user_ids.size())).second) {
      user_ids.push_back(r.user_id);
    }
    if (item_of.emplace(r.item_id, static_cast<int>(item_ids.size())).second) {
      item_ids.push_back(r.item_id);
    }
  }

  const size_t total = ratings.size();
  const size_t num_test = static_cast<size_t>(
      std::llround(static_cast<double>(total) * test_fraction));

  std::vector<size_t> perm(total);
  for (size_t i = 0; i < total; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);

  std::vector<char> is_test(total, 0);
  for (size_t i = 0; i < num_test; ++i) is_test[perm[i]] = 1;

  DataSplit split;
  split.seed = seed;
  split.train = RatingMatrix::with_id_maps(std::move(user_ids),
                                           std::move(item_ids));
  split.test.reserve(num_test);
  for (size_t i = 0; i < total; ++i) {
    const auto& r = ratings[i];
    const int u = user_of.at(r.user_id);
    const int it = item_of.at(r.item_id);
    const double value = normalize_rating(r.rating);
    if (is_test[i]) {
      split.test.push_back(TestRating{u, it, value});
    } else {
      split.train.add(u, it, value);
    }
  }
  return split;
}

DatasetStats dataset_stats(const std::vector<RawRating>& ratings) {
  DatasetStats stats;
  stats.num_ratings = ratings.size();
  std::unordered_map<int, int> per_user;
  std::unordered_map<int, char> items;
  for (const auto& r : ratings) {
    ++per_user[r.user_id];
    items.emplace(r.item_id, 1);
  }
  stats.num_users = static_cast<int>(per_user.size());
  stats.num_items = static_cast<int>(items.size());
  stats.min_ratings_per_user = 0;
  bool first = true;
  for (const auto& [_, count] : per_user) {
    if (first || count < stats.min_ratings_per_user) {
      stats.min_ratings_per_user = count;
      first = false;
    }
  }
  return stats;
}

std::string audit_min_ratings(const DatasetStats& stats, int minimum) {
  if (stats.min_ratings_per_user >= minimum) return "";
  const bool benchmark_shape = stats.num_users == 943 &&
                               stats.num_items == 1682 &&
                               stats.num_ratings == 100000;
  const std::string message =
      "minimum ratings per user is " +
      std::to_string(stats.min_ratings_per_user) + ", expected >= " +
      std::to_string(minimum);
  if (benchmark_shape) {
    throw std::runtime_error("benchmark dataset violates invariant: " + message);
  }
  return message;
}

void write_split_manifest(const std::vector<RawRating>& ratings,
                          const DataSplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open manifest for writing: " + path);
  }
  // Rebuild test membership keyed by dense indices.
  std::unordered_map<uint64_t, char> test_pairs;
  test_pairs.reserve(split.test.size() * 2);
  for (const auto& t : split.test) {
    test_pairs.emplace(pair_key(t.user, t.item), 1);
  }
  out << "user_id,item_id,rating,fold\n";
  for (const auto& r : ratings) {
    const int u = split.train.user_index(r.user_id);
    const int i = split.train.item_index(r.item_id);
    const bool test = u >= 0 && i >= 0 && test_pairs.count(pair_key(u, i)) > 0;
    out << r.user_id << ',' << r.item_id << ',' << r.rating << ','
        << (test ? "test" : "train") << '\n';
  }
  if (!out) {
    throw std::runtime_error("I/O error while writing " + path);
  }
}

}  // namespace exrec
