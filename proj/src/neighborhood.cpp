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

#include "exrec/neighborhood.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace exrec {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: length mismatch");
  }
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  // Rounding can push the ratio a few ulp past 1 for identical rows.
  return std::min(1.0, dot / (std::sqrt(norm_a) * std::sqrt(norm_b)));
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return cosine_similarity(
      std::span<const double>(a.data(), static_cast<size_t>(a.size())),
      std::span<const double>(b.data(), static_cast<size_t>(b.size())));
}

// Sparse rows merged in ascending item order. Entries are non-negative, so
// skipping the zero-valued positions leaves every partial sum bit-identical
// to the dense loop above.
double cosine_similarity(const RatingMatrix& m, int u, int v) {
  const auto& ru = m.row(u);
  const auto& rv = m.row(v);
  double dot = 0.0;
  size_t i = 0, j = 0;
  while (i < ru.size() && j < rv.size()) {
    if (ru[i].item == rv[j].item) {
      dot += ru[i].value * rv[j].value;
      ++i;
      ++j;
    } else if (ru[i].item < rv[j].item) {
      ++i;
    } else {
      ++j;
    }
  }
  double norm_u = 0.0, norm_v = 0.0;
  for (const auto& e : ru) norm_u += e.value * e.value;
  for (const auto& e : rv) norm_v += e.value * e.value;
  if (norm_u == 0.0 || norm_v == 0.0) return 0.0;
  return std::min(1.0, dot / (std::sqrt(norm_u) * std::sqrt(norm_v)));
}

NeighborSet find_neighbors(const RatingMatrix& m, int user, int size) {
  if (size < 1) {
    throw std::invalid_argument("neighborhood size must be >= 1");
  }
  const int num_users = m.num_users();
  if (user < 0 || user >= num_users) {
    throw std::out_of_range("user index out of range");
  }

  NeighborSet result;
  result.user = user;
  result.neighbors.reserve(num_users > 0 ? num_users - 1 : 0);
  for (int v = 0; v < num_users; ++v) {
    if (v == user) continue;
    result.neighbors.emplace_back(v, cosine_similarity(m, user, v));
  }
  std::sort(result.neighbors.begin(), result.neighbors.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (result.neighbors.size() > static_cast<size_t>(size)) {
    result.neighbors.resize(size);
  }
  return result;
}

std::vector<NeighborSet> all_neighbors(const RatingMatrix& m, int size) {
  std::vector<NeighborSet> sets;
  sets.reserve(m.num_users());
  for (int u = 0; u < m.num_users(); ++u) {
    sets.push_back(find_neighbors(m, u, size));
  }
  return sets;
}

std::array<int, 6> neighbor_rating_counts(const RatingMatrix& train,
                                          const NeighborSet& neighbors,
                                          int item) {
  std::array<int, 6> counts{};
  for (const auto& [v, sim] : neighbors.neighbors) {
    const int raw = train.raw_at(v, item);
    if (raw >= 1 && raw <= 5) ++counts[raw];
  }
  return counts;
}

double rating_probability(const RatingMatrix& train,
                          const NeighborSet& neighbors, int item,
                          int raw_value) {
  if (raw_value < 1 || raw_value > 5) {
    throw std::invalid_argument("rating value must lie in [1, 5]");
  }
  if (neighbors.neighbors.empty()) return 0.0;
  const auto counts = neighbor_rating_counts(train, neighbors, item);
  return static_cast<double>(counts[raw_value]) /
         static_cast<double>(neighbors.neighbors.size());
}

namespace {

// Shared by explainability_score and assemble_explainability so both paths
// produce bit-identical values.
double expected_score_from_counts(const std::array<int, 6>& counts,
                                  size_t neighborhood) {
  if (neighborhood == 0) return 0.0;
  const double n = static_cast<double>(neighborhood);
  double score = 0.0;
  for (int x = 1; x <= 5; ++x) {
    score += static_cast<double>(x) * (static_cast<double>(counts[x]) / n);
  }
  return score;
}

}  // namespace

double explainability_score(const RatingMatrix& train,
                            const NeighborSet& neighbors, int item) {
  const auto counts = neighbor_rating_counts(train, neighbors, item);
  return expected_score_from_counts(counts, neighbors.neighbors.size());
}

ExplainabilityMatrix::ExplainabilityMatrix(Eigen::MatrixXd scores, double theta,
                                           int neighborhood_size)
    : scores_(std::move(scores)),
      theta_(theta),
      neighborhood_size_(neighborhood_size) {
  if ((scores_.array() < 0.0).any() || (scores_.array() > 1.0).any()) {
    throw std::invalid_argument("explainability scores must lie in [0, 1]");
  }
}

std::size_t ExplainabilityMatrix::num_nonzero() const {
  return static_cast<std::size_t>((scores_.array() != 0.0).count());
}

namespace {

ExplainabilityMatrix assemble_impl(const RatingMatrix& train,
                                   const std::vector<NeighborSet>& neighbors,
                                   double theta, int recorded_size) {
  if (theta < 0.0) {
    throw std::invalid_argument("theta must be >= 0");
  }
  const int num_users = train.num_users();
  const int num_items = train.num_items();
  if (static_cast<int>(neighbors.size()) != num_users) {
    throw std::invalid_argument("neighbor sets do not cover all users");
  }

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(num_users, num_items);
  std::vector<int> counts(static_cast<size_t>(num_items) * 5);
  for (int u = 0; u < num_users; ++u) {
    const auto& set = neighbors[u];
    const size_t n = set.neighbors.size();
    if (n == 0) continue;
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& [v, sim] : set.neighbors) {
      for (const auto& e : train.row(v)) {
        const int raw = denormalize_rating(e.value);
        ++counts[static_cast<size_t>(e.item) * 5 + (raw - 1)];
      }
    }
    for (int i = 0; i < num_items; ++i) {
      std::array<int, 6> c{};
      for (int x = 1; x <= 5; ++x) {
        c[x] = counts[static_cast<size_t>(i) * 5 + (x - 1)];
      }
      const double score = expected_score_from_counts(c, n);
      if (score > theta) {
        scores(u, i) = score / 5.0;
      }
    }
  }
  return ExplainabilityMatrix(std::move(scores), theta, recorded_size);
}

}  // namespace

ExplainabilityMatrix assemble_explainability(
    const RatingMatrix& train, const std::vector<NeighborSet>& neighbors,
    double theta) {
  size_t recorded = 0;
  for (const auto& set : neighbors) {
    recorded = std::max(recorded, set.neighbors.size());
  }
  return assemble_impl(train, neighbors, theta, static_cast<int>(recorded));
}

ExplainabilityMatrix build_explainability_matrix(const RatingMatrix& train,
                                                 int neighborhood_size,
                                                 double theta) {
  const auto neighbors = all_neighbors(train, neighborhood_size);
  return assemble_impl(train, neighbors, theta, neighborhood_size);
}

void save_explainability_csv(const ExplainabilityMatrix& e,
                             const RatingMatrix& index_source,
                             const std::string& path) {
  if (e.num_users() != index_source.num_users() ||
      e.num_items() != index_source.num_items()) {
    throw std::invalid_argument("index source does not match matrix shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open explainability file for writing: " +
                             path);
  }
  char meta[160];
  std::snprintf(meta, sizeof(meta),
                "# exrec-explainability v1 neighborhood_size=%d theta=%.17g "
                "users=%d items=%d\n",
                e.neighborhood_size(), e.theta(), e.num_users(), e.num_items());
  out << meta << "user_id,item_id,score\n";
  char buf[64];
  for (int u = 0; u < e.num_users(); ++u) {
    for (int i = 0; i < e.num_items(); ++i) {
      const double v = e.at(u, i);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << index_source.user_id(u) << ',' << index_source.item_id(i) << ','
          << buf << '\n';
    }
  }
  if (!out) {
    throw std::runtime_error("I/O error while writing " + path);
  }
}

ExplainabilityMatrix load_explainability_csv(const std::string& path,
                                             const RatingMatrix& index_source) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open explainability file: " + path);
  }
  std::string meta;
  if (!std::getline(in, meta)) {
    throw std::runtime_error("empty explainability file: " + path);
  }
  int neighborhood_size = 0, users = 0, items = 0;
  double theta = 0.0;
  if (std::sscanf(meta.c_str(),
                  "# exrec-explainability v1 neighborhood_size=%d theta=%lg "
                  "users=%d items=%d",
                  &neighborhood_size, &theta, &users, &items) != 4) {
    throw std::runtime_error("unrecognized explainability header in " + path);
  }
  if (users != index_source.num_users() || items != index_source.num_items()) {
    throw std::runtime_error("explainability matrix shape does not match data");
  }
  std::string header;
  std::getline(in, header);

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(users, items);
  std::string line;
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int user_id = 0, item_id = 0;
    double score = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lg", &user_id, &item_id, &score) != 3) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed row");
    }
    const int u = index_source.user_index(user_id);
    const int i = index_source.item_index(item_id);
    if (u < 0 || i < 0) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown user or item id");
    }
    scores(u, i) = score;
  }
  return ExplainabilityMatrix(std::move(scores), theta, neighborhood_size);
}

}  // namespace exrec
