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

#include "exrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "exrec/rng.hpp"

namespace exrec {

std::vector<RawRating> synthetic_ratings(const SynthConfig& config) {
  const int m = config.num_users;
  const int n = config.num_items;
  if (m < 1 || n < 1 || config.num_clusters < 1) {
    throw std::invalid_argument("synthetic corpus dimensions must be positive");
  }
  if (config.min_per_user > n) {
    throw std::invalid_argument("min_per_user exceeds item count");
  }
  if (static_cast<long long>(config.num_ratings) <
          static_cast<long long>(m) * config.min_per_user ||
      static_cast<long long>(config.num_ratings) >
          static_cast<long long>(m) * n) {
    throw std::invalid_argument("num_ratings infeasible for matrix shape");
  }

  Rng rng(config.seed);
  const int clusters = config.num_clusters;
  const int gems = std::min(config.gem_items, n / 4);

  // Item traits: lognormal popularity, one taste cluster, base quality.
  // The first `gems` items belong to no cluster (cluster -1): scattered,
  // well-liked finds.
  std::vector<double> popularity(n);
  std::vector<int> item_cluster(n);
  std::vector<double> item_quality(n);
  for (int i = 0; i < n; ++i) {
    popularity[i] = std::exp(config.popularity_sigma * rng.next_gaussian());
    item_cluster[i] = static_cast<int>(rng.next_index(clusters));
    item_quality[i] = rng.next_double(-0.7, 0.7);
    if (i < gems) {
      item_cluster[i] = -1;
      popularity[i] = std::exp(0.4 * rng.next_gaussian());
      item_quality[i] = rng.next_double(0.3, 0.7);
    }
  }

  // User traits.
  std::vector<int> user_cluster(m);
  std::vector<double> user_bias(m);
  std::vector<double> activity(m);
  for (int u = 0; u < m; ++u) {
    user_cluster[u] = static_cast<int>(rng.next_index(clusters));
    user_bias[u] =
        rng.next_double(-config.user_bias_range, config.user_bias_range);
    activity[u] = std::exp(0.9 * rng.next_gaussian());
  }

  // Awareness pools: a user can only rate items they have come across, about
  // a third of the catalog plus a bump for their own cluster. This keeps
  // even the most popular items below full coverage, the way real catalogs
  // behave, which leaves well-supported items recommendable.
  std::vector<std::vector<int>> pool(m);
  for (int u = 0; u < m; ++u) {
    pool[u].reserve(n / 2);
    for (int i = 0; i < n; ++i) {
      double p_know = config.know_base;
      if (item_cluster[i] == -1) {
        p_know = config.gem_know;
      } else if (item_cluster[i] == user_cluster[u]) {
        p_know = user_cluster[u] == 0 ? config.fandom_know
                                      : config.know_cluster;
      }
      if (rng.next_double() < p_know) pool[u].push_back(i);
    }
    if (pool[u].size() < static_cast<size_t>(config.min_per_user)) {
      // Degenerate only for tiny catalogs; top up deterministically.
      for (int i = 0; i < n && pool[u].size() <
                                   static_cast<size_t>(config.min_per_user);
           ++i) {
        if (!std::binary_search(pool[u].begin(), pool[u].end(), i)) {
          pool[u].insert(
              std::lower_bound(pool[u].begin(), pool[u].end(), i), i);
        }
      }
    }
  }

  // Pools must be able to hold the full rating budget; tiny catalogs can
  // leave them short, so widen round-robin with the lowest absent items.
  long long capacity = 0;
  for (const auto& p : pool) capacity += static_cast<long long>(p.size());
  for (int u = 0; capacity < config.num_ratings; u = (u + 1) % m) {
    auto& p = pool[u];
    if (static_cast<int>(p.size()) >= n) continue;
    int candidate = 0;
    for (size_t j = 0; j < p.size() && p[j] == candidate; ++j) ++candidate;
    p.insert(std::lower_bound(p.begin(), p.end(), candidate), candidate);
    ++capacity;
  }

  // Distribute the rating budget proportionally to activity, with the
  // per-user floor and the awareness pool as cap; leftovers go round-robin.
  const int budget = config.num_ratings - m * config.min_per_user;
  double activity_sum = 0.0;
  for (double a : activity) activity_sum += a;
  std::vector<int> ratings_per_user(m, config.min_per_user);
  int assigned = 0;
  for (int u = 0; u < m; ++u) {
    const int cap = static_cast<int>(pool[u].size());
    const int extra = static_cast<int>(
        std::floor(activity[u] / activity_sum * static_cast<double>(budget)));
    const int granted = std::min(extra, cap - ratings_per_user[u]);
    if (granted > 0) {
      ratings_per_user[u] += granted;
      assigned += granted;
    }
  }
  for (int u = 0; assigned < budget; u = (u + 1) % m) {
    if (ratings_per_user[u] < static_cast<int>(pool[u].size())) {
      ++ratings_per_user[u];
      ++assigned;
    }
  }

  std::vector<RawRating> ratings;
  ratings.reserve(config.num_ratings);
  int64_t timestamp = 880000000;
  std::vector<double> cumulative;
  std::unordered_set<int> chosen;
  for (int u = 0; u < m; ++u) {
    // Popularity-weighted sampling without replacement inside the pool;
    // same-cluster items are favored.
    cumulative.resize(pool[u].size());
    double acc = 0.0;
    for (size_t j = 0; j < pool[u].size(); ++j) {
      const int i = pool[u][j];
      double weight = 1.0;
      if (item_cluster[i] == user_cluster[u]) {
        weight = user_cluster[u] == 0 ? config.fandom_boost
                                      : config.same_cluster_boost;
      }
      acc += popularity[i] * weight;
      cumulative[j] = acc;
    }
    chosen.clear();
    while (static_cast<int>(chosen.size()) < ratings_per_user[u]) {
      const double r = rng.next_double() * acc;
      size_t j = static_cast<size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), r) -
          cumulative.begin());
      if (j >= pool[u].size()) j = pool[u].size() - 1;
      const int item = pool[u][j];
      if (!chosen.insert(item).second) continue;

      double affinity = config.affinity_other;
      if (item_cluster[item] == -1) {
        affinity = config.gem_affinity;
      } else if (item_cluster[item] == user_cluster[u]) {
        affinity = user_cluster[u] == 0 ? config.fandom_affinity
                                        : config.affinity_same;
      }
      const double mu = config.base_mean + item_quality[item] + user_bias[u] +
                        affinity + config.rating_noise * rng.next_gaussian();
      const int stars =
          static_cast<int>(std::clamp(std::lround(mu), 1l, 5l));
      ratings.push_back(RawRating{u + 1, item + 1, stars, timestamp++});
    }
  }
  return ratings;
}

void write_ratings_file(const std::vector<RawRating>& ratings,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open ratings file for writing: " + path);
  }
  for (const auto& r : ratings) {
    out << r.user_id << '\t' << r.item_id << '\t' << r.rating << '\t'
        << r.timestamp << '\n';
  }
  if (!out) {
    throw std::runtime_error("I/O error while writing " + path);
  }
}

}  // namespace exrec
