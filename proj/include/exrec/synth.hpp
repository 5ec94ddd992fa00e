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

#include <cstdint>
#include <string>
#include <vector>

#include "exrec/ratings.hpp"

namespace exrec {

// Deterministic synthetic rating corpus with MovieLens-100K-like shape:
// taste clusters shared between users and items, long-tail item popularity,
// skewed user activity, integer stars in [1,5]. Users preferentially rate
// items from their own cluster, which gives cosine neighborhoods and the
// explainability scores real signal to find.
struct SynthConfig {
  int num_users = 943;
  int num_items = 1682;
  int num_ratings = 100000;
  int num_clusters = 8;
  int min_per_user = 20;
  uint64_t seed = 5;

  // Shape knobs. Defaults are tuned so the corpus mirrors the benchmark's
  // observable statistics: a long popularity tail, partial coverage of even
  // the biggest hits, and cluster-concentrated high ratings.
  double popularity_sigma = 1.6;   // lognormal item popularity spread
  double same_cluster_boost = 3.0; // sampling preference for own cluster
  double know_base = 0.25;         // chance an off-cluster item is known
  double know_cluster = 0.60;      // chance an own-cluster item is known
  double affinity_same = 1.0;      // rating shift for own-cluster items
  double affinity_other = -0.5;    // rating shift for off-cluster items
  double base_mean = 3.0;          // grand mean of the star scale
  double rating_noise = 0.6;       // gaussian noise on the latent rating
  double user_bias_range = 0.35;   // uniform per-user shift of the scale

  // Cluster 0 is an intense fandom: near-universal awareness of its items,
  // heavier sampling, higher ratings. It supplies the deeply-supported
  // (u, item) pairs whose expected neighbor ratings survive high thresholds.
  double fandom_know = 0.95;
  double fandom_boost = 6.0;
  double fandom_affinity = 1.35;

  // Hidden gems: a thin slice of cluster-agnostic items with few, scattered,
  // enthusiastic raters. Models push them up everyone's list while only
  // some users have a neighbor who actually rated them.
  int gem_items = 70;
  double gem_know = 0.15;
  double gem_affinity = 0.6;
};

std::vector<RawRating> synthetic_ratings(const SynthConfig& config);

// Writes the corpus in MovieLens u.data format (tab-separated).
void write_ratings_file(const std::vector<RawRating>& ratings,
                        const std::string& path);

}  // namespace exrec
