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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "exrec/ratings.hpp"
#include "exrec/rng.hpp"
#include "exrec/synth.hpp"

using namespace exrec;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("exrec_test_" + std::to_string(++counter) + ".data");
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("parse_movielens reads tab-separated lines in order") {
  TempFile f("196\t242\t3\t881250949\n186\t302\t3\t891717742\n");
  const auto ratings = parse_movielens(f.path.string());
  REQUIRE(ratings.size() == 2);
  CHECK(ratings[0].user_id == 196);
  CHECK(ratings[0].item_id == 242);
  CHECK(ratings[0].rating == 3);
  CHECK(ratings[0].timestamp == 881250949);
  CHECK(ratings[1].user_id == 186);
}

TEST_CASE("parse_movielens accepts an empty file") {
  TempFile f("");
  CHECK(parse_movielens(f.path.string()).empty());
}

TEST_CASE("parse_movielens rejects out-of-range ratings") {
  TempFile f("1\t1\t9\t0\n");
  CHECK_THROWS_WITH_AS(parse_movielens(f.path.string()),
                       doctest::Contains("rating out of range"),
                       std::runtime_error);
}

TEST_CASE("parse_movielens reports the malformed line number") {
  TempFile f("1\t2\t3\t4\n5\t6\t7\n");
  CHECK_THROWS_WITH_AS(parse_movielens(f.path.string()),
                       doctest::Contains(":2:"), std::runtime_error);
}

TEST_CASE("parse_movielens rejects duplicate (user, item) pairs") {
  TempFile f("1\t2\t3\t4\n1\t2\t5\t9\n");
  CHECK_THROWS_WITH_AS(parse_movielens(f.path.string()),
                       doctest::Contains("duplicate"), std::runtime_error);
}

TEST_CASE("parse_movielens reads the csv variant behind the format flag") {
  TempFile f("7,11,4,123\n");
  const auto ratings = parse_movielens(f.path.string(), RatingFileFormat::csv);
  REQUIRE(ratings.size() == 1);
  CHECK(ratings[0].user_id == 7);
  CHECK(ratings[0].rating == 4);
}

TEST_CASE("parse_movielens fails on a missing file") {
  CHECK_THROWS_AS(parse_movielens("/nonexistent/u.data"), std::runtime_error);
}

TEST_CASE("normalize_rating maps stars onto (0, 1]") {
  CHECK(normalize_rating(5) == doctest::Approx(1.0));
  CHECK(normalize_rating(1) == doctest::Approx(0.2));
  CHECK(normalize_rating(3) == doctest::Approx(0.6));
  CHECK_THROWS_AS(normalize_rating(0), std::out_of_range);
  CHECK_THROWS_AS(normalize_rating(6), std::out_of_range);
  for (int raw = 1; raw <= 5; ++raw) {
    CHECK(denormalize_rating(normalize_rating(raw)) == raw);
  }
}

TEST_CASE("split keeps sizes, determinism and rounding contracts") {
  SUBCASE("100K ratings yield a 10K test fold") {
    SynthConfig config;
    const auto ratings = synthetic_ratings(config);
    REQUIRE(ratings.size() == 100000);
    const DataSplit split = split_ratings(ratings, 0.1, 42);
    CHECK(split.test.size() == 10000);
    CHECK(split.train.num_entries() == 90000);
  }

  SUBCASE("same seed twice gives identical folds") {
    Rng rng(3);
    std::vector<RawRating> ratings;
    for (int u = 1; u <= 12; ++u) {
      for (int i = 1; i <= 9; ++i) {
        ratings.push_back(
            RawRating{u, i, 1 + static_cast<int>(rng.next_index(5)), 0});
      }
    }
    const DataSplit a = split_ratings(ratings, 0.2, 99);
    const DataSplit b = split_ratings(ratings, 0.2, 99);
    REQUIRE(a.test.size() == b.test.size());
    for (size_t i = 0; i < a.test.size(); ++i) {
      CHECK(a.test[i].user == b.test[i].user);
      CHECK(a.test[i].item == b.test[i].item);
      CHECK(a.test[i].value == b.test[i].value);
    }
  }

  SUBCASE("10 ratings at fraction 0.1 hold out exactly one") {
    std::vector<RawRating> ratings;
    for (int i = 1; i <= 10; ++i) ratings.push_back(RawRating{1, i, 3, 0});
    for (uint64_t seed : {1ull, 7ull, 1234ull}) {
      CHECK(split_ratings(ratings, 0.1, seed).test.size() == 1);
    }
  }

  SUBCASE("preconditions") {
    std::vector<RawRating> one{RawRating{1, 1, 3, 0}};
    CHECK_THROWS_AS(split_ratings({}, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_ratings(one, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_ratings(one, 1.0, 1), std::invalid_argument);
  }
}

TEST_CASE("split partitions the dataset for every seed") {
  Rng rng(11);
  std::vector<RawRating> ratings;
  for (int u = 1; u <= 15; ++u) {
    for (int i = 1; i <= 11; ++i) {
      if (rng.next_double() < 0.6) {
        ratings.push_back(
            RawRating{u, i, 1 + static_cast<int>(rng.next_index(5)), 0});
      }
    }
  }
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const DataSplit split = split_ratings(ratings, 0.25, seed);
    CHECK(split.train.num_entries() + split.test.size() == ratings.size());
    // Every source rating lands in exactly one fold with its value intact.
    std::set<std::pair<int, int>> test_pairs;
    for (const auto& t : split.test) {
      CHECK(test_pairs.emplace(t.user, t.item).second);
    }
    for (const auto& r : ratings) {
      const int u = split.train.user_index(r.user_id);
      const int i = split.train.item_index(r.item_id);
      REQUIRE(u >= 0);
      REQUIRE(i >= 0);
      const bool in_train = split.train.value_at(u, i) != 0.0;
      const bool in_test = test_pairs.count({u, i}) > 0;
      CHECK(in_train != in_test);
      if (in_train) {
        CHECK(split.train.raw_at(u, i) == r.rating);
      }
    }
  }
}

TEST_CASE("user_vector materializes rows with masks") {
  SUBCASE("user with no ratings") {
    RatingMatrix m(2, 4);
    m.add(1, 2, 0.8);
    CHECK(m.user_vector(0).isZero());
    CHECK(m.user_mask(0).isZero());
  }

  SUBCASE("single rating of raw 4") {
    RatingMatrix m(1, 3);
    m.add(0, 0, normalize_rating(4));
    const Eigen::VectorXd v = m.user_vector(0);
    CHECK(v[0] == doctest::Approx(0.8));
    CHECK(v[1] == 0.0);
    CHECK(v[2] == 0.0);
    CHECK(m.user_mask(0).sum() == doctest::Approx(1.0));
  }

  SUBCASE("explicit example row") {
    RatingMatrix m(1, 3);
    m.add(0, 1, 0.6);
    const Eigen::VectorXd v = m.user_vector(0);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == doctest::Approx(0.6));
    CHECK(v[2] == 0.0);
  }

  SUBCASE("index out of range") {
    RatingMatrix m(1, 3);
    CHECK_THROWS_AS(m.user_vector(1), std::out_of_range);
  }
}

TEST_CASE("rating matrix rejects invalid entries") {
  RatingMatrix m(2, 2);
  m.add(0, 0, 0.2);
  CHECK_THROWS_AS(m.add(0, 0, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(m.add(0, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(m.add(0, 1, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(m.add(2, 0, 0.5), std::out_of_range);
  CHECK_THROWS_AS(m.add(0, 2, 0.5), std::out_of_range);
}

TEST_CASE("parse -> matrix -> user_vector round-trips every rating") {
  TempFile f(
      "10\t100\t5\t1\n"
      "10\t200\t1\t2\n"
      "20\t100\t4\t3\n"
      "30\t300\t2\t4\n");
  const auto ratings = parse_movielens(f.path.string());
  // Use a split that keeps everything in train for the round trip.
  const DataSplit split = split_ratings(ratings, 1e-9, 5);
  REQUIRE(split.test.empty());
  for (const auto& r : ratings) {
    const int u = split.train.user_index(r.user_id);
    const int i = split.train.item_index(r.item_id);
    REQUIRE(u >= 0);
    REQUIRE(i >= 0);
    CHECK(split.train.user_vector(u)[i] ==
          doctest::Approx(normalize_rating(r.rating)));
    CHECK(split.train.user_mask(u)[i] == 1.0);
  }
}

TEST_CASE("audit_min_ratings warns off benchmark shape and throws on it") {
  DatasetStats small;
  small.num_users = 3;
  small.num_items = 5;
  small.num_ratings = 9;
  small.min_ratings_per_user = 2;
  CHECK_FALSE(audit_min_ratings(small).empty());

  DatasetStats fine = small;
  fine.min_ratings_per_user = 25;
  CHECK(audit_min_ratings(fine).empty());

  DatasetStats benchmark;
  benchmark.num_users = 943;
  benchmark.num_items = 1682;
  benchmark.num_ratings = 100000;
  benchmark.min_ratings_per_user = 19;
  CHECK_THROWS_AS(audit_min_ratings(benchmark), std::runtime_error);
}

TEST_CASE("split manifest lists every rating with its fold") {
  std::vector<RawRating> ratings;
  for (int i = 1; i <= 10; ++i) ratings.push_back(RawRating{i, i * 7, 3, 0});
  const DataSplit split = split_ratings(ratings, 0.3, 8);
  TempFile manifest("");
  write_split_manifest(ratings, split, manifest.path.string());

  std::ifstream in(manifest.path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "user_id,item_id,rating,fold");
  int train_rows = 0, test_rows = 0;
  while (std::getline(in, line)) {
    if (line.find(",train") != std::string::npos) ++train_rows;
    if (line.find(",test") != std::string::npos) ++test_rows;
  }
  CHECK(train_rows == static_cast<int>(split.train.num_entries()));
  CHECK(test_rows == static_cast<int>(split.test.size()));
}

TEST_CASE("synthetic corpus satisfies dataset invariants") {
  SynthConfig config;
  config.num_users = 60;
  config.num_items = 80;
  config.num_ratings = 2400;
  config.seed = 3;
  const auto ratings = synthetic_ratings(config);
  const auto stats = dataset_stats(ratings);
  CHECK(stats.num_ratings == 2400);
  CHECK(stats.num_users == 60);
  CHECK(stats.min_ratings_per_user >= config.min_per_user);
  for (const auto& r : ratings) {
    CHECK(r.rating >= 1);
    CHECK(r.rating <= 5);
  }
  // Determinism of the generator.
  const auto again = synthetic_ratings(config);
  REQUIRE(again.size() == ratings.size());
  CHECK(again[100].user_id == ratings[100].user_id);
  CHECK(again[100].item_id == ratings[100].item_id);
  CHECK(again[100].rating == ratings[100].rating);
}
