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
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the exit code is the number of failures.
//
// Criteria 4-7 need a benchmark-sized corpus. The suite uses the MovieLens
// 100K ratings file when one is available (EXREC_ML100K env var or
// data/ml-100k/u.data); otherwise it falls back to the deterministic
// synthetic stand-in corpus of the same shape so the full pipeline is still
// exercised end to end.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "exrec/harness.hpp"
#include "exrec/metrics.hpp"
#include "exrec/neighborhood.hpp"
#include "exrec/ratings.hpp"
#include "exrec/rng.hpp"
#include "exrec/synth.hpp"
#include "oracles.hpp"

using namespace exrec;

namespace {

int failures = 0;

void report(int index, bool pass, const std::string& name,
            const std::string& detail, double seconds) {
  if (!pass) ++failures;
  std::printf("[%d/8] %s %s: %s (%.1fs)\n", index, pass ? "PASS" : "FAIL",
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

template <typename Fn>
void run_criterion(int index, const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = fn();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(index, pass, name, detail, seconds);
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---- corpus resolution ---------------------------------------------------

std::vector<RawRating> resolve_corpus(std::string& description) {
  std::vector<std::string> candidates;
  if (const char* env = std::getenv("EXREC_ML100K")) {
    candidates.push_back(env);
  }
  candidates.push_back("data/ml-100k/u.data");
  candidates.push_back("../data/ml-100k/u.data");
  candidates.push_back("../../data/ml-100k/u.data");
  for (const auto& path : candidates) {
    if (std::filesystem::exists(path)) {
      description = "ratings file " + path;
      auto ratings = parse_movielens(path);
      audit_min_ratings(dataset_stats(ratings));
      return ratings;
    }
  }
  SynthConfig config;  // 943 x 1682, 100K ratings, deterministic
  description = "synthetic stand-in corpus (943 users x 1682 items, 100000 "
                "ratings, seed 5); set EXREC_ML100K to use the real data";
  auto ratings = synthetic_ratings(config);
  audit_min_ratings(dataset_stats(ratings));
  return ratings;
}

// ---- criterion 1: gradient oracle ----------------------------------------

std::pair<bool, std::string> gradient_oracle() {
  Rng rng(101);
  const double lambdas[] = {0.0, 0.01, 1.0};
  double worst = 0.0;
  long coordinates = 0;
  int instances = 0;
  for (int round = 0; round < 108; ++round) {
    const ModelVariant variant =
        round % 2 == 0 ? ModelVariant::baseline : ModelVariant::explainable;
    const int items = 1 + static_cast<int>(rng.next_index(8));
    const int hidden = 1 + static_cast<int>(rng.next_index(8));
    const int columns = 1 + static_cast<int>(rng.next_index(8));
    const double lambda = lambdas[round % 3];
    const ModelParams params = oracle::random_params(
        rng, variant, InputCombine::concatenate, hidden, items);
    const Batch batch = oracle::random_batch(rng, params, columns);
    const auto check = oracle::check_gradients(params, batch, lambda, 1e-5);
    worst = std::max(worst, check.max_rel_error);
    coordinates += check.coordinates;
    ++instances;
  }
  const bool pass = worst < 1e-5 && instances >= 100;
  return {pass, std::to_string(instances) + " instances, " +
                    std::to_string(coordinates) +
                    " coordinates, max rel err " + fmt(worst) + " (tol 1e-5)"};
}

// ---- criterion 2: explainability oracle -----------------------------------

std::pair<bool, std::string> explainability_oracle() {
  Rng rng(202);
  int instances = 0;
  long cells = 0;
  long mismatches = 0;
  for (int round = 0; round < 60; ++round) {
    const int m = 2 + static_cast<int>(rng.next_index(9));
    const int n = 1 + static_cast<int>(rng.next_index(10));
    const int size = 1 + static_cast<int>(rng.next_index(5));
    const double theta = static_cast<double>(rng.next_index(4));
    const auto raw = oracle::random_raw_matrix(rng, m, n, 0.5);
    const RatingMatrix matrix = oracle::matrix_from_raw(raw);
    const ExplainabilityMatrix e =
        build_explainability_matrix(matrix, size, theta);
    const auto expected = oracle::naive_explainability(raw, size, theta);
    for (int u = 0; u < m; ++u) {
      for (int i = 0; i < n; ++i) {
        ++cells;
        if (e.at(u, i) != expected[u][i]) ++mismatches;
      }
    }
    ++instances;
  }
  const bool pass = mismatches == 0 && instances >= 50;
  return {pass, std::to_string(instances) + " matrices, " +
                    std::to_string(cells) + " cells compared exactly, " +
                    std::to_string(mismatches) + " mismatches"};
}

// ---- criterion 3: metric oracles ------------------------------------------

std::pair<bool, std::string> metric_oracles() {
  Rng rng(303);
  double worst = 0.0;
  int fixtures = 0;
  for (int round = 0; round < 50; ++round) {
    const int users = 1 + static_cast<int>(rng.next_index(5));
    const int items = 2 + static_cast<int>(rng.next_index(9));

    // rmse fixture
    const int pairs = 1 + static_cast<int>(rng.next_index(12));
    std::vector<double> predicted(pairs), actual(pairs);
    for (int i = 0; i < pairs; ++i) {
      predicted[i] = rng.next_double(1.0, 5.0);
      actual[i] = 1.0 + static_cast<double>(rng.next_index(5));
    }
    worst = std::max(worst, std::fabs(rmse(predicted, actual) -
                                      oracle::naive_rmse(predicted, actual)));

    // shared lists + explainability + test ratings
    std::vector<std::vector<double>> raw_e(users,
                                           std::vector<double>(items, 0.0));
    for (auto& row : raw_e) {
      for (auto& v : row) {
        if (rng.next_double() < 0.4) v = rng.next_double();
      }
    }
    Eigen::MatrixXd scores(users, items);
    for (int u = 0; u < users; ++u) {
      for (int i = 0; i < items; ++i) scores(u, i) = raw_e[u][i];
    }
    const ExplainabilityMatrix e(std::move(scores), 0.0, 3);

    const int n_top = 1 + static_cast<int>(rng.next_index(5));
    std::vector<TopNList> lists;
    std::vector<TestRating> test;
    for (int u = 0; u < users; ++u) {
      TopNList list;
      list.user = u;
      for (int i = 0; i < items && static_cast<int>(list.items.size()) < n_top;
           ++i) {
        if (rng.next_double() < 0.5) list.items.push_back(i);
      }
      list.scores.assign(list.items.size(), 0.0);
      lists.push_back(list);
      for (int i = 0; i < items; ++i) {
        if (rng.next_double() < 0.3) {
          test.push_back(TestRating{
              u, i, (1.0 + static_cast<double>(rng.next_index(5))) / 5.0});
        }
      }
    }

    // mep vs brute force
    double mep_expected = 0.0;
    int counted = 0;
    for (const auto& list : lists) {
      if (list.items.empty()) continue;
      mep_expected +=
          oracle::naive_explainable_fraction(list.user, list.items, raw_e);
      ++counted;
    }
    mep_expected = counted == 0 ? 0.0 : mep_expected / counted;
    worst = std::max(worst,
                     std::fabs(mep_at_n(lists, e, n_top) - mep_expected));

    // map vs brute force
    std::map<int, std::set<int>> relevant;
    for (const auto& t : test) {
      if (denormalize_rating(t.value) >= 4) relevant[t.user].insert(t.item);
    }
    double map_expected = 0.0;
    counted = 0;
    for (const auto& list : lists) {
      auto it = relevant.find(list.user);
      if (it == relevant.end() || it->second.empty()) continue;
      map_expected +=
          oracle::naive_average_precision(list.items, it->second, n_top);
      ++counted;
    }
    map_expected = counted == 0 ? 0.0 : map_expected / counted;
    worst = std::max(worst,
                     std::fabs(map_at_n(lists, test, n_top, 4) - map_expected));
    ++fixtures;
  }
  const bool pass = worst < 1e-12 && fixtures >= 50;
  return {pass, std::to_string(fixtures) +
                    " fixtures, max abs deviation " + fmt(worst) +
                    " (tol 1e-12)"};
}

// ---- criteria 4-7 share two trained models --------------------------------

struct BenchmarkState {
  DataSplit split;
  ExplainabilityMatrix explain;           // theta = 0, |N_u| = 50
  std::vector<NeighborSet> neighbors;     // |N_u| = 50
  TrainResult baseline;
  TrainResult explainable;
  TrainConfig config;                     // shared fixed parameters
};

// Benchmark protocol: k = 300, theta = 0, |N_u| = 50 over a 90/10 split.
// The remaining knobs are sized for the overparameterized k=300 regime on a
// 100K-rating corpus (without the stronger L2 the baseline memorizes the
// training fold and its rankings degenerate).
TrainConfig benchmark_config(ModelVariant variant) {
  TrainConfig config;
  config.hidden_units = 300;
  config.lambda = 0.1;
  config.learning_rate = 0.005;
  config.epochs = 40;
  config.batch_size = 32;
  config.seed = 1;
  config.variant = variant;
  config.theta = 0.0;
  config.neighborhood_size = 50;
  return config;
}

BenchmarkState prepare_benchmark(const std::vector<RawRating>& ratings) {
  BenchmarkState state;
  state.split = split_ratings(ratings, 0.1, 42);
  state.neighbors = all_neighbors(state.split.train, 50);
  state.explain = assemble_explainability(state.split.train, state.neighbors,
                                          0.0);
  state.config = benchmark_config(ModelVariant::baseline);
  state.baseline = train(state.split, nullptr, state.config);
  TrainConfig explain_config = benchmark_config(ModelVariant::explainable);
  state.explainable = train(state.split, &state.explain, explain_config);
  return state;
}

std::pair<bool, std::string> epoch_curve_criterion(const BenchmarkState& s) {
  bool decreasing = true;
  for (const TrainResult* result : {&s.baseline, &s.explainable}) {
    for (int e = 1; e < 10; ++e) {
      if (!(result->history[e].test_rmse < result->history[e - 1].test_rmse)) {
        decreasing = false;
      }
    }
  }
  const double final_baseline = s.baseline.history.back().test_rmse;
  const double final_explainable = s.explainable.history.back().test_rmse;
  const bool parity = final_explainable <= final_baseline + 0.01;
  std::ostringstream detail;
  detail << "rmse epoch1->10 baseline " << fmt(s.baseline.history[0].test_rmse)
         << "->" << fmt(s.baseline.history[9].test_rmse) << ", explainable "
         << fmt(s.explainable.history[0].test_rmse) << "->"
         << fmt(s.explainable.history[9].test_rmse) << "; final "
         << fmt(final_baseline) << " vs " << fmt(final_explainable)
         << " (margin 0.01)";
  return {decreasing && parity, detail.str()};
}

std::pair<bool, std::string> topn_criterion(const BenchmarkState& s) {
  const int ns[] = {5, 10, 20, 50};
  const auto base_reports =
      evaluate_model(s.baseline.params, s.split, nullptr, s.explain, ns, 4);
  const auto exp_reports = evaluate_model(s.explainable.params, s.split,
                                          &s.explain, s.explain, ns, 4);
  bool higher_everywhere = true;
  std::ostringstream detail;
  detail << "mep (baseline/explainable):";
  for (size_t i = 0; i < 4; ++i) {
    if (!(exp_reports[i].mep > base_reports[i].mep)) higher_everywhere = false;
    detail << " @" << ns[i] << " " << fmt(base_reports[i].mep) << "/"
           << fmt(exp_reports[i].mep);
  }
  const bool deepens = base_reports[3].mep > base_reports[2].mep &&
                       exp_reports[3].mep > exp_reports[2].mep;
  detail << (deepens ? "; mep@50 > mep@20 for both"
                     : "; mep@50 > mep@20 VIOLATED");
  return {higher_everywhere && deepens, detail.str()};
}

std::pair<bool, std::string> theta_criterion(const BenchmarkState& s) {
  // Both models keep their theta=0 training; each threshold re-cuts the
  // matrix that MEP is measured against.
  const double thetas[] = {0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> base_mep, exp_mep;
  for (size_t i = 0; i < 5; ++i) {
    const ExplainabilityMatrix e =
        assemble_explainability(s.split.train, s.neighbors, thetas[i]);
    base_mep.push_back(
        evaluate_model(s.baseline.params, s.split, nullptr, e, 10, 4).mep);
    exp_mep.push_back(
        evaluate_model(s.explainable.params, s.split, &s.explain, e, 10, 4)
            .mep);
  }
  bool monotone = true, above = true;
  for (size_t i = 0; i < 5; ++i) {
    if (i > 0 && (base_mep[i] > base_mep[i - 1] ||
                  exp_mep[i] > exp_mep[i - 1])) {
      monotone = false;
    }
    if (!(exp_mep[i] > base_mep[i])) above = false;
  }
  std::ostringstream detail;
  detail << "mep@10 over theta 0..4 baseline [";
  for (double v : base_mep) detail << ' ' << fmt(v);
  detail << " ], explainable [";
  for (double v : exp_mep) detail << ' ' << fmt(v);
  detail << " ]";
  return {monotone && above, detail.str()};
}

std::pair<bool, std::string> sanity_floor_criterion(const BenchmarkState& s) {
  const double mean = s.split.train.mean_raw_rating();
  double err = 0.0;
  for (const auto& t : s.split.test) {
    const double actual = static_cast<double>(std::lround(5.0 * t.value));
    err += (mean - actual) * (mean - actual);
  }
  const double mean_rmse =
      std::sqrt(err / static_cast<double>(s.split.test.size()));
  const double model_rmse = s.baseline.history.back().test_rmse;
  const bool pass = model_rmse <= mean_rmse - 0.05;
  return {pass, "global-mean rmse " + fmt(mean_rmse) + ", model rmse " +
                    fmt(model_rmse) + " (required margin 0.05)"};
}

// ---- criterion 8: sweep determinism ---------------------------------------

std::pair<bool, std::string> determinism_criterion(
    const std::vector<RawRating>& ratings) {
  ExperimentSpec spec;
  spec.axis = SweepAxis::hidden_units;
  spec.axis_values = {8, 16};
  spec.split_seed = 42;
  spec.test_fraction = 0.1;
  spec.base.epochs = 3;
  spec.base.batch_size = 32;
  spec.base.learning_rate = 0.01;
  spec.base.lambda = 0.01;
  spec.base.seed = 1;
  spec.base.neighborhood_size = 50;
  spec.base.theta = 0.0;
  spec.n_top = 10;

  ExperimentDriver first(spec, ratings);
  const std::string a = first.run_csv();
  ExperimentDriver second(spec, ratings);
  const std::string b = second.run_csv();
  const bool pass = !a.empty() && a == b;
  return {pass, pass ? "two sweep executions produced byte-identical CSVs (" +
                           std::to_string(a.size()) + " bytes)"
                     : "CSV outputs differ between reruns"};
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  std::string corpus_description;
  const std::vector<RawRating> ratings = resolve_corpus(corpus_description);
  std::printf("corpus: %s\n\n", corpus_description.c_str());
  std::fflush(stdout);

  run_criterion(1, "gradient oracle", gradient_oracle);
  run_criterion(2, "explainability oracle", explainability_oracle);
  run_criterion(3, "metric oracles", metric_oracles);

  BenchmarkState state = prepare_benchmark(ratings);
  run_criterion(4, "epoch curve",
                [&] { return epoch_curve_criterion(state); });
  run_criterion(5, "top-n explainability",
                [&] { return topn_criterion(state); });
  run_criterion(6, "threshold sweep",
                [&] { return theta_criterion(state); });
  run_criterion(7, "sanity floor vs global mean",
                [&] { return sanity_floor_criterion(state); });
  run_criterion(8, "sweep determinism",
                [&] { return determinism_criterion(ratings); });

  std::printf("\nresult: %d/8 criteria passed\n", 8 - failures);
  return failures;
}
