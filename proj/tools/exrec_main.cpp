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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "exrec/autoencoder.hpp"
#include "exrec/harness.hpp"
#include "exrec/metrics.hpp"
#include "exrec/neighborhood.hpp"
#include "exrec/ratings.hpp"
#include "exrec/synth.hpp"

namespace {

using namespace exrec;

struct DataFlags {
  std::string path;
  std::string format = "tsv";
  double test_fraction = 0.1;
  uint64_t split_seed = 42;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags) {
  cmd->add_option("--data", flags.path, "ratings file (user/item/rating/timestamp)")
      ->required();
  cmd->add_option("--format", flags.format, "tsv or csv")
      ->check(CLI::IsMember({"tsv", "csv"}));
  cmd->add_option("--test-fraction", flags.test_fraction,
                  "held-out fraction of ratings");
  cmd->add_option("--split-seed", flags.split_seed, "seed for the holdout split");
}

RatingFileFormat parse_format(const std::string& s) {
  return s == "csv" ? RatingFileFormat::csv : RatingFileFormat::tsv;
}

std::vector<RawRating> load_and_audit(const DataFlags& flags) {
  auto ratings = parse_movielens(flags.path, parse_format(flags.format));
  const auto stats = dataset_stats(ratings);
  const std::string warning = audit_min_ratings(stats);
  if (!warning.empty()) {
    std::cerr << "warning: " << warning << "\n";
  }
  return ratings;
}

// Loads a cached explainability matrix when the file exists, otherwise
// builds one (and caches it when a path was given).
ExplainabilityMatrix resolve_explainability(const RatingMatrix& train,
                                            int neighborhood_size, double theta,
                                            const std::string& cache_path) {
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
    return load_explainability_csv(cache_path, train);
  }
  ExplainabilityMatrix e =
      build_explainability_matrix(train, neighborhood_size, theta);
  if (!cache_path.empty()) {
    save_explainability_csv(e, train, cache_path);
  }
  return e;
}

int run_prepare(const DataFlags& data, int neighborhood_size, double theta,
                const std::string& out_dir) {
  const auto ratings = load_and_audit(data);
  const auto stats = dataset_stats(ratings);
  std::cout << "users: " << stats.num_users << ", items: " << stats.num_items
            << ", ratings: " << stats.num_ratings
            << ", min ratings/user: " << stats.min_ratings_per_user << "\n";

  const DataSplit split =
      split_ratings(ratings, data.test_fraction, data.split_seed);
  std::filesystem::create_directories(out_dir);
  const auto manifest =
      (std::filesystem::path(out_dir) / "split_manifest.csv").string();
  write_split_manifest(ratings, split, manifest);
  std::cout << "split: " << split.train.num_entries() << " train / "
            << split.test.size() << " test -> " << manifest << "\n";

  const auto cache =
      (std::filesystem::path(out_dir) / "explainability.csv").string();
  const ExplainabilityMatrix e =
      build_explainability_matrix(split.train, neighborhood_size, theta);
  save_explainability_csv(e, split.train, cache);
  std::cout << "explainability matrix: " << e.num_nonzero()
            << " nonzero entries (neighborhood " << neighborhood_size
            << ", theta " << theta << ") -> " << cache << "\n";
  return 0;
}

int run_train(const DataFlags& data, TrainConfig config,
              const std::string& e_cache, const std::string& checkpoint_path,
              const std::string& history_path) {
  const auto ratings = load_and_audit(data);
  const DataSplit split =
      split_ratings(ratings, data.test_fraction, data.split_seed);

  ExplainabilityMatrix explain;
  const ExplainabilityMatrix* explain_ptr = nullptr;
  if (config.variant == ModelVariant::explainable) {
    explain = resolve_explainability(split.train, config.neighborhood_size,
                                     config.theta, e_cache);
    explain_ptr = &explain;
  }

  std::ofstream history;
  if (!history_path.empty()) {
    history.open(history_path, std::ios::binary);
    if (!history) {
      throw std::runtime_error("cannot open history file: " + history_path);
    }
    history << "epoch,train_loss,test_rmse,test_rmse_norm\n";
  }
  std::cout << "epoch,train_loss,test_rmse\n";
  const ProgressSink sink = [&](const EpochRow& row) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g", row.epoch,
                  row.train_loss, row.test_rmse);
    std::cout << buf << "\n";
    if (history.is_open()) {
      std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g", row.epoch,
                    row.train_loss, row.test_rmse, row.test_rmse_norm);
      history << buf << "\n";
    }
  };

  const TrainResult result = train(split, explain_ptr, config, sink);
  if (!checkpoint_path.empty()) {
    save_checkpoint(result.params, config, config.epochs, checkpoint_path);
    std::cout << "checkpoint -> " << checkpoint_path << "\n";
  }
  return 0;
}

int run_evaluate(const DataFlags& data, const std::string& checkpoint_path,
                 int n_top, int relevance_threshold,
                 const std::string& e_cache) {
  const auto ratings = load_and_audit(data);
  const DataSplit split =
      split_ratings(ratings, data.test_fraction, data.split_seed);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);

  const ExplainabilityMatrix explain = resolve_explainability(
      split.train, ckpt.config.neighborhood_size, ckpt.config.theta, e_cache);
  const ExplainabilityMatrix* input =
      ckpt.params.variant == ModelVariant::explainable ? &explain : nullptr;

  const EvalReport report = evaluate_model(ckpt.params, split, input, explain,
                                           n_top, relevance_threshold);
  std::cout << "variant,hidden_units,neighborhood_size,theta,n_top,rmse,"
               "rmse_norm,map,mep\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.10g,%d,%.10g,%.10g,%.10g,%.10g",
                to_string(report.variant), report.hidden_units,
                report.neighborhood_size, report.theta, report.n_top,
                report.rmse, report.rmse_norm, report.map, report.mep);
  std::cout << buf << "\n";
  return 0;
}

int run_explain(const DataFlags& data, const std::string& checkpoint_path,
                int user_id, int item_id, const std::string& e_cache) {
  const auto ratings = load_and_audit(data);
  const DataSplit split =
      split_ratings(ratings, data.test_fraction, data.split_seed);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const ExplainabilityMatrix explain = resolve_explainability(
      split.train, ckpt.config.neighborhood_size, ckpt.config.theta, e_cache);

  const ExplanationRecord record = explain_recommendation(
      ckpt.params, split.train, explain, user_id, item_id);
  std::cout << format_explanation(record);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"explainable autoencoder recommender toolkit"};
  app.require_subcommand(1);

  // prepare
  DataFlags prepare_data;
  int prepare_neighborhood = 50;
  double prepare_theta = 0.0;
  std::string prepare_out = ".";
  auto* prepare = app.add_subcommand(
      "prepare", "parse, split, and cache the explainability matrix");
  add_data_flags(prepare, prepare_data);
  prepare->add_option("--neighborhood-size", prepare_neighborhood,
                      "neighbors per user");
  prepare->add_option("--theta", prepare_theta, "explainability threshold");
  prepare->add_option("--out-dir", prepare_out, "output directory");

  // train
  DataFlags train_data;
  TrainConfig train_config;
  std::string train_variant = "baseline";
  std::string train_combine = "concatenate";
  std::string train_e_cache, train_checkpoint, train_history;
  auto* train_cmd =
      app.add_subcommand("train", "train one model variant");
  add_data_flags(train_cmd, train_data);
  train_cmd->add_option("--variant", train_variant, "baseline or explainable")
      ->check(CLI::IsMember({"baseline", "explainable"}));
  train_cmd->add_option("--hidden-units", train_config.hidden_units);
  train_cmd->add_option("--lambda", train_config.lambda);
  train_cmd->add_option("--learning-rate", train_config.learning_rate);
  train_cmd->add_option("--epochs", train_config.epochs);
  train_cmd->add_option("--batch-size", train_config.batch_size);
  train_cmd->add_option("--seed", train_config.seed, "model init/shuffle seed");
  train_cmd->add_option("--theta", train_config.theta);
  train_cmd->add_option("--neighborhood-size", train_config.neighborhood_size);
  train_cmd
      ->add_option("--input-combine", train_combine,
                   "concatenate or add (experimental)")
      ->check(CLI::IsMember({"concatenate", "add"}));
  train_cmd->add_option("--e-cache", train_e_cache,
                        "explainability matrix cache file (loaded when present)");
  train_cmd->add_option("--checkpoint", train_checkpoint, "checkpoint output");
  train_cmd->add_option("--history", train_history, "per-epoch CSV output");

  // evaluate
  DataFlags eval_data;
  std::string eval_checkpoint, eval_e_cache;
  int eval_n_top = 10;
  int eval_relevance = 4;
  auto* eval_cmd =
      app.add_subcommand("evaluate", "held-out metrics for a checkpoint");
  add_data_flags(eval_cmd, eval_data);
  eval_cmd->add_option("--checkpoint", eval_checkpoint)->required();
  eval_cmd->add_option("--n-top", eval_n_top, "recommendation list size");
  eval_cmd->add_option("--relevance-threshold", eval_relevance,
                       "raw rating counted as relevant");
  eval_cmd->add_option("--e-cache", eval_e_cache);

  // sweep
  std::string sweep_spec_file, sweep_data, sweep_format, sweep_out_dir,
      sweep_variant, sweep_axis, sweep_values;
  uint64_t sweep_seed = 0;
  bool sweep_seed_set = false, sweep_format_set = false;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "run one parameter sweep and emit its CSV report");
  sweep_cmd->add_option("--spec", sweep_spec_file, "experiment file (key = value)");
  sweep_cmd->add_option("--data", sweep_data, "ratings file (overrides spec)");
  sweep_cmd->add_option("--format", sweep_format)
      ->check(CLI::IsMember({"tsv", "csv"}))
      ->each([&](const std::string&) { sweep_format_set = true; });
  sweep_cmd->add_option("--out-dir", sweep_out_dir, "output directory");
  sweep_cmd->add_option("--seed", sweep_seed, "base model seed")
      ->each([&](const std::string&) { sweep_seed_set = true; });
  sweep_cmd->add_option("--variant", sweep_variant,
                        "baseline, explainable, or both");
  sweep_cmd->add_option("--sweep", sweep_axis,
                        "epochs, n_top, hidden_units, neighborhood_size, theta");
  sweep_cmd->add_option("--values", sweep_values, "comma-separated axis values");

  // explain
  DataFlags explain_data;
  std::string explain_checkpoint, explain_e_cache;
  int explain_user = 0, explain_item = 0;
  auto* explain_cmd = app.add_subcommand(
      "explain", "neighborhood justification for one (user, item) pair");
  add_data_flags(explain_cmd, explain_data);
  explain_cmd->add_option("--checkpoint", explain_checkpoint)->required();
  explain_cmd->add_option("--user", explain_user, "external user id")->required();
  explain_cmd->add_option("--item", explain_item, "external item id")->required();
  explain_cmd->add_option("--e-cache", explain_e_cache);

  // synth
  SynthConfig synth_config;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand(
      "synth", "write a deterministic synthetic benchmark-shaped corpus");
  synth_cmd->add_option("--out", synth_out, "output ratings file")->required();
  synth_cmd->add_option("--users", synth_config.num_users);
  synth_cmd->add_option("--items", synth_config.num_items);
  synth_cmd->add_option("--ratings", synth_config.num_ratings);
  synth_cmd->add_option("--clusters", synth_config.num_clusters);
  synth_cmd->add_option("--seed", synth_config.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) {
      return run_prepare(prepare_data, prepare_neighborhood, prepare_theta,
                         prepare_out);
    }
    if (train_cmd->parsed()) {
      train_config.variant = variant_from_string(train_variant);
      train_config.combine = train_combine == "add" ? InputCombine::add
                                                    : InputCombine::concatenate;
      return run_train(train_data, train_config, train_e_cache,
                       train_checkpoint, train_history);
    }
    if (eval_cmd->parsed()) {
      return run_evaluate(eval_data, eval_checkpoint, eval_n_top,
                          eval_relevance, eval_e_cache);
    }
    if (sweep_cmd->parsed()) {
      ExperimentSpec spec;
      if (!sweep_spec_file.empty()) {
        spec = load_experiment_file(sweep_spec_file);
      }
      if (!sweep_data.empty()) spec.data_path = sweep_data;
      if (sweep_format_set) {
        spec.format = parse_format(sweep_format);
      }
      if (!sweep_out_dir.empty()) spec.out_dir = sweep_out_dir;
      if (sweep_seed_set) spec.base.seed = sweep_seed;
      if (!sweep_variant.empty()) {
        spec.variants.clear();
        if (sweep_variant == "both") {
          spec.variants = {ModelVariant::baseline, ModelVariant::explainable};
        } else {
          spec.variants.push_back(variant_from_string(sweep_variant));
        }
      }
      if (!sweep_axis.empty()) spec.axis = axis_from_string(sweep_axis);
      if (!sweep_values.empty()) {
        spec.axis_values.clear();
        std::stringstream ss(sweep_values);
        std::string part;
        while (std::getline(ss, part, ',')) {
          if (!part.empty()) spec.axis_values.push_back(std::stod(part));
        }
      }
      if (spec.data_path.empty()) {
        throw std::runtime_error("sweep needs --data or a spec file with data=");
      }
      ExperimentDriver driver(spec);
      const std::string path = driver.run_and_write();
      std::cout << path << "\n";
      return 0;
    }
    if (explain_cmd->parsed()) {
      return run_explain(explain_data, explain_checkpoint, explain_user,
                         explain_item, explain_e_cache);
    }
    if (synth_cmd->parsed()) {
      const auto ratings = synthetic_ratings(synth_config);
      write_ratings_file(ratings, synth_out);
      const auto stats = dataset_stats(ratings);
      std::cout << "wrote " << stats.num_ratings << " ratings ("
                << stats.num_users << " users, " << stats.num_items
                << " items) -> " << synth_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
