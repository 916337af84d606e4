#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polaris/dynamics.hpp"
#include "polaris/features.hpp"
#include "polaris/polarity.hpp"

namespace polaris {

enum class PredictionTask : std::uint8_t { Presence = 0, FuturePolarity = 1 };

std::string_view task_name(PredictionTask task);

struct DatasetRow {
  std::string user_id;
  int period_index = kNoPeriod;
  std::vector<double> x;
  std::vector<std::uint8_t> present;
  double target = 0.0;  // class 0/1 for presence, next-period polarity otherwise
};

struct Dataset {
  PredictionTask task = PredictionTask::Presence;
  std::vector<std::string> feature_names;
  std::vector<DatasetRow> rows;
  std::vector<std::uint8_t> split;  // 0 train, 1 test; empty before split_by_user

  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> test_indices() const;
};

// Presence: all feature rows before the final period, labelled with
// next-period presence. Future polarity: only rows whose user has a stats
// record in the next period (the target must exist), labelled with that
// polarity.
Dataset build_dataset(const FeatureTable& features, std::span<const UserPeriodStats> stats,
                      const PresenceMatrix& matrix, PredictionTask task);

// Grouped holdout: every row of a user lands in the same split.
void split_by_user(Dataset& dataset, double test_fraction, std::uint64_t seed);

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  double feature_fraction = 1.0 / 3.0;
  std::uint64_t seed = 1;
};

// Axis-aligned split; feature < 0 marks a leaf. Rows with the split feature
// missing follow the majority direction learned from the training rows.
struct SplitNode {
  int feature = -1;
  double threshold = 0.0;
  bool missing_left = true;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<SplitNode> nodes;
  double predict(std::span<const double> x, std::span<const std::uint8_t> present) const;
};

// Bagged ensemble: variance-reduction splits for regression, Gini for
// classification; mean / majority-vote aggregation. Deterministic given the
// seed: split ties resolve to the lowest feature index, then the lowest
// threshold.
struct TreeEnsemble {
  PredictionTask task = PredictionTask::Presence;
  ForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
  bool degenerate_constant_target = false;

  double predict_row(std::span<const double> x, std::span<const std::uint8_t> present) const;
};

TreeEnsemble train_forest(const Dataset& dataset, const ForestConfig& config,
                          unsigned threads = 1);

struct Metrics {
  std::optional<double> rmse;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
};

// Metrics over the dataset's test split (or the whole set when unsplit).
Metrics evaluate(const TreeEnsemble& model, const Dataset& dataset);
Metrics evaluate_on(const TreeEnsemble& model, const Dataset& dataset,
                    std::span<const std::size_t> indices);

struct BaselineReport {
  std::vector<std::pair<std::string, Metrics>> baselines;
};

// Regression: (a) predict the training-target mean, (b) predict a draw from
// the empirical training-target distribution. Classification: (a) majority
// class, (b) uniform random class.
BaselineReport random_baselines(const Dataset& dataset, std::uint64_t seed);

struct FeatureImportance {
  std::string feature;
  double mean_degradation = 0.0;
  double stddev = 0.0;
};

struct ImportanceReport {
  std::string metric;  // "rmse" or "accuracy"
  int repetitions = 0;
  std::vector<FeatureImportance> rows;  // sorted by mean degradation, descending
};

// Mean metric degradation over R reshuffles of each feature column on the
// test split.
ImportanceReport permutation_importance(const TreeEnsemble& model, const Dataset& dataset,
                                        int repetitions, std::uint64_t seed);

void save_model_json(const TreeEnsemble& model, const std::filesystem::path& path);
TreeEnsemble load_model_json(const std::filesystem::path& path);

}  // namespace polaris
