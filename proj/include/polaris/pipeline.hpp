#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polaris/corpus.hpp"
#include "polaris/dynamics.hpp"
#include "polaris/network.hpp"
#include "polaris/polarity.hpp"
#include "polaris/predict.hpp"

namespace polaris {

// Everything a full run needs; persisted as run.json in the output directory
// (the directory itself is implicit) so results are reproducible.
struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path periods;
  std::vector<std::filesystem::path> gold_labels;
  std::vector<std::filesystem::path> predicted_labels;
  std::optional<std::filesystem::path> external_features;
  std::filesystem::path out_dir;

  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = all cores
  bool eq1_verbatim = false;
  bool include_posts = false;
  bool store_bodies = false;

  std::int64_t density_bucket_seconds = 86400;
  int polarity_bins = 40;
  int activity_bins = 20;
  int degree_bins = 20;
  double prolific_percentile = 0.99;

  double test_fraction = 0.2;
  ForestConfig forest{.n_trees = 50, .max_depth = 10, .min_leaf = 10,
                      .feature_fraction = 1.0 / 3.0, .seed = 1};
  int importance_repetitions = 5;
};

// ingest -> assign -> labels -> polarity -> network -> dynamics -> features
// -> predict, writing every intermediate artefact under out_dir. Any stage
// failure surfaces as a DataError prefixed with the stage name.
void run_pipeline(const RunConfig& config);

// Artefact writers shared between the pipeline and standalone subcommands.
void write_run_config(const RunConfig& config, const std::filesystem::path& path);
void write_density_csv(std::span<const DensityRow> rows, const std::filesystem::path& path);
void write_period_counts_csv(const Corpus& corpus, const std::filesystem::path& path);
void write_polarity_csv(std::span<const UserPeriodStats> stats, const std::filesystem::path& path);
void write_polarity_distribution(const PolarityDistribution& dist,
                                 const std::filesystem::path& dir, const std::string& prefix);
void write_edges_csv(std::span<const InteractionGraph> graphs, const std::filesystem::path& path);
void write_network_metrics_csv(std::span<const InteractionGraph> graphs,
                               std::span<const UserPeriodStats> stats,
                               const std::filesystem::path& path);
void write_triads_csv(std::span<const InteractionGraph> graphs,
                      std::span<const UserPeriodStats> stats, const std::filesystem::path& path);
void write_patterns_csv(const PatternTable& table, const std::filesystem::path& path);
void write_retention_csv(std::span<const RetentionCell> cells, const std::filesystem::path& path);
void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path);

}  // namespace polaris
