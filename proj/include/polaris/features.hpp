#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polaris/corpus.hpp"
#include "polaris/network.hpp"
#include "polaris/polarity.hpp"

namespace polaris {

// Stance saturation of one discussion (a root post and its comment tree)
// within one period: the share of its labelled, in-period submissions
// carrying each stance. Undefined (and omitted) when nothing is labelled.
struct ThreadSaturation {
  SubmissionIndex root = kNoSubmission;
  std::string thread_key;  // root id, or the raw thread id when the root post is absent
  int period_index = kNoPeriod;
  std::uint32_t labelled = 0;
  double pro = 0.0;      // B saturation
  double anti = 0.0;     // A saturation
  double neutral = 0.0;  // N saturation
};

std::vector<ThreadSaturation> thread_saturations(const Corpus& corpus);

inline constexpr std::array<int, 5> kSaturationPercentiles = {0, 25, 50, 75, 100};

// Feature schema: activity, degree, current_polarity,
// mean_interaction_polarity, mean_edge_homogeneity, then pS-y% for
// s in {B, A, N} and y in {0, 25, 50, 75, 100}.
std::vector<std::string> base_feature_names();
inline constexpr std::size_t kSaturationFeatureOffset = 5;
inline constexpr std::size_t kNumSaturationFeatures = 15;

// The 15 pS-y% values from one user's per-discussion saturations (pro, anti,
// neutral triples, one per distinct discussion). Percentiles interpolate
// linearly between closest ranks.
std::array<double, kNumSaturationFeatures> saturation_percentile_features(
    std::span<const std::array<double, 3>> discussion_saturations);

struct FeatureVector {
  std::string user_id;
  int period_index = kNoPeriod;
  std::vector<double> values;         // aligned with FeatureTable::names
  std::vector<std::uint8_t> present;  // missing-value mask
};

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<FeatureVector> rows;  // sorted by (user_id, period_index)

  std::optional<std::size_t> feature_index(const std::string& name) const;
};

// Numeric side table keyed by (user_id, period); joined columns keep their
// header names. Empty cells stay missing.
struct ExternalFeatureTable {
  std::vector<std::string> names;
  std::map<std::pair<std::string, int>, std::vector<std::optional<double>>> rows;
};

ExternalFeatureTable load_external_features(const std::filesystem::path& path);

// One row per (user, period) in stats. Saturation features are absent when
// the user joined no saturation-defined discussion that period; network
// means are absent for isolated users.
FeatureTable extract_features(const Corpus& corpus, std::span<const UserPeriodStats> stats,
                              std::span<const InteractionGraph> graphs,
                              const ExternalFeatureTable* external = nullptr);

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_csv(const std::filesystem::path& path);

}  // namespace polaris
