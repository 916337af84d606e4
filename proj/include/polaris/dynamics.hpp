#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "polaris/corpus.hpp"
#include "polaris/features.hpp"
#include "polaris/network.hpp"
#include "polaris/polarity.hpp"
#include "polaris/stats_math.hpp"

namespace polaris {

// (user, period) -> authored at least one submission in that period.
struct PresenceMatrix {
  std::vector<std::string> users;  // sorted
  std::unordered_map<std::string, std::uint32_t> index;
  std::size_t n_periods = 0;
  std::vector<std::vector<bool>> present;  // [user][period]

  bool is_present(const std::string& user, int period) const {
    auto it = index.find(user);
    if (it == index.end() || period < 0 || static_cast<std::size_t>(period) >= n_periods)
      return false;
    return present[it->second][period];
  }
};

PresenceMatrix build_presence(const Corpus& corpus);

// Presence vector trimmed to [first active, last active], e.g. "1", "11", "101".
std::string trimmed_pattern(const std::vector<bool>& row);

struct PatternCount {
  std::string pattern;
  std::uint64_t count = 0;
};

struct PatternTable {
  std::vector<PatternCount> rows;  // sorted by count desc, pattern asc
  std::uint64_t n_users = 0;
  double single_period_fraction = 0.0;
};

PatternTable presence_patterns(const PresenceMatrix& matrix);

struct RetentionCell {
  int activity_bin = 0;
  int degree_bin = 0;
  std::uint64_t n_users = 0;
  std::uint64_t n_retained = 0;
  std::optional<double> fraction;  // absent when the bin is empty
};

// For every (user, period p) with p < last: outcome = present in p+1.
// Activity and degree are midrank-percentiled within period p and bucketed
// into equal-width percentile bins; the full grid is emitted.
std::vector<RetentionCell> retention_next_period(const PresenceMatrix& matrix,
                                                 std::span<const UserPeriodStats> stats,
                                                 std::span<const InteractionGraph> graphs,
                                                 int activity_bins = 20, int degree_bins = 20);

struct ProlificSets {
  struct PeriodSummary {
    std::uint64_t n_by_activity = 0;
    std::uint64_t n_by_degree = 0;
    std::uint64_t n_both = 0;
    std::optional<double> overlap_fraction;  // |both| / |union|
  };
  std::vector<std::set<std::string>> by_period;
  std::vector<PeriodSummary> summaries;
  std::optional<double> pooled_overlap_fraction;
};

// Users at or above the given percentile (fraction, default 0.99) of degree
// or activity within a period. The cutoff is inclusive: with everyone tied,
// everyone qualifies.
ProlificSets prolific_users(std::span<const UserPeriodStats> stats,
                            std::span<const InteractionGraph> graphs, double percentile = 0.99);

struct ContingencyResult {
  // rows: interacted with a prolific peer yes/no; cols: present next period yes/no
  std::array<std::array<std::uint64_t, 2>, 2> table{};
  double retention_interacted = 0.0;
  double retention_not_interacted = 0.0;
  double chi2 = 0.0;
  double p_value = 1.0;
  bool low_expected_warning = false;
  std::uint64_t n = 0;
};

ContingencyResult prolific_retention_effect(const PresenceMatrix& matrix,
                                            std::span<const InteractionGraph> graphs,
                                            const ProlificSets& prolific);

// Feature rows joined to the next-period presence label; final-period rows
// are excluded (there is no next period to observe).
std::vector<std::pair<FeatureVector, bool>> presence_classifier_dataset(
    const PresenceMatrix& matrix, const FeatureTable& features);

}  // namespace polaris
