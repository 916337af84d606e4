#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polaris/corpus.hpp"
#include "polaris/stance_label.hpp"

namespace polaris {

// `SignCorrected` scores P/(P+N) - A/(N+A). `Verbatim` keeps the uncorrected
// textbook bracket, P/(P+N) - N/(N+A); it sends all-neutral users to -1 and
// exists only so the two forms can be compared (--eq1-verbatim).
enum class PolarityVariant : std::uint8_t { SignCorrected = 0, Verbatim = 1 };

struct PolarityOptions {
  PolarityVariant variant = PolarityVariant::SignCorrected;
  // When set, posts count like comments (activity and stance counts);
  // default counts comments only.
  bool include_posts = false;
};

// Continuous polarity in [-1, 1] from per-user stance counts. A term whose
// denominator is zero contributes 0, which anchors pure-pro at +1, pure-anti
// at -1 and all-neutral at 0.
double user_polarity(std::uint64_t pro, std::uint64_t neutral, std::uint64_t anti,
                     PolarityVariant variant = PolarityVariant::SignCorrected);

struct UserPeriodStats {
  std::string user_id;
  int period_index = 0;
  std::uint32_t pro = 0;      // P
  std::uint32_t neutral = 0;  // N
  std::uint32_t anti = 0;     // A
  std::uint32_t activity = 0;
  double polarity = 0.0;
  bool no_labelled_content = false;  // P = N = A = 0
};

// One record per (user, period) with at least one counted submission;
// deleted authors and out-of-period submissions are skipped. Sorted by
// (user_id, period_index).
std::vector<UserPeriodStats> compute_all(const Corpus& corpus, const PolarityOptions& options = {});

// Argmax of (P, N, A); any tie resolves to Neutral.
Stance majority_vote_stance(const UserPeriodStats& stats);

struct PolarityDistribution {
  struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t count = 0;
    double fraction = 0.0;
  };
  std::vector<Bin> pdf;      // over [-1, 1]
  double zero_mass = 0.0;    // fraction with polarity exactly 0
  std::uint64_t n = 0;
  // CDFs of |polarity| restricted to the positive / negative sides;
  // (value, cumulative fraction) rows.
  std::vector<std::pair<double, double>> cdf_pro;
  std::vector<std::pair<double, double>> cdf_anti;
};

PolarityDistribution polarity_distribution(std::span<const UserPeriodStats> stats, int bins);

}  // namespace polaris
