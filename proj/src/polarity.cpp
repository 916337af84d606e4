#include "polaris/polarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "polaris/errors.hpp"

namespace polaris {

double user_polarity(std::uint64_t pro, std::uint64_t neutral, std::uint64_t anti,
                     PolarityVariant variant) {
  const double p = static_cast<double>(pro);
  const double n = static_cast<double>(neutral);
  const double a = static_cast<double>(anti);
  const double first = (pro + neutral) == 0 ? 0.0 : p / (p + n);
  double second = 0.0;
  if (neutral + anti != 0) {
    second = variant == PolarityVariant::SignCorrected ? a / (n + a) : n / (n + a);
  }
  return first - second;
}

std::vector<UserPeriodStats> compute_all(const Corpus& corpus, const PolarityOptions& options) {
  std::map<std::pair<std::string, int>, UserPeriodStats> acc;
  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    const Submission& s = corpus.submissions[i];
    const std::int32_t period = corpus.period_of[i];
    if (period == kNoPeriod) continue;
    if (is_deleted_author(s.author_id)) continue;
    if (s.kind == SubmissionKind::Post && !options.include_posts) continue;

    UserPeriodStats& st = acc[{s.author_id, period}];
    st.user_id = s.author_id;
    st.period_index = period;
    ++st.activity;
    if (s.stance) {
      switch (*s.stance) {
        case Stance::Pro: ++st.pro; break;
        case Stance::Anti: ++st.anti; break;
        case Stance::Neutral: ++st.neutral; break;
      }
    }
  }
  std::vector<UserPeriodStats> out;
  out.reserve(acc.size());
  for (auto& [_, st] : acc) {
    st.no_labelled_content = (st.pro + st.neutral + st.anti) == 0;
    st.polarity = user_polarity(st.pro, st.neutral, st.anti, options.variant);
    out.push_back(std::move(st));
  }
  return out;
}

Stance majority_vote_stance(const UserPeriodStats& stats) {
  const std::uint32_t top = std::max({stats.pro, stats.neutral, stats.anti});
  int winners = 0;
  Stance winner = Stance::Neutral;
  if (stats.pro == top) { ++winners; winner = Stance::Pro; }
  if (stats.neutral == top) { ++winners; winner = Stance::Neutral; }
  if (stats.anti == top) { ++winners; winner = Stance::Anti; }
  return winners == 1 ? winner : Stance::Neutral;
}

PolarityDistribution polarity_distribution(std::span<const UserPeriodStats> stats, int bins) {
  if (bins <= 0) throw DataError("polarity_distribution: bins must be positive");
  PolarityDistribution dist;
  dist.n = stats.size();
  dist.pdf.resize(bins);
  const double width = 2.0 / bins;
  for (int b = 0; b < bins; ++b) {
    dist.pdf[b].lo = -1.0 + b * width;
    dist.pdf[b].hi = (b + 1 == bins) ? 1.0 : -1.0 + (b + 1) * width;
  }

  std::uint64_t zeros = 0;
  std::vector<double> pos, neg;
  for (const auto& s : stats) {
    int b = static_cast<int>((s.polarity + 1.0) / width);
    b = std::clamp(b, 0, bins - 1);
    ++dist.pdf[b].count;
    if (s.polarity == 0.0) ++zeros;
    else if (s.polarity > 0.0) pos.push_back(s.polarity);
    else neg.push_back(-s.polarity);
  }
  if (dist.n > 0) {
    dist.zero_mass = static_cast<double>(zeros) / static_cast<double>(dist.n);
    for (auto& bin : dist.pdf) {
      bin.fraction = static_cast<double>(bin.count) / static_cast<double>(dist.n);
    }
  }

  auto make_cdf = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> cdf;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      // collapse runs of equal values into one step
      if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
      cdf.emplace_back(v[i], static_cast<double>(i + 1) / n);
    }
    return cdf;
  };
  dist.cdf_pro = make_cdf(pos);
  dist.cdf_anti = make_cdf(neg);
  return dist;
}

}  // namespace polaris
