#include "polaris/dynamics.hpp"

#include <algorithm>
#include <map>

#include "polaris/errors.hpp"

namespace polaris {

PresenceMatrix build_presence(const Corpus& corpus) {
  PresenceMatrix m;
  m.n_periods = corpus.periods.size();
  std::set<std::string> users;
  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    if (corpus.period_of[i] == kNoPeriod) continue;
    const Submission& s = corpus.submissions[i];
    if (is_deleted_author(s.author_id)) continue;
    users.insert(s.author_id);
  }
  m.users.assign(users.begin(), users.end());
  m.index.reserve(m.users.size() * 2);
  for (std::uint32_t i = 0; i < m.users.size(); ++i) m.index.emplace(m.users[i], i);
  m.present.assign(m.users.size(), std::vector<bool>(m.n_periods, false));
  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    const std::int32_t p = corpus.period_of[i];
    if (p == kNoPeriod) continue;
    const Submission& s = corpus.submissions[i];
    if (is_deleted_author(s.author_id)) continue;
    m.present[m.index.at(s.author_id)][p] = true;
  }
  return m;
}

std::string trimmed_pattern(const std::vector<bool>& row) {
  int first = -1, last = -1;
  for (std::size_t p = 0; p < row.size(); ++p) {
    if (row[p]) {
      if (first < 0) first = static_cast<int>(p);
      last = static_cast<int>(p);
    }
  }
  if (first < 0) return "";
  std::string pattern;
  pattern.reserve(last - first + 1);
  for (int p = first; p <= last; ++p) pattern.push_back(row[p] ? '1' : '0');
  return pattern;
}

PatternTable presence_patterns(const PresenceMatrix& matrix) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& row : matrix.present) {
    std::string pattern = trimmed_pattern(row);
    if (pattern.empty()) continue;
    ++counts[pattern];
  }
  PatternTable table;
  for (const auto& [pattern, count] : counts) {
    table.rows.push_back({pattern, count});
    table.n_users += count;
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const PatternCount& a, const PatternCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.pattern < b.pattern;
  });
  if (table.n_users > 0) {
    auto it = counts.find("1");
    const std::uint64_t singles = it == counts.end() ? 0 : it->second;
    table.single_period_fraction =
        static_cast<double>(singles) / static_cast<double>(table.n_users);
  }
  return table;
}

namespace {

struct PeriodUserMetrics {
  std::vector<std::string> users;  // present in the period, sorted
  std::vector<double> activity;
  std::vector<double> degree;
};

PeriodUserMetrics period_metrics(const PresenceMatrix& matrix,
                                 const std::map<std::pair<std::string, int>, double>& activity_of,
                                 std::span<const InteractionGraph> graphs, int p) {
  PeriodUserMetrics m;
  for (std::size_t u = 0; u < matrix.users.size(); ++u) {
    if (matrix.present[u][p]) m.users.push_back(matrix.users[u]);
  }
  const InteractionGraph* graph = nullptr;
  for (const auto& g : graphs) {
    if (g.period_index == p) {
      graph = &g;
      break;
    }
  }
  m.activity.reserve(m.users.size());
  m.degree.reserve(m.users.size());
  for (const auto& user : m.users) {
    auto it = activity_of.find({user, p});
    m.activity.push_back(it == activity_of.end() ? 0.0 : it->second);
    double deg = 0.0;
    if (graph) {
      if (auto node = graph->node_of(user)) deg = static_cast<double>(graph->degree(*node));
    }
    m.degree.push_back(deg);
  }
  return m;
}

int bin_of(double pct, int bins) {
  int b = static_cast<int>(pct / (100.0 / bins));
  return std::clamp(b, 0, bins - 1);
}

}  // namespace

std::vector<RetentionCell> retention_next_period(const PresenceMatrix& matrix,
                                                 std::span<const UserPeriodStats> stats,
                                                 std::span<const InteractionGraph> graphs,
                                                 int activity_bins, int degree_bins) {
  if (activity_bins <= 0 || degree_bins <= 0) {
    throw DataError("retention_next_period: bin counts must be positive");
  }
  std::vector<RetentionCell> cells(static_cast<std::size_t>(activity_bins) * degree_bins);
  for (int a = 0; a < activity_bins; ++a) {
    for (int d = 0; d < degree_bins; ++d) {
      cells[a * degree_bins + d].activity_bin = a;
      cells[a * degree_bins + d].degree_bin = d;
    }
  }
  if (matrix.n_periods < 2) {
    return {};  // no next period exists anywhere
  }

  std::map<std::pair<std::string, int>, double> activity_of;
  for (const auto& st : stats) activity_of[{st.user_id, st.period_index}] = st.activity;

  for (int p = 0; p + 1 < static_cast<int>(matrix.n_periods); ++p) {
    PeriodUserMetrics m = period_metrics(matrix, activity_of, graphs, p);
    if (m.users.empty()) continue;
    const auto act_pct = midrank_percentiles(m.activity);
    const auto deg_pct = midrank_percentiles(m.degree);
    for (std::size_t i = 0; i < m.users.size(); ++i) {
      RetentionCell& cell =
          cells[bin_of(act_pct[i], activity_bins) * degree_bins + bin_of(deg_pct[i], degree_bins)];
      ++cell.n_users;
      if (matrix.is_present(m.users[i], p + 1)) ++cell.n_retained;
    }
  }
  for (auto& cell : cells) {
    if (cell.n_users > 0) {
      cell.fraction = static_cast<double>(cell.n_retained) / static_cast<double>(cell.n_users);
    }
  }
  return cells;
}

ProlificSets prolific_users(std::span<const UserPeriodStats> stats,
                            std::span<const InteractionGraph> graphs, double percentile) {
  ProlificSets out;
  out.by_period.resize(graphs.size());
  out.summaries.resize(graphs.size());
  const double cutoff = percentile * 100.0;

  std::map<std::pair<std::string, int>, double> activity_of;
  for (const auto& st : stats) activity_of[{st.user_id, st.period_index}] = st.activity;

  std::uint64_t pooled_both = 0, pooled_union = 0;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const InteractionGraph& graph = graphs[g];
    const std::size_t n = graph.users.size();
    if (n == 0) continue;
    std::vector<double> activity(n, 0.0), degree(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      auto it = activity_of.find({graph.users[u], graph.period_index});
      if (it != activity_of.end()) activity[u] = it->second;
      degree[u] = static_cast<double>(graph.degree(static_cast<std::uint32_t>(u)));
    }
    const auto act_pct = cumulative_percentiles(activity);
    const auto deg_pct = cumulative_percentiles(degree);
    auto& summary = out.summaries[g];
    for (std::size_t u = 0; u < n; ++u) {
      const bool by_act = act_pct[u] >= cutoff;
      const bool by_deg = deg_pct[u] >= cutoff;
      if (!by_act && !by_deg) continue;
      out.by_period[g].insert(graph.users[u]);
      if (by_act) ++summary.n_by_activity;
      if (by_deg) ++summary.n_by_degree;
      if (by_act && by_deg) ++summary.n_both;
    }
    const std::uint64_t unioned = out.by_period[g].size();
    if (unioned > 0) {
      summary.overlap_fraction =
          static_cast<double>(summary.n_both) / static_cast<double>(unioned);
    }
    pooled_both += summary.n_both;
    pooled_union += unioned;
  }
  if (pooled_union > 0) {
    out.pooled_overlap_fraction =
        static_cast<double>(pooled_both) / static_cast<double>(pooled_union);
  }
  return out;
}

ContingencyResult prolific_retention_effect(const PresenceMatrix& matrix,
                                            std::span<const InteractionGraph> graphs,
                                            const ProlificSets& prolific) {
  if (matrix.n_periods < 2) throw DataError("prolific_retention_effect: need at least 2 periods");
  ContingencyResult r;
  for (int p = 0; p + 1 < static_cast<int>(matrix.n_periods); ++p) {
    const InteractionGraph* graph = nullptr;
    for (const auto& g : graphs) {
      if (g.period_index == p) {
        graph = &g;
        break;
      }
    }
    const std::set<std::string>* prolific_set =
        static_cast<std::size_t>(p) < prolific.by_period.size() ? &prolific.by_period[p] : nullptr;
    for (std::size_t u = 0; u < matrix.users.size(); ++u) {
      if (!matrix.present[u][p]) continue;
      const std::string& user = matrix.users[u];
      bool exposed = false;
      if (graph && prolific_set && !prolific_set->empty()) {
        if (auto node = graph->node_of(user)) {
          for (std::uint32_t w : graph->adjacency[*node]) {
            if (prolific_set->count(graph->users[w])) {
              exposed = true;
              break;
            }
          }
        }
      }
      const bool returned = matrix.present[u][p + 1];
      ++r.table[exposed ? 0 : 1][returned ? 0 : 1];
    }
  }
  const auto row_sum = [&r](int i) { return r.table[i][0] + r.table[i][1]; };
  r.n = row_sum(0) + row_sum(1);
  if (row_sum(0) > 0) {
    r.retention_interacted = static_cast<double>(r.table[0][0]) / static_cast<double>(row_sum(0));
  }
  if (row_sum(1) > 0) {
    r.retention_not_interacted =
        static_cast<double>(r.table[1][0]) / static_cast<double>(row_sum(1));
  }
  const std::uint64_t col0 = r.table[0][0] + r.table[1][0];
  const std::uint64_t col1 = r.table[0][1] + r.table[1][1];
  if (row_sum(0) == 0 || row_sum(1) == 0 || col0 == 0 || col1 == 0) {
    // Degenerate pooled table (e.g. nobody exposed): no test possible.
    r.chi2 = 0.0;
    r.p_value = 1.0;
    r.low_expected_warning = true;
    return r;
  }
  const ChiSquare2x2 chi = chi_square_independence_2x2(r.table);
  r.chi2 = chi.chi2;
  r.p_value = chi.p_value;
  r.low_expected_warning = chi.low_expected_warning;
  return r;
}

std::vector<std::pair<FeatureVector, bool>> presence_classifier_dataset(
    const PresenceMatrix& matrix, const FeatureTable& features) {
  std::vector<std::pair<FeatureVector, bool>> out;
  const int last_period = static_cast<int>(matrix.n_periods) - 1;
  for (const auto& row : features.rows) {
    if (row.period_index >= last_period) continue;
    out.emplace_back(row, matrix.is_present(row.user_id, row.period_index + 1));
  }
  return out;
}

}  // namespace polaris
