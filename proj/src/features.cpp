#include "polaris/features.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "polaris/csv.hpp"
#include "polaris/errors.hpp"
#include "polaris/stats_math.hpp"

namespace polaris {

namespace {

std::string thread_key_of(const Corpus& corpus, std::size_t i) {
  const SubmissionIndex root = corpus.thread_root[i];
  if (root != kNoSubmission) return corpus.submissions[root].id;
  return corpus.submissions[i].thread_id;
}

std::optional<double> parse_cell(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("not a number in feature CSV: '" + cell + "'");
  }
  return v;
}

}  // namespace

std::vector<ThreadSaturation> thread_saturations(const Corpus& corpus) {
  // (thread key, period) -> stance counts over labelled submissions
  std::map<std::pair<std::string, int>, std::array<std::uint32_t, 3>> counts;
  std::map<std::pair<std::string, int>, SubmissionIndex> roots;
  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    const std::int32_t period = corpus.period_of[i];
    if (period == kNoPeriod) continue;
    const Submission& s = corpus.submissions[i];
    if (!s.stance) continue;
    auto key = std::pair(thread_key_of(corpus, i), static_cast<int>(period));
    auto& c = counts[key];
    switch (*s.stance) {
      case Stance::Pro: ++c[0]; break;
      case Stance::Anti: ++c[1]; break;
      case Stance::Neutral: ++c[2]; break;
    }
    if (corpus.thread_root[i] != kNoSubmission) roots[key] = corpus.thread_root[i];
  }
  std::vector<ThreadSaturation> out;
  out.reserve(counts.size());
  for (const auto& [key, c] : counts) {
    ThreadSaturation t;
    t.thread_key = key.first;
    t.period_index = key.second;
    auto rit = roots.find(key);
    if (rit != roots.end()) t.root = rit->second;
    t.labelled = c[0] + c[1] + c[2];
    const double n = static_cast<double>(t.labelled);
    t.pro = c[0] / n;
    t.anti = c[1] / n;
    t.neutral = c[2] / n;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> base_feature_names() {
  std::vector<std::string> names = {"activity", "degree", "current_polarity",
                                    "mean_interaction_polarity", "mean_edge_homogeneity"};
  for (char s : {'B', 'A', 'N'}) {
    for (int y : kSaturationPercentiles) {
      names.push_back(std::string("p") + s + "-" + std::to_string(y) + "%");
    }
  }
  return names;
}

std::array<double, kNumSaturationFeatures> saturation_percentile_features(
    std::span<const std::array<double, 3>> discussion_saturations) {
  std::array<double, kNumSaturationFeatures> out{};
  std::vector<double> values(discussion_saturations.size());
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < discussion_saturations.size(); ++i) {
      values[i] = discussion_saturations[i][s];
    }
    std::sort(values.begin(), values.end());
    for (std::size_t k = 0; k < kSaturationPercentiles.size(); ++k) {
      out[s * kSaturationPercentiles.size() + k] =
          percentile_interpolated(values, kSaturationPercentiles[k]);
    }
  }
  return out;
}

std::optional<std::size_t> FeatureTable::feature_index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

FeatureTable extract_features(const Corpus& corpus, std::span<const UserPeriodStats> stats,
                              std::span<const InteractionGraph> graphs,
                              const ExternalFeatureTable* external) {
  FeatureTable table;
  table.names = base_feature_names();
  const std::size_t n_base = table.names.size();
  if (external) {
    for (const auto& name : external->names) table.names.push_back(name);
  }

  // (thread key, period) -> saturation triple, for the per-user pools
  std::map<std::pair<std::string, int>, std::array<double, 3>> saturation;
  for (const auto& t : thread_saturations(corpus)) {
    saturation[{t.thread_key, t.period_index}] = {t.pro, t.anti, t.neutral};
  }

  // distinct discussions each user commented in, per period
  std::map<std::pair<std::string, int>, std::set<std::string>> user_threads;
  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    const std::int32_t period = corpus.period_of[i];
    if (period == kNoPeriod) continue;
    const Submission& s = corpus.submissions[i];
    if (s.kind != SubmissionKind::Comment) continue;
    if (is_deleted_author(s.author_id)) continue;
    user_threads[{s.author_id, period}].insert(thread_key_of(corpus, i));
  }

  // per-period node views for the network means
  std::vector<std::vector<NodePolarityView>> views(graphs.size());
  std::vector<const InteractionGraph*> graph_of_period(corpus.periods.size(), nullptr);
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const int p = graphs[g].period_index;
    if (p >= 0 && static_cast<std::size_t>(p) < graph_of_period.size()) {
      graph_of_period[p] = &graphs[g];
    }
    views[g] = node_views(graphs[g], polarity_by_user(stats, graphs[g].period_index));
  }
  std::vector<const std::vector<NodePolarityView>*> views_of_period(corpus.periods.size(), nullptr);
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const int p = graphs[g].period_index;
    if (p >= 0 && static_cast<std::size_t>(p) < views_of_period.size()) {
      views_of_period[p] = &views[g];
    }
  }

  table.rows.reserve(stats.size());
  for (const auto& st : stats) {
    FeatureVector row;
    row.user_id = st.user_id;
    row.period_index = st.period_index;
    row.values.assign(table.names.size(), 0.0);
    row.present.assign(table.names.size(), 0);

    auto set = [&row](std::size_t i, double v) {
      row.values[i] = v;
      row.present[i] = 1;
    };
    set(0, st.activity);
    set(2, st.polarity);

    double degree = 0.0;
    const InteractionGraph* graph =
        st.period_index >= 0 && static_cast<std::size_t>(st.period_index) < graph_of_period.size()
            ? graph_of_period[st.period_index]
            : nullptr;
    if (graph) {
      if (auto node = graph->node_of(st.user_id)) {
        degree = static_cast<double>(graph->degree(*node));
        const NodePolarityView& v = (*views_of_period[st.period_index])[*node];
        if (v.mean_interaction_polarity) set(3, *v.mean_interaction_polarity);
        if (v.mean_edge_homogeneity) set(4, *v.mean_edge_homogeneity);
      }
    }
    set(1, degree);

    auto ut = user_threads.find({st.user_id, st.period_index});
    if (ut != user_threads.end()) {
      std::vector<std::array<double, 3>> pools;
      for (const auto& key : ut->second) {
        auto sit = saturation.find({key, st.period_index});
        if (sit != saturation.end()) pools.push_back(sit->second);
      }
      if (!pools.empty()) {
        auto feats = saturation_percentile_features(pools);
        for (std::size_t k = 0; k < feats.size(); ++k) {
          set(kSaturationFeatureOffset + k, feats[k]);
        }
      }
    }

    if (external) {
      auto eit = external->rows.find({st.user_id, st.period_index});
      if (eit != external->rows.end()) {
        for (std::size_t k = 0; k < external->names.size() && k < eit->second.size(); ++k) {
          if (eit->second[k]) set(n_base + k, *eit->second[k]);
        }
      }
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const FeatureVector& a, const FeatureVector& b) {
              if (a.user_id != b.user_id) return a.user_id < b.user_id;
              return a.period_index < b.period_index;
            });
  return table;
}

ExternalFeatureTable load_external_features(const std::filesystem::path& path) {
  auto rows = read_csv_file(path);
  if (rows.empty()) throw DataError("external feature CSV is empty: " + path.string());
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "user_id" || header[1] != "period") {
    throw DataError("external feature CSV must start with user_id,period columns");
  }
  ExternalFeatureTable table;
  table.names.assign(header.begin() + 2, header.end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 2) throw DataError("short row in external feature CSV");
    int period = 0;
    auto [ptr, ec] = std::from_chars(row[1].data(), row[1].data() + row[1].size(), period);
    if (ec != std::errc() || ptr != row[1].data() + row[1].size()) {
      throw DataError("bad period in external feature CSV: '" + row[1] + "'");
    }
    std::vector<std::optional<double>> values(table.names.size());
    for (std::size_t k = 0; k < table.names.size(); ++k) {
      if (2 + k < row.size()) values[k] = parse_cell(row[2 + k]);
    }
    table.rows[{row[0], period}] = std::move(values);
  }
  return table;
}

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write feature CSV: " + path.string());
  std::vector<std::string> header = {"user_id", "period"};
  header.insert(header.end(), table.names.begin(), table.names.end());
  write_csv_row(out, header);
  std::vector<std::string> fields;
  for (const auto& row : table.rows) {
    fields.clear();
    fields.push_back(row.user_id);
    fields.push_back(std::to_string(row.period_index));
    for (std::size_t k = 0; k < table.names.size(); ++k) {
      fields.push_back(row.present[k] ? format_double(row.values[k]) : std::string());
    }
    write_csv_row(out, fields);
  }
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  auto rows = read_csv_file(path);
  if (rows.empty()) throw DataError("feature CSV is empty: " + path.string());
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "user_id" || header[1] != "period") {
    throw DataError("feature CSV must start with user_id,period columns");
  }
  FeatureTable table;
  table.names.assign(header.begin() + 2, header.end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) throw DataError("ragged row in feature CSV");
    FeatureVector fv;
    fv.user_id = row[0];
    auto [ptr, ec] = std::from_chars(row[1].data(), row[1].data() + row[1].size(), fv.period_index);
    if (ec != std::errc() || ptr != row[1].data() + row[1].size()) {
      throw DataError("bad period in feature CSV: '" + row[1] + "'");
    }
    fv.values.assign(table.names.size(), 0.0);
    fv.present.assign(table.names.size(), 0);
    for (std::size_t k = 0; k < table.names.size(); ++k) {
      auto v = parse_cell(row[2 + k]);
      if (v) {
        fv.values[k] = *v;
        fv.present[k] = 1;
      }
    }
    table.rows.push_back(std::move(fv));
  }
  return table;
}

}  // namespace polaris
