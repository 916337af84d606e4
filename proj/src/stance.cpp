#include "polaris/stance.hpp"

#include <algorithm>
#include <stdexcept>

#include "polaris/csv.hpp"
#include "polaris/errors.hpp"

namespace polaris {

namespace {

bool looks_like_header(const std::vector<std::string>& row) {
  if (row.size() < 2) return false;
  if (parse_stance(row[1])) return false;
  for (const auto& cell : row) {
    std::string lower;
    for (char c : cell) lower.push_back(c >= 'A' && c <= 'Z' ? char(c - 'A' + 'a') : c);
    if (lower.find("label") != std::string::npos || lower.find("id") != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

LabelSource load_label_csv(const std::filesystem::path& path, LabelKind kind, int priority) {
  LabelSource src;
  src.name = path.string();
  src.kind = kind;
  src.priority = priority;
  auto rows = read_csv_file(path);
  bool first = true;
  for (const auto& row : rows) {
    if (first) {
      first = false;
      if (looks_like_header(row)) continue;
    }
    if (row.size() < 2) throw DataError("label CSV row needs submission_id,label");
    auto label = parse_stance(row[1]);
    if (!label) throw DataError("unknown stance label: '" + row[1] + "'");
    src.assignments[row[0]] = *label;
  }
  return src;
}

MergeReport merge_labels(Corpus& corpus, std::vector<LabelSource> sources) {
  std::stable_sort(sources.begin(), sources.end(),
                   [](const LabelSource& a, const LabelSource& b) { return a.priority < b.priority; });
  // Same-priority sources must not overlap: resolution order would otherwise
  // be arbitrary.
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = i + 1; j < sources.size(); ++j) {
      if (sources[i].priority != sources[j].priority) continue;
      const auto& small =
          sources[i].assignments.size() <= sources[j].assignments.size() ? sources[i] : sources[j];
      const auto& large =
          sources[i].assignments.size() <= sources[j].assignments.size() ? sources[j] : sources[i];
      for (const auto& [id, _] : small.assignments) {
        if (large.assignments.count(id)) {
          throw DataError("label sources '" + sources[i].name + "' and '" + sources[j].name +
                          "' share priority " + std::to_string(sources[i].priority) +
                          " but both label id '" + id + "'");
        }
      }
    }
  }

  MergeReport report;
  report.applied_per_source.reserve(sources.size());
  std::vector<std::uint8_t> assigned(corpus.submissions.size(), 0);
  for (const auto& src : sources) {
    std::uint64_t applied = 0;
    for (const auto& [id, label] : src.assignments) {
      auto idx = corpus.find(id);
      if (!idx) {
        ++report.unresolved;
        continue;
      }
      if (assigned[*idx]) continue;  // a higher-priority source already spoke
      corpus.submissions[*idx].stance = label;
      assigned[*idx] = 1;
      ++applied;
    }
    report.labelled += applied;
    report.applied_per_source.emplace_back(src.name, applied);
  }
  return report;
}

EvalResult eval_from_confusion(
    const std::array<std::array<std::uint64_t, kNumStances>, kNumStances>& confusion) {
  EvalResult r;
  r.confusion = confusion;
  std::uint64_t correct = 0;
  for (int g = 0; g < kNumStances; ++g) {
    for (int p = 0; p < kNumStances; ++p) r.n += confusion[g][p];
    correct += confusion[g][g];
  }
  if (r.n == 0) throw DataError("eval_classifier: no shared ids between gold and predictions");
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);

  double f1_sum = 0.0;
  for (int c = 0; c < kNumStances; ++c) {
    std::uint64_t tp = confusion[c][c];
    std::uint64_t actual = 0, predicted = 0;
    for (int k = 0; k < kNumStances; ++k) {
      actual += confusion[c][k];
      predicted += confusion[k][c];
    }
    ClassMetrics& m = r.per_class[c];
    m.support = actual;
    m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    m.recall = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    f1_sum += m.f1;
  }
  r.macro_f1 = f1_sum / kNumStances;
  return r;
}

EvalResult eval_classifier(const std::unordered_map<std::string, Stance>& gold,
                           const std::unordered_map<std::string, Stance>& predicted) {
  std::array<std::array<std::uint64_t, kNumStances>, kNumStances> confusion{};
  for (const auto& [id, g] : gold) {
    auto it = predicted.find(id);
    if (it == predicted.end()) continue;
    confusion[static_cast<int>(g)][static_cast<int>(it->second)]++;
  }
  return eval_from_confusion(confusion);
}

double random_chance_macro_f1(const ClassDistribution& dist) {
  const std::array<double, kNumStances> p = {dist.p_pro, dist.p_anti, dist.p_neutral};
  constexpr double q = 1.0 / 3.0;
  double f1_sum = 0.0;
  for (double pc : p) {
    if (pc < 0.0) throw std::invalid_argument("random_chance_macro_f1: negative class fraction");
    f1_sum += pc == 0.0 ? 0.0 : 2.0 * pc * q / (pc + q);
  }
  return f1_sum / kNumStances;
}

}  // namespace polaris
