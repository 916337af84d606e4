#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "polaris/corpus.hpp"
#include "polaris/stance_label.hpp"

namespace polaris {

enum class LabelKind : std::uint8_t { Gold = 0, Predicted = 1 };

struct LabelSource {
  std::string name;
  LabelKind kind = LabelKind::Predicted;
  int priority = 0;  // lower wins
  std::unordered_map<std::string, Stance> assignments;
};

// CSV `submission_id,label[,confidence]`; the confidence column is ignored.
LabelSource load_label_csv(const std::filesystem::path& path, LabelKind kind, int priority);

struct MergeReport {
  std::uint64_t labelled = 0;
  std::uint64_t unresolved = 0;  // ids that match no corpus submission
  std::vector<std::pair<std::string, std::uint64_t>> applied_per_source;
};

// Applies sources in priority order (first match wins). Two sources at the
// same priority with overlapping ids are a configuration error.
MergeReport merge_labels(Corpus& corpus, std::vector<LabelSource> sources);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct EvalResult {
  // confusion[gold][predicted], classes ordered pro, anti, neutral
  std::array<std::array<std::uint64_t, kNumStances>, kNumStances> confusion{};
  std::array<ClassMetrics, kNumStances> per_class{};
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::uint64_t n = 0;  // size of the shared id set
};

// Standard multi-class metrics over the intersection of the two id sets.
// A class with no predicted and no actual instances contributes F1 = 0.
EvalResult eval_classifier(const std::unordered_map<std::string, Stance>& gold,
                           const std::unordered_map<std::string, Stance>& predicted);

EvalResult eval_from_confusion(
    const std::array<std::array<std::uint64_t, kNumStances>, kNumStances>& confusion);

struct ClassDistribution {
  double p_pro = 0.0;
  double p_anti = 0.0;
  double p_neutral = 0.0;
};

// Expected macro-F1 of a predictor that picks one of the three classes
// uniformly at random: per class, precision tends to the class prevalence p
// and recall to 1/3, so F1 = 2*p*(1/3) / (p + 1/3).
double random_chance_macro_f1(const ClassDistribution& dist);

}  // namespace polaris
