#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polaris/stance_label.hpp"

namespace polaris {

struct AnnotationRecord {
  std::string item_id;
  std::string worker_id;
  Stance label = Stance::Neutral;
};

// Header `item_id,worker_id,label`; labels pro/anti/neither (case-insensitive).
// A repeated (item, worker) pair is a data error.
std::vector<AnnotationRecord> read_annotation_csv(const std::filesystem::path& path);

struct ItemAgreement {
  std::string item_id;
  std::uint32_t n_annotations = 0;
  std::optional<Stance> majority_label;  // none on a tied top count
  std::uint32_t majority_count = 0;      // top count, tied or not
  double iaa = 0.0;                      // majority_count / n_annotations
};

// One entry per item, sorted by item_id.
std::vector<ItemAgreement> item_agreement(std::span<const AnnotationRecord> records);

// Annotation-weighted mean of item IAAs: sum(majority_count) / sum(n).
double dataset_iaa(std::span<const ItemAgreement> items);

struct WorkerQuality {
  std::string worker_id;
  std::uint32_t n_annotations = 0;  // everything the worker submitted
  std::uint32_t n_usable = 0;       // items whose leave-one-out majority is untied
  std::uint32_t n_agree = 0;
  std::optional<double> map;        // n_agree / n_usable; undefined when n_usable = 0
};

// Majority Agreement Proportion per worker: for each item the worker
// annotated, recompute the majority over the other annotators; the worker's
// score is the fraction of their annotations matching that leave-one-out
// majority. Items with a tied leave-one-out majority are excluded from both
// numerator and denominator.
std::vector<WorkerQuality> worker_map(std::span<const AnnotationRecord> records);

// Workers with a defined MAP strictly below the threshold.
std::set<std::string> flag_malicious(std::span<const WorkerQuality> qualities,
                                     double threshold = 0.25);

// MAP >= min_map and at least min_annotations submitted; both inclusive.
std::set<std::string> build_allowlist(std::span<const WorkerQuality> qualities,
                                      double min_map = 0.5, std::uint32_t min_annotations = 20);

struct FilterResult {
  std::vector<ItemAgreement> kept;
  std::vector<ItemAgreement> discarded;
};

// Drops items with iaa < min_iaa; with 8 annotators and the 0.6 default this
// keeps exactly the items where at least 5 agree.
FilterResult low_confidence_filter(std::span<const ItemAgreement> items, double min_iaa = 0.6);

// Gold-label table from the kept items; items without a clear majority are
// dropped (with 8-annotator items the 0.6 filter has already removed them).
std::vector<std::pair<std::string, Stance>> majority_labels(std::span<const ItemAgreement> kept);

}  // namespace polaris
