#include "polaris/annotation.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <unordered_set>

#include "polaris/csv.hpp"
#include "polaris/errors.hpp"

namespace polaris {

namespace {

bool looks_like_header(const std::vector<std::string>& row) {
  for (const auto& cell : row) {
    std::string lower;
    for (char c : cell) lower.push_back(c >= 'A' && c <= 'Z' ? char(c - 'A' + 'a') : c);
    if (lower == "label") return true;
  }
  return false;
}

// Strict argmax over per-label counts; nullopt when the top count is shared.
std::optional<Stance> strict_majority(const std::array<std::uint32_t, kNumStances>& counts) {
  int best = -1;
  bool tied = false;
  for (int s = 0; s < kNumStances; ++s) {
    if (counts[s] == 0) continue;
    if (best < 0 || counts[s] > counts[best]) {
      best = s;
      tied = false;
    } else if (counts[s] == counts[best]) {
      tied = true;
    }
  }
  if (best < 0 || tied) return std::nullopt;
  return static_cast<Stance>(best);
}

}  // namespace

std::vector<AnnotationRecord> read_annotation_csv(const std::filesystem::path& path) {
  auto rows = read_csv_file(path);
  std::vector<AnnotationRecord> records;
  std::unordered_set<std::string> seen;
  bool first = true;
  for (const auto& row : rows) {
    if (first) {
      first = false;
      if (looks_like_header(row)) continue;
    }
    if (row.size() < 3) throw DataError("annotation CSV row needs item_id,worker_id,label");
    auto label = parse_stance(row[2]);
    if (!label) throw DataError("unknown annotation label: '" + row[2] + "'");
    std::string key = row[0] + '\x1f' + row[1];
    if (!seen.insert(std::move(key)).second) {
      throw DataError("duplicate annotation for item '" + row[0] + "' by worker '" + row[1] + "'");
    }
    records.push_back({row[0], row[1], *label});
  }
  return records;
}

std::vector<ItemAgreement> item_agreement(std::span<const AnnotationRecord> records) {
  std::map<std::string, std::array<std::uint32_t, kNumStances>> counts;
  for (const auto& r : records) {
    counts[r.item_id][static_cast<int>(r.label)]++;
  }
  std::vector<ItemAgreement> out;
  out.reserve(counts.size());
  for (const auto& [item, c] : counts) {
    ItemAgreement a;
    a.item_id = item;
    a.n_annotations = c[0] + c[1] + c[2];
    a.majority_count = std::max({c[0], c[1], c[2]});
    a.majority_label = strict_majority(c);
    a.iaa = static_cast<double>(a.majority_count) / static_cast<double>(a.n_annotations);
    out.push_back(std::move(a));
  }
  return out;
}

double dataset_iaa(std::span<const ItemAgreement> items) {
  std::uint64_t agree = 0, total = 0;
  for (const auto& a : items) {
    agree += a.majority_count;
    total += a.n_annotations;
  }
  return total == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(total);
}

std::vector<WorkerQuality> worker_map(std::span<const AnnotationRecord> records) {
  std::map<std::string, std::array<std::uint32_t, kNumStances>> item_counts;
  for (const auto& r : records) {
    item_counts[r.item_id][static_cast<int>(r.label)]++;
  }
  std::map<std::string, WorkerQuality> workers;
  for (const auto& r : records) {
    WorkerQuality& w = workers[r.worker_id];
    w.worker_id = r.worker_id;
    ++w.n_annotations;
    auto loo = item_counts.at(r.item_id);
    loo[static_cast<int>(r.label)]--;
    auto majority = strict_majority(loo);
    if (!majority) continue;  // tied without this worker: excluded entirely
    ++w.n_usable;
    if (*majority == r.label) ++w.n_agree;
  }
  std::vector<WorkerQuality> out;
  out.reserve(workers.size());
  for (auto& [_, w] : workers) {
    if (w.n_usable > 0) {
      w.map = static_cast<double>(w.n_agree) / static_cast<double>(w.n_usable);
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::set<std::string> flag_malicious(std::span<const WorkerQuality> qualities, double threshold) {
  std::set<std::string> flagged;
  for (const auto& w : qualities) {
    if (w.map && *w.map < threshold) flagged.insert(w.worker_id);
  }
  return flagged;
}

std::set<std::string> build_allowlist(std::span<const WorkerQuality> qualities, double min_map,
                                      std::uint32_t min_annotations) {
  std::set<std::string> allowed;
  for (const auto& w : qualities) {
    if (w.map && *w.map >= min_map && w.n_annotations >= min_annotations) {
      allowed.insert(w.worker_id);
    }
  }
  return allowed;
}

FilterResult low_confidence_filter(std::span<const ItemAgreement> items, double min_iaa) {
  FilterResult r;
  for (const auto& a : items) {
    if (a.iaa < min_iaa) r.discarded.push_back(a);
    else r.kept.push_back(a);
  }
  return r;
}

std::vector<std::pair<std::string, Stance>> majority_labels(std::span<const ItemAgreement> kept) {
  std::vector<std::pair<std::string, Stance>> out;
  for (const auto& a : kept) {
    if (a.majority_label) out.emplace_back(a.item_id, *a.majority_label);
  }
  return out;
}

}  // namespace polaris
