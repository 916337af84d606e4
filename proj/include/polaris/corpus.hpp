#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polaris/stance_label.hpp"

namespace polaris {

using SubmissionIndex = std::uint32_t;
inline constexpr SubmissionIndex kNoSubmission = static_cast<SubmissionIndex>(-1);
inline constexpr int kNoPeriod = -1;

enum class SubmissionKind : std::uint8_t { Post = 0, Comment = 1 };

// One post or comment. thread_id names the root post; parent_id is absent
// exactly for posts.
struct Submission {
  std::string id;
  SubmissionKind kind = SubmissionKind::Post;
  std::string thread_id;
  std::optional<std::string> parent_id;
  std::string author_id;
  std::int64_t created_utc = 0;
  std::string body;
  std::optional<Stance> stance;
};

// Half-open time interval [start_utc, end_utc).
struct Period {
  int index = 0;
  std::string name;
  std::int64_t start_utc = 0;
  std::int64_t end_utc = 0;
};

struct IngestStats {
  std::uint64_t loaded = 0;
  std::uint64_t posts = 0;
  std::uint64_t comments = 0;
  std::uint64_t malformed = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t dangling_repaired = 0;
};

// Immutable after construction; downstream modules read it concurrently.
struct Corpus {
  std::vector<Submission> submissions;
  std::vector<Period> periods;

  // Resolved structure, aligned with `submissions`.
  std::vector<SubmissionIndex> parent_index;  // kNoSubmission for posts / unresolvable parents
  std::vector<SubmissionIndex> thread_root;   // kNoSubmission if the root post is absent
  std::vector<std::int32_t> period_of;        // kNoPeriod if outside every period

  std::unordered_map<std::string, SubmissionIndex> id_index;
  IngestStats stats;

  std::size_t size() const { return submissions.size(); }
  std::optional<SubmissionIndex> find(std::string_view id) const {
    auto it = id_index.find(std::string(id));
    return it == id_index.end() ? std::nullopt : std::optional<SubmissionIndex>(it->second);
  }
};

// Authors named "[deleted]" keep their submissions in the corpus (thread
// structure, discussion composition) but are excluded from user-level
// analytics.
inline bool is_deleted_author(std::string_view author) { return author == "[deleted]"; }

// Builds the resolved indices from raw submissions: duplicate ids dropped
// (first kept), dangling or cross-thread parents re-attached to the thread
// root, parent cycles broken. Runs as the back half of ingest; exposed so
// tests and generators can assemble corpora directly.
Corpus build_corpus(std::vector<Submission> submissions, IngestStats stats = {});

// Line-delimited JSON, one submission per line: id, author, created_utc,
// body, plus (link_id, parent_id) for comments. t1_/t3_ prefixes stripped.
// Malformed lines are counted and skipped, never fatal.
Corpus ingest_jsonl(const std::filesystem::path& path);

// JSON array of {name, start_utc, end_utc}; returns the schedule sorted by
// start. Overlaps and empty intervals are fatal.
std::vector<Period> load_periods(const std::filesystem::path& path);

std::vector<Period> validate_periods(std::vector<Period> periods);

// Fills period_of under the half-open convention: a submission at a shared
// boundary belongs to the later period.
void assign_periods(Corpus& corpus, std::vector<Period> periods);

struct DensityRow {
  std::int64_t bucket_start = 0;
  std::uint64_t posts = 0;
  std::uint64_t comments = 0;
};

std::vector<DensityRow> temporal_density(const Corpus& corpus, std::int64_t bucket_seconds);

// Per-period (posts, comments) counts; index aligned with corpus.periods.
std::vector<std::pair<std::uint64_t, std::uint64_t>> period_counts(const Corpus& corpus);

}  // namespace polaris
