#include "polaris/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include <json.hpp>

#include "polaris/errors.hpp"

namespace polaris {

namespace {

// "t1_abc" / "t3_abc" -> "abc"
std::string strip_kind_prefix(std::string id) {
  if (id.size() > 3 && id[0] == 't' && id[2] == '_' && (id[1] == '1' || id[1] == '3')) {
    return id.substr(3);
  }
  return id;
}

std::optional<std::int64_t> as_epoch_seconds(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_unsigned()) return static_cast<std::int64_t>(v.get<std::uint64_t>());
  if (v.is_string()) {
    // Pushshift dumps carry created_utc both as a number and as a string.
    const std::string& s = v.get_ref<const std::string&>();
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return out;
  }
  return std::nullopt;
}

std::optional<Submission> parse_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;

  auto get_string = [&j](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };

  Submission s;
  auto id = get_string("id");
  auto author = get_string("author");
  auto body = get_string("body");
  if (!id || id->empty() || !author || author->empty() || !body) return std::nullopt;
  auto created_it = j.find("created_utc");
  if (created_it == j.end()) return std::nullopt;
  auto created = as_epoch_seconds(*created_it);
  if (!created) return std::nullopt;

  s.id = std::move(*id);
  s.author_id = std::move(*author);
  s.body = std::move(*body);
  s.created_utc = *created;

  const bool has_link = j.contains("link_id");
  const bool has_parent = j.contains("parent_id");
  if (has_link != has_parent) return std::nullopt;  // half a comment
  if (has_link) {
    auto link = get_string("link_id");
    auto parent = get_string("parent_id");
    if (!link || link->empty() || !parent || parent->empty()) return std::nullopt;
    s.kind = SubmissionKind::Comment;
    s.thread_id = strip_kind_prefix(std::move(*link));
    s.parent_id = strip_kind_prefix(std::move(*parent));
  } else {
    s.kind = SubmissionKind::Post;
    s.thread_id = s.id;
  }
  return s;
}

}  // namespace

Corpus build_corpus(std::vector<Submission> submissions, IngestStats stats) {
  Corpus c;
  c.stats = stats;
  c.submissions.reserve(submissions.size());

  std::unordered_map<std::string, SubmissionIndex> index;
  index.reserve(submissions.size() * 2);
  for (auto& s : submissions) {
    auto [it, inserted] = index.emplace(s.id, static_cast<SubmissionIndex>(c.submissions.size()));
    if (!inserted) {
      ++c.stats.duplicates;  // first occurrence wins
      continue;
    }
    if (s.kind == SubmissionKind::Post) ++c.stats.posts;
    else ++c.stats.comments;
    c.submissions.push_back(std::move(s));
  }
  c.id_index = std::move(index);

  const std::size_t n = c.submissions.size();
  c.parent_index.assign(n, kNoSubmission);
  c.thread_root.assign(n, kNoSubmission);
  c.period_of.assign(n, kNoPeriod);
  c.stats.loaded = n;

  for (std::size_t i = 0; i < n; ++i) {
    const Submission& s = c.submissions[i];
    if (s.kind == SubmissionKind::Post) {
      c.thread_root[i] = static_cast<SubmissionIndex>(i);
      continue;
    }
    auto root_it = c.id_index.find(s.thread_id);
    SubmissionIndex root = kNoSubmission;
    if (root_it != c.id_index.end() &&
        c.submissions[root_it->second].kind == SubmissionKind::Post) {
      root = root_it->second;
    }
    c.thread_root[i] = root;

    SubmissionIndex parent = kNoSubmission;
    if (s.parent_id) {
      auto pit = c.id_index.find(*s.parent_id);
      if (pit != c.id_index.end()) parent = pit->second;
    }
    // Quarantine rules: parent missing from the dump, parent in a different
    // thread, or parent == self all count as dangling; attach to the thread
    // root when one exists.
    bool dangling = false;
    if (parent == kNoSubmission) {
      dangling = true;
    } else if (parent == i) {
      dangling = true;
      parent = kNoSubmission;
    } else if (c.submissions[parent].thread_id != s.thread_id) {
      dangling = true;
      parent = kNoSubmission;
    }
    if (dangling) {
      ++c.stats.dangling_repaired;
      if (root != kNoSubmission && root != i) parent = root;
    }
    c.parent_index[i] = parent;
  }

  // Break parent cycles (possible in hostile or corrupted dumps): any chain
  // that revisits a node gets the offending comment re-attached to its
  // thread root.
  std::vector<std::uint8_t> state(n, 0);  // 0 new, 1 on current path, 2 done
  std::vector<SubmissionIndex> path;
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 2) continue;
    path.clear();
    SubmissionIndex cur = static_cast<SubmissionIndex>(i);
    while (cur != kNoSubmission && state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      cur = c.parent_index[cur];
    }
    if (cur != kNoSubmission && state[cur] == 1) {
      // cycle: cut at the node that closed it
      SubmissionIndex offender = path.back();
      SubmissionIndex root = c.thread_root[offender];
      c.parent_index[offender] =
          (root != kNoSubmission && root != offender && state[root] != 1) ? root : kNoSubmission;
      ++c.stats.dangling_repaired;
    }
    for (SubmissionIndex v : path) state[v] = 2;
  }
  return c;
}

Corpus ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path.string());

  IngestStats stats;
  std::vector<Submission> submissions;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto s = parse_line(line);
    if (!s) {
      ++stats.malformed;
      continue;
    }
    submissions.push_back(std::move(*s));
  }
  return build_corpus(std::move(submissions), stats);
}

std::vector<Period> validate_periods(std::vector<Period> periods) {
  for (const Period& p : periods) {
    if (p.end_utc <= p.start_utc) {
      throw DataError("period '" + p.name + "' has end_utc <= start_utc");
    }
  }
  std::stable_sort(periods.begin(), periods.end(),
                   [](const Period& a, const Period& b) { return a.start_utc < b.start_utc; });
  for (std::size_t i = 0; i + 1 < periods.size(); ++i) {
    if (periods[i + 1].start_utc < periods[i].end_utc) {
      throw DataError("periods '" + periods[i].name + "' and '" + periods[i + 1].name +
                      "' overlap");
    }
  }
  for (std::size_t i = 0; i < periods.size(); ++i) periods[i].index = static_cast<int>(i);
  return periods;
}

std::vector<Period> load_periods(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open period config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("period config is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_array()) throw DataError("period config must be a JSON array");
  std::vector<Period> periods;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("name") || !item.contains("start_utc") ||
        !item.contains("end_utc")) {
      throw DataError("each period needs name, start_utc, end_utc");
    }
    Period p;
    p.name = item.at("name").get<std::string>();
    p.start_utc = item.at("start_utc").get<std::int64_t>();
    p.end_utc = item.at("end_utc").get<std::int64_t>();
    periods.push_back(std::move(p));
  }
  return validate_periods(std::move(periods));
}

void assign_periods(Corpus& corpus, std::vector<Period> periods) {
  corpus.periods = validate_periods(std::move(periods));
  std::vector<std::int64_t> starts;
  starts.reserve(corpus.periods.size());
  for (const Period& p : corpus.periods) starts.push_back(p.start_utc);

  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    const std::int64_t t = corpus.submissions[i].created_utc;
    auto it = std::upper_bound(starts.begin(), starts.end(), t);
    if (it == starts.begin()) {
      corpus.period_of[i] = kNoPeriod;
      continue;
    }
    const std::size_t k = static_cast<std::size_t>(it - starts.begin()) - 1;
    corpus.period_of[i] = (t < corpus.periods[k].end_utc) ? static_cast<std::int32_t>(k) : kNoPeriod;
  }
}

std::vector<DensityRow> temporal_density(const Corpus& corpus, std::int64_t bucket_seconds) {
  if (bucket_seconds <= 0) throw DataError("temporal_density: bucket must be positive");
  std::map<std::int64_t, DensityRow> buckets;
  for (const Submission& s : corpus.submissions) {
    std::int64_t q = s.created_utc / bucket_seconds;
    if (s.created_utc % bucket_seconds != 0 && s.created_utc < 0) --q;  // floor
    const std::int64_t start = q * bucket_seconds;
    DensityRow& row = buckets[start];
    row.bucket_start = start;
    if (s.kind == SubmissionKind::Post) ++row.posts;
    else ++row.comments;
  }
  std::vector<DensityRow> out;
  out.reserve(buckets.size());
  for (auto& [_, row] : buckets) out.push_back(row);
  return out;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> period_counts(const Corpus& corpus) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> counts(corpus.periods.size(), {0, 0});
  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    const std::int32_t p = corpus.period_of[i];
    if (p == kNoPeriod) continue;
    if (corpus.submissions[i].kind == SubmissionKind::Post) ++counts[p].first;
    else ++counts[p].second;
  }
  return counts;
}

}  // namespace polaris
