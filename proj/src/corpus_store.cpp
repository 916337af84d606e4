#include "polaris/corpus_store.hpp"

#include <cstring>
#include <fstream>

#include "polaris/errors.hpp"

namespace polaris {

namespace {

constexpr char kMagic[8] = {'P', 'L', 'R', 'S', 'C', 'O', 'R', 'P'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagBodies = 1u;

// All integers are serialized little-endian regardless of host order.
template <typename T>
void put(std::string& buf, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
  }
}

template <typename T>
T take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw DataError("corpus store truncated");
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<U>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(u);
}

void put_string_column(std::string& buf, const std::vector<std::string>& values) {
  std::uint64_t total = 0;
  for (const auto& v : values) total += v.size();
  put<std::uint64_t>(buf, total);
  for (const auto& v : values) put<std::uint32_t>(buf, static_cast<std::uint32_t>(v.size()));
  for (const auto& v : values) buf.append(v);
}

std::vector<std::string> take_string_column(const std::string& buf, std::size_t& pos,
                                            std::size_t n) {
  const std::uint64_t total = take<std::uint64_t>(buf, pos);
  std::vector<std::uint32_t> lens(n);
  for (std::size_t i = 0; i < n; ++i) lens[i] = take<std::uint32_t>(buf, pos);
  if (pos + total > buf.size()) throw DataError("corpus store truncated");
  std::vector<std::string> out(n);
  std::size_t off = pos;
  for (std::size_t i = 0; i < n; ++i) {
    out[i].assign(buf, off, lens[i]);
    off += lens[i];
  }
  pos += total;
  return out;
}

}  // namespace

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, bool store_bodies) {
  const std::size_t n = corpus.submissions.size();
  std::string buf;
  buf.reserve(128 + n * 48);

  buf.append(kMagic, sizeof kMagic);
  put<std::uint32_t>(buf, kVersion);
  put<std::uint32_t>(buf, store_bodies ? kFlagBodies : 0u);
  put<std::uint64_t>(buf, n);
  put<std::uint64_t>(buf, corpus.periods.size());
  put<std::uint64_t>(buf, corpus.stats.loaded);
  put<std::uint64_t>(buf, corpus.stats.posts);
  put<std::uint64_t>(buf, corpus.stats.comments);
  put<std::uint64_t>(buf, corpus.stats.malformed);
  put<std::uint64_t>(buf, corpus.stats.duplicates);
  put<std::uint64_t>(buf, corpus.stats.dangling_repaired);

  std::vector<std::string> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = corpus.submissions[i].id;
  put_string_column(buf, col);
  for (std::size_t i = 0; i < n; ++i) col[i] = corpus.submissions[i].author_id;
  put_string_column(buf, col);
  for (std::size_t i = 0; i < n; ++i) col[i] = corpus.submissions[i].thread_id;
  put_string_column(buf, col);
  if (store_bodies) {
    for (std::size_t i = 0; i < n; ++i) col[i] = corpus.submissions[i].body;
    put_string_column(buf, col);
  }

  for (std::size_t i = 0; i < n; ++i) put<std::int64_t>(buf, corpus.submissions[i].created_utc);
  for (std::size_t i = 0; i < n; ++i)
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(corpus.submissions[i].kind));
  for (std::size_t i = 0; i < n; ++i) put<std::uint32_t>(buf, corpus.thread_root[i]);
  for (std::size_t i = 0; i < n; ++i) put<std::uint32_t>(buf, corpus.parent_index[i]);
  for (std::size_t i = 0; i < n; ++i) put<std::int32_t>(buf, corpus.period_of[i]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& st = corpus.submissions[i].stance;
    put<std::int8_t>(buf, st ? static_cast<std::int8_t>(*st) : std::int8_t(-1));
  }

  for (const Period& p : corpus.periods) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p.name.size()));
    buf.append(p.name);
    put<std::int64_t>(buf, p.start_utc);
    put<std::int64_t>(buf, p.end_utc);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write corpus store: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("short write to corpus store: " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus store: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  if (buf.size() < sizeof kMagic || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError("not a corpus store: " + path.string());
  }
  pos += sizeof kMagic;
  const std::uint32_t version = take<std::uint32_t>(buf, pos);
  if (version != kVersion) {
    throw DataError("unsupported corpus store version " + std::to_string(version));
  }
  const std::uint32_t flags = take<std::uint32_t>(buf, pos);
  const std::uint64_t n = take<std::uint64_t>(buf, pos);
  const std::uint64_t n_periods = take<std::uint64_t>(buf, pos);

  Corpus c;
  c.stats.loaded = take<std::uint64_t>(buf, pos);
  c.stats.posts = take<std::uint64_t>(buf, pos);
  c.stats.comments = take<std::uint64_t>(buf, pos);
  c.stats.malformed = take<std::uint64_t>(buf, pos);
  c.stats.duplicates = take<std::uint64_t>(buf, pos);
  c.stats.dangling_repaired = take<std::uint64_t>(buf, pos);

  auto ids = take_string_column(buf, pos, n);
  auto authors = take_string_column(buf, pos, n);
  auto threads = take_string_column(buf, pos, n);
  std::vector<std::string> bodies;
  if (flags & kFlagBodies) bodies = take_string_column(buf, pos, n);

  c.submissions.resize(n);
  c.parent_index.resize(n);
  c.thread_root.resize(n);
  c.period_of.resize(n);

  for (std::size_t i = 0; i < n; ++i) c.submissions[i].created_utc = take<std::int64_t>(buf, pos);
  for (std::size_t i = 0; i < n; ++i) {
    c.submissions[i].kind = static_cast<SubmissionKind>(take<std::uint8_t>(buf, pos));
  }
  for (std::size_t i = 0; i < n; ++i) c.thread_root[i] = take<std::uint32_t>(buf, pos);
  for (std::size_t i = 0; i < n; ++i) c.parent_index[i] = take<std::uint32_t>(buf, pos);
  for (std::size_t i = 0; i < n; ++i) c.period_of[i] = take<std::int32_t>(buf, pos);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int8_t s = take<std::int8_t>(buf, pos);
    if (s >= 0) c.submissions[i].stance = static_cast<Stance>(s);
  }

  c.id_index.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    Submission& s = c.submissions[i];
    s.id = std::move(ids[i]);
    s.author_id = std::move(authors[i]);
    s.thread_id = std::move(threads[i]);
    if (!bodies.empty()) s.body = std::move(bodies[i]);
    c.id_index.emplace(s.id, static_cast<SubmissionIndex>(i));
  }
  // The store persists resolved structure; parent_id is reconstructed from
  // the resolved parent index.
  for (std::size_t i = 0; i < n; ++i) {
    Submission& s = c.submissions[i];
    if (s.kind == SubmissionKind::Comment && c.parent_index[i] != kNoSubmission) {
      s.parent_id = c.submissions[c.parent_index[i]].id;
    }
  }

  c.periods.resize(n_periods);
  for (std::size_t i = 0; i < n_periods; ++i) {
    Period& p = c.periods[i];
    p.index = static_cast<int>(i);
    const std::uint32_t len = take<std::uint32_t>(buf, pos);
    if (pos + len > buf.size()) throw DataError("corpus store truncated");
    p.name.assign(buf, pos, len);
    pos += len;
    p.start_utc = take<std::int64_t>(buf, pos);
    p.end_utc = take<std::int64_t>(buf, pos);
  }
  return c;
}

}  // namespace polaris
