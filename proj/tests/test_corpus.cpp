#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helpers.hpp"
#include "polaris/corpus.hpp"
#include "polaris/corpus_store.hpp"
#include "polaris/errors.hpp"
#include "polaris/rng.hpp"
#include "synth.hpp"

using namespace polaris;
using namespace polaris::testing;

TEST_CASE("ingest: minimal post with two comments") {
  TempDir tmp("ingest_min");
  const auto path = write_file(tmp.file("c.jsonl"),
      R"({"id":"p1","author":"alice","created_utc":100,"body":"root"})" "\n"
      R"({"id":"c1","author":"bob","created_utc":110,"body":"re","link_id":"t3_p1","parent_id":"t3_p1"})" "\n"
      R"({"id":"c2","author":"carol","created_utc":120,"body":"re2","link_id":"t3_p1","parent_id":"t1_c1"})" "\n");
  const Corpus c = ingest_jsonl(path);
  CHECK(c.size() == 3);
  CHECK(c.stats.posts == 1);
  CHECK(c.stats.comments == 2);
  CHECK(c.stats.malformed == 0);
  CHECK(c.stats.dangling_repaired == 0);

  const auto p1 = *c.find("p1");
  const auto c1 = *c.find("c1");
  const auto c2 = *c.find("c2");
  CHECK(c.parent_index[c1] == p1);
  CHECK(c.parent_index[c2] == c1);
  CHECK(c.thread_root[c2] == p1);
  CHECK(c.submissions[c1].thread_id == "p1");  // prefix stripped
}

TEST_CASE("ingest: empty file") {
  TempDir tmp("ingest_empty");
  const Corpus c = ingest_jsonl(write_file(tmp.file("e.jsonl"), ""));
  CHECK(c.size() == 0);
  CHECK(c.stats.malformed == 0);
}

TEST_CASE("ingest: malformed lines are counted and skipped") {
  TempDir tmp("ingest_bad");
  const auto path = write_file(tmp.file("c.jsonl"),
      R"({"id":"p1","author":"a","created_utc":100,"body":"ok"})" "\n"
      R"({"id":"p2","author":"a","body":"missing created_utc"})" "\n"
      "not json at all\n"
      R"({"id":"c9","author":"a","created_utc":50,"body":"half a comment","link_id":"t3_p1"})" "\n");
  const Corpus c = ingest_jsonl(path);
  CHECK(c.size() == 1);
  CHECK(c.stats.malformed == 3);
}

TEST_CASE("ingest: duplicate ids keep the first occurrence") {
  TempDir tmp("ingest_dup");
  const auto path = write_file(tmp.file("c.jsonl"),
      R"({"id":"p1","author":"first","created_utc":100,"body":"a"})" "\n"
      R"({"id":"p1","author":"second","created_utc":200,"body":"b"})" "\n");
  const Corpus c = ingest_jsonl(path);
  CHECK(c.size() == 1);
  CHECK(c.stats.duplicates == 1);
  CHECK(c.submissions[*c.find("p1")].author_id == "first");
}

TEST_CASE("ingest: created_utc accepted as string") {
  TempDir tmp("ingest_str_ts");
  const auto path = write_file(tmp.file("c.jsonl"),
      R"({"id":"p1","author":"a","created_utc":"1446336000","body":"x"})" "\n");
  const Corpus c = ingest_jsonl(path);
  REQUIRE(c.size() == 1);
  CHECK(c.submissions[0].created_utc == 1446336000);
}

TEST_CASE("ingest: dangling parent attaches to the thread root") {
  TempDir tmp("ingest_dangling");
  const auto path = write_file(tmp.file("c.jsonl"),
      R"({"id":"p1","author":"a","created_utc":100,"body":"root"})" "\n"
      R"({"id":"c1","author":"b","created_utc":110,"body":"re","link_id":"t3_p1","parent_id":"t1_missing"})" "\n");
  const Corpus c = ingest_jsonl(path);
  CHECK(c.stats.dangling_repaired == 1);
  CHECK(c.parent_index[*c.find("c1")] == *c.find("p1"));
}

TEST_CASE("ingest: dangling parent with missing root stays unresolved") {
  TempDir tmp("ingest_no_root");
  const auto path = write_file(tmp.file("c.jsonl"),
      R"({"id":"c1","author":"b","created_utc":110,"body":"re","link_id":"t3_gone","parent_id":"t1_also_gone"})" "\n");
  const Corpus c = ingest_jsonl(path);
  CHECK(c.stats.dangling_repaired == 1);
  CHECK(c.parent_index[*c.find("c1")] == kNoSubmission);
  CHECK(c.thread_root[*c.find("c1")] == kNoSubmission);
}

TEST_CASE("build_corpus: parent cycles are broken") {
  std::vector<Submission> subs;
  subs.push_back(make_post("p1", "a", 100));
  subs.push_back(make_comment("c1", "b", 110, "p1", "c2"));
  subs.push_back(make_comment("c2", "c", 120, "p1", "c1"));
  const Corpus c = build_corpus(std::move(subs));
  // following parents from any comment must terminate
  for (SubmissionIndex i = 0; i < c.size(); ++i) {
    std::set<SubmissionIndex> seen;
    SubmissionIndex cur = i;
    while (cur != kNoSubmission) {
      CHECK(seen.insert(cur).second);
      cur = c.parent_index[cur];
    }
  }
}

TEST_CASE("load_periods: sorted, overlaps fatal, empty intervals fatal") {
  TempDir tmp("periods");
  SUBCASE("out of order input comes back sorted") {
    const auto path = write_file(tmp.file("p.json"),
        R"([{"name":"late","start_utc":100,"end_utc":200},
            {"name":"early","start_utc":0,"end_utc":50}])");
    const auto periods = load_periods(path);
    REQUIRE(periods.size() == 2);
    CHECK(periods[0].name == "early");
    CHECK(periods[1].name == "late");
    CHECK(periods[0].index == 0);
  }
  SUBCASE("overlap names both periods") {
    const auto path = write_file(tmp.file("o.json"),
        R"([{"name":"first","start_utc":0,"end_utc":10},
            {"name":"second","start_utc":5,"end_utc":15}])");
    CHECK_THROWS_WITH_AS(load_periods(path),
                         doctest::Contains("first"), DataError);
    try {
      load_periods(path);
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("second") != std::string::npos);
    }
  }
  SUBCASE("end <= start is fatal") {
    const auto path = write_file(tmp.file("b.json"),
        R"([{"name":"bad","start_utc":10,"end_utc":10}])");
    CHECK_THROWS_AS(load_periods(path), DataError);
  }
}

TEST_CASE("assign_periods: half-open boundary convention") {
  std::vector<Submission> subs;
  subs.push_back(make_post("at_start", "a", 100));
  subs.push_back(make_post("at_shared_boundary", "a", 200));
  subs.push_back(make_post("before_all", "a", 5));
  subs.push_back(make_post("after_all", "a", 999));
  subs.push_back(make_post("in_gap", "a", 250));
  Corpus c = build_corpus(std::move(subs));
  std::vector<Period> periods = {{0, "k", 100, 200}, {0, "k+1", 200, 240}};
  assign_periods(c, periods);

  CHECK(c.period_of[*c.find("at_start")] == 0);
  CHECK(c.period_of[*c.find("at_shared_boundary")] == 1);  // later period wins
  CHECK(c.period_of[*c.find("before_all")] == kNoPeriod);
  CHECK(c.period_of[*c.find("after_all")] == kNoPeriod);
  CHECK(c.period_of[*c.find("in_gap")] == kNoPeriod);
}

TEST_CASE("assign_periods: partition and idempotence") {
  auto rng = make_rng(7, "corpus.partition");
  std::uniform_int_distribution<std::int64_t> ts(0, 5000);
  std::vector<Submission> subs;
  for (int i = 0; i < 500; ++i) {
    subs.push_back(make_post("p" + std::to_string(i), "a", ts(rng)));
  }
  Corpus c = build_corpus(std::move(subs));
  const auto periods = synth::make_periods(4, 500, 800);  // covers [500, 3700)
  assign_periods(c, periods);

  std::uint64_t assigned = 0, unassigned = 0;
  for (auto p : c.period_of) (p == kNoPeriod ? unassigned : assigned)++;
  CHECK(assigned + unassigned == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto t = c.submissions[i].created_utc;
    if (c.period_of[i] != kNoPeriod) {
      const Period& p = c.periods[c.period_of[i]];
      CHECK(p.start_utc <= t);
      CHECK(t < p.end_utc);
    } else {
      CHECK((t < 500 || t >= 3700));
    }
  }

  const auto first = c.period_of;
  assign_periods(c, periods);
  CHECK(c.period_of == first);
}

TEST_CASE("tree well-formedness on random synthetic corpora") {
  TempDir tmp("synth_tree");
  synth::SynthConfig cfg;
  cfg.seed = 11;
  cfg.n_periods = 5;
  cfg.n_users = 60;
  cfg.target_submissions = 900;
  const auto paths = synth::write_synthetic_corpus(cfg, tmp.path());
  const Corpus c = ingest_jsonl(paths.submissions);
  CHECK(c.stats.malformed == 0);
  CHECK(c.stats.dangling_repaired == 0);
  for (SubmissionIndex i = 0; i < c.size(); ++i) {
    if (c.submissions[i].kind != SubmissionKind::Comment) continue;
    std::size_t steps = 0;
    SubmissionIndex cur = i;
    while (c.parent_index[cur] != kNoSubmission) {
      cur = c.parent_index[cur];
      REQUIRE(++steps <= c.size());
    }
    CHECK(cur == c.thread_root[i]);  // chains end at the thread's post
    CHECK(c.submissions[cur].kind == SubmissionKind::Post);
  }
}

TEST_CASE("temporal_density") {
  SUBCASE("single bucket split by kind") {
    std::vector<Submission> subs;
    subs.push_back(make_post("p1", "a", 10));
    subs.push_back(make_comment("c1", "b", 20, "p1", "p1"));
    subs.push_back(make_comment("c2", "b", 30, "p1", "p1"));
    const Corpus c = build_corpus(std::move(subs));
    const auto rows = temporal_density(c, 100);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].bucket_start == 0);
    CHECK(rows[0].posts == 1);
    CHECK(rows[0].comments == 2);
  }
  SUBCASE("empty corpus gives an empty table") {
    const Corpus c = build_corpus({});
    CHECK(temporal_density(c, 3600).empty());
  }
  SUBCASE("bucket must be positive") {
    const Corpus c = build_corpus({});
    CHECK_THROWS_AS(temporal_density(c, 0), DataError);
  }
  SUBCASE("known per-day counts recovered exactly") {
    // deterministic fixture: day d gets d+1 posts and 2d comments
    std::vector<Submission> subs;
    int id = 0;
    const std::int64_t day = 86400;
    for (int d = 0; d < 4; ++d) {
      for (int k = 0; k <= d; ++k) {
        subs.push_back(make_post("p" + std::to_string(id++), "a", d * day + k));
      }
      for (int k = 0; k < 2 * d; ++k) {
        subs.push_back(make_comment("c" + std::to_string(id++), "a", d * day + 100 + k, "p0", "p0"));
      }
    }
    const Corpus c = build_corpus(std::move(subs));
    const auto rows = temporal_density(c, day);
    REQUIRE(rows.size() == 4);
    std::uint64_t total = 0;
    for (int d = 0; d < 4; ++d) {
      CHECK(rows[d].bucket_start == d * day);
      CHECK(rows[d].posts == static_cast<std::uint64_t>(d + 1));
      CHECK(rows[d].comments == static_cast<std::uint64_t>(2 * d));
      total += rows[d].posts + rows[d].comments;
    }
    CHECK(total == c.size());
  }
}

TEST_CASE("deleted authors are ingested but flagged") {
  std::vector<Submission> subs;
  subs.push_back(make_post("p1", "[deleted]", 10));
  const Corpus c = build_corpus(std::move(subs));
  CHECK(c.size() == 1);
  CHECK(is_deleted_author(c.submissions[0].author_id));
}

TEST_CASE("corpus store round-trip preserves resolved structure") {
  TempDir tmp("store");
  synth::SynthConfig cfg;
  cfg.seed = 3;
  cfg.n_periods = 4;
  cfg.n_users = 40;
  cfg.target_submissions = 400;
  const auto paths = synth::write_synthetic_corpus(cfg, tmp.path());
  Corpus c = ingest_jsonl(paths.submissions);
  assign_periods(c, load_periods(paths.periods));
  c.submissions[0].stance = Stance::Pro;
  c.submissions[1].stance = Stance::Anti;

  save_corpus(c, tmp.file("corpus.bin"));
  const Corpus r = load_corpus(tmp.file("corpus.bin"));

  REQUIRE(r.size() == c.size());
  CHECK(r.parent_index == c.parent_index);
  CHECK(r.thread_root == c.thread_root);
  CHECK(r.period_of == c.period_of);
  CHECK(r.periods.size() == c.periods.size());
  CHECK(r.stats.loaded == c.stats.loaded);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(r.submissions[i].id == c.submissions[i].id);
    CHECK(r.submissions[i].author_id == c.submissions[i].author_id);
    CHECK(r.submissions[i].created_utc == c.submissions[i].created_utc);
    CHECK(r.submissions[i].kind == c.submissions[i].kind);
    CHECK(r.submissions[i].stance == c.submissions[i].stance);
    CHECK(r.submissions[i].thread_id == c.submissions[i].thread_id);
  }
  // bodies are dropped by default
  CHECK(r.submissions[0].body.empty());

  SUBCASE("version/magic is checked") {
    write_file(tmp.file("junk.bin"), "NOTASTORE........");
    CHECK_THROWS_AS(load_corpus(tmp.file("junk.bin")), DataError);
  }
}
