#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "polaris/corpus_store.hpp"
#include "polaris/csv.hpp"
#include "polaris/errors.hpp"
#include "polaris/pipeline.hpp"
#include "synth.hpp"

using namespace polaris;
using namespace polaris::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_run(const synth::SynthPaths& paths, const std::filesystem::path& out_dir) {
  RunConfig cfg;
  cfg.input = paths.submissions;
  cfg.periods = paths.periods;
  cfg.gold_labels = {paths.gold};
  cfg.predicted_labels = {paths.predicted};
  cfg.out_dir = out_dir;
  cfg.seed = 5;
  cfg.threads = 2;
  cfg.forest.n_trees = 12;
  cfg.forest.max_depth = 6;
  cfg.forest.min_leaf = 4;
  cfg.importance_repetitions = 2;
  return cfg;
}

}  // namespace

TEST_CASE("run_pipeline produces the full artefact set") {
  TempDir tmp("pipeline_full");
  synth::SynthConfig scfg;
  scfg.seed = 2024;
  scfg.n_periods = 8;
  scfg.n_users = 150;
  scfg.target_submissions = 2500;
  const auto paths = synth::write_synthetic_corpus(scfg, tmp.file("in"));
  const auto out = tmp.file("out");
  run_pipeline(small_run(paths, out));

  for (const char* name :
       {"run.json", "corpus.bin", "ingest_report.json", "density.csv", "period_counts.csv",
        "polarity.csv", "polarity_pdf.csv", "polarity_cdf_pro.csv", "polarity_cdf_anti.csv",
        "polarity_summary.json", "network_edges.csv", "network_user_metrics.csv", "triads.csv",
        "echo_stats.json", "echo_cdf_interaction_polarity.csv", "echo_cdf_edge_homogeneity.csv",
        "patterns.csv", "retention.csv", "prolific_summary.csv", "dynamics_summary.json",
        "features.csv", "predict/presence_metrics.json", "predict/presence_model.json",
        "predict/presence_importance.csv", "predict/polarity_metrics.json",
        "predict/polarity_model.json", "predict/polarity_importance.csv"}) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(out / name));
  }

  SUBCASE("corpus store reloads") {
    const Corpus c = load_corpus(out / "corpus.bin");
    CHECK(c.size() > 0);
    CHECK(c.periods.size() == 8);
  }
}

TEST_CASE("pipeline failures name the stage") {
  TempDir tmp("pipeline_fail");
  synth::SynthConfig scfg;
  scfg.seed = 9;
  scfg.n_periods = 3;
  scfg.n_users = 30;
  scfg.target_submissions = 200;
  const auto paths = synth::write_synthetic_corpus(scfg, tmp.file("in"));
  RunConfig cfg = small_run(paths, tmp.file("out"));
  cfg.gold_labels = {tmp.file("does_not_exist.csv")};
  CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("stage labels"), DataError);
}

TEST_CASE("eq1-verbatim changes polarity artefacts when neutral-only users exist") {
  TempDir tmp("pipeline_eq1");
  synth::SynthConfig scfg;
  scfg.seed = 31;
  scfg.n_periods = 4;
  scfg.n_users = 80;
  scfg.target_submissions = 900;
  const auto paths = synth::write_synthetic_corpus(scfg, tmp.file("in"));

  RunConfig a = small_run(paths, tmp.file("a"));
  RunConfig b = small_run(paths, tmp.file("b"));
  b.eq1_verbatim = true;
  run_pipeline(a);
  run_pipeline(b);
  CHECK(slurp(tmp.file("a") / "polarity.csv") != slurp(tmp.file("b") / "polarity.csv"));
}

TEST_CASE("pipeline runs are byte-identical given the same config") {
  TempDir tmp("pipeline_det");
  synth::SynthConfig scfg;
  scfg.seed = 77;
  scfg.n_periods = 5;
  scfg.n_users = 90;
  scfg.target_submissions = 1200;
  const auto paths = synth::write_synthetic_corpus(scfg, tmp.file("in"));

  run_pipeline(small_run(paths, tmp.file("a")));
  run_pipeline(small_run(paths, tmp.file("b")));

  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(tmp.file("a"))) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), tmp.file("a"));
    CAPTURE(rel.string());
    CHECK(slurp(entry.path()) == slurp(tmp.file("b") / rel));
    ++compared;
  }
  CHECK(compared >= 20);
}
