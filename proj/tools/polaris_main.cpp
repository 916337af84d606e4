// polaris: batch analytics for polarisation dynamics on threaded discussion
// corpora. Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polaris/annotation.hpp"
#include "polaris/corpus_store.hpp"
#include "polaris/csv.hpp"
#include "polaris/dynamics.hpp"
#include "polaris/errors.hpp"
#include "polaris/features.hpp"
#include "polaris/network.hpp"
#include "polaris/pipeline.hpp"
#include "polaris/polarity.hpp"
#include "polaris/predict.hpp"
#include "polaris/rng.hpp"
#include "polaris/stance.hpp"

namespace fs = std::filesystem;
using namespace polaris;

namespace {

struct PolarityFlags {
  bool eq1_verbatim = false;
  bool include_posts = false;

  PolarityOptions options() const {
    PolarityOptions o;
    o.variant = eq1_verbatim ? PolarityVariant::Verbatim : PolarityVariant::SignCorrected;
    o.include_posts = include_posts;
    return o;
  }
};

void add_polarity_flags(CLI::App* cmd, PolarityFlags& flags) {
  cmd->add_flag("--eq1-verbatim", flags.eq1_verbatim,
                "score polarity with the uncorrected second term N/(N+A) instead of A/(N+A) "
                "(for comparison; sends all-neutral users to -1)");
  cmd->add_flag("--include-posts", flags.include_posts,
                "count posts like comments in activity and stance counts");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

nlohmann::json eval_json(const EvalResult& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  static const char* names[] = {"pro", "anti", "neutral"};
  nlohmann::json pc = nlohmann::json::object();
  for (int c = 0; c < kNumStances; ++c) {
    pc[names[c]] = {{"precision", r.per_class[c].precision},
                    {"recall", r.per_class[c].recall},
                    {"f1", r.per_class[c].f1},
                    {"support", r.per_class[c].support}};
  }
  j["per_class"] = std::move(pc);
  j["confusion"] = {{r.confusion[0][0], r.confusion[0][1], r.confusion[0][2]},
                    {r.confusion[1][0], r.confusion[1][1], r.confusion[1][2]},
                    {r.confusion[2][0], r.confusion[2][1], r.confusion[2][2]}};
  return j;
}

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j = nlohmann::json::object();
  if (m.rmse) j["rmse"] = *m.rmse;
  if (m.accuracy) j["accuracy"] = *m.accuracy;
  if (m.macro_f1) j["macro_f1"] = *m.macro_f1;
  return j;
}

void run_qa(const std::string& records_path, double min_iaa, double map_flag, double map_allow,
            unsigned min_annotations, const std::string& out_dir) {
  const auto records = read_annotation_csv(records_path);
  const auto items = item_agreement(records);
  const auto workers = worker_map(records);
  const auto malicious = flag_malicious(workers, map_flag);
  const auto allowlist = build_allowlist(workers, map_allow, min_annotations);
  const FilterResult filtered = low_confidence_filter(items, min_iaa);
  const auto gold = majority_labels(filtered.kept);

  fs::create_directories(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "items.csv");
    out << "item_id,n_annotations,majority_label,majority_count,iaa,kept\n";
    std::vector<std::string> fields;
    for (const auto& it : items) {
      fields = {it.item_id,
                std::to_string(it.n_annotations),
                it.majority_label ? std::string(stance_name(*it.majority_label)) : std::string(),
                std::to_string(it.majority_count),
                format_double(it.iaa),
                it.iaa < min_iaa ? "0" : "1"};
      write_csv_row(out, fields);
    }
  }
  {
    auto out = open_out(fs::path(out_dir) / "workers.csv");
    out << "worker_id,n_annotations,n_usable,map,malicious,allowlisted\n";
    std::vector<std::string> fields;
    for (const auto& w : workers) {
      fields = {w.worker_id,
                std::to_string(w.n_annotations),
                std::to_string(w.n_usable),
                w.map ? format_double(*w.map) : std::string(),
                malicious.count(w.worker_id) ? "1" : "0",
                allowlist.count(w.worker_id) ? "1" : "0"};
      write_csv_row(out, fields);
    }
  }
  {
    auto out = open_out(fs::path(out_dir) / "gold.csv");
    out << "item_id,label\n";
    std::vector<std::string> fields;
    for (const auto& [id, label] : gold) {
      fields = {id, std::string(stance_name(label))};
      write_csv_row(out, fields);
    }
  }
  nlohmann::json j;
  j["n_records"] = records.size();
  j["n_items"] = items.size();
  j["n_workers"] = workers.size();
  j["dataset_iaa"] = dataset_iaa(items);
  j["dataset_iaa_filtered"] = dataset_iaa(filtered.kept);
  j["items_kept"] = filtered.kept.size();
  j["items_discarded"] = filtered.discarded.size();
  j["workers_flagged_malicious"] = malicious.size();
  j["workers_allowlisted"] = allowlist.size();
  {
    auto out = open_out(fs::path(out_dir) / "summary.json");
    out << j.dump(1, '\t') << '\n';
  }
  std::cout << j.dump(1, '\t') << '\n';
}

struct PredictInputs {
  Corpus corpus;
  std::vector<UserPeriodStats> stats;
  PresenceMatrix matrix;
  Dataset dataset;
};

PredictInputs load_predict_inputs(const std::string& store, const std::string& features_path,
                                  const std::string& task_str, const PolarityFlags& flags,
                                  double test_fraction, std::uint64_t seed) {
  PredictInputs in;
  in.corpus = load_corpus(store);
  in.stats = compute_all(in.corpus, flags.options());
  in.matrix = build_presence(in.corpus);
  const PredictionTask task =
      task_str == "presence" ? PredictionTask::Presence : PredictionTask::FuturePolarity;
  const FeatureTable features = read_feature_csv(features_path);
  in.dataset = build_dataset(features, in.stats, in.matrix, task);
  if (in.dataset.rows.empty()) throw DataError("prediction dataset is empty");
  split_by_user(in.dataset, test_fraction, seed);
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polarisation dynamics analytics on threaded discussion corpora"};
  app.require_subcommand(1);

  int exit_code = 0;

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "parse a JSONL dump and build the corpus store");
  std::string ingest_input, ingest_periods, ingest_out;
  bool ingest_store_bodies = false;
  ingest_cmd->add_option("--input", ingest_input, "submissions JSONL")->required();
  ingest_cmd->add_option("--periods", ingest_periods, "period config JSON")->required();
  ingest_cmd->add_option("--out", ingest_out, "corpus store file to write")->required();
  ingest_cmd->add_flag("--store-bodies", ingest_store_bodies, "keep submission bodies in the store");
  ingest_cmd->callback([&] {
    Corpus corpus = ingest_jsonl(ingest_input);
    assign_periods(corpus, load_periods(ingest_periods));
    save_corpus(corpus, ingest_out, ingest_store_bodies);
    std::cerr << "loaded " << corpus.stats.loaded << " submissions (" << corpus.stats.posts
              << " posts, " << corpus.stats.comments << " comments), " << corpus.stats.malformed
              << " malformed lines, " << corpus.stats.duplicates << " duplicate ids, "
              << corpus.stats.dangling_repaired << " dangling parents repaired\n";
  });

  // qa
  auto* qa_cmd = app.add_subcommand("qa", "annotation quality control reports");
  std::string qa_records, qa_out = ".";
  double qa_min_iaa = 0.6, qa_map_flag = 0.25, qa_map_allow = 0.5;
  unsigned qa_min_annotations = 20;
  qa_cmd->add_option("--records", qa_records, "annotation CSV (item_id,worker_id,label)")
      ->required();
  qa_cmd->add_option("--min-iaa", qa_min_iaa, "low-confidence filter threshold");
  qa_cmd->add_option("--map-flag", qa_map_flag, "malicious-worker MAP threshold");
  qa_cmd->add_option("--map-allow", qa_map_allow, "allowlist MAP threshold");
  qa_cmd->add_option("--min-annotations", qa_min_annotations, "allowlist annotation minimum");
  qa_cmd->add_option("--out", qa_out, "report directory");
  qa_cmd->callback([&] {
    run_qa(qa_records, qa_min_iaa, qa_map_flag, qa_map_allow, qa_min_annotations, qa_out);
  });

  // labels merge|eval
  auto* labels_cmd = app.add_subcommand("labels", "stance label handling");
  labels_cmd->require_subcommand(1);
  auto* merge_cmd = labels_cmd->add_subcommand("merge", "merge stance labels onto the corpus store");
  std::string merge_store, merge_out;
  std::vector<std::string> merge_gold, merge_predicted;
  merge_cmd->add_option("--store", merge_store, "corpus store")->required();
  merge_cmd->add_option("--gold", merge_gold, "gold label CSV (highest priority)");
  merge_cmd->add_option("--predicted", merge_predicted, "predicted label CSV");
  merge_cmd->add_option("--out", merge_out, "store to write (default: overwrite --store)");
  merge_cmd->callback([&] {
    Corpus corpus = load_corpus(merge_store);
    std::vector<LabelSource> sources;
    for (const auto& p : merge_gold) sources.push_back(load_label_csv(p, LabelKind::Gold, 0));
    for (const auto& p : merge_predicted) {
      sources.push_back(load_label_csv(p, LabelKind::Predicted, 1));
    }
    if (sources.empty()) throw DataError("labels merge: no label files given");
    const MergeReport report = merge_labels(corpus, std::move(sources));
    save_corpus(corpus, merge_out.empty() ? merge_store : merge_out);
    std::cerr << "labelled " << report.labelled << " submissions, " << report.unresolved
              << " label ids unresolved\n";
  });

  auto* eval_cmd = labels_cmd->add_subcommand("eval", "score predictions against gold labels");
  std::string eval_gold, eval_predicted, eval_out;
  eval_cmd->add_option("--gold", eval_gold, "gold label CSV")->required();
  eval_cmd->add_option("--predicted", eval_predicted, "predicted label CSV")->required();
  eval_cmd->add_option("--out", eval_out, "write the metrics JSON here instead of stdout");
  eval_cmd->callback([&] {
    const LabelSource gold = load_label_csv(eval_gold, LabelKind::Gold, 0);
    const LabelSource predicted = load_label_csv(eval_predicted, LabelKind::Predicted, 1);
    const nlohmann::json j = eval_json(eval_classifier(gold.assignments, predicted.assignments));
    if (eval_out.empty()) {
      std::cout << j.dump(1, '\t') << '\n';
    } else {
      auto out = open_out(eval_out);
      out << j.dump(1, '\t') << '\n';
    }
  });

  // polarity compute|dist
  auto* polarity_cmd = app.add_subcommand("polarity", "continuous polarity per user-period");
  polarity_cmd->require_subcommand(1);
  auto* pcompute_cmd = polarity_cmd->add_subcommand("compute", "write the polarity table");
  std::string pcompute_store, pcompute_out;
  PolarityFlags pcompute_flags;
  pcompute_cmd->add_option("--store", pcompute_store, "corpus store")->required();
  pcompute_cmd->add_option("--out", pcompute_out, "polarity CSV to write")->required();
  add_polarity_flags(pcompute_cmd, pcompute_flags);
  pcompute_cmd->callback([&] {
    const Corpus corpus = load_corpus(pcompute_store);
    write_polarity_csv(compute_all(corpus, pcompute_flags.options()), pcompute_out);
  });

  auto* pdist_cmd = polarity_cmd->add_subcommand("dist", "polarity distribution tables");
  std::string pdist_store, pdist_out = ".";
  int pdist_bins = 40;
  PolarityFlags pdist_flags;
  pdist_cmd->add_option("--store", pdist_store, "corpus store")->required();
  pdist_cmd->add_option("--out", pdist_out, "output directory");
  pdist_cmd->add_option("--bins", pdist_bins, "histogram bin count");
  add_polarity_flags(pdist_cmd, pdist_flags);
  pdist_cmd->callback([&] {
    const Corpus corpus = load_corpus(pdist_store);
    const auto stats = compute_all(corpus, pdist_flags.options());
    fs::create_directories(pdist_out);
    write_polarity_distribution(polarity_distribution(stats, pdist_bins), pdist_out, "polarity");
  });

  // network build|stats|triads
  auto* network_cmd = app.add_subcommand("network", "per-period interaction graphs");
  network_cmd->require_subcommand(1);
  unsigned network_threads = 0;

  auto* nbuild_cmd = network_cmd->add_subcommand("build", "write the edge list");
  std::string nbuild_store, nbuild_out;
  nbuild_cmd->add_option("--store", nbuild_store, "corpus store")->required();
  nbuild_cmd->add_option("--out", nbuild_out, "edge CSV to write")->required();
  nbuild_cmd->add_option("--threads", network_threads, "worker cap (0 = all cores)");
  nbuild_cmd->callback([&] {
    const Corpus corpus = load_corpus(nbuild_store);
    write_edges_csv(build_all_graphs(corpus, network_threads), nbuild_out);
  });

  auto* nstats_cmd = network_cmd->add_subcommand("stats", "per-user network metrics");
  std::string nstats_store, nstats_out;
  PolarityFlags nstats_flags;
  nstats_cmd->add_option("--store", nstats_store, "corpus store")->required();
  nstats_cmd->add_option("--out", nstats_out, "metrics CSV to write")->required();
  nstats_cmd->add_option("--threads", network_threads, "worker cap (0 = all cores)");
  add_polarity_flags(nstats_cmd, nstats_flags);
  nstats_cmd->callback([&] {
    const Corpus corpus = load_corpus(nstats_store);
    const auto stats = compute_all(corpus, nstats_flags.options());
    write_network_metrics_csv(build_all_graphs(corpus, network_threads), stats, nstats_out);
  });

  auto* ntriads_cmd = network_cmd->add_subcommand("triads", "stance-sign triangle census");
  std::string ntriads_store, ntriads_out;
  PolarityFlags ntriads_flags;
  ntriads_cmd->add_option("--store", ntriads_store, "corpus store")->required();
  ntriads_cmd->add_option("--out", ntriads_out, "census CSV to write")->required();
  ntriads_cmd->add_option("--threads", network_threads, "worker cap (0 = all cores)");
  add_polarity_flags(ntriads_cmd, ntriads_flags);
  ntriads_cmd->callback([&] {
    const Corpus corpus = load_corpus(ntriads_store);
    const auto stats = compute_all(corpus, ntriads_flags.options());
    write_triads_csv(build_all_graphs(corpus, network_threads), stats, ntriads_out);
  });

  // dynamics patterns|retention|prolific
  auto* dynamics_cmd = app.add_subcommand("dynamics", "survivorship analytics");
  dynamics_cmd->require_subcommand(1);

  auto* patterns_cmd = dynamics_cmd->add_subcommand("patterns", "presence pattern frequencies");
  std::string patterns_store, patterns_out;
  patterns_cmd->add_option("--store", patterns_store, "corpus store")->required();
  patterns_cmd->add_option("--out", patterns_out, "pattern CSV to write")->required();
  patterns_cmd->callback([&] {
    const Corpus corpus = load_corpus(patterns_store);
    const PatternTable table = presence_patterns(build_presence(corpus));
    write_patterns_csv(table, patterns_out);
    std::cerr << table.n_users << " users, single-period fraction "
              << format_double(table.single_period_fraction) << "\n";
  });

  auto* retention_cmd = dynamics_cmd->add_subcommand("retention", "next-period retention heatmap");
  std::string retention_store, retention_out;
  int retention_abins = 20, retention_dbins = 20;
  PolarityFlags retention_flags;
  retention_cmd->add_option("--store", retention_store, "corpus store")->required();
  retention_cmd->add_option("--out", retention_out, "heatmap CSV to write")->required();
  retention_cmd->add_option("--activity-bins", retention_abins, "activity percentile bins");
  retention_cmd->add_option("--degree-bins", retention_dbins, "degree percentile bins");
  add_polarity_flags(retention_cmd, retention_flags);
  retention_cmd->callback([&] {
    const Corpus corpus = load_corpus(retention_store);
    const auto stats = compute_all(corpus, retention_flags.options());
    const auto graphs = build_all_graphs(corpus);
    write_retention_csv(
        retention_next_period(build_presence(corpus), stats, graphs, retention_abins,
                              retention_dbins),
        retention_out);
  });

  auto* prolific_cmd = dynamics_cmd->add_subcommand("prolific", "prolific users and their effect");
  std::string prolific_store, prolific_out = ".";
  double prolific_pct = 0.99;
  PolarityFlags prolific_flags;
  prolific_cmd->add_option("--store", prolific_store, "corpus store")->required();
  prolific_cmd->add_option("--out", prolific_out, "output directory");
  prolific_cmd->add_option("--percentile", prolific_pct, "prolific cutoff as a fraction");
  add_polarity_flags(prolific_cmd, prolific_flags);
  prolific_cmd->callback([&] {
    const Corpus corpus = load_corpus(prolific_store);
    const auto stats = compute_all(corpus, prolific_flags.options());
    const auto graphs = build_all_graphs(corpus);
    const PresenceMatrix matrix = build_presence(corpus);
    const ProlificSets prolific = prolific_users(stats, graphs, prolific_pct);
    fs::create_directories(prolific_out);
    {
      auto out = open_out(fs::path(prolific_out) / "prolific_summary.csv");
      out << "period,n_prolific,n_by_activity,n_by_degree,n_both,overlap_fraction\n";
      for (std::size_t p = 0; p < prolific.by_period.size(); ++p) {
        const auto& s = prolific.summaries[p];
        out << p << ',' << prolific.by_period[p].size() << ',' << s.n_by_activity << ','
            << s.n_by_degree << ',' << s.n_both << ','
            << (s.overlap_fraction ? format_double(*s.overlap_fraction) : std::string()) << '\n';
      }
    }
    nlohmann::json j;
    if (matrix.n_periods >= 2) {
      const ContingencyResult cr = prolific_retention_effect(matrix, graphs, prolific);
      j["table"] = {{cr.table[0][0], cr.table[0][1]}, {cr.table[1][0], cr.table[1][1]}};
      j["retention_interacted"] = cr.retention_interacted;
      j["retention_not_interacted"] = cr.retention_not_interacted;
      j["chi2"] = cr.chi2;
      j["p_value"] = cr.p_value;
      j["low_expected_warning"] = cr.low_expected_warning;
      j["n"] = cr.n;
    } else {
      j["skipped"] = "need at least 2 periods";
    }
    auto out = open_out(fs::path(prolific_out) / "contingency.json");
    out << j.dump(1, '\t') << '\n';
  });

  // features extract
  auto* features_cmd = app.add_subcommand("features", "per-user-period feature vectors");
  features_cmd->require_subcommand(1);
  auto* extract_cmd = features_cmd->add_subcommand("extract", "write the feature table");
  std::string extract_store, extract_out, extract_f0;
  PolarityFlags extract_flags;
  extract_cmd->add_option("--store", extract_store, "corpus store")->required();
  extract_cmd->add_option("--out", extract_out, "feature CSV to write")->required();
  extract_cmd->add_option("--f0", extract_f0, "external numeric feature CSV to join");
  add_polarity_flags(extract_cmd, extract_flags);
  extract_cmd->callback([&] {
    const Corpus corpus = load_corpus(extract_store);
    const auto stats = compute_all(corpus, extract_flags.options());
    const auto graphs = build_all_graphs(corpus);
    ExternalFeatureTable external;
    const ExternalFeatureTable* external_ptr = nullptr;
    if (!extract_f0.empty()) {
      external = load_external_features(extract_f0);
      external_ptr = &external;
    }
    write_feature_csv(extract_features(corpus, stats, graphs, external_ptr), extract_out);
  });

  // predict train|eval|baselines|importance
  auto* predict_cmd = app.add_subcommand("predict", "future presence / polarity harness");
  predict_cmd->require_subcommand(1);
  std::string predict_store, predict_features, predict_task = "presence", predict_model;
  double predict_test_fraction = 0.2;
  std::uint64_t predict_seed = 1;
  PolarityFlags predict_flags;
  auto add_predict_common = [&](CLI::App* cmd) {
    cmd->add_option("--store", predict_store, "corpus store")->required();
    cmd->add_option("--features", predict_features, "feature CSV")->required();
    cmd->add_option("--task", predict_task, "presence or polarity")
        ->check(CLI::IsMember({"presence", "polarity"}));
    cmd->add_option("--test-fraction", predict_test_fraction, "grouped holdout fraction");
    cmd->add_option("--seed", predict_seed, "root seed");
    add_polarity_flags(cmd, predict_flags);
  };

  auto* train_cmd = predict_cmd->add_subcommand("train", "train and evaluate a forest");
  ForestConfig train_config;
  unsigned train_threads = 0;
  add_predict_common(train_cmd);
  train_cmd->add_option("--model", predict_model, "model JSON to write")->required();
  train_cmd->add_option("--trees", train_config.n_trees, "number of trees");
  train_cmd->add_option("--max-depth", train_config.max_depth, "tree depth cap");
  train_cmd->add_option("--min-leaf", train_config.min_leaf, "minimum rows per leaf");
  train_cmd->add_option("--feature-fraction", train_config.feature_fraction,
                        "features tried per split");
  train_cmd->add_option("--threads", train_threads, "worker cap (0 = all cores)");
  train_cmd->callback([&] {
    PredictInputs in = load_predict_inputs(predict_store, predict_features, predict_task,
                                           predict_flags, predict_test_fraction, predict_seed);
    train_config.seed = derive_seed(predict_seed, "forest." + predict_task);
    const TreeEnsemble model = train_forest(in.dataset, train_config, train_threads);
    save_model_json(model, predict_model);
    std::cout << metrics_json(evaluate(model, in.dataset)).dump(1, '\t') << '\n';
  });

  auto* peval_cmd = predict_cmd->add_subcommand("eval", "evaluate a saved model");
  add_predict_common(peval_cmd);
  peval_cmd->add_option("--model", predict_model, "model JSON to load")->required();
  peval_cmd->callback([&] {
    PredictInputs in = load_predict_inputs(predict_store, predict_features, predict_task,
                                           predict_flags, predict_test_fraction, predict_seed);
    const TreeEnsemble model = load_model_json(predict_model);
    std::cout << metrics_json(evaluate(model, in.dataset)).dump(1, '\t') << '\n';
  });

  auto* baselines_cmd = predict_cmd->add_subcommand("baselines", "random baseline metrics");
  add_predict_common(baselines_cmd);
  baselines_cmd->callback([&] {
    PredictInputs in = load_predict_inputs(predict_store, predict_features, predict_task,
                                           predict_flags, predict_test_fraction, predict_seed);
    const BaselineReport report =
        random_baselines(in.dataset, derive_seed(predict_seed, "baselines." + predict_task));
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, m] : report.baselines) j[name] = metrics_json(m);
    std::cout << j.dump(1, '\t') << '\n';
  });

  auto* importance_cmd = predict_cmd->add_subcommand("importance", "permutation feature importance");
  int importance_reps = 5;
  std::string importance_out;
  add_predict_common(importance_cmd);
  importance_cmd->add_option("--model", predict_model, "model JSON to load")->required();
  importance_cmd->add_option("--repetitions", importance_reps, "shuffles per feature");
  importance_cmd->add_option("--out", importance_out, "importance CSV to write");
  importance_cmd->callback([&] {
    PredictInputs in = load_predict_inputs(predict_store, predict_features, predict_task,
                                           predict_flags, predict_test_fraction, predict_seed);
    const TreeEnsemble model = load_model_json(predict_model);
    const ImportanceReport report = permutation_importance(
        model, in.dataset, importance_reps, derive_seed(predict_seed, "imp." + predict_task));
    if (importance_out.empty()) {
      for (const auto& r : report.rows) {
        std::cout << r.feature << ',' << format_double(r.mean_degradation) << ','
                  << format_double(r.stddev) << '\n';
      }
    } else {
      write_importance_csv(report, importance_out);
    }
  });

  // pipeline
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage end to end");
  RunConfig run;
  std::string pl_input, pl_periods, pl_out, pl_f0;
  std::vector<std::string> pl_gold, pl_predicted;
  pipeline_cmd->add_option("--input", pl_input, "submissions JSONL")->required();
  pipeline_cmd->add_option("--periods", pl_periods, "period config JSON")->required();
  pipeline_cmd->add_option("--out", pl_out, "artefact directory")->required();
  pipeline_cmd->add_option("--gold", pl_gold, "gold label CSV");
  pipeline_cmd->add_option("--predicted", pl_predicted, "predicted label CSV");
  pipeline_cmd->add_option("--f0", pl_f0, "external numeric feature CSV");
  pipeline_cmd->add_option("--seed", run.seed, "root seed");
  pipeline_cmd->add_option("--threads", run.threads, "worker cap (0 = all cores)");
  pipeline_cmd->add_flag("--eq1-verbatim", run.eq1_verbatim,
                         "score polarity with the uncorrected second term N/(N+A)");
  pipeline_cmd->add_flag("--include-posts", run.include_posts,
                         "count posts like comments in activity and stance counts");
  pipeline_cmd->add_flag("--store-bodies", run.store_bodies, "keep bodies in the corpus store");
  pipeline_cmd->add_option("--density-bucket", run.density_bucket_seconds,
                           "temporal density bucket (seconds)");
  pipeline_cmd->add_option("--polarity-bins", run.polarity_bins, "polarity histogram bins");
  pipeline_cmd->add_option("--activity-bins", run.activity_bins, "retention activity bins");
  pipeline_cmd->add_option("--degree-bins", run.degree_bins, "retention degree bins");
  pipeline_cmd->add_option("--prolific-percentile", run.prolific_percentile,
                           "prolific cutoff as a fraction");
  pipeline_cmd->add_option("--test-fraction", run.test_fraction, "grouped holdout fraction");
  pipeline_cmd->add_option("--trees", run.forest.n_trees, "forest size");
  pipeline_cmd->add_option("--max-depth", run.forest.max_depth, "tree depth cap");
  pipeline_cmd->add_option("--min-leaf", run.forest.min_leaf, "minimum rows per leaf");
  pipeline_cmd->add_option("--feature-fraction", run.forest.feature_fraction,
                           "features tried per split");
  pipeline_cmd->add_option("--importance-repetitions", run.importance_repetitions,
                           "shuffles per feature");
  pipeline_cmd->callback([&] {
    run.input = pl_input;
    run.periods = pl_periods;
    run.out_dir = pl_out;
    for (const auto& p : pl_gold) run.gold_labels.emplace_back(p);
    for (const auto& p : pl_predicted) run.predicted_labels.emplace_back(p);
    if (!pl_f0.empty()) run.external_features = pl_f0;
    run_pipeline(run);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return exit_code;
}
