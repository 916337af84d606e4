#include "polaris/pipeline.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

#include "polaris/corpus_store.hpp"
#include "polaris/csv.hpp"
#include "polaris/errors.hpp"
#include "polaris/parallel.hpp"
#include "polaris/rng.hpp"
#include "polaris/stance.hpp"

namespace polaris {

namespace {

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw DataError("stage " + name + ": " + e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string opt_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

nlohmann::json fractions_json(const PairFractions& f) {
  return {{"like_minded", f.like_minded},
          {"cross_cutting", f.cross_cutting},
          {"neutral", f.neutral},
          {"n_like", f.n_like},
          {"n_cross", f.n_cross},
          {"n_neutral", f.n_neutral},
          {"total", f.total}};
}

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j = nlohmann::json::object();
  if (m.rmse) j["rmse"] = *m.rmse;
  if (m.accuracy) j["accuracy"] = *m.accuracy;
  if (m.macro_f1) j["macro_f1"] = *m.macro_f1;
  return j;
}

void write_cdf_csv(const std::vector<std::pair<double, double>>& cdf,
                   const std::filesystem::path& path, const char* value_header) {
  auto out = open_out(path);
  out << value_header << ",cum_fraction\n";
  for (const auto& [v, f] : cdf) {
    out << format_double(v) << ',' << format_double(f) << '\n';
  }
}

}  // namespace

void write_run_config(const RunConfig& c, const std::filesystem::path& path) {
  nlohmann::json j;
  j["input"] = c.input.string();
  j["periods"] = c.periods.string();
  nlohmann::json gold = nlohmann::json::array(), predicted = nlohmann::json::array();
  for (const auto& p : c.gold_labels) gold.push_back(p.string());
  for (const auto& p : c.predicted_labels) predicted.push_back(p.string());
  j["gold_labels"] = std::move(gold);
  j["predicted_labels"] = std::move(predicted);
  if (c.external_features) j["external_features"] = c.external_features->string();
  // out_dir is deliberately omitted: the directory run.json sits in is the
  // output directory, and keeping it out makes runs byte-comparable.
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["eq1_verbatim"] = c.eq1_verbatim;
  j["include_posts"] = c.include_posts;
  j["store_bodies"] = c.store_bodies;
  j["density_bucket_seconds"] = c.density_bucket_seconds;
  j["polarity_bins"] = c.polarity_bins;
  j["activity_bins"] = c.activity_bins;
  j["degree_bins"] = c.degree_bins;
  j["prolific_percentile"] = c.prolific_percentile;
  j["test_fraction"] = c.test_fraction;
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"max_depth", c.forest.max_depth},
                 {"min_leaf", c.forest.min_leaf},
                 {"feature_fraction", c.forest.feature_fraction},
                 {"seed", c.forest.seed}};
  j["importance_repetitions"] = c.importance_repetitions;
  auto out = open_out(path);
  out << j.dump(1, '\t') << '\n';
}

void write_density_csv(std::span<const DensityRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "bucket_start,posts,comments\n";
  for (const auto& r : rows) {
    out << r.bucket_start << ',' << r.posts << ',' << r.comments << '\n';
  }
}

void write_period_counts_csv(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "period,name,start_utc,end_utc,posts,comments\n";
  const auto counts = period_counts(corpus);
  std::vector<std::string> fields;
  for (std::size_t p = 0; p < corpus.periods.size(); ++p) {
    fields = {std::to_string(p),
              corpus.periods[p].name,
              std::to_string(corpus.periods[p].start_utc),
              std::to_string(corpus.periods[p].end_utc),
              std::to_string(counts[p].first),
              std::to_string(counts[p].second)};
    write_csv_row(out, fields);
  }
}

void write_polarity_csv(std::span<const UserPeriodStats> stats, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "user_id,period,P,N,A,activity,polarity\n";
  std::vector<std::string> fields;
  for (const auto& s : stats) {
    fields = {s.user_id,
              std::to_string(s.period_index),
              std::to_string(s.pro),
              std::to_string(s.neutral),
              std::to_string(s.anti),
              std::to_string(s.activity),
              format_double(s.polarity)};
    write_csv_row(out, fields);
  }
}

void write_polarity_distribution(const PolarityDistribution& dist,
                                 const std::filesystem::path& dir, const std::string& prefix) {
  {
    auto out = open_out(dir / (prefix + "_pdf.csv"));
    out << "bin_lo,bin_hi,count,fraction\n";
    for (const auto& b : dist.pdf) {
      out << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count << ','
          << format_double(b.fraction) << '\n';
    }
  }
  write_cdf_csv(dist.cdf_pro, dir / (prefix + "_cdf_pro.csv"), "abs_polarity");
  write_cdf_csv(dist.cdf_anti, dir / (prefix + "_cdf_anti.csv"), "abs_polarity");
  {
    nlohmann::json j;
    j["n"] = dist.n;
    j["zero_mass"] = dist.zero_mass;
    auto out = open_out(dir / (prefix + "_summary.json"));
    out << j.dump(1, '\t') << '\n';
  }
}

void write_edges_csv(std::span<const InteractionGraph> graphs, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "period,user_a,user_b,weight\n";
  std::vector<std::string> fields;
  for (const auto& g : graphs) {
    for (const auto& e : g.edges) {
      fields = {std::to_string(g.period_index), g.users[e.a], g.users[e.b],
                std::to_string(e.weight)};
      write_csv_row(out, fields);
    }
  }
}

void write_network_metrics_csv(std::span<const InteractionGraph> graphs,
                               std::span<const UserPeriodStats> stats,
                               const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "period,user_id,degree,mean_interaction_polarity,mean_edge_homogeneity\n";
  std::vector<std::string> fields;
  for (const auto& g : graphs) {
    const auto views = node_views(g, polarity_by_user(stats, g.period_index));
    for (std::uint32_t u = 0; u < g.users.size(); ++u) {
      fields = {std::to_string(g.period_index), g.users[u], std::to_string(g.degree(u)),
                opt_double(views[u].mean_interaction_polarity),
                opt_double(views[u].mean_edge_homogeneity)};
      write_csv_row(out, fields);
    }
  }
}

void write_triads_csv(std::span<const InteractionGraph> graphs,
                      std::span<const UserPeriodStats> stats, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "period,class,count\n";
  for (const auto& g : graphs) {
    const TriadCensus census = triad_census(g, polarity_by_user(stats, g.period_index));
    for (int k = 0; k < TriadCensus::kClasses; ++k) {
      out << g.period_index << ',' << TriadCensus::class_labels()[k] << ',' << census.counts[k]
          << '\n';
    }
  }
}

void write_patterns_csv(const PatternTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "pattern,count\n";
  for (const auto& row : table.rows) {
    out << row.pattern << ',' << row.count << '\n';
  }
}

void write_retention_csv(std::span<const RetentionCell> cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "activity_bin,degree_bin,n_users,n_retained,fraction\n";
  for (const auto& c : cells) {
    out << c.activity_bin << ',' << c.degree_bin << ',' << c.n_users << ',' << c.n_retained << ','
        << opt_double(c.fraction) << '\n';
  }
}

void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "feature,mean_degradation,stddev,repetitions\n";
  std::vector<std::string> fields;
  for (const auto& r : report.rows) {
    fields = {r.feature, format_double(r.mean_degradation), format_double(r.stddev),
              std::to_string(report.repetitions)};
    write_csv_row(out, fields);
  }
}

void run_pipeline(const RunConfig& config) {
  namespace fs = std::filesystem;
  const fs::path out = config.out_dir;
  fs::create_directories(out);
  fs::create_directories(out / "predict");
  write_run_config(config, out / "run.json");

  auto log = [](const std::string& stage) { std::cerr << "[polaris] " << stage << "\n"; };

  log("ingest");
  Corpus corpus = run_stage("ingest", [&] { return ingest_jsonl(config.input); });

  log("periods");
  run_stage("periods", [&] {
    assign_periods(corpus, load_periods(config.periods));
    return 0;
  });

  log("labels");
  run_stage("labels", [&] {
    std::vector<LabelSource> sources;
    for (const auto& p : config.gold_labels) sources.push_back(load_label_csv(p, LabelKind::Gold, 0));
    for (const auto& p : config.predicted_labels) {
      sources.push_back(load_label_csv(p, LabelKind::Predicted, 1));
    }
    const MergeReport report = merge_labels(corpus, std::move(sources));
    nlohmann::json j;
    j["loaded"] = corpus.stats.loaded;
    j["posts"] = corpus.stats.posts;
    j["comments"] = corpus.stats.comments;
    j["malformed"] = corpus.stats.malformed;
    j["duplicates"] = corpus.stats.duplicates;
    j["dangling_repaired"] = corpus.stats.dangling_repaired;
    j["labelled"] = report.labelled;
    j["label_ids_unresolved"] = report.unresolved;
    auto f = open_out(out / "ingest_report.json");
    f << j.dump(1, '\t') << '\n';
    return 0;
  });

  run_stage("store", [&] {
    save_corpus(corpus, out / "corpus.bin", config.store_bodies);
    write_density_csv(temporal_density(corpus, config.density_bucket_seconds), out / "density.csv");
    write_period_counts_csv(corpus, out / "period_counts.csv");
    return 0;
  });

  log("polarity");
  PolarityOptions popt;
  popt.variant = config.eq1_verbatim ? PolarityVariant::Verbatim : PolarityVariant::SignCorrected;
  popt.include_posts = config.include_posts;
  std::vector<UserPeriodStats> stats =
      run_stage("polarity", [&] { return compute_all(corpus, popt); });
  run_stage("polarity", [&] {
    write_polarity_csv(stats, out / "polarity.csv");
    write_polarity_distribution(polarity_distribution(stats, config.polarity_bins), out,
                                "polarity");
    return 0;
  });

  log("network");
  std::vector<InteractionGraph> graphs =
      run_stage("network", [&] { return build_all_graphs(corpus, config.threads); });
  run_stage("network", [&] {
    write_edges_csv(graphs, out / "network_edges.csv");
    write_network_metrics_csv(graphs, stats, out / "network_user_metrics.csv");
    write_triads_csv(graphs, stats, out / "triads.csv");

    // pooled echo-chamber report plus per-period breakdown
    nlohmann::json per_period = nlohmann::json::array();
    PairFractions pool_inst, pool_edges, pool_events;
    std::vector<std::pair<double, double>> all_mip, all_meh;
    std::vector<double> mip_values, meh_values;
    for (const auto& g : graphs) {
      const auto views = node_views(g, polarity_by_user(stats, g.period_index));
      const EchoChamberStats es = echo_chamber_stats(g, views);
      nlohmann::json j;
      j["period"] = g.period_index;
      j["by_endpoint_instances"] = fractions_json(es.by_endpoint_instances);
      j["by_edges"] = fractions_json(es.by_edges);
      j["by_events"] = fractions_json(es.by_events);
      j["instances_with_unscored_user"] = es.instances_with_unscored_user;
      per_period.push_back(std::move(j));
      auto pool = [](PairFractions& acc, const PairFractions& f) {
        acc.n_like += f.n_like;
        acc.n_cross += f.n_cross;
        acc.n_neutral += f.n_neutral;
        acc.total += f.total;
      };
      pool(pool_inst, es.by_endpoint_instances);
      pool(pool_edges, es.by_edges);
      pool(pool_events, es.by_events);
      for (const auto& v : views) {
        if (v.mean_interaction_polarity) mip_values.push_back(*v.mean_interaction_polarity);
        if (v.mean_edge_homogeneity) meh_values.push_back(*v.mean_edge_homogeneity);
      }
    }
    auto finish = [](PairFractions& f) {
      if (f.total == 0) return;
      f.like_minded = static_cast<double>(f.n_like) / static_cast<double>(f.total);
      f.cross_cutting = static_cast<double>(f.n_cross) / static_cast<double>(f.total);
      f.neutral = static_cast<double>(f.n_neutral) / static_cast<double>(f.total);
    };
    finish(pool_inst);
    finish(pool_edges);
    finish(pool_events);
    nlohmann::json j;
    j["pooled"] = {{"by_endpoint_instances", fractions_json(pool_inst)},
                   {"by_edges", fractions_json(pool_edges)},
                   {"by_events", fractions_json(pool_events)}};
    j["per_period"] = std::move(per_period);
    auto f = open_out(out / "echo_stats.json");
    f << j.dump(1, '\t') << '\n';

    auto make_cdf = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      std::vector<std::pair<double, double>> cdf;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
        cdf.emplace_back(v[i], static_cast<double>(i + 1) / static_cast<double>(v.size()));
      }
      return cdf;
    };
    write_cdf_csv(make_cdf(std::move(mip_values)), out / "echo_cdf_interaction_polarity.csv",
                  "mean_interaction_polarity");
    write_cdf_csv(make_cdf(std::move(meh_values)), out / "echo_cdf_edge_homogeneity.csv",
                  "mean_edge_homogeneity");
    return 0;
  });

  log("dynamics");
  PresenceMatrix matrix = run_stage("dynamics", [&] { return build_presence(corpus); });
  run_stage("dynamics", [&] {
    const PatternTable patterns = presence_patterns(matrix);
    write_patterns_csv(patterns, out / "patterns.csv");
    write_retention_csv(
        retention_next_period(matrix, stats, graphs, config.activity_bins, config.degree_bins),
        out / "retention.csv");

    const ProlificSets prolific = prolific_users(stats, graphs, config.prolific_percentile);
    {
      auto f = open_out(out / "prolific_summary.csv");
      f << "period,n_prolific,n_by_activity,n_by_degree,n_both,overlap_fraction\n";
      for (std::size_t p = 0; p < prolific.by_period.size(); ++p) {
        const auto& s = prolific.summaries[p];
        f << p << ',' << prolific.by_period[p].size() << ',' << s.n_by_activity << ','
          << s.n_by_degree << ',' << s.n_both << ',' << opt_double(s.overlap_fraction) << '\n';
      }
    }

    nlohmann::json j;
    j["patterns"] = {{"n_users", patterns.n_users},
                     {"single_period_fraction", patterns.single_period_fraction}};
    if (prolific.pooled_overlap_fraction) {
      j["prolific_pooled_overlap_fraction"] = *prolific.pooled_overlap_fraction;
    }
    if (matrix.n_periods >= 2) {
      const ContingencyResult cr = prolific_retention_effect(matrix, graphs, prolific);
      j["prolific_retention"] = {
          {"table", {{cr.table[0][0], cr.table[0][1]}, {cr.table[1][0], cr.table[1][1]}}},
          {"retention_interacted", cr.retention_interacted},
          {"retention_not_interacted", cr.retention_not_interacted},
          {"chi2", cr.chi2},
          {"p_value", cr.p_value},
          {"low_expected_warning", cr.low_expected_warning},
          {"n", cr.n}};
    }
    auto f = open_out(out / "dynamics_summary.json");
    f << j.dump(1, '\t') << '\n';
    return 0;
  });

  log("features");
  FeatureTable features = run_stage("features", [&] {
    ExternalFeatureTable external;
    const ExternalFeatureTable* external_ptr = nullptr;
    if (config.external_features) {
      external = load_external_features(*config.external_features);
      external_ptr = &external;
    }
    FeatureTable t = extract_features(corpus, stats, graphs, external_ptr);
    write_feature_csv(t, out / "features.csv");
    return t;
  });

  log("predict");
  run_stage("predict", [&] {
    for (const PredictionTask task : {PredictionTask::Presence, PredictionTask::FuturePolarity}) {
      const std::string name(task_name(task));
      Dataset dataset = build_dataset(features, stats, matrix, task);
      nlohmann::json j;
      j["task"] = name;
      j["rows"] = dataset.rows.size();
      if (dataset.rows.size() < 10) {
        j["skipped"] = "not enough rows to train";
        auto f = open_out(out / "predict" / (name + "_metrics.json"));
        f << j.dump(1, '\t') << '\n';
        continue;
      }
      split_by_user(dataset, config.test_fraction, config.seed);
      ForestConfig fc = config.forest;
      fc.seed = derive_seed(config.seed, "forest." + name);
      const TreeEnsemble model = train_forest(dataset, fc, config.threads);
      save_model_json(model, out / "predict" / (name + "_model.json"));

      j["train_rows"] = dataset.train_indices().size();
      j["test_rows"] = dataset.test_indices().size();
      j["model"] = metrics_json(evaluate(model, dataset));
      const BaselineReport baselines =
          random_baselines(dataset, derive_seed(config.seed, "baselines." + name));
      nlohmann::json bj = nlohmann::json::object();
      for (const auto& [bname, bm] : baselines.baselines) bj[bname] = metrics_json(bm);
      j["baselines"] = std::move(bj);
      auto f = open_out(out / "predict" / (name + "_metrics.json"));
      f << j.dump(1, '\t') << '\n';

      const ImportanceReport importance = permutation_importance(
          model, dataset, config.importance_repetitions, derive_seed(config.seed, "imp." + name));
      write_importance_csv(importance, out / "predict" / (name + "_importance.csv"));
    }
    return 0;
  });
  log("done");
}

}  // namespace polaris
