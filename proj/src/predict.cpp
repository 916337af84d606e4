#include "polaris/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "polaris/errors.hpp"
#include "polaris/parallel.hpp"
#include "polaris/rng.hpp"
#include "polaris/stats_math.hpp"

namespace polaris {

std::string_view task_name(PredictionTask task) {
  return task == PredictionTask::Presence ? "presence" : "polarity";
}

std::vector<std::size_t> Dataset::train_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (split.empty() || split[i] == 0) idx.push_back(i);
  }
  return idx;
}

std::vector<std::size_t> Dataset::test_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!split.empty() && split[i] == 1) idx.push_back(i);
  }
  return idx;
}

Dataset build_dataset(const FeatureTable& features, std::span<const UserPeriodStats> stats,
                      const PresenceMatrix& matrix, PredictionTask task) {
  Dataset d;
  d.task = task;
  d.feature_names = features.names;

  std::map<std::pair<std::string, int>, double> future_polarity;
  if (task == PredictionTask::FuturePolarity) {
    for (const auto& st : stats) future_polarity[{st.user_id, st.period_index}] = st.polarity;
  }

  const int last_period = static_cast<int>(matrix.n_periods) - 1;
  for (const auto& row : features.rows) {
    if (row.period_index >= last_period) continue;
    DatasetRow r;
    r.user_id = row.user_id;
    r.period_index = row.period_index;
    r.x = row.values;
    r.present = row.present;
    if (task == PredictionTask::Presence) {
      r.target = matrix.is_present(row.user_id, row.period_index + 1) ? 1.0 : 0.0;
    } else {
      auto it = future_polarity.find({row.user_id, row.period_index + 1});
      if (it == future_polarity.end()) continue;  // user absent next period: no target
      r.target = it->second;
    }
    d.rows.push_back(std::move(r));
  }
  return d;
}

void split_by_user(Dataset& dataset, double test_fraction, std::uint64_t seed) {
  std::set<std::string> user_set;
  for (const auto& r : dataset.rows) user_set.insert(r.user_id);
  std::vector<std::string> users(user_set.begin(), user_set.end());
  auto rng = make_rng(seed, "dataset.split");
  std::shuffle(users.begin(), users.end(), rng);

  std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * users.size()));
  if (users.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, users.size() - 1);
  std::set<std::string> test_users(users.begin(), users.begin() + n_test);

  dataset.split.assign(dataset.rows.size(), 0);
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    if (test_users.count(dataset.rows[i].user_id)) dataset.split[i] = 1;
  }
}

namespace {

struct RegAgg {
  double n = 0.0, sum = 0.0, sumsq = 0.0;
  void add(double y) { n += 1.0; sum += y; sumsq += y * y; }
  void merge(const RegAgg& o) { n += o.n; sum += o.sum; sumsq += o.sumsq; }
  // within-node sum of squared deviations
  double impurity() const { return n == 0.0 ? 0.0 : sumsq - sum * sum / n; }
};

struct ClsAgg {
  double n0 = 0.0, n1 = 0.0;
  void add(double y) { (y > 0.5 ? n1 : n0) += 1.0; }
  void merge(const ClsAgg& o) { n0 += o.n0; n1 += o.n1; }
  double n() const { return n0 + n1; }
  // n * gini
  double impurity() const {
    const double t = n();
    return t == 0.0 ? 0.0 : t - (n0 * n0 + n1 * n1) / t;
  }
};

struct TrainContext {
  const Dataset& dataset;
  const ForestConfig& config;
  bool regression = false;
  std::size_t n_features = 0;
};

struct BestSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  bool missing_left = true;
  double score = 0.0;  // total child impurity; lower is better
};

template <typename Agg>
BestSplit search_feature(const TrainContext& ctx, std::span<const std::size_t> rows, int feature,
                         std::vector<std::pair<double, double>>& scratch) {
  BestSplit best;
  scratch.clear();
  Agg missing;
  for (std::size_t ri : rows) {
    const DatasetRow& row = ctx.dataset.rows[ri];
    if (row.present[feature]) scratch.emplace_back(row.x[feature], row.target);
    else missing.add(row.target);
  }
  const std::size_t m = scratch.size();
  if (m < 2) return best;
  std::sort(scratch.begin(), scratch.end());
  if (scratch.front().first == scratch.back().first) return best;

  // prefix aggregates over the sorted non-missing rows
  Agg left;
  Agg total;
  for (const auto& [_, y] : scratch) total.add(y);

  const double min_leaf = static_cast<double>(ctx.config.min_leaf);
  for (std::size_t i = 1; i < m; ++i) {
    left.add(scratch[i - 1].second);
    if (scratch[i - 1].first == scratch[i].first) continue;

    Agg l = left;
    Agg r;
    // right side = total - prefix
    if constexpr (std::is_same_v<Agg, RegAgg>) {
      r.n = total.n - left.n;
      r.sum = total.sum - left.sum;
      r.sumsq = total.sumsq - left.sumsq;
    } else {
      r.n0 = total.n0 - left.n0;
      r.n1 = total.n1 - left.n1;
    }
    // missing rows follow the side holding more non-missing rows
    bool missing_left;
    if constexpr (std::is_same_v<Agg, RegAgg>) {
      missing_left = l.n >= r.n;
    } else {
      missing_left = l.n() >= r.n();
    }
    if (missing_left) l.merge(missing);
    else r.merge(missing);

    double ln, rn;
    if constexpr (std::is_same_v<Agg, RegAgg>) {
      ln = l.n;
      rn = r.n;
    } else {
      ln = l.n();
      rn = r.n();
    }
    if (ln < min_leaf || rn < min_leaf) continue;

    const double score = l.impurity() + r.impurity();
    if (!best.found || score < best.score) {
      best.found = true;
      best.feature = feature;
      best.threshold = (scratch[i - 1].first + scratch[i].first) / 2.0;
      best.missing_left = missing_left;
      best.score = score;
    }
  }
  return best;
}

double leaf_value(const TrainContext& ctx, std::span<const std::size_t> rows) {
  if (ctx.regression) {
    double sum = 0.0;
    for (std::size_t ri : rows) sum += ctx.dataset.rows[ri].target;
    return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  }
  std::size_t n1 = 0;
  for (std::size_t ri : rows) {
    if (ctx.dataset.rows[ri].target > 0.5) ++n1;
  }
  // majority class; an exact tie resolves to class 0
  return n1 * 2 > rows.size() ? 1.0 : 0.0;
}

bool is_pure(const TrainContext& ctx, std::span<const std::size_t> rows) {
  if (rows.empty()) return true;
  const double first = ctx.dataset.rows[rows.front()].target;
  for (std::size_t ri : rows) {
    if (ctx.dataset.rows[ri].target != first) return false;
  }
  return true;
}

std::uint32_t grow(const TrainContext& ctx, Tree& tree, std::vector<std::size_t>& rows, int depth,
                   std::mt19937_64& rng, std::vector<int>& feature_pool,
                   std::vector<std::pair<double, double>>& scratch) {
  const std::uint32_t node_index = static_cast<std::uint32_t>(tree.nodes.size());
  tree.nodes.emplace_back();

  const bool stop = depth >= ctx.config.max_depth ||
                    rows.size() < 2 * static_cast<std::size_t>(ctx.config.min_leaf) ||
                    is_pure(ctx, rows);
  if (!stop) {
    // distinct feature subset, then ascending order so ties break toward the
    // lowest feature index
    const std::size_t d = ctx.n_features;
    std::size_t k = static_cast<std::size_t>(std::llround(ctx.config.feature_fraction * d));
    k = std::clamp<std::size_t>(k, 1, d);
    feature_pool.resize(d);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, d - 1);
      std::swap(feature_pool[i], feature_pool[pick(rng)]);
    }
    std::sort(feature_pool.begin(), feature_pool.begin() + k);

    BestSplit best;
    for (std::size_t fi = 0; fi < k; ++fi) {
      BestSplit candidate =
          ctx.regression ? search_feature<RegAgg>(ctx, rows, feature_pool[fi], scratch)
                         : search_feature<ClsAgg>(ctx, rows, feature_pool[fi], scratch);
      if (candidate.found && (!best.found || candidate.score < best.score)) best = candidate;
    }

    if (best.found) {
      std::vector<std::size_t> left_rows, right_rows;
      left_rows.reserve(rows.size());
      right_rows.reserve(rows.size());
      for (std::size_t ri : rows) {
        const DatasetRow& row = ctx.dataset.rows[ri];
        const bool go_left = row.present[best.feature] ? row.x[best.feature] <= best.threshold
                                                       : best.missing_left;
        (go_left ? left_rows : right_rows).push_back(ri);
      }
      if (!left_rows.empty() && !right_rows.empty()) {
        rows.clear();
        rows.shrink_to_fit();
        const std::uint32_t left = grow(ctx, tree, left_rows, depth + 1, rng, feature_pool, scratch);
        const std::uint32_t right =
            grow(ctx, tree, right_rows, depth + 1, rng, feature_pool, scratch);
        SplitNode& node = tree.nodes[node_index];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.missing_left = best.missing_left;
        node.left = left;
        node.right = right;
        // leaf value fields stay unused on internal nodes
        return node_index;
      }
      // both children non-empty is guaranteed by the min_leaf check, but if
      // a degenerate partition ever slips through, fall back to a leaf over
      // the full node
    }
  }

  tree.nodes[node_index].feature = -1;
  tree.nodes[node_index].value = leaf_value(ctx, rows);
  return node_index;
}

}  // namespace

double Tree::predict(std::span<const double> x, std::span<const std::uint8_t> present) const {
  std::uint32_t node = 0;
  while (!nodes[node].is_leaf()) {
    const SplitNode& n = nodes[node];
    const bool go_left = present[n.feature] ? x[n.feature] <= n.threshold : n.missing_left;
    node = go_left ? n.left : n.right;
  }
  return nodes[node].value;
}

double TreeEnsemble::predict_row(std::span<const double> x,
                                 std::span<const std::uint8_t> present) const {
  if (task == PredictionTask::FuturePolarity) {
    double sum = 0.0;
    for (const Tree& t : trees) sum += t.predict(x, present);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
  }
  std::size_t votes1 = 0;
  for (const Tree& t : trees) {
    if (t.predict(x, present) > 0.5) ++votes1;
  }
  // majority vote; ties resolve to class 0
  return votes1 * 2 > trees.size() ? 1.0 : 0.0;
}

TreeEnsemble train_forest(const Dataset& dataset, const ForestConfig& config, unsigned threads) {
  TreeEnsemble model;
  model.task = dataset.task;
  model.config = config;
  model.feature_names = dataset.feature_names;

  const auto train_idx = dataset.train_indices();
  if (train_idx.size() < 2) throw DataError("train_forest: need at least 2 training rows");
  if (config.n_trees < 1 || config.max_depth < 1 || config.min_leaf < 1) {
    throw DataError("train_forest: invalid forest configuration");
  }

  TrainContext ctx{dataset, config, dataset.task == PredictionTask::FuturePolarity,
                   dataset.feature_names.size()};

  bool constant = true;
  for (std::size_t i : train_idx) {
    if (dataset.rows[i].target != dataset.rows[train_idx.front()].target) {
      constant = false;
      break;
    }
  }
  if (constant) {
    // degenerate: a single-leaf model that always answers the constant
    model.degenerate_constant_target = true;
    Tree t;
    t.nodes.emplace_back();
    t.nodes[0].feature = -1;
    t.nodes[0].value = dataset.rows[train_idx.front()].target;
    model.trees.push_back(std::move(t));
    return model;
  }

  model.trees.resize(config.n_trees);
  parallel_for(config.n_trees, threads, [&](std::size_t ti) {
    auto rng = make_rng(config.seed, "forest.tree", ti);
    std::vector<std::size_t> sample(train_idx.size());
    std::uniform_int_distribution<std::size_t> pick(0, train_idx.size() - 1);
    for (auto& s : sample) s = train_idx[pick(rng)];

    Tree tree;
    std::vector<int> feature_pool;
    std::vector<std::pair<double, double>> scratch;
    grow(ctx, tree, sample, 0, rng, feature_pool, scratch);
    model.trees[ti] = std::move(tree);
  });
  return model;
}

Metrics evaluate_on(const TreeEnsemble& model, const Dataset& dataset,
                    std::span<const std::size_t> indices) {
  if (indices.empty()) throw DataError("evaluate: empty evaluation split");
  Metrics m;
  if (model.task == PredictionTask::FuturePolarity) {
    double se = 0.0;
    for (std::size_t i : indices) {
      const DatasetRow& r = dataset.rows[i];
      const double p = model.predict_row(r.x, r.present);
      se += (p - r.target) * (p - r.target);
    }
    m.rmse = std::sqrt(se / static_cast<double>(indices.size()));
    return m;
  }
  std::uint64_t confusion[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i : indices) {
    const DatasetRow& r = dataset.rows[i];
    const int pred = model.predict_row(r.x, r.present) > 0.5 ? 1 : 0;
    const int actual = r.target > 0.5 ? 1 : 0;
    ++confusion[actual][pred];
  }
  const double n = static_cast<double>(indices.size());
  m.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / n;
  double f1_sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(confusion[c][c]);
    const double actual = static_cast<double>(confusion[c][0] + confusion[c][1]);
    const double predicted = static_cast<double>(confusion[0][c] + confusion[1][c]);
    const double precision = predicted == 0.0 ? 0.0 : tp / predicted;
    const double recall = actual == 0.0 ? 0.0 : tp / actual;
    f1_sum += (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  }
  m.macro_f1 = f1_sum / 2.0;
  return m;
}

Metrics evaluate(const TreeEnsemble& model, const Dataset& dataset) {
  auto idx = dataset.test_indices();
  if (idx.empty()) {
    idx.resize(dataset.rows.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  return evaluate_on(model, dataset, idx);
}

namespace {

Metrics metrics_from_predictions(const Dataset& dataset, std::span<const std::size_t> indices,
                                 std::span<const double> preds, PredictionTask task) {
  Metrics m;
  if (task == PredictionTask::FuturePolarity) {
    double se = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const double d = preds[k] - dataset.rows[indices[k]].target;
      se += d * d;
    }
    m.rmse = std::sqrt(se / static_cast<double>(indices.size()));
    return m;
  }
  std::uint64_t confusion[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const int pred = preds[k] > 0.5 ? 1 : 0;
    const int actual = dataset.rows[indices[k]].target > 0.5 ? 1 : 0;
    ++confusion[actual][pred];
  }
  const double n = static_cast<double>(indices.size());
  m.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / n;
  double f1_sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(confusion[c][c]);
    const double actual = static_cast<double>(confusion[c][0] + confusion[c][1]);
    const double predicted = static_cast<double>(confusion[0][c] + confusion[1][c]);
    const double precision = predicted == 0.0 ? 0.0 : tp / predicted;
    const double recall = actual == 0.0 ? 0.0 : tp / actual;
    f1_sum += (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  }
  m.macro_f1 = f1_sum / 2.0;
  return m;
}

}  // namespace

BaselineReport random_baselines(const Dataset& dataset, std::uint64_t seed) {
  BaselineReport report;
  const auto train_idx = dataset.train_indices();
  auto test_idx = dataset.test_indices();
  if (test_idx.empty()) {
    test_idx.resize(dataset.rows.size());
    std::iota(test_idx.begin(), test_idx.end(), 0);
  }
  if (train_idx.empty() || test_idx.empty()) {
    throw DataError("random_baselines: empty split");
  }

  std::vector<double> preds(test_idx.size(), 0.0);
  if (dataset.task == PredictionTask::FuturePolarity) {
    double mean = 0.0;
    for (std::size_t i : train_idx) mean += dataset.rows[i].target;
    mean /= static_cast<double>(train_idx.size());
    std::fill(preds.begin(), preds.end(), mean);
    report.baselines.emplace_back(
        "train_mean", metrics_from_predictions(dataset, test_idx, preds, dataset.task));

    auto rng = make_rng(seed, "baseline.resample");
    std::uniform_int_distribution<std::size_t> pick(0, train_idx.size() - 1);
    for (auto& p : preds) p = dataset.rows[train_idx[pick(rng)]].target;
    report.baselines.emplace_back(
        "train_resample", metrics_from_predictions(dataset, test_idx, preds, dataset.task));
    return report;
  }

  std::size_t n1 = 0;
  for (std::size_t i : train_idx) {
    if (dataset.rows[i].target > 0.5) ++n1;
  }
  const double majority = n1 * 2 > train_idx.size() ? 1.0 : 0.0;
  std::fill(preds.begin(), preds.end(), majority);
  report.baselines.emplace_back("majority_class",
                                metrics_from_predictions(dataset, test_idx, preds, dataset.task));

  auto rng = make_rng(seed, "baseline.uniform");
  std::uniform_int_distribution<int> coin(0, 1);
  for (auto& p : preds) p = static_cast<double>(coin(rng));
  report.baselines.emplace_back("uniform_random",
                                metrics_from_predictions(dataset, test_idx, preds, dataset.task));
  return report;
}

ImportanceReport permutation_importance(const TreeEnsemble& model, const Dataset& dataset,
                                        int repetitions, std::uint64_t seed) {
  if (repetitions < 1) throw DataError("permutation_importance: repetitions must be >= 1");
  auto test_idx = dataset.test_indices();
  if (test_idx.empty()) {
    test_idx.resize(dataset.rows.size());
    std::iota(test_idx.begin(), test_idx.end(), 0);
  }
  const bool regression = model.task == PredictionTask::FuturePolarity;

  const Metrics base = evaluate_on(model, dataset, test_idx);
  const double base_metric = regression ? *base.rmse : *base.accuracy;

  ImportanceReport report;
  report.metric = regression ? "rmse" : "accuracy";
  report.repetitions = repetitions;

  const std::size_t n = test_idx.size();
  std::vector<double> col_values(n);
  std::vector<std::uint8_t> col_present(n);
  std::vector<std::size_t> perm(n);
  std::vector<double> x_buf;
  std::vector<std::uint8_t> p_buf;

  for (std::size_t f = 0; f < dataset.feature_names.size(); ++f) {
    std::vector<double> degradations;
    degradations.reserve(repetitions);
    for (int rep = 0; rep < repetitions; ++rep) {
      auto rng = make_rng(seed, "importance", f * 1000003ull + static_cast<std::uint64_t>(rep));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t k = 0; k < n; ++k) {
        const DatasetRow& src = dataset.rows[test_idx[perm[k]]];
        col_values[k] = src.x[f];
        col_present[k] = src.present[f];
      }
      std::vector<double> preds(n);
      for (std::size_t k = 0; k < n; ++k) {
        const DatasetRow& r = dataset.rows[test_idx[k]];
        x_buf = r.x;
        p_buf = r.present;
        x_buf[f] = col_values[k];
        p_buf[f] = col_present[k];
        preds[k] = model.predict_row(x_buf, p_buf);
      }
      const Metrics m = metrics_from_predictions(dataset, test_idx, preds, model.task);
      const double metric = regression ? *m.rmse : *m.accuracy;
      degradations.push_back(regression ? metric - base_metric : base_metric - metric);
    }
    FeatureImportance fi;
    fi.feature = dataset.feature_names[f];
    fi.mean_degradation = mean_of(degradations);
    fi.stddev = sample_stddev(degradations);
    report.rows.push_back(std::move(fi));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) {
                     return a.mean_degradation > b.mean_degradation;
                   });
  return report;
}

void save_model_json(const TreeEnsemble& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "polaris-forest-v1";
  j["task"] = std::string(task_name(model.task));
  j["feature_names"] = model.feature_names;
  j["config"] = {{"n_trees", model.config.n_trees},
                 {"max_depth", model.config.max_depth},
                 {"min_leaf", model.config.min_leaf},
                 {"feature_fraction", model.config.feature_fraction},
                 {"seed", model.config.seed}};
  j["degenerate_constant_target"] = model.degenerate_constant_target;
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const SplitNode& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.missing_left, n.left, n.right, n.value});
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out << j.dump(1, '\t') << '\n';
}

TreeEnsemble load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file is not valid JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "polaris-forest-v1") {
    throw DataError("unsupported model format in " + path.string());
  }
  TreeEnsemble model;
  model.task = j.at("task").get<std::string>() == "presence" ? PredictionTask::Presence
                                                             : PredictionTask::FuturePolarity;
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto& cfg = j.at("config");
  model.config.n_trees = cfg.at("n_trees").get<int>();
  model.config.max_depth = cfg.at("max_depth").get<int>();
  model.config.min_leaf = cfg.at("min_leaf").get<int>();
  model.config.feature_fraction = cfg.at("feature_fraction").get<double>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();
  model.degenerate_constant_target = j.value("degenerate_constant_target", false);
  for (const auto& tj : j.at("trees")) {
    Tree t;
    for (const auto& nj : tj.at("nodes")) {
      SplitNode n;
      n.feature = nj.at(0).get<int>();
      n.threshold = nj.at(1).get<double>();
      n.missing_left = nj.at(2).get<bool>();
      n.left = nj.at(3).get<std::uint32_t>();
      n.right = nj.at(4).get<std::uint32_t>();
      n.value = nj.at(5).get<double>();
      t.nodes.push_back(n);
    }
    model.trees.push_back(std::move(t));
  }
  return model;
}

}  // namespace polaris
