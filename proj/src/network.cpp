#include "polaris/network.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "polaris/parallel.hpp"

namespace polaris {

namespace {

InteractionGraph finish_graph(int period_index, std::vector<std::string> users,
                              std::map<std::pair<std::string, std::string>, std::uint32_t> weights) {
  InteractionGraph g;
  g.period_index = period_index;
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  g.users = std::move(users);
  g.index.reserve(g.users.size() * 2);
  for (std::uint32_t i = 0; i < g.users.size(); ++i) g.index.emplace(g.users[i], i);

  g.edges.reserve(weights.size());
  for (const auto& [pair, w] : weights) {
    std::uint32_t a = g.index.at(pair.first);
    std::uint32_t b = g.index.at(pair.second);
    if (a > b) std::swap(a, b);
    g.edges.push_back({a, b, w});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& x, const auto& y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });

  g.adjacency.resize(g.users.size());
  g.adjacency_weight.resize(g.users.size());
  for (const auto& e : g.edges) {
    g.adjacency[e.a].push_back(e.b);
    g.adjacency_weight[e.a].push_back(e.weight);
    g.adjacency[e.b].push_back(e.a);
    g.adjacency_weight[e.b].push_back(e.weight);
  }
  // Sort each adjacency list by neighbour id, keeping weights aligned.
  for (std::size_t u = 0; u < g.adjacency.size(); ++u) {
    auto& nbrs = g.adjacency[u];
    auto& wts = g.adjacency_weight[u];
    std::vector<std::size_t> order(nbrs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return nbrs[i] < nbrs[j]; });
    std::vector<std::uint32_t> sorted_nbrs(nbrs.size()), sorted_wts(nbrs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      sorted_nbrs[k] = nbrs[order[k]];
      sorted_wts[k] = wts[order[k]];
    }
    nbrs = std::move(sorted_nbrs);
    wts = std::move(sorted_wts);
  }
  return g;
}

std::pair<std::string, std::string> ordered_pair(const std::string& u, const std::string& v) {
  return u <= v ? std::pair(u, v) : std::pair(v, u);
}

}  // namespace

InteractionGraph build_graph(const Corpus& corpus, int period_index) {
  std::vector<std::string> users;
  std::map<std::pair<std::string, std::string>, std::uint32_t> weights;

  for (std::size_t i = 0; i < corpus.submissions.size(); ++i) {
    if (corpus.period_of[i] != period_index) continue;
    const Submission& s = corpus.submissions[i];
    const bool deleted = is_deleted_author(s.author_id);
    if (!deleted) users.push_back(s.author_id);
    if (s.kind != SubmissionKind::Comment || deleted) continue;
    const SubmissionIndex parent = corpus.parent_index[i];
    if (parent == kNoSubmission) continue;
    const std::string& partner = corpus.submissions[parent].author_id;
    if (is_deleted_author(partner) || partner == s.author_id) continue;
    ++weights[ordered_pair(s.author_id, partner)];
    users.push_back(partner);  // reply targets join the graph even if inactive this period
  }
  return finish_graph(period_index, std::move(users), std::move(weights));
}

std::vector<InteractionGraph> build_all_graphs(const Corpus& corpus, unsigned threads) {
  std::vector<InteractionGraph> graphs(corpus.periods.size());
  parallel_for(corpus.periods.size(), threads,
               [&](std::size_t p) { graphs[p] = build_graph(corpus, static_cast<int>(p)); });
  return graphs;
}

InteractionGraph make_graph(int period_index, std::vector<std::string> users,
                            const std::vector<std::pair<std::string, std::string>>& reply_events) {
  std::map<std::pair<std::string, std::string>, std::uint32_t> weights;
  for (const auto& [u, v] : reply_events) {
    if (u == v) continue;
    users.push_back(u);
    users.push_back(v);
    ++weights[ordered_pair(u, v)];
  }
  return finish_graph(period_index, std::move(users), std::move(weights));
}

std::unordered_map<std::string, double> polarity_by_user(std::span<const UserPeriodStats> stats,
                                                         int period_index) {
  std::unordered_map<std::string, double> out;
  for (const auto& s : stats) {
    if (s.period_index == period_index) out.emplace(s.user_id, s.polarity);
  }
  return out;
}

std::vector<NodePolarityView> node_views(const InteractionGraph& graph,
                                         const std::unordered_map<std::string, double>& polarity_of) {
  const std::size_t n = graph.users.size();
  std::vector<double> polarity(n, 0.0);
  std::vector<std::uint8_t> scored(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    auto it = polarity_of.find(graph.users[u]);
    if (it != polarity_of.end()) {
      polarity[u] = it->second;
      scored[u] = 1;
    }
  }

  std::vector<NodePolarityView> views(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    NodePolarityView& v = views[u];
    v.node = u;
    v.polarity = polarity[u];
    v.has_polarity_record = scored[u] != 0;
    const auto& nbrs = graph.adjacency[u];
    v.interaction_polarities.reserve(nbrs.size());
    v.edge_homogeneities.reserve(nbrs.size());
    double sum_ip = 0.0, sum_eh = 0.0;
    for (std::uint32_t w : nbrs) {
      const double np = polarity[w];
      v.interaction_polarities.push_back(np);
      v.edge_homogeneities.push_back(v.polarity * np);
      sum_ip += np;
      sum_eh += v.polarity * np;
    }
    if (!nbrs.empty()) {
      v.mean_interaction_polarity = sum_ip / static_cast<double>(nbrs.size());
      v.mean_edge_homogeneity = sum_eh / static_cast<double>(nbrs.size());
    }
  }
  return views;
}

EchoChamberStats echo_chamber_stats(const InteractionGraph& graph,
                                    std::span<const NodePolarityView> views) {
  EchoChamberStats stats;
  std::uint64_t inst_like = 0, inst_cross = 0, inst_neutral = 0;
  std::uint64_t event_like = 0, event_cross = 0, event_neutral = 0;
  std::uint64_t edge_like = 0, edge_cross = 0, edge_neutral = 0;

  for (const auto& e : graph.edges) {
    const double h = views[e.a].polarity * views[e.b].polarity;
    const std::uint64_t w = e.weight;
    if (h > 0.0) { edge_like += 1; inst_like += 2; event_like += w; }
    else if (h < 0.0) { edge_cross += 1; inst_cross += 2; event_cross += w; }
    else { edge_neutral += 1; inst_neutral += 2; event_neutral += w; }
    if (!views[e.a].has_polarity_record || !views[e.b].has_polarity_record) {
      stats.instances_with_unscored_user += 2;
    }
  }

  auto fractions = [](std::uint64_t like, std::uint64_t cross, std::uint64_t neutral) {
    PairFractions f;
    f.n_like = like;
    f.n_cross = cross;
    f.n_neutral = neutral;
    f.total = like + cross + neutral;
    if (f.total > 0) {
      f.like_minded = static_cast<double>(like) / static_cast<double>(f.total);
      f.cross_cutting = static_cast<double>(cross) / static_cast<double>(f.total);
      f.neutral = static_cast<double>(neutral) / static_cast<double>(f.total);
    }
    return f;
  };
  stats.by_endpoint_instances = fractions(inst_like, inst_cross, inst_neutral);
  stats.by_edges = fractions(edge_like, edge_cross, edge_neutral);
  stats.by_events = fractions(event_like, event_cross, event_neutral);

  auto make_cdf = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> cdf;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
      cdf.emplace_back(v[i], static_cast<double>(i + 1) / n);
    }
    return cdf;
  };
  std::vector<double> mips, mehs;
  for (const auto& v : views) {
    if (v.mean_interaction_polarity) mips.push_back(*v.mean_interaction_polarity);
    if (v.mean_edge_homogeneity) mehs.push_back(*v.mean_edge_homogeneity);
  }
  stats.cdf_mean_interaction_polarity = make_cdf(std::move(mips));
  stats.cdf_mean_edge_homogeneity = make_cdf(std::move(mehs));
  return stats;
}

const std::array<const char*, TriadCensus::kClasses>& TriadCensus::class_labels() {
  static const std::array<const char*, kClasses> labels = {
      "+++", "++0", "++-", "+00", "+0-", "+--", "000", "00-", "0--", "---"};
  return labels;
}

int triad_class_index(int plus, int zero, int minus) {
  // Lexicographic over (plus, zero, minus) descending in plus then zero,
  // matching class_labels() order.
  if (plus == 3) return 0;
  if (plus == 2) return zero == 1 ? 1 : 2;
  if (plus == 1) {
    if (zero == 2) return 3;
    if (zero == 1) return 4;
    return 5;
  }
  if (zero == 3) return 6;
  if (zero == 2) return 7;
  if (zero == 1) return 8;
  (void)minus;
  return 9;
}

TriadCensus triad_census(const InteractionGraph& graph,
                         const std::unordered_map<std::string, double>& polarity_of) {
  const std::size_t n = graph.users.size();
  std::vector<std::int8_t> sign(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    auto it = polarity_of.find(graph.users[u]);
    if (it == polarity_of.end()) continue;
    sign[u] = it->second > 0.0 ? 1 : (it->second < 0.0 ? -1 : 0);
  }

  // Degeneracy (smallest-last) ordering, then orient edges from lower to
  // higher rank and intersect oriented neighbourhoods: each triangle is
  // enumerated exactly once, near-linearly on sparse reply graphs.
  std::vector<std::uint32_t> rank(n, 0);
  {
    std::vector<std::uint32_t> deg(n);
    std::size_t max_deg = 0;
    for (std::size_t u = 0; u < n; ++u) {
      deg[u] = static_cast<std::uint32_t>(graph.adjacency[u].size());
      max_deg = std::max<std::size_t>(max_deg, deg[u]);
    }
    // Bucket queue with lazy deletion: every degree change pushes a fresh
    // entry, stale entries are skipped on pop.
    std::vector<std::vector<std::uint32_t>> buckets(max_deg + 1);
    for (std::uint32_t u = 0; u < n; ++u) buckets[deg[u]].push_back(u);
    std::vector<std::uint8_t> removed(n, 0);
    std::size_t cursor = 0;
    std::uint32_t processed = 0;
    while (processed < n && cursor <= max_deg) {
      if (buckets[cursor].empty()) {
        ++cursor;
        continue;
      }
      const std::uint32_t u = buckets[cursor].back();
      buckets[cursor].pop_back();
      if (removed[u] || deg[u] != cursor) continue;
      removed[u] = 1;
      rank[u] = processed++;
      for (std::uint32_t w : graph.adjacency[u]) {
        if (removed[w] || deg[w] == 0) continue;
        --deg[w];
        buckets[deg[w]].push_back(w);
        if (deg[w] < cursor) cursor = deg[w];
      }
    }
  }

  std::vector<std::vector<std::uint32_t>> out_nbrs(n);
  for (const auto& e : graph.edges) {
    if (rank[e.a] < rank[e.b]) out_nbrs[e.a].push_back(e.b);
    else out_nbrs[e.b].push_back(e.a);
  }
  for (auto& v : out_nbrs) std::sort(v.begin(), v.end());

  TriadCensus census;
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v : out_nbrs[u]) {
      const auto& a = out_nbrs[u];
      const auto& b = out_nbrs[v];
      std::size_t i = 0, j = 0;
      while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else {
          const std::uint32_t w = a[i];
          int plus = 0, zero = 0, minus = 0;
          for (std::uint32_t x : {u, v, w}) {
            if (sign[x] > 0) ++plus;
            else if (sign[x] < 0) ++minus;
            else ++zero;
          }
          ++census.counts[triad_class_index(plus, zero, minus)];
          ++census.total;
          ++i;
          ++j;
        }
      }
    }
  }
  return census;
}

}  // namespace polaris
