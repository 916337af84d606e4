#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polaris/corpus.hpp"
#include "polaris/polarity.hpp"

namespace polaris {

// Per-period undirected reply graph. Nodes are the period's active
// (non-deleted) authors plus anyone they replied to or who replied to them;
// an edge's weight is the number of reply events between the pair. Replies
// to oneself never create an edge.
struct InteractionGraph {
  int period_index = kNoPeriod;

  std::vector<std::string> users;  // sorted; position = node id
  std::unordered_map<std::string, std::uint32_t> index;

  struct Edge {
    std::uint32_t a = 0;  // a < b
    std::uint32_t b = 0;
    std::uint32_t weight = 0;
  };
  std::vector<Edge> edges;                           // sorted by (a, b)
  std::vector<std::vector<std::uint32_t>> adjacency; // sorted neighbour node ids
  std::vector<std::vector<std::uint32_t>> adjacency_weight;  // aligned with adjacency

  std::size_t degree(std::uint32_t node) const { return adjacency[node].size(); }
  std::optional<std::uint32_t> node_of(const std::string& user) const {
    auto it = index.find(user);
    return it == index.end() ? std::nullopt : std::optional<std::uint32_t>(it->second);
  }
};

InteractionGraph build_graph(const Corpus& corpus, int period_index);

// Convenience: one graph per period.
std::vector<InteractionGraph> build_all_graphs(const Corpus& corpus, unsigned threads = 1);

// Direct construction for tests and synthetic experiments.
InteractionGraph make_graph(int period_index, std::vector<std::string> users,
                            const std::vector<std::pair<std::string, std::string>>& reply_events);

struct NodePolarityView {
  std::uint32_t node = 0;
  double polarity = 0.0;
  bool has_polarity_record = false;
  std::vector<double> interaction_polarities;  // one entry per neighbour
  std::vector<double> edge_homogeneities;      // own polarity times each neighbour's
  std::optional<double> mean_interaction_polarity;  // absent for isolated nodes
  std::optional<double> mean_edge_homogeneity;
};

// Users absent from the polarity map score 0 (and are marked unscored).
std::vector<NodePolarityView> node_views(const InteractionGraph& graph,
                                         const std::unordered_map<std::string, double>& polarity_of);

std::unordered_map<std::string, double> polarity_by_user(std::span<const UserPeriodStats> stats,
                                                         int period_index);

struct PairFractions {
  double like_minded = 0.0;    // homogeneity > 0
  double cross_cutting = 0.0;  // homogeneity < 0
  double neutral = 0.0;        // homogeneity = 0
  std::uint64_t n_like = 0;
  std::uint64_t n_cross = 0;
  std::uint64_t n_neutral = 0;
  std::uint64_t total = 0;
};

struct EchoChamberStats {
  // Pair instances (one per edge endpoint, matching the per-user vectors)
  // are the headline basis; edge and reply-event bases are also reported.
  PairFractions by_endpoint_instances;
  PairFractions by_edges;
  PairFractions by_events;
  std::uint64_t instances_with_unscored_user = 0;
  std::vector<std::pair<double, double>> cdf_mean_interaction_polarity;
  std::vector<std::pair<double, double>> cdf_mean_edge_homogeneity;
};

EchoChamberStats echo_chamber_stats(const InteractionGraph& graph,
                                    std::span<const NodePolarityView> views);

// Triangle census keyed by the multiset of node polarity signs {+, 0, -}.
struct TriadCensus {
  static constexpr int kClasses = 10;
  static const std::array<const char*, kClasses>& class_labels();
  std::array<std::uint64_t, kClasses> counts{};
  std::uint64_t total = 0;
};

// Class index for a triangle with the given sign counts (plus+zero+minus=3).
int triad_class_index(int plus, int zero, int minus);

TriadCensus triad_census(const InteractionGraph& graph,
                         const std::unordered_map<std::string, double>& polarity_of);

}  // namespace polaris
