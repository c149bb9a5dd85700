#include "crowdorg/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdorg/merging.hpp"

namespace crowdorg {

namespace {

double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

struct Best {
  double log_value = 0.0;
  std::vector<NodeId> frontier;
};

Best best_below(const Hierarchy& t, const SplitStats& stats, NodeId v) {
  const ConceptNode& n = t.node(v);
  double stay = stats.stay_probability(v);
  Best keep{log_or_neg_inf(stay), {v}};
  if (n.is_leaf()) return keep;
  Best split{log_or_neg_inf(1.0 - stay), {}};
  for (NodeId child : n.children) {
    Best b = best_below(t, stats, child);
    split.log_value += b.log_value;
    split.frontier.insert(split.frontier.end(), b.frontier.begin(), b.frontier.end());
  }
  return split.log_value > keep.log_value ? split : keep;
}

}  // namespace

double SplitStats::stay_probability(NodeId v) const {
  auto it = nodes.find(v);
  if (it == nodes.end() || it->second.subtree_count == 0) return kUnobserved;
  return static_cast<double>(it->second.frontier_count) / it->second.subtree_count;
}

SplitStats estimate_split_probabilities(const Hierarchy& t, const std::vector<Frontier>& responses) {
  SplitStats stats;
  for (const auto& [id, _] : t.nodes) stats.nodes[id];
  for (const auto& fr : responses) {
    require_antichain(t, fr);
    std::set<NodeId> reached;
    for (NodeId v : fr.nodes) {
      ++stats.nodes[v].frontier_count;
      for (NodeId a : t.path_to_root(v)) reached.insert(a);
    }
    for (NodeId a : reached) ++stats.nodes[a].subtree_count;
  }
  stats.responses = responses.size();
  return stats;
}

double frontier_log_likelihood(const Hierarchy& t, const SplitStats& stats, const Frontier& fr) {
  if (!frontier_is_complete(t, fr)) throw Error("likelihood is defined for complete frontiers only");
  if (fr.nodes.contains(t.root)) {
    return t.node(t.root).is_leaf() ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  std::set<NodeId> split;
  for (NodeId v : fr.nodes) {
    auto path = t.path_to_root(v);
    split.insert(path.begin() + 1, path.end());
  }
  double total = 0.0;
  for (NodeId v : fr.nodes) total += log_or_neg_inf(stats.stay_probability(v));
  for (NodeId v : split) {
    if (v != t.root) total += log_or_neg_inf(1.0 - stats.stay_probability(v));
  }
  return total;
}

FrontierLikelihood max_likelihood_frontier(const Hierarchy& t, const SplitStats& stats) {
  FrontierLikelihood out;
  const ConceptNode& root = t.node(t.root);
  if (root.is_leaf()) {
    out.frontier.nodes = {t.root};
    return out;
  }
  for (NodeId child : root.children) {
    Best b = best_below(t, stats, child);
    out.log_likelihood += b.log_value;
    out.frontier.nodes.insert(b.frontier.begin(), b.frontier.end());
  }
  return out;
}

std::optional<Frontier> project_clustering(const Hierarchy& t, const Clustering& c) {
  auto index = t.leaf_index();
  Frontier fr;
  for (const auto& cluster : c.clusters) {
    std::set<NodeId> concepts;
    for (const auto& item : cluster) {
      if (index.contains(item)) concepts.insert(concept_node_of(t, index, item));
    }
    if (!concepts.empty()) fr.nodes.insert(lowest_common_ancestor(t, concepts));
  }
  if (fr.nodes.empty() || !is_antichain(t, fr)) return std::nullopt;
  return fr;
}

std::optional<NodeId> aggregate_categorization_votes(const std::vector<Vote>& votes, int theta,
                                                     const Frontier& frontier) {
  if (theta < 1 || votes.size() != static_cast<std::size_t>(theta)) {
    throw Error("expected " + std::to_string(theta) + " votes, got " + std::to_string(votes.size()));
  }
  std::map<NodeId, int> tally;
  int abstain = 0;
  for (const auto& v : votes) {
    if (!v) {
      ++abstain;
      continue;
    }
    if (!frontier.nodes.contains(*v)) throw Error("vote names node " + std::to_string(*v) + " outside the frontier");
    ++tally[*v];
  }
  std::optional<NodeId> winner;
  int best = 0;
  // ascending ids, so strict > keeps the earliest-created node on ties
  for (const auto& [id, count] : tally) {
    if (count > best) {
      best = count;
      winner = id;
    }
  }
  if (abstain > best) return std::nullopt;
  return winner;
}

std::map<NodeId, std::vector<ItemId>> select_pivots(const Hierarchy& t, const Frontier& fr, int per_cluster,
                                                    std::mt19937_64& rng) {
  if (per_cluster < 1) throw Error("select_pivots: per_cluster must be positive");
  std::map<NodeId, std::vector<ItemId>> out;
  for (NodeId id : fr.nodes) {
    const auto& items = t.node(id).items;
    if (items.empty()) throw Error("select_pivots: frontier node " + std::to_string(id) + " is empty");
    std::vector<ItemId> pool(items.begin(), items.end());
    std::size_t count = std::min(pool.size(), static_cast<std::size_t>(per_cluster));
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    out[id] = std::move(pool);
  }
  return out;
}

}  // namespace crowdorg
