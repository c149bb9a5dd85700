#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "crowdorg/model.hpp"

namespace crowdorg {

struct NodeSplit {
  int frontier_count = 0;  // responses naming the node itself
  int subtree_count = 0;   // responses naming the node or a descendant
};

struct SplitStats {
  static constexpr double kUnobserved = 0.5;

  std::map<NodeId, NodeSplit> nodes;
  std::size_t responses = 0;

  /// p(not E_v | E_parent): frontier_count / subtree_count, or 1/2 when no
  /// response reached v.
  double stay_probability(NodeId v) const;
};

/// Counts per node over the responses. Throws crowdorg::Error when a response
/// is not an antichain of `t`.
SplitStats estimate_split_probabilities(const Hierarchy& t, const std::vector<Frontier>& responses);

struct FrontierLikelihood {
  Frontier frontier;
  double log_likelihood = 0.0;
};

/// log L(F) for a complete frontier. The root always splits (p(E_root) = 1)
/// unless it is a leaf.
double frontier_log_likelihood(const Hierarchy& t, const SplitStats& stats, const Frontier& fr);

/// Complete frontier of maximum likelihood via the bottom-up recurrence
/// D(v) = max(p(!E_v), p(E_v) * prod D(children)). Equal branches keep v
/// whole.
FrontierLikelihood max_likelihood_frontier(const Hierarchy& t, const SplitStats& stats);

/// Response of a worker clustering in `t`: each cluster maps to the lowest
/// common ancestor of its items' concept nodes. Items `t` does not cover are
/// ignored. Returns nullopt when the mapped nodes do not form an antichain.
std::optional<Frontier> project_clustering(const Hierarchy& t, const Clustering& c);

/// Categorization vote; nullopt means the worker placed the item in no
/// cluster.
using Vote = std::optional<NodeId>;

/// Plurality over exactly `theta` votes. Ties go to the smallest (earliest
/// created) node id and any cluster beats an equal number of abstentions.
/// Returns nullopt when abstention wins. Throws when the vote count differs
/// from theta or a vote names a node outside `frontier`.
std::optional<NodeId> aggregate_categorization_votes(const std::vector<Vote>& votes, int theta,
                                                     const Frontier& frontier);

/// Up to `per_cluster` distinct items drawn uniformly from each frontier
/// node.
std::map<NodeId, std::vector<ItemId>> select_pivots(const Hierarchy& t, const Frontier& fr, int per_cluster,
                                                    std::mt19937_64& rng);

}  // namespace crowdorg
