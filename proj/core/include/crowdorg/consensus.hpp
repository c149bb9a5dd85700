#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "crowdorg/model.hpp"

namespace crowdorg {

/// True iff every pair of clusters across `a` and `b` is disjoint, nested or
/// equal. Throws crowdorg::Error when the two clusterings cover different
/// item sets.
bool are_consistent(const Clustering& a, const Clustering& b);

/// Deduplicated worker clusterings with consistency edges.
struct ClusteringGraph {
  static constexpr std::size_t kMaxVertices = 64;

  std::vector<Clustering> vertices;
  std::vector<int> multiplicity;
  // input positions collapsed into each vertex
  std::vector<std::vector<std::size_t>> sources;
  std::vector<std::uint64_t> adjacency;

  std::size_t size() const noexcept { return vertices.size(); }
  bool adjacent(std::size_t i, std::size_t j) const { return (adjacency[i] >> j) & 1U; }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  int weight(const std::set<std::size_t>& vertex_set) const;
};

ClusteringGraph build_clustering_graph(const std::vector<Clustering>& clusterings);

/// Every maximal clique, each sorted ascending (Bron–Kerbosch with pivoting).
std::vector<std::vector<std::size_t>> maximal_cliques(const ClusteringGraph& g);

/// Clique of maximum total multiplicity. Ties go to the clique whose
/// constructed hierarchy has more nodes, then to the lexicographically
/// smallest vertex sequence. Throws on an empty graph.
std::set<std::size_t> max_clique(const ClusteringGraph& g);

/// Hierarchy whose concepts are the distinct clusters of `clusterings`; each
/// cluster hangs under its smallest strict superset, or under Universe.
/// Throws crowdorg::Error when the input is not pairwise consistent.
Hierarchy construct_hierarchy(const std::vector<Clustering>& clusterings);

/// 1 - (1 - 1/k)^m. Throws when k < 1 or m < 0.
double discovery_probability(int k, int m);

struct CliqueResult {
  ClusteringGraph graph;
  std::set<std::size_t> members;
  int total_multiplicity = 0;
  Hierarchy hierarchy;
  // every vertex lies in exactly one maximal clique, the precondition of the
  // discovery-probability bound
  bool bound_applicable = false;
  std::size_t maximal_clique_count = 0;

  /// Member clusterings expanded by multiplicity (one entry per worker).
  std::vector<Clustering> member_clusterings() const;
};

/// Graph, maximum clique and hierarchy for one sample's worker responses.
CliqueResult find_consensus(const std::vector<Clustering>& clusterings);

/// Graphviz rendering of the clustering graph; clique members are filled.
std::string to_dot(const ClusteringGraph& g, const std::set<std::size_t>& highlight = {});

}  // namespace crowdorg
