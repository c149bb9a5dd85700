#include "crowdorg/consensus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

namespace crowdorg {

namespace {

std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

std::vector<std::size_t> bits_of(std::uint64_t mask) {
  std::vector<std::size_t> out;
  while (mask) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

void bron_kerbosch(const ClusteringGraph& g, std::uint64_t r, std::uint64_t p, std::uint64_t x,
                   std::vector<std::vector<std::size_t>>& out) {
  if (!p && !x) {
    out.push_back(bits_of(r));
    return;
  }
  // pivot: vertex of P ∪ X with the most neighbours in P
  std::uint64_t px = p | x;
  std::size_t pivot = 0;
  int best = -1;
  for (std::size_t u : bits_of(px)) {
    int deg = std::popcount(p & g.adjacency[u]);
    if (deg > best) {
      best = deg;
      pivot = u;
    }
  }
  for (std::size_t v : bits_of(p & ~g.adjacency[pivot])) {
    bron_kerbosch(g, r | bit(v), p & g.adjacency[v], x & g.adjacency[v], out);
    p &= ~bit(v);
    x |= bit(v);
  }
}

std::vector<Clustering> clique_clusterings(const ClusteringGraph& g, const std::vector<std::size_t>& members) {
  std::vector<Clustering> out;
  for (std::size_t v : members) out.push_back(g.vertices[v]);
  return out;
}

}  // namespace

bool are_consistent(const Clustering& a, const Clustering& b) {
  std::map<ItemId, std::size_t> owner;
  for (std::size_t j = 0; j < b.clusters.size(); ++j) {
    for (const auto& item : b.clusters[j]) owner[item] = j;
  }
  if (a.items() != b.items()) {
    throw Error("consistency is undefined for clusterings of different item sets");
  }
  for (const auto& ca : a.clusters) {
    std::map<std::size_t, std::size_t> overlap;
    for (const auto& item : ca) ++overlap[owner.at(item)];
    for (const auto& [j, shared] : overlap) {
      // intersecting clusters must be nested (or equal)
      if (shared != ca.size() && shared != b.clusters[j].size()) return false;
    }
  }
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> ClusteringGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (adjacent(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

int ClusteringGraph::weight(const std::set<std::size_t>& vertex_set) const {
  int total = 0;
  for (std::size_t v : vertex_set) total += multiplicity.at(v);
  return total;
}

ClusteringGraph build_clustering_graph(const std::vector<Clustering>& clusterings) {
  ClusteringGraph g;
  std::vector<std::vector<ItemSet>> canonical;
  for (std::size_t i = 0; i < clusterings.size(); ++i) {
    auto c = clusterings[i].canonical_clusters();
    auto it = std::find(canonical.begin(), canonical.end(), c);
    if (it != canonical.end()) {
      auto v = static_cast<std::size_t>(it - canonical.begin());
      ++g.multiplicity[v];
      g.sources[v].push_back(i);
      continue;
    }
    if (canonical.size() == ClusteringGraph::kMaxVertices) {
      throw Error("clustering graph limited to 64 distinct clusterings");
    }
    canonical.push_back(std::move(c));
    g.vertices.push_back(clusterings[i]);
    g.multiplicity.push_back(1);
    g.sources.push_back({i});
  }
  g.adjacency.assign(g.vertices.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (are_consistent(g.vertices[i], g.vertices[j])) {
        g.adjacency[i] |= bit(j);
        g.adjacency[j] |= bit(i);
      }
    }
  }
  return g;
}

std::vector<std::vector<std::size_t>> maximal_cliques(const ClusteringGraph& g) {
  std::vector<std::vector<std::size_t>> out;
  if (g.size() == 0) return out;
  std::uint64_t all = g.size() == 64 ? ~std::uint64_t{0} : bit(g.size()) - 1;
  bron_kerbosch(g, 0, all, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::size_t> max_clique(const ClusteringGraph& g) {
  if (g.size() == 0) throw Error("max_clique on an empty graph");
  const std::vector<std::size_t>* best = nullptr;
  int best_weight = -1;
  std::size_t best_nodes = 0;
  auto cliques = maximal_cliques(g);
  // positive weights: a maximum-weight clique is always maximal
  for (const auto& clique : cliques) {
    int w = 0;
    for (std::size_t v : clique) w += g.multiplicity[v];
    if (w < best_weight) continue;
    std::size_t nodes = construct_hierarchy(clique_clusterings(g, clique)).nodes.size();
    bool better = w > best_weight || nodes > best_nodes || (nodes == best_nodes && clique < *best);
    if (!better) continue;
    best = &clique;
    best_weight = w;
    best_nodes = nodes;
  }
  return {best->begin(), best->end()};
}

Hierarchy construct_hierarchy(const std::vector<Clustering>& clusterings) {
  if (clusterings.empty()) throw Error("construct_hierarchy needs at least one clustering");
  for (std::size_t i = 0; i < clusterings.size(); ++i) {
    for (std::size_t j = i + 1; j < clusterings.size(); ++j) {
      if (!are_consistent(clusterings[i], clusterings[j])) {
        throw Error("construct_hierarchy: clusterings " + std::to_string(i) + " and " +
                    std::to_string(j) + " are inconsistent");
      }
    }
  }
  const ItemSet universe = clusterings.front().items();
  std::set<ItemSet> unique;
  for (const auto& c : clusterings) {
    for (const auto& cluster : c.clusters) {
      if (!cluster.empty() && cluster != universe) unique.insert(cluster);
    }
  }
  // larger clusters first so that parents get smaller ids than children
  std::vector<ItemSet> order(unique.begin(), unique.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const ItemSet& a, const ItemSet& b) { return a.size() > b.size(); });

  Hierarchy t = Hierarchy::universe(universe);
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < order.size(); ++i) {
    // candidates are earlier (no smaller) clusters; the last superset seen is
    // the smallest one
    NodeId parent = t.root;
    for (std::size_t j = 0; j < i; ++j) {
      if (order[j].size() > order[i].size() &&
          std::includes(order[j].begin(), order[j].end(), order[i].begin(), order[i].end())) {
        parent = ids[j];
      }
    }
    NodeId id = t.add_child(parent);
    t.node(id).items = order[i];
    ids.push_back(id);
  }
  return t;
}

double discovery_probability(int k, int m) {
  if (k < 1) throw Error("discovery_probability: k must be at least 1");
  if (m < 0) throw Error("discovery_probability: m must be non-negative");
  return 1.0 - std::pow(1.0 - 1.0 / k, m);
}

std::vector<Clustering> CliqueResult::member_clusterings() const {
  std::vector<Clustering> out;
  for (std::size_t v : members) {
    for (int i = 0; i < graph.multiplicity[v]; ++i) out.push_back(graph.vertices[v]);
  }
  return out;
}

CliqueResult find_consensus(const std::vector<Clustering>& clusterings) {
  CliqueResult r;
  r.graph = build_clustering_graph(clusterings);
  r.members = max_clique(r.graph);
  r.total_multiplicity = r.graph.weight(r.members);
  std::vector<Clustering> members;
  for (std::size_t v : r.members) members.push_back(r.graph.vertices[v]);
  r.hierarchy = construct_hierarchy(members);

  auto cliques = maximal_cliques(r.graph);
  r.maximal_clique_count = cliques.size();
  std::vector<int> appearances(r.graph.size(), 0);
  for (const auto& clique : cliques) {
    for (std::size_t v : clique) ++appearances[v];
  }
  r.bound_applicable = std::all_of(appearances.begin(), appearances.end(), [](int a) { return a == 1; });
  return r;
}

std::string to_dot(const ClusteringGraph& g, const std::set<std::size_t>& highlight) {
  std::ostringstream os;
  os << "graph clustering_graph {\n";
  for (std::size_t v = 0; v < g.size(); ++v) {
    os << "  v" << v << " [label=\"" << v << " x" << g.multiplicity[v] << " ("
       << g.vertices[v].clusters.size() << " clusters)\"";
    if (highlight.contains(v)) os << ", style=filled";
    os << "];\n";
  }
  for (const auto& [a, b] : g.edges()) os << "  v" << a << " -- v" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace crowdorg
