#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fixtures {

long find_node(const Hierarchy& t, const ItemSet& items) {
  for (const auto& [id, n] : t.nodes) {
    if (n.items == items) return static_cast<long>(id);
  }
  return -1;
}

ItemSet item_range(int n, const std::string& prefix) {
  ItemSet out;
  for (int i = 0; i < n; ++i) out.insert(prefix + std::to_string(i));
  return out;
}

namespace {

void grow(Hierarchy& t, NodeId parent, std::vector<ItemId> items, int depth, int max_depth, Rng& rng) {
  std::bernoulli_distribution stop(0.3);
  if (items.size() < 2 || depth >= max_depth || (depth > 0 && stop(rng))) {
    t.add_items(parent, ItemSet(items.begin(), items.end()));
    return;
  }
  std::uniform_int_distribution<std::size_t> arity(2, std::min<std::size_t>(4, items.size()));
  std::size_t k = arity(rng);
  std::shuffle(items.begin(), items.end(), rng);
  // k-1 distinct cut points give k non-empty parts
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i < items.size(); ++i) cuts.push_back(i);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(k - 1);
  std::sort(cuts.begin(), cuts.end());
  std::size_t start = 0;
  for (std::size_t c = 0; c <= cuts.size(); ++c) {
    std::size_t end = c < cuts.size() ? cuts[c] : items.size();
    NodeId child = t.add_child(parent);
    grow(t, child, std::vector<ItemId>(items.begin() + static_cast<long>(start), items.begin() + static_cast<long>(end)),
         depth + 1, max_depth, rng);
    start = end;
  }
}

void enumerate(const Hierarchy& t, NodeId v, std::vector<std::vector<NodeId>>& out) {
  const auto& n = t.node(v);
  out.clear();
  out.push_back({v});
  if (n.is_leaf()) return;
  std::vector<std::vector<NodeId>> combos{{}};
  for (NodeId child : n.children) {
    std::vector<std::vector<NodeId>> sub;
    enumerate(t, child, sub);
    std::vector<std::vector<NodeId>> next;
    for (const auto& a : combos) {
      for (const auto& b : sub) {
        auto c = a;
        c.insert(c.end(), b.begin(), b.end());
        next.push_back(std::move(c));
      }
    }
    combos = std::move(next);
  }
  out.insert(out.end(), combos.begin(), combos.end());
}

}  // namespace

Hierarchy random_hierarchy(Rng& rng, int n_items, int max_depth, const std::string& prefix) {
  Hierarchy t = Hierarchy::universe({});
  auto items = item_range(n_items, prefix);
  grow(t, t.root, std::vector<ItemId>(items.begin(), items.end()), 0, max_depth, rng);
  return t;
}

Frontier random_complete_frontier(const Hierarchy& t, Rng& rng, double split) {
  Frontier fr;
  std::bernoulli_distribution coin(split);
  std::vector<NodeId> stack{t.root};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    const auto& n = t.node(v);
    if (n.is_leaf() || (v != t.root && !coin(rng))) {
      fr.nodes.insert(v);
      continue;
    }
    for (NodeId c : n.children) stack.push_back(c);
  }
  return fr;
}

Clustering random_partition(const ItemSet& items, Rng& rng, int max_clusters) {
  std::uniform_int_distribution<int> k_dist(1, std::max(1, std::min<int>(max_clusters, static_cast<int>(items.size()))));
  int k = k_dist(rng);
  std::vector<ItemSet> clusters(static_cast<std::size_t>(k));
  std::vector<ItemId> order(items.begin(), items.end());
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> pick(0, clusters.size() - 1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    // seed each cluster first so none stays empty
    std::size_t c = i < clusters.size() ? i : pick(rng);
    clusters[c].insert(order[i]);
  }
  std::erase_if(clusters, [](const ItemSet& s) { return s.empty(); });
  return {"random", "sample", clusters};
}

crowdorg::ClusteringGraph random_graph(Rng& rng, int vertices, double density, int max_multiplicity) {
  crowdorg::ClusteringGraph g;
  std::bernoulli_distribution edge(density);
  std::uniform_int_distribution<int> mult(1, max_multiplicity);
  for (int v = 0; v < vertices; ++v) {
    g.vertices.push_back({"v" + std::to_string(v), "s", {{"x"}}});
    g.multiplicity.push_back(mult(rng));
    g.sources.push_back({static_cast<std::size_t>(v)});
  }
  g.adjacency.assign(static_cast<std::size_t>(vertices), 0);
  for (int i = 0; i < vertices; ++i) {
    for (int j = i + 1; j < vertices; ++j) {
      if (edge(rng)) {
        g.adjacency[static_cast<std::size_t>(i)] |= std::uint64_t{1} << j;
        g.adjacency[static_cast<std::size_t>(j)] |= std::uint64_t{1} << i;
      }
    }
  }
  return g;
}

int brute_force_max_clique_weight(const crowdorg::ClusteringGraph& g) {
  const std::size_t n = g.size();
  int best = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    bool clique = true;
    int weight = 0;
    for (std::size_t i = 0; i < n && clique; ++i) {
      if (!((mask >> i) & 1U)) continue;
      weight += g.multiplicity[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        if (((mask >> j) & 1U) && !g.adjacent(i, j)) {
          clique = false;
          break;
        }
      }
    }
    if (clique) best = std::max(best, weight);
  }
  return best;
}

double likelihood_oracle(const Hierarchy& t, const crowdorg::SplitStats& stats, const Frontier& fr) {
  if (fr.nodes.contains(t.root)) {
    return t.node(t.root).is_leaf() ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  std::set<NodeId> ancestors;
  double value = 1.0;
  for (NodeId v : fr.nodes) {
    value *= stats.stay_probability(v);
    for (auto p = t.node(v).parent; p && *p != t.root; p = t.node(*p).parent) ancestors.insert(*p);
  }
  for (NodeId a : ancestors) value *= 1.0 - stats.stay_probability(a);
  return std::log(value);
}

crowdorg::SplitStats random_stats(const Hierarchy& t, Rng& rng) {
  crowdorg::SplitStats stats;
  std::uniform_int_distribution<int> total(0, 6);
  for (const auto& [id, node] : t.nodes) {
    int n = total(rng);
    std::uniform_int_distribution<int> k(node.is_leaf() ? n : 0, n);
    stats.nodes[id] = crowdorg::NodeSplit{k(rng), n};
  }
  return stats;
}

std::vector<Frontier> enumerate_complete_frontiers(const Hierarchy& t) {
  std::vector<std::vector<NodeId>> all;
  enumerate(t, t.root, all);
  std::vector<Frontier> out;
  for (const auto& nodes : all) out.push_back(Frontier{{nodes.begin(), nodes.end()}});
  return out;
}

std::map<ItemSet, ItemSet> superset_scan_parents(const std::vector<Clustering>& clusterings) {
  ItemSet universe = clusterings.front().items();
  std::set<ItemSet> clusters;
  for (const auto& c : clusterings) {
    for (const auto& s : c.clusters) {
      if (s != universe) clusters.insert(s);
    }
  }
  std::map<ItemSet, ItemSet> parent;
  for (const auto& a : clusters) {
    ItemSet best = universe;
    for (const auto& b : clusters) {
      if (b.size() > a.size() && std::includes(b.begin(), b.end(), a.begin(), a.end()) && b.size() < best.size()) {
        best = b;
      }
    }
    parent[a] = best;
  }
  return parent;
}

namespace {

void copy_restricted(const Hierarchy& src, NodeId v, const ItemSet& keep, Hierarchy& dst, NodeId dst_node) {
  auto kept = [&](NodeId id) {
    ItemSet out;
    for (const auto& item : src.node(id).items) {
      if (keep.contains(item)) out.insert(item);
    }
    return out;
  };
  // walk down single non-empty children
  while (true) {
    std::vector<NodeId> live;
    for (NodeId c : src.node(v).children) {
      if (!kept(c).empty()) live.push_back(c);
    }
    if (live.empty()) {
      dst.add_items(dst_node, kept(v));
      return;
    }
    if (live.size() == 1) {
      v = live.front();
      continue;
    }
    for (NodeId c : live) {
      NodeId child = dst.add_child(dst_node, src.node(c).label);
      copy_restricted(src, c, keep, dst, child);
    }
    return;
  }
}

}  // namespace

Hierarchy restrict_hierarchy(const Hierarchy& t, const ItemSet& keep) {
  Hierarchy out = Hierarchy::universe({});
  copy_restricted(t, t.root, keep, out, out.root);
  return out;
}

std::set<ItemSet> node_sets(const Hierarchy& t, bool skip_pending) {
  std::set<ItemSet> out;
  for (const auto& [id, n] : t.nodes) {
    if (skip_pending && n.pending) continue;
    out.insert(n.items);
  }
  return out;
}

bool laminar_with(const std::set<ItemSet>& a, const std::set<ItemSet>& b) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      std::size_t common = 0;
      for (const auto& item : x) common += y.contains(item) ? 1 : 0;
      if (common != 0 && common != x.size() && common != y.size()) return false;
    }
  }
  return true;
}

bool laminar_modulo_pools(const Hierarchy& t, const std::set<ItemSet>& truth) {
  for (const auto& [id, x] : t.nodes) {
    if (x.pending) continue;
    ItemSet undecided;
    for (const auto& [pid, pool] : t.nodes) {
      if (!pool.pending || *pool.parent == id || !t.is_ancestor_or_self(*pool.parent, id)) continue;
      undecided.insert(pool.items.begin(), pool.items.end());
    }
    for (const auto& y : truth) {
      std::size_t common = 0, size = 0;
      for (const auto& item : y) {
        if (undecided.contains(item)) continue;
        ++size;
        common += x.items.contains(item) ? 1 : 0;
      }
      if (common != 0 && common != x.items.size() && common != size) return false;
    }
  }
  return true;
}

std::vector<ItemSet> leaf_partition(const Hierarchy& t) {
  std::vector<ItemSet> out;
  for (NodeId leaf : t.leaves()) out.push_back(t.node(leaf).items);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fixtures
