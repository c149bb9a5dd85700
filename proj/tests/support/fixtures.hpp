#pragma once

// Shared test fixtures, random generators and brute-force oracles.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crowdorg/consensus.hpp"
#include "crowdorg/frontier.hpp"
#include "crowdorg/model.hpp"

namespace fixtures {

using crowdorg::Clustering;
using crowdorg::Frontier;
using crowdorg::Hierarchy;
using crowdorg::ItemId;
using crowdorg::ItemSet;
using crowdorg::NodeId;
using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// The five-worker shapes example: twelve items, each a shape in a color.
//
//   r1 Rect Azure       r2 Rect Red
//   s1 Sq DarkBlue      s2 Sq LightGreen
//   e1 Equi DarkGreen   e2 Equi Azure
//   sc1 Scal Red        sc2 Scal DarkBlue
//   c1 Circ LightGreen  c2 Circ Red
//   l1 Ell DarkGreen    l2 Ell Azure

struct ShapesExample {
  ItemSet rect{"r1", "r2"}, sq{"s1", "s2"}, equi{"e1", "e2"}, scal{"sc1", "sc2"}, circ{"c1", "c2"}, ell{"l1", "l2"};
  ItemSet azure{"r1", "e2", "l2"}, red{"r2", "sc1", "c2"}, dark_blue{"s1", "sc2"}, light_green{"s2", "c1"},
      dark_green{"e1", "l1"};

  static ItemSet unite(std::initializer_list<ItemSet> parts) {
    ItemSet out;
    for (const auto& p : parts) out.insert(p.begin(), p.end());
    return out;
  }

  ItemSet all() const { return unite({rect, sq, equi, scal, circ, ell}); }
  ItemSet quads() const { return unite({rect, sq}); }
  ItemSet triangles() const { return unite({equi, scal}); }
  ItemSet round() const { return unite({circ, ell}); }

  // worker 1: blue shades / green shades / red
  Clustering w1() const {
    return {"w1", "fig", {unite({azure, dark_blue}), unite({light_green, dark_green}), red}};
  }
  // worker 2: individual colors
  Clustering w2() const { return {"w2", "fig", {azure, red, dark_blue, light_green, dark_green}}; }
  // worker 3: quadrilaterals / triangles / round
  Clustering w3() const { return {"w3", "fig", {quads(), triangles(), round()}}; }
  // worker 4: rectangles / squares / triangles / circles / ellipses
  Clustering w4() const { return {"w4", "fig", {rect, sq, triangles(), circ, ell}}; }
  // worker 5: every leaf shape
  Clustering w5() const { return {"w5", "fig", {rect, sq, equi, scal, circ, ell}}; }

  std::vector<Clustering> all_workers() const { return {w1(), w2(), w3(), w4(), w5()}; }
};

/// Node of `t` whose item set equals `items`, or -1.
long find_node(const Hierarchy& t, const ItemSet& items);

// ---------------------------------------------------------------------------
// Random structures

/// Random valid hierarchy over items "i0".."i{n-1}" with at most `max_depth`
/// levels below the root.
Hierarchy random_hierarchy(Rng& rng, int n_items, int max_depth = 4, const std::string& prefix = "i");

/// Random complete frontier chosen by top-down coin flips.
Frontier random_complete_frontier(const Hierarchy& t, Rng& rng, double split = 0.5);

/// Random partition of `items` into up to `max_clusters` non-empty clusters.
Clustering random_partition(const ItemSet& items, Rng& rng, int max_clusters);

ItemSet item_range(int n, const std::string& prefix = "i");

/// Random graph with given multiplicities, built directly (no clusterings).
crowdorg::ClusteringGraph random_graph(Rng& rng, int vertices, double density, int max_multiplicity);

// ---------------------------------------------------------------------------
// Oracles

/// Best clique weight by enumerating every vertex subset.
int brute_force_max_clique_weight(const crowdorg::ClusteringGraph& g);

/// log L(F) written out from its definition: every frontier node stays and
/// every strict non-root ancestor of one splits.
double likelihood_oracle(const Hierarchy& t, const crowdorg::SplitStats& stats, const Frontier& fr);

/// Split counts drawn at random (leaves never split).
crowdorg::SplitStats random_stats(const Hierarchy& t, Rng& rng);

/// Every complete frontier of `t`.
std::vector<Frontier> enumerate_complete_frontiers(const Hierarchy& t);

/// Parent of each cluster by scanning all clusters for the smallest strict
/// superset; Universe maps to the empty set.
std::map<ItemSet, ItemSet> superset_scan_parents(const std::vector<Clustering>& clusterings);

/// `t` restricted to `keep`: empty nodes dropped, single-child chains
/// collapsed. Built independently of the library's merge helpers.
Hierarchy restrict_hierarchy(const Hierarchy& t, const ItemSet& keep);

/// Item sets of every node of `t`.
std::set<ItemSet> node_sets(const Hierarchy& t, bool skip_pending = false);

/// True when every pair drawn across the two families is disjoint or nested.
bool laminar_with(const std::set<ItemSet>& a, const std::set<ItemSet>& b);

/// Like laminar_with for the non-pending nodes of `t`, except that items
/// waiting in a pool above a node are undecided for that node and ignored.
bool laminar_modulo_pools(const Hierarchy& t, const std::set<ItemSet>& truth);

/// Leaf partition of a hierarchy as canonical cluster list.
std::vector<ItemSet> leaf_partition(const Hierarchy& t);

}  // namespace fixtures
