#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdorg/label_tree.hpp"

namespace crowdorg {

using ItemId = std::string;
using ItemSet = std::set<ItemId>;
using NodeId = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Item {
  ItemId id;
  std::string payload;
  // perspective name -> leaf concept name; populated for simulated corpora only
  std::map<std::string, std::string> labels;

  bool operator==(const Item&) const = default;
};

/// Non-empty set of items with unique ids. Ground-truth perspective trees are
/// optional and only present for simulated or annotated corpora.
class ItemCorpus {
 public:
  ItemCorpus() = default;
  ItemCorpus(std::string name, std::vector<Item> items,
             std::map<std::string, LabelTree> perspectives = {});

  const std::string& name() const noexcept { return name_; }
  const std::vector<Item>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool contains(const ItemId& id) const { return index_.contains(id); }
  const Item& at(const ItemId& id) const;
  ItemSet ids() const;

  const std::map<std::string, LabelTree>& perspectives() const noexcept { return perspectives_; }
  const LabelTree* perspective(const std::string& name) const;

  bool operator==(const ItemCorpus& other) const {
    return name_ == other.name_ && items_ == other.items_ && perspectives_ == other.perspectives_;
  }

 private:
  std::string name_;
  std::vector<Item> items_;
  std::map<ItemId, std::size_t> index_;
  std::map<std::string, LabelTree> perspectives_;
};

/// One worker's partition of a sample.
struct Clustering {
  std::string worker_id;
  std::string sample_id;
  std::vector<ItemSet> clusters;

  ItemSet items() const;
  /// Clusters sorted; two clusterings describe the same partition iff their
  /// canonical cluster lists compare equal.
  std::vector<ItemSet> canonical_clusters() const;
  bool same_partition(const Clustering& other) const;
};

struct ConceptNode {
  NodeId id = 0;
  std::optional<std::string> label;
  std::optional<NodeId> parent;  // derived from the children lists
  std::vector<NodeId> children;
  ItemSet items;
  // Items known to belong under `parent` whose finer concept is still
  // unresolved. Pending nodes are always leaves.
  bool pending = false;

  bool is_leaf() const noexcept { return children.empty(); }
  bool operator==(const ConceptNode&) const = default;
};

/// Rooted concept tree. Each node holds the items of its whole subtree.
struct Hierarchy {
  NodeId root = 0;
  std::map<NodeId, ConceptNode> nodes;
  ItemSet covered_items;
  NodeId next_id = 1;

  /// A lone Universe node holding `items`.
  static Hierarchy universe(ItemSet items);

  bool empty() const noexcept { return nodes.empty(); }
  bool contains(NodeId id) const { return nodes.contains(id); }
  const ConceptNode& node(NodeId id) const;
  ConceptNode& node(NodeId id);

  /// Leaf ids in ascending order (pending pools included).
  std::vector<NodeId> leaves() const;
  /// Item -> leaf holding it.
  std::map<ItemId, NodeId> leaf_index() const;
  /// `id` first, root last.
  std::vector<NodeId> path_to_root(NodeId id) const;
  std::size_t depth(NodeId id) const;
  bool is_ancestor_or_self(NodeId ancestor, NodeId id) const;
  /// Pre-order, children in stored order.
  std::vector<NodeId> preorder() const;

  /// Creates an empty child of `parent`; items are added separately.
  NodeId add_child(NodeId parent, std::optional<std::string> label = std::nullopt, bool pending = false);
  /// Adds items to `id` and all of its ancestors, and to covered_items.
  void add_items(NodeId id, const ItemSet& items);
  /// Removes items from `id` and all of its ancestors, and from covered_items.
  void remove_items(NodeId id, const ItemSet& items);
  /// Detaches and erases a leaf.
  void erase_leaf(NodeId id);

  bool operator==(const Hierarchy&) const = default;
};

/// Antichain of nodes within one hierarchy.
struct Frontier {
  std::set<NodeId> nodes;
  bool operator==(const Frontier&) const = default;
};

struct Sample {
  std::string sample_id;
  ItemSet items;
  ItemSet kernel;
  int iteration = 1;

  ItemSet new_items() const;
};

struct WorkflowConfig {
  double delta = 0.95;
  int f = 16;
  std::optional<int> n;  // solved from (delta, f) when unset
  int h = 35;
  int m = 15;
  int theta = 5;
  std::uint64_t rng_seed = 0;
  int pivots_per_cluster = 10;
  int categorization_batch = 35;

  /// delta = 0.95, f = 16 with the rounded n = 115 operating point, h = 35.
  static WorkflowConfig reference_preset();
};

struct Violation {
  std::string condition;
  std::string detail;
  std::vector<std::string> subjects;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  explicit operator bool() const noexcept { return ok(); }
  bool has(const std::string& condition) const;
  std::string to_string() const;
  void add(std::string condition, std::string detail, std::vector<std::string> subjects = {});
};

ValidationReport validate_clustering(const Clustering& c, const Sample& s);
ValidationReport validate_clustering(const Clustering& c, const ItemSet& sample_items);
ValidationReport validate_hierarchy(const Hierarchy& t);
ValidationReport validate_config(const WorkflowConfig& config);

/// Throws crowdorg::Error when `fr` references unknown nodes or is not an
/// antichain.
void require_antichain(const Hierarchy& t, const Frontier& fr);
bool is_antichain(const Hierarchy& t, const Frontier& fr);
bool frontier_is_complete(const Hierarchy& t, const Frontier& fr);

/// Leaves of `t` as a frontier.
Frontier leaf_frontier(const Hierarchy& t);
/// Clustering induced by a frontier: one cluster per node, in node order.
Clustering frontier_clustering(const Hierarchy& t, const Frontier& fr);

/// Concept node an item belongs to: its leaf, or the parent of the leaf when
/// that leaf is a pending pool.
NodeId concept_node_of(const Hierarchy& t, const std::map<ItemId, NodeId>& leaf_index, const ItemId& item);

}  // namespace crowdorg
