#include "crowdorg/model.hpp"

#include <algorithm>
#include <sstream>

namespace crowdorg {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ", ";
    out += p;
  }
  return out;
}

std::string node_name(const ConceptNode& n) {
  return "node " + std::to_string(n.id) + (n.label ? " (" + *n.label + ")" : std::string{});
}

}  // namespace

// ---------------------------------------------------------------------------
// ItemCorpus

ItemCorpus::ItemCorpus(std::string name, std::vector<Item> items,
                       std::map<std::string, LabelTree> perspectives)
    : name_(std::move(name)), items_(std::move(items)), perspectives_(std::move(perspectives)) {
  if (items_.empty()) throw Error("corpus '" + name_ + "' is empty");
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].id, i).second) {
      throw Error("corpus '" + name_ + "' has duplicate item id '" + items_[i].id + "'");
    }
  }
  for (const auto& item : items_) {
    for (const auto& [perspective, label] : item.labels) {
      auto it = perspectives_.find(perspective);
      if (it != perspectives_.end() && !it->second.contains(label)) {
        throw Error("item '" + item.id + "' has label '" + label + "' unknown to perspective '" +
                    perspective + "'");
      }
    }
  }
}

const Item& ItemCorpus::at(const ItemId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error("unknown item '" + id + "'");
  return items_[it->second];
}

ItemSet ItemCorpus::ids() const {
  ItemSet out;
  for (const auto& item : items_) out.insert(item.id);
  return out;
}

const LabelTree* ItemCorpus::perspective(const std::string& name) const {
  auto it = perspectives_.find(name);
  return it == perspectives_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Clustering

ItemSet Clustering::items() const {
  ItemSet out;
  for (const auto& c : clusters) out.insert(c.begin(), c.end());
  return out;
}

std::vector<ItemSet> Clustering::canonical_clusters() const {
  auto out = clusters;
  std::sort(out.begin(), out.end());
  return out;
}

bool Clustering::same_partition(const Clustering& other) const {
  return canonical_clusters() == other.canonical_clusters();
}

// ---------------------------------------------------------------------------
// Hierarchy

Hierarchy Hierarchy::universe(ItemSet items) {
  Hierarchy t;
  t.root = 0;
  ConceptNode root;
  root.id = 0;
  root.label = "Universe";
  root.items = items;
  t.nodes.emplace(0, std::move(root));
  t.covered_items = std::move(items);
  t.next_id = 1;
  return t;
}

const ConceptNode& Hierarchy::node(NodeId id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error("unknown hierarchy node " + std::to_string(id));
  return it->second;
}

ConceptNode& Hierarchy::node(NodeId id) {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error("unknown hierarchy node " + std::to_string(id));
  return it->second;
}

std::vector<NodeId> Hierarchy::leaves() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes) {
    if (n.is_leaf()) out.push_back(id);
  }
  return out;
}

std::map<ItemId, NodeId> Hierarchy::leaf_index() const {
  std::map<ItemId, NodeId> out;
  for (const auto& [id, n] : nodes) {
    if (!n.is_leaf()) continue;
    for (const auto& item : n.items) out[item] = id;
  }
  return out;
}

std::vector<NodeId> Hierarchy::path_to_root(NodeId id) const {
  std::vector<NodeId> out;
  std::optional<NodeId> cur = id;
  while (cur) {
    out.push_back(*cur);
    if (out.size() > nodes.size()) throw Error("hierarchy parent links contain a cycle");
    cur = node(*cur).parent;
  }
  return out;
}

std::size_t Hierarchy::depth(NodeId id) const { return path_to_root(id).size() - 1; }

bool Hierarchy::is_ancestor_or_self(NodeId ancestor, NodeId id) const {
  for (NodeId cur : path_to_root(id)) {
    if (cur == ancestor) return true;
  }
  return false;
}

std::vector<NodeId> Hierarchy::preorder() const {
  std::vector<NodeId> out;
  if (nodes.empty()) return out;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& kids = node(cur).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

NodeId Hierarchy::add_child(NodeId parent, std::optional<std::string> label, bool pending) {
  ConceptNode& p = node(parent);
  if (p.pending) throw Error("cannot attach a child to pending pool " + std::to_string(parent));
  NodeId id = next_id++;
  ConceptNode n;
  n.id = id;
  n.label = std::move(label);
  n.parent = parent;
  n.pending = pending;
  p.children.push_back(id);
  nodes.emplace(id, std::move(n));
  return id;
}

void Hierarchy::add_items(NodeId id, const ItemSet& items) {
  for (NodeId cur : path_to_root(id)) node(cur).items.insert(items.begin(), items.end());
  covered_items.insert(items.begin(), items.end());
}

void Hierarchy::remove_items(NodeId id, const ItemSet& items) {
  for (NodeId cur : path_to_root(id)) {
    auto& set = node(cur).items;
    for (const auto& item : items) set.erase(item);
  }
  for (const auto& item : items) covered_items.erase(item);
}

void Hierarchy::erase_leaf(NodeId id) {
  const ConceptNode& n = node(id);
  if (!n.is_leaf()) throw Error("erase_leaf: node " + std::to_string(id) + " has children");
  if (!n.parent) throw Error("erase_leaf: cannot erase the root");
  remove_items(id, ItemSet(n.items));
  auto& siblings = node(*n.parent).children;
  siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
  nodes.erase(id);
}

// ---------------------------------------------------------------------------
// Sample / config

ItemSet Sample::new_items() const {
  ItemSet out;
  std::set_difference(items.begin(), items.end(), kernel.begin(), kernel.end(),
                      std::inserter(out, out.end()));
  return out;
}

WorkflowConfig WorkflowConfig::reference_preset() {
  WorkflowConfig c;
  c.delta = 0.95;
  c.f = 16;
  c.n = 115;
  c.h = 35;
  c.m = 15;
  c.theta = 5;
  return c;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::has(const std::string& condition) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.condition == condition; });
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.condition << ": " << v.detail;
    if (!v.subjects.empty()) os << " [" << join(v.subjects) << "]";
    os << "\n";
  }
  return os.str();
}

void ValidationReport::add(std::string condition, std::string detail, std::vector<std::string> subjects) {
  violations.push_back({std::move(condition), std::move(detail), std::move(subjects)});
}

ValidationReport validate_clustering(const Clustering& c, const Sample& s) {
  return validate_clustering(c, s.items);
}

ValidationReport validate_clustering(const Clustering& c, const ItemSet& sample_items) {
  ValidationReport report;
  std::map<ItemId, int> seen;
  for (std::size_t i = 0; i < c.clusters.size(); ++i) {
    if (c.clusters[i].empty()) report.add("empty-cluster", "cluster " + std::to_string(i) + " is empty");
    for (const auto& item : c.clusters[i]) ++seen[item];
  }
  std::vector<std::string> overlapping, foreign, missing;
  for (const auto& [item, count] : seen) {
    if (count > 1) overlapping.push_back(item);
    if (!sample_items.contains(item)) foreign.push_back(item);
  }
  for (const auto& item : sample_items) {
    if (!seen.contains(item)) missing.push_back(item);
  }
  if (!overlapping.empty()) {
    report.add("disjointness", "items placed in more than one cluster", std::move(overlapping));
  }
  if (!missing.empty()) report.add("coverage", "sample items left unclustered", std::move(missing));
  if (!foreign.empty()) report.add("coverage", "items not in the sample", std::move(foreign));
  return report;
}

ValidationReport validate_hierarchy(const Hierarchy& t) {
  ValidationReport report;
  if (t.nodes.empty()) {
    report.add("root", "hierarchy has no nodes");
    return report;
  }
  auto root_it = t.nodes.find(t.root);
  if (root_it == t.nodes.end()) {
    report.add("root", "root node " + std::to_string(t.root) + " is missing");
    return report;
  }
  if (root_it->second.parent) report.add("root", "root has a parent");
  if (root_it->second.pending) report.add("root", "root is a pending pool");

  // Tree structure: every node reached exactly once from the root.
  std::map<NodeId, int> reached;
  std::vector<NodeId> stack{t.root};
  reached[t.root] = 1;
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId child : t.node(cur).children) {
      auto it = t.nodes.find(child);
      if (it == t.nodes.end()) {
        report.add("tree-structure", "node " + std::to_string(cur) + " lists missing child " +
                                         std::to_string(child));
        continue;
      }
      if (++reached[child] > 1) {
        report.add("tree-structure", "node " + std::to_string(child) + " has more than one parent");
        continue;
      }
      if (it->second.parent != cur) {
        report.add("tree-structure", "node " + std::to_string(child) + " parent link disagrees");
      }
      stack.push_back(child);
    }
  }
  for (const auto& [id, n] : t.nodes) {
    if (n.id != id) report.add("tree-structure", "node key " + std::to_string(id) + " holds id " + std::to_string(n.id));
    if (!reached.contains(id)) report.add("tree-structure", node_name(n) + " is unreachable from the root");
    if (id >= t.next_id) report.add("tree-structure", "next_id does not exceed " + node_name(n));
  }
  if (!report.ok()) return report;

  if (t.node(t.root).items != t.covered_items) {
    report.add("root-coverage", "root items differ from covered items");
  }
  for (const auto& [id, n] : t.nodes) {
    if (n.items.empty()) report.add("empty-concept", node_name(n) + " has no items");
    if (n.pending && !n.is_leaf()) report.add("pending-internal", node_name(n) + " is a pending pool with children");
    if (n.is_leaf()) continue;
    if (n.children.size() == 1) report.add("single-child", node_name(n) + " has exactly one child");

    std::map<ItemId, int> seen;
    for (NodeId child : n.children) {
      for (const auto& item : t.node(child).items) ++seen[item];
    }
    std::vector<std::string> overlap, outside, uncovered;
    for (const auto& [item, count] : seen) {
      if (count > 1) overlap.push_back(item);
      if (!n.items.contains(item)) outside.push_back(item);
    }
    for (const auto& item : n.items) {
      if (!seen.contains(item)) uncovered.push_back(item);
    }
    if (!overlap.empty()) report.add("children-overlap", "children of " + node_name(n) + " share items", overlap);
    if (!uncovered.empty()) {
      report.add("children-undercover", "items of " + node_name(n) + " missing from every child", uncovered);
    }
    if (!outside.empty()) {
      report.add("children-outside", "children of " + node_name(n) + " hold items the node lacks", outside);
    }
  }
  return report;
}

ValidationReport validate_config(const WorkflowConfig& c) {
  ValidationReport report;
  if (!(c.delta > 0.0 && c.delta < 1.0)) report.add("delta", "delta must lie in (0, 1)");
  if (c.f < 1) report.add("f", "f must be positive");
  if (c.h < 1) report.add("h", "h must be positive");
  if (c.h <= c.f) report.add("h", "h must exceed f (h=" + std::to_string(c.h) + ", f=" + std::to_string(c.f) + ")");
  if (c.n && *c.n < 1) report.add("n", "n must be positive");
  if (c.m < 1) report.add("m", "m must be at least 1");
  if (c.theta < 1) report.add("theta", "theta must be at least 1");
  if (c.pivots_per_cluster < 1) report.add("pivots_per_cluster", "pivots_per_cluster must be at least 1");
  if (c.categorization_batch < 1) report.add("categorization_batch", "categorization_batch must be at least 1");
  return report;
}

// ---------------------------------------------------------------------------
// Frontiers

bool is_antichain(const Hierarchy& t, const Frontier& fr) {
  for (NodeId id : fr.nodes) {
    if (!t.contains(id)) return false;
    for (NodeId anc : t.path_to_root(id)) {
      if (anc != id && fr.nodes.contains(anc)) return false;
    }
  }
  return true;
}

void require_antichain(const Hierarchy& t, const Frontier& fr) {
  for (NodeId id : fr.nodes) {
    if (!t.contains(id)) throw Error("frontier references unknown node " + std::to_string(id));
  }
  if (!is_antichain(t, fr)) throw Error("frontier is not an antichain");
}

bool frontier_is_complete(const Hierarchy& t, const Frontier& fr) {
  require_antichain(t, fr);
  std::size_t total = 0;
  for (NodeId id : fr.nodes) total += t.node(id).items.size();
  // antichain nodes are disjoint, so sizes add up
  if (total != t.covered_items.size()) return false;
  ItemSet all;
  for (NodeId id : fr.nodes) all.insert(t.node(id).items.begin(), t.node(id).items.end());
  return all == t.covered_items;
}

Frontier leaf_frontier(const Hierarchy& t) {
  Frontier fr;
  for (NodeId id : t.leaves()) fr.nodes.insert(id);
  return fr;
}

Clustering frontier_clustering(const Hierarchy& t, const Frontier& fr) {
  Clustering c;
  for (NodeId id : fr.nodes) c.clusters.push_back(t.node(id).items);
  return c;
}

NodeId concept_node_of(const Hierarchy& t, const std::map<ItemId, NodeId>& leaf_index, const ItemId& item) {
  auto it = leaf_index.find(item);
  if (it == leaf_index.end()) throw Error("item '" + item + "' is not in the hierarchy");
  const ConceptNode& leaf = t.node(it->second);
  if (leaf.pending && leaf.parent) return *leaf.parent;
  return leaf.id;
}

}  // namespace crowdorg
