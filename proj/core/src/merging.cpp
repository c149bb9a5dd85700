#include "crowdorg/merging.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>

namespace crowdorg {

namespace {

struct Draft {
  std::optional<std::string> label;
  ItemSet items;
  std::vector<Draft> children;
};

ItemSet intersect(const ItemSet& a, const ItemSet& b) {
  ItemSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

// Copy of the ts subtree at `id` without the already covered items; empty nodes are
// dropped and single-child chains collapsed.
std::optional<Draft> restrict_subtree(const Hierarchy& ts, NodeId id, const ItemSet& covered) {
  const ConceptNode& n = ts.node(id);
  if (n.is_leaf()) {
    Draft d{n.label, {}, {}};
    for (const auto& item : n.items) {
      if (!covered.contains(item)) d.items.insert(item);
    }
    if (d.items.empty()) return std::nullopt;
    return d;
  }
  std::vector<Draft> kids;
  for (NodeId child : n.children) {
    if (auto d = restrict_subtree(ts, child, covered)) kids.push_back(std::move(*d));
  }
  if (kids.empty()) return std::nullopt;
  if (kids.size() == 1) return std::move(kids.front());
  Draft d{n.label, {}, std::move(kids)};
  for (const auto& k : d.children) d.items.insert(k.items.begin(), k.items.end());
  return d;
}

class Merger {
 public:
  Merger(const Hierarchy& t, const Hierarchy& ts, const ItemSet& kernel, const std::set<NodeId>& relocatable)
      : out_(t), ts_(ts), kernel_(kernel), relocatable_(relocatable) {}

  MergeResult run() {
    for (NodeId leaf : ts_.leaves()) {
      if (!intersect(ts_.node(leaf).items, kernel_).empty()) map_kernel_leaf(leaf);
    }
    std::set<NodeId> attached;
    for (NodeId leaf : ts_.leaves()) {
      if (!intersect(ts_.node(leaf).items, kernel_).empty()) continue;
      auto [anchor, branch] = kernel_anchor(leaf);
      if (attached.insert(branch).second) attach_branch(anchor, branch);
    }
    normalize_hierarchy(out_);
    MergeResult r;
    for (NodeId id : created_) {
      if (out_.contains(id)) r.created.insert(id);
    }
    r.hierarchy = std::move(out_);
    r.trace = std::move(trace_);
    return r;
  }

 private:
  NodeId leaf_of(const ItemId& item) const {
    auto it = index_.find(item);
    if (it == index_.end()) throw Error("merge: item '" + item + "' is not in the hierarchy");
    return it->second;
  }

  NodeId concept_of(const ItemId& item) const { return concept_node_of(out_, index_, item); }

  void reindex() { index_ = out_.leaf_index(); }

  void log(const std::string& action, NodeId ts_node, std::optional<NodeId> target, std::size_t items) {
    nlohmann::json j{{"action", action}, {"sample_node", ts_node}, {"items", items}};
    if (target) j["target"] = *target;
    trace_.push_back(j.dump());
  }

  NodeId pool_under(NodeId parent) {
    for (NodeId child : out_.node(parent).children) {
      if (out_.node(child).pending) return child;
    }
    NodeId pool = out_.add_child(parent, std::nullopt, true);
    created_.insert(pool);
    return pool;
  }

  void move_items(const ItemSet& items, NodeId target) {
    for (const auto& item : items) {
      auto it = index_.find(item);
      if (it == index_.end() || it->second == target) continue;  // fresh or already there
      out_.remove_items(it->second, {item});
    }
    out_.add_items(target, items);
  }

  void map_kernel_leaf(NodeId ts_leaf) {
    reindex();
    const ItemSet& items = ts_.node(ts_leaf).items;
    ItemSet kernel = intersect(items, kernel_);
    ItemSet fresh, relocate;
    for (const auto& item : items) {
      if (kernel.contains(item)) continue;
      if (!out_.covered_items.contains(item)) {
        fresh.insert(item);
      } else if (relocatable_.contains(leaf_of(item))) {
        relocate.insert(item);
      }
    }
    ItemSet in_leaves, in_pools;
    for (const auto& item : kernel) {
      (out_.node(leaf_of(item)).pending ? in_pools : in_leaves).insert(item);
    }

    ItemSet incoming = fresh;
    incoming.insert(relocate.begin(), relocate.end());

    if (!in_leaves.empty()) {
      std::set<NodeId> leaves;
      for (const auto& item : in_leaves) leaves.insert(leaf_of(item));
      NodeId lca = lowest_common_ancestor(out_, leaves);
      bool pools_above = std::all_of(in_pools.begin(), in_pools.end(), [&](const ItemId& item) {
        return out_.is_ancestor_or_self(*out_.node(leaf_of(item)).parent, lca);
      });
      if (out_.node(lca).is_leaf() && pools_above) {
        if (!in_pools.empty()) log("refine", ts_leaf, lca, in_pools.size());
        move_items(in_pools, lca);
        move_items(incoming, lca);
        log("extend", ts_leaf, lca, incoming.size());
        return;
      }
    } else {
      std::set<NodeId> pools;
      for (const auto& item : in_pools) pools.insert(leaf_of(item));
      if (pools.size() == 1) {
        NodeId pool = *pools.begin();
        NodeId parent = *out_.node(pool).parent;
        if (every_leaf_anchored(parent)) {
          NodeId leaf = out_.add_child(parent);
          created_.insert(leaf);
          move_items(in_pools, leaf);
          move_items(incoming, leaf);
          log("promote", ts_leaf, leaf, in_pools.size() + incoming.size());
          return;
        }
      }
    }

    std::set<NodeId> concepts;
    for (const auto& item : kernel) concepts.insert(concept_of(item));
    NodeId target = lowest_common_ancestor(out_, concepts);
    if (incoming.empty()) {
      log("match", ts_leaf, target, 0);
      return;
    }
    NodeId pool = pool_under(target);
    move_items(incoming, pool);
    log("park", ts_leaf, pool, incoming.size());
  }

  // true when every non-pending leaf below `id` contributed a kernel item
  bool every_leaf_anchored(NodeId id) const {
    for (NodeId n : out_.preorder()) {
      const ConceptNode& node = out_.node(n);
      if (!node.is_leaf() || node.pending || !out_.is_ancestor_or_self(id, n)) continue;
      if (intersect(node.items, kernel_).empty()) return false;
    }
    return true;
  }

  // lowest kernel-holding ancestor of a kernel-less leaf, and the child of
  // that ancestor on the path down to the leaf
  std::pair<NodeId, NodeId> kernel_anchor(NodeId ts_leaf) const {
    auto path = ts_.path_to_root(ts_leaf);
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (!intersect(ts_.node(path[i]).items, kernel_).empty()) return {path[i], path[i - 1]};
    }
    throw Error("merge: sample hierarchy root holds no kernel item");
  }

  void attach_branch(NodeId ts_anchor, NodeId ts_branch) {
    reindex();
    auto draft = restrict_subtree(ts_, ts_branch, out_.covered_items);
    if (!draft) return;
    std::set<NodeId> concepts;
    for (const auto& item : intersect(ts_.node(ts_anchor).items, kernel_)) concepts.insert(concept_of(item));
    NodeId target = lowest_common_ancestor(out_, concepts);
    if (out_.node(target).is_leaf()) {
      // the leaf turns into a concept with sub-concepts; its current items
      // wait in a pending pool for refinement
      ItemSet items = out_.node(target).items;
      NodeId pool = out_.add_child(target, std::nullopt, true);
      out_.node(pool).items = items;
      log("convert", ts_anchor, target, items.size());
    }
    NodeId root = materialize(target, *draft);
    log("attach", ts_branch, root, draft->items.size());
  }

  NodeId materialize(NodeId parent, const Draft& d) {
    NodeId id = out_.add_child(parent, d.label);
    created_.insert(id);
    if (d.children.empty()) {
      out_.add_items(id, d.items);
    } else {
      for (const auto& child : d.children) materialize(id, child);
    }
    return id;
  }

  Hierarchy out_;
  const Hierarchy& ts_;
  const ItemSet& kernel_;
  const std::set<NodeId>& relocatable_;
  std::map<ItemId, NodeId> index_;
  std::set<NodeId> created_;
  std::vector<std::string> trace_;
};

}  // namespace

NodeId lowest_common_ancestor(const Hierarchy& t, const std::set<NodeId>& nodes) {
  if (nodes.empty()) throw Error("lowest_common_ancestor of an empty node set");
  auto common = t.path_to_root(*nodes.begin());  // deepest first
  for (NodeId n : nodes) {
    auto path = t.path_to_root(n);
    std::set<NodeId> on_path(path.begin(), path.end());
    std::erase_if(common, [&](NodeId a) { return !on_path.contains(a); });
  }
  if (common.empty()) throw Error("lowest_common_ancestor: nodes share no ancestor");
  return common.front();
}

void normalize_hierarchy(Hierarchy& t) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeId id : t.preorder()) {
      if (!t.contains(id)) continue;
      ConceptNode& n = t.node(id);
      if (n.is_leaf() && n.items.empty() && n.parent) {
        t.erase_leaf(id);
        changed = true;
        break;
      }
      if (n.children.size() == 1) {
        NodeId only = n.children.front();
        ConceptNode child = t.node(only);
        n.children = child.children;
        if (!n.label) n.label = child.label;
        for (NodeId g : n.children) t.node(g).parent = id;
        t.nodes.erase(only);
        changed = true;
        break;
      }
    }
  }
}

MergeResult merge_hierarchies(const Hierarchy& t, const Hierarchy& ts, const ItemSet& kernel,
                              const std::set<NodeId>& relocatable) {
  if (kernel.empty()) throw Error("merge_hierarchies: kernel is empty");
  for (const auto& item : kernel) {
    if (!t.covered_items.contains(item) || !ts.covered_items.contains(item)) {
      throw Error("merge_hierarchies: kernel item '" + item + "' is missing from one of the hierarchies");
    }
  }
  return Merger(t, ts, kernel, relocatable).run();
}

}  // namespace crowdorg
