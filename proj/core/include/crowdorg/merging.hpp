#pragma once

#include <set>
#include <string>
#include <vector>

#include "crowdorg/model.hpp"

namespace crowdorg {

/// Deepest node that is an ancestor-or-self of every node in `nodes`.
NodeId lowest_common_ancestor(const Hierarchy& t, const std::set<NodeId>& nodes);

struct MergeResult {
  Hierarchy hierarchy;
  // one JSON object per mapping decision
  std::vector<std::string> trace;
  // nodes of `hierarchy` created by this merge
  std::set<NodeId> created;
};

/// Folds the sample hierarchy `ts` into the running estimate `t`, anchoring
/// on the kernel items the two share.
///
/// A sample leaf holding kernel items is mapped to the lowest common ancestor
/// of their leaves in `t`. When that is a single leaf its new items join the
/// leaf; otherwise they are parked in a pending pool under the ancestor. A
/// kernel-less subtree of `ts` is attached as a new subtree below the image of
/// its lowest kernel-holding ancestor.
///
/// `relocatable` names nodes created earlier in the same iteration (split
/// kernel mode): already-covered items sitting in them move to where later
/// kernel portions place them.
///
/// Throws crowdorg::Error when the kernel is empty or not shared by both
/// hierarchies.
MergeResult merge_hierarchies(const Hierarchy& t, const Hierarchy& ts, const ItemSet& kernel,
                              const std::set<NodeId>& relocatable = {});

/// Removes empty leaves and folds single-child nodes into their parents until
/// neither remains.
void normalize_hierarchy(Hierarchy& t);

}  // namespace crowdorg
