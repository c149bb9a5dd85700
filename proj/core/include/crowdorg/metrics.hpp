#pragma once

#include <map>
#include <string>
#include <vector>

#include "crowdorg/model.hpp"

namespace crowdorg {

// All entropies are in bits.

double entropy(const Clustering& c);
/// Throws crowdorg::Error when the clusterings cover different items.
double mutual_information(const Clustering& a, const Clustering& b);

/// H(a) + H(b) - 2 I(a; b).
double variation_of_information(const Clustering& a, const Clustering& b);

/// I(a; b) / sqrt(H(a) H(b)); when either entropy is zero, 1 for identical
/// partitions and 0 otherwise.
double normalized_mutual_information(const Clustering& a, const Clustering& b);

struct HierarchyCount {
  int count = 0;
  bool unexplainable = false;
  std::vector<std::string> perspectives;  // the minimal explaining subset
};

/// Fewest perspectives that explain a clustering: every multi-item cluster
/// shares a concept below the root under one of them, and every pair of
/// clusters (other than two singletons) falls under unrelated concepts in
/// one of them. When no subset explains it, all perspectives are counted and
/// the result is flagged.
HierarchyCount clustering_hierarchy_count(const Clustering& c, const ItemCorpus& corpus,
                                          const std::vector<std::string>& perspectives);

/// Partition of `items` by leaf label under one perspective.
Clustering ground_truth_clustering(const ItemCorpus& corpus, const std::string& perspective, const ItemSet& items);
Clustering ground_truth_clustering(const ItemCorpus& corpus, const std::string& perspective);

/// Names each node after the lowest common ground-truth concept of its items.
std::map<NodeId, std::string> label_nodes(const Hierarchy& t, const ItemCorpus& corpus, const std::string& perspective);

}  // namespace crowdorg
