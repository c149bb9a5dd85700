#include "crowdorg/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>

namespace crowdorg {

namespace {

struct Table {
  std::vector<double> rows;
  std::vector<double> cols;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  double total = 0.0;
};

Table contingency(const Clustering& a, const Clustering& b) {
  std::map<ItemId, std::size_t> in_b;
  for (std::size_t j = 0; j < b.clusters.size(); ++j) {
    for (const auto& item : b.clusters[j]) {
      if (!in_b.emplace(item, j).second) throw Error("clustering places item '" + item + "' twice");
    }
  }
  Table t;
  t.rows.assign(a.clusters.size(), 0.0);
  t.cols.assign(b.clusters.size(), 0.0);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    for (const auto& item : a.clusters[i]) {
      auto it = in_b.find(item);
      if (it == in_b.end()) throw Error("clusterings cover different items ('" + item + "')");
      t.cells[{i, it->second}] += 1.0;
      t.rows[i] += 1.0;
      t.cols[it->second] += 1.0;
      ++seen;
    }
  }
  if (seen != in_b.size()) throw Error("clusterings cover different items");
  t.total = static_cast<double>(seen);
  return t;
}

double entropy_of(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log2(c / total);
  }
  return h;
}

double mutual_information_of(const Table& t) {
  double mi = 0.0;
  for (const auto& [rc, n] : t.cells) {
    double pij = n / t.total;
    mi += pij * std::log2(n * t.total / (t.rows[rc.first] * t.cols[rc.second]));
  }
  return std::max(mi, 0.0);
}

const std::string& label_in(const ItemCorpus& corpus, const ItemId& id, const std::string& perspective) {
  const Item& item = corpus.at(id);
  auto it = item.labels.find(perspective);
  if (it == item.labels.end()) {
    throw Error("item '" + id + "' has no ground-truth label for perspective '" + perspective + "'");
  }
  return it->second;
}

std::string concept_of(const ItemSet& items, const ItemCorpus& corpus, const LabelTree& tree,
                       const std::string& perspective) {
  std::optional<std::string> lca;
  for (const auto& id : items) {
    const auto& label = label_in(corpus, id, perspective);
    lca = lca ? tree.lowest_common_ancestor(*lca, label) : label;
  }
  return lca.value_or(tree.root());
}

}  // namespace

double entropy(const Clustering& c) {
  std::vector<double> counts;
  double total = 0.0;
  for (const auto& cluster : c.clusters) {
    counts.push_back(static_cast<double>(cluster.size()));
    total += static_cast<double>(cluster.size());
  }
  return total > 0.0 ? entropy_of(counts, total) : 0.0;
}

double mutual_information(const Clustering& a, const Clustering& b) { return mutual_information_of(contingency(a, b)); }

double variation_of_information(const Clustering& a, const Clustering& b) {
  Table t = contingency(a, b);
  double vi = entropy_of(t.rows, t.total) + entropy_of(t.cols, t.total) - 2.0 * mutual_information_of(t);
  return std::max(vi, 0.0);
}

double normalized_mutual_information(const Clustering& a, const Clustering& b) {
  Table t = contingency(a, b);
  double ha = entropy_of(t.rows, t.total);
  double hb = entropy_of(t.cols, t.total);
  if (ha <= 0.0 || hb <= 0.0) return a.same_partition(b) ? 1.0 : 0.0;
  return std::min(1.0, mutual_information_of(t) / std::sqrt(ha * hb));
}

HierarchyCount clustering_hierarchy_count(const Clustering& c, const ItemCorpus& corpus,
                                          const std::vector<std::string>& perspectives) {
  if (perspectives.empty()) throw Error("clustering_hierarchy_count needs at least one perspective");
  if (perspectives.size() > 16) throw Error("clustering_hierarchy_count supports at most 16 perspectives");
  const std::size_t k = perspectives.size();
  const std::size_t n = c.clusters.size();

  // per perspective: which clusters are homogeneous, which pairs separated
  std::vector<std::vector<bool>> homogeneous(k, std::vector<bool>(n));
  std::vector<std::vector<std::vector<bool>>> separated(k, std::vector<std::vector<bool>>(n, std::vector<bool>(n)));
  for (std::size_t p = 0; p < k; ++p) {
    const LabelTree* tree = corpus.perspective(perspectives[p]);
    if (!tree) throw Error("corpus has no perspective '" + perspectives[p] + "'");
    std::vector<std::string> concepts;
    for (const auto& cluster : c.clusters) concepts.push_back(concept_of(cluster, corpus, *tree, perspectives[p]));
    for (std::size_t i = 0; i < n; ++i) {
      homogeneous[p][i] = c.clusters[i].size() < 2 || concepts[i] != tree->root();
      for (std::size_t j = 0; j < n; ++j) {
        separated[p][i][j] = !tree->is_ancestor_or_self(concepts[i], concepts[j]) &&
                             !tree->is_ancestor_or_self(concepts[j], concepts[i]);
      }
    }
  }

  auto explains = [&](std::uint32_t mask) {
    for (std::size_t i = 0; i < n; ++i) {
      bool ok = false;
      for (std::size_t p = 0; p < k && !ok; ++p) ok = ((mask >> p) & 1U) && homogeneous[p][i];
      if (!ok) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (c.clusters[i].size() < 2 && c.clusters[j].size() < 2) continue;
        bool ok = false;
        for (std::size_t p = 0; p < k && !ok; ++p) ok = ((mask >> p) & 1U) && separated[p][i][j];
        if (!ok) return false;
      }
    }
    return true;
  };

  HierarchyCount best;
  for (std::size_t size = 1; size <= k; ++size) {
    for (std::uint32_t mask = 1; mask < (1U << k); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != size || !explains(mask)) continue;
      best.count = static_cast<int>(size);
      for (std::size_t p = 0; p < k; ++p) {
        if ((mask >> p) & 1U) best.perspectives.push_back(perspectives[p]);
      }
      return best;
    }
  }
  best.count = static_cast<int>(k);
  best.unexplainable = true;
  best.perspectives = perspectives;
  return best;
}

Clustering ground_truth_clustering(const ItemCorpus& corpus, const std::string& perspective, const ItemSet& items) {
  std::map<std::string, ItemSet> groups;
  for (const auto& id : items) groups[label_in(corpus, id, perspective)].insert(id);
  Clustering c;
  c.worker_id = "ground-truth:" + perspective;
  for (auto& [_, group] : groups) c.clusters.push_back(std::move(group));
  return c;
}

Clustering ground_truth_clustering(const ItemCorpus& corpus, const std::string& perspective) {
  return ground_truth_clustering(corpus, perspective, corpus.ids());
}

std::map<NodeId, std::string> label_nodes(const Hierarchy& t, const ItemCorpus& corpus, const std::string& perspective) {
  const LabelTree* tree = corpus.perspective(perspective);
  if (!tree) throw Error("corpus has no perspective '" + perspective + "'");
  std::map<NodeId, std::string> out;
  for (const auto& [id, node] : t.nodes) out[id] = concept_of(node.items, corpus, *tree, perspective);
  return out;
}

}  // namespace crowdorg
