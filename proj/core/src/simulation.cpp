#include "crowdorg/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace crowdorg {

namespace {

const std::vector<std::string> kImageCategories = {
    "buildings", "cars",    "parrots", "vulture",  "fruit",   "flower",   "vegetable",
    "fighter",   "commercial", "helicopter", "ship", "seahorse", "whale", "cheetah",
    "lion",      "elephant", "tiger",   "jellyfish", "sparrow", "leaves"};

std::string padded_id(const std::string& prefix, int i, int width) {
  std::string s = std::to_string(i);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return prefix + s;
}

int digits(int n) { return n < 10 ? 1 : 1 + digits(n / 10); }

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

const std::string& label_of(const Item& item, const std::string& perspective) {
  auto it = item.labels.find(perspective);
  if (it == item.labels.end()) {
    throw Error("item '" + item.id + "' has no ground-truth label for perspective '" + perspective + "'");
  }
  return it->second;
}

// Cuts the perspective tree restricted to the sample items.
class FrontierCutter {
 public:
  FrontierCutter(const LabelTree& tree, std::map<std::string, ItemSet> by_leaf, double split, Rng& rng)
      : tree_(tree), by_leaf_(std::move(by_leaf)), split_(split), rng_(rng) {}

  std::vector<ItemSet> cut() {
    std::vector<ItemSet> out;
    visit(tree_.root(), true, out);
    return out;
  }

 private:
  ItemSet items_below(const std::string& label) const {
    ItemSet out;
    for (const auto& [leaf, items] : by_leaf_) {
      if (tree_.is_ancestor_or_self(label, leaf)) out.insert(items.begin(), items.end());
    }
    return out;
  }

  std::vector<std::string> populated_children(const std::string& label) const {
    std::vector<std::string> out;
    for (const auto& child : tree_.children(label)) {
      for (const auto& [leaf, _] : by_leaf_) {
        if (tree_.is_ancestor_or_self(child, leaf)) {
          out.push_back(child);
          break;
        }
      }
    }
    return out;
  }

  void visit(const std::string& label, bool effective_root, std::vector<ItemSet>& out) {
    auto kids = populated_children(label);
    if (kids.empty()) {
      out.push_back(items_below(label));
      return;
    }
    if (kids.size() == 1) {
      // a concept with a single populated child is the same set of items
      visit(kids.front(), effective_root, out);
      return;
    }
    std::bernoulli_distribution coin(split_);
    if (!effective_root && !coin(rng_)) {
      out.push_back(items_below(label));
      return;
    }
    for (const auto& kid : kids) visit(kid, false, out);
  }

  const LabelTree& tree_;
  std::map<std::string, ItemSet> by_leaf_;
  double split_;
  Rng& rng_;
};

}  // namespace

ShapesSpec ShapesSpec::standard(int count) {
  ShapesSpec s;
  s.shapes.add("Universe", "Polygons");
  s.shapes.add("Universe", "Round");
  s.shapes.add("Polygons", "Quadrilaterals");
  s.shapes.add("Polygons", "Triangles");
  s.shapes.add("Quadrilaterals", "Rectangles");
  s.shapes.add("Quadrilaterals", "Squares");
  s.shapes.add("Triangles", "Equilateral");
  s.shapes.add("Triangles", "Scalene");
  s.shapes.add("Round", "Circles");
  s.shapes.add("Round", "Ellipses");
  s.colors = {"Red", "Green", "Blue", "Yellow", "Pink", "Cyan"};
  s.sizes = {"Small", "Big"};
  s.count = count;
  return s;
}

FlatSpec FlatSpec::image_categories(int count, int concepts) {
  if (concepts < 1 || concepts > static_cast<int>(kImageCategories.size())) {
    throw Error("image_categories: between 1 and 20 concepts supported");
  }
  FlatSpec s;
  s.concepts.assign(kImageCategories.begin(), kImageCategories.begin() + concepts);
  s.count = count;
  return s;
}

ItemCorpus generate_shapes_corpus(const ShapesSpec& spec, Rng& rng) {
  if (spec.count < 1) throw Error("shapes corpus needs at least one item");
  auto shape_leaves = spec.shapes.leaves();
  std::vector<Item> items;
  int width = digits(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    Item item;
    item.id = padded_id("shape-", i, width);
    item.labels["shape"] = pick(shape_leaves, rng);
    item.labels["color"] = pick(spec.colors, rng);
    item.labels["size"] = pick(spec.sizes, rng);
    item.payload = "attr:" + item.labels["size"] + "/" + item.labels["color"] + "/" + item.labels["shape"];
    items.push_back(std::move(item));
  }
  std::map<std::string, LabelTree> perspectives;
  perspectives.emplace("shape", spec.shapes);
  perspectives.emplace("color", LabelTree::flat(spec.colors));
  perspectives.emplace("size", LabelTree::flat(spec.sizes));
  return ItemCorpus("shapes", std::move(items), std::move(perspectives));
}

ItemCorpus generate_flat_corpus(const FlatSpec& spec, Rng& rng) {
  if (spec.count < 1 || spec.concepts.empty()) throw Error("flat corpus needs items and concepts");
  std::vector<std::string> labels;
  for (int i = 0; i < spec.count; ++i) labels.push_back(spec.concepts[static_cast<std::size_t>(i) % spec.concepts.size()]);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<Item> items;
  int width = digits(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    Item item;
    item.id = padded_id("img-", i, width);
    item.payload = "image://" + labels[static_cast<std::size_t>(i)] + "/" + item.id + ".jpg";
    item.labels[spec.perspective] = labels[static_cast<std::size_t>(i)];
    items.push_back(std::move(item));
  }
  std::map<std::string, LabelTree> perspectives;
  perspectives.emplace(spec.perspective, LabelTree::flat(spec.concepts));
  return ItemCorpus("flat", std::move(items), std::move(perspectives));
}

ItemCorpus generate_corpus(const json& spec, Rng& rng) {
  std::string kind = spec.value("kind", std::string("shapes"));
  int count = spec.value("count", 0);
  if (kind == "shapes") return generate_shapes_corpus(ShapesSpec::standard(count), rng);
  if (kind == "flat") return generate_flat_corpus(FlatSpec::image_categories(count, spec.value("concepts", 20)), rng);
  throw Error("unknown corpus kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Worker model

WorkerModel WorkerModel::shapes_default() {
  WorkerModel m;
  m.hierarchy_weights = {{"shape", 0.85}, {"color", 0.10}, {"size", 0.05}};
  return m;
}

WorkerModel WorkerModel::single(const std::string& perspective, double split_probability) {
  WorkerModel m;
  m.hierarchy_weights = {{perspective, 1.0}};
  m.split_probability = split_probability;
  return m;
}

void WorkerModel::validate() const {
  if (hierarchy_weights.empty()) throw Error("worker model has no perspectives");
  double total = 0.0;
  for (const auto& [name, w] : hierarchy_weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw Error("weight of perspective '" + name + "' outside [0, 1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("perspective weights sum to " + std::to_string(total));
  if (!(split_probability >= 0.0 && split_probability <= 1.0)) throw Error("split_probability outside [0, 1]");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error("noise_rate outside [0, 1]");
}

std::vector<std::string> WorkerModel::by_weight() const {
  std::vector<std::pair<std::string, double>> v(hierarchy_weights.begin(), hierarchy_weights.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [name, _] : v) out.push_back(name);
  return out;
}

void to_json(json& j, const WorkerModel& m) {
  j = json{{"schema", schema_tag("worker-model")},
           {"hierarchy_weights", m.hierarchy_weights},
           {"split_probability", m.split_probability},
           {"noise_rate", m.noise_rate}};
}

void from_json(const json& j, WorkerModel& m) {
  m.hierarchy_weights = j.at("hierarchy_weights").get<std::map<std::string, double>>();
  m.split_probability = j.value("split_probability", 0.5);
  m.noise_rate = j.value("noise_rate", 0.0);
  m.validate();
}

Rng derive_rng(std::uint64_t seed, std::string_view worker, std::string_view task) {
  std::uint64_t h = 14695981039346656037ULL ^ seed;
  h = fnv1a(worker, h);
  h = fnv1a("/", h);
  h = fnv1a(task, h);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

Clustering simulate_worker_clustering(const WorkerModel& model, const Sample& sample, const ItemCorpus& corpus,
                                      Rng& rng) {
  std::vector<std::string> names;
  std::vector<double> weights;
  for (const auto& [name, w] : model.hierarchy_weights) {
    names.push_back(name);
    weights.push_back(w);
  }
  std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
  const std::string& perspective = names[choose(rng)];
  const LabelTree* tree = corpus.perspective(perspective);
  if (!tree) throw Error("corpus has no perspective '" + perspective + "'");

  std::map<std::string, ItemSet> by_leaf;
  for (const auto& id : sample.items) by_leaf[label_of(corpus.at(id), perspective)].insert(id);

  Clustering c;
  c.sample_id = sample.sample_id;
  c.clusters = FrontierCutter(*tree, std::move(by_leaf), model.split_probability, rng).cut();

  if (model.noise_rate > 0.0 && c.clusters.size() > 1) {
    std::bernoulli_distribution flip(model.noise_rate);
    std::uniform_int_distribution<std::size_t> other(0, c.clusters.size() - 2);
    std::vector<std::pair<ItemId, std::size_t>> moves;
    for (std::size_t k = 0; k < c.clusters.size(); ++k) {
      for (const auto& item : c.clusters[k]) {
        if (!flip(rng)) continue;
        std::size_t to = other(rng);
        if (to >= k) ++to;
        moves.emplace_back(item, to);
      }
    }
    for (auto& cluster : c.clusters) {
      for (const auto& [item, _] : moves) cluster.erase(item);
    }
    for (const auto& [item, to] : moves) c.clusters[to].insert(item);
    std::erase_if(c.clusters, [](const ItemSet& s) { return s.empty(); });
  }
  return c;
}

PivotReading read_pivots(const WorkerModel& model, const std::map<NodeId, std::vector<ItemId>>& pivots,
                         const ItemCorpus& corpus) {
  if (pivots.empty()) throw Error("categorization needs at least one pivot cluster");
  PivotReading best;
  int best_score = -1;
  for (const auto& perspective : model.by_weight()) {
    const LabelTree* tree = corpus.perspective(perspective);
    if (!tree) continue;
    PivotReading r;
    r.perspective = perspective;
    int score = 0;
    for (const auto& [cluster, items] : pivots) {
      std::optional<std::string> lca;
      for (const auto& id : items) {
        const auto& label = label_of(corpus.at(id), perspective);
        lca = lca ? tree->lowest_common_ancestor(*lca, label) : label;
      }
      if (!lca) continue;
      if (*lca != tree->root()) ++score;
      r.concepts[cluster] = *lca;
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(r);
    }
  }
  if (best_score < 0) throw Error("pivots carry no perspective known to the worker model");
  return best;
}

Vote simulate_categorization_vote(const WorkerModel& model, const Item& item, const PivotReading& reading,
                                  const ItemCorpus& corpus, Rng& rng) {
  if (reading.concepts.empty()) throw Error("categorization needs at least one pivot cluster");
  std::vector<NodeId> clusters;
  for (const auto& [id, _] : reading.concepts) clusters.push_back(id);
  if (model.noise_rate > 0.0 && std::bernoulli_distribution(model.noise_rate)(rng)) return pick(clusters, rng);
  if (clusters.size() == 1) return clusters.front();

  const LabelTree* tree = corpus.perspective(reading.perspective);
  const std::string& label = label_of(item, reading.perspective);
  Vote best;
  std::size_t best_depth = 0;
  for (const auto& [id, concept_label] : reading.concepts) {
    if (concept_label == tree->root() || !tree->is_ancestor_or_self(concept_label, label)) continue;
    std::size_t d = tree->depth(concept_label);
    if (!best || d > best_depth) {
      best = id;
      best_depth = d;
    }
  }
  return best;
}

Vote simulate_categorization_vote(const WorkerModel& model, const Item& item,
                                  const std::map<NodeId, std::vector<ItemId>>& pivots, const ItemCorpus& corpus,
                                  Rng& rng) {
  return simulate_categorization_vote(model, item, read_pivots(model, pivots, corpus), corpus, rng);
}

}  // namespace crowdorg
