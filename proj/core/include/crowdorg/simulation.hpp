#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "crowdorg/frontier.hpp"
#include "crowdorg/sampling.hpp"
#include "crowdorg/serialization.hpp"

namespace crowdorg {

/// Attribute-record corpus: every item draws one shape, color and size.
struct ShapesSpec {
  LabelTree shapes;
  std::vector<std::string> colors;
  std::vector<std::string> sizes;
  int count = 25;

  /// Polygons/Round shape tree, six colors, two sizes.
  static ShapesSpec standard(int count);
};

/// Corpus over flat concepts, assigned round-robin so concepts are balanced.
struct FlatSpec {
  std::string perspective = "category";
  std::vector<std::string> concepts;
  int count = 0;

  /// `concepts` (at most 20) names modeled on an image-classification corpus.
  static FlatSpec image_categories(int count, int concepts = 20);
};

ItemCorpus generate_shapes_corpus(const ShapesSpec& spec, Rng& rng);
ItemCorpus generate_flat_corpus(const FlatSpec& spec, Rng& rng);

/// {"kind": "shapes", "count": N} or {"kind": "flat", "count": N, "concepts": K}.
ItemCorpus generate_corpus(const json& spec, Rng& rng);

struct WorkerModel {
  // perspective name -> probability of organizing by it
  std::map<std::string, double> hierarchy_weights;
  double split_probability = 0.5;
  double noise_rate = 0.0;

  /// 85/10/5 over shape/color/size.
  static WorkerModel shapes_default();
  static WorkerModel single(const std::string& perspective, double split_probability = 0.5);

  /// Throws crowdorg::Error when weights do not sum to 1 or a probability
  /// falls outside [0, 1].
  void validate() const;
  /// Perspectives by descending weight, then by name.
  std::vector<std::string> by_weight() const;
};

void to_json(json& j, const WorkerModel& m);
void from_json(const json& j, WorkerModel& m);

/// Stream for one simulated worker on one task; stable across platforms.
Rng derive_rng(std::uint64_t seed, std::string_view worker, std::string_view task);

/// Draws a perspective, restricts its tree to the sample, cuts a complete
/// frontier top-down (the effective root always splits, every other branching
/// node with split_probability) and applies item noise.
Clustering simulate_worker_clustering(const WorkerModel& model, const Sample& sample, const ItemCorpus& corpus,
                                      Rng& rng);

/// What a simulated worker reads off the pivots: the perspective under which
/// most clusters look homogeneous, and each cluster's concept under it.
struct PivotReading {
  std::string perspective;
  std::map<NodeId, std::string> concepts;
};

PivotReading read_pivots(const WorkerModel& model, const std::map<NodeId, std::vector<ItemId>>& pivots,
                         const ItemCorpus& corpus);

/// The cluster whose concept is the deepest match (ancestor-or-self, below
/// the root) for the item's label; abstains when none matches. A lone cluster
/// always wins. With noise_rate, a uniformly random cluster instead.
Vote simulate_categorization_vote(const WorkerModel& model, const Item& item, const PivotReading& reading,
                                  const ItemCorpus& corpus, Rng& rng);
Vote simulate_categorization_vote(const WorkerModel& model, const Item& item,
                                  const std::map<NodeId, std::vector<ItemId>>& pivots, const ItemCorpus& corpus,
                                  Rng& rng);

}  // namespace crowdorg
