#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crowdorg {

/// A named concept tree for one perspective (shape, color, ...). Items carry
/// the name of a leaf of each tree as their ground-truth label.
class LabelTree {
 public:
  explicit LabelTree(std::string root = "Universe");

  /// Flat tree: every label is a direct child of the root.
  static LabelTree flat(const std::vector<std::string>& labels, std::string root = "Universe");

  /// Adds `child` under `parent`. Throws crowdorg::Error when `parent` is
  /// unknown or `child` already exists.
  void add(const std::string& parent, const std::string& child);

  const std::string& root() const noexcept { return root_; }
  bool contains(const std::string& label) const;
  std::optional<std::string> parent(const std::string& label) const;
  const std::vector<std::string>& children(const std::string& label) const;
  bool is_leaf(const std::string& label) const { return children(label).empty(); }
  std::vector<std::string> leaves() const;
  std::vector<std::string> labels() const;
  std::size_t depth(const std::string& label) const;

  bool is_ancestor_or_self(const std::string& ancestor, const std::string& label) const;
  std::string lowest_common_ancestor(const std::string& a, const std::string& b) const;

  bool operator==(const LabelTree&) const = default;

 private:
  const std::string& checked(const std::string& label) const;

  std::string root_;
  std::map<std::string, std::string> parent_;
  std::map<std::string, std::vector<std::string>> children_;
};

}  // namespace crowdorg
