#include "crowdorg/label_tree.hpp"

#include <algorithm>

#include "crowdorg/model.hpp"

namespace crowdorg {

LabelTree::LabelTree(std::string root) : root_(std::move(root)) { children_[root_]; }

LabelTree LabelTree::flat(const std::vector<std::string>& labels, std::string root) {
  LabelTree tree(std::move(root));
  for (const auto& label : labels) tree.add(tree.root(), label);
  return tree;
}

void LabelTree::add(const std::string& parent, const std::string& child) {
  if (!children_.contains(parent)) throw Error("label tree: unknown parent '" + parent + "'");
  if (children_.contains(child)) throw Error("label tree: duplicate label '" + child + "'");
  parent_[child] = parent;
  children_[parent].push_back(child);
  children_[child];
}

bool LabelTree::contains(const std::string& label) const { return children_.contains(label); }

const std::string& LabelTree::checked(const std::string& label) const {
  if (!contains(label)) throw Error("label tree: unknown label '" + label + "'");
  return label;
}

std::optional<std::string> LabelTree::parent(const std::string& label) const {
  checked(label);
  auto it = parent_.find(label);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& LabelTree::children(const std::string& label) const {
  return children_.at(checked(label));
}

std::vector<std::string> LabelTree::leaves() const {
  std::vector<std::string> out;
  // declaration order, depth first
  std::vector<std::string> stack{root_};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    const auto& kids = children_.at(cur);
    if (kids.empty()) out.push_back(cur);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<std::string> LabelTree::labels() const {
  std::vector<std::string> out;
  out.reserve(children_.size());
  for (const auto& [label, _] : children_) out.push_back(label);
  return out;
}

std::size_t LabelTree::depth(const std::string& label) const {
  std::size_t d = 0;
  for (auto p = parent(label); p; p = parent(*p)) ++d;
  return d;
}

bool LabelTree::is_ancestor_or_self(const std::string& ancestor, const std::string& label) const {
  checked(ancestor);
  for (std::optional<std::string> cur = checked(label); cur; cur = parent(*cur)) {
    if (*cur == ancestor) return true;
  }
  return false;
}

std::string LabelTree::lowest_common_ancestor(const std::string& a, const std::string& b) const {
  std::vector<std::string> chain;
  for (std::optional<std::string> cur = checked(a); cur; cur = parent(*cur)) chain.push_back(*cur);
  for (std::optional<std::string> cur = checked(b); cur; cur = parent(*cur)) {
    if (std::find(chain.begin(), chain.end(), *cur) != chain.end()) return *cur;
  }
  return root_;
}

}  // namespace crowdorg
