#include "crowdorg/serialization.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace crowdorg {

namespace {

void check_schema(const json& j, const std::string& type) {
  if (!j.is_object()) throw Error(type + ": expected a JSON object");
  auto it = j.find("schema");
  if (it != j.end() && it->get<std::string>() != schema_tag(type)) {
    throw Error(type + ": unexpected schema tag '" + it->get<std::string>() + "'");
  }
}

json tree_node(const LabelTree& tree, const std::string& label) {
  json node{{"label", label}};
  const auto& kids = tree.children(label);
  if (!kids.empty()) {
    json arr = json::array();
    for (const auto& k : kids) arr.push_back(tree_node(tree, k));
    node["children"] = std::move(arr);
  }
  return node;
}

void add_tree_children(LabelTree& tree, const std::string& parent, const json& node) {
  auto it = node.find("children");
  if (it == node.end()) return;
  for (const auto& child : *it) {
    std::string label = child.at("label").get<std::string>();
    tree.add(parent, label);
    add_tree_children(tree, label, child);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void format_node(std::ostringstream& os, const Hierarchy& t, NodeId id, int indent, bool with_items) {
  const ConceptNode& n = t.node(id);
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << "[" << id << "] "
     << (n.label ? *n.label : std::string(n.pending ? "(pending)" : "(unlabeled)")) << " {"
     << n.items.size() << "}";
  if (with_items && n.is_leaf()) {
    os << ":";
    for (const auto& item : n.items) os << " " << item;
  }
  os << "\n";
  for (NodeId child : n.children) format_node(os, t, child, indent + 1, with_items);
}

}  // namespace

std::string schema_tag(const std::string& type) { return std::string(kSchemaPrefix) + type + "/v1"; }

void to_json(json& j, const Item& item) {
  j = json{{"id", item.id}, {"payload", item.payload}};
  if (!item.labels.empty()) j["ground_truth_labels"] = item.labels;
}

void from_json(const json& j, Item& item) {
  item.id = j.at("id").get<std::string>();
  item.payload = j.value("payload", std::string{});
  item.labels = j.value("ground_truth_labels", std::map<std::string, std::string>{});
}

void to_json(json& j, const LabelTree& tree) { j = tree_node(tree, tree.root()); }

void from_json(const json& j, LabelTree& tree) {
  tree = LabelTree(j.at("label").get<std::string>());
  add_tree_children(tree, tree.root(), j);
}

void to_json(json& j, const ItemCorpus& corpus) {
  j = json{{"schema", schema_tag("corpus")}, {"name", corpus.name()}, {"items", corpus.items()}};
  if (!corpus.perspectives().empty()) j["perspectives"] = corpus.perspectives();
}

void from_json(const json& j, ItemCorpus& corpus) {
  check_schema(j, "corpus");
  auto items = j.at("items").get<std::vector<Item>>();
  std::map<std::string, LabelTree> perspectives;
  if (auto it = j.find("perspectives"); it != j.end()) {
    for (const auto& [name, tree] : it->items()) perspectives.emplace(name, tree.get<LabelTree>());
  }
  corpus = ItemCorpus(j.value("name", std::string("corpus")), std::move(items), std::move(perspectives));
}

void to_json(json& j, const Clustering& c) {
  j = json{{"schema", schema_tag("clustering")},
           {"worker_id", c.worker_id},
           {"sample_id", c.sample_id},
           {"clusters", c.clusters}};
}

void from_json(const json& j, Clustering& c) {
  check_schema(j, "clustering");
  c.worker_id = j.value("worker_id", std::string{});
  c.sample_id = j.value("sample_id", std::string{});
  c.clusters = j.at("clusters").get<std::vector<ItemSet>>();
}

void to_json(json& j, const ConceptNode& n) {
  j = json{{"id", n.id}, {"children", n.children}, {"items", n.items}};
  if (n.label) j["label"] = *n.label;
  if (n.pending) j["pending"] = true;
}

void from_json(const json& j, ConceptNode& n) {
  n.id = j.at("id").get<NodeId>();
  n.children = j.value("children", std::vector<NodeId>{});
  n.items = j.value("items", ItemSet{});
  n.label = j.contains("label") ? std::optional<std::string>(j.at("label").get<std::string>()) : std::nullopt;
  n.pending = j.value("pending", false);
  n.parent.reset();
}

void to_json(json& j, const Hierarchy& t) {
  json nodes = json::array();
  for (NodeId id : t.preorder()) nodes.push_back(t.node(id));
  j = json{{"schema", schema_tag("hierarchy")}, {"root", t.root}, {"next_id", t.next_id}, {"nodes", nodes}};
}

void from_json(const json& j, Hierarchy& t) {
  check_schema(j, "hierarchy");
  t = Hierarchy{};
  t.root = j.at("root").get<NodeId>();
  NodeId max_id = 0;
  for (const auto& jn : j.at("nodes")) {
    auto n = jn.get<ConceptNode>();
    max_id = std::max(max_id, n.id);
    if (!t.nodes.emplace(n.id, std::move(n)).second) throw Error("hierarchy: duplicate node id");
  }
  for (auto& [id, n] : t.nodes) {
    for (NodeId child : n.children) {
      auto it = t.nodes.find(child);
      if (it == t.nodes.end()) throw Error("hierarchy: node " + std::to_string(id) + " lists unknown child");
      it->second.parent = id;
    }
  }
  t.next_id = j.value("next_id", max_id + 1);
  if (auto it = t.nodes.find(t.root); it != t.nodes.end()) t.covered_items = it->second.items;
}

void to_json(json& j, const Frontier& fr) {
  j = json{{"schema", schema_tag("frontier")}, {"nodes", fr.nodes}};
}

void from_json(const json& j, Frontier& fr) {
  check_schema(j, "frontier");
  fr.nodes = j.at("nodes").get<std::set<NodeId>>();
}

void to_json(json& j, const Sample& s) {
  j = json{{"schema", schema_tag("sample")},
           {"sample_id", s.sample_id},
           {"items", s.items},
           {"kernel", s.kernel},
           {"iteration", s.iteration}};
}

void from_json(const json& j, Sample& s) {
  check_schema(j, "sample");
  s.sample_id = j.at("sample_id").get<std::string>();
  s.items = j.at("items").get<ItemSet>();
  s.kernel = j.value("kernel", ItemSet{});
  s.iteration = j.value("iteration", 1);
}

void to_json(json& j, const WorkflowConfig& c) {
  j = json{{"schema", schema_tag("workflow-config")},
           {"delta", c.delta},
           {"f", c.f},
           {"h", c.h},
           {"m", c.m},
           {"theta", c.theta},
           {"rng_seed", c.rng_seed},
           {"pivots_per_cluster", c.pivots_per_cluster},
           {"categorization_batch", c.categorization_batch}};
  j["n"] = c.n ? json(*c.n) : json(nullptr);
}

void from_json(const json& j, WorkflowConfig& c) {
  check_schema(j, "workflow-config");
  WorkflowConfig d;
  c.delta = j.value("delta", d.delta);
  c.f = j.value("f", d.f);
  c.h = j.value("h", d.h);
  c.m = j.value("m", d.m);
  c.theta = j.value("theta", d.theta);
  c.rng_seed = j.value("rng_seed", d.rng_seed);
  c.pivots_per_cluster = j.value("pivots_per_cluster", d.pivots_per_cluster);
  c.categorization_batch = j.value("categorization_batch", d.categorization_batch);
  c.n = (j.contains("n") && !j.at("n").is_null()) ? std::optional<int>(j.at("n").get<int>()) : std::nullopt;
}

void to_json(json& j, const ValidationReport& r) {
  json arr = json::array();
  for (const auto& v : r.violations) {
    arr.push_back(json{{"condition", v.condition}, {"detail", v.detail}, {"subjects", v.subjects}});
  }
  j = json{{"ok", r.ok()}, {"violations", arr}};
}

// ---------------------------------------------------------------------------
// Manifest

ItemCorpus parse_corpus_manifest(std::istream& in, const std::string& default_name) {
  std::string name = default_name;
  std::map<std::string, LabelTree> trees;
  std::vector<std::pair<std::string, std::pair<std::string, std::vector<std::string>>>> tree_lines;
  std::vector<Item> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      std::string body = trim(line.substr(1));
      if (body.rfind("name:", 0) == 0) {
        name = trim(body.substr(5));
      } else if (body.rfind("tree ", 0) == 0) {
        std::istringstream is(body.substr(5));
        std::string perspective, parent, children;
        if (!(is >> perspective >> parent >> children)) {
          throw Error("manifest line " + std::to_string(line_no) + ": malformed tree declaration");
        }
        tree_lines.push_back({perspective, {parent, split(children, ',')}});
      }
      continue;
    }
    auto fields = split(line, '\t');
    Item item;
    item.id = trim(fields[0]);
    if (item.id.empty()) throw Error("manifest line " + std::to_string(line_no) + ": empty item id");
    if (fields.size() > 1) item.payload = trim(fields[1]);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      auto eq = fields[i].find('=');
      if (eq == std::string::npos) {
        throw Error("manifest line " + std::to_string(line_no) + ": expected perspective=label");
      }
      item.labels[trim(fields[i].substr(0, eq))] = trim(fields[i].substr(eq + 1));
    }
    items.push_back(std::move(item));
  }

  for (const auto& [perspective, decl] : tree_lines) {
    auto [it, inserted] = trees.try_emplace(perspective, LabelTree("Universe"));
    LabelTree& tree = it->second;
    if (!tree.contains(decl.first)) tree.add(tree.root(), decl.first);
    for (const auto& child : decl.second) tree.add(decl.first, child);
  }
  std::map<std::string, std::set<std::string>> undeclared;
  for (const auto& item : items) {
    for (const auto& [perspective, label] : item.labels) {
      if (!trees.contains(perspective)) undeclared[perspective].insert(label);
    }
  }
  for (const auto& [perspective, labels] : undeclared) {
    trees.emplace(perspective, LabelTree::flat({labels.begin(), labels.end()}));
  }
  return ItemCorpus(name, std::move(items), std::move(trees));
}

void write_corpus_manifest(std::ostream& out, const ItemCorpus& corpus) {
  out << "# crowdorg corpus manifest\n# name: " << corpus.name() << "\n";
  for (const auto& [perspective, tree] : corpus.perspectives()) {
    std::vector<std::string> stack{tree.root()};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      const auto& kids = tree.children(cur);
      if (kids.empty()) continue;
      out << "# tree " << perspective << " " << cur << " ";
      for (std::size_t i = 0; i < kids.size(); ++i) out << (i ? "," : "") << kids[i];
      out << "\n";
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
  }
  for (const auto& item : corpus.items()) {
    out << item.id << "\t" << item.payload;
    for (const auto& [perspective, label] : item.labels) out << "\t" << perspective << "=" << label;
    out << "\n";
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

ItemCorpus load_corpus(const std::filesystem::path& path) {
  if (path.extension() == ".json") return read_json_file(path).get<ItemCorpus>();
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_corpus_manifest(in, path.stem().string());
}

Clustering load_clustering(const std::filesystem::path& path) { return read_json_file(path).get<Clustering>(); }

WorkflowConfig load_config(const std::filesystem::path& path) {
  return read_json_file(path).get<WorkflowConfig>();
}

std::string format_hierarchy(const Hierarchy& t, bool with_items) {
  std::ostringstream os;
  if (!t.empty()) format_node(os, t, t.root, 0, with_items);
  return os.str();
}

}  // namespace crowdorg
