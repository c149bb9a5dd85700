#pragma once

// JSON encodings of the model types. Every top-level document carries a
// "schema" tag ("crowdorg/<type>/v1"); the matching JSON Schema files live in
// schemas/.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "crowdorg/model.hpp"

namespace crowdorg {

using json = nlohmann::json;

inline constexpr const char* kSchemaPrefix = "crowdorg/";
std::string schema_tag(const std::string& type);

void to_json(json& j, const Item& item);
void from_json(const json& j, Item& item);
void to_json(json& j, const LabelTree& tree);
void from_json(const json& j, LabelTree& tree);
void to_json(json& j, const ItemCorpus& corpus);
void from_json(const json& j, ItemCorpus& corpus);
void to_json(json& j, const Clustering& c);
void from_json(const json& j, Clustering& c);
void to_json(json& j, const ConceptNode& n);
void from_json(const json& j, ConceptNode& n);
void to_json(json& j, const Hierarchy& t);
void from_json(const json& j, Hierarchy& t);
void to_json(json& j, const Frontier& fr);
void from_json(const json& j, Frontier& fr);
void to_json(json& j, const Sample& s);
void from_json(const json& j, Sample& s);
void to_json(json& j, const WorkflowConfig& c);
void from_json(const json& j, WorkflowConfig& c);
void to_json(json& j, const ValidationReport& r);

/// Plain-text corpus manifest:
///
///   # name: <corpus name>
///   # tree <perspective> <parent> <child>,<child>,...
///   <id>\t<payload-uri>[\t<perspective>=<label>]...
///
/// Perspectives whose labels are never declared with `# tree` lines become
/// flat trees under "Universe".
ItemCorpus parse_corpus_manifest(std::istream& in, const std::string& default_name = "corpus");
void write_corpus_manifest(std::ostream& out, const ItemCorpus& corpus);

/// Loads a corpus from a .json document or a manifest (any other extension).
ItemCorpus load_corpus(const std::filesystem::path& path);
Clustering load_clustering(const std::filesystem::path& path);
WorkflowConfig load_config(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// Indented tree dump for humans.
std::string format_hierarchy(const Hierarchy& t, bool with_items = false);

}  // namespace crowdorg
