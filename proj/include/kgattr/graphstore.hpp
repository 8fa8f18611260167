#pragma once

// Per-image star graphs, the merged global graph with its inverted attribute
// index, persistence as triple TSV, and CSV bulk export.

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgattr/error.hpp"
#include "kgattr/extraction.hpp"
#include "kgattr/ontology.hpp"
#include "kgattr/text.hpp"

namespace kgattr {

// Attribute node identity is the qualified (predicate, value) pair.
struct AttrNode {
  std::string predicate;
  std::string value;

  auto operator<=>(const AttrNode&) const = default;
};

using NodeSet = std::set<AttrNode>;

struct ImageGraph {
  std::string image_id;
  NodeSet nodes;
  std::optional<std::string> source_label;

  bool operator==(const ImageGraph&) const = default;
};

enum class MatchMode { kQualified, kValueOnly };

// Predicate used for every node once graphs are projected to value-only mode.
inline constexpr std::string_view kAnyPredicate = "*";

inline MatchMode parse_match_mode(std::string_view s) {
  if (s == "qualified") return MatchMode::kQualified;
  if (s == "value-only" || s == "value") return MatchMode::kValueOnly;
  throw UsageError("unknown match mode '" + std::string(s) + "' (expected qualified|value-only)");
}

inline std::string_view to_string(MatchMode m) {
  return m == MatchMode::kQualified ? "qualified" : "value-only";
}

inline ImageGraph project(const ImageGraph& g, MatchMode mode) {
  if (mode == MatchMode::kQualified) return g;
  ImageGraph out{g.image_id, {}, g.source_label};
  for (const auto& n : g.nodes) out.nodes.insert({std::string(kAnyPredicate), n.value});
  return out;
}

inline ImageGraph build_image_graph(std::span<const Triple> triples) {
  ImageGraph g;
  if (triples.empty()) return g;
  g.image_id = triples.front().subject;
  for (const auto& t : triples) {
    if (t.subject != g.image_id) {
      throw DomainError("triples for one image graph mix subjects '" + g.image_id + "' and '" +
                        t.subject + "'");
    }
    g.nodes.insert({t.predicate, t.object});
  }
  return g;
}

// Groups triples by subject, one graph per image, ordered by image id.
inline std::vector<ImageGraph> graphs_from_triples(std::span<const Triple> triples) {
  std::map<std::string, ImageGraph> by_id;
  for (const auto& t : triples) {
    auto& g = by_id[t.subject];
    g.image_id = t.subject;
    g.nodes.insert({t.predicate, t.object});
  }
  std::vector<ImageGraph> out;
  out.reserve(by_id.size());
  for (auto& [id, g] : by_id) out.push_back(std::move(g));
  return out;
}

class GlobalGraph {
 public:
  using ImageMap = std::map<std::string, ImageGraph, std::less<>>;
  using Index = std::map<AttrNode, std::set<std::string>>;

  void add(ImageGraph graph) {
    if (images_.contains(graph.image_id)) {
      throw ConflictError("duplicate image id '" + graph.image_id + "'");
    }
    for (const auto& n : graph.nodes) index_[n].insert(graph.image_id);
    auto id = graph.image_id;
    images_.emplace(std::move(id), std::move(graph));
  }

  bool remove(std::string_view image_id) {
    auto it = images_.find(image_id);
    if (it == images_.end()) return false;
    for (const auto& n : it->second.nodes) {
      auto idx = index_.find(n);
      idx->second.erase(it->first);
      if (idx->second.empty()) index_.erase(idx);
    }
    images_.erase(it);
    return true;
  }

  void set_label(std::string_view image_id, std::string label) {
    auto it = images_.find(image_id);
    if (it == images_.end()) throw LookupError("unknown image id '" + std::string(image_id) + "'");
    it->second.source_label = std::move(label);
  }

  const ImageGraph* find(std::string_view image_id) const {
    auto it = images_.find(image_id);
    return it == images_.end() ? nullptr : &it->second;
  }

  const ImageGraph& at(std::string_view image_id) const {
    if (auto* g = find(image_id)) return *g;
    throw LookupError("unknown image id '" + std::string(image_id) + "'");
  }

  // Images containing `node`; empty set when absent.
  const std::set<std::string>& holders(const AttrNode& node) const {
    static const std::set<std::string> kEmpty;
    auto it = index_.find(node);
    return it == index_.end() ? kEmpty : it->second;
  }

  const ImageMap& images() const noexcept { return images_; }
  const Index& index() const noexcept { return index_; }
  std::size_t size() const noexcept { return images_.size(); }
  bool empty() const noexcept { return images_.empty(); }

  // index[n] == {i : n in images[i].nodes}, with no empty entries.
  bool index_consistent() const {
    Index expected;
    for (const auto& [id, g] : images_) {
      for (const auto& n : g.nodes) expected[n].insert(id);
    }
    return expected == index_;
  }

  bool operator==(const GlobalGraph& other) const { return images_ == other.images_; }

 private:
  ImageMap images_;
  Index index_;
};

inline GlobalGraph merge_global(std::vector<ImageGraph> graphs) {
  GlobalGraph global;
  for (auto& g : graphs) global.add(std::move(g));
  return global;
}

inline std::vector<ImageGraph> graphs_of(const GlobalGraph& global) {
  std::vector<ImageGraph> out;
  out.reserve(global.size());
  for (const auto& [id, g] : global.images()) out.push_back(g);
  return out;
}

inline GlobalGraph project(const GlobalGraph& global, MatchMode mode) {
  if (mode == MatchMode::kQualified) return global;
  GlobalGraph out;
  for (const auto& [id, g] : global.images()) out.add(project(g, mode));
  return out;
}

// ---------------------------------------------------------------------------

struct FrequencyEntry {
  AttrNode node;
  std::size_t count = 0;

  bool operator==(const FrequencyEntry&) const = default;
};

// Most frequent attribute nodes: count descending, then node ascending.
inline std::vector<FrequencyEntry> attribute_frequency(const GlobalGraph& global,
                                                       std::size_t top_k) {
  std::vector<FrequencyEntry> entries;
  entries.reserve(global.index().size());
  for (const auto& [node, ids] : global.index()) entries.push_back({node, ids.size()});
  auto n = std::min(top_k, entries.size());
  auto by_count = [](const FrequencyEntry& a, const FrequencyEntry& b) {
    return a.count != b.count ? a.count > b.count : a.node < b.node;
  };
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n),
                    entries.end(), by_count);
  entries.resize(n);
  return entries;
}

// ---------------------------------------------------------------------------
// Persistence

using LabelMap = std::map<std::string, std::string, std::less<>>;

inline std::vector<Triple> triples_of(const GlobalGraph& global) {
  std::vector<Triple> out;
  for (const auto& [id, g] : global.images()) {
    for (const auto& n : g.nodes) out.push_back({id, n.predicate, n.value});
  }
  return out;
}

// Images without nodes have no triple and are not written.
inline void save_triples(const GlobalGraph& global, const std::filesystem::path& path) {
  save_triple_file(path, triples_of(global));
}

struct LoadOptions {
  // Lenient loading skips offending lines with a warning instead of failing.
  bool lenient = false;
  PlaceholderSet placeholders = default_placeholders();
};

struct LoadResult {
  GlobalGraph graph;
  std::vector<std::string> warnings;
};

// Parses triple TSV content. Predicates are validated against the ontology and
// rewritten to its spelling; objects are normalized; placeholder objects are
// removed. Malformed lines always fail.
inline LoadResult parse_triples(std::string_view source, const std::vector<std::string>& lines,
                                const Ontology& ontology, const LabelMap* labels = nullptr,
                                const LoadOptions& options = {}) {
  std::vector<Triple> triples;
  std::vector<std::string> problems;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(std::string(source), n + 1,
                       "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    auto subject = trim(fields[0]);
    if (subject.empty()) throw ParseError(std::string(source), n + 1, "empty image id");
    auto where = std::string(source) + ":" + std::to_string(n + 1) + ": ";
    const auto* rel = ontology.find(fields[1]);
    if (rel == nullptr) {
      problems.push_back(where + "unknown predicate '" + std::string(trim(fields[1])) + "'");
      continue;
    }
    auto object = normalize_value(fields[2]);
    if (is_placeholder(object, options.placeholders)) {
      problems.push_back(where + "placeholder object '" + std::string(trim(fields[2])) + "'");
      continue;
    }
    if (!rel->allows(object)) {
      problems.push_back(where + "value '" + object + "' outside the vocabulary of " + rel->name);
      continue;
    }
    triples.push_back({std::string(subject), rel->name, std::move(object)});
  }
  if (!problems.empty() && !options.lenient) {
    std::string msg = std::to_string(problems.size()) + " invalid triple line(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  LoadResult result;
  result.warnings = std::move(problems);
  for (auto& g : graphs_from_triples(triples)) {
    if (labels) {
      if (auto it = labels->find(g.image_id); it != labels->end()) g.source_label = it->second;
    }
    result.graph.add(std::move(g));
  }
  return result;
}

inline LoadResult load_triples(const std::filesystem::path& path, const Ontology& ontology,
                               const LabelMap* labels = nullptr, const LoadOptions& options = {}) {
  return parse_triples(path.string(), read_lines(path), ontology, labels, options);
}

// Labels file: image_id<TAB>label.
inline LabelMap load_labels(const std::filesystem::path& path) {
  LabelMap labels;
  auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError(path.string(), n + 1, "expected 'image_id<TAB>label'");
    }
    auto id = std::string(trim(fields[0]));
    auto label = std::string(trim(fields[1]));
    if (id.empty() || label.empty()) throw ParseError(path.string(), n + 1, "empty id or label");
    auto [it, inserted] = labels.emplace(id, label);
    if (!inserted && it->second != label) {
      throw ConflictError(path.string() + ":" + std::to_string(n + 1) + ": image '" + id +
                          "' labeled twice");
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Bulk export for graph database importers.

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(std::initializer_list<std::string_view> fields) {
  std::string row;
  bool first = true;
  for (auto f : fields) {
    if (!first) row += ',';
    first = false;
    row += csv_field(f);
  }
  row += '\n';
  return row;
}

}  // namespace detail

inline std::string image_node_id(std::string_view image_id) {
  return "image:" + std::string(image_id);
}

inline std::string attribute_node_id(const AttrNode& n) {
  return "attr:" + n.predicate + "=" + n.value;
}

struct BulkExport {
  std::string nodes_csv;
  std::string edges_csv;
};

inline BulkExport format_bulk(const GlobalGraph& global) {
  BulkExport out;
  out.nodes_csv = detail::csv_row({"node_id", "kind", "predicate", "value", "source_label"});
  out.edges_csv = detail::csv_row({"image_node_id", "attribute_node_id", "predicate"});
  for (const auto& [id, g] : global.images()) {
    out.nodes_csv += detail::csv_row(
        {image_node_id(id), "image", "", "", g.source_label ? *g.source_label : ""});
  }
  for (const auto& [node, ids] : global.index()) {
    auto nid = attribute_node_id(node);
    out.nodes_csv += detail::csv_row({nid, "attribute", node.predicate, node.value, ""});
  }
  for (const auto& [id, g] : global.images()) {
    for (const auto& node : g.nodes) {
      out.edges_csv += detail::csv_row({image_node_id(id), attribute_node_id(node), node.predicate});
    }
  }
  return out;
}

// Writes nodes.csv and edges.csv (RFC 4180 quoting, LF records) into `dir`.
inline void export_bulk(const GlobalGraph& global, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto bulk = format_bulk(global);
  write_file(dir / "nodes.csv", bulk.nodes_csv);
  write_file(dir / "edges.csv", bulk.edges_csv);
}

}  // namespace kgattr
