#pragma once

// Domain ontologies: the closed set of relationships an extraction may use,
// their on-disk format, and rendering into an extraction prompt.
//
// File format (UTF-8, LF):
//
//   # comment lines start with '#'; blank lines are ignored
//   # id: <ontology id>          optional, defaults to the file stem
//   name<TAB>category[<TAB>value1,value2,...]
//
// Relationship names are matched case-insensitively but kept as written.

#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgattr/error.hpp"
#include "kgattr/text.hpp"

namespace kgattr {

struct RelationshipSpec {
  std::string name;
  std::string category;
  // Allowed values, normalized. Empty means open vocabulary.
  std::vector<std::string> vocabulary;

  bool open() const noexcept { return vocabulary.empty(); }

  bool allows(std::string_view normalized_value) const {
    return open() || std::find(vocabulary.begin(), vocabulary.end(), normalized_value) !=
                         vocabulary.end();
  }

  bool operator==(const RelationshipSpec&) const = default;
};

class Ontology {
 public:
  Ontology(std::string id, std::vector<RelationshipSpec> relationships)
      : id_(std::move(id)), relationships_(std::move(relationships)) {
    if (relationships_.empty()) {
      throw ValidationError("ontology '" + id_ + "' has no relationships");
    }
    for (std::size_t i = 0; i < relationships_.size(); ++i) {
      auto& rel = relationships_[i];
      if (rel.name.empty()) throw ValidationError("empty relationship name");
      if (std::any_of(rel.name.begin(), rel.name.end(), is_space)) {
        throw ValidationError("relationship name contains whitespace: '" + rel.name + "'");
      }
      for (auto& v : rel.vocabulary) v = normalize_value(v);
      auto [it, inserted] = by_folded_name_.emplace(to_lower(rel.name), i);
      if (!inserted) {
        throw ValidationError("duplicate relationship '" + rel.name + "' (conflicts with '" +
                              relationships_[it->second].name + "')");
      }
    }
  }

  const std::string& id() const noexcept { return id_; }
  std::span<const RelationshipSpec> relationships() const noexcept { return relationships_; }
  std::size_t size() const noexcept { return relationships_.size(); }

  const RelationshipSpec* find(std::string_view name) const {
    auto it = by_folded_name_.find(to_lower(trim(name)));
    return it == by_folded_name_.end() ? nullptr : &relationships_[it->second];
  }

  bool operator==(const Ontology& other) const {
    return id_ == other.id_ && relationships_ == other.relationships_;
  }

 private:
  std::string id_;
  std::vector<RelationshipSpec> relationships_;
  std::unordered_map<std::string, std::size_t> by_folded_name_;
};

inline Ontology parse_ontology(std::string_view source_name, std::string default_id,
                               const std::vector<std::string>& lines) {
  std::string id = std::move(default_id);
  std::vector<RelationshipSpec> rels;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    auto lineno = n + 1;
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      if (body.starts_with("id:")) id = std::string(trim(body.substr(3)));
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(std::string(source_name), lineno,
                       "expected 'name<TAB>category[<TAB>values]', got " +
                           std::to_string(fields.size()) + " field(s)");
    }
    auto name = trim(fields[0]);
    if (name.empty()) throw ParseError(std::string(source_name), lineno, "empty relationship name");
    if (std::any_of(name.begin(), name.end(), is_space)) {
      throw ParseError(std::string(source_name), lineno,
                       "relationship name contains whitespace: '" + std::string(name) + "'");
    }
    RelationshipSpec rel{std::string(name), std::string(trim(fields[1])), {}};
    if (fields.size() == 3) {
      for (auto v : split(fields[2], ',')) {
        auto value = normalize_value(v);
        if (value.empty()) continue;
        if (std::find(rel.vocabulary.begin(), rel.vocabulary.end(), value) == rel.vocabulary.end()) {
          rel.vocabulary.push_back(std::move(value));
        }
      }
    }
    auto [it, inserted] = seen.emplace(to_lower(rel.name), lineno);
    if (!inserted) {
      throw ValidationError(std::string(source_name) + ":" + std::to_string(lineno) +
                            ": duplicate relationship '" + rel.name + "' (first defined on line " +
                            std::to_string(it->second) + ")");
    }
    rels.push_back(std::move(rel));
  }
  return Ontology(std::move(id), std::move(rels));
}

inline Ontology load_ontology(const std::filesystem::path& path) {
  return parse_ontology(path.string(), path.stem().string(), read_lines(path));
}

inline std::string format_ontology(const Ontology& ontology) {
  std::ostringstream out;
  out << "# id: " << ontology.id() << '\n';
  for (const auto& rel : ontology.relationships()) {
    out << rel.name << '\t' << rel.category;
    if (!rel.open()) out << '\t' << join(rel.vocabulary, ",");
    out << '\n';
  }
  return out.str();
}

inline void save_ontology(const Ontology& ontology, const std::filesystem::path& path) {
  write_file(path, format_ontology(ontology));
}

// ---------------------------------------------------------------------------
// Prompt rendering

struct PromptTemplate {
  std::string preamble;
  // One line per relationship. Placeholders: {name} (required, once),
  // {category}, {values} (": one of a, b, c" for closed vocabularies, else "").
  std::string line_format;
  std::string instruction;
};

inline PromptTemplate default_template() {
  return {
      "You are annotating one image for a knowledge graph. Describe what you see using only "
      "the relationships below.\nAllowed relationships:",
      "- {name}{values}",
      "Output format: one triple per line, written as `relationship | value`. Use the "
      "relationship names exactly as listed. Give one value per line; repeat a relationship "
      "on separate lines when several values apply. Skip relationships that do not apply "
      "instead of writing placeholder values. Do not add any other text."};
}

// Fashion-domain default: one garment per product photo.
inline PromptTemplate fashion_template() {
  return {
      "You are a fashion annotator. The image is a product photo of a single garment or "
      "accessory. Describe the item using only the relationships below, choosing short "
      "attribute values (for example a category, a silhouette, a fabric or a print).\n"
      "Allowed relationships:",
      "- {name}{values}",
      "Output format: one triple per line, written as `relationship | value`. Use the "
      "relationship names exactly as listed. Give one value per line; repeat a relationship "
      "on separate lines when several values apply. Skip relationships that do not apply "
      "instead of writing placeholder values. Do not add any other text."};
}

// Prompt without any ontology, used for ablation runs.
inline std::string plain_prompt() {
  return "Describe the main subject of this image as a short list of facts.\n"
         "Output format: one triple per line, written as `relationship | value`. Do not add "
         "any other text.\n";
}

namespace detail {

inline void check_line_format(std::string_view fmt) {
  std::size_t names = 0;
  for (std::size_t pos = 0; (pos = fmt.find('{', pos)) != std::string_view::npos;) {
    auto close = fmt.find('}', pos);
    if (close == std::string_view::npos) {
      throw ValidationError("unterminated placeholder in prompt line format");
    }
    auto key = fmt.substr(pos + 1, close - pos - 1);
    if (key == "name") {
      ++names;
    } else if (key != "category" && key != "values") {
      throw ValidationError("unknown placeholder {" + std::string(key) + "} in prompt line format");
    }
    pos = close + 1;
  }
  if (names != 1) {
    throw ValidationError("prompt line format must contain {name} exactly once");
  }
}

}  // namespace detail

inline std::string render_prompt(const Ontology& ontology, const PromptTemplate& tmpl) {
  detail::check_line_format(tmpl.line_format);
  std::string out = tmpl.preamble;
  out += '\n';
  for (const auto& rel : ontology.relationships()) {
    std::string_view fmt = tmpl.line_format;
    std::string line;
    for (std::size_t pos = 0; pos < fmt.size();) {
      auto open = fmt.find('{', pos);
      if (open == std::string_view::npos) {
        line += fmt.substr(pos);
        break;
      }
      line += fmt.substr(pos, open - pos);
      auto close = fmt.find('}', open);
      auto key = fmt.substr(open + 1, close - open - 1);
      if (key == "name") {
        line += rel.name;
      } else if (key == "category") {
        line += rel.category;
      } else if (!rel.open()) {
        line += ": one of " + join(rel.vocabulary, ", ");
      }
      pos = close + 1;
    }
    out += line;
    out += '\n';
  }
  out += '\n';
  out += tmpl.instruction;
  out += '\n';
  return out;
}

// Template file: three sections introduced by "[preamble]", "[line]" and
// "[instruction]" header lines. Section bodies keep their inner newlines.
inline PromptTemplate load_template(const std::filesystem::path& path) {
  PromptTemplate tmpl;
  std::string* current = nullptr;
  std::vector<std::string> seen;
  auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    auto t = trim(line);
    if (t == "[preamble]" || t == "[line]" || t == "[instruction]") {
      std::string section(t.substr(1, t.size() - 2));
      if (std::find(seen.begin(), seen.end(), section) != seen.end()) {
        throw ParseError(path.string(), n + 1, "duplicate section [" + section + "]");
      }
      seen.push_back(section);
      current = section == "preamble" ? &tmpl.preamble
                : section == "line"   ? &tmpl.line_format
                                      : &tmpl.instruction;
      continue;
    }
    if (current == nullptr) {
      if (t.empty() || t.front() == '#') continue;
      throw ParseError(path.string(), n + 1, "text outside of a section");
    }
    if (!current->empty()) *current += '\n';
    *current += line;
  }
  for (auto* s : {&tmpl.preamble, &tmpl.line_format, &tmpl.instruction}) {
    while (!s->empty() && is_space(s->back())) s->pop_back();
  }
  if (seen.size() != 3) {
    throw ValidationError(path.string() + ": template needs [preamble], [line] and [instruction]");
  }
  detail::check_line_format(tmpl.line_format);
  return tmpl;
}

}  // namespace kgattr
