#pragma once

// Style-induced deltas (stylised graph minus reference graph) and their
// provenance against a labeled world graph.

#include <algorithm>
#include <filesystem>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgattr/error.hpp"
#include "kgattr/graphstore.hpp"
#include "kgattr/text.hpp"

namespace kgattr {

struct StyleDelta {
  std::string pair_id;
  std::string reference_id;
  std::string stylised_id;
  NodeSet introduced;

  bool operator==(const StyleDelta&) const = default;
};

inline StyleDelta style_delta(const ImageGraph& reference, const ImageGraph& stylised,
                              std::string pair_id) {
  StyleDelta d{std::move(pair_id), reference.image_id, stylised.image_id, {}};
  std::set_difference(stylised.nodes.begin(), stylised.nodes.end(), reference.nodes.begin(),
                      reference.nodes.end(), std::inserter(d.introduced, d.introduced.end()));
  return d;
}

// How matched elements are credited to world labels.
enum class LabelCounting {
  kOccurrences,    // every labeled world image containing the element
  kElementLabel,   // once per (element, label) pair
  kDominantLabel,  // once, to the label with most occurrences (ties: smallest label)
};

inline LabelCounting parse_label_counting(std::string_view s) {
  if (s == "occurrences") return LabelCounting::kOccurrences;
  if (s == "element-label") return LabelCounting::kElementLabel;
  if (s == "dominant-label") return LabelCounting::kDominantLabel;
  throw UsageError("unknown counting mode '" + std::string(s) +
                   "' (expected occurrences|element-label|dominant-label)");
}

struct MatchOptions {
  LabelCounting counting = LabelCounting::kOccurrences;
  // Count each distinct element once across all deltas instead of once per pair.
  bool dedupe_global = false;
};

struct UnmatchedElement {
  std::string pair_id;
  AttrNode node;

  bool operator==(const UnmatchedElement&) const = default;
};

struct MatchReport {
  std::size_t total_delta_elements = 0;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::vector<UnmatchedElement> unmatched_elements;
  std::map<std::string, std::size_t> per_label_occurrences;

  // Percentage of unmatched elements, 0 when there are none.
  double unmatched_rate() const {
    return total_delta_elements == 0 ? 0.0
                                     : 100.0 * static_cast<double>(unmatched) /
                                           static_cast<double>(total_delta_elements);
  }

  bool operator==(const MatchReport&) const = default;
};

inline MatchReport match_world(std::span<const StyleDelta> deltas, const GlobalGraph& world,
                               const MatchOptions& options = {}) {
  for (const auto& [id, g] : world.images()) {
    if (!g.source_label) throw DomainError("world image '" + id + "' has no source label");
  }
  MatchReport report;
  std::set<AttrNode> seen;
  for (const auto& delta : deltas) {
    for (const auto& node : delta.introduced) {
      if (options.dedupe_global && !seen.insert(node).second) continue;
      ++report.total_delta_elements;
      const auto& holders = world.holders(node);
      if (holders.empty()) {
        ++report.unmatched;
        report.unmatched_elements.push_back({delta.pair_id, node});
        continue;
      }
      ++report.matched;
      std::map<std::string_view, std::size_t> by_label;
      for (const auto& id : holders) ++by_label[*world.at(id).source_label];
      switch (options.counting) {
        case LabelCounting::kOccurrences:
          for (const auto& [label, n] : by_label) report.per_label_occurrences[std::string(label)] += n;
          break;
        case LabelCounting::kElementLabel:
          for (const auto& [label, n] : by_label) ++report.per_label_occurrences[std::string(label)];
          break;
        case LabelCounting::kDominantLabel: {
          auto best = by_label.begin();
          for (auto it = by_label.begin(); it != by_label.end(); ++it) {
            if (it->second > best->second) best = it;
          }
          ++report.per_label_occurrences[std::string(best->first)];
          break;
        }
      }
    }
  }
  return report;
}

struct LabelShare {
  std::string label;
  std::size_t occurrences = 0;
  double percentage = 0;

  bool operator==(const LabelShare&) const = default;
};

// Occurrences descending, ties by label. Percentages are of the summed
// occurrences.
inline std::vector<LabelShare> label_distribution(const MatchReport& report) {
  std::size_t total = 0;
  for (const auto& [label, n] : report.per_label_occurrences) total += n;
  std::vector<LabelShare> rows;
  for (const auto& [label, n] : report.per_label_occurrences) {
    double pct = total == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(total);
    rows.push_back({label, n, pct});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const LabelShare& a, const LabelShare& b) {
    return a.occurrences > b.occurrences;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Files

struct StylePair {
  std::string pair_id;
  std::string reference_id;
  std::string stylised_id;
};

// pair_id<TAB>reference_image_id<TAB>stylised_image_id
inline std::vector<StylePair> load_pairs(const std::filesystem::path& path) {
  std::vector<StylePair> pairs;
  std::set<std::string> ids;
  auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 3) {
      throw ParseError(path.string(), n + 1, "expected 'pair_id<TAB>reference_id<TAB>stylised_id'");
    }
    StylePair p{std::string(trim(f[0])), std::string(trim(f[1])), std::string(trim(f[2]))};
    if (!ids.insert(p.pair_id).second) {
      throw ConflictError(path.string() + ":" + std::to_string(n + 1) + ": duplicate pair id '" +
                          p.pair_id + "'");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

// Delta TSV: pair_id<TAB>predicate<TAB>value, one introduced node per line.
// Pairs with an empty delta contribute no lines.
inline std::string format_deltas(std::span<const StyleDelta> deltas) {
  std::string out;
  for (const auto& d : deltas) {
    for (const auto& n : d.introduced) {
      out += d.pair_id + '\t' + n.predicate + '\t' + n.value + '\n';
    }
  }
  return out;
}

inline std::vector<StyleDelta> load_deltas(const std::filesystem::path& path) {
  std::vector<StyleDelta> deltas;
  std::map<std::string, std::size_t> slot;
  auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 3) throw ParseError(path.string(), n + 1, "expected 'pair_id<TAB>predicate<TAB>value'");
    std::string pair_id(trim(f[0]));
    auto [it, inserted] = slot.emplace(pair_id, deltas.size());
    if (inserted) deltas.push_back({pair_id, "", "", {}});
    deltas[it->second].introduced.insert({std::string(trim(f[1])), normalize_value(f[2])});
  }
  return deltas;
}

}  // namespace kgattr
