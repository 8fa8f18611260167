#pragma once

// JSON and TSV renderings of analysis results. Every report is written both
// ways; TSV for people, JSON for tools. Output is deterministic: maps are
// ordered and floats use fixed decimals in TSV.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgattr/extraction.hpp"
#include "kgattr/graphstore.hpp"
#include "kgattr/similarity.hpp"
#include "kgattr/styletrace.hpp"
#include "kgattr/text.hpp"
#include "kgattr/unlearn.hpp"

namespace kgattr {

using nlohmann::json;

inline json to_json(const AttrNode& n) { return json::array({n.predicate, n.value}); }

inline json to_json(const NodeSet& nodes) {
  auto arr = json::array();
  for (const auto& n : nodes) arr.push_back(to_json(n));
  return arr;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string format_node(const AttrNode& n) { return n.predicate + "=" + n.value; }

inline std::string format_nodes(const NodeSet& nodes) {
  std::vector<std::string> parts;
  for (const auto& n : nodes) parts.push_back(format_node(n));
  return join(parts, "; ");
}

// ---------------------------------------------------------------------------
// Extraction

inline json to_json(const ExtractionRecord& r) {
  json j;
  j["image_id"] = r.image_id;
  j["status"] = r.ok() ? "ok" : "failed";
  if (r.failure) {
    j["failure"] = {{"kind", to_string(r.failure->kind)},
                    {"message", r.failure->message},
                    {"status", r.failure->status}};
  }
  auto triples = json::array();
  for (const auto& t : r.triples) triples.push_back({t.predicate, t.object});
  j["triples"] = std::move(triples);
  auto rejected = json::array();
  for (const auto& x : r.rejected) rejected.push_back({{"line", x.line}, {"reason", x.reason}});
  j["rejected"] = std::move(rejected);
  j["warnings"] = r.warnings;
  j["raw_response"] = r.raw_response;
  return j;
}

inline std::string format_extraction_log(const std::vector<ExtractionRecord>& records) {
  std::string out = "image_id\tstatus\ttriples\trejected\tmessage\n";
  for (const auto& r : records) {
    out += r.image_id + '\t' + (r.ok() ? "ok" : "failed") + '\t' +
           std::to_string(r.triples.size()) + '\t' + std::to_string(r.rejected.size()) + '\t' +
           (r.failure ? std::string(to_string(r.failure->kind)) + ": " + r.failure->message : "") +
           '\n';
  }
  return out;
}

inline json to_json(const TripleStats& s) {
  return {{"images", s.images}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"std", s.stddev}};
}

inline std::string format_triple_stats(const TripleStats& s) {
  return "images\tmean\tmin\tmax\tstd\n" + std::to_string(s.images) + '\t' +
         format_fixed(s.mean, 2) + '\t' + format_fixed(s.min, 0) + '\t' + format_fixed(s.max, 0) +
         '\t' + format_fixed(s.stddev, 2) + '\n';
}

// ---------------------------------------------------------------------------
// Ranking

inline json to_json(const RankResult& r) {
  json j;
  j["query_id"] = r.query_id;
  auto rows = json::array();
  for (const auto& s : r.ranking) {
    rows.push_back({{"candidate_id", s.candidate_id},
                    {"shared", s.shared},
                    {"shared_nodes", to_json(s.shared_nodes)}});
  }
  j["ranking"] = std::move(rows);
  return j;
}

inline RankResult rank_from_json(const json& j) {
  try {
    RankResult r;
    r.query_id = j.at("query_id").get<std::string>();
    for (const auto& row : j.at("ranking")) {
      OverlapScore s;
      s.query_id = r.query_id;
      s.candidate_id = row.at("candidate_id").get<std::string>();
      s.shared = row.at("shared").get<std::size_t>();
      for (const auto& n : row.at("shared_nodes")) {
        s.shared_nodes.insert({n.at(0).get<std::string>(), n.at(1).get<std::string>()});
      }
      r.ranking.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed rank report: ") + e.what());
  }
}

inline RankResult load_rank_report(const std::filesystem::path& path) {
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError(path.string() + ": not valid JSON");
  return rank_from_json(doc);
}

// First column is the candidate id so the file doubles as a group file.
inline std::string format_rank(const RankResult& r) {
  std::string out = "#candidate_id\trank\tshared\tshared_nodes\n";
  std::size_t pos = 0;
  for (const auto& s : r.ranking) {
    out += s.candidate_id + '\t' + std::to_string(++pos) + '\t' + std::to_string(s.shared) + '\t' +
           format_nodes(s.shared_nodes) + '\n';
  }
  return out;
}

// Group file: one image id per line (first tab-separated column); '#' lines
// are comments.
inline std::vector<std::string> load_group_file(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty() || line.front() == '#') continue;
    ids.emplace_back(trim(split(line, '\t').front()));
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Group statistics

inline json to_json(const GroupStats& s) {
  json j;
  j["group_size"] = s.group_size;
  j["distinct_relationships"] = s.distinct_relationships;
  j["avg_unique_values_per_rel"] = s.avg_unique_values_per_rel;
  j["avg_shared_attributes"] = s.avg_shared_attributes;
  j["max_shared_attributes"] = s.max_shared_attributes;
  json clusters = json::object();
  for (const auto& [t, v] : s.largest_cluster_at) clusters[std::to_string(t)] = v;
  j["largest_cluster_at"] = std::move(clusters);
  if (s.avg_shared_with_query) j["avg_shared_with_query"] = *s.avg_shared_with_query;
  if (s.max_shared_with_query) j["max_shared_with_query"] = *s.max_shared_with_query;
  return j;
}

inline json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.stddev}}; }

inline json to_json(const GroupSummary& s) {
  json j;
  j["groups"] = s.groups;
  j["distinct_relationships"] = to_json(s.distinct_relationships);
  j["avg_unique_values_per_rel"] = to_json(s.avg_unique_values_per_rel);
  j["avg_shared_attributes"] = to_json(s.avg_shared_attributes);
  j["max_shared_attributes"] = to_json(s.max_shared_attributes);
  json clusters = json::object();
  for (const auto& [t, v] : s.largest_cluster_at) clusters[std::to_string(t)] = to_json(v);
  j["largest_cluster_at"] = std::move(clusters);
  return j;
}

inline std::string format_mean_std(const MeanStd& m) {
  return format_fixed(m.mean, 2) + "\xC2\xB1" + format_fixed(m.stddev, 2);
}

// Rows are statistics, columns are groups, plus a trailing mean±std column.
inline std::string format_group_stats(const std::vector<std::string>& names,
                                      const std::vector<GroupStats>& stats,
                                      const GroupSummary& summary) {
  std::string out = "statistic";
  for (const auto& n : names) out += '\t' + n;
  out += "\tmean\xC2\xB1std\n";
  auto row = [&](const std::string& label, auto get, const MeanStd& ms, int decimals) {
    out += label;
    for (const auto& s : stats) out += '\t' + format_fixed(static_cast<double>(get(s)), decimals);
    out += '\t' + format_mean_std(ms) + '\n';
  };
  row("Distinct Relationships", [](const GroupStats& s) { return s.distinct_relationships; },
      summary.distinct_relationships, 0);
  row("Avg. Unique Values/Rel.", [](const GroupStats& s) { return s.avg_unique_values_per_rel; },
      summary.avg_unique_values_per_rel, 2);
  row("Avg. Shared Attributes", [](const GroupStats& s) { return s.avg_shared_attributes; },
      summary.avg_shared_attributes, 2);
  row("Max Shared Attributes", [](const GroupStats& s) { return s.max_shared_attributes; },
      summary.max_shared_attributes, 0);
  for (const auto& [t, ms] : summary.largest_cluster_at) {
    row("Largest Cluster (>=" + std::to_string(t) + ")",
        [t](const GroupStats& s) {
          auto it = s.largest_cluster_at.find(t);
          return it == s.largest_cluster_at.end() ? std::size_t{0} : it->second;
        },
        ms, 0);
  }
  bool with_query = !stats.empty() && stats.front().avg_shared_with_query.has_value();
  if (with_query) {
    std::vector<double> avg, mx;
    for (const auto& s : stats) {
      avg.push_back(s.avg_shared_with_query.value_or(0));
      mx.push_back(static_cast<double>(s.max_shared_with_query.value_or(0)));
    }
    row("Avg. Shared With Query", [](const GroupStats& s) { return s.avg_shared_with_query.value_or(0); },
        mean_std(avg), 2);
    row("Max Shared With Query",
        [](const GroupStats& s) { return s.max_shared_with_query.value_or(0); }, mean_std(mx), 0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frequency

inline json to_json(const std::vector<FrequencyEntry>& entries) {
  auto arr = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"predicate", e.node.predicate}, {"value", e.node.value}, {"count", e.count}});
  }
  return arr;
}

inline std::string format_frequency(const std::vector<FrequencyEntry>& entries) {
  std::string out = "predicate\tvalue\tcount\n";
  for (const auto& e : entries) {
    out += e.node.predicate + '\t' + e.node.value + '\t' + std::to_string(e.count) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Style matching

inline json to_json(const std::vector<StyleDelta>& deltas) {
  auto arr = json::array();
  for (const auto& d : deltas) {
    arr.push_back({{"pair_id", d.pair_id},
                   {"reference_id", d.reference_id},
                   {"stylised_id", d.stylised_id},
                   {"introduced", to_json(d.introduced)}});
  }
  return arr;
}

inline json to_json(const MatchReport& r) {
  json j;
  j["total_delta_elements"] = r.total_delta_elements;
  j["matched"] = r.matched;
  j["unmatched"] = r.unmatched;
  j["unmatched_rate"] = format_fixed(r.unmatched_rate(), 2);
  auto unmatched = json::array();
  for (const auto& u : r.unmatched_elements) {
    unmatched.push_back({{"pair_id", u.pair_id}, {"predicate", u.node.predicate}, {"value", u.node.value}});
  }
  j["unmatched_elements"] = std::move(unmatched);
  json labels = json::object();
  for (const auto& [label, n] : r.per_label_occurrences) labels[label] = n;
  j["per_label_occurrences"] = std::move(labels);
  return j;
}

inline std::string format_label_distribution(const std::vector<LabelShare>& rows) {
  std::string out = "label\ttriples\tpercentage\n";
  for (const auto& r : rows) {
    out += r.label + '\t' + std::to_string(r.occurrences) + '\t' + format_fixed(r.percentage, 2) + '\n';
  }
  return out;
}

inline std::string format_unmatched(const MatchReport& r) {
  std::string out = "pair_id\tpredicate\tvalue\n";
  for (const auto& u : r.unmatched_elements) {
    out += u.pair_id + '\t' + u.node.predicate + '\t' + u.node.value + '\n';
  }
  return out;
}

inline std::string format_match_summary(const MatchReport& r) {
  return "delta elements: " + std::to_string(r.total_delta_elements) +
         "\nmatched: " + std::to_string(r.matched) + "\nunmatched: " + std::to_string(r.unmatched) +
         " (" + format_fixed(r.unmatched_rate(), 2) + "%)\n";
}

// ---------------------------------------------------------------------------
// Unlearning

inline json to_json(const RemovalPlan& p) {
  return {{"experiment_id", p.experiment_id},
          {"per_prompt", p.per_prompt},
          {"total_removed", p.total_removed}};
}

inline json to_json(const SimilarityReport& r) {
  return {{"per_prompt", r.per_prompt},
          {"mean", r.mean},
          {"std", r.stddev},
          {"min", r.min},
          {"max", r.max},
          {"row", format_similarity_row(r)}};
}

inline std::string format_similarity(const SimilarityReport& r, const std::string& stage) {
  std::string out = "prompt_id\tcosine\n";
  for (const auto& [prompt, c] : r.per_prompt) out += prompt + '\t' + format_fixed(c, 3) + '\n';
  out += "\nstage\tmean\tstd\trange\n" + stage + '\t' + format_similarity_row(r, "\t") + '\n';
  return out;
}

}  // namespace kgattr
