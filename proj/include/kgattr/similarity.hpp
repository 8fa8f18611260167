#pragma once

// Node-overlap similarity, top-k retrieval against a global graph, and
// group-level statistics over retrieved sets.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgattr/error.hpp"
#include "kgattr/graphstore.hpp"

namespace kgattr {

struct OverlapScore {
  std::string query_id;
  std::string candidate_id;
  std::size_t shared = 0;
  NodeSet shared_nodes;

  bool operator==(const OverlapScore&) const = default;
};

inline OverlapScore overlap(const ImageGraph& a, const ImageGraph& b) {
  OverlapScore s{a.image_id, b.image_id, 0, {}};
  std::set_intersection(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
                        std::inserter(s.shared_nodes, s.shared_nodes.end()));
  s.shared = s.shared_nodes.size();
  return s;
}

inline std::size_t shared_count(const NodeSet& a, const NodeSet& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

struct RankResult {
  std::string query_id;
  std::vector<OverlapScore> ranking;

  bool operator==(const RankResult&) const = default;
};

struct RankOptions {
  // Fill the ranking with zero-overlap candidates when fewer than k share a node.
  bool include_zero = true;
};

// Top-k candidates by shared node count (descending), ties by candidate id
// (ascending). The query's own id is never a candidate. Shared counts are
// accumulated through the corpus' inverted attribute index.
inline RankResult rank(const ImageGraph& query, const GlobalGraph& corpus, std::size_t k,
                       const RankOptions& options = {}) {
  if (k == 0) throw UsageError("rank needs k >= 1");
  RankResult result{query.image_id, {}};

  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& node : query.nodes) {
    for (const auto& id : corpus.holders(node)) {
      if (id != query.image_id) ++counts[id];
    }
  }
  std::vector<std::pair<std::size_t, std::string_view>> hits;
  hits.reserve(counts.size());
  for (const auto& [id, c] : counts) hits.emplace_back(c, id);
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  auto take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                    better);
  hits.resize(take);

  for (const auto& [c, id] : hits) {
    result.ranking.push_back(overlap(query, corpus.at(id)));
    result.ranking.back().query_id = query.image_id;
  }
  if (options.include_zero && result.ranking.size() < k) {
    // Images iterate in id order, so the filler is already tie-ordered.
    for (const auto& [id, g] : corpus.images()) {
      if (result.ranking.size() >= k) break;
      if (id == query.image_id || counts.contains(id)) continue;
      result.ranking.push_back({query.image_id, id, 0, {}});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Components of the "overlap >= threshold" relation.

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::size_t size_of(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

inline void require_distinct_ids(std::span<const ImageGraph> group) {
  std::set<std::string_view> ids;
  for (const auto& g : group) {
    if (!ids.insert(g.image_id).second) {
      throw ConflictError("image '" + g.image_id + "' appears twice in the group");
    }
  }
}

// Pairwise shared counts, row-major upper triangle (i < j).
inline std::vector<std::size_t> pair_overlaps(std::span<const ImageGraph> group) {
  std::vector<std::size_t> out;
  out.reserve(group.size() * (group.size() - 1) / 2);
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = i + 1; j < group.size(); ++j) {
      out.push_back(shared_count(group[i].nodes, group[j].nodes));
    }
  }
  return out;
}

inline DisjointSets components(std::size_t n, std::span<const std::size_t> pairs,
                               std::size_t threshold) {
  DisjointSets ds(n);
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      if (pairs[p] >= threshold) ds.unite(i, j);
    }
  }
  return ds;
}

}  // namespace detail

using Cluster = std::vector<std::string>;

// Partition of the group into connected components. Members are sorted;
// components are ordered by their smallest member id.
inline std::vector<Cluster> clusters(std::span<const ImageGraph> group, std::size_t threshold) {
  detail::require_distinct_ids(group);
  if (group.empty()) return {};
  auto pairs = detail::pair_overlaps(group);
  auto ds = detail::components(group.size(), pairs, threshold);
  std::map<std::size_t, Cluster> by_root;
  for (std::size_t i = 0; i < group.size(); ++i) by_root[ds.find(i)].push_back(group[i].image_id);
  std::vector<Cluster> out;
  for (auto& [root, members] : by_root) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end(),
            [](const Cluster& a, const Cluster& b) { return a.front() < b.front(); });
  return out;
}

struct GroupStats {
  std::size_t group_size = 0;
  std::size_t distinct_relationships = 0;
  double avg_unique_values_per_rel = 0;
  // Pairwise over unordered member pairs.
  double avg_shared_attributes = 0;
  std::size_t max_shared_attributes = 0;
  std::map<std::size_t, std::size_t> largest_cluster_at;
  // Relative to the query graph, when one is supplied.
  std::optional<double> avg_shared_with_query;
  std::optional<std::size_t> max_shared_with_query;

  bool operator==(const GroupStats&) const = default;
};

inline std::vector<std::size_t> default_thresholds() { return {5, 7}; }

inline GroupStats group_stats(std::span<const ImageGraph> group,
                              std::span<const std::size_t> thresholds,
                              const ImageGraph* query = nullptr) {
  if (group.empty()) throw DomainError("group statistics need a non-empty group");
  detail::require_distinct_ids(group);
  GroupStats s;
  s.group_size = group.size();

  std::map<std::string_view, std::set<std::string_view>> values_by_rel;
  for (const auto& g : group) {
    for (const auto& n : g.nodes) values_by_rel[n.predicate].insert(n.value);
  }
  s.distinct_relationships = values_by_rel.size();
  if (!values_by_rel.empty()) {
    std::size_t total = 0;
    for (const auto& [rel, values] : values_by_rel) total += values.size();
    s.avg_unique_values_per_rel =
        static_cast<double>(total) / static_cast<double>(values_by_rel.size());
  }

  auto pairs = detail::pair_overlaps(group);
  if (!pairs.empty()) {
    auto sum = std::accumulate(pairs.begin(), pairs.end(), std::size_t{0});
    s.avg_shared_attributes = static_cast<double>(sum) / static_cast<double>(pairs.size());
    s.max_shared_attributes = *std::max_element(pairs.begin(), pairs.end());
  }

  for (auto t : thresholds) {
    auto ds = detail::components(group.size(), pairs, t);
    std::size_t largest = 0;
    for (std::size_t i = 0; i < group.size(); ++i) largest = std::max(largest, ds.size_of(i));
    s.largest_cluster_at[t] = largest;
  }

  if (query != nullptr) {
    std::size_t sum = 0, mx = 0;
    for (const auto& g : group) {
      auto c = shared_count(query->nodes, g.nodes);
      sum += c;
      mx = std::max(mx, c);
    }
    s.avg_shared_with_query = static_cast<double>(sum) / static_cast<double>(group.size());
    s.max_shared_with_query = mx;
  }
  return s;
}

// Mean and sample standard deviation of each statistic across groups, the
// "mean±std" cells of an experiment summary.
struct MeanStd {
  double mean = 0;
  double stddev = 0;
};

inline MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) return {};
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  return {mean, sd};
}

struct GroupSummary {
  std::size_t groups = 0;
  MeanStd distinct_relationships;
  MeanStd avg_unique_values_per_rel;
  MeanStd avg_shared_attributes;
  MeanStd max_shared_attributes;
  std::map<std::size_t, MeanStd> largest_cluster_at;
};

inline GroupSummary summarize_groups(std::span<const GroupStats> stats) {
  GroupSummary out;
  out.groups = stats.size();
  auto column = [&](auto get) {
    std::vector<double> xs;
    for (const auto& s : stats) xs.push_back(static_cast<double>(get(s)));
    return mean_std(xs);
  };
  out.distinct_relationships = column([](const GroupStats& s) { return s.distinct_relationships; });
  out.avg_unique_values_per_rel =
      column([](const GroupStats& s) { return s.avg_unique_values_per_rel; });
  out.avg_shared_attributes = column([](const GroupStats& s) { return s.avg_shared_attributes; });
  out.max_shared_attributes = column([](const GroupStats& s) { return s.max_shared_attributes; });
  std::set<std::size_t> thresholds;
  for (const auto& s : stats) {
    for (const auto& [t, v] : s.largest_cluster_at) thresholds.insert(t);
  }
  for (auto t : thresholds) {
    out.largest_cluster_at[t] = column([t](const GroupStats& s) {
      auto it = s.largest_cluster_at.find(t);
      return it == s.largest_cluster_at.end() ? std::size_t{0} : it->second;
    });
  }
  return out;
}

}  // namespace kgattr
