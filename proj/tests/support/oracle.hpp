#pragma once

// Brute-force reference implementations. Deliberately naive: flat vectors,
// linear scans, flood fill. They share only the plain data types with the
// library, never its algorithms.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgattr/graphstore.hpp"

namespace oracle {

using Pair = std::pair<std::string, std::string>;

struct Graph {
  std::string id;
  std::vector<Pair> nodes;  // may be unsorted; treated as a set
  std::optional<std::string> label;
};

inline Graph from(const kgattr::ImageGraph& g) {
  Graph o{g.image_id, {}, g.source_label};
  for (const auto& n : g.nodes) o.nodes.emplace_back(n.predicate, n.value);
  return o;
}

inline std::vector<Graph> from(const std::vector<kgattr::ImageGraph>& gs) {
  std::vector<Graph> out;
  for (const auto& g : gs) out.push_back(from(g));
  return out;
}

inline bool contains(const std::vector<Pair>& v, const Pair& p) {
  for (const auto& x : v) {
    if (x.first == p.first && x.second == p.second) return true;
  }
  return false;
}

inline std::size_t overlap(const Graph& a, const Graph& b) {
  std::size_t n = 0;
  std::vector<Pair> counted;
  for (const auto& p : a.nodes) {
    if (contains(b.nodes, p) && !contains(counted, p)) {
      counted.push_back(p);
      ++n;
    }
  }
  return n;
}

struct Ranked {
  std::string id;
  std::size_t shared;
};

// Every candidate scored, then a full stable sort.
inline std::vector<Ranked> rank(const Graph& query, const std::vector<Graph>& corpus, std::size_t k,
                                bool include_zero = true) {
  std::vector<Ranked> all;
  for (const auto& g : corpus) {
    if (g.id == query.id) continue;
    auto s = overlap(query, g);
    if (s == 0 && !include_zero) continue;
    all.push_back({g.id, s});
  }
  std::sort(all.begin(), all.end(), [](const Ranked& a, const Ranked& b) {
    if (a.shared != b.shared) return a.shared > b.shared;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// Components by repeated flood fill over an adjacency matrix.
inline std::vector<std::vector<std::string>> clusters(const std::vector<Graph>& group,
                                                      std::size_t t) {
  auto n = group.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && overlap(group[i], group[j]) >= t) adj[i][j] = true;
    }
  }
  std::vector<int> comp(n, -1);
  int c = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != -1) continue;
    comp[s] = c;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] != c) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (adj[i][j] && comp[j] == -1) {
            comp[j] = c;
            grew = true;
          }
        }
      }
    }
    ++c;
  }
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < n; ++i) out[static_cast<std::size_t>(comp[i])].push_back(group[i].id);
  for (auto& m : out) std::sort(m.begin(), m.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

struct Stats {
  std::size_t distinct_relationships = 0;
  double avg_unique_values_per_rel = 0;
  double avg_shared_attributes = 0;
  std::size_t max_shared_attributes = 0;
  std::map<std::size_t, std::size_t> largest_cluster_at;
  std::optional<double> avg_shared_with_query;
  std::optional<std::size_t> max_shared_with_query;
};

inline Stats group_stats(const std::vector<Graph>& group, const std::vector<std::size_t>& thresholds,
                         const Graph* query = nullptr) {
  Stats s;
  std::vector<std::string> preds;
  std::vector<Pair> pv;
  for (const auto& g : group) {
    for (const auto& p : g.nodes) {
      if (std::find(preds.begin(), preds.end(), p.first) == preds.end()) preds.push_back(p.first);
      if (!contains(pv, p)) pv.push_back(p);
    }
  }
  s.distinct_relationships = preds.size();
  if (!preds.empty()) {
    s.avg_unique_values_per_rel = static_cast<double>(pv.size()) / static_cast<double>(preds.size());
  }
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = i + 1; j < group.size(); ++j) {
      auto o = overlap(group[i], group[j]);
      sum += static_cast<double>(o);
      s.max_shared_attributes = std::max(s.max_shared_attributes, o);
      ++pairs;
    }
  }
  if (pairs > 0) s.avg_shared_attributes = sum / static_cast<double>(pairs);
  for (auto t : thresholds) {
    std::size_t largest = 0;
    for (const auto& c : clusters(group, t)) largest = std::max(largest, c.size());
    s.largest_cluster_at[t] = largest;
  }
  if (query) {
    double qs = 0;
    std::size_t qm = 0;
    for (const auto& g : group) {
      auto o = overlap(*query, g);
      qs += static_cast<double>(o);
      qm = std::max(qm, o);
    }
    s.avg_shared_with_query = qs / static_cast<double>(group.size());
    s.max_shared_with_query = qm;
  }
  return s;
}

inline std::vector<Pair> delta(const Graph& reference, const Graph& stylised) {
  std::vector<Pair> out;
  for (const auto& p : stylised.nodes) {
    if (!contains(reference.nodes, p) && !contains(out, p)) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Match {
  std::size_t total = 0, matched = 0, unmatched = 0;
  std::map<std::string, std::size_t> per_label;
};

// mode: 0 occurrences, 1 element-label, 2 dominant-label.
inline Match match(const std::vector<std::vector<Pair>>& deltas, const std::vector<Graph>& world,
                   int mode = 0, bool dedupe = false) {
  Match m;
  std::vector<Pair> seen;
  for (const auto& d : deltas) {
    for (const auto& p : d) {
      if (dedupe) {
        if (contains(seen, p)) continue;
        seen.push_back(p);
      }
      ++m.total;
      std::map<std::string, std::size_t> hits;
      for (const auto& w : world) {
        if (contains(w.nodes, p)) ++hits[*w.label];
      }
      if (hits.empty()) {
        ++m.unmatched;
        continue;
      }
      ++m.matched;
      if (mode == 0) {
        for (const auto& [l, c] : hits) m.per_label[l] += c;
      } else if (mode == 1) {
        for (const auto& [l, c] : hits) m.per_label[l] += 1;
      } else {
        std::string best;
        std::size_t bc = 0;
        for (const auto& [l, c] : hits) {
          if (c > bc || (c == bc && l < best)) {
            best = l;
            bc = c;
          }
        }
        m.per_label[best] += 1;
      }
    }
  }
  return m;
}

inline long double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  long double dot = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    uu += static_cast<long double>(u[i]) * u[i];
    vv += static_cast<long double>(v[i]) * v[i];
  }
  auto c = dot / std::sqrt(uu * vv);
  return c > 1 ? 1 : (c < -1 ? -1 : c);
}

struct Summary {
  long double mean = 0, stddev = 0, min = 0, max = 0;
};

inline Summary summarize(const std::vector<long double>& xs) {
  Summary s;
  s.min = s.max = xs.front();
  for (auto x : xs) {
    s.mean += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean /= static_cast<long double>(xs.size());
  long double ss = 0;
  for (auto x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<long double>(xs.size() - 1)) : 0;
  return s;
}

// Frequency by recounting every image for every candidate node.
inline std::vector<std::pair<Pair, std::size_t>> frequency(const std::vector<Graph>& graphs) {
  std::vector<Pair> nodes;
  for (const auto& g : graphs) {
    for (const auto& p : g.nodes) {
      if (!contains(nodes, p)) nodes.push_back(p);
    }
  }
  std::vector<std::pair<Pair, std::size_t>> out;
  for (const auto& p : nodes) {
    std::size_t c = 0;
    for (const auto& g : graphs) c += contains(g.nodes, p) ? 1 : 0;
    out.emplace_back(p, c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

}  // namespace oracle
