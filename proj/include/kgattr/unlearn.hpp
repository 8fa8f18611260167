#pragma once

// Removal plans for external retraining, and before/after cosine similarity
// reports over externally computed image embeddings.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgattr/error.hpp"
#include "kgattr/similarity.hpp"
#include "kgattr/text.hpp"

namespace kgattr {

struct RemovalPlan {
  std::string experiment_id;
  std::map<std::string, std::vector<std::string>> per_prompt;
  std::size_t total_removed = 0;

  bool operator==(const RemovalPlan&) const = default;
};

// Top k_per_prompt candidates of each ranking; the total counts the union.
inline RemovalPlan select_removals(std::span<const RankResult> rank_results,
                                   std::size_t k_per_prompt, std::string experiment_id) {
  if (rank_results.empty()) throw DomainError("removal selection needs at least one ranking");
  if (k_per_prompt == 0) throw UsageError("k per prompt must be >= 1");
  RemovalPlan plan{std::move(experiment_id), {}, 0};
  std::set<std::string> all;
  for (const auto& r : rank_results) {
    if (r.ranking.empty()) throw DomainError("ranking for prompt '" + r.query_id + "' is empty");
    auto [it, inserted] = plan.per_prompt.emplace(r.query_id, std::vector<std::string>{});
    if (!inserted) throw ConflictError("prompt '" + r.query_id + "' ranked twice");
    std::set<std::string> mine;
    for (const auto& s : r.ranking) {
      if (it->second.size() >= k_per_prompt) break;
      if (mine.insert(s.candidate_id).second) it->second.push_back(s.candidate_id);
    }
    all.insert(it->second.begin(), it->second.end());
  }
  plan.total_removed = all.size();
  return plan;
}

inline std::string format_removal_plan(const RemovalPlan& plan) {
  std::string out = "# experiment=" + plan.experiment_id +
                    " prompts=" + std::to_string(plan.per_prompt.size()) +
                    " total_removed=" + std::to_string(plan.total_removed) + "\n";
  for (const auto& [prompt, ids] : plan.per_prompt) {
    for (const auto& id : ids) out += prompt + '\t' + id + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

// u.v / (|u||v|), clamped to [-1, 1].
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DomainError("cosine of vectors with dimensions " + std::to_string(u.size()) + " and " +
                      std::to_string(v.size()));
  }
  if (u.empty()) throw DomainError("cosine of empty vectors");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) throw DomainError("cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::size_t dimension) : dim_(dimension) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be >= 1");
  }

  void add(std::string image_id, std::vector<double> vec) {
    if (vec.size() != dim_) {
      throw ValidationError("embedding for '" + image_id + "' has dimension " +
                            std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    }
    if (!std::all_of(vec.begin(), vec.end(), [](double x) { return std::isfinite(x); })) {
      throw ValidationError("embedding for '" + image_id + "' has non-finite components");
    }
    auto [it, inserted] = vectors_.emplace(std::move(image_id), std::move(vec));
    if (!inserted) throw ConflictError("duplicate embedding for '" + it->first + "'");
  }

  const std::vector<double>& at(std::string_view image_id) const {
    auto it = vectors_.find(image_id);
    if (it == vectors_.end()) throw LookupError("no embedding for image '" + std::string(image_id) + "'");
    return it->second;
  }

  bool contains(std::string_view image_id) const { return vectors_.find(image_id) != vectors_.end(); }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

namespace detail {

inline double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  double x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError(where + ": not a number: '" + std::string(s) + "'");
  }
  return x;
}

}  // namespace detail

// Embedding TSV. First record declares the dimension: "dim<TAB><d>"; then
// image_id<TAB>v1<TAB>...<TAB>vd per line.
inline EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  std::optional<EmbeddingSet> set;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    auto where = path.string() + ":" + std::to_string(n + 1);
    if (!set) {
      if (f.size() != 2 || trim(f[0]) != "dim") {
        throw ParseError(path.string(), n + 1, "expected header 'dim<TAB><dimension>'");
      }
      auto d = detail::parse_double(f[1], where);
      if (d < 1 || d != std::floor(d)) throw ParseError(path.string(), n + 1, "bad dimension");
      set.emplace(static_cast<std::size_t>(d));
      continue;
    }
    std::vector<double> vec;
    for (std::size_t i = 1; i < f.size(); ++i) vec.push_back(detail::parse_double(f[i], where));
    try {
      set->add(std::string(trim(f[0])), std::move(vec));
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (!set) throw ValidationError(path.string() + ": missing 'dim' header");
  return std::move(*set);
}

struct RunPairing {
  std::string before_id;
  std::string after_id;
};

using Pairing = std::map<std::string, RunPairing>;

// prompt_id<TAB>before_id<TAB>after_id
inline Pairing load_pairing(const std::filesystem::path& path) {
  Pairing pairing;
  auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 3) throw ParseError(path.string(), n + 1, "expected 'prompt_id<TAB>before_id<TAB>after_id'");
    auto [it, inserted] = pairing.emplace(std::string(trim(f[0])),
                                          RunPairing{std::string(trim(f[1])), std::string(trim(f[2]))});
    if (!inserted) throw ConflictError(path.string() + ": prompt '" + it->first + "' paired twice");
  }
  return pairing;
}

struct SimilarityReport {
  std::map<std::string, double> per_prompt;
  double mean = 0;
  double stddev = 0;  // sample (n-1)
  double min = 0;
  double max = 0;
};

inline SimilarityReport compare_runs(const EmbeddingSet& before, const EmbeddingSet& after,
                                     const Pairing& pairing) {
  if (pairing.empty()) throw DomainError("pairing is empty");
  if (before.dimension() != after.dimension()) {
    throw DomainError("before/after embeddings have different dimensions");
  }
  SimilarityReport r;
  for (const auto& [prompt, p] : pairing) {
    if (!before.contains(p.before_id)) {
      throw LookupError("prompt '" + prompt + "': no 'before' embedding for '" + p.before_id + "'");
    }
    if (!after.contains(p.after_id)) {
      throw LookupError("prompt '" + prompt + "': no 'after' embedding for '" + p.after_id + "'");
    }
    r.per_prompt[prompt] = cosine(before.at(p.before_id), after.at(p.after_id));
  }
  std::vector<double> xs;
  for (const auto& [prompt, c] : r.per_prompt) xs.push_back(c);
  auto ms = mean_std(xs);
  r.mean = ms.mean;
  r.stddev = ms.stddev;
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  r.min = *lo;
  r.max = *hi;
  return r;
}

// "mean<sep>std<sep>min–max" with three decimals.
inline std::string format_similarity_row(const SimilarityReport& r, std::string_view sep = " & ") {
  return format_fixed(r.mean, 3) + std::string(sep) + format_fixed(r.stddev, 3) + std::string(sep) +
         format_fixed(r.min, 3) + "\xE2\x80\x93" + format_fixed(r.max, 3);
}

}  // namespace kgattr
