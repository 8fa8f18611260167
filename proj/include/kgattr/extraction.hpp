#pragma once

// Turning model responses into validated (image, relation, attribute) triples.

#include <cmath>
#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgattr/error.hpp"
#include "kgattr/ontology.hpp"
#include "kgattr/text.hpp"

namespace kgattr {

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;

  auto operator<=>(const Triple&) const = default;
};

struct Rejection {
  std::string line;
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

namespace reason {
inline constexpr std::string_view kMalformed = "malformed line";
inline constexpr std::string_view kUnknownPredicate = "unknown predicate";
inline constexpr std::string_view kOutsideVocabulary = "value outside vocabulary";
inline constexpr std::string_view kPlaceholder = "placeholder value";
}  // namespace reason

struct ParseResult {
  std::vector<Triple> triples;
  std::vector<Rejection> rejected;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view strip_list_marker(std::string_view line) {
  while (!line.empty() && (line.front() == '-' || line.front() == '*')) {
    line.remove_prefix(1);
    line = trim(line);
  }
  if (line.starts_with("\xE2\x80\xA2")) line = trim(line.substr(3));  // bullet
  return line;
}

}  // namespace detail

// Parses `predicate | object` or `subject | predicate | object` lines (pipe or
// tab delimited). Never throws on content: bad lines land in `rejected`.
// Objects are normalized; predicates take the ontology's spelling. Placeholder
// objects are kept here and removed by filter_nulls.
inline ParseResult parse_response(std::string_view text, std::string_view image_id,
                                  const Ontology& ontology) {
  ParseResult result;
  for (auto raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty()) continue;
    line = detail::strip_list_marker(line);
    // Markdown table rows: "| a | b |".
    if (line.size() >= 2 && line.front() == '|' && line.back() == '|') {
      line = trim(line.substr(1, line.size() - 2));
    }
    char delim = line.find('|') != std::string_view::npos    ? '|'
                 : line.find('\t') != std::string_view::npos ? '\t'
                                                             : '\0';
    std::vector<std::string_view> fields;
    if (delim != '\0') fields = split(line, delim);
    if (fields.size() != 2 && fields.size() != 3) {
      result.rejected.push_back({std::string(trim(raw)), std::string(reason::kMalformed)});
      continue;
    }
    std::string_view subject = fields.size() == 3 ? trim(fields[0]) : image_id;
    std::string_view predicate = trim(fields[fields.size() - 2]);
    std::string object = normalize_value(fields.back());

    const RelationshipSpec* rel = ontology.find(predicate);
    if (rel == nullptr) {
      result.rejected.push_back({std::string(trim(raw)), std::string(reason::kUnknownPredicate)});
      continue;
    }
    if (!object.empty() && !rel->allows(object) &&
        !is_placeholder(object, default_placeholders())) {
      result.rejected.push_back({std::string(trim(raw)), std::string(reason::kOutsideVocabulary)});
      continue;
    }
    if (subject != image_id) {
      result.warnings.push_back("subject '" + std::string(subject) + "' replaced by '" +
                                std::string(image_id) + "'");
    }
    result.triples.push_back({std::string(image_id), rel->name, std::move(object)});
  }
  return result;
}

// Drops triples whose normalized object is a placeholder token. Survivors keep
// their order. Idempotent.
inline std::vector<Triple> filter_nulls(std::vector<Triple> triples,
                                        const PlaceholderSet& placeholders = default_placeholders()) {
  std::erase_if(triples, [&](const Triple& t) { return is_placeholder(t.object, placeholders); });
  return triples;
}

// ---------------------------------------------------------------------------

enum class FailureKind { kTransport, kEndpoint, kProtocol, kOther };

inline std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::kTransport: return "transport";
    case FailureKind::kEndpoint: return "endpoint";
    case FailureKind::kProtocol: return "protocol";
    case FailureKind::kOther: break;
  }
  return "other";
}

struct Failure {
  FailureKind kind = FailureKind::kOther;
  std::string message;
  int status = 0;  // HTTP status for endpoint failures
};

struct ExtractionRecord {
  std::string image_id;
  std::vector<Triple> triples;
  std::vector<Rejection> rejected;
  std::vector<std::string> warnings;
  std::string raw_response;
  std::optional<Failure> failure;

  bool ok() const noexcept { return !failure.has_value(); }
};

// parse -> null filter -> record. Triples removed by the null filter are
// recorded as rejections.
inline ExtractionRecord assemble_record(std::string image_id, std::string raw_response,
                                        const Ontology& ontology,
                                        const PlaceholderSet& placeholders = default_placeholders()) {
  ExtractionRecord rec;
  rec.image_id = std::move(image_id);
  auto parsed = parse_response(raw_response, rec.image_id, ontology);
  rec.rejected = std::move(parsed.rejected);
  rec.warnings = std::move(parsed.warnings);
  for (auto& t : parsed.triples) {
    if (is_placeholder(t.object, placeholders)) {
      rec.rejected.push_back({t.predicate + " | " + t.object, std::string(reason::kPlaceholder)});
    } else {
      rec.triples.push_back(std::move(t));
    }
  }
  rec.raw_response = std::move(raw_response);
  return rec;
}

// ---------------------------------------------------------------------------
// Triples-per-image statistics (sample standard deviation).

struct TripleStats {
  double mean = 0;
  double min = 0;
  double max = 0;
  double stddev = 0;
  std::size_t images = 0;
};

inline TripleStats triple_stats_from_counts(std::span<const std::size_t> counts) {
  if (counts.empty()) throw DomainError("triple statistics need at least one image");
  TripleStats s;
  s.images = counts.size();
  // Welford
  double mean = 0, m2 = 0;
  s.min = s.max = static_cast<double>(counts.front());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double x = static_cast<double>(counts[i]);
    double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = mean;
  s.stddev = counts.size() > 1 ? std::sqrt(m2 / static_cast<double>(counts.size() - 1)) : 0.0;
  return s;
}

// Failed records carry no extraction and are excluded.
inline TripleStats triple_stats(std::span<const ExtractionRecord> records) {
  std::vector<std::size_t> counts;
  for (const auto& r : records) {
    if (r.ok()) counts.push_back(r.triples.size());
  }
  return triple_stats_from_counts(counts);
}

// ---------------------------------------------------------------------------
// Triple TSV: image_id<TAB>predicate<TAB>object, sorted, one per line.

inline std::string format_triples(std::vector<Triple> triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  std::string out;
  for (const auto& t : triples) {
    out += t.subject;
    out += '\t';
    out += t.predicate;
    out += '\t';
    out += t.object;
    out += '\n';
  }
  return out;
}

inline void save_triple_file(const std::filesystem::path& path, std::vector<Triple> triples) {
  write_file(path, format_triples(std::move(triples)));
}

}  // namespace kgattr
