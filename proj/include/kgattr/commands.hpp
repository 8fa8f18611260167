#pragma once

// Subcommand bodies. Each takes the resolved RunConfig plus its own options,
// writes reports under cfg.out and returns a process exit code. Errors
// propagate as kgattr::Error; the executable maps them to exit codes.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kgattr/config.hpp"
#include "kgattr/error.hpp"
#include "kgattr/extraction.hpp"
#include "kgattr/graphstore.hpp"
#include "kgattr/model_client.hpp"
#include "kgattr/ontology.hpp"
#include "kgattr/report.hpp"
#include "kgattr/similarity.hpp"
#include "kgattr/styletrace.hpp"
#include "kgattr/unlearn.hpp"

namespace kgattr {

namespace fs = std::filesystem;

namespace detail {

inline Ontology require_ontology(const RunConfig& cfg) {
  if (!cfg.ontology) throw UsageError("an ontology is required (--ontology or 'ontology=' in the config)");
  return load_ontology(*cfg.ontology);
}

inline fs::path prepare_out(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  return cfg.out;
}

inline void write_pair(const fs::path& dir, const std::string& stem, const std::string& tsv,
                       const json& j) {
  write_file(dir / (stem + ".tsv"), tsv);
  write_file(dir / (stem + ".json"), dump(j));
}

inline LoadResult load_corpus(const fs::path& path, const Ontology& ontology, const RunConfig& cfg,
                              bool lenient, const LabelMap* labels = nullptr) {
  LoadOptions opts{lenient, cfg.placeholders};
  auto loaded = load_triples(path, ontology, labels, opts);
  if (cfg.match_mode != MatchMode::kQualified) {
    loaded.graph = project(loaded.graph, cfg.match_mode);
  }
  return loaded;
}

inline void report_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct ExtractOptions {
  fs::path images_dir;
  // Ablation: prompt without the ontology listing.
  bool no_ontology = false;
  // Built-in template when cfg.prompt_template is unset: "default" or "fashion".
  std::string template_name = "default";
};

inline PromptTemplate resolve_template(const RunConfig& cfg, const std::string& name) {
  if (cfg.prompt_template) return load_template(*cfg.prompt_template);
  if (name == "default") return default_template();
  if (name == "fashion") return fashion_template();
  throw UsageError("unknown built-in template '" + name + "' (expected default|fashion)");
}

inline int cmd_extract(const RunConfig& cfg, const ExtractOptions& opts, std::ostream& out,
                       std::ostream& err) {
  cfg.validate();
  auto ontology = detail::require_ontology(cfg);
  auto images = load_image_dir(opts.images_dir);
  if (images.empty()) throw UsageError("no images found in " + opts.images_dir.string());
  auto prompt = opts.no_ontology ? plain_prompt()
                                 : render_prompt(ontology, resolve_template(cfg, opts.template_name));

  auto records = extract_batch(images, ontology, prompt, cfg.client, cfg.placeholders);

  auto dir = detail::prepare_out(cfg);
  std::vector<Triple> all;
  std::size_t failed = 0;
  json j = json::array();
  for (const auto& r : records) {
    if (!r.ok()) ++failed;
    all.insert(all.end(), r.triples.begin(), r.triples.end());
    j.push_back(to_json(r));
  }
  save_triple_file(dir / "triples.tsv", all);
  write_file(dir / "extraction_log.tsv", format_extraction_log(records));
  write_file(dir / "extraction.json", dump(j));
  write_file(dir / "run_config.txt", format_config(cfg));
  if (failed < records.size()) {
    auto stats = triple_stats(records);
    detail::write_pair(dir, "triple_stats", format_triple_stats(stats), to_json(stats));
    out << "images: " << records.size() << ", failed: " << failed
        << ", mean triples/image: " << format_fixed(stats.mean, 2) << '\n';
  } else {
    out << "images: " << records.size() << ", failed: " << failed << '\n';
  }
  for (const auto& r : records) {
    if (!r.ok()) err << "failed: " << r.image_id << ": " << r.failure->message << '\n';
  }
  return failed == 0 ? to_int(ExitCode::kOk) : to_int(ExitCode::kTransport);
}

// ---------------------------------------------------------------------------

struct RankCommandOptions {
  fs::path triples;
  std::vector<std::string> queries;
  // Query graphs taken from this file instead of the corpus.
  std::optional<fs::path> query_triples;
  bool include_zero = true;
  bool lenient = false;
};

inline int cmd_rank(const RunConfig& cfg, const RankCommandOptions& opts, std::ostream& out,
                    std::ostream& err) {
  cfg.validate();
  if (opts.queries.empty()) throw UsageError("at least one --query is required");
  auto ontology = detail::require_ontology(cfg);
  auto corpus = detail::load_corpus(opts.triples, ontology, cfg, opts.lenient);
  detail::report_warnings(corpus.warnings, err);
  std::optional<LoadResult> query_source;
  if (opts.query_triples) {
    query_source = detail::load_corpus(*opts.query_triples, ontology, cfg, opts.lenient);
    detail::report_warnings(query_source->warnings, err);
  }
  const auto& qgraph = query_source ? query_source->graph : corpus.graph;

  auto dir = detail::prepare_out(cfg);
  for (const auto& q : opts.queries) {
    const auto* query = qgraph.find(q);
    if (query == nullptr) throw LookupError("query image '" + q + "' not found");
    auto result = rank(*query, corpus.graph, cfg.k, RankOptions{opts.include_zero});
    detail::write_pair(dir, "rank_" + q, format_rank(result), to_json(result));
    out << q << ": " << result.ranking.size() << " candidates";
    if (!result.ranking.empty()) out << ", top shared " << result.ranking.front().shared;
    out << '\n';
  }
  return to_int(ExitCode::kOk);
}

// ---------------------------------------------------------------------------

struct StatsCommandOptions {
  fs::path triples;
  // Group files: plain id lists or rank TSVs, or rank JSON reports (whose
  // query id enables the query-relative rows).
  std::vector<fs::path> groups;
  std::optional<fs::path> query_triples;
  bool lenient = false;
};

inline int cmd_stats(const RunConfig& cfg, const StatsCommandOptions& opts, std::ostream& out,
                     std::ostream& err) {
  cfg.validate();
  if (opts.groups.empty()) throw UsageError("at least one --group is required");
  auto ontology = detail::require_ontology(cfg);
  auto corpus = detail::load_corpus(opts.triples, ontology, cfg, opts.lenient);
  detail::report_warnings(corpus.warnings, err);
  std::optional<LoadResult> query_source;
  if (opts.query_triples) {
    query_source = detail::load_corpus(*opts.query_triples, ontology, cfg, opts.lenient);
  }

  std::vector<std::string> names;
  std::vector<GroupStats> stats;
  bool any_query = false, all_query = true;
  for (const auto& path : opts.groups) {
    std::vector<std::string> ids;
    std::optional<std::string> query_id;
    if (path.extension() == ".json") {
      auto r = load_rank_report(path);
      for (const auto& s : r.ranking) ids.push_back(s.candidate_id);
      query_id = r.query_id;
    } else {
      ids = load_group_file(path);
    }
    std::vector<ImageGraph> group;
    for (const auto& id : ids) {
      const auto* g = corpus.graph.find(id);
      // An image without valid triples has an empty graph.
      group.push_back(g ? *g : ImageGraph{id, {}, std::nullopt});
    }
    const ImageGraph* query = nullptr;
    if (query_id) {
      const auto& src = query_source ? query_source->graph : corpus.graph;
      query = src.find(*query_id);
      if (query == nullptr) throw LookupError("query image '" + *query_id + "' not found");
    }
    any_query |= query != nullptr;
    all_query &= query != nullptr;
    try {
      stats.push_back(group_stats(group, cfg.thresholds, query));
    } catch (const Error& e) {
      throw DomainError(path.string() + ": " + e.what());
    }
    // Stems name the columns; fall back to the full file name on collisions.
    auto name = path.stem().string();
    if (std::find(names.begin(), names.end(), name) != names.end()) name = path.filename().string();
    names.push_back(std::move(name));
  }
  if (any_query && !all_query) {
    for (auto& s : stats) {
      s.avg_shared_with_query.reset();
      s.max_shared_with_query.reset();
    }
    err << "warning: query-relative rows omitted (not every group names a query)\n";
  }
  auto summary = summarize_groups(stats);
  json j;
  j["groups"] = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) j["groups"][names[i]] = to_json(stats[i]);
  j["summary"] = to_json(summary);
  auto tsv = format_group_stats(names, stats, summary);
  detail::write_pair(detail::prepare_out(cfg), "stats", tsv, j);
  out << tsv;
  return to_int(ExitCode::kOk);
}

// ---------------------------------------------------------------------------

struct DeltaCommandOptions {
  fs::path pairs;
  std::vector<fs::path> triples;
  bool lenient = false;
};

inline int cmd_delta(const RunConfig& cfg, const DeltaCommandOptions& opts, std::ostream& out,
                     std::ostream& err) {
  cfg.validate();
  if (opts.triples.empty()) throw UsageError("at least one triples file is required");
  auto ontology = detail::require_ontology(cfg);
  GlobalGraph graphs;
  for (const auto& path : opts.triples) {
    auto loaded = detail::load_corpus(path, ontology, cfg, opts.lenient);
    detail::report_warnings(loaded.warnings, err);
    for (auto& g : graphs_of(loaded.graph)) graphs.add(std::move(g));
  }
  // Images with no valid triples have empty graphs rather than being absent.
  auto graph_or_empty = [&](const std::string& id) {
    const auto* g = graphs.find(id);
    if (g == nullptr) {
      err << "warning: image '" << id << "' has no triples; using an empty graph\n";
      return ImageGraph{id, {}, std::nullopt};
    }
    return *g;
  };
  std::vector<StyleDelta> deltas;
  for (const auto& p : load_pairs(opts.pairs)) {
    deltas.push_back(style_delta(graph_or_empty(p.reference_id), graph_or_empty(p.stylised_id), p.pair_id));
  }
  auto dir = detail::prepare_out(cfg);
  write_file(dir / "deltas.tsv", format_deltas(deltas));
  write_file(dir / "deltas.json", dump(to_json(deltas)));
  std::size_t total = 0;
  for (const auto& d : deltas) total += d.introduced.size();
  out << "pairs: " << deltas.size() << ", delta elements: " << total << '\n';
  return to_int(ExitCode::kOk);
}

// ---------------------------------------------------------------------------

struct MatchCommandOptions {
  fs::path deltas;
  fs::path world;
  fs::path labels;
  MatchOptions match;
  bool lenient = false;
};

inline int cmd_match(const RunConfig& cfg, const MatchCommandOptions& opts, std::ostream& out,
                     std::ostream& err) {
  cfg.validate();
  auto ontology = detail::require_ontology(cfg);
  auto labels = load_labels(opts.labels);
  auto world = detail::load_corpus(opts.world, ontology, cfg, opts.lenient, &labels);
  detail::report_warnings(world.warnings, err);
  auto deltas = load_deltas(opts.deltas);
  if (cfg.match_mode != MatchMode::kQualified) {
    for (auto& d : deltas) {
      ImageGraph g{d.pair_id, std::move(d.introduced), std::nullopt};
      d.introduced = project(g, cfg.match_mode).nodes;
    }
  }
  auto report = match_world(deltas, world.graph, opts.match);
  auto dir = detail::prepare_out(cfg);
  write_file(dir / "match.json", dump(to_json(report)));
  write_file(dir / "match_labels.tsv", format_label_distribution(label_distribution(report)));
  write_file(dir / "unmatched.tsv", format_unmatched(report));
  out << format_match_summary(report);
  return to_int(ExitCode::kOk);
}

// ---------------------------------------------------------------------------

struct UnlearnPlanOptions {
  std::vector<fs::path> rank_reports;
  std::string experiment_id = "experiment";
};

inline int cmd_unlearn_plan(const RunConfig& cfg, const UnlearnPlanOptions& opts, std::ostream& out,
                            std::ostream& /*err*/) {
  cfg.validate();
  if (opts.rank_reports.empty()) throw UsageError("at least one --rank report is required");
  std::vector<RankResult> ranks;
  for (const auto& p : opts.rank_reports) ranks.push_back(load_rank_report(p));
  auto plan = select_removals(ranks, cfg.k, opts.experiment_id);
  auto dir = detail::prepare_out(cfg);
  write_file(dir / "removal_plan.tsv", format_removal_plan(plan));
  write_file(dir / "removal_plan.json", dump(to_json(plan)));
  out << "prompts: " << plan.per_prompt.size() << ", images to remove: " << plan.total_removed << '\n';
  return to_int(ExitCode::kOk);
}

struct UnlearnReportOptions {
  fs::path before;
  fs::path after;
  fs::path pairing;
  std::string stage = "after";
};

inline int cmd_unlearn_report(const RunConfig& cfg, const UnlearnReportOptions& opts,
                              std::ostream& out, std::ostream& /*err*/) {
  cfg.validate();
  auto before = load_embeddings(opts.before);
  auto after = load_embeddings(opts.after);
  auto report = compare_runs(before, after, load_pairing(opts.pairing));
  auto dir = detail::prepare_out(cfg);
  json j = to_json(report);
  j["stage"] = opts.stage;
  detail::write_pair(dir, "similarity", format_similarity(report, opts.stage), j);
  out << opts.stage << '\t' << format_similarity_row(report) << '\n';
  return to_int(ExitCode::kOk);
}

// ---------------------------------------------------------------------------

struct FreqCommandOptions {
  fs::path triples;
  std::size_t top_k = 20;
  bool lenient = false;
};

inline int cmd_freq(const RunConfig& cfg, const FreqCommandOptions& opts, std::ostream& out,
                    std::ostream& err) {
  cfg.validate();
  auto ontology = detail::require_ontology(cfg);
  auto corpus = detail::load_corpus(opts.triples, ontology, cfg, opts.lenient);
  detail::report_warnings(corpus.warnings, err);
  auto entries = attribute_frequency(corpus.graph, opts.top_k);
  auto tsv = format_frequency(entries);
  detail::write_pair(detail::prepare_out(cfg), "freq", tsv, to_json(entries));
  out << tsv;
  return to_int(ExitCode::kOk);
}

struct ExportCommandOptions {
  fs::path triples;
  std::optional<fs::path> labels;
  bool lenient = false;
};

inline int cmd_export_bulk(const RunConfig& cfg, const ExportCommandOptions& opts, std::ostream& out,
                           std::ostream& err) {
  cfg.validate();
  auto ontology = detail::require_ontology(cfg);
  std::optional<LabelMap> labels;
  if (opts.labels) labels = load_labels(*opts.labels);
  auto corpus = detail::load_corpus(opts.triples, ontology, cfg, opts.lenient,
                                    labels ? &*labels : nullptr);
  detail::report_warnings(corpus.warnings, err);
  auto dir = detail::prepare_out(cfg);
  export_bulk(corpus.graph, dir);
  out << "images: " << corpus.graph.size() << ", attribute nodes: " << corpus.graph.index().size()
      << '\n';
  return to_int(ExitCode::kOk);
}

}  // namespace kgattr
