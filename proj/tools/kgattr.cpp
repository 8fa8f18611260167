// kgattr: image-attribute knowledge graphs for training data attribution.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kgattr/kgattr.hpp"

namespace {

using kgattr::KeyValues;

// Flags that double as configuration keys. Only flags actually given on the
// command line override the config file.
class ConfigFlags {
 public:
  void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    options_.emplace_back(key, app.add_option(flag, values_[key], help));
  }

  KeyValues given() const {
    KeyValues kv;
    for (const auto& [key, opt] : options_) {
      if (opt->count() > 0) kv[key] = values_.at(key);
    }
    return kv;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
};

void add_client_flags(CLI::App& cmd, ConfigFlags& flags) {
  flags.add(cmd, "--endpoint", "endpoint", "Model server URL (env KGATTR_ENDPOINT)");
  flags.add(cmd, "--model", "model", "Model name (env KGATTR_MODEL)");
  flags.add(cmd, "--timeout", "timeout", "Per-request timeout in seconds");
  flags.add(cmd, "--max-retries", "max_retries", "Retries on transport errors and 5xx");
  flags.add(cmd, "--concurrency", "max_concurrency", "Maximum requests in flight");
  flags.add(cmd, "--temperature", "temperature", "Sampling temperature");
  flags.add(cmd, "--seed", "seed", "Sampling seed, or 'none'");
  flags.add(cmd, "--template", "template", "Prompt template file");
}

kgattr::RunConfig resolve(const std::string& config_path, const ConfigFlags& flags) {
  KeyValues file;
  if (!config_path.empty()) {
    if (!std::filesystem::exists(config_path)) {
      throw kgattr::UsageError("config file not found: " + config_path);
    }
    file = kgattr::resolve_config_paths(kgattr::load_config_file(config_path), config_path);
  }
  return kgattr::resolve_config(kgattr::environment_values(), file, flags.given());
}

int run(int argc, char** argv) {
  CLI::App app{"Image-attribute knowledge graphs: extraction, similarity ranking, style "
               "tracing and unlearning reports"};
  app.require_subcommand(1);
  app.fallthrough();

  ConfigFlags flags;
  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file");
  flags.add(app, "--ontology", "ontology", "Ontology TSV");
  flags.add(app, "--match-mode", "match_mode", "qualified or value-only");
  flags.add(app, "--out", "out", "Output directory");
  flags.add(app, "--placeholders", "placeholders", "Comma-separated placeholder tokens");

  bool lenient = false;
  app.add_flag("--lenient", lenient, "Skip invalid triple lines with a warning");

  auto* extract = app.add_subcommand("extract", "Extract triples from a directory of images");
  kgattr::ExtractOptions ex;
  extract->add_option("--images", ex.images_dir, "Image directory")->required();
  extract->add_flag("--no-ontology", ex.no_ontology, "Prompt without the ontology (ablation)");
  extract->add_option("--builtin-template", ex.template_name, "default or fashion")
      ->capture_default_str();
  add_client_flags(*extract, flags);

  auto* rank = app.add_subcommand("rank", "Rank corpus images by shared attribute nodes");
  kgattr::RankCommandOptions rk;
  std::string query_triples;
  bool no_zero = false;
  rank->add_option("--triples", rk.triples, "Corpus triple TSV")->required();
  rank->add_option("--query", rk.queries, "Query image id (repeatable)")->required();
  rank->add_option("--query-triples", query_triples, "Triple TSV holding the query graphs");
  rank->add_flag("--no-zero", no_zero, "Omit candidates sharing no attribute");
  flags.add(*rank, "--k", "k", "Ranking size (default 40)");

  auto* stats = app.add_subcommand("stats", "Group statistics over retrieved groups");
  kgattr::StatsCommandOptions st;
  std::string stats_query_triples;
  stats->add_option("--triples", st.triples, "Corpus triple TSV")->required();
  stats->add_option("--group", st.groups, "Group file: id list, rank TSV or rank JSON")->required();
  stats->add_option("--query-triples", stats_query_triples, "Triple TSV holding the query graphs");
  flags.add(*stats, "--thresholds", "thresholds", "Cluster thresholds, e.g. 5,7");

  auto* delta = app.add_subcommand("delta", "Attributes introduced by stylisation");
  kgattr::DeltaCommandOptions dl;
  delta->add_option("--pairs", dl.pairs, "pair_id, reference id, stylised id TSV")->required();
  delta->add_option("--triples", dl.triples, "Triple TSV (repeatable)")->required();

  auto* match = app.add_subcommand("match", "Match style deltas against a labeled world graph");
  kgattr::MatchCommandOptions mt;
  std::string counting = "occurrences";
  match->add_option("--deltas", mt.deltas, "Delta TSV")->required();
  match->add_option("--world", mt.world, "World triple TSV")->required();
  match->add_option("--labels", mt.labels, "image_id, label TSV")->required();
  match->add_option("--counting", counting, "occurrences, element-label or dominant-label")
      ->capture_default_str();
  match->add_flag("--dedupe", mt.match.dedupe_global, "Count each distinct element once");

  auto* plan = app.add_subcommand("unlearn-plan", "Images to remove before retraining");
  kgattr::UnlearnPlanOptions up;
  plan->add_option("--rank", up.rank_reports, "Rank JSON report (repeatable)")->required();
  plan->add_option("--experiment", up.experiment_id, "Experiment id")->capture_default_str();
  flags.add(*plan, "--k", "k", "Images removed per prompt (default 40)");

  auto* report = app.add_subcommand("unlearn-report", "Before/after cosine similarity report");
  kgattr::UnlearnReportOptions ur;
  report->add_option("--before", ur.before, "Embeddings before unlearning")->required();
  report->add_option("--after", ur.after, "Embeddings after unlearning")->required();
  report->add_option("--pairing", ur.pairing, "prompt, before id, after id TSV")->required();
  report->add_option("--stage", ur.stage, "Row label")->capture_default_str();

  auto* freq = app.add_subcommand("freq", "Most frequent attribute nodes");
  kgattr::FreqCommandOptions fq;
  freq->add_option("--triples", fq.triples, "Triple TSV")->required();
  freq->add_option("--top-k", fq.top_k, "Rows to report")->capture_default_str();

  auto* bulk = app.add_subcommand("export-bulk", "nodes.csv and edges.csv for graph database import");
  kgattr::ExportCommandOptions bx;
  std::string labels;
  bulk->add_option("--triples", bx.triples, "Triple TSV")->required();
  bulk->add_option("--labels", labels, "Optional image_id, label TSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kgattr::to_int(kgattr::ExitCode::kUsage);
  }

  auto cfg = resolve(config_path, flags);
  auto& out = std::cout;
  auto& err = std::cerr;
  if (extract->parsed()) return kgattr::cmd_extract(cfg, ex, out, err);
  if (rank->parsed()) {
    if (!query_triples.empty()) rk.query_triples = query_triples;
    rk.include_zero = !no_zero;
    rk.lenient = lenient;
    return kgattr::cmd_rank(cfg, rk, out, err);
  }
  if (stats->parsed()) {
    if (!stats_query_triples.empty()) st.query_triples = stats_query_triples;
    st.lenient = lenient;
    return kgattr::cmd_stats(cfg, st, out, err);
  }
  if (delta->parsed()) {
    dl.lenient = lenient;
    return kgattr::cmd_delta(cfg, dl, out, err);
  }
  if (match->parsed()) {
    mt.match.counting = kgattr::parse_label_counting(counting);
    mt.lenient = lenient;
    return kgattr::cmd_match(cfg, mt, out, err);
  }
  if (plan->parsed()) return kgattr::cmd_unlearn_plan(cfg, up, out, err);
  if (report->parsed()) return kgattr::cmd_unlearn_report(cfg, ur, out, err);
  if (freq->parsed()) {
    fq.lenient = lenient;
    return kgattr::cmd_freq(cfg, fq, out, err);
  }
  if (bulk->parsed()) {
    if (!labels.empty()) bx.labels = labels;
    bx.lenient = lenient;
    return kgattr::cmd_export_bulk(cfg, bx, out, err);
  }
  return kgattr::to_int(kgattr::ExitCode::kUsage);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const kgattr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kgattr::to_int(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kgattr::to_int(kgattr::ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kgattr::to_int(kgattr::ExitCode::kData);
  }
}
