#include <gtest/gtest.h>

#include "kgattr/graphstore.hpp"
#include "support/paths.hpp"

using namespace kgattr;

namespace {

Ontology fashion() {
  return Ontology("fashion", {{"depicts", "Category", {}},
                              {"has_pattern", "Pattern", {}},
                              {"has_material_type", "Textile", {}}});
}

ImageGraph g(std::string id, NodeSet nodes) { return {std::move(id), std::move(nodes), std::nullopt}; }

GlobalGraph two_graphs() {
  return merge_global({g("img1", {{"depicts", "dress"}, {"has_pattern", "floral"}}),
                       g("img2", {{"depicts", "dress"}, {"has_material_type", "cotton"}})});
}

}  // namespace

TEST(BuildImageGraph, Dedup) {
  std::vector<Triple> t = {{"i", "depicts", "dress"}, {"i", "depicts", "dress"}};
  auto graph = build_image_graph(t);
  EXPECT_EQ(graph.image_id, "i");
  EXPECT_EQ(graph.nodes.size(), 1u);
}

TEST(BuildImageGraph, StarGraphNodeCountEqualsDistinctTriples) {
  std::vector<Triple> t = {{"i", "depicts", "dress"},        {"i", "has_silhouette", "a-line"},
                           {"i", "has_material_type", "silk"}, {"i", "has_pattern", "floral"},
                           {"i", "has_pattern", "striped"},   {"i", "depicts", "dress"}};
  EXPECT_EQ(build_image_graph(t).nodes.size(), 5u);
}

TEST(BuildImageGraph, EmptyAndMixed) {
  EXPECT_TRUE(build_image_graph({}).nodes.empty());
  std::vector<Triple> mixed = {{"a", "depicts", "x"}, {"b", "depicts", "x"}};
  EXPECT_THROW(build_image_graph(mixed), DomainError);
}

TEST(MergeGlobal, SharedNodeIndexed) {
  auto global = two_graphs();
  EXPECT_EQ(global.holders({"depicts", "dress"}).size(), 2u);
  EXPECT_EQ(global.holders({"has_pattern", "floral"}).size(), 1u);
  EXPECT_TRUE(global.holders({"has_pattern", "none"}).empty());
  EXPECT_TRUE(global.index_consistent());
  EXPECT_EQ(global.index().size(), 3u);
}

TEST(MergeGlobal, OneGraph) {
  auto global = merge_global({g("a", {{"depicts", "x"}, {"has_pattern", "y"}})});
  EXPECT_EQ(global.size(), 1u);
  for (const auto& [node, ids] : global.index()) EXPECT_EQ(ids.size(), 1u);
}

TEST(MergeGlobal, DuplicateIdNamed) {
  try {
    merge_global({g("a", {}), g("b", {}), g("a", {})});
    FAIL() << "expected ConflictError";
  } catch (const ConflictError& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
}

TEST(MergeGlobal, SortedIterationAndRemoval) {
  auto global = merge_global({g("c", {{"depicts", "x"}}), g("a", {{"depicts", "x"}}), g("b", {})});
  std::vector<std::string> ids;
  for (const auto& [id, graph] : global.images()) ids.push_back(id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(global.remove("a"));
  EXPECT_FALSE(global.remove("a"));
  EXPECT_EQ(global.holders({"depicts", "x"}), (std::set<std::string>{"c"}));
  EXPECT_TRUE(global.remove("c"));
  EXPECT_TRUE(global.index().empty()) << "no empty index entries";
  EXPECT_TRUE(global.index_consistent());
  EXPECT_THROW(global.at("zzz"), LookupError);
}

TEST(Frequency, Basics) {
  auto global = merge_global({g("a", {{"depicts", "dress"}, {"has_pattern", "x"}}),
                              g("b", {{"depicts", "dress"}}),
                              g("c", {{"depicts", "dress"}, {"has_pattern", "w"}})});
  auto f = attribute_frequency(global, 10);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].node, (AttrNode{"depicts", "dress"}));
  EXPECT_EQ(f[0].count, 3u);
  EXPECT_EQ(f[1].node, (AttrNode{"has_pattern", "w"})) << "ties by (predicate, value)";
  EXPECT_TRUE(attribute_frequency(GlobalGraph{}, 5).empty());
}

TEST(Frequency, TopK) {
  GlobalGraph global;
  global.add(g("a", {{"p", "1"}, {"p", "2"}, {"p", "3"}, {"p", "4"}, {"p", "5"}}));
  EXPECT_EQ(attribute_frequency(global, 1).size(), 1u);
}

TEST(TriplesFile, RoundTrip) {
  testpaths::TempDir dir;
  auto global = two_graphs();
  save_triples(global, dir / "t.tsv");
  auto loaded = load_triples(dir / "t.tsv", fashion());
  EXPECT_EQ(loaded.graph, global);
  EXPECT_TRUE(loaded.graph.index_consistent());
  EXPECT_TRUE(loaded.warnings.empty());
}

TEST(TriplesFile, StrictPlaceholderIsValidationError) {
  std::vector<std::string> lines = {"img1\tdepicts\tdress", "img1\thas_pattern\tNone"};
  EXPECT_THROW(parse_triples("t", lines, fashion()), ValidationError);
  auto lenient = parse_triples("t", lines, fashion(), nullptr, {true, default_placeholders()});
  EXPECT_EQ(lenient.graph.at("img1").nodes.size(), 1u);
  EXPECT_EQ(lenient.warnings.size(), 1u);
}

TEST(TriplesFile, UnknownPredicatesListed) {
  std::vector<std::string> lines = {"img1\tflies\tspaceship", "img1\tdepicts\tdress",
                                    "img2\tswims\tfish"};
  try {
    parse_triples("t.tsv", lines, fashion());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("t.tsv:1"), std::string::npos);
    EXPECT_NE(msg.find("t.tsv:3"), std::string::npos);
  }
}

TEST(TriplesFile, MalformedLineAlwaysFails) {
  std::vector<std::string> lines = {"img1\tdepicts"};
  EXPECT_THROW(parse_triples("t", lines, fashion(), nullptr, {true, default_placeholders()}),
               ParseError);
}

TEST(TriplesFile, NormalizesAndRespells) {
  std::vector<std::string> lines = {"img1\tDEPICTS\t  Navy   Dress "};
  auto r = parse_triples("t", lines, fashion());
  EXPECT_EQ(*r.graph.at("img1").nodes.begin(), (AttrNode{"depicts", "navy dress"}));
}

TEST(TriplesFile, LabelsApplied) {
  testpaths::TempDir dir;
  write_file(dir / "labels.tsv", "img1\tSpirited Away\n");
  auto labels = load_labels(dir / "labels.tsv");
  std::vector<std::string> lines = {"img1\tdepicts\thouse", "img2\tdepicts\ttree"};
  auto r = parse_triples("t", lines, fashion(), &labels);
  EXPECT_EQ(r.graph.at("img1").source_label, "Spirited Away");
  EXPECT_FALSE(r.graph.at("img2").source_label.has_value());
  write_file(dir / "bad.tsv", "img1\n");
  EXPECT_THROW(load_labels(dir / "bad.tsv"), ParseError);
}

TEST(BulkExport, Counts) {
  auto global = merge_global({g("i", {{"depicts", "dress"}, {"has_pattern", "floral"}})});
  auto b = format_bulk(global);
  EXPECT_EQ(b.nodes_csv,
            "node_id,kind,predicate,value,source_label\n"
            "image:i,image,,,\n"
            "attr:depicts=dress,attribute,depicts,dress,\n"
            "attr:has_pattern=floral,attribute,has_pattern,floral,\n");
  EXPECT_EQ(b.edges_csv,
            "image_node_id,attribute_node_id,predicate\n"
            "image:i,attr:depicts=dress,depicts\n"
            "image:i,attr:has_pattern=floral,has_pattern\n");
}

TEST(BulkExport, EmptyHasHeadersOnly) {
  auto b = format_bulk(GlobalGraph{});
  EXPECT_EQ(b.nodes_csv, "node_id,kind,predicate,value,source_label\n");
  EXPECT_EQ(b.edges_csv, "image_node_id,attribute_node_id,predicate\n");
}

TEST(BulkExport, QuotingAndDeterminism) {
  auto global = merge_global({{"f1", {{"depicts", "house, \"red\""}}, "Kiki's Delivery Service"}});
  testpaths::TempDir dir;
  export_bulk(global, dir / "a");
  export_bulk(global, dir / "b");
  auto nodes = read_file(dir / "a" / "nodes.csv");
  EXPECT_NE(nodes.find("\"attr:depicts=house, \"\"red\"\"\""), std::string::npos);
  EXPECT_NE(nodes.find("Kiki's Delivery Service"), std::string::npos);
  EXPECT_EQ(nodes, read_file(dir / "b" / "nodes.csv"));
  EXPECT_EQ(read_file(dir / "a" / "edges.csv"), read_file(dir / "b" / "edges.csv"));
}

TEST(MatchMode, ValueOnlyProjection) {
  EXPECT_EQ(parse_match_mode("value-only"), MatchMode::kValueOnly);
  EXPECT_THROW(parse_match_mode("fuzzy"), UsageError);
  auto global = project(two_graphs(), MatchMode::kValueOnly);
  EXPECT_EQ(global.holders({"*", "dress"}).size(), 2u);
  EXPECT_TRUE(global.index_consistent());
}
