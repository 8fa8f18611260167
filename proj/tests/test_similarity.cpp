#include <gtest/gtest.h>

#include "kgattr/similarity.hpp"

using namespace kgattr;

namespace {

ImageGraph g(std::string id, NodeSet nodes) { return {std::move(id), std::move(nodes), std::nullopt}; }

// n distinct nodes with the given prefix.
NodeSet nodes(const std::string& prefix, int n) {
  NodeSet s;
  for (int i = 0; i < n; ++i) s.insert({"p" + std::to_string(i % 6), prefix + std::to_string(i)});
  return s;
}

NodeSet unite(NodeSet a, const NodeSet& b) {
  a.insert(b.begin(), b.end());
  return a;
}

// A-B share 5, B-C share 5, A-C share 0.
std::vector<ImageGraph> chain() {
  auto ab = nodes("ab", 5), bc = nodes("bc", 5);
  return {g("A", unite(ab, nodes("a", 2))), g("B", unite(ab, bc)), g("C", unite(bc, nodes("c", 1)))};
}

}  // namespace

TEST(Overlap, SelfIsNodeCount) {
  auto a = g("a", nodes("x", 3));
  EXPECT_EQ(overlap(a, a).shared, 3u);
}

TEST(Overlap, HandComputed) {
  auto a = g("a", {{"depicts", "dress"}, {"has_pattern", "floral"}, {"has_material_type", "cotton"}});
  auto b = g("b", {{"depicts", "dress"}, {"has_pattern", "striped"}, {"has_material_type", "cotton"}});
  auto s = overlap(a, b);
  EXPECT_EQ(s.shared, 2u);
  EXPECT_EQ(s.shared_nodes, (NodeSet{{"depicts", "dress"}, {"has_material_type", "cotton"}}));
  EXPECT_EQ(s.query_id, "a");
  EXPECT_EQ(s.candidate_id, "b");
}

TEST(Overlap, DisjointAndQualified) {
  EXPECT_EQ(overlap(g("a", nodes("x", 3)), g("b", nodes("y", 3))).shared, 0u);
  // Same value under different predicates is not shared.
  EXPECT_EQ(overlap(g("a", {{"depicts", "red"}}), g("b", {{"hasColorPalette", "red"}})).shared, 0u);
}

TEST(Rank, SingleSharingCandidateFirst) {
  auto q = g("q", nodes("s", 5));
  GlobalGraph corpus = merge_global({g("a", nodes("z", 4)), g("b", nodes("s", 5)), g("c", {})});
  auto r = rank(q, corpus, 1);
  ASSERT_EQ(r.ranking.size(), 1u);
  EXPECT_EQ(r.ranking[0].candidate_id, "b");
  EXPECT_EQ(r.ranking[0].shared, 5u);
}

TEST(Rank, TiesByCandidateId) {
  auto q = g("q", nodes("s", 3));
  GlobalGraph corpus = merge_global({g("zeta", nodes("s", 3)), g("alpha", nodes("s", 3))});
  auto r = rank(q, corpus, 2);
  EXPECT_EQ(r.ranking[0].candidate_id, "alpha");
  EXPECT_EQ(r.ranking[1].candidate_id, "zeta");
}

TEST(Rank, QueryExcludedAndZeroFill) {
  auto q = g("b", nodes("s", 2));
  GlobalGraph corpus = merge_global({g("a", {}), g("b", nodes("s", 2)), g("c", nodes("s", 1)), g("d", {})});
  auto r = rank(q, corpus, 10);
  std::vector<std::string> ids;
  for (const auto& s : r.ranking) ids.push_back(s.candidate_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"c", "a", "d"}));
  auto nz = rank(q, corpus, 10, RankOptions{false});
  EXPECT_EQ(nz.ranking.size(), 1u);
}

TEST(Rank, EmptyCorpusAndBadK) {
  auto q = g("q", nodes("s", 2));
  EXPECT_TRUE(rank(q, GlobalGraph{}, 5).ranking.empty());
  EXPECT_THROW(rank(q, GlobalGraph{}, 0), UsageError);
}

TEST(GroupStats, TwoIdenticalGraphs) {
  NodeSet six = {{"p1", "a"}, {"p2", "b"}, {"p3", "c"}, {"p4", "d"}, {"p5", "e"}, {"p6", "f"}};
  std::vector<ImageGraph> group = {g("x", six), g("y", six)};
  auto s = group_stats(group, default_thresholds());
  EXPECT_EQ(s.distinct_relationships, 6u);
  EXPECT_DOUBLE_EQ(s.avg_unique_values_per_rel, 1.0);
  EXPECT_DOUBLE_EQ(s.avg_shared_attributes, 6.0);
  EXPECT_EQ(s.max_shared_attributes, 6u);
  EXPECT_EQ(s.largest_cluster_at.at(5), 2u);
  EXPECT_EQ(s.largest_cluster_at.at(7), 1u);
}

TEST(GroupStats, Singleton) {
  std::vector<ImageGraph> group = {g("x", nodes("a", 4))};
  auto s = group_stats(group, std::vector<std::size_t>{0, 1, 5, 7});
  EXPECT_DOUBLE_EQ(s.avg_shared_attributes, 0.0);
  EXPECT_EQ(s.max_shared_attributes, 0u);
  for (const auto& [t, n] : s.largest_cluster_at) EXPECT_EQ(n, 1u) << t;
}

TEST(GroupStats, ChainIsConnected) {
  auto group = chain();
  auto s = group_stats(group, default_thresholds());
  EXPECT_EQ(s.largest_cluster_at.at(5), 3u);
  EXPECT_EQ(s.max_shared_attributes, 5u);
  EXPECT_DOUBLE_EQ(s.avg_shared_attributes, 10.0 / 3.0);
}

TEST(GroupStats, UniqueValuesPerRelationship) {
  std::vector<ImageGraph> group = {g("a", {{"depicts", "dress"}, {"has_pattern", "floral"}}),
                                   g("b", {{"depicts", "shirt"}, {"has_pattern", "floral"}}),
                                   g("c", {{"depicts", "skirt"}})};
  auto s = group_stats(group, default_thresholds());
  EXPECT_EQ(s.distinct_relationships, 2u);
  EXPECT_DOUBLE_EQ(s.avg_unique_values_per_rel, 2.0);  // (3 + 1) / 2
}

TEST(GroupStats, QueryRelativeColumns) {
  auto group = chain();
  auto q = g("q", nodes("ab", 5));
  auto s = group_stats(group, default_thresholds(), &q);
  EXPECT_DOUBLE_EQ(*s.avg_shared_with_query, 10.0 / 3.0);
  EXPECT_EQ(*s.max_shared_with_query, 5u);
}

TEST(GroupStats, Errors) {
  EXPECT_THROW(group_stats({}, default_thresholds()), DomainError);
  std::vector<ImageGraph> dup = {g("a", {}), g("a", {})};
  EXPECT_THROW(group_stats(dup, default_thresholds()), ConflictError);
}

TEST(Clusters, ThresholdZeroIsOneComponent) {
  std::vector<ImageGraph> group = {g("b", nodes("x", 1)), g("a", {}), g("c", nodes("y", 2))};
  auto c = clusters(group, 0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], (Cluster{"a", "b", "c"}));
}

TEST(Clusters, DisjointAreSingletons) {
  std::vector<ImageGraph> group = {g("c", nodes("x", 3)), g("a", nodes("y", 3)), g("b", nodes("z", 3))};
  auto c = clusters(group, 1);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], Cluster{"a"});
  EXPECT_EQ(c[1], Cluster{"b"});
  EXPECT_EQ(c[2], Cluster{"c"});
}

TEST(Clusters, Chain) {
  auto group = chain();
  auto c = clusters(group, 5);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].size(), 3u);
  EXPECT_EQ(clusters(group, 6).size(), 3u);
}

TEST(MeanStd, Sample) {
  std::vector<double> xs = {14, 16};
  auto m = mean_std(xs);
  EXPECT_DOUBLE_EQ(m.mean, 15.0);
  EXPECT_NEAR(m.stddev, 1.41421356, 1e-8);
  std::vector<double> one = {3};
  EXPECT_DOUBLE_EQ(mean_std(one).stddev, 0.0);
}

TEST(Summary, AcrossGroups) {
  GroupStats a, b;
  a.distinct_relationships = 14;
  b.distinct_relationships = 16;
  a.largest_cluster_at = {{5, 40}};
  b.largest_cluster_at = {{5, 40}};
  std::vector<GroupStats> v = {a, b};
  auto s = summarize_groups(v);
  EXPECT_EQ(s.groups, 2u);
  EXPECT_DOUBLE_EQ(s.distinct_relationships.mean, 15.0);
  EXPECT_DOUBLE_EQ(s.largest_cluster_at.at(5).mean, 40.0);
  EXPECT_DOUBLE_EQ(s.largest_cluster_at.at(5).stddev, 0.0);
}
