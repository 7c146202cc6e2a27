#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gcmc/graph.hpp"
#include "oracles.hpp"

using namespace gcmc;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gcmc::Error thrown";
  return ErrorCode::InvalidArgument;
}

Graph ends_path() { return build_graph({"s1", "s2", "s3", "s4"}, {{"s1", "s3"}, {"s3", "s4"}, {"s2", "s4"}}); }

}  // namespace

TEST(Graph, BuildKeepsDeclarationOrder) {
  auto g = ends_path();
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(g.label(2), "s3");
  EXPECT_EQ(g.index_of("s4"), 3u);
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(0, 1));
}

TEST(Graph, AdjacencyIsReflexiveAndSymmetric) {
  auto g = ends_path();
  EXPECT_TRUE(is_adjacent(g, "s1", "s1"));
  EXPECT_TRUE(is_adjacent(g, "s3", "s1"));
  EXPECT_FALSE(is_adjacent(g, "s1", "s4"));
  EXPECT_EQ(code_of([&] { is_adjacent(g, "s1", "zz"); }), ErrorCode::UnknownLabel);
}

TEST(Graph, ValidationErrors) {
  EXPECT_EQ(code_of([] { build_graph({}, {}); }), ErrorCode::EmptyGraph);
  EXPECT_EQ(code_of([] { build_graph({"a", "a"}, {}); }), ErrorCode::DuplicateLabel);
  EXPECT_EQ(code_of([] { build_graph({"a", "b"}, {{"a", "c"}}); }), ErrorCode::UnknownEndpoint);
  EXPECT_EQ(code_of([] { build_graph({"a", "b"}, {{"a", "a"}}); }), ErrorCode::SelfLoop);
  EXPECT_EQ(code_of([] { build_graph({"a", "b"}, {{"a", "b"}, {"b", "a"}}); }), ErrorCode::DuplicateEdge);
}

TEST(Graph, ComponentsOfSplitGraph) {
  auto g = build_graph({"a", "b", "c", "d", "e"}, {{"a", "b"}, {"c", "d"}});
  auto comps = connected_components(g);
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[0], (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(comps[1], (std::vector<std::string>{"c", "d"}));
  EXPECT_EQ(comps[2], (std::vector<std::string>{"e"}));
  EXPECT_FALSE(is_connected(g));
  EXPECT_TRUE(is_connected(ends_path()));
}

TEST(Graph, InducedSubgraphDropsOutsideEdges) {
  auto g = ends_path();
  auto h = induced_subgraph(g, {"s1", "s2"});
  EXPECT_EQ(h.size(), 2u);
  EXPECT_EQ(h.edge_count(), 0u);
  EXPECT_FALSE(is_connected(h));

  auto k = induced_subgraph(g, {"s4", "s3", "s1"});
  EXPECT_EQ(k.labels(), (std::vector<std::string>{"s1", "s3", "s4"}));
  EXPECT_EQ(k.edge_count(), 2u);
  EXPECT_TRUE(is_connected(k));

  EXPECT_EQ(code_of([&] { induced_subgraph(g, std::vector<std::string>{}); }), ErrorCode::EmptySubset);
  EXPECT_EQ(code_of([&] { induced_subgraph(g, {"nope"}); }), ErrorCode::UnknownLabel);
}

TEST(Graph, ComponentsAgreeWithClosureOnAllSmallGraphs) {
  for (int n = 1; n <= 5; ++n) {
    for (const auto& e : oracle::all_graphs(n)) {
      auto g = oracle::to_graph(n, e);
      auto reach = oracle::closure(n, e);
      auto comp = component_ids(g);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ASSERT_EQ(comp[i] == comp[j], bool(reach[i][j])) << n << " " << i << " " << j;
      bool all = true;
      for (int j = 0; j < n; ++j) all = all && reach[0][j];
      ASSERT_EQ(is_connected(g), all);
    }
  }
}

TEST(Graph, InducedConnectivityAgreesWithOracle) {
  const int n = 5;
  for (const auto& e : oracle::all_graphs(n)) {
    auto g = oracle::to_graph(n, e);
    for (unsigned mask = 1; mask < (1u << n); mask += 3) {
      std::vector<int> keep;
      std::vector<std::string> names;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) {
          keep.push_back(i);
          names.push_back(g.label(i));
        }
      ASSERT_EQ(is_connected(induced_subgraph(g, names)), oracle::induced_connected(n, e, keep));
    }
  }
}

TEST(StrongProduct, TwoEdgesGiveK4) {
  auto k2 = build_graph({"a", "b"}, {{"a", "b"}});
  auto p = strong_product(k2, k2);
  EXPECT_EQ(p.labels(), (std::vector<std::string>{"(a,a)", "(a,b)", "(b,a)", "(b,b)"}));
  EXPECT_EQ(p.edge_count(), 6u);
}

TEST(StrongProduct, AdjacencyMatchesDefinition) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    int n1 = 1 + int(rng() % 4), n2 = 1 + int(rng() % 4);
    auto e1 = oracle::all_graphs(n1);
    auto e2 = oracle::all_graphs(n2);
    auto g1 = oracle::to_graph(n1, e1[rng() % e1.size()], "a");
    auto g2 = oracle::to_graph(n2, e2[rng() % e2.size()], "b");
    auto p = strong_product(g1, g2);
    ASSERT_EQ(p.size(), g1.size() * g2.size());
    for (std::size_t u = 0; u < p.size(); ++u)
      for (std::size_t v = 0; v < p.size(); ++v) {
        auto [u1, u2] = split_product_label(p.label(u));
        auto [v1, v2] = split_product_label(p.label(v));
        bool expect = is_adjacent(g1, u1, v1) && is_adjacent(g2, u2, v2);
        ASSERT_EQ(p.adjacent(u, v), expect);
      }
    ASSERT_EQ(is_connected(p), is_connected(g1) && is_connected(g2));
  }
}

TEST(StrongProduct, FoldIsLeftAssociative) {
  auto k2 = build_graph({"0", "1"}, {{"0", "1"}});
  auto path = build_graph({"x", "y", "z"}, {{"x", "y"}, {"y", "z"}});
  std::vector<Graph> fs{k2, path, k2};
  auto folded = strong_product(std::span<const Graph>(fs));
  EXPECT_EQ(folded, strong_product(strong_product(k2, path), k2));
  EXPECT_EQ(folded.size(), 12u);
  EXPECT_EQ(folded.label(0), "((0,x),0)");
}

TEST(StrongProduct, ReservedCharactersRejected) {
  auto bad = build_graph({"a,b"}, {});
  auto ok = build_graph({"c"}, {});
  EXPECT_EQ(code_of([&] { strong_product(bad, ok); }), ErrorCode::ReservedLabel);
  EXPECT_EQ(split_product_label("((a,b),c)"), (std::pair<std::string, std::string>{"(a,b)", "c"}));
  EXPECT_EQ(code_of([] { split_product_label("abc"); }), ErrorCode::ReservedLabel);
}
