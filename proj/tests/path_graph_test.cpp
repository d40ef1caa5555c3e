// Copyright 2026 The explgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "explgraph/path_graph.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "explgraph/enumerate.hpp"
#include "explgraph/inference.hpp"

namespace explgraph {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kSyntax;
}

// Every simple path from `from` to `to` as a set of edge indices.
std::set<std::set<std::size_t>> simple_paths(const EdgeGraph& g, NodeId from, NodeId to) {
  std::set<std::set<std::size_t>> out;
  std::set<NodeId> seen{from};
  std::set<std::size_t> used;
  std::function<void(NodeId)> go = [&](NodeId at) {
    if (at == to) {
      out.insert(used);
      return;
    }
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      const auto& ed = g.edges()[e];
      NodeId z;
      if (ed.u == at) {
        z = ed.v;
      } else if (ed.v == at) {
        z = ed.u;
      } else {
        continue;
      }
      if (seen.count(z)) continue;
      seen.insert(z);
      used.insert(e);
      go(z);
      used.erase(e);
      seen.erase(z);
    }
  };
  go(from);
  return out;
}

std::set<std::set<std::size_t>> explanation_edges(const Enumeration& en) {
  std::set<std::set<std::size_t>> out;
  for (const auto& e : en.explanations) {
    std::set<std::size_t> s;
    for (const auto& inst : e.instances()) {
      EXPECT_EQ(inst.value, 0u);
      EXPECT_EQ(inst.count, 1u);
      s.insert(inst.sw);
    }
    out.insert(s);
  }
  return out;
}

TEST(PathGraphTest, SwitchesFollowEdgeOrder) {
  const auto eg = fig5_edge_graph();
  const auto g = compile_path_graph(eg, 1, 4);
  ASSERT_EQ(g.num_switches(), 8u);
  EXPECT_EQ(g.switch_decl(0).id.str(), "d_e(1,2)");
  EXPECT_EQ(g.switch_decl(7).id.str(), "d_e(5,4)");
  EXPECT_EQ(g.switch_decl(3).values.size(), 2u);
  EXPECT_EQ(g.switch_decl(3).values[0].str(), "on");
  EXPECT_EQ(g.exclusiveness_hint(), Exclusiveness::kOverlapping);
  EXPECT_TRUE(g.find_goal("path(1,4,[1])").has_value());
  EXPECT_TRUE(g.find_goal("path(2,4,[1,2])").has_value());
}

TEST(PathGraphTest, ExplanationsAreTheSimplePaths) {
  const auto eg = fig5_edge_graph();
  const auto g = compile_path_graph(eg, 1, 4);
  const auto en = enumerate_explanations(g, g.roots()[0]);
  const auto expected = simple_paths(eg, 1, 4);
  EXPECT_EQ(expected.size(), 8u);
  EXPECT_EQ(explanation_edges(en), expected);
  for (auto m : en.multiplicity) EXPECT_EQ(m, 1u);
  EXPECT_EQ(check_exclusiveness(en.explanations), Exclusiveness::kOverlapping);
}

TEST(PathGraphTest, InsideIsSumOverPaths) {
  const auto eg = fig5_edge_graph();
  const auto g = compile_path_graph(eg, 1, 4);
  const auto theta = edge_parameters(eg);
  double sum = 0.0;
  for (const auto& path : simple_paths(eg, 1, 4)) {
    double p = 1.0;
    for (auto e : path) p *= eg.edges()[e].p;
    sum += p;
  }
  const auto in = inside_prob(g, theta);
  EXPECT_NEAR(in.prob(g.roots()[0]), sum, 1e-12);
  EXPECT_FALSE(in.is_probability);
}

TEST(PathGraphTest, ViterbiBeforeLearning) {
  const auto eg = fig5_edge_graph();
  const auto g = compile_path_graph(eg, 1, 4);
  const auto v = viterbi(g, g.roots()[0], edge_parameters(eg));
  EXPECT_NEAR(v.prob(), 0.432, 1e-12);
  EXPECT_EQ(path_str(explanation_path(eg, g, v.explanation, 1)), "1-2-3-4");
}

TEST(PathGraphTest, SameEndpointsGiveEmptyExplanation) {
  const auto eg = fig5_edge_graph();
  const auto g = compile_path_graph(eg, 3, 3);
  const auto en = enumerate_explanations(g, g.roots()[0]);
  ASSERT_EQ(en.explanations.size(), 1u);
  EXPECT_TRUE(en.explanations[0].empty());
  EXPECT_DOUBLE_EQ(goal_prob(g, g.roots()[0], edge_parameters(eg)), 1.0);
}

TEST(PathGraphTest, MultiQuerySharesSwitches) {
  const auto eg = fig5_edge_graph();
  const auto g = compile_path_queries(eg, eg.queries());
  ASSERT_EQ(g.roots().size(), 5u);
  EXPECT_EQ(g.num_switches(), 8u);
  EXPECT_EQ(g.label(g.roots()[4]), "path(3,6)");
  for (std::size_t k = 0; k < eg.queries().size(); ++k) {
    const auto& q = eg.queries()[k];
    const auto en = enumerate_explanations(g, g.roots()[k]);
    EXPECT_EQ(explanation_edges(en), simple_paths(eg, q.from, q.to)) << g.label(g.roots()[k]);
  }
}

TEST(PathGraphPropertyTest, RandomGraphsMatchOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    EdgeGraph eg;
    const int n = 3 + static_cast<int>(rng() % 4);
    for (int u = 1; u <= n; ++u) {
      for (int v = 1; v <= n; ++v) {
        if (u != v && rng() % 3 == 0) eg.add_edge(u, v, 0.1 + 0.8 * static_cast<double>(rng() % 100) / 100.0);
      }
    }
    if (eg.edges().empty()) continue;
    const auto nodes = std::vector<NodeId>(eg.nodes().begin(), eg.nodes().end());
    const NodeId a = nodes.front(), b = nodes.back();
    const auto paths = simple_paths(eg, a, b);
    if (paths.empty()) {
      EXPECT_EQ(code_of([&] { compile_path_graph(eg, a, b); }), ErrorCode::kNoPath);
      continue;
    }
    const auto g = compile_path_graph(eg, a, b);
    EXPECT_EQ(explanation_edges(enumerate_explanations(g, g.roots()[0])), paths);
  }
}

TEST(PathGraphTest, Errors) {
  EdgeGraph eg;
  EXPECT_EQ(code_of([&] { eg.add_edge(1, 1, 0.5); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { eg.add_edge(1, 2, 1.5); }), ErrorCode::kRange);
  eg.add_edge(1, 2, 0.5);
  eg.add_edge(3, 4, 0.5);
  EXPECT_EQ(code_of([&] { eg.add_edge(1, 2, 0.3); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { compile_path_graph(eg, 1, 4); }), ErrorCode::kNoPath);
  EXPECT_EQ(code_of([&] { compile_path_graph(eg, 1, 9); }), ErrorCode::kLookup);
}

TEST(EdgeFileTest, RoundTrip) {
  const auto eg = fig5_edge_graph();
  const auto txt = emit_edge_graph(eg);
  EXPECT_EQ(parse_edge_graph(txt), eg);
  EXPECT_EQ(emit_edge_graph(parse_edge_graph(txt)), txt);
  EXPECT_EQ(parse_edge_graph("# comment\nedge 1 2 0.5  # trailing\n\nquery 2 1\n").queries().size(), 1u);
}

TEST(EdgeFileTest, ErrorsCarryLine) {
  try {
    parse_edge_graph("edge 1 2 0.5\nedge 2 3 7\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRange);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_edge_graph("edge 1 2\n"); }), ErrorCode::kSyntax);
  EXPECT_EQ(code_of([] { parse_edge_graph("edge 1 x 0.5\n"); }), ErrorCode::kSyntax);
  EXPECT_EQ(code_of([] { parse_edge_graph("edge 1 2 0.5\nquery 1 5\n"); }), ErrorCode::kLookup);
}

}  // namespace
}  // namespace explgraph
