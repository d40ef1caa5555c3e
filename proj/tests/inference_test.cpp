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

#include "explgraph/inference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "explgraph/enumerate.hpp"
#include "explgraph/error.hpp"
#include "support/test_graphs.hpp"

namespace explgraph {
namespace {

using testing::sym;
using testing::syms;

TEST(LogSumExpTest, Basics) {
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), kNegInf);
  EXPECT_EQ(log_sum_exp(std::vector<double>{kNegInf, kNegInf}), kNegInf);
  EXPECT_EQ(log_sum_exp(std::vector<double>{-3.25}), -3.25);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{std::log(0.2), std::log(0.3)}), std::log(0.5),
              1e-15);
  // No overflow for large magnitudes.
  EXPECT_NEAR(log_sum_exp(std::vector<double>{-1000.0, -1000.0}), -1000.0 + std::log(2.0), 1e-12);
  EXPECT_EQ(log_add(kNegInf, -2.0), -2.0);
  EXPECT_NEAR(log_add(std::log(0.25), std::log(0.25)), std::log(0.5), 1e-15);
}

TEST(InsideTest, CoinGraph) {
  const auto g = testing::coin_graph();
  const auto t = inside_prob(g, testing::coin_theta(0.6));
  EXPECT_DOUBLE_EQ(t.prob(GoalId{0}), 0.6);
  EXPECT_DOUBLE_EQ(goal_prob(g, "G", testing::coin_theta(0.6)), 0.6);
  EXPECT_DOUBLE_EQ(goal_prob(g, GoalId{0}, testing::coin_theta(0.6)), 0.6);
}

TEST(InsideTest, Errors) {
  const auto g = testing::coin_graph();
  EXPECT_THROW(inside_prob(g, ParameterTable{}), Error);
  try {
    goal_prob(g, "missing", testing::coin_theta(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLookup);
  }
  ParameterTable partial;
  partial.set(sym("c"), syms({"heads"}), {1.0});
  try {
    inside_prob(g, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingParameter);
  }
}

TEST(InsideTest, ParameterValueOrderIsIrrelevant) {
  const auto g = testing::coin_graph();
  ParameterTable swapped;
  swapped.set(sym("c"), syms({"tails", "heads"}), {0.4, 0.6});
  EXPECT_DOUBLE_EQ(goal_prob(g, "G", swapped), 0.6);
}

TEST(InsideTest, OverlappingHintMarksScores) {
  auto g = testing::coin_graph();
  EXPECT_TRUE(inside_prob(g, testing::coin_theta(0.5)).is_probability);
  g.set_exclusiveness_hint(Exclusiveness::kOverlapping);
  g.validate();
  EXPECT_FALSE(inside_prob(g, testing::coin_theta(0.5)).is_probability);
}

TEST(InsideTest, LongChainsDoNotUnderflowInLogSpace) {
  // 2000 nested coin flips: probability 0.5^2000 underflows but its log
  // does not.
  ExplanationGraph g;
  g.declare_switch(sym("c"), syms({"h", "t"}));
  GoalId prev = g.add_goal("g0");
  g.add_body(prev, Body{{}, {g.instance(sym("c"), sym("h"))}});
  for (int k = 1; k < 2000; ++k) {
    const GoalId next = g.add_goal("g" + std::to_string(k));
    g.add_body(next, Body{{prev}, {g.instance(sym("c"), sym("h"))}});
    prev = next;
  }
  g.validate();
  ParameterTable th;
  th.set(sym("c"), syms({"h", "t"}), {0.5, 0.5});
  const auto t = inside_prob(g, th);
  EXPECT_NEAR(t.log_prob(prev), 2000 * std::log(0.5), 1e-9);
  EXPECT_EQ(t.prob(prev), 0.0);
  EXPECT_NEAR(viterbi(g, prev, th).log_prob, 2000 * std::log(0.5), 1e-9);
}

TEST(ViterbiTest, TieBreakPicksFirstBody) {
  const auto g = testing::two_way_graph();
  ParameterTable th;
  th.set(sym("s"), syms({"a", "b"}), {0.5, 0.5});
  const auto r = viterbi(g, GoalId{0}, th);
  ASSERT_EQ(r.choice_trace.size(), 1u);
  EXPECT_EQ(r.choice_trace[0].second, 0u);
  EXPECT_EQ(g.explanation_str(r.explanation), "[s=a]");
  const auto last = viterbi(g, GoalId{0}, th, TieBreak::kLast);
  EXPECT_EQ(g.explanation_str(last.explanation), "[s=b]");
}

TEST(ViterbiTest, SingleExplanation) {
  const auto g = testing::coin_graph();
  const auto r = viterbi(g, GoalId{0}, testing::coin_theta(0.6));
  EXPECT_EQ(g.explanation_str(r.explanation), "[c=heads]");
  EXPECT_NEAR(r.prob(), 0.6, 1e-15);
}

TEST(ViterbiTest, AllZero) {
  const auto g = testing::coin_graph();
  try {
    viterbi(g, GoalId{0}, testing::coin_theta(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllZero);
  }
}

TEST(ViterbiTest, ZeroParametersAreSkipped) {
  const auto g = testing::two_way_graph();
  ParameterTable th;
  th.set(sym("s"), syms({"a", "b"}), {0.0, 1.0});
  const auto r = viterbi(g, GoalId{0}, th);
  EXPECT_EQ(g.explanation_str(r.explanation), "[s=b]");
  EXPECT_EQ(r.log_prob, 0.0);
}

TEST(ViterbiTest, SharedSubgoalMultiplicities) {
  // A <=> B & B, B <=> msw(s,a): explanation s=a*2.
  ExplanationGraph g;
  g.declare_switch(sym("s"), syms({"a", "b"}));
  const GoalId a = g.add_goal("A");
  const GoalId b = g.add_goal("B");
  g.add_body(b, Body{{}, {g.instance(sym("s"), sym("a"))}});
  g.add_body(a, Body{{b, b}, {}});
  g.validate();
  ParameterTable th;
  th.set(sym("s"), syms({"a", "b"}), {0.3, 0.7});
  const auto r = viterbi(g, a, th);
  EXPECT_EQ(g.explanation_str(r.explanation), "[s=a*2]");
  EXPECT_NEAR(r.prob(), 0.09, 1e-15);
  EXPECT_EQ(r.choice_trace.size(), 2u);
}

TEST(InferenceProperty, InsideMatchesEnumerationOnExclusiveGraphs) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 200; ++t) {
    const auto g = testing::random_exclusive_graph(rng);
    const auto en = enumerate_explanations(g, g.roots()[0]);
    const auto theta = testing::random_theta(g, rng);
    double oracle = 0.0;
    for (std::size_t k = 0; k < en.explanations.size(); ++k) {
      oracle += static_cast<double>(en.multiplicity[k]) * explanation_prob(en.explanations[k], theta);
    }
    const auto in = inside_prob(g, to_table(g, theta));
    EXPECT_TRUE(testing::close_rel(in.prob(g.roots()[0]), oracle, 1e-9));
    EXPECT_NEAR(std::exp(in.log_prob(g.roots()[0])), in.prob(g.roots()[0]), 1e-15);
  }
}

TEST(InferenceProperty, ViterbiMatchesEnumerationMax) {
  std::mt19937_64 rng(202);
  for (int t = 0; t < 200; ++t) {
    const auto g = testing::random_dag(rng);
    const auto en = enumerate_explanations(g, g.roots()[0]);
    const auto theta = testing::random_theta(g, rng);
    double best = kNegInf;
    double second = kNegInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < en.explanations.size(); ++k) {
      const double lp = explanation_log_prob(en.explanations[k], theta);
      if (lp > best) {
        second = best;
        best = lp;
        arg = k;
      } else if (lp > second) {
        second = lp;
      }
    }
    const auto r = viterbi(g, g.roots()[0], to_table(g, theta));
    EXPECT_NEAR(r.log_prob, best, 1e-9);
    EXPECT_NEAR(explanation_log_prob(r.explanation, theta), r.log_prob, 1e-9);
    if (best - second > 1e-9) {
      EXPECT_EQ(r.explanation, en.explanations[arg]);
    }
  }
}

TEST(InferenceProperty, ViterbiArgmaxInvariantUnderMonotoneRescaling) {
  // Raising every parameter to a power p > 0 is a strictly monotone map of
  // every explanation score, so the argmax explanation is unchanged.
  std::mt19937_64 rng(303);
  for (int t = 0; t < 100; ++t) {
    const auto g = testing::random_dag(rng);
    auto theta = testing::random_theta(g, rng);
    const auto base = viterbi_table(g, log_table(theta));
    auto scaled = log_table(theta);
    for (auto& row : scaled.rows) {
      for (auto& l : row) l *= 2.5;
    }
    const auto other = viterbi_table(g, scaled);
    const auto r1 = extract_viterbi(g, base, g.roots()[0]);
    const auto r2 = extract_viterbi(g, other, g.roots()[0]);
    EXPECT_NEAR(r2.log_prob, 2.5 * r1.log_prob, 1e-9);
    EXPECT_NEAR(explanation_log_prob(r2.explanation, theta),
                explanation_log_prob(r1.explanation, theta), 1e-9);
  }
}

TEST(InferenceProperty, ViterbiIsDeterministic) {
  std::mt19937_64 rng(404);
  for (int t = 0; t < 50; ++t) {
    const auto g = testing::random_dag(rng);
    const auto theta = testing::random_table(g, rng);
    const auto a = viterbi(g, g.roots()[0], theta);
    const auto b = viterbi(g, g.roots()[0], theta);
    EXPECT_EQ(a.explanation, b.explanation);
    EXPECT_EQ(a.log_prob, b.log_prob);
    EXPECT_EQ(a.choice_trace, b.choice_trace);
  }
}

}  // namespace
}  // namespace explgraph
