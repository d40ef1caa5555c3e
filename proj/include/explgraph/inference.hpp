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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/params.hpp"

namespace explgraph {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) with max-shift; -inf is the additive identity.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// Log-sum-exp over `xs`. A single finite term is returned unchanged.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (xs.size() == 1) return xs[0];
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

namespace detail {

inline double body_log_factor(const Body& body, const DenseTable& log_theta) {
  double lp = 0.0;
  for (const auto& inst : body.instances) {
    const double l = log_theta(inst.sw, inst.value);
    if (l == kNegInf) return kNegInf;
    lp += static_cast<double>(inst.count) * l;
  }
  return lp;
}

}  // namespace detail

/// Inside values for every goal. `log_inside` is authoritative; `inside`
/// is the linear view. On graphs not known to be exclusive the values are
/// sum-product scores rather than probabilities (`is_probability` false).
struct InsideTable {
  std::vector<double> log_inside;
  std::vector<double> inside;
  bool is_probability = true;

  double prob(GoalId g) const { return inside.at(g.index); }
  double log_prob(GoalId g) const { return log_inside.at(g.index); }
};

/// Sum-product over the graph in topological order, in log space. One pass,
/// linear in the total body size. `log_theta` must be aligned with `graph`.
inline InsideTable inside_log(const ExplanationGraph& graph, const DenseTable& log_theta) {
  graph.require_validated();
  InsideTable t;
  t.log_inside.assign(graph.num_goals(), kNegInf);
  std::vector<double> terms;
  for (const GoalId g : graph.topo_order()) {
    const auto& bodies = graph.formula(g).bodies;
    terms.clear();
    for (const auto& b : bodies) {
      double lp = detail::body_log_factor(b, log_theta);
      for (const auto& s : b.subgoals) {
        if (lp == kNegInf) break;
        lp += t.log_inside[s.index];
      }
      terms.push_back(lp);
    }
    t.log_inside[g.index] = log_sum_exp(terms);
  }
  t.inside.resize(t.log_inside.size());
  std::transform(t.log_inside.begin(), t.log_inside.end(), t.inside.begin(),
                 [](double l) { return std::exp(l); });
  t.is_probability = graph.exclusiveness_hint() != Exclusiveness::kOverlapping;
  return t;
}

inline InsideTable inside_prob(const ExplanationGraph& graph, const ParameterTable& theta) {
  return inside_log(graph, log_table(resolve(graph, theta)));
}

inline double goal_prob(const ExplanationGraph& graph, std::string_view goal_label,
                        const ParameterTable& theta) {
  const GoalId g = graph.goal(goal_label);
  return inside_prob(graph, theta).prob(g);
}

inline double goal_prob(const ExplanationGraph& graph, GoalId goal, const ParameterTable& theta) {
  return inside_prob(graph, theta).prob(goal);
}

/// How exact ties between body scores are resolved. `kFirst` keeps the
/// lowest-index body; `kLast` keeps the highest.
enum class TieBreak { kFirst, kLast };

/// Best log score and chosen body for every goal.
struct ViterbiTable {
  std::vector<double> best;
  std::vector<std::uint32_t> choice;
};

inline ViterbiTable viterbi_table(const ExplanationGraph& graph, const DenseTable& log_theta,
                                  TieBreak tie = TieBreak::kFirst) {
  graph.require_validated();
  ViterbiTable t;
  t.best.assign(graph.num_goals(), kNegInf);
  t.choice.assign(graph.num_goals(), 0);
  for (const GoalId g : graph.topo_order()) {
    const auto& bodies = graph.formula(g).bodies;
    double best = kNegInf;
    std::uint32_t arg = 0;
    bool have = false;
    for (std::uint32_t k = 0; k < bodies.size(); ++k) {
      const auto& b = bodies[k];
      double lp = detail::body_log_factor(b, log_theta);
      for (const auto& s : b.subgoals) {
        if (lp == kNegInf) break;
        lp += t.best[s.index];
      }
      if (lp == kNegInf) continue;
      if (!have || lp > best || (tie == TieBreak::kLast && lp == best)) {
        best = lp;
        arg = k;
        have = true;
      }
    }
    t.best[g.index] = best;
    t.choice[g.index] = arg;
  }
  return t;
}

struct ViterbiResult {
  Explanation explanation;
  double log_prob = kNegInf;
  GoalId goal;
  /// Goals used by the explanation with their selected body index, in
  /// topological order (callees first).
  std::vector<std::pair<GoalId, std::uint32_t>> choice_trace;

  double prob() const { return std::exp(log_prob); }
};

/// Reads the Viterbi explanation of `goal` out of a filled table.
inline ViterbiResult extract_viterbi(const ExplanationGraph& graph, const ViterbiTable& table,
                                     GoalId goal) {
  if (table.best.at(goal.index) == kNegInf) {
    throw Error(ErrorCode::kAllZero,
                "every explanation of " + graph.label(goal) + " has probability 0");
  }
  // Goals reachable through chosen bodies, ordered callers-first by a
  // reverse post-order DFS, then multiplicities pushed down.
  std::vector<std::uint32_t> post;
  std::unordered_map<std::uint32_t, std::uint64_t> uses{{goal.index, 1}};
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{goal.index, 0}};
  while (!stack.empty()) {
    auto& [g, i] = stack.back();
    const auto& subs = graph.formulas()[g].bodies[table.choice[g]].subgoals;
    if (i < subs.size()) {
      const auto s = subs[i++].index;
      if (uses.emplace(s, 0).second) stack.emplace_back(s, 0);
    } else {
      post.push_back(g);
      stack.pop_back();
    }
  }
  ViterbiResult r;
  r.goal = goal;
  r.log_prob = table.best[goal.index];
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    const auto g = *it;
    const auto& body = graph.formulas()[g].bodies[table.choice[g]];
    const std::uint64_t n = uses[g];
    for (const auto& inst : body.instances) r.explanation.add(inst, n);
    for (const auto& s : body.subgoals) uses[s.index] += n;
  }
  r.choice_trace.reserve(post.size());
  for (const auto g : post) r.choice_trace.emplace_back(GoalId{g}, table.choice[g]);
  return r;
}

/// Most probable explanation of `goal` (argmax instead of sum), with the
/// tie-break rule applied at every goal.
inline ViterbiResult viterbi(const ExplanationGraph& graph, GoalId goal,
                             const ParameterTable& theta, TieBreak tie = TieBreak::kFirst) {
  const auto table = viterbi_table(graph, log_table(resolve(graph, theta)), tie);
  return extract_viterbi(graph, table, goal);
}

}  // namespace explgraph
