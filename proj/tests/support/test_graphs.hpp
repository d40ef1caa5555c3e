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

// Graph builders and random instance generators shared by the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "explgraph/graph.hpp"
#include "explgraph/params.hpp"
#include "explgraph/term.hpp"

namespace explgraph::testing {

inline Term sym(const std::string& s) { return Term::symbol(s); }

inline std::vector<Term> syms(std::initializer_list<const char*> names) {
  std::vector<Term> out;
  for (const char* n : names) out.push_back(Term::symbol(n));
  return out;
}

/// G <=> msw(c, heads); switch c in {heads, tails}.
inline ExplanationGraph coin_graph() {
  ExplanationGraph g;
  g.declare_switch(sym("c"), syms({"heads", "tails"}));
  const GoalId root = g.add_goal("G");
  g.add_body(root, Body{{}, {g.instance(sym("c"), sym("heads"))}});
  g.add_root(root);
  g.validate();
  return g;
}

inline ParameterTable coin_theta(double heads) {
  ParameterTable t;
  t.set(sym("c"), syms({"heads", "tails"}), {heads, 1.0 - heads});
  return t;
}

/// G <=> msw(s, a) v msw(s, b).
inline ExplanationGraph two_way_graph() {
  ExplanationGraph g;
  g.declare_switch(sym("s"), syms({"a", "b"}));
  const GoalId root = g.add_goal("G");
  g.add_body(root, Body{{}, {g.instance(sym("s"), sym("a"))}});
  g.add_body(root, Body{{}, {g.instance(sym("s"), sym("b"))}});
  g.add_root(root);
  g.validate();
  return g;
}

/// Random probability simplex rows for every switch of `g`, bounded away
/// from zero.
inline DenseTable random_theta(const ExplanationGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  DenseTable t;
  for (const auto& d : g.switches()) {
    std::vector<double> row(d.values.size());
    for (auto& w : row) w = u(rng);
    normalize_row(row);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ParameterTable random_table(const ExplanationGraph& g, std::mt19937_64& rng) {
  return to_table(g, random_theta(g, rng));
}

/// Tree-shaped AND/OR graph: every goal owns a choice switch whose value
/// names the body taken, and every non-root goal has a single parent goal.
/// Each switch therefore occurs at most once per explanation and any two
/// explanations disagree on the choice switch of the first goal where
/// their derivations split, so the root's explanations are exclusive.
inline ExplanationGraph random_exclusive_graph(std::mt19937_64& rng, int max_goals = 6) {
  std::uniform_int_distribution<int> n_goals_d(1, max_goals);
  const int n = n_goals_d(rng);
  // parent[k] < k; goal 0 is the root.
  std::vector<int> parent(n, -1);
  for (int k = 1; k < n; ++k) parent[k] = std::uniform_int_distribution<int>(0, k - 1)(rng);

  ExplanationGraph g;
  std::vector<GoalId> ids;
  for (int k = 0; k < n; ++k) ids.push_back(g.add_goal("g" + std::to_string(k)));
  for (int k = n - 1; k >= 0; --k) {
    std::vector<int> children;
    for (int c = k + 1; c < n; ++c) {
      if (parent[c] == k) children.push_back(c);
    }
    const int n_bodies = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<Term> values;
    for (int b = 0; b < n_bodies; ++b) values.push_back(Term::integer(b));
    const Term sw = Term::compound("choice", {Term::integer(k)});
    g.declare_switch(sw, values);
    for (int b = 0; b < n_bodies; ++b) {
      Body body;
      body.instances.push_back(g.instance(sw, Term::integer(b)));
      for (int c : children) {
        if (std::bernoulli_distribution(0.5)(rng)) body.subgoals.push_back(ids[c]);
      }
      g.add_body(ids[k], std::move(body));
    }
  }
  g.add_root(ids[0]);
  g.set_exclusiveness_hint(Exclusiveness::kExclusive);
  g.validate();
  return g;
}

/// Arbitrary DAG over a small shared switch pool; goals may reuse switches
/// and subgoals, so exclusiveness generally fails.
inline ExplanationGraph random_dag(std::mt19937_64& rng, int max_goals = 6, int max_switches = 4,
                                   int n_roots = 1) {
  const int n = std::uniform_int_distribution<int>(std::max(1, n_roots), max_goals)(rng);
  const int n_sw = std::uniform_int_distribution<int>(1, max_switches)(rng);
  ExplanationGraph g;
  std::vector<Term> sw_ids;
  for (int s = 0; s < n_sw; ++s) {
    const int k = std::uniform_int_distribution<int>(2, 3)(rng);
    std::vector<Term> values;
    for (int v = 0; v < k; ++v) values.push_back(Term::symbol(std::string(1, char('a' + v))));
    sw_ids.push_back(Term::compound("s", {Term::integer(s)}));
    g.declare_switch(sw_ids.back(), values);
  }
  std::vector<GoalId> ids;
  for (int k = 0; k < n; ++k) ids.push_back(g.add_goal("h" + std::to_string(k)));
  // Goal k may only call goals with larger index.
  for (int k = n - 1; k >= 0; --k) {
    const int n_bodies = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int b = 0; b < n_bodies; ++b) {
      Body body;
      const int n_inst = std::uniform_int_distribution<int>(0, 2)(rng);
      for (int i = 0; i < n_inst; ++i) {
        const auto s = static_cast<SwitchIndex>(std::uniform_int_distribution<int>(0, n_sw - 1)(rng));
        const auto& decl = g.switch_decl(s);
        const auto v = static_cast<ValueIndex>(
            std::uniform_int_distribution<int>(0, static_cast<int>(decl.values.size()) - 1)(rng));
        const auto c = static_cast<std::uint64_t>(std::uniform_int_distribution<int>(1, 2)(rng));
        body.instances.push_back(SwitchInstance{s, v, c});
      }
      if (k + 1 < n) {
        const int n_sub = std::uniform_int_distribution<int>(0, 2)(rng);
        for (int i = 0; i < n_sub; ++i) {
          body.subgoals.push_back(ids[std::uniform_int_distribution<int>(k + 1, n - 1)(rng)]);
        }
      }
      g.add_body(ids[k], std::move(body));
    }
  }
  for (int r = 0; r < n_roots; ++r) g.add_root(ids[r]);
  g.validate();
  return g;
}

inline bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace explgraph::testing
