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
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/params.hpp"

namespace explgraph {

inline constexpr std::size_t kDefaultExplanationLimit = 100000;

/// Result of brute-force enumeration. `explanations` is the set of distinct
/// explanations in canonical order; `multiplicity[k]` counts how many
/// derivations produced `explanations[k]`, so the bag view is preserved.
struct Enumeration {
  std::vector<Explanation> explanations;
  std::vector<std::uint64_t> multiplicity;
  bool duplicates_merged = false;
};

/// Expands `goal` into its propositional DNF by distributing disjunctions
/// over conjunctions bottom-up. Desk-scale only: any goal whose distinct
/// explanation count exceeds `limit` raises ExplosionLimit.
inline Enumeration enumerate_explanations(const ExplanationGraph& graph, GoalId goal,
                                          std::size_t limit = kDefaultExplanationLimit) {
  graph.require_validated();
  if (limit == 0) throw Error(ErrorCode::kInvalidArgument, "limit must be positive");
  using Bag = std::map<Explanation, std::uint64_t>;

  // Only goals reachable from `goal` matter.
  std::vector<char> reachable(graph.num_goals(), 0);
  std::vector<std::uint32_t> stack{goal.index};
  reachable[goal.index] = 1;
  while (!stack.empty()) {
    const auto g = stack.back();
    stack.pop_back();
    for (const auto& b : graph.formulas()[g].bodies) {
      for (const auto& s : b.subgoals) {
        if (!reachable[s.index]) {
          reachable[s.index] = 1;
          stack.push_back(s.index);
        }
      }
    }
  }

  std::vector<Bag> bags(graph.num_goals());
  for (const GoalId g : graph.topo_order()) {
    if (!reachable[g.index]) continue;
    Bag& out = bags[g.index];
    for (const auto& body : graph.formula(g).bodies) {
      Explanation base;
      for (const auto& inst : body.instances) base.add(inst);
      Bag partial{{base, 1}};
      for (const auto& sub : body.subgoals) {
        Bag next;
        for (const auto& [left, lm] : partial) {
          for (const auto& [right, rm] : bags[sub.index]) {
            Explanation e = left;
            e.merge(right);
            next[std::move(e)] += lm * rm;
            if (next.size() > limit) {
              throw Error(ErrorCode::kExplosionLimit,
                          "more than " + std::to_string(limit) + " explanations below " +
                              graph.label(g));
            }
          }
        }
        partial = std::move(next);
      }
      for (auto& [e, m] : partial) out[e] += m;
      if (out.size() > limit) {
        throw Error(ErrorCode::kExplosionLimit,
                    "more than " + std::to_string(limit) + " explanations for " +
                        graph.label(g));
      }
    }
  }

  Enumeration result;
  std::vector<std::pair<std::string, std::size_t>> keyed;
  const Bag& root = bags[goal.index];
  result.explanations.reserve(root.size());
  for (const auto& [e, m] : root) {
    keyed.emplace_back(graph.explanation_str(e), result.explanations.size());
    result.explanations.push_back(e);
    result.multiplicity.push_back(m);
    if (m > 1) result.duplicates_merged = true;
  }
  std::sort(keyed.begin(), keyed.end());
  Enumeration sorted;
  sorted.duplicates_merged = result.duplicates_merged;
  for (const auto& [key, idx] : keyed) {
    sorted.explanations.push_back(std::move(result.explanations[idx]));
    sorted.multiplicity.push_back(result.multiplicity[idx]);
  }
  return sorted;
}

/// Sound but incomplete exclusiveness diagnostic over one set of
/// explanations. A switch used more than once inside one explanation makes
/// the trial structure unrecoverable, hence `kUnknown`.
inline Exclusiveness check_exclusiveness(std::span<const Explanation> explanations) {
  for (const auto& e : explanations) {
    SwitchIndex prev = 0;
    bool first = true;
    for (const auto& inst : e.instances()) {
      if (inst.count > 1 || (!first && inst.sw == prev)) return Exclusiveness::kUnknown;
      prev = inst.sw;
      first = false;
    }
  }
  for (std::size_t a = 0; a < explanations.size(); ++a) {
    for (std::size_t b = a + 1; b < explanations.size(); ++b) {
      const auto& x = explanations[a].instances();
      const auto& y = explanations[b].instances();
      bool conflict = false;
      std::size_t i = 0, j = 0;
      while (i < x.size() && j < y.size() && !conflict) {
        if (x[i].sw < y[j].sw) {
          ++i;
        } else if (y[j].sw < x[i].sw) {
          ++j;
        } else {
          conflict = x[i].value != y[j].value;
          ++i;
          ++j;
        }
      }
      if (!conflict) return Exclusiveness::kOverlapping;
    }
  }
  return Exclusiveness::kExclusive;
}

inline const char* exclusiveness_name(Exclusiveness e) {
  switch (e) {
    case Exclusiveness::kExclusive: return "exclusive";
    case Exclusiveness::kOverlapping: return "overlapping";
    case Exclusiveness::kUnknown: return "unknown";
  }
  return "unknown";
}

/// Product of theta^count over the explanation's instances.
inline double explanation_prob(const Explanation& e, const DenseTable& theta) {
  double p = 1.0;
  for (const auto& inst : e.instances()) {
    p *= std::pow(theta(inst.sw, inst.value), static_cast<double>(inst.count));
  }
  return p;
}

inline double explanation_log_prob(const Explanation& e, const DenseTable& theta) {
  double lp = 0.0;
  for (const auto& inst : e.instances()) {
    lp += static_cast<double>(inst.count) * std::log(theta(inst.sw, inst.value));
  }
  return lp;
}

inline double explanation_prob(const ExplanationGraph& graph, const Explanation& e,
                               const ParameterTable& theta) {
  double p = 1.0;
  for (const auto& inst : e.instances()) {
    const auto& d = graph.switch_decl(inst.sw);
    p *= std::pow(theta.at(d.id.str(), d.values.at(inst.value).str()),
                  static_cast<double>(inst.count));
  }
  return p;
}

}  // namespace explgraph
