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

// Derivations: one chosen body per goal occurrence, as a tree.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/inference.hpp"

namespace explgraph {

struct Derivation {
  GoalId goal;
  std::uint32_t body = 0;
  /// One child per subgoal of the chosen body, in body order.
  std::vector<Derivation> children;
};

inline void add_derivation_instances(const ExplanationGraph& graph, const Derivation& d,
                                     Explanation& out) {
  for (const auto& inst : graph.formula(d.goal).bodies.at(d.body).instances) out.add(inst);
  for (const auto& c : d.children) add_derivation_instances(graph, c, out);
}

inline Explanation derivation_explanation(const ExplanationGraph& graph, const Derivation& d) {
  Explanation e;
  add_derivation_instances(graph, d, e);
  return e;
}

/// The derivation selected by a filled Viterbi table.
inline Derivation viterbi_derivation(const ExplanationGraph& graph, const ViterbiTable& table,
                                     GoalId goal) {
  if (table.best.at(goal.index) == kNegInf) {
    throw Error(ErrorCode::kAllZero,
                "every explanation of " + graph.label(goal) + " has probability 0");
  }
  Derivation d{goal, table.choice[goal.index], {}};
  for (const auto& s : graph.formula(goal).bodies[d.body].subgoals) {
    d.children.push_back(viterbi_derivation(graph, table, s));
  }
  return d;
}

namespace detail {

class DerivationSearch {
 public:
  DerivationSearch(const ExplanationGraph& g, const Explanation& target, std::size_t step_limit)
      : g_(g), limit_(step_limit) {
    for (const auto& inst : target.instances()) budget_[{inst.sw, inst.value}] = inst.count;
    remaining_ = 0;
    for (const auto& inst : target.instances()) remaining_ += inst.count;
  }

  std::optional<Derivation> run(GoalId root) {
    Derivation d{root, 0, {}};
    std::vector<Derivation*> pending{&d};
    if (solve(pending)) return d;
    return std::nullopt;
  }

 private:
  bool take(const Body& b) {
    std::size_t k = 0;
    for (; k < b.instances.size(); ++k) {
      auto it = budget_.find({b.instances[k].sw, b.instances[k].value});
      if (it == budget_.end() || it->second < b.instances[k].count) break;
      it->second -= b.instances[k].count;
      remaining_ -= b.instances[k].count;
    }
    if (k == b.instances.size()) return true;
    for (std::size_t u = 0; u < k; ++u) give(b.instances[u]);
    return false;
  }

  void give(const SwitchInstance& inst) {
    budget_[{inst.sw, inst.value}] += inst.count;
    remaining_ += inst.count;
  }

  bool solve(std::vector<Derivation*>& pending) {
    if (++steps_ > limit_) {
      throw Error(ErrorCode::kExplosionLimit, "derivation search exceeded its step limit");
    }
    if (pending.empty()) return remaining_ == 0;
    Derivation* d = pending.back();
    pending.pop_back();
    const auto& bodies = g_.formula(d->goal).bodies;
    for (std::uint32_t b = 0; b < bodies.size(); ++b) {
      const Body& body = bodies[b];
      if (!take(body)) continue;
      d->body = b;
      d->children.assign(body.subgoals.size(), Derivation{});
      for (std::size_t c = 0; c < body.subgoals.size(); ++c) d->children[c].goal = body.subgoals[c];
      const std::size_t mark = pending.size();
      for (std::size_t c = body.subgoals.size(); c-- > 0;) pending.push_back(&d->children[c]);
      if (solve(pending)) return true;
      pending.resize(mark);
      d->children.clear();
      for (const auto& inst : body.instances) give(inst);
    }
    pending.push_back(d);
    return false;
  }

  const ExplanationGraph& g_;
  std::map<std::pair<SwitchIndex, ValueIndex>, std::uint64_t> budget_;
  std::uint64_t remaining_ = 0;
  std::size_t steps_ = 0;
  std::size_t limit_;
};

}  // namespace detail

inline constexpr std::size_t kDefaultDerivationSteps = 10'000'000;

/// Some derivation of `goal` whose switch multiset equals `target`, found
/// by budgeted backtracking; nullopt when none exists.
inline std::optional<Derivation> find_derivation(const ExplanationGraph& graph, GoalId goal,
                                                 const Explanation& target,
                                                 std::size_t step_limit = kDefaultDerivationSteps) {
  graph.require_validated();
  return detail::DerivationSearch(graph, target, step_limit).run(goal);
}

}  // namespace explgraph
