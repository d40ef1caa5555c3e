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

// PCFG sentence compiler. Goals are spans span(A,i,j); rules with more
// than two symbols are binarized through prefix goals dot(A,r,t,i,k).

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "explgraph/chart.hpp"
#include "explgraph/derivation.hpp"
#include "explgraph/error.hpp"
#include "explgraph/grammar.hpp"
#include "explgraph/graph.hpp"

namespace explgraph {

/// Declares one switch per nonterminal, in grammar order.
inline void declare_pcfg_switches(const Grammar& g, ExplanationGraph& graph) {
  for (std::size_t a = 0; a < g.nonterminals().size(); ++a) {
    graph.declare_switch(pcfg_switch(g.nonterminals()[a]), pcfg_values(g, a));
  }
}

namespace detail {

class PcfgBuilder {
 public:
  PcfgBuilder(const Grammar& g, const Sentence& s) : g_(g), s_(s) {
    chart_.mode = ParseMode::kPcfg;
    chart_.sentence = s;
    declare_pcfg_switches(g, chart_.graph);
  }

  SentenceChart run() {
    const auto root = span(static_cast<std::uint32_t>(g_.nonterminal_index(g_.start())), 0,
                           static_cast<std::uint32_t>(s_.size()));
    if (!root) {
      throw Error(ErrorCode::kUnparseable, "no parse for '" + sentence_str(s_) + "'");
    }
    chart_.root = *root;
    chart_.graph.add_root(*root);
    chart_.graph.set_exclusiveness_hint(Exclusiveness::kExclusive);
    chart_.graph.validate();
    return std::move(chart_);
  }

 private:
  Slot slot(const std::string& x, std::uint32_t i, std::uint32_t j) {
    if (!g_.is_nonterminal(x)) return Slot{j == i + 1 && s_[i] == x, false, {}};
    auto goal = span(static_cast<std::uint32_t>(g_.nonterminal_index(x)), i, j);
    if (!goal) return Slot{};
    return Slot{true, true, *goal};
  }

  // First `t` symbols of rule r over [i,k).
  Slot prefix(std::uint32_t r, std::uint32_t t, std::uint32_t i, std::uint32_t k) {
    if (t == 1) return slot(g_.rules()[r].rhs[0], i, k);
    auto goal = dot(r, t, i, k);
    if (!goal) return Slot{};
    return Slot{true, true, *goal};
  }

  std::optional<GoalId> span(std::uint32_t a, std::uint32_t i, std::uint32_t j) {
    const auto key = std::tuple{a, i, j};
    if (auto it = span_memo_.find(key); it != span_memo_.end()) return it->second;
    span_memo_[key] = std::nullopt;  // no epsilon rules, so no re-entry on the same span

    std::vector<Body> bodies;
    std::vector<ChartBody> meta;
    for (std::size_t r : g_.rules_for(a)) {
      const auto& rhs = g_.rules()[r].rhs;
      const auto m = static_cast<std::uint32_t>(rhs.size());
      if (j - i < m) continue;
      const SwitchInstance inst{static_cast<SwitchIndex>(a),
                                static_cast<ValueIndex>(g_.local_index(r)), 1};
      if (m == 1) {
        const Slot x = slot(rhs[0], i, j);
        if (!x.ok) continue;
        Body b{{}, {inst}};
        if (x.has_goal) b.subgoals.push_back(x.goal);
        bodies.push_back(std::move(b));
        meta.push_back(ChartBody{static_cast<std::uint32_t>(r), false, false});
        continue;
      }
      for (std::uint32_t k = i + m - 1; k < j; ++k) {
        const Slot last = slot(rhs[m - 1], k, j);
        if (!last.ok) continue;
        const Slot pre = prefix(static_cast<std::uint32_t>(r), m - 1, i, k);
        if (!pre.ok) continue;
        Body b{{}, {inst}};
        if (pre.has_goal) b.subgoals.push_back(pre.goal);
        if (last.has_goal) b.subgoals.push_back(last.goal);
        bodies.push_back(std::move(b));
        meta.push_back(ChartBody{static_cast<std::uint32_t>(r), pre.has_goal, false});
      }
    }
    if (bodies.empty()) return std::nullopt;
    const auto label = Term::compound("span", {Term::symbol(g_.nonterminals()[a]),
                                               Term::integer(i), Term::integer(j)});
    const GoalId id = emit(label.str(), std::move(bodies),
                           ChartGoal{ChartGoal::Kind::kSpan, a, 0, 0, i, j, std::move(meta)});
    span_memo_[key] = id;
    return id;
  }

  std::optional<GoalId> dot(std::uint32_t r, std::uint32_t t, std::uint32_t i, std::uint32_t k) {
    const auto key = std::tuple{r, t, i, k};
    if (auto it = dot_memo_.find(key); it != dot_memo_.end()) return it->second;
    const auto& rhs = g_.rules()[r].rhs;
    std::vector<Body> bodies;
    std::vector<ChartBody> meta;
    for (std::uint32_t p = i + t - 1; p < k; ++p) {
      const Slot last = slot(rhs[t - 1], p, k);
      if (!last.ok) continue;
      const Slot pre = prefix(r, t - 1, i, p);
      if (!pre.ok) continue;
      Body b;
      if (pre.has_goal) b.subgoals.push_back(pre.goal);
      if (last.has_goal) b.subgoals.push_back(last.goal);
      bodies.push_back(std::move(b));
      meta.push_back(ChartBody{r, pre.has_goal, false});
    }
    std::optional<GoalId> out;
    if (!bodies.empty()) {
      const auto& rule = g_.rules()[r];
      const auto label = Term::compound(
          "dot", {Term::symbol(rule.lhs), Term::integer(static_cast<std::int64_t>(g_.local_index(r))),
                  Term::integer(t), Term::integer(i), Term::integer(k)});
      out = emit(label.str(), std::move(bodies),
                 ChartGoal{ChartGoal::Kind::kDot,
                           static_cast<std::uint32_t>(g_.nonterminal_index(rule.lhs)), r, t, i, k,
                           std::move(meta)});
    }
    dot_memo_[key] = out;
    return out;
  }

  GoalId emit(std::string label, std::vector<Body> bodies, ChartGoal meta) {
    const GoalId id = chart_.graph.add_goal(std::move(label));
    for (auto& b : bodies) chart_.graph.add_body(id, std::move(b));
    chart_.goals.push_back(std::move(meta));
    return id;
  }

  const Grammar& g_;
  const Sentence& s_;
  SentenceChart chart_;
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, std::optional<GoalId>> span_memo_;
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>,
           std::optional<GoalId>>
      dot_memo_;
};

}  // namespace detail

/// Explanation graph of all PCFG parses of `sentence`. Switch indices equal
/// nonterminal indices and value indices equal rule positions within their
/// lhs group. Throws kUnparseable when the sentence has no parse.
inline SentenceChart compile_pcfg(const Grammar& g, const Sentence& sentence) {
  if (sentence.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sentence");
  return detail::PcfgBuilder(g, sentence).run();
}

namespace detail {

inline ParseTree pcfg_span_tree(const Grammar& g, const SentenceChart& c, const Derivation& d);

inline ParseTree pcfg_symbol_tree(const Grammar& g, const SentenceChart& c, const std::string& x,
                                  const Derivation* d) {
  if (!g.is_nonterminal(x)) return leaf(x);
  return pcfg_span_tree(g, c, *d);
}

// Appends the trees of the first `t` symbols of rule r. `d` is the prefix
// subgoal derivation, null for a single terminal.
inline void pcfg_prefix_trees(const Grammar& g, const SentenceChart& c, std::uint32_t r,
                              std::uint32_t t, const Derivation* d, std::vector<ParseTree>& out) {
  const auto& rhs = g.rules()[r].rhs;
  if (t == 1) {
    out.push_back(pcfg_symbol_tree(g, c, rhs[0], d));
    return;
  }
  const auto& meta = c.goals.at(d->goal.index).bodies.at(d->body);
  std::size_t k = 0;
  const Derivation* pre = meta.has_part ? &d->children.at(k++) : nullptr;
  const Derivation* last = g.is_nonterminal(rhs[t - 1]) ? &d->children.at(k++) : nullptr;
  pcfg_prefix_trees(g, c, r, t - 1, pre, out);
  out.push_back(pcfg_symbol_tree(g, c, rhs[t - 1], last));
}

inline ParseTree pcfg_span_tree(const Grammar& g, const SentenceChart& c, const Derivation& d) {
  const auto& meta = c.goals.at(d.goal.index).bodies.at(d.body);
  const auto& rule = g.rules()[meta.rule];
  const auto m = static_cast<std::uint32_t>(rule.rhs.size());
  std::vector<ParseTree> kids;
  if (m == 1) {
    kids.push_back(pcfg_symbol_tree(g, c, rule.rhs[0], d.children.empty() ? nullptr : &d.children[0]));
  } else {
    std::size_t k = 0;
    const Derivation* pre = meta.has_part ? &d.children.at(k++) : nullptr;
    const Derivation* last = g.is_nonterminal(rule.rhs[m - 1]) ? &d.children.at(k++) : nullptr;
    pcfg_prefix_trees(g, c, meta.rule, m - 1, pre, kids);
    kids.push_back(pcfg_symbol_tree(g, c, rule.rhs[m - 1], last));
  }
  return node(rule.lhs, std::move(kids));
}

}  // namespace detail

}  // namespace explgraph
