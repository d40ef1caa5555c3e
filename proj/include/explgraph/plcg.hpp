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

// Probabilistic left-corner grammar compiler.
//
// A goal g(G,i,j) recognizes nonterminal G over [i,j): it shifts the first
// word (switch first(G)), then climbs the left spine with lc(G,B,k,j)
// goals. Each step picks a rule A -> B beta (switch lc(G,B)), recognizes
// beta, and when A = G chooses between attaching (done) and projecting
// further (switch att(G)). att(G) exists only when G can be its own left
// corner; otherwise attachment is forced.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "explgraph/chart.hpp"
#include "explgraph/derivation.hpp"
#include "explgraph/error.hpp"
#include "explgraph/grammar.hpp"
#include "explgraph/graph.hpp"

namespace explgraph {

inline Term plcg_first_switch(std::string_view g) {
  return Term::compound("first", {Term::symbol(std::string(g))});
}

inline Term plcg_lc_switch(std::string_view g, std::string_view b) {
  return Term::compound("lc", {Term::symbol(std::string(g)), Term::symbol(std::string(b))});
}

inline Term plcg_att_switch(std::string_view g) {
  return Term::compound("att", {Term::symbol(std::string(g))});
}

inline Term plcg_rule_value(const CfgRule& r) {
  return Term::compound("rule", {Term::symbol(r.lhs), pcfg_value(r)});
}

inline const Term& plcg_attach() {
  static const Term t = Term::symbol("att");
  return t;
}

inline const Term& plcg_project() {
  static const Term t = Term::symbol("pro");
  return t;
}

/// Switch and value indices of the PLCG switches in a graph.
struct PlcgSwitches {
  /// lc[G] maps a corner symbol B to the index of lc(G,B).
  std::vector<std::map<std::string, SwitchIndex>> lc;
  /// lc_value[G][r]: value index of rule r in lc(G, rhs0(r)), when lhs(r) is
  /// a left corner of G.
  std::vector<std::map<std::size_t, ValueIndex>> lc_value;
  std::vector<std::optional<SwitchIndex>> first;
  std::vector<std::map<std::string, ValueIndex>> first_value;
  std::vector<std::optional<SwitchIndex>> att;
};

/// Declares every PLCG switch of the grammar. For each nonterminal G in
/// grammar order: lc(G,B) switches in order of first use, then first(G),
/// then att(G) when G is left-recursive.
inline PlcgSwitches declare_plcg_switches(const Grammar& g, ExplanationGraph& graph) {
  const std::size_t n = g.nonterminals().size();
  PlcgSwitches out;
  out.lc.resize(n);
  out.lc_value.resize(n);
  out.first.resize(n);
  out.first_value.resize(n);
  out.att.resize(n);
  for (std::size_t G = 0; G < n; ++G) {
    const auto& gname = g.nonterminals()[G];
    std::vector<std::string> corners;
    std::map<std::string, std::vector<std::size_t>> by_corner;
    for (std::size_t r = 0; r < g.rules().size(); ++r) {
      const auto& rule = g.rules()[r];
      if (!g.is_left_corner(G, g.nonterminal_index(rule.lhs))) continue;
      auto [it, fresh] = by_corner.try_emplace(rule.rhs[0]);
      if (fresh) corners.push_back(rule.rhs[0]);
      it->second.push_back(r);
    }
    for (const auto& b : corners) {
      std::vector<Term> values;
      for (std::size_t r : by_corner[b]) {
        out.lc_value[G][r] = static_cast<ValueIndex>(values.size());
        values.push_back(plcg_rule_value(g.rules()[r]));
      }
      out.lc[G][b] = graph.declare_switch(plcg_lc_switch(gname, b), std::move(values));
    }
    const auto& firsts = g.first_set(G);
    if (!firsts.empty()) {
      std::vector<Term> values;
      for (const auto& w : firsts) {
        out.first_value[G][w] = static_cast<ValueIndex>(values.size());
        values.push_back(Term::symbol(w));
      }
      out.first[G] = graph.declare_switch(plcg_first_switch(gname), std::move(values));
    }
    if (out.lc[G].count(gname)) {
      out.att[G] = graph.declare_switch(plcg_att_switch(gname), {plcg_attach(), plcg_project()});
    }
  }
  return out;
}

namespace detail {

inline void plcg_tree_terms(const Grammar& g, const ParseTree& t,
                            std::vector<std::pair<Term, Term>>& out,
                            const std::vector<char>& has_att) {
  const auto& G = t.label;
  const std::size_t gi = g.nonterminal_index(G);
  std::vector<const ParseTree*> spine{&t};
  while (!spine.back()->leaf()) spine.push_back(&spine.back()->children.front());
  out.emplace_back(plcg_first_switch(G), Term::symbol(spine.back()->label));
  for (std::size_t l = spine.size() - 1; l-- > 0;) {
    const ParseTree& n = *spine[l];
    CfgRule rule{n.label, {}, std::nullopt};
    for (const auto& c : n.children) rule.rhs.push_back(c.label);
    out.emplace_back(plcg_lc_switch(G, rule.rhs[0]), plcg_rule_value(rule));
    for (std::size_t c = 1; c < n.children.size(); ++c) {
      if (!n.children[c].leaf()) plcg_tree_terms(g, n.children[c], out, has_att);
    }
    if (n.label == G && has_att[gi]) {
      out.emplace_back(plcg_att_switch(G), l == 0 ? plcg_attach() : plcg_project());
    }
  }
}

}  // namespace detail

/// (switch, value) terms used by the left-corner derivation of `tree`.
inline std::vector<std::pair<Term, Term>> plcg_tree_terms(const Grammar& g, const ParseTree& tree) {
  tree_rules(g, tree);  // validates the tree against the grammar
  if (tree.leaf()) throw Error(ErrorCode::kInvalidArgument, "tree is a single leaf");
  std::vector<char> has_att(g.nonterminals().size(), 0);
  for (const auto& r : g.rules()) {
    const auto a = g.nonterminal_index(r.lhs);
    if (g.is_nonterminal(r.rhs[0])) {
      const auto b = g.nonterminal_index(r.rhs[0]);
      if (g.is_left_corner(b, a)) has_att[b] = 1;
    }
  }
  std::vector<std::pair<Term, Term>> out;
  detail::plcg_tree_terms(g, tree, out, has_att);
  return out;
}

namespace detail {

class PlcgBuilder {
 public:
  PlcgBuilder(const Grammar& g, const Sentence& s) : g_(g), s_(s) {
    chart_.mode = ParseMode::kPlcg;
    chart_.sentence = s;
    sw_ = declare_plcg_switches(g, chart_.graph);
  }

  SentenceChart run() {
    const auto root = goal(static_cast<std::uint32_t>(g_.nonterminal_index(g_.start())), 0,
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
  std::uint32_t symbol_id(const std::string& x) {
    auto [it, fresh] = sym_ids_.try_emplace(x, static_cast<std::uint32_t>(sym_names_.size()));
    if (fresh) sym_names_.push_back(x);
    return it->second;
  }

  Slot slot(const std::string& x, std::uint32_t i, std::uint32_t j) {
    if (!g_.is_nonterminal(x)) return Slot{j == i + 1 && s_[i] == x, false, {}};
    auto id = goal(static_cast<std::uint32_t>(g_.nonterminal_index(x)), i, j);
    if (!id) return Slot{};
    return Slot{true, true, *id};
  }

  // g(G,i,j)
  std::optional<GoalId> goal(std::uint32_t G, std::uint32_t i, std::uint32_t j) {
    const auto key = std::tuple{G, i, j};
    if (auto it = goal_memo_.find(key); it != goal_memo_.end()) return it->second;
    goal_memo_[key] = std::nullopt;
    std::optional<GoalId> out;
    const auto& w = s_[i];
    auto fv = sw_.first_value[G].find(w);
    if (fv != sw_.first_value[G].end()) {
      if (auto next = lc(G, w, i + 1, j)) {
        Body b{{*next}, {SwitchInstance{*sw_.first[G], fv->second, 1}}};
        const auto label = Term::compound("g", {Term::symbol(g_.nonterminals()[G]),
                                                Term::integer(i), Term::integer(j)});
        out = emit(label.str(), {std::move(b)},
                   ChartGoal{ChartGoal::Kind::kGoal, G, 0, 0, i, j, {ChartBody{0, false, true}}});
      }
    }
    goal_memo_[key] = out;
    return out;
  }

  // lc(G,B,k,j): B is complete over [..,k) and G must end at j.
  std::optional<GoalId> lc(std::uint32_t G, const std::string& B, std::uint32_t k,
                           std::uint32_t j) {
    const std::uint32_t bid = symbol_id(B);
    const auto key = std::tuple{G, bid, k, j};
    if (auto it = lc_memo_.find(key); it != lc_memo_.end()) return it->second;
    lc_memo_[key] = std::nullopt;
    std::vector<Body> bodies;
    std::vector<ChartBody> meta;
    auto sw_it = sw_.lc[G].find(B);
    if (sw_it != sw_.lc[G].end()) {
      const auto& gname = g_.nonterminals()[G];
      const auto att = sw_.att[G];
      for (const auto& [r, v] : sw_.lc_value[G]) {
        const auto& rule = g_.rules()[r];
        if (rule.rhs[0] != B) continue;
        const SwitchInstance inst{sw_it->second, v, 1};
        const auto rest_len = static_cast<std::uint32_t>(rule.rhs.size() - 1);
        for (std::uint32_t m = k + rest_len; m <= j; ++m) {
          Slot part{true, false, {}};
          if (rest_len > 0) {
            auto id = rest(static_cast<std::uint32_t>(r), 1, k, m);
            if (!id) continue;
            part = Slot{true, true, *id};
          } else if (m != k) {
            break;
          }
          const auto add = [&](std::vector<SwitchInstance> insts, std::optional<GoalId> next) {
            Body b{{}, std::move(insts)};
            if (part.has_goal) b.subgoals.push_back(part.goal);
            if (next) b.subgoals.push_back(*next);
            bodies.push_back(std::move(b));
            meta.push_back(ChartBody{static_cast<std::uint32_t>(r), part.has_goal, next.has_value()});
          };
          if (rule.lhs == gname) {
            if (m == j) {
              if (att) add({inst, SwitchInstance{*att, 0, 1}}, std::nullopt);
              else add({inst}, std::nullopt);
            }
            if (att && m < j) {
              if (auto next = lc(G, gname, m, j)) add({inst, SwitchInstance{*att, 1, 1}}, next);
            }
          } else if (auto next = lc(G, rule.lhs, m, j)) {
            add({inst}, next);
          }
        }
      }
    }
    std::optional<GoalId> out;
    if (!bodies.empty()) {
      const auto label =
          Term::compound("lc", {Term::symbol(g_.nonterminals()[G]), Term::symbol(B),
                                Term::integer(k), Term::integer(j)});
      out = emit(label.str(), std::move(bodies),
                 ChartGoal{ChartGoal::Kind::kLc, G, bid, 0, k, j, std::move(meta)});
    }
    lc_memo_[key] = out;
    return out;
  }

  // rest(r,t,k,m): rhs symbols t.. of rule r over [k,m).
  std::optional<GoalId> rest(std::uint32_t r, std::uint32_t t, std::uint32_t k, std::uint32_t m) {
    const auto key = std::tuple{r, t, k, m};
    if (auto it = rest_memo_.find(key); it != rest_memo_.end()) return it->second;
    rest_memo_[key] = std::nullopt;
    const auto& rule = g_.rules()[r];
    const auto size = static_cast<std::uint32_t>(rule.rhs.size());
    const bool last = t + 1 == size;
    std::vector<Body> bodies;
    std::vector<ChartBody> meta;
    if (last) {
      const Slot x = slot(rule.rhs[t], k, m);
      if (x.ok) {
        Body b;
        if (x.has_goal) b.subgoals.push_back(x.goal);
        bodies.push_back(std::move(b));
        meta.push_back(ChartBody{r, false, false});
      }
    } else {
      const std::uint32_t after = size - t - 1;
      for (std::uint32_t p = k + 1; p + after <= m; ++p) {
        const Slot x = slot(rule.rhs[t], k, p);
        if (!x.ok) continue;
        auto tail = rest(r, t + 1, p, m);
        if (!tail) continue;
        Body b;
        if (x.has_goal) b.subgoals.push_back(x.goal);
        b.subgoals.push_back(*tail);
        bodies.push_back(std::move(b));
        meta.push_back(ChartBody{r, false, true});
      }
    }
    std::optional<GoalId> out;
    if (!bodies.empty()) {
      const auto label = Term::compound(
          "rest", {Term::symbol(rule.lhs), Term::integer(static_cast<std::int64_t>(g_.local_index(r))),
                   Term::integer(t), Term::integer(k), Term::integer(m)});
      out = emit(label.str(), std::move(bodies),
                 ChartGoal{ChartGoal::Kind::kRest, 0, r, t, k, m, std::move(meta)});
    }
    rest_memo_[key] = out;
    return out;
  }

  GoalId emit(std::string label, std::vector<Body> bodies, ChartGoal meta) {
    const GoalId id = chart_.graph.add_goal(std::move(label));
    for (auto& b : bodies) chart_.graph.add_body(id, std::move(b));
    chart_.goals.push_back(std::move(meta));
    return id;
  }

  using Key3 = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;
  using Key4 = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>;

  const Grammar& g_;
  const Sentence& s_;
  SentenceChart chart_;
  PlcgSwitches sw_;
  std::map<std::string, std::uint32_t> sym_ids_;
  std::vector<std::string> sym_names_;
  std::map<Key3, std::optional<GoalId>> goal_memo_;
  std::map<Key4, std::optional<GoalId>> lc_memo_;
  std::map<Key4, std::optional<GoalId>> rest_memo_;
};

}  // namespace detail

/// Explanation graph of all left-corner derivations of `sentence`. Throws
/// kUnparseable when there is none.
inline SentenceChart compile_plcg(const Grammar& g, const Sentence& sentence) {
  if (sentence.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sentence");
  return detail::PlcgBuilder(g, sentence).run();
}

namespace detail {

inline ParseTree plcg_goal_tree(const Grammar& g, const SentenceChart& c, const Derivation& d);

inline void plcg_rest_trees(const Grammar& g, const SentenceChart& c, const Derivation& d,
                            std::vector<ParseTree>& out) {
  const auto& info = c.goals.at(d.goal.index);
  const auto& x = g.rules()[info.rule].rhs[info.t];
  std::size_t k = 0;
  if (g.is_nonterminal(x)) {
    out.push_back(plcg_goal_tree(g, c, d.children.at(k++)));
  } else {
    out.push_back(leaf(x));
  }
  if (c.goals[d.goal.index].bodies.at(d.body).has_next) plcg_rest_trees(g, c, d.children.at(k), out);
}

inline ParseTree plcg_lc_tree(const Grammar& g, const SentenceChart& c, ParseTree corner,
                              const Derivation& d) {
  const auto& meta = c.goals.at(d.goal.index).bodies.at(d.body);
  std::vector<ParseTree> kids{std::move(corner)};
  std::size_t k = 0;
  if (meta.has_part) plcg_rest_trees(g, c, d.children.at(k++), kids);
  ParseTree n = node(g.rules()[meta.rule].lhs, std::move(kids));
  if (meta.has_next) return plcg_lc_tree(g, c, std::move(n), d.children.at(k));
  return n;
}

inline ParseTree plcg_goal_tree(const Grammar& g, const SentenceChart& c, const Derivation& d) {
  const auto& info = c.goals.at(d.goal.index);
  return plcg_lc_tree(g, c, leaf(c.sentence.at(info.i)), d.children.at(0));
}

}  // namespace detail

}  // namespace explgraph
