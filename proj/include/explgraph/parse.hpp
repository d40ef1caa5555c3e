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

// Mode-independent parsing API on top of the PCFG and PLCG compilers.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "explgraph/chart.hpp"
#include "explgraph/derivation.hpp"
#include "explgraph/error.hpp"
#include "explgraph/grammar.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/inference.hpp"
#include "explgraph/params.hpp"
#include "explgraph/pcfg.hpp"
#include "explgraph/plcg.hpp"

namespace explgraph {

inline SentenceChart compile_sentence(const Grammar& g, const Sentence& s, ParseMode mode) {
  return mode == ParseMode::kPcfg ? compile_pcfg(g, s) : compile_plcg(g, s);
}

/// Declares every switch of the grammar under `mode`, in canonical order.
inline void declare_grammar_switches(const Grammar& g, ParseMode mode, ExplanationGraph& graph) {
  if (mode == ParseMode::kPcfg) {
    declare_pcfg_switches(g, graph);
  } else {
    declare_plcg_switches(g, graph);
  }
}

/// An empty graph holding only the grammar's switches.
inline ExplanationGraph grammar_switch_graph(const Grammar& g, ParseMode mode) {
  ExplanationGraph graph;
  declare_grammar_switches(g, mode, graph);
  return graph;
}

/// (switch, value) terms used by the derivation of `tree`, one per use.
inline std::vector<std::pair<Term, Term>> tree_terms(const Grammar& g, const ParseTree& tree,
                                                     ParseMode mode) {
  if (mode == ParseMode::kPlcg) return plcg_tree_terms(g, tree);
  std::vector<std::pair<Term, Term>> out;
  for (std::size_t r : tree_rules(g, tree)) {
    out.emplace_back(pcfg_switch(g.rules()[r].lhs), pcfg_value(g.rules()[r]));
  }
  return out;
}

/// The explanation of `tree`, indexed by the switches of `graph`.
inline Explanation tree_explanation(const Grammar& g, const ParseTree& tree, ParseMode mode,
                                    const ExplanationGraph& graph) {
  Explanation e;
  for (const auto& [sw, val] : tree_terms(g, tree, mode)) e.add(graph.instance(sw, val));
  return e;
}

/// Complete-data graph: one goal whose single body is the tree's
/// explanation. All grammar switches are declared, so the graph has the
/// same parameter space as a sentence chart.
inline ExplanationGraph compile_tree(const Grammar& g, const ParseTree& tree, ParseMode mode) {
  ExplanationGraph graph = grammar_switch_graph(g, mode);
  const Explanation e = tree_explanation(g, tree, mode, graph);
  const GoalId id = graph.add_goal(Term::compound("tree", {Term::symbol(tree.label)}).str());
  graph.add_body(id, Body{{}, e.instances()});
  graph.add_root(id);
  graph.set_exclusiveness_hint(Exclusiveness::kExclusive);
  graph.validate();
  return graph;
}

/// Parse tree of a derivation of the chart root.
inline ParseTree chart_tree(const Grammar& g, const SentenceChart& chart, const Derivation& d) {
  if (chart.mode == ParseMode::kPcfg) return detail::pcfg_span_tree(g, chart, d);
  return detail::plcg_goal_tree(g, chart, d);
}

struct ViterbiParse {
  ParseTree tree;
  Explanation explanation;
  double log_prob = kNegInf;
};

inline ViterbiParse viterbi_parse(const Grammar& g, const SentenceChart& chart,
                                  const ParameterTable& theta, TieBreak tie = TieBreak::kFirst) {
  const auto table = viterbi_table(chart.graph, log_table(resolve(chart.graph, theta)), tie);
  const auto d = viterbi_derivation(chart.graph, table, chart.root);
  return ViterbiParse{chart_tree(g, chart, d), derivation_explanation(chart.graph, d),
                      table.best[chart.root.index]};
}

/// Re-indexes an explanation from one graph's switches to another's by
/// canonical names; nullopt when a switch or value is missing.
inline std::optional<Explanation> remap_explanation(const ExplanationGraph& from,
                                                    const ExplanationGraph& to,
                                                    const Explanation& e) {
  Explanation out;
  for (const auto& inst : e.instances()) {
    const auto& decl = from.switch_decl(inst.sw);
    const auto sw = to.find_switch(decl.id.str());
    if (!sw) return std::nullopt;
    const auto v = to.find_value(*sw, decl.values.at(inst.value).str());
    if (!v) return std::nullopt;
    out.add(*sw, *v, inst.count);
  }
  return out;
}

/// The parse tree of `sentence` whose explanation is `e` (indexed by the
/// switches of `source`). When several trees share the explanation, the
/// first one found is returned. Throws kInconsistentExplanation when no
/// tree of the sentence has this explanation.
inline ParseTree tree_from_explanation(const Grammar& g, const Sentence& sentence, ParseMode mode,
                                       const ExplanationGraph& source, const Explanation& e,
                                       std::size_t step_limit = kDefaultDerivationSteps) {
  std::optional<SentenceChart> chart;
  try {
    chart = compile_sentence(g, sentence, mode);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kUnparseable) throw;
    throw Error(ErrorCode::kInconsistentExplanation,
                "sentence '" + sentence_str(sentence) + "' has no parse");
  }
  const auto target = remap_explanation(source, chart->graph, e);
  if (!target) {
    throw Error(ErrorCode::kInconsistentExplanation,
                "explanation uses switches unknown to the grammar");
  }
  const auto d = find_derivation(chart->graph, chart->root, *target, step_limit);
  if (!d) {
    throw Error(ErrorCode::kInconsistentExplanation,
                "no parse of '" + sentence_str(sentence) + "' has this explanation");
  }
  ParseTree tree = chart_tree(g, *chart, *d);
  if (tree_explanation(g, tree, mode, chart->graph) != *target) {
    throw Error(ErrorCode::kInconsistentExplanation, "reconstructed tree does not match");
  }
  return tree;
}

/// One chart per sentence. Unparseable sentences raise kUnparseable with
/// their corpus position.
inline std::vector<SentenceChart> compile_corpus(const Grammar& g,
                                                 std::span<const Sentence> corpus,
                                                 ParseMode mode) {
  std::vector<SentenceChart> out;
  out.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    try {
      out.push_back(compile_sentence(g, corpus[k], mode));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kUnparseable) throw;
      throw Error(ErrorCode::kUnparseable, "sentence " + std::to_string(k + 1) + " ('" +
                                               sentence_str(corpus[k]) + "') has no parse");
    }
  }
  return out;
}

/// All charts merged into one graph, one root per sentence, switches
/// declared up front in canonical grammar order.
inline ExplanationGraph corpus_graph(const Grammar& g, std::span<const SentenceChart> charts,
                                     ParseMode mode) {
  std::vector<ExplanationGraph> parts;
  parts.reserve(charts.size() + 1);
  parts.push_back(grammar_switch_graph(g, mode));
  for (const auto& c : charts) parts.push_back(c.graph);
  ExplanationGraph out = disjoint_union(parts);
  out.set_exclusiveness_hint(Exclusiveness::kExclusive);
  out.validate();
  return out;
}

/// Merged complete-data graph of a treebank, one root per tree.
inline ExplanationGraph treebank_graph(const Grammar& g, std::span<const ParseTree> trees,
                                       ParseMode mode) {
  std::vector<ExplanationGraph> parts;
  parts.reserve(trees.size() + 1);
  parts.push_back(grammar_switch_graph(g, mode));
  for (const auto& t : trees) parts.push_back(compile_tree(g, t, mode));
  ExplanationGraph out = disjoint_union(parts);
  out.set_exclusiveness_hint(Exclusiveness::kExclusive);
  out.validate();
  return out;
}

}  // namespace explgraph
