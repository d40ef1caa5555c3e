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

// Text formats for explanation graphs, parameter tables, pseudo-count
// tables and learning reports.
//
//   switch <id> <v1> <v2> ...
//   hint exclusive|overlapping            (optional)
//   goal <idx> <label>
//   body <head-idx> : <subgoal-idx>* | (<switch>=<value>[*mult])*
//   root <idx>
//
//   msw <switch> <value> <prob>
//   delta <switch> <value> <count>

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/learning.hpp"
#include "explgraph/params.hpp"
#include "explgraph/term.hpp"
#include "explgraph/text.hpp"

namespace explgraph {

namespace detail {

inline Term term_at(std::string_view tok, std::size_t line) {
  try {
    return parse_term(tok);
  } catch (const Error& e) {
    throw text::at_line(e.code(), line, e.what());
  }
}

inline const char* hint_name(Exclusiveness e) {
  switch (e) {
    case Exclusiveness::kExclusive: return "exclusive";
    case Exclusiveness::kOverlapping: return "overlapping";
    case Exclusiveness::kUnknown: break;
  }
  return "unknown";
}

inline std::uint32_t goal_index_at(std::string_view tok, std::size_t line) {
  const auto v = text::parse_int(tok, line);
  if (v < 0 || v > static_cast<std::int64_t>(UINT32_MAX)) {
    throw text::at_line(ErrorCode::kRange, line, "goal index out of range");
  }
  return static_cast<std::uint32_t>(v);
}

// `sw=val` or `sw=val*k`.
inline SwitchInstance instance_at(const ExplanationGraph& g, std::string_view tok,
                                  std::size_t line) {
  std::pair<Term, std::size_t> sw;
  try {
    sw = parse_term_prefix(tok);
  } catch (const Error& e) {
    throw text::at_line(e.code(), line, e.what());
  }
  if (sw.second >= tok.size() || tok[sw.second] != '=') {
    throw text::at_line(ErrorCode::kSyntax, line,
                        "expected <switch>=<value>, got '" + std::string(tok) + "'");
  }
  std::string_view rest = tok.substr(sw.second + 1);
  std::pair<Term, std::size_t> val;
  try {
    val = parse_term_prefix(rest);
  } catch (const Error& e) {
    throw text::at_line(e.code(), line, e.what());
  }
  std::uint64_t count = 1;
  if (val.second < rest.size()) {
    if (rest[val.second] != '*') {
      throw text::at_line(ErrorCode::kSyntax, line, "trailing text in '" + std::string(tok) + "'");
    }
    const auto c = text::parse_int(rest.substr(val.second + 1), line);
    if (c < 1) throw text::at_line(ErrorCode::kRange, line, "multiplicity must be >= 1");
    count = static_cast<std::uint64_t>(c);
  }
  const auto s = g.find_switch(sw.first.str());
  if (!s) throw text::at_line(ErrorCode::kLookup, line, "undeclared switch " + sw.first.str());
  const auto v = g.find_value(*s, val.first.str());
  if (!v) {
    throw text::at_line(ErrorCode::kUndeclaredValue, line,
                        "value " + val.first.str() + " not declared for " + sw.first.str());
  }
  return SwitchInstance{*s, *v, count};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Explanation graphs

inline std::string emit_graph(const ExplanationGraph& g) {
  std::string out;
  for (const auto& d : g.switches()) {
    out += "switch " + d.id.str();
    for (const auto& v : d.values) out += " " + v.str();
    out += "\n";
  }
  if (g.exclusiveness_hint() != Exclusiveness::kUnknown) {
    out += std::string("hint ") + detail::hint_name(g.exclusiveness_hint()) + "\n";
  }
  for (std::size_t i = 0; i < g.num_goals(); ++i) {
    const GoalId id{static_cast<std::uint32_t>(i)};
    out += "goal " + std::to_string(i) + " " + g.label(id) + "\n";
    for (const auto& b : g.formula(id).bodies) {
      out += "body " + std::to_string(i) + " :";
      for (const auto& s : b.subgoals) out += " " + std::to_string(s.index);
      out += " |";
      for (const auto& inst : b.instances) out += " " + g.instance_str(inst);
      out += "\n";
    }
  }
  for (const auto& r : g.roots()) out += "root " + std::to_string(r.index) + "\n";
  return out;
}

/// Goals may be referenced before their `goal` line; indices must be
/// 0..n-1 in file order. The result is validated.
inline ExplanationGraph parse_graph(std::string_view content) {
  ExplanationGraph g;
  const auto all = text::lines(content);
  struct Deferred {
    std::size_t line;
    std::vector<std::string_view> toks;
  };
  std::vector<Deferred> bodies, roots;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const std::size_t line = k + 1;
    const auto stripped = text::strip_comment(all[k]);
    auto toks = text::split_ws(stripped);
    if (toks.empty()) continue;
    const auto& kw = toks[0];
    if (kw == "switch") {
      if (toks.size() < 3) throw text::at_line(ErrorCode::kSyntax, line, "switch needs an id and values");
      std::vector<Term> values;
      for (std::size_t t = 2; t < toks.size(); ++t) values.push_back(detail::term_at(toks[t], line));
      try {
        g.declare_switch(detail::term_at(toks[1], line), std::move(values));
      } catch (const Error& e) {
        throw text::at_line(e.code(), line, e.what());
      }
    } else if (kw == "hint") {
      if (toks.size() != 2) throw text::at_line(ErrorCode::kSyntax, line, "hint needs one word");
      if (toks[1] == "exclusive") {
        g.set_exclusiveness_hint(Exclusiveness::kExclusive);
      } else if (toks[1] == "overlapping") {
        g.set_exclusiveness_hint(Exclusiveness::kOverlapping);
      } else if (toks[1] != "unknown") {
        throw text::at_line(ErrorCode::kSyntax, line, "unknown hint '" + std::string(toks[1]) + "'");
      }
    } else if (kw == "goal") {
      if (toks.size() < 3) throw text::at_line(ErrorCode::kSyntax, line, "goal needs an index and a label");
      const auto idx = detail::goal_index_at(toks[1], line);
      if (idx != g.num_goals()) {
        throw text::at_line(ErrorCode::kSyntax, line,
                            "goal index " + std::to_string(idx) + ", expected " +
                                std::to_string(g.num_goals()));
      }
      // The label is the rest of the line.
      const auto pos = static_cast<std::size_t>(toks[2].data() - stripped.data());
      try {
        g.add_goal(std::string(text::trim(stripped.substr(pos))));
      } catch (const Error& e) {
        throw text::at_line(e.code(), line, e.what());
      }
    } else if (kw == "body") {
      bodies.push_back({line, std::move(toks)});
    } else if (kw == "root") {
      if (toks.size() != 2) throw text::at_line(ErrorCode::kSyntax, line, "root needs one index");
      roots.push_back({line, std::move(toks)});
    } else {
      throw text::at_line(ErrorCode::kSyntax, line, "unknown keyword '" + std::string(kw) + "'");
    }
  }
  const auto goal_ref = [&](std::string_view tok, std::size_t line) {
    const auto idx = detail::goal_index_at(tok, line);
    if (idx >= g.num_goals()) {
      throw text::at_line(ErrorCode::kDanglingReference, line,
                          "goal " + std::to_string(idx) + " does not exist");
    }
    return GoalId{idx};
  };
  for (const auto& d : bodies) {
    const auto& t = d.toks;
    if (t.size() < 4 || t[2] != ":") {
      throw text::at_line(ErrorCode::kSyntax, d.line, "expected 'body <head> : <subgoals> | <instances>'");
    }
    const GoalId head = goal_ref(t[1], d.line);
    Body b;
    std::size_t k = 3;
    for (; k < t.size() && t[k] != "|"; ++k) b.subgoals.push_back(goal_ref(t[k], d.line));
    if (k == t.size()) throw text::at_line(ErrorCode::kSyntax, d.line, "missing '|'");
    for (++k; k < t.size(); ++k) b.instances.push_back(detail::instance_at(g, t[k], d.line));
    g.add_body(head, std::move(b));
  }
  for (const auto& d : roots) g.add_root(goal_ref(d.toks[1], d.line));
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Parameter and pseudo-count tables

namespace detail {

template <class Tag>
SwitchTable<Tag> parse_table(std::string_view content, std::string_view keyword) {
  constexpr bool kProb = std::is_same_v<Tag, ProbabilityTag>;
  SwitchTable<Tag> t;
  std::size_t line = 0;
  for (const auto& raw : text::lines(content)) {
    ++line;
    const auto toks = text::split_ws(text::strip_comment(raw));
    if (toks.empty()) continue;
    if (toks.size() != 4 || toks[0] != keyword) {
      throw text::at_line(ErrorCode::kSyntax, line,
                          "expected '" + std::string(keyword) + " <switch> <value> <number>'");
    }
    const Term sw = term_at(toks[1], line);
    const Term val = term_at(toks[2], line);
    const double w = text::parse_double(toks[3], line);
    if (w < 0.0 || (kProb && w > 1.0)) {
      throw text::at_line(ErrorCode::kRange, line,
                          std::string(kProb ? "probability" : "pseudo count") + " " +
                              std::string(toks[3]) + " out of range");
    }
    if (const auto* e = t.find(sw.str())) {
      for (const auto& v : e->values) {
        if (v == val) {
          throw text::at_line(ErrorCode::kSyntax, line,
                              "duplicate entry for " + sw.str() + " " + val.str());
        }
      }
    }
    t.set_weight(sw, val, w);
  }
  t.validate();
  return t;
}

template <class Tag>
std::string emit_table(const SwitchTable<Tag>& t, std::string_view keyword) {
  std::string out;
  for (const auto& e : t.entries()) {
    const std::string sw = e.id.str();
    for (std::size_t v = 0; v < e.values.size(); ++v) {
      out += std::string(keyword) + " " + sw + " " + e.values[v].str() + " " +
             text::format_double(e.weights[v]) + "\n";
    }
  }
  return out;
}

}  // namespace detail

/// Rows must sum to 1 within 1e-9 once the file is read.
inline ParameterTable parse_params(std::string_view content) {
  return detail::parse_table<ProbabilityTag>(content, "msw");
}

inline std::string emit_params(const ParameterTable& t) { return detail::emit_table(t, "msw"); }

inline PseudoCountTable parse_pseudo_counts(std::string_view content) {
  return detail::parse_table<PseudoCountTag>(content, "delta");
}

inline std::string emit_pseudo_counts(const PseudoCountTable& t) {
  return detail::emit_table(t, "delta");
}

// ---------------------------------------------------------------------------
// Learning report

inline std::string emit_learn_report(const LearnReport& r, Method method) {
  std::string out;
  out += std::string("method ") + method_name(method) + "\n";
  out += "iterations " + std::to_string(r.iterations) + "\n";
  out += std::string("converged ") + (r.converged ? "true" : "false") + "\n";
  out += std::string("termination ") + termination_name(r.termination) + "\n";
  out += "best_restart " + std::to_string(r.best_restart_index) + "\n";
  for (std::size_t k = 0; k < r.restart_objectives.size(); ++k) {
    out += "restart " + std::to_string(k) + " objective " +
           text::format_double(r.restart_objectives[k]) + " iterations " +
           std::to_string(r.restart_iterations.at(k)) + "\n";
  }
  for (std::size_t k = 0; k < r.objective_trace.size(); ++k) {
    out += "objective " + std::to_string(k) + " " + text::format_double(r.objective_trace[k]) + "\n";
  }
  for (const auto& s : r.degenerate_switches) out += "degenerate " + s + "\n";
  for (const auto& w : r.warnings) out += "warning " + w + "\n";
  out += "learn_seconds " + text::format_double(r.learn_seconds) + "\n";
  return out;
}

}  // namespace explgraph
