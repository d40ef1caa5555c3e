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

#include <cstdint>
#include <string_view>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/grammar.hpp"
#include "explgraph/graph.hpp"

namespace explgraph {

enum class ParseMode { kPcfg, kPlcg };

inline const char* parse_mode_name(ParseMode m) { return m == ParseMode::kPcfg ? "pcfg" : "plcg"; }

inline ParseMode parse_parse_mode(std::string_view s) {
  if (s == "pcfg") return ParseMode::kPcfg;
  if (s == "plcg") return ParseMode::kPlcg;
  throw Error(ErrorCode::kInvalidArgument, "unknown parse mode '" + std::string(s) + "'");
}

/// Bookkeeping for one body of a chart goal.
struct ChartBody {
  std::uint32_t rule = 0;
  /// A prefix (PCFG) or remaining-rhs (PLCG) subgoal comes first.
  bool has_part = false;
  /// PLCG: a further left-corner step follows as the last subgoal.
  bool has_next = false;
};

/// What a chart goal stands for.
///  kSpan  (PCFG) nonterminal `sym` over [i,j)
///  kDot   (PCFG) first `t` rhs symbols of `rule` over [i,j)
///  kGoal  (PLCG) g(sym) over [i,j)
///  kLc    (PLCG) left corner `corner` of goal `sym` complete at i; goal ends at j
///  kRest  (PLCG) rhs symbols `t`.. of `rule` over [i,j)
struct ChartGoal {
  enum class Kind { kSpan, kDot, kGoal, kLc, kRest };
  Kind kind = Kind::kSpan;
  std::uint32_t sym = 0;
  std::uint32_t rule = 0;
  std::uint32_t t = 0;
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::vector<ChartBody> bodies;
};

/// Explanation graph of one sentence plus the bookkeeping needed to turn a
/// derivation back into a parse tree.
struct SentenceChart {
  ParseMode mode = ParseMode::kPcfg;
  Sentence sentence;
  ExplanationGraph graph;
  GoalId root;
  std::vector<ChartGoal> goals;
};

namespace detail {

/// Result of matching one rhs symbol against a span: a plain terminal
/// match, a subgoal, or failure.
struct Slot {
  bool ok = false;
  bool has_goal = false;
  GoalId goal;
};

}  // namespace detail

}  // namespace explgraph
