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

// Brute-force parse-tree enumeration used as an independent oracle.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "explgraph/grammar.hpp"

namespace explgraph::testing {

inline Grammar fig1_grammar() {
  return Grammar("S", {{"S", {"S", "S"}, 0.4}, {"S", {"a"}, 0.3}, {"S", {"b"}, 0.3}});
}

inline Grammar fig2_grammar() {
  return Grammar("S", {{"S", {"S", "S"}, std::nullopt},
                       {"S", {"a"}, std::nullopt},
                       {"S", {"b"}, std::nullopt}});
}

/// Mixed-arity grammar with a unit rule and a non-left-recursive nonterminal.
inline Grammar mixed_grammar() {
  return Grammar("S", {{"S", {"A", "B"}, 0.5},
                       {"S", {"A", "b", "S"}, 0.2},
                       {"S", {"B"}, 0.3},
                       {"A", {"a"}, 0.6},
                       {"A", {"A", "a"}, 0.4},
                       {"B", {"b"}, 0.7},
                       {"B", {"A", "B"}, 0.3}});
}

inline Sentence words(const std::string& s) {
  Sentence out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

namespace detail {

// Every way the symbols `rhs[k..]` can cover [i,j).
inline void split_trees(const Grammar& g, const std::vector<std::string>& rhs, std::size_t k,
                        const Sentence& s, std::size_t i, std::size_t j,
                        std::vector<ParseTree>& prefix, std::vector<std::vector<ParseTree>>& out);

inline std::vector<ParseTree> symbol_trees(const Grammar& g, const std::string& x,
                                           const Sentence& s, std::size_t i, std::size_t j) {
  if (!g.is_nonterminal(x)) {
    if (j == i + 1 && s[i] == x) return {leaf(x)};
    return {};
  }
  std::vector<ParseTree> out;
  for (std::size_t r : g.rules_for(x)) {
    const auto& rhs = g.rules()[r].rhs;
    if (rhs.size() > j - i) continue;
    std::vector<ParseTree> prefix;
    std::vector<std::vector<ParseTree>> kids;
    split_trees(g, rhs, 0, s, i, j, prefix, kids);
    for (auto& k : kids) out.push_back(node(x, std::move(k)));
  }
  return out;
}

inline void split_trees(const Grammar& g, const std::vector<std::string>& rhs, std::size_t k,
                        const Sentence& s, std::size_t i, std::size_t j,
                        std::vector<ParseTree>& prefix, std::vector<std::vector<ParseTree>>& out) {
  if (k == rhs.size()) {
    if (i == j) out.push_back(prefix);
    return;
  }
  const std::size_t left = rhs.size() - k - 1;
  for (std::size_t m = i + 1; m + left <= j; ++m) {
    for (auto& t : symbol_trees(g, rhs[k], s, i, m)) {
      prefix.push_back(std::move(t));
      split_trees(g, rhs, k + 1, s, m, j, prefix, out);
      prefix.pop_back();
    }
  }
}

}  // namespace detail

/// All parse trees of `s` rooted at the start symbol.
inline std::vector<ParseTree> all_parses(const Grammar& g, const Sentence& s) {
  return detail::symbol_trees(g, g.start(), s, 0, s.size());
}

inline double tree_prob(const Grammar& g, const ParseTree& t) {
  double p = 1.0;
  for (std::size_t r : tree_rules(g, t)) p *= *g.rules()[r].prob;
  return p;
}

/// Every sentence over the grammar's terminals with 1..max_len tokens.
inline std::vector<Sentence> all_sentences(const Grammar& g, std::size_t max_len) {
  std::vector<Sentence> out;
  std::vector<Sentence> layer{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Sentence> next;
    for (const auto& s : layer) {
      for (const auto& t : g.terminals()) {
        auto e = s;
        e.push_back(t);
        next.push_back(e);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

}  // namespace explgraph::testing
