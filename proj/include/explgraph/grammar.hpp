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
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/params.hpp"
#include "explgraph/term.hpp"
#include "explgraph/text.hpp"

namespace explgraph {

using Sentence = std::vector<std::string>;

struct CfgRule {
  std::string lhs;
  std::vector<std::string> rhs;
  /// Absent when the rule's probability is to be learned.
  std::optional<double> prob;

  friend bool operator==(const CfgRule&, const CfgRule&) = default;
};

/// Context-free grammar without epsilon rules or unit-rule cycles.
/// Nonterminals are exactly the left-hand sides; every other symbol is a
/// terminal.
class Grammar {
 public:
  Grammar() = default;

  Grammar(std::string start, std::vector<CfgRule> rules)
      : start_(std::move(start)), rules_(std::move(rules)) {
    build();
  }

  const std::string& start() const { return start_; }
  const std::vector<CfgRule>& rules() const { return rules_; }
  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  const std::vector<std::string>& terminals() const { return terminals_; }

  bool is_nonterminal(std::string_view s) const { return nt_index_.count(std::string(s)) > 0; }

  std::size_t nonterminal_index(std::string_view s) const {
    auto it = nt_index_.find(std::string(s));
    if (it == nt_index_.end()) {
      throw Error(ErrorCode::kLookup, "unknown nonterminal '" + std::string(s) + "'");
    }
    return it->second;
  }

  /// Rule indices with lhs `a`, in file order.
  const std::vector<std::size_t>& rules_for(std::size_t a) const { return groups_.at(a); }
  const std::vector<std::size_t>& rules_for(std::string_view a) const {
    return groups_.at(nonterminal_index(a));
  }

  /// Position of rule `r` within its lhs group.
  std::size_t local_index(std::size_t r) const { return local_.at(r); }

  std::optional<std::size_t> find_rule(std::string_view lhs,
                                       const std::vector<std::string>& rhs) const {
    if (!is_nonterminal(lhs)) return std::nullopt;
    for (std::size_t r : rules_for(lhs)) {
      if (rules_[r].rhs == rhs) return r;
    }
    return std::nullopt;
  }

  bool has_probabilities() const {
    return !rules_.empty() &&
           std::all_of(rules_.begin(), rules_.end(), [](const CfgRule& r) { return r.prob.has_value(); });
  }

  /// Nonterminals A with G =>* A as leftmost symbol, G included.
  const std::vector<std::size_t>& left_corners(std::size_t g) const { return lc_.at(g); }

  bool is_left_corner(std::size_t g, std::size_t a) const {
    const auto& v = lc_.at(g);
    return std::binary_search(v.begin(), v.end(), a);
  }

  /// Terminals that can begin a derivation from nonterminal `g`.
  const std::vector<std::string>& first_set(std::size_t g) const { return first_.at(g); }

 private:
  void build() {
    if (rules_.empty()) throw Error(ErrorCode::kInvalidGrammar, "grammar has no rules");
    std::set<std::pair<std::string, std::vector<std::string>>> seen;
    for (const auto& r : rules_) {
      check_symbol(r.lhs);
      if (r.rhs.empty()) {
        throw Error(ErrorCode::kInvalidGrammar, "empty right-hand side for " + r.lhs);
      }
      for (const auto& s : r.rhs) check_symbol(s);
      if (!seen.emplace(r.lhs, r.rhs).second) {
        throw Error(ErrorCode::kInvalidGrammar, "duplicate rule for " + r.lhs);
      }
      if (r.prob && !(*r.prob >= 0.0 && *r.prob <= 1.0)) {
        throw Error(ErrorCode::kRange, "rule probability outside [0,1] for " + r.lhs);
      }
      if (nt_index_.emplace(r.lhs, nonterminals_.size()).second) nonterminals_.push_back(r.lhs);
    }
    if (!is_nonterminal(start_)) {
      throw Error(ErrorCode::kInvalidGrammar, "start symbol '" + start_ + "' has no rules");
    }
    std::set<std::string> term_seen;
    groups_.assign(nonterminals_.size(), {});
    local_.resize(rules_.size());
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      auto& group = groups_[nt_index_.at(rules_[r].lhs)];
      local_[r] = group.size();
      group.push_back(r);
      for (const auto& s : rules_[r].rhs) {
        if (!is_nonterminal(s) && term_seen.insert(s).second) terminals_.push_back(s);
      }
    }
    check_unit_cycles();
    build_left_corners();
  }

  static void check_symbol(const std::string& s) {
    if (s.empty() || s == "->" || s == ":" || s == "start") {
      throw Error(ErrorCode::kInvalidGrammar, "invalid grammar symbol '" + s + "'");
    }
    for (char c : s) {
      if (text::is_space(c) || c == '(' || c == ')' || c == '#') {
        throw Error(ErrorCode::kInvalidGrammar, "invalid grammar symbol '" + s + "'");
      }
    }
  }

  void check_unit_cycles() const {
    const std::size_t n = nonterminals_.size();
    std::vector<std::vector<std::size_t>> unit(n);
    for (const auto& r : rules_) {
      if (r.rhs.size() == 1 && is_nonterminal(r.rhs[0])) {
        unit[nt_index_.at(r.lhs)].push_back(nt_index_.at(r.rhs[0]));
      }
    }
    std::vector<int> color(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
      if (color[s]) continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
      color[s] = 1;
      while (!stack.empty()) {
        auto& [v, i] = stack.back();
        if (i < unit[v].size()) {
          const std::size_t w = unit[v][i++];
          if (color[w] == 1) {
            throw Error(ErrorCode::kInvalidGrammar,
                        "unit-rule cycle through " + nonterminals_[w]);
          }
          if (color[w] == 0) {
            color[w] = 1;
            stack.emplace_back(w, 0);
          }
        } else {
          color[v] = 2;
          stack.pop_back();
        }
      }
    }
  }

  void build_left_corners() {
    const std::size_t n = nonterminals_.size();
    lc_.assign(n, {});
    first_.assign(n, {});
    for (std::size_t g = 0; g < n; ++g) {
      std::vector<char> in(n, 0);
      std::vector<std::size_t> stack{g};
      in[g] = 1;
      std::set<std::string> firsts;
      while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        for (std::size_t r : groups_[a]) {
          const auto& x = rules_[r].rhs.front();
          if (is_nonterminal(x)) {
            const std::size_t b = nt_index_.at(x);
            if (!in[b]) {
              in[b] = 1;
              stack.push_back(b);
            }
          } else {
            firsts.insert(x);
          }
        }
      }
      for (std::size_t a = 0; a < n; ++a) {
        if (in[a]) lc_[g].push_back(a);
      }
      for (const auto& t : terminals_) {
        if (firsts.count(t)) first_[g].push_back(t);
      }
    }
  }

  std::string start_;
  std::vector<CfgRule> rules_;
  std::vector<std::string> nonterminals_;
  std::vector<std::string> terminals_;
  std::unordered_map<std::string, std::size_t> nt_index_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> local_;
  std::vector<std::vector<std::size_t>> lc_;
  std::vector<std::vector<std::string>> first_;
};

// ---------------------------------------------------------------------------
// Grammar file: `start A` then `A -> s1 s2 ... [: p]` lines.

inline Grammar parse_grammar(std::string_view content) {
  std::optional<std::string> start;
  std::vector<CfgRule> rules;
  std::size_t lineno = 0;
  for (const auto& raw : text::lines(content)) {
    ++lineno;
    const auto toks = text::split_ws(text::strip_comment(raw));
    if (toks.empty()) continue;
    if (toks[0] == "start") {
      if (toks.size() != 2) throw text::at_line(ErrorCode::kSyntax, lineno, "expected 'start <symbol>'");
      if (start) throw text::at_line(ErrorCode::kSyntax, lineno, "duplicate start line");
      start = std::string(toks[1]);
      continue;
    }
    if (toks.size() < 3 || toks[1] != "->") {
      throw text::at_line(ErrorCode::kSyntax, lineno, "expected '<lhs> -> <rhs...> [: <prob>]'");
    }
    CfgRule rule;
    rule.lhs = std::string(toks[0]);
    std::size_t end = toks.size();
    if (toks.size() >= 2 && toks[toks.size() - 2] == ":") {
      const double p = text::parse_double(toks.back(), lineno);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw text::at_line(ErrorCode::kRange, lineno, "probability outside [0,1]");
      }
      rule.prob = p;
      end -= 2;
    }
    for (std::size_t i = 2; i < end; ++i) {
      if (toks[i] == ":") throw text::at_line(ErrorCode::kSyntax, lineno, "misplaced ':'");
      rule.rhs.emplace_back(toks[i]);
    }
    if (rule.rhs.empty()) throw text::at_line(ErrorCode::kSyntax, lineno, "empty right-hand side");
    rules.push_back(std::move(rule));
  }
  if (!start) throw Error(ErrorCode::kSyntax, "missing 'start' line");
  return Grammar(*start, std::move(rules));
}

inline std::string emit_grammar(const Grammar& g) {
  std::string out = "start " + g.start() + "\n";
  for (const auto& r : g.rules()) {
    out += r.lhs + " ->";
    for (const auto& s : r.rhs) out += " " + s;
    if (r.prob) out += " : " + text::format_double(*r.prob);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parse trees.

/// Labeled tree; leaves (no children) are terminal tokens.
struct ParseTree {
  std::string label;
  std::vector<ParseTree> children;

  bool leaf() const { return children.empty(); }

  void collect_yield(Sentence& out) const {
    if (leaf()) {
      out.push_back(label);
      return;
    }
    for (const auto& c : children) c.collect_yield(out);
  }

  Sentence yield() const {
    Sentence out;
    collect_yield(out);
    return out;
  }

  void render(std::string& out) const {
    if (leaf()) {
      out += label;
      return;
    }
    out += '(';
    out += label;
    for (const auto& c : children) {
      out += ' ';
      c.render(out);
    }
    out += ')';
  }

  std::string str() const {
    std::string out;
    render(out);
    return out;
  }

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

inline ParseTree leaf(std::string token) { return ParseTree{std::move(token), {}}; }
inline ParseTree node(std::string label, std::vector<ParseTree> children) {
  return ParseTree{std::move(label), std::move(children)};
}

namespace detail {

class TreeReader {
 public:
  TreeReader(std::string_view s, std::size_t line) : s_(s), line_(line) {}

  ParseTree read_root() {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != '(') fail("expected '('");
    ParseTree t = read();
    skip();
    if (pos_ != s_.size()) fail("trailing text after tree");
    return t;
  }

 private:
  ParseTree read() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of tree");
    if (s_[pos_] == '(') {
      ++pos_;
      ParseTree t;
      t.label = token();
      if (t.label.empty()) fail("missing node label");
      while (true) {
        skip();
        if (pos_ >= s_.size()) fail("unbalanced parentheses");
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        t.children.push_back(read());
      }
      if (t.children.empty()) fail("node '" + t.label + "' has no children");
      return t;
    }
    std::string tok = token();
    if (tok.empty()) fail("unexpected ')'");
    return leaf(std::move(tok));
  }

  std::string token() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !text::is_space(s_[pos_]) && s_[pos_] != '(' && s_[pos_] != ')') {
      ++pos_;
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  void skip() {
    while (pos_ < s_.size() && text::is_space(s_[pos_])) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw text::at_line(ErrorCode::kSyntax, line_, msg, pos_ + 1);
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ParseTree parse_tree(std::string_view s, std::size_t line = 1) {
  return detail::TreeReader(s, line).read_root();
}

/// One bracketed tree per nonblank line.
inline std::vector<ParseTree> parse_treebank(std::string_view content) {
  std::vector<ParseTree> out;
  std::size_t lineno = 0;
  for (const auto& raw : text::lines(content)) {
    ++lineno;
    const auto line = text::trim(text::strip_comment(raw));
    if (line.empty()) continue;
    out.push_back(parse_tree(line, lineno));
  }
  return out;
}

inline std::string emit_treebank(std::span<const ParseTree> trees) {
  std::string out;
  for (const auto& t : trees) {
    t.render(out);
    out += '\n';
  }
  return out;
}

/// One whitespace-tokenized sentence per nonblank line.
inline std::vector<Sentence> parse_corpus(std::string_view content) {
  std::vector<Sentence> out;
  for (const auto& raw : text::lines(content)) {
    const auto toks = text::split_ws(text::strip_comment(raw));
    if (toks.empty()) continue;
    out.emplace_back(toks.begin(), toks.end());
  }
  return out;
}

inline std::string emit_corpus(std::span<const Sentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ' ';
      out += s[i];
    }
    out += '\n';
  }
  return out;
}

inline std::string sentence_str(const Sentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += s[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// PCFG switch naming: switch `A`, one value per rule, the rhs as a list.

inline Term pcfg_switch(std::string_view a) { return Term::symbol(std::string(a)); }

inline Term pcfg_value(const CfgRule& r) {
  std::vector<Term> items;
  items.reserve(r.rhs.size());
  for (const auto& s : r.rhs) items.push_back(Term::symbol(s));
  return Term::list(std::move(items));
}

inline std::vector<Term> pcfg_values(const Grammar& g, std::size_t a) {
  std::vector<Term> out;
  for (std::size_t r : g.rules_for(a)) out.push_back(pcfg_value(g.rules()[r]));
  return out;
}

/// Parameter table from the grammar's rule probabilities.
inline ParameterTable grammar_parameters(const Grammar& g) {
  ParameterTable t;
  for (std::size_t a = 0; a < g.nonterminals().size(); ++a) {
    std::vector<double> w;
    for (std::size_t r : g.rules_for(a)) {
      const auto& p = g.rules()[r].prob;
      if (!p) {
        throw Error(ErrorCode::kMissingParameter,
                    "rule for " + g.nonterminals()[a] + " has no probability");
      }
      w.push_back(*p);
    }
    t.set(pcfg_switch(g.nonterminals()[a]), pcfg_values(g, a), std::move(w));
  }
  t.validate();
  return t;
}

/// Per-rule probabilities in rule order, read from a PCFG parameter table.
inline std::vector<double> rule_probabilities(const Grammar& g, const ParameterTable& theta) {
  std::vector<double> p(g.rules().size());
  for (std::size_t r = 0; r < p.size(); ++r) {
    p[r] = theta.at(pcfg_switch(g.rules()[r].lhs).str(), pcfg_value(g.rules()[r]).str());
  }
  return p;
}

/// Same rules with probabilities replaced by `theta`.
inline Grammar with_probabilities(const Grammar& g, const ParameterTable& theta) {
  const auto p = rule_probabilities(g, theta);
  auto rules = g.rules();
  for (std::size_t r = 0; r < rules.size(); ++r) rules[r].prob = p[r];
  return Grammar(g.start(), std::move(rules));
}

/// Rule index of every internal node, in preorder. Throws when a node
/// does not match a grammar rule or a leaf is a nonterminal.
inline void tree_rules(const Grammar& g, const ParseTree& t, std::vector<std::size_t>& out) {
  if (t.leaf()) {
    if (g.is_nonterminal(t.label)) {
      throw Error(ErrorCode::kInvalidArgument, "nonterminal leaf '" + t.label + "'");
    }
    return;
  }
  std::vector<std::string> rhs;
  for (const auto& c : t.children) rhs.push_back(c.label);
  const auto r = g.find_rule(t.label, rhs);
  if (!r) {
    std::string desc = t.label + " ->";
    for (const auto& s : rhs) desc += " " + s;
    throw Error(ErrorCode::kInvalidArgument, "tree uses a rule not in the grammar: " + desc);
  }
  for (const auto& c : t.children) {
    if (c.leaf() != !g.is_nonterminal(c.label)) {
      throw Error(ErrorCode::kInvalidArgument, "symbol '" + c.label + "' misplaced in tree");
    }
  }
  out.push_back(*r);
  for (const auto& c : t.children) tree_rules(g, c, out);
}

inline std::vector<std::size_t> tree_rules(const Grammar& g, const ParseTree& t) {
  std::vector<std::size_t> out;
  tree_rules(g, t, out);
  return out;
}

/// Maximum-likelihood (or, with pseudo counts, posterior-mode) rule
/// probabilities from complete data. Nonterminals whose row total is zero
/// get a uniform row and are listed in `uniform_rows` when given.
inline ParameterTable count_ml(const Grammar& g, std::span<const ParseTree> treebank,
                               const PseudoCountTable& delta,
                               std::vector<std::string>* uniform_rows = nullptr) {
  std::vector<double> counts(g.rules().size(), 0.0);
  for (const auto& t : treebank) {
    for (std::size_t r : tree_rules(g, t)) counts[r] += 1.0;
  }
  ParameterTable theta;
  for (std::size_t a = 0; a < g.nonterminals().size(); ++a) {
    const auto values = pcfg_values(g, a);
    const std::string sw = pcfg_switch(g.nonterminals()[a]).str();
    std::vector<double> row;
    for (std::size_t k = 0; k < values.size(); ++k) {
      double d = 0.0;
      if (!delta.empty()) d = delta.at(sw, values[k].str());
      if (!(d >= 0.0)) throw Error(ErrorCode::kRange, "negative pseudo count for " + sw);
      row.push_back(counts[g.rules_for(a)[k]] + d);
    }
    if (!normalize_row(row) && uniform_rows) uniform_rows->push_back(g.nonterminals()[a]);
    theta.set(pcfg_switch(g.nonterminals()[a]), values, std::move(row));
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Sampling.

struct GeneratedCorpus {
  std::vector<Sentence> sentences;
  std::vector<ParseTree> trees;
  std::size_t attempts = 0;
  std::size_t rejected = 0;

  double acceptance_rate() const {
    return attempts ? static_cast<double>(attempts - rejected) / static_cast<double>(attempts) : 1.0;
  }
};

namespace detail {

inline std::size_t draw(const std::vector<double>& weights, const std::vector<std::size_t>& idx,
                        std::mt19937_64& rng) {
  double total = 0.0;
  for (std::size_t r : idx) total += weights[r];
  if (!(total > 0.0)) throw Error(ErrorCode::kRange, "all rule probabilities are zero");
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (std::size_t r : idx) {
    acc += weights[r];
    if (u < acc) return r;
  }
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
    if (weights[*it] > 0.0) return *it;
  }
  return idx.back();
}

/// Expands `sym`; returns false once the tree would exceed `max_depth`.
inline bool sample_tree(const Grammar& g, const std::vector<double>& p, std::size_t a,
                        int depth, int max_depth, std::mt19937_64& rng, ParseTree& out) {
  if (depth > max_depth) return false;
  const std::size_t r = draw(p, g.rules_for(a), rng);
  out.label = g.nonterminals()[a];
  out.children.clear();
  for (const auto& s : g.rules()[r].rhs) {
    if (g.is_nonterminal(s)) {
      ParseTree child;
      if (!sample_tree(g, p, g.nonterminal_index(s), depth + 1, max_depth, rng, child)) {
        return false;
      }
      out.children.push_back(std::move(child));
    } else {
      out.children.push_back(leaf(s));
    }
  }
  return true;
}

}  // namespace detail

/// Minimum number of draws before the acceptance rate is judged.
inline constexpr std::size_t kMinAttemptsForAcceptance = 1000;

/// Draws `n` trees top-down from the PCFG. Trees deeper than `max_depth`
/// nonterminal levels are rejected and redrawn; a rejection rate above 99%
/// raises VanishingAcceptance.
inline GeneratedCorpus gen_corpus(const Grammar& g, const ParameterTable& theta, std::size_t n,
                                  std::uint64_t seed, int max_depth) {
  if (max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  const auto p = rule_probabilities(g, theta);
  std::mt19937_64 rng(seed);
  GeneratedCorpus out;
  const std::size_t start = g.nonterminal_index(g.start());
  while (out.trees.size() < n) {
    ParseTree t;
    ++out.attempts;
    if (!detail::sample_tree(g, p, start, 1, max_depth, rng, t)) {
      ++out.rejected;
      if (out.attempts >= kMinAttemptsForAcceptance &&
          static_cast<double>(out.rejected) > 0.99 * static_cast<double>(out.attempts)) {
        throw Error(ErrorCode::kVanishingAcceptance,
                    "rejected " + std::to_string(out.rejected) + " of " +
                        std::to_string(out.attempts) + " draws at max depth " +
                        std::to_string(max_depth));
      }
      continue;
    }
    out.sentences.push_back(t.yield());
    out.trees.push_back(std::move(t));
  }
  return out;
}

inline int tree_depth(const ParseTree& t) {
  if (t.leaf()) return 0;
  int d = 0;
  for (const auto& c : t.children) d = std::max(d, tree_depth(c));
  return d + 1;
}

}  // namespace explgraph
