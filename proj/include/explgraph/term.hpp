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

#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"

namespace explgraph {

/// Ground structured term used for switch names, switch values and goal
/// labels. Symbols, integers, lists and compounds `f(a1,...,an)`.
///
/// The canonical rendering is injective: a symbol is written bare when it
/// consists of `[A-Za-z0-9_]` and is not all digits, otherwise it is
/// single-quoted with `\\` and `\'` escapes. Whitespace is never allowed
/// inside a symbol, so every rendering is a single whitespace-free token.
class Term {
 public:
  enum class Kind { kSymbol, kInteger, kList, kCompound };

  Term() : kind_(Kind::kSymbol) {}

  static Term symbol(std::string name) {
    for (char c : name) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        throw Error(ErrorCode::kInvalidArgument,
                    "symbol contains whitespace: '" + name + "'");
      }
    }
    Term t;
    t.kind_ = Kind::kSymbol;
    t.name_ = std::move(name);
    return t;
  }

  static Term integer(std::int64_t value) {
    Term t;
    t.kind_ = Kind::kInteger;
    t.value_ = value;
    return t;
  }

  static Term list(std::vector<Term> items) {
    Term t;
    t.kind_ = Kind::kList;
    t.args_ = std::move(items);
    return t;
  }

  static Term compound(std::string head, std::vector<Term> args) {
    if (args.empty()) return symbol(std::move(head));
    Term t = symbol(std::move(head));
    t.kind_ = Kind::kCompound;
    t.args_ = std::move(args);
    return t;
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::int64_t value() const { return value_; }
  const std::vector<Term>& args() const { return args_; }

  std::string str() const {
    std::string out;
    render(out);
    return out;
  }

  void render(std::string& out) const {
    switch (kind_) {
      case Kind::kSymbol:
        render_symbol(name_, out);
        break;
      case Kind::kInteger:
        out += std::to_string(value_);
        break;
      case Kind::kList:
        out += '[';
        render_args(out);
        out += ']';
        break;
      case Kind::kCompound:
        render_symbol(name_, out);
        out += '(';
        render_args(out);
        out += ')';
        break;
    }
  }

  friend bool operator==(const Term& a, const Term& b) {
    return a.kind_ == b.kind_ && a.name_ == b.name_ && a.value_ == b.value_ &&
           a.args_ == b.args_;
  }

  static bool is_bare_symbol(std::string_view s) {
    if (s.empty()) return false;
    bool all_digits = true;
    for (char c : s) {
      const auto u = static_cast<unsigned char>(c);
      if (!(std::isalnum(u) || c == '_')) return false;
      if (!std::isdigit(u)) all_digits = false;
    }
    return !all_digits;
  }

 private:
  static void render_symbol(const std::string& s, std::string& out) {
    if (is_bare_symbol(s)) {
      out += s;
      return;
    }
    out += '\'';
    for (char c : s) {
      if (c == '\'' || c == '\\') out += '\\';
      out += c;
    }
    out += '\'';
  }

  void render_args(std::string& out) const {
    for (std::size_t i = 0; i < args_.size(); ++i) {
      if (i) out += ',';
      args_[i].render(out);
    }
  }

  Kind kind_;
  std::string name_;
  std::int64_t value_ = 0;
  std::vector<Term> args_;
};

namespace detail {

class TermParser {
 public:
  explicit TermParser(std::string_view text) : text_(text) {}

  Term parse_term() {
    if (at_end()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '[') {
      ++pos_;
      std::vector<Term> items;
      if (peek(']')) {
        ++pos_;
        return Term::list(std::move(items));
      }
      items.push_back(parse_term());
      while (peek(',')) {
        ++pos_;
        items.push_back(parse_term());
      }
      expect(']');
      return Term::list(std::move(items));
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      if (c == '-') ++pos_;
      while (!at_end() && std::isalnum(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      const std::string_view tok = text_.substr(start, pos_ - start);
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec == std::errc() && ptr == tok.data() + tok.size()) {
        return maybe_compound(std::string(tok), /*is_integer=*/true, v);
      }
      if (Term::is_bare_symbol(tok)) {
        return maybe_compound(std::string(tok), false, 0);
      }
      pos_ = start;
      fail("malformed number '" + std::string(tok) + "'");
    }
    if (c == '\'') {
      ++pos_;
      std::string name;
      while (true) {
        if (at_end()) fail("unterminated quoted symbol");
        char d = text_[pos_++];
        if (d == '\\') {
          if (at_end()) fail("dangling escape");
          name += text_[pos_++];
        } else if (d == '\'') {
          break;
        } else {
          name += d;
        }
      }
      return maybe_compound(std::move(name), false, 0);
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                           text_[pos_] == '_'))
        ++pos_;
      return maybe_compound(std::string(text_.substr(start, pos_ - start)), false, 0);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  bool at_end() const { return pos_ >= text_.size(); }
  std::size_t position() const { return pos_; }

 private:
  Term maybe_compound(std::string name, bool is_integer, std::int64_t v) {
    if (peek('(')) {
      ++pos_;
      std::vector<Term> args;
      args.push_back(parse_term());
      while (peek(',')) {
        ++pos_;
        args.push_back(parse_term());
      }
      expect(')');
      return Term::compound(std::move(name), std::move(args));
    }
    if (is_integer) return Term::integer(v);
    return Term::symbol(std::move(name));
  }

  bool peek(char c) const { return !at_end() && text_[pos_] == c; }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kSyntax, what + " at column " + std::to_string(pos_ + 1) +
                                        " in term '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses exactly one term occupying the whole of `text`.
inline Term parse_term(std::string_view text) {
  detail::TermParser p(text);
  Term t = p.parse_term();
  if (!p.at_end()) {
    throw Error(ErrorCode::kSyntax, "trailing characters at column " +
                                        std::to_string(p.position() + 1) +
                                        " in term '" + std::string(text) + "'");
  }
  return t;
}

/// Parses a leading term and reports how many characters it consumed.
inline std::pair<Term, std::size_t> parse_term_prefix(std::string_view text) {
  detail::TermParser p(text);
  Term t = p.parse_term();
  return {std::move(t), p.position()};
}

}  // namespace explgraph
