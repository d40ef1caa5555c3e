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

#include "explgraph/term.hpp"

#include <gtest/gtest.h>

#include <set>
#include <string>

#include "explgraph/error.hpp"

namespace explgraph {
namespace {

TEST(TermTest, RendersCompoundsAndLists) {
  const Term t = Term::compound("d_e", {Term::integer(1), Term::integer(2)});
  EXPECT_EQ(t.str(), "d_e(1,2)");
  const Term l = Term::list({Term::symbol("S"), Term::symbol("a")});
  EXPECT_EQ(l.str(), "[S,a]");
  EXPECT_EQ(Term::list({}).str(), "[]");
  EXPECT_EQ(Term::compound("rule", {Term::symbol("S"), l}).str(), "rule(S,[S,a])");
}

TEST(TermTest, QuotesNonBareSymbols) {
  EXPECT_EQ(Term::symbol("12").str(), "'12'");
  EXPECT_EQ(Term::symbol("a-b").str(), "'a-b'");
  EXPECT_EQ(Term::symbol("it's").str(), "'it\\'s'");
  EXPECT_EQ(Term::symbol("").str(), "''");
}

TEST(TermTest, ParseInvertsRender) {
  for (const char* text : {"d_e(1,2)", "[S,a]", "rule(S,[S,S])", "'a-b'", "'12'", "-3",
                           "attr(1,democrat,2)", "[]", "x"}) {
    EXPECT_EQ(parse_term(text).str(), text) << text;
  }
}

TEST(TermTest, IntegerAndQuotedDigitsDiffer) {
  const Term i = parse_term("12");
  const Term s = parse_term("'12'");
  EXPECT_EQ(i.kind(), Term::Kind::kInteger);
  EXPECT_EQ(s.kind(), Term::Kind::kSymbol);
  EXPECT_FALSE(i == s);
  EXPECT_NE(i.str(), s.str());
}

TEST(TermTest, RenderingIsInjectiveOnSamples) {
  std::set<std::string> seen;
  const Term samples[] = {
      Term::symbol("a"),
      Term::symbol("'a'"),
      Term::integer(1),
      Term::symbol("1"),
      Term::list({Term::symbol("a")}),
      Term::symbol("[a]"),
      Term::compound("f", {Term::symbol("a")}),
      Term::symbol("f(a)"),
      Term::compound("f", {Term::symbol("a,b")}),
      Term::compound("f", {Term::symbol("a"), Term::symbol("b")}),
  };
  for (const auto& t : samples) EXPECT_TRUE(seen.insert(t.str()).second) << t.str();
  for (const auto& t : samples) EXPECT_EQ(parse_term(t.str()), t) << t.str();
}

TEST(TermTest, ParsePrefixReportsConsumedLength) {
  const auto [t, n] = parse_term_prefix("d_e(1,2)=on");
  EXPECT_EQ(t.str(), "d_e(1,2)");
  EXPECT_EQ(n, 8u);
}

TEST(TermTest, RejectsMalformedInput) {
  for (const char* text : {"f(", "[a,", "'open", "f(a))", "", "a b"}) {
    EXPECT_THROW(parse_term(text), Error) << text;
  }
  EXPECT_THROW(Term::symbol("a b"), Error);
}

}  // namespace
}  // namespace explgraph
