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

// Parse-tree scoring: labeled tree match (LT), unlabeled tree match (BT)
// and zero crossing brackets (0-CB).

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/grammar.hpp"

namespace explgraph {

struct MetricsReport {
  double lt = 0.0;
  double bt = 0.0;
  double zero_cb = 0.0;
  std::size_t n = 0;
};

/// Same shape, labels of internal nodes ignored. Leaves must agree.
inline bool unlabeled_equal(const ParseTree& a, const ParseTree& b) {
  if (a.leaf() != b.leaf()) return false;
  if (a.leaf()) return a.label == b.label;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t k = 0; k < a.children.size(); ++k) {
    if (!unlabeled_equal(a.children[k], b.children[k])) return false;
  }
  return true;
}

/// A bracket covers words first..last, 1-based and inclusive.
struct Bracket {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const Bracket&, const Bracket&) = default;
};

namespace detail {

inline std::size_t collect_brackets(const ParseTree& t, std::size_t start,
                                    std::vector<Bracket>& out) {
  if (t.leaf()) return start + 1;
  std::size_t pos = start;
  for (const auto& c : t.children) pos = collect_brackets(c, pos, out);
  out.push_back(Bracket{start + 1, pos});
  return pos;
}

}  // namespace detail

/// One bracket per internal node, in postorder.
inline std::vector<Bracket> brackets(const ParseTree& t) {
  std::vector<Bracket> out;
  detail::collect_brackets(t, 0, out);
  return out;
}

/// Bracket (i..j) crosses (s..t) when s < i <= t < j or i < s <= j < t.
inline bool crosses(const Bracket& b, const Bracket& other) {
  const auto i = b.first, j = b.last, s = other.first, t = other.last;
  return (s < i && i <= t && t < j) || (i < s && s <= j && j < t);
}

/// True when no bracket of `predicted` crosses a bracket of `reference`.
inline bool consistent(const ParseTree& predicted, const ParseTree& reference) {
  const auto pb = brackets(predicted);
  const auto rb = brackets(reference);
  for (const auto& b : pb) {
    for (const auto& r : rb) {
      if (crosses(b, r)) return false;
    }
  }
  return true;
}

/// Percentages over aligned lists. Each pair must share its yield.
inline MetricsReport metrics(std::span<const ParseTree> predicted,
                             std::span<const ParseTree> reference) {
  if (predicted.size() != reference.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(predicted.size()) + " predicted trees vs " +
                    std::to_string(reference.size()) + " reference trees");
  }
  if (predicted.empty()) throw Error(ErrorCode::kInvalidArgument, "no trees to score");
  std::size_t lt = 0, bt = 0, cb = 0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    if (predicted[k].yield() != reference[k].yield()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "tree " + std::to_string(k + 1) + " does not cover the reference sentence");
    }
    lt += predicted[k] == reference[k];
    bt += unlabeled_equal(predicted[k], reference[k]);
    cb += consistent(predicted[k], reference[k]);
  }
  const double n = static_cast<double>(predicted.size());
  return MetricsReport{100.0 * static_cast<double>(lt) / n, 100.0 * static_cast<double>(bt) / n,
                       100.0 * static_cast<double>(cb) / n, predicted.size()};
}

}  // namespace explgraph
