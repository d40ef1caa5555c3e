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

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/term.hpp"

namespace explgraph {

struct ProbabilityTag {};
struct PseudoCountTag {};

/// Per-switch vectors of reals aligned with the declared value order, keyed
/// by canonical switch name. Instantiated as `ParameterTable` (each vector
/// on the probability simplex) and `PseudoCountTable` (nonnegative counts).
template <class Tag>
class SwitchTable {
 public:
  struct Entry {
    Term id;
    std::vector<Term> values;
    std::vector<double> weights;
  };

  /// Same value for every (switch, value) of `graph`; for a parameter table
  /// use `uniform` instead.
  static SwitchTable filled(const ExplanationGraph& graph, double w) {
    SwitchTable t;
    for (const auto& d : graph.switches()) {
      t.set(d.id, d.values, std::vector<double>(d.values.size(), w));
    }
    return t;
  }

  static SwitchTable uniform(const ExplanationGraph& graph) {
    SwitchTable t;
    for (const auto& d : graph.switches()) {
      t.set(d.id, d.values,
            std::vector<double>(d.values.size(), 1.0 / static_cast<double>(d.values.size())));
    }
    return t;
  }

  void set(Term id, std::vector<Term> values, std::vector<double> weights) {
    if (values.size() != weights.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "switch " + id.str() + ": value/weight length mismatch");
    }
    std::string key = id.str();
    Entry e{std::move(id), std::move(values), std::move(weights)};
    if (auto it = index_.find(key); it != index_.end()) {
      entries_[it->second] = std::move(e);
    } else {
      index_.emplace(std::move(key), entries_.size());
      entries_.push_back(std::move(e));
    }
  }

  /// Sets one (switch, value) weight, appending the value or switch when new.
  void set_weight(const Term& sw, const Term& value, double w) {
    const std::string key = sw.str();
    auto it = index_.find(key);
    if (it == index_.end()) {
      set(sw, {value}, {w});
      return;
    }
    Entry& e = entries_[it->second];
    const std::string vkey = value.str();
    for (std::size_t v = 0; v < e.values.size(); ++v) {
      if (e.values[v].str() == vkey) {
        e.weights[v] = w;
        return;
      }
    }
    e.values.push_back(value);
    e.weights.push_back(w);
  }

  const Entry* find(std::string_view canonical) const {
    auto it = index_.find(std::string(canonical));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  Entry* find(std::string_view canonical) {
    auto it = index_.find(std::string(canonical));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  /// Weight of a (switch, value) pair given as canonical strings.
  double at(std::string_view sw, std::string_view value) const {
    const Entry* e = find(sw);
    if (!e) throw Error(ErrorCode::kMissingParameter, "no entry for switch " + std::string(sw));
    for (std::size_t v = 0; v < e->values.size(); ++v) {
      if (e->values[v].str() == value) return e->weights[v];
    }
    throw Error(ErrorCode::kMissingParameter,
                "no entry for value " + std::string(value) + " of switch " + std::string(sw));
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Parameter tables: entries >= 0 and every row sums to 1 within `tol`.
  /// Pseudo-count tables: entries finite and >= 0.
  void validate(double tol = 1e-9) const {
    for (const auto& e : entries_) {
      double sum = 0.0;
      for (double w : e.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw Error(ErrorCode::kRange,
                      "switch " + e.id.str() + " has an invalid entry " + std::to_string(w));
        }
        sum += w;
      }
      if constexpr (std::is_same_v<Tag, ProbabilityTag>) {
        if (std::abs(sum - 1.0) > tol) {
          throw Error(ErrorCode::kRange, "probabilities of switch " + e.id.str() +
                                             " sum to " + std::to_string(sum));
        }
      }
    }
  }

  friend bool operator==(const SwitchTable& a, const SwitchTable& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const auto& x = a.entries_[i];
      const auto& y = b.entries_[i];
      if (!(x.id == y.id) || x.values != y.values || x.weights != y.weights) return false;
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParameterTable = SwitchTable<ProbabilityTag>;
using PseudoCountTable = SwitchTable<PseudoCountTag>;

/// Table weights laid out by a graph's switch/value indices.
struct DenseTable {
  std::vector<std::vector<double>> rows;

  double operator()(SwitchIndex s, ValueIndex v) const { return rows[s][v]; }
};

/// Aligns a table with the switch order of `graph`. Every declared
/// (switch, value) must be present, else `missing` is raised.
template <class Tag>
DenseTable resolve(const ExplanationGraph& graph, const SwitchTable<Tag>& table,
                   ErrorCode missing = ErrorCode::kMissingParameter) {
  DenseTable out;
  out.rows.reserve(graph.num_switches());
  for (const auto& d : graph.switches()) {
    const std::string key = d.id.str();
    const auto* e = table.find(key);
    if (!e) throw Error(missing, "no entry for switch " + key);
    std::vector<double> row(d.values.size());
    if (e->values == d.values) {
      row = e->weights;
    } else {
      for (std::size_t v = 0; v < d.values.size(); ++v) {
        const std::string vk = d.values[v].str();
        std::optional<double> w;
        for (std::size_t u = 0; u < e->values.size(); ++u) {
          if (e->values[u].str() == vk) w = e->weights[u];
        }
        if (!w) throw Error(missing, "no entry for value " + vk + " of switch " + key);
        row[v] = *w;
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Inverse of `resolve`: a table in the graph's switch order.
template <class Tag = ProbabilityTag>
SwitchTable<Tag> to_table(const ExplanationGraph& graph, const DenseTable& dense) {
  SwitchTable<Tag> t;
  for (std::size_t s = 0; s < graph.num_switches(); ++s) {
    const auto& d = graph.switch_decl(static_cast<SwitchIndex>(s));
    t.set(d.id, d.values, dense.rows[s]);
  }
  return t;
}

/// Dense log-parameters; log(0) is -inf.
inline DenseTable log_table(const DenseTable& probs) {
  DenseTable out = probs;
  for (auto& row : out.rows) {
    for (auto& p : row) p = std::log(p);
  }
  return out;
}

/// Normalizes `counts` in place to sum to one. Returns false (and leaves a
/// uniform row) when the total is zero.
inline bool normalize_row(std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (!(total > 0.0)) {
    for (auto& c : counts) c = 1.0 / static_cast<double>(counts.size());
    return false;
  }
  for (auto& c : counts) c /= total;
  return true;
}

}  // namespace explgraph
