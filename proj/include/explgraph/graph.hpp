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
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/term.hpp"

namespace explgraph {

using SwitchIndex = std::uint32_t;
using ValueIndex = std::uint32_t;

struct GoalId {
  std::uint32_t index = 0;
  friend auto operator<=>(const GoalId&, const GoalId&) = default;
};

struct SwitchDecl {
  Term id;
  std::vector<Term> values;
};

/// One switch outcome together with how many iid trials produced it.
struct SwitchInstance {
  SwitchIndex sw = 0;
  ValueIndex value = 0;
  std::uint64_t count = 1;

  friend bool operator==(const SwitchInstance&, const SwitchInstance&) = default;
};

/// Multiset of switch instances, kept sorted by (switch, value) with merged
/// counts. Indices refer to the switch table of the owning graph.
class Explanation {
 public:
  Explanation() = default;

  void add(SwitchIndex sw, ValueIndex value, std::uint64_t count = 1) {
    if (count == 0) return;
    auto it = std::lower_bound(items_.begin(), items_.end(), std::pair{sw, value},
                               [](const SwitchInstance& a, const auto& key) {
                                 return std::pair{a.sw, a.value} < key;
                               });
    if (it != items_.end() && it->sw == sw && it->value == value) {
      it->count += count;
    } else {
      items_.insert(it, SwitchInstance{sw, value, count});
    }
  }

  void add(const SwitchInstance& inst, std::uint64_t times = 1) {
    add(inst.sw, inst.value, inst.count * times);
  }

  void merge(const Explanation& other, std::uint64_t times = 1) {
    for (const auto& inst : other.items_) add(inst, times);
  }

  std::uint64_t count(SwitchIndex sw, ValueIndex value) const {
    for (const auto& inst : items_) {
      if (inst.sw == sw && inst.value == value) return inst.count;
    }
    return 0;
  }

  const std::vector<SwitchInstance>& instances() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  friend bool operator==(const Explanation&, const Explanation&) = default;
  friend bool operator<(const Explanation& a, const Explanation& b) {
    return std::lexicographical_compare(
        a.items_.begin(), a.items_.end(), b.items_.begin(), b.items_.end(),
        [](const SwitchInstance& x, const SwitchInstance& y) {
          return std::tuple{x.sw, x.value, x.count} < std::tuple{y.sw, y.value, y.count};
        });
  }

 private:
  std::vector<SwitchInstance> items_;
};

struct Body {
  std::vector<GoalId> subgoals;
  std::vector<SwitchInstance> instances;
};

struct DefiningFormula {
  GoalId head;
  std::vector<Body> bodies;
};

/// Verdict of the exclusiveness diagnostic; also used as a hint that
/// frontends attach to graphs they build.
enum class Exclusiveness { kExclusive, kOverlapping, kUnknown };

/// Acyclic AND/OR graph of defining formulas `H <=> B_1 v ... v B_h`.
///
/// Goals are dense indices with unique display labels. The graph is built
/// incrementally, then `validate()` checks references and acyclicity and
/// caches a topological order (every goal after the goals it references).
/// Any mutation drops the validated state.
class ExplanationGraph {
 public:
  /// Declares a switch. Redeclaring a name with the identical value list
  /// returns the existing index; a conflicting list is an error.
  SwitchIndex declare_switch(Term id, std::vector<Term> values) {
    std::string key = id.str();
    if (auto it = switch_index_.find(key); it != switch_index_.end()) {
      if (switches_[it->second].values != values) {
        throw Error(ErrorCode::kInvalidArgument,
                    "switch " + key + " redeclared with different values");
      }
      return it->second;
    }
    if (values.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "switch " + key + " has no values");
    }
    std::unordered_map<std::string, ValueIndex> vmap;
    for (ValueIndex v = 0; v < values.size(); ++v) {
      if (!vmap.emplace(values[v].str(), v).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "switch " + key + " declares value " + values[v].str() + " twice");
      }
    }
    const auto idx = static_cast<SwitchIndex>(switches_.size());
    switches_.push_back(SwitchDecl{std::move(id), std::move(values)});
    value_index_.push_back(std::move(vmap));
    switch_index_.emplace(std::move(key), idx);
    validated_ = false;
    return idx;
  }

  std::optional<SwitchIndex> find_switch(std::string_view canonical) const {
    auto it = switch_index_.find(std::string(canonical));
    if (it == switch_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<ValueIndex> find_value(SwitchIndex sw, std::string_view canonical) const {
    const auto& m = value_index_.at(sw);
    auto it = m.find(std::string(canonical));
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  /// Convenience: instance for a declared (switch, value) pair by term.
  SwitchInstance instance(const Term& sw, const Term& value, std::uint64_t count = 1) const {
    auto s = find_switch(sw.str());
    if (!s) throw Error(ErrorCode::kLookup, "undeclared switch " + sw.str());
    auto v = find_value(*s, value.str());
    if (!v) {
      throw Error(ErrorCode::kUndeclaredValue,
                  "value " + value.str() + " not declared for switch " + sw.str());
    }
    return SwitchInstance{*s, *v, count};
  }

  GoalId add_goal(std::string label) {
    const GoalId id{static_cast<std::uint32_t>(formulas_.size())};
    if (!goal_index_.emplace(label, id.index).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate goal label " + label);
    }
    formulas_.push_back(DefiningFormula{id, {}});
    labels_.push_back(std::move(label));
    validated_ = false;
    return id;
  }

  std::optional<GoalId> find_goal(std::string_view label) const {
    auto it = goal_index_.find(std::string(label));
    if (it == goal_index_.end()) return std::nullopt;
    return GoalId{it->second};
  }

  GoalId goal(std::string_view label) const {
    auto g = find_goal(label);
    if (!g) throw Error(ErrorCode::kLookup, "no goal labelled " + std::string(label));
    return *g;
  }

  /// Appends a body; duplicate (switch, value) instances are merged.
  void add_body(GoalId head, Body body) {
    if (head.index >= formulas_.size()) {
      throw Error(ErrorCode::kDanglingReference,
                  "body head " + std::to_string(head.index) + " does not exist");
    }
    Explanation merged;
    for (const auto& inst : body.instances) {
      if (inst.count == 0) {
        throw Error(ErrorCode::kInvalidArgument, "switch instance multiplicity must be >= 1");
      }
      merged.add(inst);
    }
    body.instances = merged.instances();
    formulas_[head.index].bodies.push_back(std::move(body));
    validated_ = false;
  }

  void add_root(GoalId g) {
    roots_.push_back(g);
    validated_ = false;
  }

  void set_exclusiveness_hint(Exclusiveness e) { hint_ = e; }
  Exclusiveness exclusiveness_hint() const { return hint_; }

  /// Checks references and acyclicity and returns the topological order.
  /// Idempotent.
  const std::vector<GoalId>& validate() {
    if (validated_) return topo_;
    const std::size_t n = formulas_.size();
    for (const auto& f : formulas_) {
      if (f.bodies.empty()) {
        throw Error(ErrorCode::kEmptyDefinition,
                    "goal " + labels_[f.head.index] + " has no bodies");
      }
      for (const auto& b : f.bodies) {
        for (const auto& g : b.subgoals) {
          if (g.index >= n) {
            throw Error(ErrorCode::kDanglingReference,
                        "goal " + labels_[f.head.index] + " references missing goal " +
                            std::to_string(g.index));
          }
        }
        for (const auto& inst : b.instances) {
          if (inst.sw >= switches_.size()) {
            throw Error(ErrorCode::kDanglingReference,
                        "goal " + labels_[f.head.index] + " references missing switch " +
                            std::to_string(inst.sw));
          }
          if (inst.value >= switches_[inst.sw].values.size()) {
            throw Error(ErrorCode::kUndeclaredValue,
                        "goal " + labels_[f.head.index] + " uses undeclared value " +
                            std::to_string(inst.value) + " of switch " +
                            switches_[inst.sw].id.str());
          }
        }
      }
    }
    for (const auto& r : roots_) {
      if (r.index >= n) {
        throw Error(ErrorCode::kDanglingReference,
                    "root " + std::to_string(r.index) + " does not exist");
      }
    }

    // Iterative DFS; post-order gives children before parents.
    enum : std::uint8_t { kWhite, kGrey, kBlack };
    std::vector<std::uint8_t> color(n, kWhite);
    std::vector<GoalId> order;
    order.reserve(n);
    struct Frame {
      std::uint32_t goal;
      std::size_t body;
      std::size_t sub;
    };
    std::vector<Frame> stack;
    for (std::uint32_t start = 0; start < n; ++start) {
      if (color[start] != kWhite) continue;
      stack.push_back({start, 0, 0});
      color[start] = kGrey;
      while (!stack.empty()) {
        Frame& fr = stack.back();
        const auto& bodies = formulas_[fr.goal].bodies;
        if (fr.body >= bodies.size()) {
          color[fr.goal] = kBlack;
          order.push_back(GoalId{fr.goal});
          stack.pop_back();
          continue;
        }
        const auto& subs = bodies[fr.body].subgoals;
        if (fr.sub >= subs.size()) {
          ++fr.body;
          fr.sub = 0;
          continue;
        }
        const std::uint32_t next = subs[fr.sub++].index;
        if (color[next] == kGrey) {
          std::string witness;
          auto it = std::find_if(stack.begin(), stack.end(),
                                 [&](const Frame& f) { return f.goal == next; });
          for (; it != stack.end(); ++it) witness += labels_[it->goal] + " -> ";
          witness += labels_[next];
          throw Error(ErrorCode::kCyclicGraph, "cycle " + witness);
        }
        if (color[next] == kWhite) {
          color[next] = kGrey;
          stack.push_back({next, 0, 0});
        }
      }
    }
    topo_ = std::move(order);
    validated_ = true;
    return topo_;
  }

  bool validated() const { return validated_; }

  void require_validated() const {
    if (!validated_) {
      throw Error(ErrorCode::kInvalidArgument, "graph must be validated first");
    }
  }

  const std::vector<GoalId>& topo_order() const {
    require_validated();
    return topo_;
  }

  const std::vector<SwitchDecl>& switches() const { return switches_; }
  const SwitchDecl& switch_decl(SwitchIndex s) const { return switches_.at(s); }
  const std::vector<DefiningFormula>& formulas() const { return formulas_; }
  const DefiningFormula& formula(GoalId g) const { return formulas_.at(g.index); }
  const std::string& label(GoalId g) const { return labels_.at(g.index); }
  const std::vector<GoalId>& roots() const { return roots_; }
  std::size_t num_goals() const { return formulas_.size(); }
  std::size_t num_switches() const { return switches_.size(); }

  std::string instance_str(const SwitchInstance& inst) const {
    const auto& d = switches_.at(inst.sw);
    std::string s = d.id.str() + "=" + d.values.at(inst.value).str();
    if (inst.count != 1) s += "*" + std::to_string(inst.count);
    return s;
  }

  /// Canonical rendering `[sw=val,sw=val*k]`, instances sorted by text.
  std::string explanation_str(const Explanation& e) const {
    std::vector<std::string> parts;
    parts.reserve(e.size());
    for (const auto& inst : e.instances()) parts.push_back(instance_str(inst));
    std::sort(parts.begin(), parts.end());
    std::string out = "[";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += ',';
      out += parts[i];
    }
    out += ']';
    return out;
  }

 private:
  std::vector<SwitchDecl> switches_;
  std::vector<std::unordered_map<std::string, ValueIndex>> value_index_;
  std::unordered_map<std::string, SwitchIndex> switch_index_;
  std::vector<DefiningFormula> formulas_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> goal_index_;
  std::vector<GoalId> roots_;
  std::vector<GoalId> topo_;
  bool validated_ = false;
  Exclusiveness hint_ = Exclusiveness::kUnknown;
};

/// Free-function form of `ExplanationGraph::validate`.
inline const std::vector<GoalId>& validate_graph(ExplanationGraph& graph) {
  return graph.validate();
}

/// Combines several graphs into one. Switches are unified by canonical name
/// (value lists must agree); goal labels are prefixed with `<k>/` and roots
/// are concatenated in input order. The result is validated.
inline ExplanationGraph disjoint_union(std::span<const ExplanationGraph> parts) {
  ExplanationGraph out;
  Exclusiveness hint = Exclusiveness::kExclusive;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& g = parts[k];
    std::vector<SwitchIndex> smap;
    smap.reserve(g.num_switches());
    for (const auto& d : g.switches()) smap.push_back(out.declare_switch(d.id, d.values));
    const std::string prefix = std::to_string(k) + "/";
    const auto base = static_cast<std::uint32_t>(out.num_goals());
    for (std::size_t i = 0; i < g.num_goals(); ++i) {
      out.add_goal(prefix + g.label(GoalId{static_cast<std::uint32_t>(i)}));
    }
    for (const auto& f : g.formulas()) {
      for (const auto& b : f.bodies) {
        Body nb;
        nb.subgoals.reserve(b.subgoals.size());
        for (const auto& s : b.subgoals) nb.subgoals.push_back(GoalId{s.index + base});
        nb.instances.reserve(b.instances.size());
        for (const auto& inst : b.instances) {
          nb.instances.push_back(SwitchInstance{smap[inst.sw], inst.value, inst.count});
        }
        out.add_body(GoalId{f.head.index + base}, std::move(nb));
      }
    }
    for (const auto& r : g.roots()) out.add_root(GoalId{r.index + base});
    if (g.exclusiveness_hint() == Exclusiveness::kOverlapping) {
      hint = Exclusiveness::kOverlapping;
    } else if (g.exclusiveness_hint() == Exclusiveness::kUnknown &&
               hint == Exclusiveness::kExclusive) {
      hint = Exclusiveness::kUnknown;
    }
  }
  out.set_exclusiveness_hint(parts.empty() ? Exclusiveness::kUnknown : hint);
  out.validate();
  return out;
}

}  // namespace explgraph
