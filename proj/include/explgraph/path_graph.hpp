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

// Probabilistic reachability over an undirected graph of switch-gated
// edges:
//
//   path(X,Y)   :- path(X,Y,[X]).
//   path(X,X,_).
//   path(X,Y,A) :- X \== Y, (d_e(X,Z) ; d_e(Z,X)), absent(Z,A), path(Z,Y,[Z|A]).
//
// Each edge d_e(u,v) is a switch over {on, off}. Different simple paths
// can share edges, so the explanations of a query overlap.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/params.hpp"
#include "explgraph/term.hpp"
#include "explgraph/text.hpp"

namespace explgraph {

using NodeId = std::int64_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double p = 0.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct PathQuery {
  NodeId from = 0;
  NodeId to = 0;
  friend bool operator==(const PathQuery&, const PathQuery&) = default;
};

class EdgeGraph {
 public:
  EdgeGraph() = default;

  void add_edge(NodeId u, NodeId v, double p) {
    if (u == v) throw Error(ErrorCode::kInvalidArgument, "self-loop on node " + std::to_string(u));
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kRange, "edge probability outside [0,1]");
    }
    for (const auto& e : edges_) {
      if (e.u == u && e.v == v) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate edge " + std::to_string(u) + " " + std::to_string(v));
      }
    }
    edges_.push_back(Edge{u, v, p});
    nodes_.insert(u);
    nodes_.insert(v);
  }

  void add_query(NodeId from, NodeId to) { queries_.push_back(PathQuery{from, to}); }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<PathQuery>& queries() const { return queries_; }
  const std::set<NodeId>& nodes() const { return nodes_; }
  bool has_node(NodeId n) const { return nodes_.count(n) > 0; }

  friend bool operator==(const EdgeGraph& a, const EdgeGraph& b) {
    return a.edges_ == b.edges_ && a.queries_ == b.queries_;
  }

 private:
  std::vector<Edge> edges_;
  std::vector<PathQuery> queries_;
  std::set<NodeId> nodes_;
};

inline Term edge_switch(NodeId u, NodeId v) {
  return Term::compound("d_e", {Term::integer(u), Term::integer(v)});
}

inline const std::vector<Term>& edge_values() {
  static const std::vector<Term> v{Term::symbol("on"), Term::symbol("off")};
  return v;
}

/// θ(d_e(u,v)) = (p, 1-p) for every edge.
inline ParameterTable edge_parameters(const EdgeGraph& g) {
  ParameterTable t;
  for (const auto& e : g.edges()) t.set(edge_switch(e.u, e.v), edge_values(), {e.p, 1.0 - e.p});
  return t;
}

/// The six-node example graph with the five training queries.
inline EdgeGraph fig5_edge_graph() {
  EdgeGraph g;
  g.add_edge(1, 2, 0.9);
  g.add_edge(2, 3, 0.8);
  g.add_edge(3, 4, 0.6);
  g.add_edge(1, 6, 0.7);
  g.add_edge(2, 6, 0.5);
  g.add_edge(6, 5, 0.4);
  g.add_edge(5, 3, 0.7);
  g.add_edge(5, 4, 0.2);
  g.add_query(1, 4);
  g.add_query(1, 3);
  g.add_query(2, 4);
  g.add_query(2, 5);
  g.add_query(3, 6);
  return g;
}

namespace detail {

class PathBuilder {
 public:
  PathBuilder(const EdgeGraph& eg, ExplanationGraph& out) : eg_(eg), out_(out) {
    for (const auto& e : eg.edges()) out.declare_switch(edge_switch(e.u, e.v), edge_values());
  }

  /// Root goal path(from,to); nullopt when there is no path.
  std::optional<GoalId> query(NodeId from, NodeId to) {
    for (NodeId n : {from, to}) {
      if (!eg_.has_node(n)) throw Error(ErrorCode::kLookup, "unknown node " + std::to_string(n));
    }
    const std::string label =
        Term::compound("path", {Term::integer(from), Term::integer(to)}).str();
    if (auto existing = out_.find_goal(label)) return existing;
    Body b;
    if (from != to) {
      auto sub = state(from, to, {from});
      if (!sub) return std::nullopt;
      b.subgoals.push_back(*sub);
    }
    const GoalId id = out_.add_goal(label);
    out_.add_body(id, std::move(b));
    return id;
  }

 private:
  // path(X,Y,A) with X != Y and A the sorted visited set.
  std::optional<GoalId> state(NodeId x, NodeId y, const std::vector<NodeId>& visited) {
    const auto key = std::tuple{x, y, visited};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Body> bodies;
    const auto step = [&](std::size_t e, NodeId z) {
      if (std::binary_search(visited.begin(), visited.end(), z)) return;
      Body b{{}, {SwitchInstance{static_cast<SwitchIndex>(e), 0, 1}}};
      if (z != y) {
        auto next = visited;
        next.insert(std::upper_bound(next.begin(), next.end(), z), z);
        auto sub = state(z, y, next);
        if (!sub) return;
        b.subgoals.push_back(*sub);
      }
      bodies.push_back(std::move(b));
    };
    const auto& edges = eg_.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].u == x) step(e, edges[e].v);
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].v == x) step(e, edges[e].u);
    }
    std::optional<GoalId> out;
    if (!bodies.empty()) {
      std::vector<Term> vs;
      for (NodeId n : visited) vs.push_back(Term::integer(n));
      const auto label = Term::compound(
          "path", {Term::integer(x), Term::integer(y), Term::list(std::move(vs))});
      out = out_.add_goal(label.str());
      for (auto& b : bodies) out_.add_body(*out, std::move(b));
    }
    memo_[key] = out;
    return out;
  }

  const EdgeGraph& eg_;
  ExplanationGraph& out_;
  std::map<std::tuple<NodeId, NodeId, std::vector<NodeId>>, std::optional<GoalId>> memo_;
};

}  // namespace detail

/// One graph holding every query; roots follow the query order and share
/// visited-state goals. Throws kNoPath naming the first query without a
/// path.
inline ExplanationGraph compile_path_queries(const EdgeGraph& g,
                                             std::span<const PathQuery> queries) {
  ExplanationGraph out;
  detail::PathBuilder b(g, out);
  for (const auto& q : queries) {
    const auto root = b.query(q.from, q.to);
    if (!root) {
      throw Error(ErrorCode::kNoPath, "no path from " + std::to_string(q.from) + " to " +
                                          std::to_string(q.to));
    }
    out.add_root(*root);
  }
  out.set_exclusiveness_hint(Exclusiveness::kOverlapping);
  out.validate();
  return out;
}

inline ExplanationGraph compile_path_graph(const EdgeGraph& g, NodeId from, NodeId to) {
  const PathQuery q{from, to};
  return compile_path_queries(g, std::span<const PathQuery>(&q, 1));
}

/// Node sequence of a simple-path explanation starting at `from`.
inline std::vector<NodeId> explanation_path(const EdgeGraph& g, const ExplanationGraph& graph,
                                            const Explanation& e, NodeId from) {
  std::vector<std::pair<NodeId, NodeId>> used;
  for (const auto& inst : e.instances()) {
    const auto& id = graph.switch_decl(inst.sw).id;
    if (id.name() != "d_e" || id.args().size() != 2 || inst.value != 0 || inst.count != 1) {
      throw Error(ErrorCode::kInvalidArgument, "not a simple-path explanation");
    }
    used.emplace_back(id.args()[0].value(), id.args()[1].value());
  }
  (void)g;
  std::vector<NodeId> path{from};
  std::vector<char> taken(used.size(), 0);
  for (std::size_t step = 0; step < used.size(); ++step) {
    const NodeId at = path.back();
    bool moved = false;
    for (std::size_t k = 0; k < used.size() && !moved; ++k) {
      if (taken[k]) continue;
      if (used[k].first == at || used[k].second == at) {
        taken[k] = 1;
        path.push_back(used[k].first == at ? used[k].second : used[k].first);
        moved = true;
      }
    }
    if (!moved) throw Error(ErrorCode::kInvalidArgument, "explanation edges do not form a path");
  }
  return path;
}

inline std::string path_str(const std::vector<NodeId>& path) {
  std::string out;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k) out += "-";
    out += std::to_string(path[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edge-graph file: `edge <u> <v> <p>` and `query <from> <to>` lines.

inline EdgeGraph parse_edge_graph(std::string_view content) {
  EdgeGraph g;
  std::size_t lineno = 0;
  for (const auto& raw : text::lines(content)) {
    ++lineno;
    const auto toks = text::split_ws(text::strip_comment(raw));
    if (toks.empty()) continue;
    try {
      if (toks[0] == "edge" && toks.size() == 4) {
        g.add_edge(text::parse_int(toks[1], lineno), text::parse_int(toks[2], lineno),
                   text::parse_double(toks[3], lineno));
      } else if (toks[0] == "query" && toks.size() == 3) {
        g.add_query(text::parse_int(toks[1], lineno), text::parse_int(toks[2], lineno));
      } else {
        throw text::at_line(ErrorCode::kSyntax, lineno,
                            "expected 'edge <u> <v> <p>' or 'query <from> <to>'");
      }
    } catch (const Error& e) {
      if (std::string_view(e.what()).find("line ") != std::string_view::npos) throw;
      throw text::at_line(e.code(), lineno, e.what());
    }
  }
  for (const auto& q : g.queries()) {
    for (NodeId n : {q.from, q.to}) {
      if (!g.has_node(n)) throw Error(ErrorCode::kLookup, "query names unknown node " + std::to_string(n));
    }
  }
  return g;
}

inline std::string emit_edge_graph(const EdgeGraph& g) {
  std::string out;
  for (const auto& e : g.edges()) {
    out += "edge " + std::to_string(e.u) + " " + std::to_string(e.v) + " " +
           text::format_double(e.p) + "\n";
  }
  for (const auto& q : g.queries()) {
    out += "query " + std::to_string(q.from) + " " + std::to_string(q.to) + "\n";
  }
  return out;
}

}  // namespace explgraph
