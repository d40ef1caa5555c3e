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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/inference.hpp"
#include "explgraph/params.hpp"

namespace explgraph {

enum class Method { kEm, kMap, kVt };
enum class InitKind { kUniform, kJitteredUniform };
enum class Termination { kFixedPoint, kTolReached, kMaxIter };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kEm: return "em";
    case Method::kMap: return "map";
    case Method::kVt: return "vt";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "em") return Method::kEm;
  if (s == "map") return Method::kMap;
  if (s == "vt") return Method::kVt;
  throw Error(ErrorCode::kInvalidArgument, "unknown learning method '" + std::string(s) + "'");
}

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kFixedPoint: return "fixed_point";
    case Termination::kTolReached: return "tol_reached";
    case Termination::kMaxIter: return "max_iter";
  }
  return "?";
}

/// Pseudo count used when a MAP/VT config carries no table.
inline constexpr double kDefaultPseudoCount = 1.0;

struct LearnConfig {
  Method method = Method::kVt;
  /// Empty: every (switch, value) gets kDefaultPseudoCount. Ignored by EM.
  PseudoCountTable pseudo_counts;
  double tol = 1e-6;
  int max_iter = 1000;
  int restarts = 1;
  std::uint64_t seed = 0;
  InitKind init = InitKind::kJitteredUniform;
  double jitter = 0.01;
  TieBreak tie_break = TieBreak::kFirst;
};

struct LearnReport {
  ParameterTable final_theta;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  Termination termination = Termination::kMaxIter;
  std::size_t best_restart_index = 0;
  /// VT only: final Viterbi explanation of each goal, aligned with `goals`.
  std::vector<Explanation> per_goal_viterbi;
  /// Final objective and iteration count of every restart.
  std::vector<double> restart_objectives;
  std::vector<int> restart_iterations;
  /// Switches no goal can reach; their parameters come from the prior alone.
  std::vector<std::string> degenerate_switches;
  std::vector<std::string> warnings;
  double learn_seconds = 0.0;
};

/// Expected occurrence counts eta_{i,v} aligned with a graph.
struct ExpectedCounts {
  DenseTable counts;
  /// Log inside probability of each observed goal.
  std::vector<double> goal_log_prob;
};

namespace detail {

/// splitmix64 finalizer; used to derive one RNG stream per restart.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  return mix64(seed ^ mix64(static_cast<std::uint64_t>(restart) + 1));
}

inline DenseTable zeros_like(const ExplanationGraph& graph) {
  DenseTable t;
  t.rows.reserve(graph.num_switches());
  for (const auto& d : graph.switches()) t.rows.emplace_back(d.values.size(), 0.0);
  return t;
}

inline DenseTable initial_theta(const ExplanationGraph& graph, const LearnConfig& cfg,
                                std::size_t restart) {
  DenseTable t = zeros_like(graph);
  std::mt19937_64 rng(restart_seed(cfg.seed, restart));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto& row : t.rows) {
    for (auto& w : row) {
      w = 1.0;
      if (cfg.init == InitKind::kJitteredUniform) w += cfg.jitter * unif(rng);
    }
    normalize_row(row);
  }
  return t;
}

inline DenseTable pseudo_counts_for(const ExplanationGraph& graph, const LearnConfig& cfg) {
  if (cfg.method == Method::kEm) return zeros_like(graph);
  DenseTable delta = cfg.pseudo_counts.empty()
                         ? resolve(graph, PseudoCountTable::filled(graph, kDefaultPseudoCount))
                         : resolve(graph, cfg.pseudo_counts, ErrorCode::kInvalidArgument);
  for (std::size_t s = 0; s < delta.rows.size(); ++s) {
    for (double d : delta.rows[s]) {
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(method_name(cfg.method)) +
                        " requires positive pseudo counts; switch " +
                        graph.switch_decl(static_cast<SwitchIndex>(s)).id.str() + " has " +
                        std::to_string(d));
      }
    }
  }
  return delta;
}

/// Switches occurring in some body reachable from `goals`.
inline std::vector<char> reachable_switches(const ExplanationGraph& graph,
                                            std::span<const GoalId> goals) {
  std::vector<char> goal_seen(graph.num_goals(), 0);
  std::vector<char> sw(graph.num_switches(), 0);
  std::vector<std::uint32_t> stack;
  for (const auto g : goals) {
    if (!goal_seen[g.index]) {
      goal_seen[g.index] = 1;
      stack.push_back(g.index);
    }
  }
  while (!stack.empty()) {
    const auto g = stack.back();
    stack.pop_back();
    for (const auto& b : graph.formulas()[g].bodies) {
      for (const auto& inst : b.instances) sw[inst.sw] = 1;
      for (const auto& s : b.subgoals) {
        if (!goal_seen[s.index]) {
          goal_seen[s.index] = 1;
          stack.push_back(s.index);
        }
      }
    }
  }
  return sw;
}

inline void check_goals(const ExplanationGraph& graph, std::span<const GoalId> goals) {
  graph.require_validated();
  if (goals.empty()) throw Error(ErrorCode::kInvalidArgument, "no observed goals");
  for (const auto g : goals) {
    if (g.index >= graph.num_goals()) {
      throw Error(ErrorCode::kLookup, "observed goal " + std::to_string(g.index) + " missing");
    }
  }
}

/// sum over (i,v) of weight * log theta with 0 * log 0 = 0.
inline double weighted_log(double weight, double log_theta) {
  return weight == 0.0 ? 0.0 : weight * log_theta;
}

}  // namespace detail

/// Expected switch counts under the posterior given each observed goal.
///
/// One inside pass and one top-down pass. The top-down pass carries, per
/// goal H, the expected number of times H is used (outside(H)*inside(H));
/// each body of H receives that mass times its share exp(b - inside(H)).
inline ExpectedCounts expected_counts_log(const ExplanationGraph& graph,
                                          std::span<const GoalId> goals,
                                          const DenseTable& log_theta) {
  detail::check_goals(graph, goals);
  const InsideTable in = inside_log(graph, log_theta);
  ExpectedCounts out;
  out.counts = detail::zeros_like(graph);
  std::vector<double> usage(graph.num_goals(), 0.0);
  for (const auto g : goals) {
    const double lp = in.log_inside[g.index];
    if (lp == kNegInf) {
      throw Error(ErrorCode::kZeroEvidence,
                  "goal " + graph.label(g) + " has probability 0 under the parameters");
    }
    out.goal_log_prob.push_back(lp);
    usage[g.index] += 1.0;
  }
  const auto& topo = graph.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const GoalId h = *it;
    const double mass = usage[h.index];
    if (mass == 0.0) continue;
    const double lh = in.log_inside[h.index];
    for (const auto& b : graph.formula(h).bodies) {
      double lb = detail::body_log_factor(b, log_theta);
      for (const auto& s : b.subgoals) {
        if (lb == kNegInf) break;
        lb += in.log_inside[s.index];
      }
      if (lb == kNegInf) continue;
      const double w = mass * std::exp(lb - lh);
      for (const auto& inst : b.instances) {
        out.counts.rows[inst.sw][inst.value] += w * static_cast<double>(inst.count);
      }
      for (const auto& s : b.subgoals) usage[s.index] += w;
    }
  }
  return out;
}

inline ExpectedCounts expected_counts(const ExplanationGraph& graph,
                                      std::span<const GoalId> goals,
                                      const ParameterTable& theta) {
  return expected_counts_log(graph, goals, log_table(resolve(graph, theta)));
}

/// Which (i,v) pairs carry the prior term of the VT objective.
enum class VtPriorRange {
  /// Only pairs occurring in some Viterbi explanation.
  kViterbiSupport,
  /// Every declared pair; the form under which coordinate ascent is monotone.
  kAll,
};

/// L_VT = sum_{i,v} (sum_t sigma_{i,v}(e_t*) + delta_{i,v}) log theta_{i,v}.
inline double vt_objective(const DenseTable& sigma, const DenseTable& delta,
                           const DenseTable& log_theta, VtPriorRange range) {
  double total = 0.0;
  for (std::size_t s = 0; s < sigma.rows.size(); ++s) {
    for (std::size_t v = 0; v < sigma.rows[s].size(); ++v) {
      const double c = sigma.rows[s][v];
      if (range == VtPriorRange::kViterbiSupport && c == 0.0) continue;
      total += detail::weighted_log(c + delta.rows[s][v], log_theta.rows[s][v]);
    }
  }
  return total;
}

/// Prior term sum delta log theta of L_MAP.
inline double map_prior_term(const DenseTable& delta, const DenseTable& log_theta) {
  double total = 0.0;
  for (std::size_t s = 0; s < delta.rows.size(); ++s) {
    for (std::size_t v = 0; v < delta.rows[s].size(); ++v) {
      total += detail::weighted_log(delta.rows[s][v], log_theta.rows[s][v]);
    }
  }
  return total;
}

namespace detail {

inline DenseTable viterbi_counts(const ExplanationGraph& graph,
                                 std::span<const Explanation> expls) {
  DenseTable sigma = zeros_like(graph);
  for (const auto& e : expls) {
    for (const auto& inst : e.instances()) {
      sigma.rows[inst.sw][inst.value] += static_cast<double>(inst.count);
    }
  }
  return sigma;
}

inline std::vector<Explanation> viterbi_all(const ExplanationGraph& graph,
                                            std::span<const GoalId> goals,
                                            const DenseTable& log_theta, TieBreak tie) {
  const ViterbiTable table = viterbi_table(graph, log_theta, tie);
  std::vector<Explanation> out;
  out.reserve(goals.size());
  for (const auto g : goals) out.push_back(extract_viterbi(graph, table, g).explanation);
  return out;
}

}  // namespace detail

/// L_EM, L_MAP or L_VT at `theta`. For VT the Viterbi explanations are
/// recomputed under `theta`; `delta` is ignored by EM.
inline double objective(Method method, const ExplanationGraph& graph,
                        std::span<const GoalId> goals, const ParameterTable& theta,
                        const PseudoCountTable& delta,
                        VtPriorRange range = VtPriorRange::kViterbiSupport,
                        TieBreak tie = TieBreak::kFirst) {
  detail::check_goals(graph, goals);
  const DenseTable log_theta = log_table(resolve(graph, theta));
  const DenseTable d = method == Method::kEm ? detail::zeros_like(graph)
                                             : resolve(graph, delta, ErrorCode::kInvalidArgument);
  if (method == Method::kVt) {
    const auto expl = detail::viterbi_all(graph, goals, log_theta, tie);
    return vt_objective(detail::viterbi_counts(graph, expl), d, log_theta, range);
  }
  const InsideTable in = inside_log(graph, log_theta);
  double l = 0.0;
  for (const auto g : goals) {
    if (in.log_inside[g.index] == kNegInf) {
      throw Error(ErrorCode::kZeroEvidence, "goal " + graph.label(g) + " has probability 0");
    }
    l += in.log_inside[g.index];
  }
  if (method == Method::kMap) l += map_prior_term(d, log_theta);
  return l;
}

namespace detail {

struct RestartOutcome {
  DenseTable theta;
  std::vector<double> trace;
  int iterations = 0;
  Termination termination = Termination::kMaxIter;
  std::vector<Explanation> viterbi;
};

inline void note_monotonicity(const std::vector<double>& trace, std::size_t restart,
                              std::vector<std::string>& warnings) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] < trace[i - 1] - 1e-12) {
      warnings.push_back("restart " + std::to_string(restart) + ": objective decreased at step " +
                         std::to_string(i));
      return;
    }
  }
}

/// M-step: theta_{i,v} proportional to counts + delta. Unreachable switches
/// come from delta alone (uniform when that is zero).
inline DenseTable m_step(const DenseTable& counts, const DenseTable& delta) {
  DenseTable theta = counts;
  for (std::size_t s = 0; s < theta.rows.size(); ++s) {
    for (std::size_t v = 0; v < theta.rows[s].size(); ++v) {
      theta.rows[s][v] += delta.rows[s][v];
    }
    normalize_row(theta.rows[s]);
  }
  return theta;
}

inline double em_objective(Method method, const ExpectedCounts& ec, const DenseTable& delta,
                           const DenseTable& log_theta) {
  double l = 0.0;
  for (double lp : ec.goal_log_prob) l += lp;
  if (method == Method::kMap) l += map_prior_term(delta, log_theta);
  return l;
}

inline RestartOutcome run_em(const ExplanationGraph& graph, std::span<const GoalId> goals,
                             const LearnConfig& cfg, const DenseTable& delta,
                             DenseTable theta) {
  RestartOutcome r;
  DenseTable log_theta = log_table(theta);
  ExpectedCounts ec = expected_counts_log(graph, goals, log_theta);
  double prev = em_objective(cfg.method, ec, delta, log_theta);
  r.trace.push_back(prev);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    theta = m_step(ec.counts, delta);
    log_theta = log_table(theta);
    ec = expected_counts_log(graph, goals, log_theta);
    const double cur = em_objective(cfg.method, ec, delta, log_theta);
    r.trace.push_back(cur);
    r.iterations = it;
    if (std::abs(cur - prev) <= cfg.tol * std::abs(prev)) {
      r.termination = Termination::kTolReached;
      break;
    }
    prev = cur;
  }
  r.theta = std::move(theta);
  return r;
}

inline RestartOutcome run_vt(const ExplanationGraph& graph, std::span<const GoalId> goals,
                             const LearnConfig& cfg, const DenseTable& delta,
                             DenseTable theta) {
  RestartOutcome r;
  DenseTable log_theta = log_table(theta);
  auto expl = viterbi_all(graph, goals, log_theta, cfg.tie_break);
  DenseTable sigma = viterbi_counts(graph, expl);
  r.trace.push_back(vt_objective(sigma, delta, log_theta, VtPriorRange::kAll));
  for (int it = 1; it <= cfg.max_iter; ++it) {
    theta = m_step(sigma, delta);
    log_theta = log_table(theta);
    auto next = viterbi_all(graph, goals, log_theta, cfg.tie_break);
    sigma = viterbi_counts(graph, next);
    r.trace.push_back(vt_objective(sigma, delta, log_theta, VtPriorRange::kAll));
    r.iterations = it;
    const bool same = next == expl;
    expl = std::move(next);
    if (same) {
      r.termination = Termination::kFixedPoint;
      break;
    }
  }
  r.theta = std::move(theta);
  r.viterbi = std::move(expl);
  return r;
}

inline LearnReport run_restarts(const ExplanationGraph& graph, std::span<const GoalId> goals,
                                const LearnConfig& cfg) {
  check_goals(graph, goals);
  if (cfg.restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  if (cfg.max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be >= 1");
  if (!(cfg.tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const DenseTable delta = pseudo_counts_for(graph, cfg);

  LearnReport report;
  const auto reach = reachable_switches(graph, goals);
  for (std::size_t s = 0; s < reach.size(); ++s) {
    if (!reach[s]) {
      report.degenerate_switches.push_back(
          graph.switch_decl(static_cast<SwitchIndex>(s)).id.str());
    }
  }
  if (cfg.method != Method::kVt && graph.exclusiveness_hint() != Exclusiveness::kExclusive) {
    report.warnings.emplace_back(
        "graph is not known to satisfy exclusiveness; inside values are scores, not "
        "probabilities");
  }

  std::optional<RestartOutcome> best;
  for (int k = 0; k < cfg.restarts; ++k) {
    DenseTable init = initial_theta(graph, cfg, static_cast<std::size_t>(k));
    RestartOutcome out = cfg.method == Method::kVt ? run_vt(graph, goals, cfg, delta, init)
                                                   : run_em(graph, goals, cfg, delta, init);
    note_monotonicity(out.trace, static_cast<std::size_t>(k), report.warnings);
    report.restart_objectives.push_back(out.trace.back());
    report.restart_iterations.push_back(out.iterations);
    if (!best || out.trace.back() > best->trace.back()) {
      best = std::move(out);
      report.best_restart_index = static_cast<std::size_t>(k);
    }
  }
  report.final_theta = to_table(graph, best->theta);
  report.objective_trace = std::move(best->trace);
  report.iterations = best->iterations;
  report.termination = best->termination;
  report.converged = best->termination != Termination::kMaxIter;
  report.per_goal_viterbi = std::move(best->viterbi);
  report.learn_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace detail

/// EM (zero pseudo counts) or MAP estimation by iterated expected counts.
/// Stops when the relative objective change falls to `tol`.
inline LearnReport em_map_learn(const ExplanationGraph& graph, std::span<const GoalId> goals,
                                const LearnConfig& config) {
  if (config.method == Method::kVt) {
    throw Error(ErrorCode::kInvalidArgument, "em_map_learn needs method em or map");
  }
  return detail::run_restarts(graph, goals, config);
}

/// Viterbi training: alternate per-goal Viterbi explanations and
/// theta proportional to (Viterbi counts + delta) until no explanation changes.
inline LearnReport vt_learn(const ExplanationGraph& graph, std::span<const GoalId> goals,
                            const LearnConfig& config) {
  if (config.method != Method::kVt) {
    throw Error(ErrorCode::kInvalidArgument, "vt_learn needs method vt");
  }
  return detail::run_restarts(graph, goals, config);
}

inline LearnReport learn(const ExplanationGraph& graph, std::span<const GoalId> goals,
                         const LearnConfig& config) {
  return config.method == Method::kVt ? vt_learn(graph, goals, config)
                                      : em_map_learn(graph, goals, config);
}

}  // namespace explgraph
