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

// Cross-validation harness and the six-node reachability demo session.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/grammar.hpp"
#include "explgraph/inference.hpp"
#include "explgraph/learning.hpp"
#include "explgraph/metrics.hpp"
#include "explgraph/nbh.hpp"
#include "explgraph/parse.hpp"
#include "explgraph/path_graph.hpp"

namespace explgraph {

enum class Task { kPcfg, kPlcg, kNbh };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::kPcfg: return "pcfg";
    case Task::kPlcg: return "plcg";
    case Task::kNbh: return "nbh";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  if (s == "pcfg") return Task::kPcfg;
  if (s == "plcg") return Task::kPlcg;
  if (s == "nbh") return Task::kNbh;
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(s) + "'");
}

/// Grammar tasks learn from the yields of `treebank` and score Viterbi
/// parses of held-out sentences against the reference trees. The nbh task
/// learns from labeled rows and scores classification accuracy.
struct ExperimentConfig {
  Task task = Task::kPcfg;
  LearnConfig learn;
  /// Uniform pseudo count used when `learn.pseudo_counts` is empty.
  double delta = kDefaultPseudoCount;
  std::size_t folds = 8;
  /// Seeds the fold shuffle; learning uses `learn.seed`.
  std::uint64_t fold_seed = 0;

  Grammar grammar;
  std::vector<ParseTree> treebank;

  NbhSpec nbh;
  std::vector<DataRow> rows;
};

struct FoldResult {
  std::vector<std::size_t> test_items;
  std::size_t train_size = 0;
  MetricsReport metrics;
  double accuracy = 0.0;
  int iterations = 0;
  Termination termination = Termination::kMaxIter;
  double learn_seconds = 0.0;
  double total_seconds = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double sd = 0.0;
};

/// Mean and sample standard deviation (n - 1 denominator).
inline Aggregate aggregate(std::span<const double> xs) {
  Aggregate a;
  if (xs.empty()) return a;
  a.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return a;
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw Error(ErrorCode::kInvalidArgument, "median of nothing");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

struct ExperimentReport {
  Task task = Task::kPcfg;
  Method method = Method::kVt;
  std::vector<FoldResult> folds;
  Aggregate lt, bt, zero_cb, accuracy, iterations, learn_seconds;
};

/// Shuffles 0..n-1 with `seed` and cuts the result into `k` contiguous
/// blocks whose sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t k,
                                                            std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  if (k > n) {
    throw Error(ErrorCode::kInvalidArgument, std::to_string(k) + " folds for " +
                                                 std::to_string(n) + " items");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t lo = f * n / k, hi = (f + 1) * n / k;
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(lo),
                  perm.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

namespace detail {

inline LearnConfig fold_learn_config(const ExperimentConfig& cfg, const ExplanationGraph& graph) {
  LearnConfig lc = cfg.learn;
  if (lc.pseudo_counts.empty() && lc.method != Method::kEm) {
    lc.pseudo_counts = PseudoCountTable::filled(graph, cfg.delta);
  }
  return lc;
}

inline void run_grammar_fold(const ExperimentConfig& cfg, const std::vector<std::size_t>& test,
                             FoldResult& out) {
  const ParseMode mode = cfg.task == Task::kPcfg ? ParseMode::kPcfg : ParseMode::kPlcg;
  std::vector<char> held(cfg.treebank.size(), 0);
  for (auto i : test) held[i] = 1;
  std::vector<Sentence> train;
  for (std::size_t i = 0; i < cfg.treebank.size(); ++i) {
    if (!held[i]) train.push_back(cfg.treebank[i].yield());
  }
  out.train_size = train.size();
  const auto charts = compile_corpus(cfg.grammar, train, mode);
  const auto graph = corpus_graph(cfg.grammar, charts, mode);
  const auto report = learn(graph, graph.roots(), fold_learn_config(cfg, graph));
  out.iterations = report.iterations;
  out.termination = report.termination;
  out.learn_seconds = report.learn_seconds;

  std::vector<ParseTree> predicted, reference;
  for (auto i : test) {
    const auto& ref = cfg.treebank[i];
    const auto chart = compile_sentence(cfg.grammar, ref.yield(), mode);
    predicted.push_back(viterbi_parse(cfg.grammar, chart, report.final_theta, cfg.learn.tie_break).tree);
    reference.push_back(ref);
  }
  out.metrics = metrics(predicted, reference);
}

inline void run_nbh_fold(const ExperimentConfig& cfg, const std::vector<std::size_t>& test,
                         FoldResult& out) {
  std::vector<char> held(cfg.rows.size(), 0);
  for (auto i : test) held[i] = 1;
  std::vector<DataRow> train;
  for (std::size_t i = 0; i < cfg.rows.size(); ++i) {
    if (!held[i]) train.push_back(cfg.rows[i]);
  }
  out.train_size = train.size();
  auto graph = compile_nbh_dataset(cfg.nbh, train);
  graph.validate();
  const auto report = learn(graph, graph.roots(), fold_learn_config(cfg, graph));
  out.iterations = report.iterations;
  out.termination = report.termination;
  out.learn_seconds = report.learn_seconds;
  std::size_t correct = 0;
  for (auto i : test) {
    DataRow r = cfg.rows[i];
    const std::string truth = *r.cls;
    r.cls.reset();
    correct += nbh_classify(cfg.nbh, report.final_theta, r).label == truth;
  }
  out.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace detail

/// k-fold cross validation. Errors raised inside a fold keep their code
/// and gain a "fold <k>" prefix.
inline ExperimentReport cv_run(const ExperimentConfig& cfg) {
  std::size_t n = 0;
  if (cfg.task == Task::kNbh) {
    cfg.nbh.validate();
    for (std::size_t i = 0; i < cfg.rows.size(); ++i) {
      validate_row(cfg.nbh, cfg.rows[i]);
      if (!cfg.rows[i].cls) {
        throw Error(ErrorCode::kInvalidRow, "row " + std::to_string(i + 1) + " has no class");
      }
    }
    n = cfg.rows.size();
  } else {
    for (const auto& t : cfg.treebank) tree_rules(cfg.grammar, t);
    n = cfg.treebank.size();
  }
  const auto parts = fold_partition(n, cfg.folds, cfg.fold_seed);

  ExperimentReport rep;
  rep.task = cfg.task;
  rep.method = cfg.learn.method;
  for (std::size_t f = 0; f < parts.size(); ++f) {
    FoldResult fr;
    fr.test_items = parts[f];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (cfg.task == Task::kNbh) {
        detail::run_nbh_fold(cfg, parts[f], fr);
      } else {
        detail::run_grammar_fold(cfg, parts[f], fr);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(f + 1) + ": " + e.what());
    }
    fr.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.folds.push_back(std::move(fr));
  }

  const auto collect = [&](auto get) {
    std::vector<double> xs;
    for (const auto& f : rep.folds) xs.push_back(get(f));
    return aggregate(xs);
  };
  rep.lt = collect([](const FoldResult& f) { return f.metrics.lt; });
  rep.bt = collect([](const FoldResult& f) { return f.metrics.bt; });
  rep.zero_cb = collect([](const FoldResult& f) { return f.metrics.zero_cb; });
  rep.accuracy = collect([](const FoldResult& f) { return f.accuracy; });
  rep.iterations = collect([](const FoldResult& f) { return static_cast<double>(f.iterations); });
  rep.learn_seconds = collect([](const FoldResult& f) { return f.learn_seconds; });
  return rep;
}

inline std::string emit_experiment_report(const ExperimentReport& r) {
  char buf[256];
  std::string out;
  out += std::string("task ") + task_name(r.task) + "\n";
  out += std::string("method ") + method_name(r.method) + "\n";
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    const auto& x = r.folds[f];
    if (r.task == Task::kNbh) {
      std::snprintf(buf, sizeof buf, "fold %zu test %zu train %zu accuracy %.4f", f + 1,
                    x.test_items.size(), x.train_size, x.accuracy);
    } else {
      std::snprintf(buf, sizeof buf, "fold %zu test %zu train %zu lt %.4f bt %.4f 0cb %.4f",
                    f + 1, x.test_items.size(), x.train_size, x.metrics.lt, x.metrics.bt,
                    x.metrics.zero_cb);
    }
    out += buf;
    std::snprintf(buf, sizeof buf, " iterations %d %s learn_s %.6f total_s %.6f\n", x.iterations,
                  termination_name(x.termination), x.learn_seconds, x.total_seconds);
    out += buf;
  }
  const auto line = [&](const char* name, const Aggregate& a) {
    std::snprintf(buf, sizeof buf, "%s mean %.6f sd %.6f\n", name, a.mean, a.sd);
    out += buf;
  };
  if (r.task == Task::kNbh) {
    line("accuracy", r.accuracy);
  } else {
    line("lt", r.lt);
    line("bt", r.bt);
    line("0cb", r.zero_cb);
  }
  line("iterations", r.iterations);
  line("learn_seconds", r.learn_seconds);
  return out;
}

// ---------------------------------------------------------------------------
// Six-node reachability session: Viterbi before learning, Viterbi training
// on the five queries, Viterbi after learning.

inline constexpr std::string_view kSessionPrePath = "1-2-3-4";
inline constexpr std::string_view kSessionPostPath = "1-6-5-4";

struct SessionResult {
  double pre_prob = 0.0;
  std::string pre_path;
  std::string pre_explanation;
  double post_prob = 0.0;
  std::string post_path;
  std::string post_explanation;
  LearnReport learn;
  std::vector<std::string> transcript;
  /// Checks that did not hold; empty when the session reproduces the
  /// expected paths and pre-learning probability.
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Learning uses uniform initial parameters, uniform pseudo count `delta`,
/// and the last-body tie-break. `seed` only feeds the learner config.
inline SessionResult session_fig6(double delta = 1.0, std::uint64_t seed = 0) {
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be positive");
  const EdgeGraph eg = fig5_edge_graph();
  const ExplanationGraph graph = compile_path_queries(eg, eg.queries());
  const GoalId query = graph.roots()[0];
  char buf[160];
  SessionResult s;

  const auto show = [&](const char* when, const ViterbiResult& v, double& prob,
                        std::string& path, std::string& expl) {
    prob = v.prob();
    path = path_str(explanation_path(eg, graph, v.explanation, 1));
    expl = graph.explanation_str(v.explanation);
    std::snprintf(buf, sizeof buf, "%s viterbi %s: path %s P = %.6g", when,
                  graph.label(query).c_str(), path.c_str(), prob);
    s.transcript.emplace_back(buf);
    s.transcript.push_back(std::string(when) + " explanation " + expl);
  };

  const auto pre = viterbi(graph, query, edge_parameters(eg), TieBreak::kLast);
  show("pre", pre, s.pre_prob, s.pre_path, s.pre_explanation);

  LearnConfig cfg;
  cfg.method = Method::kVt;
  cfg.init = InitKind::kUniform;
  cfg.tie_break = TieBreak::kLast;
  cfg.seed = seed;
  cfg.pseudo_counts = PseudoCountTable::filled(graph, delta);
  s.learn = vt_learn(graph, graph.roots(), cfg);
  std::string goals;
  for (const auto& r : graph.roots()) goals += " " + graph.label(r);
  s.transcript.push_back("learn vt on" + goals);
  std::snprintf(buf, sizeof buf, "learn iterations %d termination %s objective %.6g",
                s.learn.iterations, termination_name(s.learn.termination),
                s.learn.objective_trace.back());
  s.transcript.emplace_back(buf);

  const auto post = viterbi(graph, query, s.learn.final_theta, TieBreak::kLast);
  show("post", post, s.post_prob, s.post_path, s.post_explanation);

  if (std::abs(s.pre_prob - 0.432) > 1e-9 * 0.432) {
    std::snprintf(buf, sizeof buf, "pre-learning P = %.17g, expected 0.432", s.pre_prob);
    s.failures.emplace_back(buf);
  }
  if (s.pre_path != kSessionPrePath) {
    s.failures.push_back("pre-learning path " + s.pre_path + ", expected " +
                         std::string(kSessionPrePath));
  }
  if (s.post_path != kSessionPostPath) {
    s.failures.push_back("post-learning path " + s.post_path + ", expected " +
                         std::string(kSessionPostPath));
  }
  for (const auto& f : s.failures) s.transcript.push_back("check failed: " + f);
  if (s.ok()) s.transcript.emplace_back("checks passed");
  return s;
}

}  // namespace explgraph
