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

// explgraph: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 learner failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "explgraph/experiment.hpp"
#include "explgraph/grammar.hpp"
#include "explgraph/inference.hpp"
#include "explgraph/io.hpp"
#include "explgraph/learning.hpp"
#include "explgraph/metrics.hpp"
#include "explgraph/nbh.hpp"
#include "explgraph/parse.hpp"
#include "explgraph/path_graph.hpp"
#include "json.hpp"

namespace {

using namespace explgraph;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitLearner = 3;

// Raised around learner calls so the exit code can tell them apart.
struct LearnerFailure {
  Error error;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  int restarts = 1;
  std::optional<double> delta;
  double tol = 1e-6;
  int max_iter = 1000;
  std::string method = "vt";
  std::string tie = "first";
  std::string json_path;
};

// One of: grammar + corpus/treebank, edge graph, NBH spec + data, or a
// serialized explanation graph.
struct InputOptions {
  std::string grammar, corpus, treebank, mode = "pcfg";
  std::string edges;
  std::string nbh_spec, nbh_data;
  std::string graph;
  std::string params, pseudo;
  std::vector<std::string> sentences;
};

struct Problem {
  ExplanationGraph graph;
  std::optional<Grammar> grammar;
  ParseMode mode = ParseMode::kPcfg;
  std::vector<Sentence> sentences;
  std::optional<EdgeGraph> edges;
  std::optional<NbhSpec> nbh;
};

void add_input_options(CLI::App* sub, InputOptions& in, bool data = true) {
  sub->add_option("--grammar", in.grammar, "grammar file");
  sub->add_option("--mode", in.mode, "grammar encoding: pcfg or plcg");
  if (data) {
    sub->add_option("--corpus", in.corpus, "corpus file, one sentence per line");
    sub->add_option("--treebank", in.treebank, "treebank file, one tree per line");
    sub->add_option("--sentence", in.sentences, "sentence given inline (repeatable)");
    sub->add_option("--nbh-data", in.nbh_data, "NBH data file (CSV)");
  }
  sub->add_option("--edges", in.edges, "edge-graph file");
  sub->add_option("--nbh-spec", in.nbh_spec, "NBH specification file");
  sub->add_option("--graph", in.graph, "serialized explanation graph");
}

Sentence split_sentence(const std::string& s) {
  Sentence out;
  for (auto tok : text::split_ws(s)) out.emplace_back(tok);
  return out;
}

Problem load_problem(const InputOptions& in) {
  Problem p;
  if (!in.grammar.empty()) {
    p.grammar = parse_grammar(text::read_file(in.grammar));
    p.mode = parse_parse_mode(in.mode);
    if (!in.treebank.empty()) {
      const auto bank = parse_treebank(text::read_file(in.treebank));
      for (const auto& t : bank) p.sentences.push_back(t.yield());
      p.graph = treebank_graph(*p.grammar, bank, p.mode);
      return p;
    }
    if (!in.corpus.empty()) p.sentences = parse_corpus(text::read_file(in.corpus));
    for (const auto& s : in.sentences) p.sentences.push_back(split_sentence(s));
    if (p.sentences.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "grammar input needs --corpus, --treebank or --sentence");
    }
    const auto charts = compile_corpus(*p.grammar, p.sentences, p.mode);
    p.graph = corpus_graph(*p.grammar, charts, p.mode);
    return p;
  }
  if (!in.edges.empty()) {
    p.edges = parse_edge_graph(text::read_file(in.edges));
    if (p.edges->queries().empty()) throw Error(ErrorCode::kInvalidArgument, "edge file has no queries");
    p.graph = compile_path_queries(*p.edges, p.edges->queries());
    return p;
  }
  if (!in.nbh_spec.empty()) {
    p.nbh = parse_nbh_spec(text::read_file(in.nbh_spec));
    if (in.nbh_data.empty()) throw Error(ErrorCode::kInvalidArgument, "--nbh-spec needs --nbh-data");
    const auto rows = parse_nbh_data(*p.nbh, text::read_file(in.nbh_data));
    p.graph = compile_nbh_dataset(*p.nbh, rows);
    p.graph.validate();
    return p;
  }
  if (!in.graph.empty()) {
    p.graph = parse_graph(text::read_file(in.graph));
    return p;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no input: give --grammar, --edges, --nbh-spec or --graph");
}

// Parameters for inference: --params, else what the input itself carries.
ParameterTable load_theta(const InputOptions& in, const Problem& p) {
  if (!in.params.empty()) return parse_params(text::read_file(in.params));
  if (p.grammar && p.mode == ParseMode::kPcfg) return grammar_parameters(*p.grammar);
  if (p.edges) return edge_parameters(*p.edges);
  throw Error(ErrorCode::kMissingParameter, "this input needs --params");
}

TieBreak parse_tie(const std::string& s) {
  if (s == "first") return TieBreak::kFirst;
  if (s == "last") return TieBreak::kLast;
  throw Error(ErrorCode::kInvalidArgument, "tie-break must be first or last");
}

LearnConfig learn_config(const GlobalOptions& g, const InputOptions& in,
                         const ExplanationGraph& graph) {
  LearnConfig c;
  c.method = parse_method(g.method);
  c.seed = g.seed;
  c.restarts = g.restarts;
  c.tol = g.tol;
  c.max_iter = g.max_iter;
  c.tie_break = parse_tie(g.tie);
  if (!in.pseudo.empty()) {
    c.pseudo_counts = parse_pseudo_counts(text::read_file(in.pseudo));
  } else if (g.delta) {
    c.pseudo_counts = PseudoCountTable::filled(graph, *g.delta);
  }
  return c;
}

void write_json(const GlobalOptions& g, const json& j) {
  if (g.json_path.empty()) return;
  text::write_file(g.json_path, j.dump(2) + "\n");
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    text::write_file(path, content);
  }
}

std::string fmt(double v) { return text::format_double(v); }

int cmd_compile(const InputOptions& in, const std::string& out) {
  const auto p = load_problem(in);
  emit(out, emit_graph(p.graph));
  return kExitOk;
}

int cmd_learn(const GlobalOptions& g, const InputOptions& in, const std::string& out,
              const std::string& report_path, const std::string& grammar_out) {
  const auto p = load_problem(in);
  const auto cfg = learn_config(g, in, p.graph);
  LearnReport r;
  try {
    r = learn(p.graph, p.graph.roots(), cfg);
  } catch (const Error& e) {
    throw LearnerFailure{e};
  }
  emit(out, emit_params(r.final_theta));
  if (!report_path.empty()) text::write_file(report_path, emit_learn_report(r, cfg.method));
  if (!grammar_out.empty()) {
    if (!p.grammar || p.mode != ParseMode::kPcfg) {
      throw Error(ErrorCode::kInvalidArgument, "--out-grammar needs a pcfg grammar input");
    }
    text::write_file(grammar_out, emit_grammar(with_probabilities(*p.grammar, r.final_theta)));
  }
  std::cerr << "learn: " << method_name(cfg.method) << " iterations " << r.iterations << " "
            << termination_name(r.termination) << " objective " << fmt(r.objective_trace.back())
            << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  json j{{"method", method_name(cfg.method)},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"termination", termination_name(r.termination)},
         {"objective_trace", r.objective_trace},
         {"restart_objectives", r.restart_objectives},
         {"best_restart", r.best_restart_index},
         {"degenerate_switches", r.degenerate_switches},
         {"warnings", r.warnings},
         {"learn_seconds", r.learn_seconds}};
  write_json(g, j);
  return kExitOk;
}

int cmd_viterbi(const GlobalOptions& g, const InputOptions& in) {
  const auto p = load_problem(in);
  const auto theta = load_theta(in, p);
  const auto tie = parse_tie(g.tie);
  json items = json::array();
  if (p.grammar) {
    for (const auto& s : p.sentences) {
      const auto chart = compile_sentence(*p.grammar, s, p.mode);
      const auto v = viterbi_parse(*p.grammar, chart, theta, tie);
      std::cout << v.tree.str() << "\t" << fmt(v.log_prob) << "\n";
      items.push_back({{"sentence", sentence_str(s)}, {"tree", v.tree.str()}, {"log_prob", v.log_prob}});
    }
  } else {
    const auto table = viterbi_table(p.graph, log_table(resolve(p.graph, theta)), tie);
    for (std::size_t k = 0; k < p.graph.roots().size(); ++k) {
      const auto root = p.graph.roots()[k];
      const auto v = extract_viterbi(p.graph, table, root);
      std::string line = p.graph.label(root) + "\t" + p.graph.explanation_str(v.explanation) +
                         "\t" + fmt(v.prob());
      json item{{"goal", p.graph.label(root)},
                {"explanation", p.graph.explanation_str(v.explanation)},
                {"prob", v.prob()}};
      if (p.edges) {
        const auto path = path_str(explanation_path(*p.edges, p.graph, v.explanation,
                                                    p.edges->queries()[k].from));
        line += "\t" + path;
        item["path"] = path;
      }
      std::cout << line << "\n";
      items.push_back(item);
    }
  }
  write_json(g, json{{"viterbi", items}});
  return kExitOk;
}

int cmd_prob(const GlobalOptions& g, const InputOptions& in) {
  const auto p = load_problem(in);
  const auto theta = load_theta(in, p);
  const auto inside = inside_prob(p.graph, theta);
  if (!inside.is_probability) {
    std::cerr << "note: graph is not known to be exclusive; values are sums over explanations\n";
  }
  json items = json::array();
  for (const auto root : p.graph.roots()) {
    std::cout << p.graph.label(root) << "\t" << fmt(inside.prob(root)) << "\n";
    items.push_back({{"goal", p.graph.label(root)}, {"prob", inside.prob(root)},
                     {"log_prob", inside.log_inside[root.index]}});
  }
  write_json(g, json{{"prob", items}, {"is_probability", inside.is_probability}});
  return kExitOk;
}

int cmd_eval(const GlobalOptions& g, const InputOptions& in, const std::string& task,
             std::size_t folds, std::uint64_t fold_seed, const std::string& out) {
  ExperimentConfig cfg;
  cfg.task = parse_task(task);
  cfg.folds = folds;
  cfg.fold_seed = fold_seed;
  if (cfg.task == Task::kNbh) {
    if (in.nbh_spec.empty() || in.nbh_data.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "nbh task needs --nbh-spec and --nbh-data");
    }
    cfg.nbh = parse_nbh_spec(text::read_file(in.nbh_spec));
    cfg.rows = parse_nbh_data(cfg.nbh, text::read_file(in.nbh_data));
  } else {
    if (in.grammar.empty() || in.treebank.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "grammar tasks need --grammar and --treebank");
    }
    cfg.grammar = parse_grammar(text::read_file(in.grammar));
    cfg.treebank = parse_treebank(text::read_file(in.treebank));
  }
  cfg.learn = learn_config(g, InputOptions{}, ExplanationGraph{});
  if (!in.pseudo.empty()) cfg.learn.pseudo_counts = parse_pseudo_counts(text::read_file(in.pseudo));
  if (g.delta) cfg.delta = *g.delta;
  ExperimentReport r;
  try {
    r = cv_run(cfg);
  } catch (const Error& e) {
    // Data problems surface before any fold runs; anything later is the learner's.
    if (std::string_view(e.what()).find("fold ") == std::string_view::npos) throw;
    throw LearnerFailure{e};
  }
  emit(out, emit_experiment_report(r));
  json fj = json::array();
  for (const auto& f : r.folds) {
    fj.push_back({{"test_items", f.test_items},
                  {"train_size", f.train_size},
                  {"lt", f.metrics.lt},
                  {"bt", f.metrics.bt},
                  {"zero_cb", f.metrics.zero_cb},
                  {"accuracy", f.accuracy},
                  {"iterations", f.iterations},
                  {"termination", termination_name(f.termination)},
                  {"learn_seconds", f.learn_seconds},
                  {"total_seconds", f.total_seconds}});
  }
  const auto agg = [](const Aggregate& a) { return json{{"mean", a.mean}, {"sd", a.sd}}; };
  write_json(g, json{{"task", task_name(r.task)},
                     {"method", method_name(r.method)},
                     {"folds", fj},
                     {"lt", agg(r.lt)},
                     {"bt", agg(r.bt)},
                     {"zero_cb", agg(r.zero_cb)},
                     {"accuracy", agg(r.accuracy)},
                     {"iterations", agg(r.iterations)},
                     {"learn_seconds", agg(r.learn_seconds)}});
  return kExitOk;
}

int cmd_score(const GlobalOptions& g, const std::string& predicted, const std::string& reference) {
  const auto pred = parse_treebank(text::read_file(predicted));
  const auto ref = parse_treebank(text::read_file(reference));
  const auto m = metrics(pred, ref);
  std::cout << "n " << m.n << "\nlt " << fmt(m.lt) << "\nbt " << fmt(m.bt) << "\n0cb "
            << fmt(m.zero_cb) << "\n";
  write_json(g, json{{"n", m.n}, {"lt", m.lt}, {"bt", m.bt}, {"zero_cb", m.zero_cb}});
  return kExitOk;
}

int cmd_gen(const GlobalOptions& g, const InputOptions& in, std::size_t n, int max_depth,
            const std::string& out, const std::string& corpus_out, double missing_rate) {
  if (!in.grammar.empty()) {
    const auto grammar = parse_grammar(text::read_file(in.grammar));
    const auto theta = in.params.empty() ? grammar_parameters(grammar)
                                         : parse_params(text::read_file(in.params));
    const auto gc = gen_corpus(grammar, theta, n, g.seed, max_depth);
    emit(out, emit_treebank(gc.trees));
    if (!corpus_out.empty()) text::write_file(corpus_out, emit_corpus(gc.sentences));
    std::cerr << "gen: " << gc.trees.size() << " trees, " << gc.rejected << " rejected of "
              << gc.attempts << " draws\n";
    write_json(g, json{{"n", gc.trees.size()}, {"attempts", gc.attempts}, {"rejected", gc.rejected}});
    return kExitOk;
  }
  if (!in.nbh_spec.empty()) {
    const auto spec = parse_nbh_spec(text::read_file(in.nbh_spec));
    if (in.params.empty()) throw Error(ErrorCode::kMissingParameter, "NBH sampling needs --params");
    const auto rows = sample_nbh(spec, parse_params(text::read_file(in.params)), n, g.seed, missing_rate);
    emit(out, emit_nbh_data(rows));
    return kExitOk;
  }
  throw Error(ErrorCode::kInvalidArgument, "gen needs --grammar or --nbh-spec");
}

int cmd_session(const GlobalOptions& g, bool no_strict) {
  const auto s = session_fig6(g.delta.value_or(1.0), g.seed);
  for (const auto& l : s.transcript) std::cout << l << "\n";
  write_json(g, json{{"pre_prob", s.pre_prob},
                     {"pre_path", s.pre_path},
                     {"pre_explanation", s.pre_explanation},
                     {"post_prob", s.post_prob},
                     {"post_path", s.post_path},
                     {"post_explanation", s.post_explanation},
                     {"iterations", s.learn.iterations},
                     {"failures", s.failures}});
  if (!s.ok() && !no_strict) return kExitLearner;
  return kExitOk;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kZeroEvidence:
    case ErrorCode::kAllZero:
      return kExitLearner;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic explanation graphs: compile, infer, learn, evaluate."};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--restarts", g.restarts, "learner restarts")->check(CLI::PositiveNumber);
  app.add_option("--delta", g.delta, "uniform pseudo count for map/vt");
  app.add_option("--tol", g.tol, "relative objective tolerance for em/map");
  app.add_option("--max-iter", g.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--method", g.method, "em, map or vt")
      ->check(CLI::IsMember({"em", "map", "vt"}));
  app.add_option("--tie-break", g.tie, "viterbi tie-break: first or last")
      ->check(CLI::IsMember({"first", "last"}));
  app.add_option("--json", g.json_path, "also write a JSON summary to this file");

  InputOptions in;
  std::string out, report_path, grammar_out, corpus_out, predicted, reference, task = "pcfg";
  std::size_t folds = 8, n = 100;
  std::uint64_t fold_seed = 0;
  int max_depth = 8;
  double missing_rate = 0.0;
  bool no_strict = false;

  auto* compile = app.add_subcommand("compile", "compile input into an explanation graph");
  add_input_options(compile, in);
  compile->add_option("-o,--out", out, "output file (default stdout)");

  auto* learn_cmd = app.add_subcommand("learn", "estimate switch parameters");
  add_input_options(learn_cmd, in);
  learn_cmd->add_option("--pseudo", in.pseudo, "pseudo-count file");
  learn_cmd->add_option("-o,--out", out, "parameter file (default stdout)");
  learn_cmd->add_option("--report", report_path, "learning report file");
  learn_cmd->add_option("--out-grammar", grammar_out, "grammar file with learned probabilities");

  auto* viterbi_cmd = app.add_subcommand("viterbi", "most probable explanation per root");
  add_input_options(viterbi_cmd, in);
  viterbi_cmd->add_option("--params", in.params, "parameter file");

  auto* prob_cmd = app.add_subcommand("prob", "inside probability per root");
  add_input_options(prob_cmd, in);
  prob_cmd->add_option("--params", in.params, "parameter file");

  auto* eval_cmd = app.add_subcommand("eval", "k-fold cross validation");
  add_input_options(eval_cmd, in);
  eval_cmd->add_option("--task", task, "pcfg, plcg or nbh")
      ->check(CLI::IsMember({"pcfg", "plcg", "nbh"}));
  eval_cmd->add_option("--folds", folds, "number of folds");
  eval_cmd->add_option("--fold-seed", fold_seed, "seed of the fold shuffle");
  eval_cmd->add_option("--pseudo", in.pseudo, "pseudo-count file");
  eval_cmd->add_option("-o,--out", out, "report file (default stdout)");

  auto* score_cmd = app.add_subcommand("score", "LT/BT/0-CB of predicted against reference trees");
  score_cmd->add_option("--predicted", predicted, "predicted treebank")->required();
  score_cmd->add_option("--reference", reference, "reference treebank")->required();

  auto* gen_cmd = app.add_subcommand("gen", "sample a treebank or NBH rows");
  add_input_options(gen_cmd, in, false);
  gen_cmd->add_option("--params", in.params, "parameter file");
  gen_cmd->add_option("-n,--count", n, "number of samples");
  gen_cmd->add_option("--max-depth", max_depth, "derivation depth bound");
  gen_cmd->add_option("--corpus-out", corpus_out, "also write the sentences here");
  gen_cmd->add_option("--missing-rate", missing_rate, "NBH: probability of hiding a value");
  gen_cmd->add_option("-o,--out", out, "output file (default stdout)");

  auto* session_cmd = app.add_subcommand("session-fig6", "six-node reachability demo session");
  session_cmd->add_flag("--no-strict", no_strict, "report failed checks without failing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (compile->parsed()) return cmd_compile(in, out);
    if (learn_cmd->parsed()) return cmd_learn(g, in, out, report_path, grammar_out);
    if (viterbi_cmd->parsed()) return cmd_viterbi(g, in);
    if (prob_cmd->parsed()) return cmd_prob(g, in);
    if (eval_cmd->parsed()) return cmd_eval(g, in, task, folds, fold_seed, out);
    if (score_cmd->parsed()) return cmd_score(g, predicted, reference);
    if (gen_cmd->parsed()) return cmd_gen(g, in, n, max_depth, out, corpus_out, missing_rate);
    if (session_cmd->parsed()) return cmd_session(g, no_strict);
  } catch (const LearnerFailure& f) {
    // A rejected configuration is a data error, not a learner failure.
    if (f.error.code() == ErrorCode::kInvalidArgument) {
      std::cerr << "explgraph: " << f.error.what() << "\n";
      return kExitData;
    }
    std::cerr << "explgraph: learner failed: " << f.error.what() << "\n";
    return kExitLearner;
  } catch (const Error& e) {
    std::cerr << "explgraph: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kExitUsage;
}
