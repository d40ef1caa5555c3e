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

// Naive Bayes with a hidden class (NBH).
//
//   P(A_1..A_n, HC, C) = prod_j P(A_j | HC, C) * P(HC | C) * P(C)
//
// Switches: `class`, `hclass(C)` over 1..k and `attr(J,C,HC)` over the
// domain of attribute J (1-based). A missing value ('?') is a disjunction
// over every value of its switch.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "explgraph/error.hpp"
#include "explgraph/graph.hpp"
#include "explgraph/inference.hpp"
#include "explgraph/params.hpp"
#include "explgraph/term.hpp"
#include "explgraph/text.hpp"

namespace explgraph {

inline constexpr std::string_view kMissingValue = "?";

struct NbhAttribute {
  std::string name;
  std::vector<std::string> values;
  friend bool operator==(const NbhAttribute&, const NbhAttribute&) = default;
};

struct NbhSpec {
  std::vector<std::string> classes;
  int n_hidden = 1;
  std::vector<NbhAttribute> attributes;

  void validate() const {
    const auto check_domain = [](const std::vector<std::string>& d, const std::string& what) {
      if (d.empty()) throw Error(ErrorCode::kInvalidArgument, what + " has an empty domain");
      std::set<std::string> seen;
      for (const auto& v : d) {
        if (v.empty() || v == kMissingValue || v.find(',') != std::string::npos) {
          throw Error(ErrorCode::kInvalidArgument, what + " has an invalid value '" + v + "'");
        }
        if (!seen.insert(v).second) {
          throw Error(ErrorCode::kInvalidArgument, what + " repeats value '" + v + "'");
        }
      }
    };
    check_domain(classes, "class");
    if (n_hidden < 1) throw Error(ErrorCode::kInvalidArgument, "hidden class count must be >= 1");
    for (const auto& a : attributes) check_domain(a.values, "attribute " + a.name);
  }

  std::size_t class_index(std::string_view c) const {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (classes[k] == c) return k;
    }
    throw Error(ErrorCode::kInvalidRow, "unknown class '" + std::string(c) + "'");
  }

  friend bool operator==(const NbhSpec&, const NbhSpec&) = default;
};

/// One data row. An absent class or value is the missing marker.
struct DataRow {
  std::optional<std::string> cls;
  std::vector<std::optional<std::string>> values;
  friend bool operator==(const DataRow&, const DataRow&) = default;
};

inline void validate_row(const NbhSpec& spec, const DataRow& row) {
  if (row.values.size() != spec.attributes.size()) {
    throw Error(ErrorCode::kInvalidRow, "row has " + std::to_string(row.values.size()) +
                                            " attributes, expected " +
                                            std::to_string(spec.attributes.size()));
  }
  if (row.cls) spec.class_index(*row.cls);
  for (std::size_t j = 0; j < row.values.size(); ++j) {
    if (!row.values[j]) continue;
    const auto& dom = spec.attributes[j].values;
    if (std::find(dom.begin(), dom.end(), *row.values[j]) == dom.end()) {
      throw Error(ErrorCode::kInvalidRow, "value '" + *row.values[j] + "' not in the domain of " +
                                              spec.attributes[j].name);
    }
  }
}

inline Term nbh_class_switch() { return Term::symbol("class"); }

inline Term nbh_hclass_switch(const std::string& c) {
  return Term::compound("hclass", {Term::symbol(c)});
}

inline Term nbh_attr_switch(std::size_t j, const std::string& c, int h) {
  return Term::compound("attr", {Term::integer(static_cast<std::int64_t>(j + 1)), Term::symbol(c),
                                 Term::integer(h)});
}

/// Declares class, then hclass(C) per class, then attr(J,C,HC) for each
/// class, hidden class and attribute.
inline void declare_nbh_switches(const NbhSpec& spec, ExplanationGraph& graph) {
  std::vector<Term> cls;
  for (const auto& c : spec.classes) cls.push_back(Term::symbol(c));
  graph.declare_switch(nbh_class_switch(), cls);
  std::vector<Term> hidden;
  for (int h = 1; h <= spec.n_hidden; ++h) hidden.push_back(Term::integer(h));
  for (const auto& c : spec.classes) graph.declare_switch(nbh_hclass_switch(c), hidden);
  for (const auto& c : spec.classes) {
    for (int h = 1; h <= spec.n_hidden; ++h) {
      for (std::size_t j = 0; j < spec.attributes.size(); ++j) {
        std::vector<Term> vals;
        for (const auto& v : spec.attributes[j].values) vals.push_back(Term::symbol(v));
        graph.declare_switch(nbh_attr_switch(j, c, h), std::move(vals));
      }
    }
  }
}

inline ExplanationGraph nbh_switch_graph(const NbhSpec& spec) {
  ExplanationGraph g;
  declare_nbh_switches(spec, g);
  return g;
}

namespace detail {

struct NbhIndex {
  std::size_t n_attr;
  int k;
  SwitchIndex hclass(std::size_t c) const { return static_cast<SwitchIndex>(1 + c); }
  SwitchIndex attr(std::size_t n_classes, std::size_t c, int h, std::size_t j) const {
    return static_cast<SwitchIndex>(1 + n_classes + (c * static_cast<std::size_t>(k) +
                                                     static_cast<std::size_t>(h - 1)) * n_attr + j);
  }
};

inline std::string row_label(const DataRow& row) {
  std::vector<Term> vals;
  for (const auto& v : row.values) vals.push_back(Term::symbol(v ? *v : std::string(kMissingValue)));
  return Term::compound("nbayes", {Term::symbol(row.cls ? *row.cls : std::string(kMissingValue)),
                                   Term::list(std::move(vals))})
      .str();
}

}  // namespace detail

/// Graph of nbayes(C, Vals) for one row. With `observed_class` the row's
/// class is fixed (it must be present); otherwise every class is a branch.
inline ExplanationGraph compile_nbh(const NbhSpec& spec, const DataRow& row, bool observed_class) {
  spec.validate();
  validate_row(spec, row);
  if (observed_class && !row.cls) {
    throw Error(ErrorCode::kInvalidRow, "class is missing but declared observed");
  }
  ExplanationGraph g;
  declare_nbh_switches(spec, g);
  const detail::NbhIndex idx{spec.attributes.size(), spec.n_hidden};
  const std::size_t nc = spec.classes.size();
  const GoalId root = g.add_goal(detail::row_label(row));
  std::vector<std::size_t> cls;
  if (observed_class) {
    cls.push_back(spec.class_index(*row.cls));
  } else {
    for (std::size_t c = 0; c < nc; ++c) cls.push_back(c);
  }
  for (std::size_t c : cls) {
    const auto& cname = spec.classes[c];
    const GoalId hc = g.add_goal(Term::compound("hc", {Term::symbol(cname)}).str());
    for (int h = 1; h <= spec.n_hidden; ++h) {
      Body b;
      b.instances.push_back(SwitchInstance{idx.hclass(c), static_cast<ValueIndex>(h - 1), 1});
      for (std::size_t j = 0; j < row.values.size(); ++j) {
        const auto sw = idx.attr(nc, c, h, j);
        if (row.values[j]) {
          b.instances.push_back(SwitchInstance{sw, *g.find_value(sw, Term::symbol(*row.values[j]).str()), 1});
          continue;
        }
        const GoalId miss = g.add_goal(
            Term::compound("miss", {Term::integer(static_cast<std::int64_t>(j + 1)),
                                    Term::symbol(cname), Term::integer(h)})
                .str());
        for (ValueIndex v = 0; v < spec.attributes[j].values.size(); ++v) {
          g.add_body(miss, Body{{}, {SwitchInstance{sw, v, 1}}});
        }
        b.subgoals.push_back(miss);
      }
      g.add_body(hc, std::move(b));
    }
    g.add_body(root, Body{{hc}, {SwitchInstance{0, static_cast<ValueIndex>(c), 1}}});
  }
  g.add_root(root);
  g.set_exclusiveness_hint(Exclusiveness::kExclusive);
  g.validate();
  return g;
}

/// One merged learning graph for a data set; rows with a class are
/// compiled with the class observed, rows without one marginalize it.
inline ExplanationGraph compile_nbh_dataset(const NbhSpec& spec, std::span<const DataRow> rows) {
  std::vector<ExplanationGraph> parts;
  parts.reserve(rows.size() + 1);
  parts.push_back(nbh_switch_graph(spec));
  for (const auto& r : rows) parts.push_back(compile_nbh(spec, r, r.cls.has_value()));
  ExplanationGraph out = disjoint_union(parts);
  out.set_exclusiveness_hint(Exclusiveness::kExclusive);
  return out;
}

struct NbhPrediction {
  std::size_t class_index = 0;
  std::string label;
  std::vector<double> posterior;
};

/// argmax over classes of P(C | attributes); ties go to the earlier class.
inline NbhPrediction nbh_classify(const NbhSpec& spec, const ParameterTable& theta,
                                  const DataRow& row) {
  std::vector<double> score(spec.classes.size());
  std::optional<DenseTable> log_theta;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    DataRow r = row;
    r.cls = spec.classes[c];
    const auto g = compile_nbh(spec, r, true);
    if (!log_theta) log_theta = log_table(resolve(g, theta));
    score[c] = inside_log(g, *log_theta).log_inside[g.roots()[0].index];
  }
  const double top = *std::max_element(score.begin(), score.end());
  if (top == kNegInf) throw Error(ErrorCode::kAllZero, "every class has probability 0");
  NbhPrediction p;
  p.posterior.resize(score.size());
  double total = 0.0;
  for (std::size_t c = 0; c < score.size(); ++c) total += p.posterior[c] = std::exp(score[c] - top);
  for (auto& x : p.posterior) x /= total;
  for (std::size_t c = 1; c < score.size(); ++c) {
    if (score[c] > score[p.class_index]) p.class_index = c;
  }
  p.label = spec.classes[p.class_index];
  return p;
}

/// Draws complete rows from the model; each attribute is then hidden with
/// probability `missing_rate`.
inline std::vector<DataRow> sample_nbh(const NbhSpec& spec, const ParameterTable& theta,
                                       std::size_t n, std::uint64_t seed,
                                       double missing_rate = 0.0) {
  spec.validate();
  const ExplanationGraph g = nbh_switch_graph(spec);
  const DenseTable t = resolve(g, theta);
  const detail::NbhIndex idx{spec.attributes.size(), spec.n_hidden};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](SwitchIndex s) {
    const auto& row = t.rows[s];
    const double u = unit(rng);
    double acc = 0.0;
    for (std::size_t v = 0; v < row.size(); ++v) {
      acc += row[v];
      if (u < acc) return v;
    }
    return row.size() - 1;
  };
  std::vector<DataRow> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    DataRow r;
    const std::size_t c = draw(0);
    const int h = static_cast<int>(draw(idx.hclass(c))) + 1;
    r.cls = spec.classes[c];
    for (std::size_t j = 0; j < spec.attributes.size(); ++j) {
      const std::size_t v = draw(idx.attr(spec.classes.size(), c, h, j));
      if (missing_rate > 0.0 && unit(rng) < missing_rate) {
        r.values.emplace_back(std::nullopt);
      } else {
        r.values.emplace_back(spec.attributes[j].values[v]);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files. Spec: `class <labels...>`, `hidden <k>`, `attr <name> <values...>`.
// Data: comma-separated rows, class first, '?' for missing.

inline NbhSpec parse_nbh_spec(std::string_view content) {
  NbhSpec spec;
  bool have_class = false, have_hidden = false;
  std::size_t lineno = 0;
  for (const auto& raw : text::lines(content)) {
    ++lineno;
    const auto toks = text::split_ws(text::strip_comment(raw));
    if (toks.empty()) continue;
    if (toks[0] == "class") {
      if (have_class) throw text::at_line(ErrorCode::kSyntax, lineno, "duplicate class line");
      have_class = true;
      spec.classes.assign(toks.begin() + 1, toks.end());
    } else if (toks[0] == "hidden") {
      if (have_hidden) throw text::at_line(ErrorCode::kSyntax, lineno, "duplicate hidden line");
      if (toks.size() != 2) throw text::at_line(ErrorCode::kSyntax, lineno, "expected 'hidden <k>'");
      have_hidden = true;
      const auto k = text::parse_int(toks[1], lineno);
      if (k < 1 || k > 1'000'000) {
        throw text::at_line(ErrorCode::kRange, lineno, "hidden class count must be >= 1");
      }
      spec.n_hidden = static_cast<int>(k);
    } else if (toks[0] == "attr") {
      if (toks.size() < 3) {
        throw text::at_line(ErrorCode::kSyntax, lineno, "expected 'attr <name> <values...>'");
      }
      spec.attributes.push_back(
          NbhAttribute{std::string(toks[1]), std::vector<std::string>(toks.begin() + 2, toks.end())});
    } else {
      throw text::at_line(ErrorCode::kSyntax, lineno, "unknown keyword '" + std::string(toks[0]) + "'");
    }
  }
  if (!have_class) throw Error(ErrorCode::kSyntax, "missing 'class' line");
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSyntax, e.what());
  }
  return spec;
}

inline std::string emit_nbh_spec(const NbhSpec& spec) {
  std::string out = "class";
  for (const auto& c : spec.classes) out += " " + c;
  out += "\nhidden " + std::to_string(spec.n_hidden) + "\n";
  for (const auto& a : spec.attributes) {
    out += "attr " + a.name;
    for (const auto& v : a.values) out += " " + v;
    out += "\n";
  }
  return out;
}

inline std::vector<DataRow> parse_nbh_data(const NbhSpec& spec, std::string_view content) {
  std::vector<DataRow> rows;
  std::size_t lineno = 0;
  for (const auto& raw : text::lines(content)) {
    ++lineno;
    const auto line = text::trim(text::strip_comment(raw));
    if (line.empty()) continue;
    DataRow r;
    std::size_t start = 0;
    bool first = true;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const auto field = text::trim(line.substr(start, comma == std::string_view::npos
                                                           ? std::string_view::npos
                                                           : comma - start));
      if (field.empty()) throw text::at_line(ErrorCode::kInvalidRow, lineno, "empty field");
      std::optional<std::string> v;
      if (field != kMissingValue) v = std::string(field);
      if (first) {
        r.cls = v;
        first = false;
      } else {
        r.values.push_back(v);
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    try {
      validate_row(spec, r);
    } catch (const Error& e) {
      throw text::at_line(ErrorCode::kInvalidRow, lineno, e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string emit_nbh_data(std::span<const DataRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.cls ? *r.cls : std::string(kMissingValue);
    for (const auto& v : r.values) {
      out += ',';
      out += v ? *v : std::string(kMissingValue);
    }
    out += '\n';
  }
  return out;
}

}  // namespace explgraph
