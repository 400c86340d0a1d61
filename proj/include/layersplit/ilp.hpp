// Copyright 2026 The layersplit Authors
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
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "layersplit/scenario_spec.hpp"
#include "layersplit/schedule.hpp"

// Integer program over the group binaries m/c and the switch indicators u/d,
// written in LP text format. Used to cross-check schedules, not to solve.
namespace layersplit {

/// Sparse linear form. Terms keep insertion order so the text is stable.
struct LinearExpr {
  std::vector<std::pair<std::string, double>> terms;
  double constant = 0;

  void add(const std::string& var, double coef) {
    if (coef == 0) return;
    // The index is rebuilt whenever `terms` was changed from outside.
    if (index_.size() != terms.size()) {
      index_.clear();
      for (std::size_t k = 0; k < terms.size(); ++k) index_[terms[k].first] = k;
    }
    auto it = index_.find(var);
    if (it == index_.end()) {
      index_.emplace(var, terms.size());
      terms.emplace_back(var, coef);
      return;
    }
    double& c = terms[it->second].second;
    c += coef;
    if (c == 0) {  // cancelled out
      terms.erase(terms.begin() + static_cast<std::ptrdiff_t>(it->second));
      index_.clear();
    }
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

enum class RowSense { le, ge, eq };

struct LinearRow {
  std::string name;
  LinearExpr lhs;  // constant is always 0 once built
  RowSense sense = RowSense::le;
  double rhs = 0;
};

struct LinearProgram {
  std::string name;
  std::vector<std::string> comments;
  LinearExpr objective;
  std::vector<LinearRow> rows;
  std::vector<std::string> binaries;

  const LinearRow* row(std::string_view n) const {
    for (const auto& r : rows)
      if (r.name == n) return &r;
    return nullptr;
  }
  std::size_t count_rows(std::string_view prefix) const {
    std::size_t k = 0;
    for (const auto& r : rows)
      if (r.name.rfind(prefix, 0) == 0) ++k;
    return k;
  }
};

namespace detail {

inline std::string var(char kind, int i, int j) {
  return std::string(1, kind) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

inline std::string block_var(const char* kind, const ResidualBlock& b) {
  return std::string(kind) + "_" + std::to_string(b.source_layer) + "_" +
         std::to_string(b.sink_layer);
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// Collects terms; unreachable coefficients pin their variable to zero
/// instead of entering the expression.
class ExprBuilder {
 public:
  ExprBuilder(LinearExpr& out, std::set<std::string>& fixed) : out_(out), fixed_(fixed) {}
  void add(const std::string& v, double coef) {
    if (std::isinf(coef)) {
      fixed_.insert(v);
      return;
    }
    out_.add(v, coef);
  }

 private:
  LinearExpr& out_;
  std::set<std::string>& fixed_;
};

}  // namespace detail

/// Builds the program for a scenario. Positions run over 1..n with n = N, or
/// 2N in training. The latency form charges switches through u/d; the energy
/// form charges them from the mobile segment boundaries. Scenario bounds
/// become a single extra row named after the constraint.
inline LinearProgram build_ilp(const ProblemInstance& instance, const ScenarioSpec& spec) {
  spec.validate();
  const ProblemInstance inst = prepare_instance(instance, spec);
  const ProblemCosts costs(inst, spec.mode, spec.update_fraction);
  const int n = costs.size();
  using detail::var;

  LinearProgram lp;
  lp.name = (inst.name.empty() ? std::string("instance") : inst.name) + "_" + spec.name();
  lp.comments.push_back("positions 1.." + std::to_string(n) + (spec.mode == Mode::training
                                                                   ? " (forward then backward)"
                                                                   : ""));
  std::set<std::string> fixed;
  std::vector<LinearRow> extra;

  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j)
      for (char k : {'m', 'c', 'u', 'd'}) lp.binaries.push_back(var(k, i, j));
  for (const auto& b : costs.blocks()) {
    lp.binaries.push_back(detail::block_var("ru", b));
    lp.binaries.push_back(detail::block_var("rd", b));
  }

  // Latency or energy through the switch indicators.
  auto switch_form = [&](Metric m, LinearExpr& e) {
    detail::ExprBuilder b(e, fixed);
    for (int i = 1; i <= n; ++i) {
      for (int j = i; j <= n; ++j) {
        b.add(var('m', i, j), costs.exec(i, j, Platform::mobile, m));
        b.add(var('c', i, j), costs.exec(i, j, Platform::cloud, m));
        if (j < n) {
          b.add(var('u', i, j), costs.upload_after(j).value(m));
          b.add(var('d', i, j), costs.download_after(j).value(m));
        }
        b.add(var('c', i, j), costs.weight_download(i, j).value(m));
      }
    }
    for (int i = 1; i <= n; ++i) b.add(var('c', 1, i), costs.upload_input().value(m));
    for (int i = 1; i <= n; ++i) b.add(var('c', i, n), costs.final_download().value(m));
    for (const auto& blk : costs.blocks()) {
      b.add(detail::block_var("ru", blk), costs.skip_transfer(blk, Direction::up).value(m));
      b.add(detail::block_var("rd", blk), costs.skip_transfer(blk, Direction::down).value(m));
    }
  };

  // Mobile energy from segment boundaries only. The first-layer upload is
  // due unless some m_{1,i} is set, the final download unless some m_{i,n}.
  auto boundary_form = [&](LinearExpr& e) {
    detail::ExprBuilder b(e, fixed);
    const Metric m = Metric::energy;
    for (int i = 1; i <= n; ++i) {
      for (int j = i; j <= n; ++j) {
        b.add(var('m', i, j), costs.exec(i, j, Platform::mobile, m));
        b.add(var('c', i, j), costs.exec(i, j, Platform::cloud, m));
        if (i >= 2) b.add(var('m', i, j), costs.download_after(i - 1).value(m));
        if (j <= n - 1) b.add(var('m', i, j), costs.upload_after(j).value(m));
        b.add(var('c', i, j), costs.weight_download(i, j).value(m));
      }
    }
    auto indicator = [&](double w, bool first, const std::string& row) {
      if (w == 0) return;
      if (std::isinf(w)) {
        LinearRow r{row, {}, RowSense::ge, 1.0};
        for (int i = 1; i <= n; ++i) r.lhs.add(first ? var('m', 1, i) : var('m', i, n), 1.0);
        extra.push_back(std::move(r));
        return;
      }
      e.constant += w;
      for (int i = 1; i <= n; ++i) e.add(first ? var('m', 1, i) : var('m', i, n), -w);
    };
    indicator(costs.upload_input().value(m), true, "bnd_input_mobile");
    if (spec.mode == Mode::inference) {
      indicator(costs.final_download().value(m), false, "bnd_output_mobile");
    }
    for (const auto& blk : costs.blocks()) {
      b.add(detail::block_var("ru", blk), costs.skip_transfer(blk, Direction::up).value(m));
      b.add(detail::block_var("rd", blk), costs.skip_transfer(blk, Direction::down).value(m));
    }
  };

  if (spec.objective == Metric::latency) {
    switch_form(Metric::latency, lp.objective);
  } else {
    boundary_form(lp.objective);
    lp.comments.push_back(
        "energy form: layers not covered by any m_i_j run on the cloud (see mcap rows)");
    if (spec.mode == Mode::training) {
      lp.comments.push_back("energy form: no output download term in training");
    }
  }

  for (int l = 1; l <= n; ++l) {
    LinearRow r{"once_" + std::to_string(l), {}, RowSense::eq, 1.0};
    for (int i = 1; i <= l; ++i)
      for (int j = l; j <= n; ++j) {
        r.lhs.add(var('m', i, j), 1.0);
        r.lhs.add(var('c', i, j), 1.0);
      }
    lp.rows.push_back(std::move(r));
  }
  if (spec.objective == Metric::energy) {
    for (int l = 1; l <= n; ++l) {
      LinearRow r{"mcap_" + std::to_string(l), {}, RowSense::le, 1.0};
      for (int i = 1; i <= l; ++i)
        for (int j = l; j <= n; ++j) r.lhs.add(var('m', i, j), 1.0);
      lp.rows.push_back(std::move(r));
    }
  }

  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      for (const auto& [ind, self, next] : {std::tuple{'u', 'm', 'c'}, std::tuple{'d', 'c', 'm'}}) {
        const std::string tag = std::string(1, ind) + "_" + std::to_string(i) + "_" + std::to_string(j);
        LinearRow r1{"lin1_" + tag, {}, RowSense::le, 0.0};
        r1.lhs.add(var(ind, i, j), 1.0);
        r1.lhs.add(var(self, i, j), -1.0);
        LinearRow r2{"lin2_" + tag, {}, RowSense::le, 0.0};
        r2.lhs.add(var(ind, i, j), 1.0);
        LinearRow r3{"lin3_" + tag, {}, RowSense::le, 1.0};
        r3.lhs.add(var(self, i, j), 1.0);
        for (int k = j + 1; k <= n; ++k) {
          r2.lhs.add(var(next, j + 1, k), -1.0);
          r3.lhs.add(var(next, j + 1, k), 1.0);
        }
        r3.lhs.add(var(ind, i, j), -1.0);
        lp.rows.push_back(std::move(r1));
        lp.rows.push_back(std::move(r2));
        lp.rows.push_back(std::move(r3));
      }
    }
  }

  // Skip tensor indicators: ru = [source mobile and sink cloud], rd the reverse.
  for (const auto& blk : costs.blocks()) {
    auto coverage = [&](LinearExpr& e, int layer, double sign) {
      for (int i = 1; i <= layer; ++i)
        for (int j = layer; j <= n; ++j) e.add(var('m', i, j), sign);
    };
    const std::string ru = detail::block_var("ru", blk);
    const std::string rd = detail::block_var("rd", blk);
    const std::string tag = std::to_string(blk.source_layer) + "_" + std::to_string(blk.sink_layer);
    LinearRow a{"res1_" + tag, {}, RowSense::ge, 0.0};  // ru >= ms - mt
    a.lhs.add(ru, 1.0);
    coverage(a.lhs, blk.source_layer, -1.0);
    coverage(a.lhs, blk.sink_layer, 1.0);
    LinearRow b{"res2_" + tag, {}, RowSense::le, 0.0};  // ru <= ms
    b.lhs.add(ru, 1.0);
    coverage(b.lhs, blk.source_layer, -1.0);
    LinearRow c{"res3_" + tag, {}, RowSense::le, 1.0};  // ru <= 1 - mt
    c.lhs.add(ru, 1.0);
    coverage(c.lhs, blk.sink_layer, 1.0);
    LinearRow d{"res4_" + tag, {}, RowSense::ge, 0.0};  // rd >= mt - ms
    d.lhs.add(rd, 1.0);
    coverage(d.lhs, blk.sink_layer, -1.0);
    coverage(d.lhs, blk.source_layer, 1.0);
    LinearRow e{"res5_" + tag, {}, RowSense::le, 0.0};  // rd <= mt
    e.lhs.add(rd, 1.0);
    coverage(e.lhs, blk.sink_layer, -1.0);
    LinearRow f{"res6_" + tag, {}, RowSense::le, 1.0};  // rd <= 1 - ms
    f.lhs.add(rd, 1.0);
    coverage(f.lhs, blk.source_layer, 1.0);
    for (auto* r : {&a, &b, &c, &d, &e, &f}) lp.rows.push_back(std::move(*r));
  }

  if (spec.constraint != ConstraintKind::none) {
    LinearExpr e;
    switch (spec.constraint) {
      case ConstraintKind::battery: boundary_form(e); break;
      case ConstraintKind::qos: switch_form(Metric::latency, e); break;
      case ConstraintKind::cloud_time: {
        detail::ExprBuilder b(e, fixed);
        for (int i = 1; i <= n; ++i)
          for (int j = i; j <= n; ++j)
            b.add(var('c', i, j), costs.exec(i, j, Platform::cloud, Metric::cloud_time));
        break;
      }
      case ConstraintKind::none: break;
    }
    LinearRow r{std::string(to_string(spec.constraint)), {}, RowSense::le, spec.bound - e.constant};
    r.lhs.terms = std::move(e.terms);
    lp.rows.push_back(std::move(r));
  }

  for (auto& r : extra) lp.rows.push_back(std::move(r));
  for (const auto& v : fixed) {
    LinearRow r{"fix_" + v, {}, RowSense::eq, 0.0};
    r.lhs.add(v, 1.0);
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

/// LP text: `\Problem`, `Minimize`, `Subject To`, `Binary`, `End`.
inline std::string write_lp(const LinearProgram& lp) {
  std::ostringstream os;
  os << "\\Problem " << lp.name << "\n";
  for (const auto& c : lp.comments) os << "\\ " << c << "\n";
  auto expr = [&os](const LinearExpr& e, bool with_constant) {
    int on_line = 0;
    bool first = true;
    auto put = [&](double coef, const std::string& v) {
      if (on_line == 6) {
        os << "\n   ";
        on_line = 0;
      }
      if (first) {
        os << (coef < 0 ? "- " : "") << detail::format_number(std::abs(coef));
      } else {
        os << (coef < 0 ? " - " : " + ") << detail::format_number(std::abs(coef));
      }
      if (!v.empty()) os << ' ' << v;
      first = false;
      ++on_line;
    };
    for (const auto& [v, c] : e.terms) put(c, v);
    if (with_constant && e.constant != 0) put(e.constant, "");
    if (first) os << "0";
  };
  os << "Minimize\n obj: ";
  expr(lp.objective, true);
  os << "\nSubject To\n";
  for (const auto& r : lp.rows) {
    os << " " << r.name << ": ";
    expr(r.lhs, false);
    os << (r.sense == RowSense::le ? " <= " : r.sense == RowSense::ge ? " >= " : " = ")
       << detail::format_number(r.rhs) << "\n";
  }
  os << "Binary\n";
  for (std::size_t k = 0; k < lp.binaries.size(); ++k) {
    os << ' ' << lp.binaries[k];
    if (k % 8 == 7 || k + 1 == lp.binaries.size()) os << "\n";
  }
  os << "End\n";
  return os.str();
}

inline std::string export_ilp(const ProblemInstance& instance, const ScenarioSpec& spec) {
  return write_lp(build_ilp(instance, spec));
}

/// Reads the subset of LP text produced by `write_lp`.
inline LinearProgram parse_lp(std::string_view text) {
  LinearProgram lp;
  enum class Section { head, objective, rows, binary, done } sec = Section::head;
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string line;

  auto tokenize = [](const std::string& s, std::vector<std::string>& out) {
    std::size_t p = 0;
    while (p < s.size()) {
      if (std::isspace(static_cast<unsigned char>(s[p]))) {
        ++p;
        continue;
      }
      if (s[p] == '<' || s[p] == '>' || s[p] == '=') {
        std::size_t q = p + 1;
        if (q < s.size() && s[q] == '=') ++q;
        out.push_back(s.substr(p, q - p));
        p = q;
        continue;
      }
      if (s[p] == '+' || s[p] == '-') {
        out.push_back(std::string(1, s[p]));
        ++p;
        continue;
      }
      std::size_t q = p;
      while (q < s.size() && !std::isspace(static_cast<unsigned char>(s[q])) && s[q] != '<' &&
             s[q] != '>' && s[q] != '=' && !((s[q] == '+' || s[q] == '-') && q > p &&
                                             s[q - 1] != 'e' && s[q - 1] != 'E')) {
        ++q;
      }
      out.push_back(s.substr(p, q - p));
      p = q;
    }
  };

  std::vector<std::string> obj_tokens, row_tokens;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '\\') {
      if (line.rfind("\\Problem ", 0) == 0) lp.name = line.substr(9);
      else if (line.rfind("\\ ", 0) == 0) lp.comments.push_back(line.substr(2));
      continue;
    }
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
    if (trimmed == "Minimize") {
      sec = Section::objective;
      continue;
    }
    if (trimmed == "Subject To") {
      sec = Section::rows;
      continue;
    }
    if (trimmed == "Binary") {
      sec = Section::binary;
      continue;
    }
    if (trimmed == "End") {
      sec = Section::done;
      continue;
    }
    switch (sec) {
      case Section::objective: tokenize(trimmed, obj_tokens); break;
      case Section::rows: tokenize(trimmed, row_tokens); break;
      case Section::binary: {
        std::istringstream ws(trimmed);
        std::string w;
        while (ws >> w) lp.binaries.push_back(w);
        break;
      }
      case Section::head:
        if (!trimmed.empty()) throw ParseError("lp", "unexpected text before Minimize");
        break;
      case Section::done:
        if (!trimmed.empty()) throw ParseError("lp", "text after End");
        break;
    }
  }
  if (sec != Section::done) throw ParseError("lp", "missing End");

  auto is_number = [](const std::string& t) {
    if (t.empty()) return false;
    char* end = nullptr;
    std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
  };
  // Reads terms until an operator token or the end. Returns the position.
  auto read_expr = [&](const std::vector<std::string>& t, std::size_t p, LinearExpr& e) {
    double sign = 1.0;
    while (p < t.size() && t[p] != "<=" && t[p] != ">=" && t[p] != "=" && t[p] != "<" &&
           t[p] != ">") {
      if (t[p] == "+") {
        sign = 1.0;
        ++p;
        continue;
      }
      if (t[p] == "-") {
        sign = -1.0;
        ++p;
        continue;
      }
      if (!t[p].empty() && t[p].back() == ':') break;
      double coef = 1.0;
      if (is_number(t[p])) {
        coef = std::stod(t[p]);
        ++p;
        if (p < t.size() && !is_number(t[p]) && t[p] != "+" && t[p] != "-" && t[p] != "<=" &&
            t[p] != ">=" && t[p] != "=" && t[p].back() != ':') {
          e.add(t[p], sign * coef);
          ++p;
        } else {
          e.constant += sign * coef;
        }
      } else {
        e.add(t[p], sign * coef);
        ++p;
      }
      sign = 1.0;
    }
    return p;
  };

  std::size_t p = 0;
  if (!obj_tokens.empty() && obj_tokens[0].back() == ':') p = 1;
  if (read_expr(obj_tokens, p, lp.objective) != obj_tokens.size()) {
    throw ParseError("lp.objective", "unexpected operator");
  }
  p = 0;
  while (p < row_tokens.size()) {
    LinearRow r;
    if (row_tokens[p].back() == ':') {
      r.name = row_tokens[p].substr(0, row_tokens[p].size() - 1);
      ++p;
    } else {
      r.name = "r" + std::to_string(lp.rows.size() + 1);
    }
    p = read_expr(row_tokens, p, r.lhs);
    if (p >= row_tokens.size()) throw ParseError("lp.rows." + r.name, "missing operator");
    const std::string op = row_tokens[p++];
    r.sense = op[0] == '<' ? RowSense::le : op[0] == '>' ? RowSense::ge : RowSense::eq;
    double sign = 1.0;
    if (p < row_tokens.size() && (row_tokens[p] == "-" || row_tokens[p] == "+")) {
      sign = row_tokens[p] == "-" ? -1.0 : 1.0;
      ++p;
    }
    if (p >= row_tokens.size() || !is_number(row_tokens[p])) {
      throw ParseError("lp.rows." + r.name, "missing right-hand side");
    }
    r.rhs = sign * std::stod(row_tokens[p++]) - r.lhs.constant;
    r.lhs.constant = 0;
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

using Assignment = std::map<std::string, int>;

/// Binaries of a schedule: its runs, the switches between them and the
/// skip indicators of each block.
inline Assignment schedule_assignment(const std::vector<Segment>& segs, int n,
                                      const std::vector<ResidualBlock>& blocks) {
  validate_tiling(segs, n);
  Assignment a;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& s = segs[k];
    const bool mobile = s.platform == Platform::mobile;
    a[detail::var(mobile ? 'm' : 'c', s.first, s.last)] = 1;
    if (k + 1 < segs.size()) a[detail::var(mobile ? 'u' : 'd', s.first, s.last)] = 1;
  }
  for (const auto& b : blocks) {
    const Platform src = platform_of(segs, b.source_layer);
    const Platform dst = platform_of(segs, b.sink_layer);
    if (src == Platform::mobile && dst == Platform::cloud) a[detail::block_var("ru", b)] = 1;
    if (src == Platform::cloud && dst == Platform::mobile) a[detail::block_var("rd", b)] = 1;
  }
  return a;
}

struct AssignmentCheck {
  double objective = 0;
  std::vector<std::string> violated;
  std::vector<std::string> unknown;  // assigned names missing from Binary
};

/// Evaluates the objective and every row at a 0/1 assignment. Unlisted
/// binaries are 0. Rows hold within `rel_tol` relative to their magnitude.
inline AssignmentCheck check_assignment(const LinearProgram& lp, const Assignment& a,
                                        double rel_tol = 1e-9) {
  AssignmentCheck out;
  const std::set<std::string> declared(lp.binaries.begin(), lp.binaries.end());
  for (const auto& [v, x] : a)
    if (!declared.count(v)) out.unknown.push_back(v);
  auto value = [&](const LinearExpr& e, double& scale) {
    double s = e.constant;
    scale = std::abs(e.constant);
    for (const auto& [v, c] : e.terms) {
      auto it = a.find(v);
      if (it != a.end() && it->second) {
        s += c * it->second;
        scale += std::abs(c);
      }
    }
    return s;
  };
  double scale = 0;
  out.objective = value(lp.objective, scale);
  for (const auto& r : lp.rows) {
    const double lhs = value(r.lhs, scale);
    const double tol = rel_tol * std::max({1.0, scale, std::abs(r.rhs)});
    bool ok = true;
    switch (r.sense) {
      case RowSense::le: ok = lhs <= r.rhs + tol; break;
      case RowSense::ge: ok = lhs >= r.rhs - tol; break;
      case RowSense::eq: ok = std::abs(lhs - r.rhs) <= tol; break;
    }
    if (!ok) out.violated.push_back(r.name);
  }
  return out;
}

}  // namespace layersplit
