// One PASS/FAIL line per acceptance criterion. Exit status 1 when any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "foil/exists.hpp"
#include "foil/hl.hpp"
#include "foil/naive.hpp"
#include "foil/reductions.hpp"
#include "foil/width.hpp"
#include "hl_oracle.hpp"
#include "util.hpp"

using namespace foil;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// 1. ∃/∀ fragment over free diagrams against the naive oracle.
Outcome exists_fbdd() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937 g(101);
  int bad = 0, n_cases = 600;
  for (int it = 0; it < n_cases; ++it) {
    int n = 1 + g() % 3;
    Diagram d = tu::rand_fbdd(g, n, 12);
    tu::QueryGen q{g, n};
    F f = q.existential(1 + g() % 3, 1 + g() % 6, it % 2 == 1);
    bad += eval_exists_fbdd(d, f) != eval_naive(d, f);
  }
  double s = since(t0);
  return {bad == 0 && s < 60, fmt("%d cases, %d mismatches, %.2f s", n_cases, bad, s)};
}

// 2. SAT round trip through the selector tree and every rendering of ψ.
Outcome sat_round_trip() {
  std::mt19937 g(202);
  int bad = 0, yes = 0;
  for (int it = 0; it < 200; ++it) {
    Cnf c = tu::rand_cnf(g, 3 + g() % 4, 1 + g() % 6);
    bool ref = brute_sat(c);
    yes += ref;
    SatTree st = tree_from_3cnf(c);
    Binding b{{"x", st.e}};
    for (auto form : {PsiForm::Stable, PsiForm::Nested, PsiForm::TwoVar})
      bad += eval_naive(st.tree, psi_formula(form), b) != ref;
  }
  // Clauses over 3 distinct variables each exclude 1/8 of the assignments,
  // so ≤ 6 of them are always satisfiable; the NO side needs ≥ 8 clauses.
  int unsat_bad = 0, extra = 24;
  for (int it = 0; it < extra; ++it) {
    Cnf c = tu::unsat_core(g, 3 + it % 2, it % 3);
    SatTree st = tree_from_3cnf(c);
    Binding b{{"x", st.e}};
    for (auto form : {PsiForm::Stable, PsiForm::Nested, PsiForm::TwoVar})
      unsat_bad += eval_naive(st.tree, psi_formula(form), b) != brute_sat(c);
  }
  return {bad == 0 && unsat_bad == 0,
          fmt("200 formulas x 3 forms: %d mismatches (%d satisfiable; the bounds admit no UNSAT formula); "
              "extra %d UNSAT formulas with 8-10 clauses x 3 forms: %d mismatches",
              bad, yes, extra, unsat_bad)};
}

// 3. Perceptron determinization oracles against brute force.
Outcome perceptron_oracles_bf() {
  std::mt19937 g(303);
  int bad = 0, found = 0;
  for (int it = 0; it < 1000; ++it) {
    int n = 1 + g() % 8;
    Perceptron p = tu::rand_perceptron(g, n);
    Inst u = tu::rand_inst(g, n, true);
    for (bool positive : {true, false}) {
      auto w = positive ? det_all_pos_perceptron(p, u) : det_all_neg_perceptron(p, u);
      bool ok = w.has_value() == tu::det_bf(p, u, positive);
      if (ok && w) {
        ++found;
        for (size_t i = 0; i < u.size(); ++i) ok = ok && (u[i] == Val::Dia || (*w)[i] == u[i]);
        ok = ok && tu::all_completions_bf(p, *w, positive);
      }
      bad += !ok;
    }
  }
  return {bad == 0, fmt("1000 cases x {pos,neg}: %d mismatches (%d witnesses verified)", bad, found)};
}

// 4. Extended fragment over perceptrons, random plus SR/MSR/PartialAll batteries.
Outcome exists_plus_perceptrons() {
  std::mt19937 g(404);
  int bad = 0, total = 0;
  for (int it = 0; it < 200; ++it) {
    int n = 1 + g() % 3;
    Perceptron p = tu::rand_perceptron(g, n);
    tu::QueryGen q{g, n, true};
    F f = q.existential(1 + g() % 2, 1 + g() % 5, g() % 3 == 0);
    bad += eval_exists_plus(p, f, {}, perceptron_oracles(p)) != eval_naive(p, f);
    ++total;
  }
  const char* names[] = {"SR", "MSR", "PARTIALALLPOS", "PARTIALALLNEG"};
  for (int it = 0; it < 200; ++it) {
    int n = 1 + g() % 3;
    Perceptron p = tu::rand_perceptron(g, n);
    std::string m = names[it % 4];
    Inst x = tu::rand_inst(g, n, false, m[0] != 'P'), y = tu::rand_inst(g, n);
    std::vector<Term> args{Term::konst(x), Term::konst(y)};
    if (m[0] == 'P') args.push_back(Term::konst(tu::rand_inst(g, n)));
    F f = mk_macro(m, args);
    if (args.size() == 3 && g() % 2) {
      // Quantify the second argument, kept below the drawn constant. SR and
      // MSR already carry a universal block, so they stay closed.
      std::vector<Term> a2 = args;
      a2[1] = V("y");
      f = mk_exists("y", mk_and(mk_macro(m, a2), mk_sub(V("y"), Term::konst(y))));
    }
    bad += eval_exists_plus(p, f, {}, perceptron_oracles(p)) != eval_naive(p, f);
    ++total;
  }
  return {bad == 0 && total >= 300, fmt("%d cases (200 random, 200 SR/MSR/PartialAllPos/Neg): %d mismatches", total, bad)};
}

// 5 and 6 share the width battery; the stats of every call are collected.
struct WidthBattery {
  int cases = 0, mismatches = 0, psi_cases = 0;
  int applies = 0, sum_violations = 0, product_violations = 0;
  int projects = 0, project_violations = 0;
  int pointwise_cases = 0, pointwise_bad = 0;
  std::string first_sum_violation;

  void record(const ApplyRecord& r) {
    ++applies;
    bool sum = true, prod = true;
    for (size_t j = 0; j < r.out.size(); ++j) {
      sum = sum && r.out[j] <= r.in1[j] + r.in2[j];
      prod = prod && r.out[j] <= r.in1[j] * r.in2[j];
      if (r.out[j] > r.in1[j] + r.in2[j] && first_sum_violation.empty())
        first_sum_violation = fmt("level %zu: %d nodes from operands of %d and %d", j, r.out[j], r.in1[j], r.in2[j]);
    }
    sum_violations += !sum;
    product_violations += !prod;
  }
  void record(const ProjectRecord& r) {
    ++projects;
    project_violations += r.in_width < 31 && r.out_width > (1 << r.in_width);
  }
  void record(const WidthStats& st) {
    for (const auto& a : st.applies) record(a);
    for (const auto& p : st.projects) record(p);
  }

  void run() {
    std::mt19937 g(505);
    // Pointwise semantics of apply and project, exhaustive at dim ≤ 4.
    for (int it = 0; it < 120; ++it) {
      int n = 1 + g() % 4;
      Diagram a = tu::rand_ordered(g, n, 2, true), b = tu::rand_ordered(g, n, 2, true);
      for (BoolOp op : {BoolOp::And, BoolOp::Or}) {
        ApplyRecord rec;
        Diagram r = tdd_apply(op, a, b, &rec);
        record(rec);
        ++pointwise_cases;
        Inst e = all_bot(n);
        do {
          bool x = classify(a, e), y = classify(b, e);
          pointwise_bad += classify(r, e) != (op == BoolOp::And ? (x && y) : (x || y));
        } while (next_inst(e));
      }
      std::set<int> S;
      for (int i = 0; i < n; ++i)
        if (g() % 2) S.insert(i);
      if ((int)S.size() == n) S.erase(S.begin());
      for (Quant q : {Quant::Exists, Quant::Forall}) {
        ProjectRecord pr;
        Diagram p = tdd_project(a, S, q, &pr);
        record(pr);
        ++pointwise_cases;
        std::vector<int> keep;
        for (int i = 0; i < n; ++i)
          if (!S.count(i)) keep.push_back(i);
        Inst e = all_bot(n);
        std::map<Inst, std::pair<bool, bool>> agg;  // any, all over S
        do {
          Inst k;
          for (int i : keep) k.push_back(e[i]);
          bool v = classify(a, e);
          auto [it2, fresh] = agg.emplace(k, std::make_pair(v, v));
          if (!fresh) it2->second = {it2->second.first || v, it2->second.second && v};
        } while (next_inst(e));
        for (const auto& [k, v] : agg) pointwise_bad += classify(p, k) != (q == Quant::Exists ? v.first : v.second);
      }
    }
    // Full FOIL over complete width ≤ 2 OBDDs, two quantifier blocks.
    for (int it = 0; it < 220; ++it) {
      int n = 1 + g() % 3;
      Diagram m = tu::rand_ordered(g, n, 2, false, true);
      tu::QueryGen q{g, n, it % 2 == 0};
      F body = q.qf({"x", "y"}, 1 + g() % 5);
      F f = g() % 2 ? mk_exists("x", mk_forall("y", body)) : mk_forall("x", mk_exists("y", body));
      WidthStats st;
      mismatches += eval_full_foil(m, f, {}, {}, &st) != eval_naive(m, f);
      record(st);
      ++cases;
    }
    // ψ(x) of the SAT reduction over 3-feature width ≤ 2 diagrams.
    for (int it = 0; it < 30; ++it) {
      Diagram m = tu::rand_ordered(g, 3, 2, false, true);
      Binding b{{"x", tu::rand_inst(g, 3)}};
      F f = psi_formula(PsiForm(it % 3));
      WidthStats st;
      mismatches += eval_full_foil(m, f, b, {}, &st) != eval_naive(m, f, b);
      record(st);
      ++cases;
      ++psi_cases;
    }
  }
};

Outcome width_bounds(const WidthBattery& w) {
  std::string d = fmt(
      "%d apply calls: per-label sum bound violated on %d (e.g. %s); product bound violated on %d; "
      "%d project calls: 2^k bound violated on %d; pointwise checks %d, wrong %d",
      w.applies, w.sum_violations, w.first_sum_violation.empty() ? "none" : w.first_sum_violation.c_str(),
      w.product_violations, w.projects, w.project_violations, w.pointwise_cases, w.pointwise_bad);
  if (w.sum_violations)
    d += ". The per-label sum bound does not hold for the pair construction (a 2-node and a 3-node level can "
         "combine into 6 nodes); only the product bound is valid";
  return {w.sum_violations == 0 && w.product_violations == 0 && w.project_violations == 0 && w.pointwise_bad == 0, d};
}

Outcome width_engine(const WidthBattery& w) {
  return {w.mismatches == 0 && w.cases >= 200,
          fmt("%d cases (%d with psi(x)): %d mismatches", w.cases, w.psi_cases, w.mismatches)};
}

// 7. Binarization of real-valued trees against the interval oracle.
Outcome binarization() {
  std::string why;
  // Worked example: thresholds 16, 21, 25 in the tree and 27 in the query.
  Schema age = schema_from_json(nlohmann::json::parse(
      R"({"features":[{"name":"age","type":"real"}],"classes":["bad","good"]})"));
  RealTree t;
  int T = t.leaf(true), Fl = t.leaf(false);
  int a16 = t.split(0, 16, Fl, T), a25 = t.split(0, 25, T, Fl);
  t.root = t.split(0, 21, a25, a16);
  PartitionMap pm = partition_sets(t, parse_hl("exists x, good(x) and x.age <= 27", age), age);
  std::set<int> intervals;
  for (double v : {0.0, 16.0, 18.0, 21.0, 23.0, 25.0, 26.0, 27.0, 30.0}) intervals.insert(pm.interval_of(0, v));
  bool worked = pm.P[0] == std::vector<double>{16, 21, 25, 27} && pm.dim == 4 && intervals.size() == 5;
  if (!worked) why = "worked example differs; ";

  int bad = 0, n = 0;
  Schema s = tu::student_schema();
  RealTree small;
  small.root = small.split(0, 21, small.leaf(false), small.leaf(true));
  auto qs = tu::student_queries();
  for (const RealTree& tr : {tu::student_tree(), small})
    for (const auto& text : qs) {
      H q = parse_hl(text, s);
      bad += hl_eval(tr, q, s).value != tu::HLOracle(tr, s, q)(q);
      ++n;
    }
  std::mt19937 g(707);
  int rbad = 0, rn = 0;
  for (int it = 0; it < 300; ++it) {
    Schema rs = tu::rand_schema(g, 1 + g() % 3);
    RealTree rt = tu::rand_real_tree(g, rs, 15);
    H q = parse_hl(tu::HLGen{g, rs}.query(1 + g() % 2, 1 + g() % 4, it % 5 == 0), rs);
    try {
      rbad += hl_eval(rt, q, rs).value != tu::HLOracle(rt, rs, q)(q);
      ++rn;
    } catch (const Unsupported&) {
    }
  }
  return {worked && bad == 0 && rbad == 0 && qs.size() >= 20,
          why + fmt("worked example: P = {16,21,25,27}, %d slots, %zu intervals; %zu handcrafted queries x 2 trees: "
                    "%d mismatches; %d random cases: %d mismatches",
                    pm.dim, intervals.size(), qs.size(), bad, rn, rbad)};
}

// 8. DAP and subset-sum generators.
Outcome generators() {
  std::mt19937 g(808);
  int dap = 0, dap_bad = 0, dap_yes = 0;
  while (dap < 150) {
    int n = 3 + g() % 3;
    Cnf c = dap % 3 == 0 ? tu::unsat_core(g, n, 0) : tu::rand_cnf(g, n, 1 + g() % 8);
    DapInstance di = dap_from_3sat(c);
    if (di.tree.dim > 12) continue;
    ++dap;
    bool ref = brute_sat(c);
    dap_yes += ref;
    dap_bad += tu::brute_dap(di.tree, di.u) != ref;
  }
  int ss = 0, ss_bad = 0, ss_yes = 0;
  for (int it = 0; it < 80; ++it) {
    int n = 1 + g() % 12;
    std::vector<long long> s(n);
    for (auto& x : s) x = g() % 12;
    long long k = g() % 30;
    Perceptron p = perceptron_from_subset_sum(s, k);
    bool ref = subset_sum(s, k);
    ss_yes += ref;
    ss_bad += eval_naive(p, biased_model_query(p)) != ref;
    ++ss;
  }
  return {dap_bad == 0 && ss_bad == 0,
          fmt("DAP: %d instances (%d satisfiable), %d mismatches; subset sum: %d instances up to 12 elements "
              "(%d yes), %d mismatches",
              dap, dap_yes, dap_bad, ss, ss_yes, ss_bad)};
}

// 9. Default benchmark grid with the existential engine.
Outcome bench_smoke() {
  Grid gr;
  gr.seed = 909;
  BenchOptions o;
  o.reps = 5;
  o.engine = Engine::Exists;
  auto t0 = std::chrono::steady_clock::now();
  BenchReport r = bench_grid(gr, o);
  double s = since(t0);
  size_t cells = r.cells.size();
  bool ok = r.failed == 0 && cells == 24u * 60u && r.max <= 10.0 && r.mean <= 10 * 0.213;
  return {ok, fmt("%zu cells x 5 reps: %d completed, %d failed; mean %.6f s, max %.6f s, stddev %.6f s; "
                  "wall %.1f s",
                  cells, r.completed, r.failed, r.mean, r.max, r.stddev, s)};
}

}  // namespace

int main() {
  WidthBattery wb;
  wb.run();
  std::vector<std::pair<std::string, std::function<Outcome()>>> crit = {
      {"exists/forall fragment over FBDDs = naive", exists_fbdd},
      {"SAT round trip, all psi forms", sat_round_trip},
      {"perceptron determinization oracles", perceptron_oracles_bf},
      {"extended fragment over perceptrons = naive", exists_plus_perceptrons},
      {"width algebra bounds", [&] { return width_bounds(wb); }},
      {"width engine = naive", [&] { return width_engine(wb); }},
      {"binarization vs interval oracle", binarization},
      {"DAP and subset-sum generators", generators},
      {"benchmark smoke, default grid", bench_smoke},
  };
  int failed = 0;
  for (size_t i = 0; i < crit.size(); ++i) {
    Outcome o;
    try {
      o = crit[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, crit[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", crit.size(), failed);
  return failed ? 1 : 0;
}
