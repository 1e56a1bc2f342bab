#include <gtest/gtest.h>

#include "foil/exists.hpp"
#include "foil/naive.hpp"
#include "util.hpp"

using namespace foil;

TEST(Exists, MatchesNaiveOnRandomFbdd) {
  std::mt19937 g(7);
  for (int it = 0; it < 400; ++it) {
    int n = 1 + g() % 3;
    Diagram d = tu::rand_fbdd(g, n, 12);
    tu::QueryGen q{g, n};
    F f = q.existential(1 + g() % 2, 1 + g() % 5, g() % 3 == 0);
    bool want = eval_naive(d, f);
    bool got = eval_exists_fbdd(d, f);
    ASSERT_EQ(got, want) << to_string(f) << "\n" << model_to_json(Model(d)).dump();
  }
}

TEST(Exists, ExtendedMatchesNaiveOnPerceptrons) {
  std::mt19937 g(11);
  for (int it = 0; it < 400; ++it) {
    int n = 1 + g() % 3;
    Perceptron p = tu::rand_perceptron(g, n);
    tu::QueryGen q{g, n, true};
    F f = q.existential(1 + g() % 2, 1 + g() % 5, g() % 3 == 0);
    bool want = eval_naive(p, f);
    bool got = eval_exists(p, f);
    ASSERT_EQ(got, want) << to_string(f) << "\n" << model_to_json(Model(p)).dump();
  }
}

TEST(Exists, ExtendedAtomsOnDiagramVariablesUnsupported) {
  Diagram d = constant_diagram(2, true);
  EXPECT_THROW(eval_exists(d, parse_core("Exists x, AllPos(x)")), Unsupported);
  EXPECT_TRUE(eval_exists(d, parse_core("AllPos((?,?))")));
}

TEST(Exists, GeneralFragmentRejected) {
  Diagram d = constant_diagram(2, true);
  EXPECT_THROW(eval_exists(d, parse_core("Exists x, ForAll y, x <= y")), Unsupported);
}

TEST(Exists, NonFreeRejectedByFbddEntry) {
  Diagram d;
  d.kind = Kind::DT;
  d.dim = 1;
  int a = d.leaf(false), b = d.leaf(true);
  int inner = d.inner(0, a, b);
  d.root = d.inner(0, a, inner);
  EXPECT_THROW(eval_exists_fbdd(d, parse_core("Exists x, P(x)")), Unsupported);
}

namespace {

Perceptron ptron(std::vector<double> w, double t) { return Perceptron{std::move(w), t, {}}; }

}  // namespace

TEST(Exists, PerceptronOracleExamples) {
  Perceptron p = ptron({1, -2}, 0);
  EXPECT_FALSE(det_all_pos_perceptron(p, parse_inst("(*,?)")));
  p.t = -2;
  auto e = det_all_pos_perceptron(p, parse_inst("(*,?)"));
  ASSERT_TRUE(e);
  EXPECT_EQ(to_string(*e), "(1,?)");
  EXPECT_TRUE(det_all_pos_perceptron(ptron({0, 0}, 0), parse_inst("(?,?)")));
  auto n = det_all_neg_perceptron(ptron({1, 1}, 1), parse_inst("(*,*)"));
  ASSERT_TRUE(n);
  EXPECT_EQ(to_string(*n), "(0,0)");
  EXPECT_FALSE(det_all_neg_perceptron(ptron({0, 0}, 0), parse_inst("(?,?)")));
}

TEST(Exists, PerceptronOraclesMatchBruteForce) {
  std::mt19937 g(3);
  for (int it = 0; it < 1000; ++it) {
    int n = 1 + g() % 8;
    Perceptron p = tu::rand_perceptron(g, n);
    Inst u = tu::rand_inst(g, n, true);
    for (bool positive : {true, false}) {
      auto w = positive ? det_all_pos_perceptron(p, u) : det_all_neg_perceptron(p, u);
      ASSERT_EQ(w.has_value(), tu::det_bf(p, u, positive)) << to_string(u);
      if (!w) continue;
      for (size_t i = 0; i < u.size(); ++i)
        if (u[i] != Val::Dia) ASSERT_EQ((*w)[i], u[i]);
      ASSERT_TRUE(tu::all_completions_bf(p, *w, positive));
      // Mask oracle agrees on presence.
      Oracles o = perceptron_oracles(p);
      ASSERT_EQ((positive ? o.dap : o.dan)(mask_of_undetermined(u)).has_value(), true);
    }
  }
}

TEST(Exists, PapReductionExamples) {
  EXPECT_TRUE(reduce_pap_to_dap(parse_inst("(1,?)"), parse_inst("(0,?)"), parse_inst("(?,?)")).verdict_false);
  // A component pinned to 1 by y and to 0 by z admits only ⊥ in a witness.
  auto r = reduce_pap_to_dap(parse_inst("(?,?)"), parse_inst("(1,1)"), parse_inst("(0,0)"));
  EXPECT_FALSE(r.verdict_false);
  EXPECT_EQ(to_string(r.u), "(?,?)");
  EXPECT_EQ(to_string(reduce_pap_to_dap(parse_inst("(?,0)"), parse_inst("(?,?)"), parse_inst("(?,?)")).u), "(*,0)");
}

TEST(Exists, PapReductionAgreesWithNaive) {
  std::mt19937 g(5);
  for (int it = 0; it < 300; ++it) {
    int n = 1 + g() % 3;
    Perceptron p = tu::rand_perceptron(g, n);
    Inst x = tu::rand_inst(g, n), y = tu::rand_inst(g, n), z = tu::rand_inst(g, n);
    F f = mk_macro("PARTIALALLPOS", {Term::konst(x), Term::konst(y), Term::konst(z)});
    bool want = eval_naive(p, f);
    auto r = reduce_pap_to_dap(x, y, z);
    bool got = !r.verdict_false && tu::det_bf(p, r.u, true);
    ASSERT_EQ(got, want) << to_string(x) << to_string(y) << to_string(z);
    // Round trip through the DAP → PAP direction.
    auto [a, b, c] = dap_to_pap(r.verdict_false ? x : r.u);
    if (!r.verdict_false) {
      F h = mk_macro("PARTIALALLPOS", {Term::konst(a), Term::konst(b), Term::konst(c)});
      ASSERT_EQ(eval_naive(p, h), tu::det_bf(p, r.u, true));
    }
  }
}

TEST(Exists, PapLiteralConstructionCounterexample) {
  // Marking every free component of x as ◇, without looking at y and z,
  // answers yes here although no witness for PartialAllPos exists.
  Perceptron p = ptron({-1}, 0);  // positive iff the feature is 0
  Inst x = parse_inst("(?)"), y = parse_inst("(1)"), z = parse_inst("(?)");
  F f = mk_macro("PARTIALALLPOS", {Term::konst(x), Term::konst(y), Term::konst(z)});
  EXPECT_FALSE(eval_naive(p, f));
  EXPECT_TRUE(tu::det_bf(p, parse_inst("(*)"), true));
  EXPECT_FALSE(tu::det_bf(p, reduce_pap_to_dap(x, y, z).u, true));
}

TEST(Exists, SpecExamples) {
  EXPECT_FALSE(eval_exists(ptron({1, 1}, 2), parse_core("Exists x, P(x) ^ (0,?) <= x")));
  EXPECT_FALSE(eval_exists(ptron({1, 1}, 0), parse_core("Exists x, FULL(x) ^ ~P(x)")));
  EXPECT_TRUE(eval_exists(ptron({0, 0}, 0), parse_core("PARTIALALLPOS((?,?),(?,?),(?,?))")));
  EXPECT_TRUE(eval_naive(Model(constant_diagram(2, true)), parse_core("PARTIALALLPOS((?,?),(?,?),(?,?))")));
  EXPECT_TRUE(eval_exists(Model(constant_diagram(3, false)), parse_core("ForAll x, ~P(x)")));
  EXPECT_TRUE(eval_exists(Model(constant_diagram(3, false)), parse_core("Exists x, x <= x")));
  EXPECT_FALSE(eval_exists(Model(constant_diagram(3, false)), parse_core("Exists x, P(x)")));
}

TEST(Exists, SrAndMsrBatteryOnPerceptrons) {
  std::mt19937 g(9);
  for (int it = 0; it < 300; ++it) {
    int n = 1 + g() % 3;
    Perceptron p = tu::rand_perceptron(g, n);
    Inst x = tu::rand_inst(g, n, false, true), y = tu::rand_inst(g, n);
    const char* m = it % 3 == 0 ? "SR" : it % 3 == 1 ? "MSR" : "PARTIALALLNEG";
    std::vector<Term> args{Term::konst(x), Term::konst(y)};
    if (std::string(m) == "PARTIALALLNEG") args.push_back(Term::konst(tu::rand_inst(g, n)));
    F f = mk_macro(m, args);
    if (args.size() == 3 && g() % 2) {
      std::vector<Term> a2 = args;
      a2[1] = V("y");
      f = mk_exists("y", mk_and(mk_macro(m, a2), mk_sub(V("y"), Term::konst(y))));
    }
    ASSERT_EQ(eval_exists(p, f), eval_naive(p, f)) << to_string(f) << model_to_json(Model(p)).dump();
  }
}

TEST(Exists, GuessEnumerationCountsTwoVariables) {
  // Independent count: all relations containing the diagonal, filtered by
  // transitivity and the type rules.
  auto gs = enumerate_guesses(2, false);
  int count = 0;
  for (int r = 0; r < 4; ++r) {
    bool xy = r & 1, yx = r & 2;
    for (int tx = 0; tx < 2; ++tx)
      for (int ty = 0; ty < 2; ++ty) {
        bool ok = true;
        if (xy && yx && tx != ty) ok = false;
        if (xy && !yx && tx == 0) ok = false;  // type 0 is Pos: a full x absorbs y
        if (yx && !xy && ty == 0) ok = false;
        count += ok;
      }
  }
  EXPECT_EQ((int)gs.size(), count);
  EXPECT_EQ(count, 10);
  EXPECT_EQ(type_catalog(true).size(), 5u);
}

TEST(Exists, DeterminizeDagExamples) {
  Model t = constant_diagram(2, true), f = constant_diagram(2, false);
  TypeAssignment pos{{type_catalog(false)[0]}};
  ContainmentGuess one{{{1}}};
  auto r = determinize_dag(t, pos, one, {}, Oracles{});
  ASSERT_TRUE(r);
  EXPECT_TRUE(classify(t, (*r)[0]));
  EXPECT_FALSE(determinize_dag(f, pos, one, {}, Oracles{}));
}

TEST(Exists, DeterminizeDagCompleteOverWitnessGuesses) {
  // Some witness guess succeeds iff a consistent assignment exists.
  std::mt19937 g(13);
  for (int it = 0; it < 60; ++it) {
    int n = 1 + g() % 2;
    Perceptron p = tu::rand_perceptron(g, n);
    Oracles o = perceptron_oracles(p);
    auto gs = enumerate_guesses(2, true);
    auto& [tau, gu] = gs[g() % gs.size()];
    // Brute force assignment.
    CompletionSearch cs(p);
    auto fits = [&](const Inst& e, const Type& t) {
      bool ep = cs.find(dom_of(e), true).has_value(), en = cs.find(dom_of(e), false).has_value();
      return is_full(e) == t.full && pos(p, e) == t.pos && ep == t.exists_pos && en == t.exists_neg;
    };
    bool want = false;
    Inst a(n, Val::Bot);
    do {
      Inst b(n, Val::Bot);
      do {
        std::vector<Inst> v{a, b};
        bool ok = fits(a, tau.t[0]) && fits(b, tau.t[1]);
        for (int i = 0; i < 2 && ok; ++i)
          for (int j = 0; j < 2 && ok; ++j)
            if (subsumes(v[i], v[j]) != bool(gu.P[i][j])) ok = false;
        want = want || ok;
      } while (next_inst(b));
    } while (next_inst(a));
    std::vector<int> nonfull;
    for (int i = 0; i < 2; ++i)
      if (!tau.t[i].full) nonfull.push_back(i);
    bool got = false;
    for (const FactSet& fs : guess_witnesses(gu, nonfull, n))
      if (determinize_dag(p, tau, gu, fs, o)) {
        got = true;
        break;
      }
    ASSERT_EQ(got, want) << it;
  }
}
