#include <gtest/gtest.h>

#include <random>

#include "foil/exists.hpp"
#include "foil/naive.hpp"
#include "foil/reductions.hpp"
#include "foil/width.hpp"
#include "util.hpp"

using namespace foil;

namespace {

int count_leaves(const Diagram& d) {
  int n = 0;
  for (const auto& x : d.nodes) n += x.leaf;
  return n;
}

}  // namespace

TEST(Reductions, CheckCnfRejectsMalformed) {
  EXPECT_THROW(check_cnf(Cnf{2, {{1, 2, 3}}}), Error);
  EXPECT_THROW(check_cnf(Cnf{3, {{1, -1, 2}}}), Error);
  EXPECT_THROW(check_cnf(Cnf{3, {{1, 0, 2}}}), Error);
  EXPECT_NO_THROW(check_cnf(Cnf{3, {{1, -2, 3}}}));
  EXPECT_THROW(tree_from_3cnf(Cnf{2, {{1, 2, 2}}}), Error);
}

TEST(Reductions, To3CnfPreservesSatisfiability) {
  std::mt19937 g(11);
  for (int it = 0; it < 300; ++it) {
    int n = 1 + g() % 5;
    std::vector<std::vector<int>> cls(1 + g() % 5);
    for (auto& c : cls) {
      int len = 1 + g() % 6;
      for (int j = 0; j < len; ++j) c.push_back(int(1 + g() % n) * (g() % 2 ? 1 : -1));
    }
    // Reference: brute force over the original clauses.
    bool ref = false;
    for (int a = 0; a < (1 << n) && !ref; ++a) {
      bool ok = true;
      for (const auto& c : cls) {
        bool s = false;
        for (int l : c) s = s || (((a >> (std::abs(l) - 1)) & 1) == (l > 0));
        ok = ok && s;
      }
      ref = ok;
    }
    Cnf c = to_3cnf(n, cls);
    check_cnf(c);
    ASSERT_EQ(brute_sat(c), ref) << to_dimacs(c);
  }
  EXPECT_FALSE(brute_sat(to_3cnf(1, {{1}, {-1}})));
  EXPECT_FALSE(brute_sat(to_3cnf(2, {{}})));
}

TEST(Reductions, DimacsRoundTrip) {
  Cnf c = parse_dimacs("c comment\np cnf 4 2\n1 -2 3 0\n-1 2 4 0\n");
  EXPECT_EQ(c.nvars, 4);
  ASSERT_EQ(c.clauses.size(), 2u);
  EXPECT_EQ(c.clauses[1], (std::array<int, 3>{-1, 2, 4}));
  Cnf d = parse_dimacs(to_dimacs(c));
  EXPECT_EQ(d.clauses, c.clauses);
  Cnf e = parse_dimacs("p cnf 2 2\n1 0\n-1 2 0\n");
  EXPECT_GT(e.nvars, 2);
  EXPECT_TRUE(brute_sat(e));
  EXPECT_THROW(parse_dimacs("1 2 3 0\n"), Error);
}

TEST(Reductions, SatTreeShape) {
  Cnf c{3, {{1, 2, 3}}};
  SatTree st = tree_from_3cnf(c);
  EXPECT_EQ(st.tree.dim, 4);
  Report r = validate(st.tree);
  EXPECT_TRUE(r.is_free);
  EXPECT_TRUE(r.is_ordered);
  EXPECT_EQ(st.e, (Inst{Val::One, Val::Bot, Val::Bot, Val::Bot}));
  EXPECT_EQ(count_leaves(st.tree), 9);  // 8 clause paths + the final true leaf
  Binding b{{"x", st.e}};
  for (auto form : {PsiForm::Stable, PsiForm::Nested, PsiForm::TwoVar})
    EXPECT_TRUE(eval_naive(st.tree, psi_formula(form), b));

  // (x1) ∧ (¬x1), padded with fresh variables.
  Cnf u = to_3cnf(1, {{1}, {-1}});
  SatTree su = tree_from_3cnf(u);
  Binding bu{{"x", su.e}};
  for (auto form : {PsiForm::Stable, PsiForm::Nested, PsiForm::TwoVar})
    EXPECT_FALSE(eval_naive(su.tree, psi_formula(form), bu));
}

TEST(Reductions, PsiFormsAreGeneral) {
  for (auto form : {PsiForm::Stable, PsiForm::Nested, PsiForm::TwoVar}) {
    F f = psi_formula(form);
    EXPECT_EQ(free_vars(f), std::set<std::string>{"x"});
    EXPECT_EQ(fragment_of(expand_plus(f)), Fragment::GeneralFOIL);
  }
  EXPECT_EQ(all_names(psi_formula(PsiForm::TwoVar)), (std::set<std::string>{"x", "y"}));
}

TEST(Reductions, SatRoundTripAllForms) {
  std::mt19937 g(2024);
  for (int it = 0; it < 200; ++it) {
    int n = 3 + g() % 4, m = 1 + g() % 6;
    Cnf c = tu::rand_cnf(g, n, m);
    bool ref = brute_sat(c);
    SatTree st = tree_from_3cnf(c);
    ASSERT_TRUE(validate(st.tree).is_ordered);
    Binding b{{"x", st.e}};
    for (auto form : {PsiForm::Stable, PsiForm::Nested, PsiForm::TwoVar}) {
      F f = psi_formula(form);
      ASSERT_EQ(eval_naive(st.tree, f, b), ref) << it << " form " << int(form) << "\n" << to_dimacs(c);
      if (it % 10 == 0 && form != PsiForm::Stable) ASSERT_EQ(eval_full_foil(st.tree, f, b), ref) << it;
    }
  }
}

TEST(Reductions, UnsatRoundTripAllForms) {
  std::mt19937 g(99);
  for (int it = 0; it < 24; ++it) {
    Cnf c = tu::unsat_core(g, 3 + it % 2, it % 3);
    ASSERT_FALSE(brute_sat(c));
    SatTree st = tree_from_3cnf(c);
    Binding b{{"x", st.e}};
    for (auto form : {PsiForm::Stable, PsiForm::Nested, PsiForm::TwoVar})
      ASSERT_FALSE(eval_naive(st.tree, psi_formula(form), b)) << it << " form " << int(form);
    if (it % 4 == 0) ASSERT_FALSE(eval_full_foil(st.tree, psi_formula(PsiForm::Nested), b));
    // Dropping one clause of the core makes it satisfiable again when no
    // extra clause interferes.
    if (it % 3 == 0) {
      Cnf d = c;
      d.clauses.erase(d.clauses.begin());
      ASSERT_TRUE(brute_sat(d));
      SatTree sd = tree_from_3cnf(d);
      ASSERT_TRUE(eval_naive(sd.tree, psi_formula(PsiForm::Nested), Binding{{"x", sd.e}}));
    }
  }
}

TEST(Reductions, DapMatchesSat) {
  std::mt19937 g(7);
  int tested = 0, sat = 0;
  while (tested < 150) {
    int n = 3 + g() % 3, m = 1 + g() % 8;
    Cnf c = tested % 3 == 0 ? tu::unsat_core(g, n, 0) : tu::rand_cnf(g, n, m);
    m = (int)c.clauses.size();
    DapInstance di = dap_from_3sat(c);
    if (di.tree.dim > 12) continue;
    ++tested;
    EXPECT_EQ(di.padded_clauses, 1 << di.k);
    EXPECT_GE(di.padded_clauses, m);
    EXPECT_LT(di.padded_clauses, 2 * m + (m == 1));
    Report r = validate(di.tree);
    ASSERT_TRUE(r.is_ordered && r.is_free);
    for (int i = 0; i < di.k; ++i) EXPECT_EQ(di.u[i], Val::Bot);
    for (int i = di.k; i < di.tree.dim; ++i) EXPECT_EQ(di.u[i], Val::Dia);
    bool ref = brute_sat(c);
    sat += ref;
    ASSERT_EQ(tu::brute_dap(di.tree, di.u), ref) << to_dimacs(c);
  }
  EXPECT_GT(sat, 50);
  EXPECT_LT(sat, 120);
}

TEST(Reductions, DapSingleClauseHasNoSelectors) {
  DapInstance di = dap_from_3sat(Cnf{3, {{1, -2, 3}}});
  EXPECT_EQ(di.k, 0);
  EXPECT_EQ(di.tree.dim, 3);
  EXPECT_TRUE(tu::brute_dap(di.tree, di.u));
  EXPECT_THROW(dap_from_3sat(Cnf{3, {}}), Error);
}

TEST(Reductions, SubsetSumExamples) {
  EXPECT_TRUE(subset_sum({1, 2}, 3));
  EXPECT_FALSE(subset_sum({2, 4}, 3));
  EXPECT_TRUE(subset_sum({5}, 5));
  EXPECT_TRUE(subset_sum({5}, 0));

  Perceptron p = perceptron_from_subset_sum({1, 2}, 3);
  EXPECT_EQ(p.w, (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(p.t, 4);
  EXPECT_EQ(p.prot, std::vector<int>{2});
  F q = biased_model_query(p);
  EXPECT_TRUE(eval_naive(p, q));
  EXPECT_FALSE(eval_naive(perceptron_from_subset_sum({2, 4}, 3), biased_model_query(perceptron_from_subset_sum({2, 4}, 3))));
  Perceptron s = perceptron_from_subset_sum({7}, 7);
  EXPECT_TRUE(eval_naive(s, biased_model_query(s)));
}

TEST(Reductions, SubsetSumRoundTrip) {
  std::mt19937 g(5);
  for (int it = 0; it < 60; ++it) {
    int n = 1 + g() % (it < 50 ? 6 : 12);
    std::vector<long long> s(n);
    for (auto& x : s) x = g() % 12;
    long long k = g() % 30;
    Perceptron p = perceptron_from_subset_sum(s, k);
    ASSERT_EQ(eval_naive(p, biased_model_query(p)), subset_sum(s, k)) << it;
  }
}

TEST(Reductions, RandomQueryParsesAndIsDeterministic) {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    int dim = 1 + seed % 7, nv = 1 + seed % 4, size = 1 + seed % 9;
    std::string q = random_query(dim, nv, size, seed, seed % 5 == 0);
    EXPECT_EQ(q, random_query(dim, nv, size, seed, seed % 5 == 0));
    F f;
    ASSERT_NO_THROW(f = parse_core(q)) << q;
    EXPECT_TRUE(free_vars(f).empty());
    int cd = const_dim(f);
    EXPECT_TRUE(cd == -1 || cd == dim);
    Fragment fr = fragment_of(f);
    EXPECT_EQ(fr, seed % 5 == 0 ? Fragment::ForallFOIL : Fragment::ExistsFOIL) << q;
  }
  EXPECT_NE(random_query(5, 2, 6, 1), random_query(5, 2, 6, 2));
}

TEST(Reductions, RandomTree) {
  for (int leaves : {1, 2, 7, 100, 1000}) {
    Diagram d = random_tree(350, leaves, 42 + leaves);
    EXPECT_EQ(count_leaves(d), leaves);
    Report r = validate(d);
    EXPECT_TRUE(r.is_free);
    EXPECT_EQ(model_to_json(Model(d)), model_to_json(Model(random_tree(350, leaves, 42 + leaves))));
  }
  Diagram full = random_tree(3, 8, 1);
  EXPECT_EQ(count_leaves(full), 8);
  EXPECT_THROW(random_tree(3, 9, 1), Error);
  EXPECT_THROW(random_tree(3, 0, 1), Error);
}

TEST(Reductions, BenchShape) {
  std::vector<Model> ms{random_tree(6, 10, 3)};
  std::vector<F> qs{parse_core(random_query(6, 2, 5, 9))};
  BenchOptions o;
  o.reps = 5;
  o.oracle = true;
  BenchReport r = bench(ms, qs, o);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].seconds.size(), 5u);
  EXPECT_TRUE(r.cells[0].answer.has_value());
  EXPECT_EQ(r.cells[0].oracle_ok, std::optional<bool>(true));
  EXPECT_EQ(r.completed, 1);
  EXPECT_EQ(r.mismatches, 0);
  EXPECT_GE(r.max, r.mean);
  auto j = r.to_json();
  EXPECT_EQ(j["cells"].size(), 1u);
  EXPECT_NE(r.table().find("completed 1"), std::string::npos);

  // Fragment mismatch is recorded per cell, not thrown.
  std::vector<F> gen{parse_core("Exists x, ForAll y, x <= y")};
  BenchReport bad = bench(ms, gen, o);
  EXPECT_EQ(bad.failed, 1);
  EXPECT_FALSE(bad.cells[0].error.empty());
}

TEST(Reductions, BenchOracleBattery) {
  std::vector<Model> ms;
  std::vector<F> qs;
  for (int i = 0; i < 4; ++i) ms.push_back(random_tree(3, 1 + i * 2, i));
  for (int i = 0; i < 10; ++i) qs.push_back(parse_core(random_query(3, 1 + i % 3, 2 + i % 5, 100 + i, i % 2)));
  BenchOptions o;
  o.reps = 1;
  o.oracle = true;
  BenchReport r = bench(ms, qs, o);
  EXPECT_EQ(r.completed, 40);
  EXPECT_EQ(r.mismatches, 0);
}

TEST(Reductions, GridIsDeterministic) {
  Grid gr;
  gr.dims = {10, 20};
  gr.leaves = {5, 50};
  gr.queries = 4;
  gr.seed = 3;
  BenchOptions o;
  o.reps = 1;
  o.oracle = false;
  BenchReport a = bench_grid(gr, o), b = bench_grid(gr, o);
  ASSERT_EQ(a.cells.size(), 16u);
  EXPECT_EQ(a.completed, 16);
  for (size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].answer, b.cells[i].answer);
  EXPECT_EQ(a.cells[5].label, "dim=10 leaves=50");
  EXPECT_EQ(grid_query(gr, 10, 1), grid_query(gr, 10, 1));
}
