#pragma once

#include <functional>
#include <random>

#include "foil/formula.hpp"
#include "foil/model.hpp"
#include "foil/reductions.hpp"

namespace tu {

using namespace foil;

inline Inst rand_inst(std::mt19937& g, int n, bool dia = false, bool full = false) {
  Inst e(n);
  for (auto& v : e) v = full ? bit(g() % 2) : Val(g() % (dia ? 4 : 3));
  return e;
}

// Random free diagram: every path tests each feature at most once. Subgraphs
// with the same remaining feature set are shared now and then.
inline Diagram rand_fbdd(std::mt19937& g, int n, int max_nodes) {
  Diagram d;
  d.kind = Kind::FBDD;
  d.dim = n;
  int l0 = d.leaf(false), l1 = d.leaf(true);
  std::map<unsigned, std::vector<int>> pool;
  std::function<int(unsigned, int)> go = [&](unsigned avail, int depth) -> int {
    if (!avail || (int)d.nodes.size() >= max_nodes || g() % 4 == 0 || depth > n) return g() % 2 ? l1 : l0;
    auto& p = pool[avail];
    if (!p.empty() && g() % 3 == 0) return p[g() % p.size()];
    std::vector<int> vs;
    for (int i = 0; i < n; ++i)
      if (avail >> i & 1) vs.push_back(i);
    int v = vs[g() % vs.size()];
    int lo = go(avail & ~(1u << v), depth + 1);
    int hi = go(avail & ~(1u << v), depth + 1);
    if (lo == hi) return lo;
    int u = d.inner(v, lo, hi);
    p.push_back(u);
    return u;
  };
  d.root = go((1u << n) - 1, 0);
  return d;
}

// Complete ordered diagram with at most `width` nodes per level. Ternary
// diagrams get a ⊥-edge on every node.
inline Diagram rand_ordered(std::mt19937& g, int n, int width, bool ternary, bool shuffle = false) {
  Diagram d;
  d.kind = ternary ? Kind::COTDD : Kind::COBDD;
  d.dim = n;
  d.order.resize(n);
  for (int i = 0; i < n; ++i) d.order[i] = i;
  if (shuffle) std::shuffle(d.order.begin(), d.order.end(), g);
  std::vector<int> below{d.leaf(false), d.leaf(true)};
  for (int l = n; l-- > 0;) {
    int w = l == 0 ? 1 : 1 + int(g() % width);
    std::vector<int> cur;
    for (int k = 0; k < w; ++k) {
      auto pick = [&] { return below[g() % below.size()]; };
      int lo = pick(), hi = pick();
      cur.push_back(d.inner(d.order[l], lo, hi, ternary ? pick() : -1));
    }
    below = cur;
  }
  d.root = below[0];
  return d;
}

inline Perceptron rand_perceptron(std::mt19937& g, int n) {
  Perceptron p;
  for (int i = 0; i < n; ++i) p.w.push_back(int(g() % 7) - 3);
  p.t = int(g() % 7) - 3;
  return p;
}

struct QueryGen {
  std::mt19937& g;
  int n;
  bool extended = false;
  int nconst = 0;

  Term term(const std::vector<std::string>& vars) {
    if (vars.empty() || g() % 5 == 0) return Term::konst(rand_inst(g, n));
    return V(vars[g() % vars.size()]);
  }

  F atom(const std::vector<std::string>& vars) {
    int k = g() % (extended ? 7 : 4);
    switch (k) {
      case 0: return mk_pos(term(vars));
      case 1: return mk_sub(term(vars), term(vars));
      case 2: return mk_eq(term(vars), term(vars));
      case 3: return mk_macro("FULL", {term(vars)});
      case 4: return mk_allpos(term(vars));
      case 5: return mk_allneg(term(vars));
      default: return mk_full(term(vars));
    }
  }

  F qf(const std::vector<std::string>& vars, int size) {
    if (size <= 1) {
      F a = atom(vars);
      return g() % 3 == 0 ? mk_not(a) : a;
    }
    int l = 1 + g() % (size - 1);
    F a = qf(vars, l), b = qf(vars, size - l);
    F r = g() % 2 ? mk_and(a, b) : mk_or(a, b);
    return g() % 6 == 0 ? mk_not(r) : r;
  }

  // Existential formula (optionally negated into the universal fragment).
  F existential(int nvars, int size, bool universal = false) {
    std::vector<std::string> vars;
    for (int i = 0; i < nvars; ++i) vars.push_back("x" + std::to_string(i));
    F f = qf(vars, size);
    for (int i = nvars; i-- > 0;) f = mk_exists(vars[i], f);
    return universal ? mk_not(f) : f;
  }
};

inline bool all_completions_bf(const Model& m, const Inst& e, bool positive) {
  Inst z = e;
  std::vector<int> fr;
  for (size_t i = 0; i < e.size(); ++i)
    if (e[i] == Val::Bot) fr.push_back((int)i);
  for (long long s = 0; s < (1LL << fr.size()); ++s) {
    for (size_t k = 0; k < fr.size(); ++k) z[fr[k]] = bit(s >> k & 1);
    if (classify(m, z) != positive) return false;
  }
  return true;
}

// Brute force over all 3^(#◇) determinizations.
inline bool det_bf(const Model& m, const Inst& u, bool positive) {
  std::vector<int> dia;
  for (size_t i = 0; i < u.size(); ++i)
    if (u[i] == Val::Dia) dia.push_back((int)i);
  Inst cur(dia.size(), Val::Bot), e = u;
  do {
    for (size_t k = 0; k < dia.size(); ++k) e[dia[k]] = cur[k];
    if (all_completions_bf(m, e, positive)) return true;
  } while (next_inst(cur));
  return false;
}

inline Cnf rand_cnf(std::mt19937& g, int nvars, int ncl) {
  Cnf c;
  c.nvars = nvars;
  for (int i = 0; i < ncl; ++i) {
    std::vector<int> v;
    for (int j = 1; j <= nvars; ++j) v.push_back(j);
    std::shuffle(v.begin(), v.end(), g);
    c.clauses.push_back({v[0] * (g() % 2 ? 1 : -1), v[1] * (g() % 2 ? 1 : -1), v[2] * (g() % 2 ? 1 : -1)});
  }
  return c;
}

// Every sign pattern over three of the variables, plus `extra` random clauses:
// unsatisfiable, and small enough for brute-force checks. Random 3-CNF with
// ≤ 6 clauses can never be unsatisfiable (each clause rules out 1/8 of the
// assignments), so this is where the NO answers come from.
inline Cnf unsat_core(std::mt19937& g, int nvars, int extra) {
  Cnf c = rand_cnf(g, nvars, extra);
  std::vector<int> v;
  for (int j = 1; j <= nvars; ++j) v.push_back(j);
  std::shuffle(v.begin(), v.end(), g);
  for (int m = 0; m < 8; ++m) c.clauses.push_back({m & 1 ? -v[0] : v[0], m & 2 ? -v[1] : v[1], m & 4 ? -v[2] : v[2]});
  std::shuffle(c.clauses.begin(), c.clauses.end(), g);
  return c;
}

// All completions of e reach a true leaf.
inline bool tree_all_pos(const Diagram& d, const Inst& e, int u) {
  const Node& x = d.nodes[u];
  if (x.leaf) return x.value;
  Val v = e[x.var];
  if (v == Val::Zero) return tree_all_pos(d, e, x.lo);
  if (v == Val::One) return tree_all_pos(d, e, x.hi);
  return tree_all_pos(d, e, x.lo) && tree_all_pos(d, e, x.hi);
}

// Some determinization of u (◇ → 0, 1 or ⊥) has only positive completions.
inline bool brute_dap(const Diagram& d, const Inst& u) {
  std::vector<int> dia;
  for (int i = 0; i < (int)u.size(); ++i)
    if (u[i] == Val::Dia) dia.push_back(i);
  long long total = 1;
  for (size_t i = 0; i < dia.size(); ++i) total *= 3;
  Inst e = u;
  for (long long m = 0; m < total; ++m) {
    long long r = m;
    for (int i : dia) {
      e[i] = Val(r % 3);
      r /= 3;
    }
    if (tree_all_pos(d, e, d.root)) return true;
  }
  return false;
}

}  // namespace tu
