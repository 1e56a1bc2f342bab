#include "foil/formula.hpp"

#include <algorithm>

namespace foil {

static F node(Op op, std::vector<Term> t = {}, std::string name = {}, F a = nullptr, F b = nullptr) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->t = std::move(t);
  f->name = std::move(name);
  f->a = std::move(a);
  f->b = std::move(b);
  return f;
}

F mk_pos(Term x) { return node(Op::Pos, {std::move(x)}); }
F mk_sub(Term x, Term y) { return node(Op::Sub, {std::move(x), std::move(y)}); }
F mk_eq(Term x, Term y) { return node(Op::Eq, {std::move(x), std::move(y)}); }
F mk_full(Term x) { return node(Op::Full, {std::move(x)}); }
F mk_allpos(Term x) { return node(Op::AllPos, {std::move(x)}); }
F mk_allneg(Term x) { return node(Op::AllNeg, {std::move(x)}); }
F mk_macro(std::string name, std::vector<Term> args) { return node(Op::Macro, std::move(args), std::move(name)); }
F mk_not(F a) { return node(Op::Not, {}, {}, std::move(a)); }
F mk_and(F a, F b) { return node(Op::And, {}, {}, std::move(a), std::move(b)); }
F mk_or(F a, F b) { return node(Op::Or, {}, {}, std::move(a), std::move(b)); }
F mk_implies(F a, F b) { return mk_or(mk_not(std::move(a)), std::move(b)); }
F mk_iff(F a, F b) { return mk_or(mk_and(a, b), mk_and(mk_not(a), mk_not(b))); }
F mk_exists(std::string v, F a) { return node(Op::Exists, {}, std::move(v), std::move(a)); }
F mk_forall(std::string v, F a) { return node(Op::Forall, {}, std::move(v), std::move(a)); }
F mk_true() { return node(Op::True); }
F mk_false() { return node(Op::False); }

F mk_and(const std::vector<F>& fs) {
  if (fs.empty()) return mk_true();
  F r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = mk_and(r, fs[i]);
  return r;
}

F mk_or(const std::vector<F>& fs) {
  if (fs.empty()) return mk_false();
  F r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = mk_or(r, fs[i]);
  return r;
}

bool is_atom(Op op) {
  switch (op) {
    case Op::Pos: case Op::Sub: case Op::Eq: case Op::Full: case Op::AllPos: case Op::AllNeg:
    case Op::Macro: case Op::True: case Op::False:
      return true;
    default:
      return false;
  }
}

bool is_quant(Op op) { return op == Op::Exists || op == Op::Forall; }

std::string to_string(const Term& t) { return t.is_const ? to_string(t.c) : t.name; }

// Precedence: quantifier 0, V 1, ^ 2, ~ 3, atoms 4.
static int prec(Op op) {
  switch (op) {
    case Op::Exists: case Op::Forall: return 0;
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Not: return 3;
    default: return 4;
  }
}

static void print(const F& f, std::string& out, int ctx) {
  bool paren = prec(f->op) < ctx;
  if (paren) out += '(';
  auto args = [&] {
    out += '(';
    for (size_t i = 0; i < f->t.size(); ++i) {
      if (i) out += ", ";
      out += to_string(f->t[i]);
    }
    out += ')';
  };
  switch (f->op) {
    case Op::Pos: out += "P"; args(); break;
    case Op::Sub: out += to_string(f->t[0]) + " <= " + to_string(f->t[1]); break;
    case Op::Eq: out += to_string(f->t[0]) + " = " + to_string(f->t[1]); break;
    case Op::Full: out += "FULL"; args(); break;
    case Op::AllPos: out += "ALLPOS"; args(); break;
    case Op::AllNeg: out += "ALLNEG"; args(); break;
    case Op::Macro: out += f->name; args(); break;
    case Op::True: out += "TRUE"; break;
    case Op::False: out += "FALSE"; break;
    case Op::Not: {
      bool rel = f->a->op == Op::Sub || f->a->op == Op::Eq;
      out += '~';
      print(f->a, out, rel ? 5 : 4);
      break;
    }
    case Op::And: print(f->a, out, 2); out += " ^ "; print(f->b, out, 3); break;
    case Op::Or: print(f->a, out, 1); out += " V "; print(f->b, out, 2); break;
    case Op::Exists: out += "Exists " + f->name + ", "; print(f->a, out, 0); break;
    case Op::Forall: out += "ForAll " + f->name + ", "; print(f->a, out, 0); break;
  }
  if (paren) out += ')';
}

std::string to_string(const F& f) {
  std::string s;
  print(f, s, 0);
  return s;
}

bool same(const F& a, const F& b) {
  if (a->op != b->op || a->t != b->t || a->name != b->name) return false;
  if (a->a && !same(a->a, b->a)) return false;
  if (a->b && !same(a->b, b->b)) return false;
  return true;
}

static void collect_free(const F& f, std::set<std::string>& bound, std::set<std::string>& out) {
  for (const Term& t : f->t)
    if (!t.is_const && !bound.count(t.name)) out.insert(t.name);
  if (is_quant(f->op)) {
    bool fresh = bound.insert(f->name).second;
    collect_free(f->a, bound, out);
    if (fresh) bound.erase(f->name);
    return;
  }
  if (f->a) collect_free(f->a, bound, out);
  if (f->b) collect_free(f->b, bound, out);
}

std::set<std::string> free_vars(const F& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

std::set<std::string> all_names(const F& f) {
  std::set<std::string> out;
  std::vector<const Formula*> st{f.get()};
  while (!st.empty()) {
    const Formula* g = st.back();
    st.pop_back();
    for (const Term& t : g->t)
      if (!t.is_const) out.insert(t.name);
    if (is_quant(g->op)) out.insert(g->name);
    if (g->a) st.push_back(g->a.get());
    if (g->b) st.push_back(g->b.get());
  }
  return out;
}

int const_dim(const F& f) {
  int d = -1;
  std::vector<const Formula*> st{f.get()};
  while (!st.empty()) {
    const Formula* g = st.back();
    st.pop_back();
    for (const Term& t : g->t)
      if (t.is_const) {
        if (d >= 0 && d != (int)t.c.size()) throw Error("constants of different dimensions in one formula");
        d = (int)t.c.size();
      }
    if (g->a) st.push_back(g->a.get());
    if (g->b) st.push_back(g->b.get());
  }
  return d;
}

int quantifier_count(const F& f) {
  int n = is_quant(f->op) ? 1 : 0;
  if (f->a) n += quantifier_count(f->a);
  if (f->b) n += quantifier_count(f->b);
  return n;
}

static F subst(const F& f, const Binding& b, std::set<std::string>& shadow) {
  if (is_atom(f->op)) {
    bool touched = false;
    std::vector<Term> ts = f->t;
    for (Term& t : ts)
      if (!t.is_const && !shadow.count(t.name)) {
        auto it = b.find(t.name);
        if (it != b.end()) {
          t = Term::konst(it->second);
          touched = true;
        }
      }
    if (!touched) return f;
    auto g = std::make_shared<Formula>(*f);
    g->t = std::move(ts);
    return g;
  }
  auto g = std::make_shared<Formula>(*f);
  if (is_quant(f->op)) {
    bool fresh = shadow.insert(f->name).second;
    g->a = subst(f->a, b, shadow);
    if (fresh) shadow.erase(f->name);
    return g;
  }
  if (f->a) g->a = subst(f->a, b, shadow);
  if (f->b) g->b = subst(f->b, b, shadow);
  return g;
}

F substitute(const F& f, const Binding& b) {
  std::set<std::string> shadow;
  return subst(f, b, shadow);
}

}  // namespace foil
