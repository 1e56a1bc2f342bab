#include <algorithm>
#include <functional>
#include <optional>

#include "foil/formula.hpp"

namespace foil {

const char* fragment_name(Fragment fr) {
  switch (fr) {
    case Fragment::ExistsFOIL: return "ExistsFOIL";
    case Fragment::ForallFOIL: return "ForallFOIL";
    case Fragment::ExistsFOILPlus: return "ExistsFOILPlus";
    case Fragment::ForallFOILPlus: return "ForallFOILPlus";
    case Fragment::GeneralFOIL: return "GeneralFOIL";
  }
  return "?";
}

F nnf(const F& f) {
  std::function<F(const F&, bool)> go = [&](const F& g, bool neg) -> F {
    switch (g->op) {
      case Op::Not: return go(g->a, !neg);
      case Op::And: {
        F l = go(g->a, neg), r = go(g->b, neg);
        return neg ? mk_or(l, r) : mk_and(l, r);
      }
      case Op::Or: {
        F l = go(g->a, neg), r = go(g->b, neg);
        return neg ? mk_and(l, r) : mk_or(l, r);
      }
      case Op::Exists: return neg ? mk_forall(g->name, go(g->a, true)) : mk_exists(g->name, go(g->a, false));
      case Op::Forall: return neg ? mk_exists(g->name, go(g->a, true)) : mk_forall(g->name, go(g->a, false));
      case Op::True: return neg ? mk_false() : g;
      case Op::False: return neg ? mk_true() : g;
      default: return neg ? mk_not(g) : g;
    }
  };
  return go(f, false);
}

bool has_extended(const F& f) {
  if (f->op == Op::Full || f->op == Op::AllPos || f->op == Op::AllNeg || f->op == Op::Macro) return true;
  return (f->a && has_extended(f->a)) || (f->b && has_extended(f->b));
}

// Effective quantifier kinds after pushing negations inward.
static void polarity_scan(const F& f, bool neg, bool& ex, bool& fa) {
  switch (f->op) {
    case Op::Not: polarity_scan(f->a, !neg, ex, fa); return;
    case Op::Exists: (neg ? fa : ex) = true; break;
    case Op::Forall: (neg ? ex : fa) = true; break;
    default: break;
  }
  if (f->a) polarity_scan(f->a, neg, ex, fa);
  if (f->b) polarity_scan(f->b, neg, ex, fa);
}

Fragment fragment_of(const F& f0) {
  F f = expand_plus(f0);
  bool ex = false, fa = false;
  polarity_scan(f, false, ex, fa);
  bool plus = has_extended(f);
  if (!fa) return plus ? Fragment::ExistsFOILPlus : Fragment::ExistsFOIL;
  if (!ex) return plus ? Fragment::ForallFOILPlus : Fragment::ForallFOIL;
  return Fragment::GeneralFOIL;
}

F negate_dual(const F& f0) {
  F f = expand_plus(f0);
  if (fragment_of(f) == Fragment::GeneralFOIL)
    throw Error("negate_dual needs a formula of the existential or universal fragment");
  return nnf(mk_not(f));
}

namespace {

struct Prenexer {
  std::set<std::string> used;
  int next = 0;

  std::string fresh(const std::string& base) {
    if (used.insert(base).second) return base;
    for (;;) {
      std::string n = base + "_" + std::to_string(++next);
      if (used.insert(n).second) return n;
    }
  }

  // Renames every bound variable apart from all others and from free names.
  F rename(const F& f, std::map<std::string, std::string>& env) {
    if (is_atom(f->op)) {
      auto g = std::make_shared<Formula>(*f);
      for (Term& t : g->t)
        if (!t.is_const) {
          auto it = env.find(t.name);
          if (it != env.end()) t.name = it->second;
        }
      return g;
    }
    if (is_quant(f->op)) {
      std::string n = fresh(f->name);
      auto saved = env.find(f->name) != env.end() ? std::optional<std::string>(env[f->name]) : std::nullopt;
      env[f->name] = n;
      F body = rename(f->a, env);
      if (saved) env[f->name] = *saved;
      else env.erase(f->name);
      return f->op == Op::Exists ? mk_exists(n, body) : mk_forall(n, body);
    }
    auto g = std::make_shared<Formula>(*f);
    if (f->a) g->a = rename(f->a, env);
    if (f->b) g->b = rename(f->b, env);
    return g;
  }

  static std::vector<Block> merge(const std::vector<Block>& A, const std::vector<Block>& B) {
    std::vector<Block> out;
    auto push = [&](const Block& b) {
      if (!out.empty() && out.back().exists == b.exists)
        out.back().vars.insert(out.back().vars.end(), b.vars.begin(), b.vars.end());
      else
        out.push_back(b);
    };
    size_t i = 0, j = 0;
    while (i < A.size() || j < B.size()) {
      if (i == A.size()) { push(B[j++]); continue; }
      if (j == B.size()) { push(A[i++]); continue; }
      if (A[i].exists == B[j].exists) {
        push(A[i++]);
        push(B[j++]);
        continue;
      }
      size_t ra = A.size() - i, rb = B.size() - j;
      if (ra > rb) push(A[i++]);
      else if (rb > ra) push(B[j++]);
      else if (A[i].exists) push(A[i++]);
      else push(B[j++]);
    }
    return out;
  }

  static F rewrite_eq(const F& f) {
    if (f->op == Op::Eq) return mk_and(mk_sub(f->t[0], f->t[1]), mk_sub(f->t[1], f->t[0]));
    if (is_atom(f->op)) return f;
    auto g = std::make_shared<Formula>(*f);
    if (f->a) g->a = rewrite_eq(f->a);
    if (f->b) g->b = rewrite_eq(f->b);
    return g;
  }

  PrenexForm pull(const F& f) {
    switch (f->op) {
      case Op::Exists:
      case Op::Forall: {
        PrenexForm p = pull(f->a);
        bool ex = f->op == Op::Exists;
        if (!p.blocks.empty() && p.blocks.front().exists == ex)
          p.blocks.front().vars.insert(p.blocks.front().vars.begin(), f->name);
        else
          p.blocks.insert(p.blocks.begin(), Block{ex, {f->name}});
        return p;
      }
      case Op::And:
      case Op::Or: {
        PrenexForm l = pull(f->a), r = pull(f->b);
        PrenexForm out;
        out.blocks = merge(l.blocks, r.blocks);
        out.matrix = f->op == Op::And ? mk_and(l.matrix, r.matrix) : mk_or(l.matrix, r.matrix);
        return out;
      }
      default:
        return PrenexForm{{}, f};
    }
  }
};

}  // namespace

PrenexForm prenex(const F& f, bool strict) {
  Prenexer pr;
  pr.used = free_vars(f);
  std::map<std::string, std::string> env;
  F g = pr.rename(nnf(f), env);
  PrenexForm p = pr.pull(g);
  p.matrix = Prenexer::rewrite_eq(p.matrix);
  if (strict) {
    std::vector<Block> out;
    bool want = true;
    for (const Block& b : p.blocks)
      for (const std::string& v : b.vars) {
        if (b.exists != want) out.push_back(Block{want, {pr.fresh("d")}});
        out.push_back(Block{b.exists, {v}});
        want = !b.exists;
      }
    p.blocks = std::move(out);
  }
  return p;
}

F from_prenex(const PrenexForm& p) {
  F f = p.matrix;
  for (size_t i = p.blocks.size(); i-- > 0;)
    for (size_t k = p.blocks[i].vars.size(); k-- > 0;)
      f = p.blocks[i].exists ? mk_exists(p.blocks[i].vars[k], f) : mk_forall(p.blocks[i].vars[k], f);
  return f;
}

F to_prenex(const F& f, bool strict) { return from_prenex(prenex(f, strict)); }

}  // namespace foil
