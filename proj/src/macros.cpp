#include "foil/formula.hpp"

namespace foil {

const std::map<std::string, int>& macro_arities() {
  static const std::map<std::string, int> m = {
      {"FULL", 1},          {"SR", 2},         {"MSR", 2},           {"MATCH", 4},
      {"BIASEDDECISION", 3}, {"BIASEDMODEL", 2}, {"ADJ", 2},          {"DIFF", 2},
      {"STABLE", 1},        {"ALLPOS", 1},     {"ALLNEG", 1},        {"PARTIALALLPOS", 3},
      {"PARTIALALLNEG", 3},
  };
  return m;
}

bool is_macro_keyword(std::string_view upper) { return macro_arities().count(std::string(upper)) > 0; }

namespace {

struct Expander {
  bool plus;
  std::set<std::string> used;
  std::set<std::string> keep;
  int next = 0;

  std::string fresh(const std::string& base) {
    for (;;) {
      std::string n = base + "_" + std::to_string(++next);
      if (used.insert(n).second) return n;
    }
  }

  F full(const Term& x) {
    if (plus) return mk_full(x);
    std::string y = fresh("y");
    return mk_forall(y, mk_or(mk_not(mk_sub(x, V(y))), mk_eq(x, V(y))));
  }

  F allpos(const Term& x) {
    if (plus) return mk_allpos(x);
    std::string y = fresh("y");
    return mk_forall(y, mk_implies(mk_and(mk_sub(x, V(y)), full(V(y))), mk_pos(V(y))));
  }

  F allneg(const Term& x) {
    if (plus) return mk_allneg(x);
    std::string y = fresh("y");
    return mk_forall(y, mk_implies(mk_sub(x, V(y)), mk_not(mk_pos(V(y)))));
  }

  F proper(const Term& a, const Term& b) { return mk_and(mk_sub(a, b), mk_not(mk_eq(a, b))); }

  F sr(const Term& x, const Term& y) {
    std::string z = fresh("z");
    return mk_and({full(x), mk_sub(y, x),
                   mk_forall(z, mk_implies(mk_and(mk_sub(y, V(z)), full(V(z))), mk_iff(mk_pos(x), mk_pos(V(z)))))});
  }

  F msr(const Term& x, const Term& y) {
    if (!plus) {
      std::string z = fresh("z");
      return mk_and(sr(x, y), mk_forall(z, mk_implies(mk_and(mk_sub(V(z), y), sr(x, V(z))), mk_eq(V(z), y))));
    }
    std::string u = fresh("u"), v = fresh("v");
    return mk_and({sr(x, y),
                   mk_forall(u, mk_implies(mk_and({mk_sub(V(u), y), mk_not(mk_eq(V(u), y)), mk_pos(x)}),
                                           mk_not(allpos(V(u))))),
                   mk_forall(v, mk_implies(mk_and({mk_sub(V(v), y), mk_not(mk_eq(V(v), y)), mk_not(mk_pos(x))}),
                                           mk_not(allneg(V(v)))))});
  }

  F match(const Term& x, const Term& y, const Term& u, const Term& v) {
    if (keep.count("MATCH")) return mk_macro("MATCH", {x, y, u, v});
    std::string z = fresh("z");
    return mk_forall(z, mk_implies(mk_or(mk_sub(V(z), u), mk_sub(V(z), v)),
                                   mk_iff(mk_sub(V(z), x), mk_sub(V(z), y))));
  }

  F biased_decision(const Term& x, const Term& u, const Term& v) {
    std::string y = fresh("y");
    return mk_and(full(x), mk_exists(y, mk_and({full(V(y)), match(x, V(y), u, v),
                                                mk_iff(mk_pos(x), mk_not(mk_pos(V(y))))})));
  }

  F adj(const Term& x, const Term& y) {
    if (keep.count("ADJ")) return mk_macro("ADJ", {x, y});
    std::string z = fresh("z");
    return mk_and(proper(x, y), mk_not(mk_exists(z, mk_and(proper(x, V(z)), proper(V(z), y)))));
  }

  F diff(const Term& x, const Term& y) {
    if (keep.count("DIFF")) return mk_macro("DIFF", {x, y});
    std::string z = fresh("z");
    return mk_and({full(x), full(y), mk_not(mk_eq(x, y)), mk_exists(z, mk_and(adj(V(z), x), adj(V(z), y)))});
  }

  F stable(const Term& x) {
    if (keep.count("STABLE")) return mk_macro("STABLE", {x});
    std::string y = fresh("y");
    return mk_forall(y, mk_implies(diff(x, V(y)), mk_iff(mk_pos(x), mk_pos(V(y)))));
  }

  F partial_all(const Term& x, const Term& y, const Term& z, bool positive) {
    std::string u = fresh("u"), v = fresh("v"), w = fresh("w");
    return mk_exists(u, mk_and({mk_sub(x, V(u)), positive ? allpos(V(u)) : allneg(V(u)),
                                mk_exists(v, mk_and(mk_sub(y, V(v)), mk_sub(V(u), V(v)))),
                                mk_exists(w, mk_and(mk_sub(z, V(w)), mk_sub(V(u), V(w))))}));
  }

  F macro(const std::string& m, const std::vector<Term>& a) {
    auto it = macro_arities().find(m);
    if (it == macro_arities().end()) throw Error("unknown macro " + m);
    if ((int)a.size() != it->second)
      throw Error(m + " takes " + std::to_string(it->second) + " argument(s), got " + std::to_string(a.size()));
    if (m == "FULL") return full(a[0]);
    if (m == "ALLPOS") return allpos(a[0]);
    if (m == "ALLNEG") return allneg(a[0]);
    if (m == "SR") return sr(a[0], a[1]);
    if (m == "MSR") return msr(a[0], a[1]);
    if (m == "MATCH") return match(a[0], a[1], a[2], a[3]);
    if (m == "BIASEDDECISION") return biased_decision(a[0], a[1], a[2]);
    if (m == "BIASEDMODEL") {
      std::string x = fresh("x");
      return mk_exists(x, biased_decision(V(x), a[0], a[1]));
    }
    if (m == "ADJ") return adj(a[0], a[1]);
    if (m == "DIFF") return diff(a[0], a[1]);
    if (m == "STABLE") return stable(a[0]);
    if (m == "PARTIALALLPOS") return partial_all(a[0], a[1], a[2], true);
    return partial_all(a[0], a[1], a[2], false);
  }

  F run(const F& f) {
    switch (f->op) {
      case Op::Macro: return macro(f->name, f->t);
      case Op::Full: return full(f->t[0]);
      case Op::AllPos: return allpos(f->t[0]);
      case Op::AllNeg: return allneg(f->t[0]);
      case Op::Not: return mk_not(run(f->a));
      case Op::And: return mk_and(run(f->a), run(f->b));
      case Op::Or: return mk_or(run(f->a), run(f->b));
      case Op::Exists: return mk_exists(f->name, run(f->a));
      case Op::Forall: return mk_forall(f->name, run(f->a));
      default: return f;
    }
  }
};

}  // namespace

F expand_macros(const F& f) {
  Expander e{false, all_names(f), {}};
  return e.run(f);
}

F expand_plus(const F& f) {
  Expander e{true, all_names(f), {}};
  return e.run(f);
}

F expand_keeping(const F& f, const std::set<std::string>& keep) {
  Expander e{true, all_names(f), keep};
  return e.run(f);
}

}  // namespace foil
