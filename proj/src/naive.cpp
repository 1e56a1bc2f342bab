#include "foil/naive.hpp"

#include <optional>

namespace foil {

namespace {

constexpr uint8_t kB = 1, k0 = 2, k1 = 4, kAll = 7;

uint8_t mask_of(Val v) { return v == Val::Bot ? kB : v == Val::Zero ? k0 : k1; }

struct CTerm {
  int slot = -1;  // -1: constant
  Inst c;
};

enum class GK { SupOf, SubOf, EqTo, Full, Match };

struct Guard {
  GK k;
  std::vector<CTerm> t;  // for Match: the other instance, u, v
};

struct CNode {
  Op op;
  std::string macro;
  std::vector<CTerm> t;
  int a = -1, b = -1;
  int slot = -1;
  std::vector<Guard> guards;
};

struct Lit {
  int node;
  bool positive;
};

class Naive {
 public:
  Naive(const Model& m, const NaiveOptions& opt) : m_(m), n_(dim(m)), cap_(opt.max_work) {
    auto* d = std::get_if<Diagram>(&m);
    ternary_ = d && d->kind == Kind::COTDD;
    if (!ternary_) cs_.emplace(m);
  }

  bool run(const F& f) {
    std::map<std::string, int> scope;
    int root = compile(f, scope);
    env_.assign(slots_, Inst(n_, Val::Bot));
    return eval(root);
  }

  long long work() const { return work_; }

 private:
  const Model& m_;
  int n_;
  long long cap_, work_ = 0;
  bool ternary_ = false;
  std::optional<CompletionSearch> cs_;
  std::vector<CNode> nodes_;
  std::vector<Inst> env_;
  int slots_ = 0;

  CTerm term(const Term& t, const std::map<std::string, int>& scope) {
    if (t.is_const) {
      if ((int)t.c.size() != n_)
        throw Error("constant " + to_string(t.c) + " does not match model dimension " + std::to_string(n_));
      return CTerm{-1, t.c};
    }
    auto it = scope.find(t.name);
    if (it == scope.end()) throw Error("unbound free variable '" + t.name + "'");
    return CTerm{it->second, {}};
  }

  int compile(const F& f, std::map<std::string, int>& scope) {
    CNode c;
    c.op = f->op;
    c.macro = f->name;
    if (is_atom(f->op)) {
      for (const Term& t : f->t) c.t.push_back(term(t, scope));
    } else if (is_quant(f->op)) {
      int s = slots_++;
      auto saved = scope.find(f->name) != scope.end() ? std::optional<int>(scope[f->name]) : std::nullopt;
      scope[f->name] = s;
      c.a = compile(f->a, scope);
      if (saved) scope[f->name] = *saved;
      else scope.erase(f->name);
      c.slot = s;
      std::vector<Lit> lits;
      implied(c.a, f->op == Op::Exists, lits);
      for (const Lit& l : lits)
        if (l.positive) guard_from(nodes_[l.node], s, c.guards);
    } else {
      c.a = compile(f->a, scope);
      if (f->b) c.b = compile(f->b, scope);
    }
    nodes_.push_back(std::move(c));
    return (int)nodes_.size() - 1;
  }

  // Literals implied by the node (sign=true) or by its negation (sign=false).
  void implied(int u, bool sign, std::vector<Lit>& out) const {
    const CNode& c = nodes_[u];
    if (c.op == Op::Not) return implied(c.a, !sign, out);
    if ((sign && c.op == Op::And) || (!sign && c.op == Op::Or)) {
      implied(c.a, sign, out);
      implied(c.b, sign, out);
      return;
    }
    if (is_atom(c.op)) out.push_back({u, sign});
  }

  static bool outer(const CTerm& t, int s) { return t.slot < s; }

  void guard_from(const CNode& c, int s, std::vector<Guard>& g) const {
    auto is_s = [&](const CTerm& t) { return t.slot == s; };
    switch (c.op) {
      case Op::Sub:
        if (is_s(c.t[1]) && outer(c.t[0], s)) g.push_back({GK::SupOf, {c.t[0]}});
        if (is_s(c.t[0]) && outer(c.t[1], s)) g.push_back({GK::SubOf, {c.t[1]}});
        break;
      case Op::Eq:
        if (is_s(c.t[1]) && outer(c.t[0], s)) g.push_back({GK::EqTo, {c.t[0]}});
        if (is_s(c.t[0]) && outer(c.t[1], s)) g.push_back({GK::EqTo, {c.t[1]}});
        break;
      case Op::Full:
        if (is_s(c.t[0])) g.push_back({GK::Full, {}});
        break;
      case Op::Pos:
        if (is_s(c.t[0]) && !ternary_) g.push_back({GK::Full, {}});
        break;
      case Op::Macro:
        if (c.macro == "DIFF" && (is_s(c.t[0]) || is_s(c.t[1]))) g.push_back({GK::Full, {}});
        if (c.macro == "ADJ") {
          if (is_s(c.t[0]) && outer(c.t[1], s)) g.push_back({GK::SubOf, {c.t[1]}});
          if (is_s(c.t[1]) && outer(c.t[0], s)) g.push_back({GK::SupOf, {c.t[0]}});
        }
        if (c.macro == "MATCH" && outer(c.t[2], s) && outer(c.t[3], s)) {
          if (is_s(c.t[1]) && outer(c.t[0], s)) g.push_back({GK::Match, {c.t[0], c.t[2], c.t[3]}});
          if (is_s(c.t[0]) && outer(c.t[1], s)) g.push_back({GK::Match, {c.t[1], c.t[2], c.t[3]}});
        }
        break;
      default:
        break;
    }
  }

  const Inst& val(const CTerm& t) const { return t.slot < 0 ? t.c : env_[t.slot]; }

  void tick() {
    if (++work_ > cap_)
      throw ResourceError("naive evaluation exceeded the work cap of " + std::to_string(cap_) + " atom evaluations");
  }

  bool all_completions(const Inst& e, bool target) {
    if (!ternary_) return !cs_->find(dom_of(e), !target).has_value();
    // Ternary models may accept partial instances; check every superset.
    Inst z = e;
    std::vector<int> free;
    for (int i = 0; i < n_; ++i)
      if (e[i] == Val::Bot) free.push_back(i);
    Inst cur(free.size(), Val::Bot);
    do {
      for (size_t k = 0; k < free.size(); ++k) z[free[k]] = cur[k];
      bool p = pos(m_, z);
      if (target ? (is_full(z) && !p) : p) return false;
    } while (next_inst(cur));
    return true;
  }

  bool macro(const CNode& c) {
    const std::string& m = c.macro;
    if (m == "ADJ") {
      const Inst &x = val(c.t[0]), &y = val(c.t[1]);
      if (!subsumes(x, y)) return false;
      int k = 0;
      for (int i = 0; i < n_; ++i)
        if (x[i] == Val::Bot && y[i] != Val::Bot) ++k;
      return k == 1;
    }
    if (m == "DIFF") {
      const Inst &x = val(c.t[0]), &y = val(c.t[1]);
      if (!is_full(x) || !is_full(y)) return false;
      int k = 0;
      for (int i = 0; i < n_; ++i) k += x[i] != y[i];
      return k == 1;
    }
    if (m == "STABLE") {
      Inst x = val(c.t[0]);
      if (!is_full(x)) return true;
      bool p = pos(m_, x);
      for (int i = 0; i < n_; ++i) {
        Val o = x[i];
        x[i] = o == Val::One ? Val::Zero : Val::One;
        bool q = pos(m_, x);
        x[i] = o;
        if (q != p) return false;
      }
      return true;
    }
    if (m == "MATCH") {
      const Inst &x = val(c.t[0]), &y = val(c.t[1]), &u = val(c.t[2]), &v = val(c.t[3]);
      for (int i = 0; i < n_; ++i)
        for (const Inst* w : {&u, &v})
          if ((*w)[i] != Val::Bot && ((x[i] == (*w)[i]) != (y[i] == (*w)[i]))) return false;
      return true;
    }
    throw Error("macro " + m + " must be expanded before naive evaluation");
  }

  void apply_guards(const CNode& q, std::vector<uint8_t>& mask) const {
    for (const Guard& g : q.guards) {
      switch (g.k) {
        case GK::SupOf: {
          const Inst& o = val(g.t[0]);
          for (int i = 0; i < n_; ++i)
            if (o[i] != Val::Bot) mask[i] &= mask_of(o[i]);
          break;
        }
        case GK::SubOf: {
          const Inst& o = val(g.t[0]);
          for (int i = 0; i < n_; ++i) mask[i] &= kB | (o[i] != Val::Bot ? mask_of(o[i]) : 0);
          break;
        }
        case GK::EqTo: {
          const Inst& o = val(g.t[0]);
          for (int i = 0; i < n_; ++i) mask[i] &= mask_of(o[i]);
          break;
        }
        case GK::Full:
          for (auto& x : mask) x &= k0 | k1;
          break;
        case GK::Match: {
          const Inst &o = val(g.t[0]), &u = val(g.t[1]), &v = val(g.t[2]);
          for (int i = 0; i < n_; ++i)
            for (const Inst* w : {&u, &v}) {
              Val b = (*w)[i];
              if (b == Val::Bot) continue;
              if (o[i] == b) mask[i] &= mask_of(b);
              else mask[i] &= uint8_t(kAll & ~mask_of(b));
            }
          break;
        }
      }
    }
  }

  bool eval(int u) {
    const CNode& c = nodes_[u];
    switch (c.op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Not: return !eval(c.a);
      case Op::And: return eval(c.a) && eval(c.b);
      case Op::Or: return eval(c.a) || eval(c.b);
      case Op::Pos: tick(); return pos(m_, val(c.t[0]));
      case Op::Sub: tick(); return subsumes(val(c.t[0]), val(c.t[1]));
      case Op::Eq: tick(); return val(c.t[0]) == val(c.t[1]);
      case Op::Full: tick(); return is_full(val(c.t[0]));
      case Op::AllPos: tick(); return all_completions(val(c.t[0]), true);
      case Op::AllNeg: tick(); return all_completions(val(c.t[0]), false);
      case Op::Macro: tick(); return macro(c);
      case Op::Exists:
      case Op::Forall: {
        bool ex = c.op == Op::Exists;
        std::vector<uint8_t> mask(n_, kAll);
        apply_guards(c, mask);
        std::vector<std::vector<Val>> choice(n_);
        for (int i = 0; i < n_; ++i) {
          for (Val v : {Val::Bot, Val::Zero, Val::One})
            if (mask[i] & mask_of(v)) choice[i].push_back(v);
          if (choice[i].empty()) return !ex;
        }
        std::vector<int> idx(n_, 0);
        Inst& e = env_[c.slot];
        for (int i = 0; i < n_; ++i) e[i] = choice[i][0];
        for (;;) {
          if (eval(c.a) == ex) return ex;
          int i = n_ - 1;
          for (; i >= 0; --i) {
            if (++idx[i] < (int)choice[i].size()) {
              e[i] = choice[i][idx[i]];
              break;
            }
            idx[i] = 0;
            e[i] = choice[i][0];
          }
          if (i < 0) return !ex;
        }
      }
    }
    return false;
  }
};

}  // namespace

bool eval_naive(const Model& m, const F& f, const Binding& b, const NaiveOptions& opt, NaiveStats* stats) {
  for (const auto& [name, e] : b)
    if ((int)e.size() != dim(m))
      throw Error("binding for '" + name + "' has dimension " + std::to_string(e.size()) + ", model has " +
                  std::to_string(dim(m)));
  F g = expand_keeping(substitute(f, b), {"ADJ", "DIFF", "STABLE", "MATCH"});
  Naive nv(m, opt);
  bool r = nv.run(g);
  if (stats) stats->work = nv.work();
  return r;
}

}  // namespace foil
