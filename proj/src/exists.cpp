#include "foil/exists.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace foil {

namespace {

uint8_t vmask(Val v) {
  switch (v) {
    case Val::Bot: return kMaskBot;
    case Val::Zero: return kMask0;
    case Val::One: return kMask1;
    default: return kMaskAll;
  }
}

Val flip(Val v) { return v == Val::One ? Val::Zero : Val::One; }

Dom box_of(const Mask& m) {
  Dom d(m.size());
  for (size_t i = 0; i < m.size(); ++i)
    d[i] = uint8_t(((m[i] & kMask0) ? kAllow0 : 0) | ((m[i] & kMask1) ? kAllow1 : 0));
  return d;
}

// Per-variable requirements collected from literals: -1 unknown, else 0/1.
struct Flags {
  int8_t pos = -1, full = -1, ap = -1, an = -1;
};

bool set_flag(int8_t& f, bool v) {
  if (f < 0) f = v;
  return f == int8_t(v);
}

enum class Fu : uint8_t { Any, Full, NonFull };
enum class Cl : uint8_t { None, AllPos, AllNeg, Mixed };

// What a determinized class is required to satisfy.
struct Mode {
  Fu f = Fu::Any;
  Cl c = Cl::None;
  bool operator==(const Mode&) const = default;
};

bool valid(Mode m) { return !(m.f == Fu::Full && m.c == Cl::Mixed); }

bool sufficient(Mode m, const Flags& fl) {
  auto need = [](int8_t f, bool t, bool e) { return f < 0 || (f ? t : e); };
  bool full = m.f == Fu::Full, nonfull = m.f == Fu::NonFull;
  return need(fl.pos, full && m.c == Cl::AllPos, nonfull || (full && m.c == Cl::AllNeg)) &&
         need(fl.full, full, nonfull) &&
         need(fl.ap, m.c == Cl::AllPos, m.c == Cl::AllNeg || m.c == Cl::Mixed) &&
         need(fl.an, m.c == Cl::AllNeg, m.c == Cl::AllPos || m.c == Cl::Mixed);
}

bool weaker(Mode a, Mode b) { return (a.f == Fu::Any || a.f == b.f) && (a.c == Cl::None || a.c == b.c); }

// Minimal modes sufficient for the flags: every solution satisfies one of them.
std::vector<Mode> modes_for(const Flags& fl) {
  std::vector<Mode> all, out;
  for (Fu f : {Fu::Any, Fu::NonFull, Fu::Full})
    for (Cl c : {Cl::None, Cl::AllPos, Cl::AllNeg, Cl::Mixed}) {
      Mode m{f, c};
      if (valid(m) && sufficient(m, fl)) all.push_back(m);
    }
  for (Mode m : all) {
    bool dominated = false;
    for (Mode o : all)
      if (!(o == m) && weaker(o, m)) dominated = true;
    if (!dominated) out.push_back(m);
  }
  return out;
}

std::optional<Mode> join(Mode a, Mode b) {
  Mode r;
  if (a.f == Fu::Any) r.f = b.f;
  else if (b.f == Fu::Any || b.f == a.f) r.f = a.f;
  else return std::nullopt;
  if (a.c == Cl::None) r.c = b.c;
  else if (b.c == Cl::None || b.c == a.c) r.c = a.c;
  else return std::nullopt;
  if (!valid(r)) return std::nullopt;
  return r;
}

struct Atom {
  Op op;
  int x = -1, y = -1;  // term ids: vars first, then constants
};

struct Lit {
  int atom;
  bool val;
};

struct UF {
  std::vector<int> p;
  explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  bool unite(int a, int b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    p[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Shared model access for the literal solver.
struct Ctx {
  const Model& m;
  int n;
  const Oracles& o;
  CompletionSearch cs;
  std::vector<int> sig;  // index symmetry classes of the model
  ExistsStats* st;

  Ctx(const Model& mm, const Oracles& oo, ExistsStats* s) : m(mm), n(dim(mm)), o(oo), cs(mm), st(s) {
    sig.assign(n, -1);
    if (auto* p = std::get_if<Perceptron>(&m)) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
          if (p->w[j] == p->w[i]) {
            sig[i] = j;
            break;
          }
    } else {
      for (const Node& nd : std::get<Diagram>(m).nodes)
        if (!nd.leaf) sig[nd.var] = nd.var;
    }
  }

  bool has(const Inst& e, bool target) const { return cs.find(dom_of(e), target).has_value(); }
  bool all_pos(const Inst& e) const { return !has(e, false); }
  bool all_neg(const Inst& e) const { return !has(e, true); }
};

// One implicant after its containment structure has been collapsed and a mode
// fixed for every class. Classes may hold constants; constant-only classes are
// never determinized.
struct Structure {
  int nterms = 0;
  std::vector<int> cls_of;             // term → class
  std::vector<Mode> mode;              // per class
  std::vector<char> has_var;           // per class
  std::vector<std::pair<int, int>> E;  // class containment edges (transitive)
  std::vector<int> topo;               // classes, predecessors first
};

class Solver {
 public:
  Solver(Ctx& c, int nvars, const std::vector<Inst>& consts, const std::vector<Atom>& atoms)
      : c_(c), k_(nvars), consts_(consts), atoms_(atoms), T_(nvars + (int)consts.size()) {}

  bool solve(const std::vector<Lit>& lits) {
    lits_ = lits;
    std::vector<std::vector<char>> R(T_, std::vector<char>(T_, 0));
    for (int i = 0; i < T_; ++i) R[i][i] = 1;
    std::vector<Flags> fl(k_);
    for (const Lit& l : lits) {
      const Atom& a = atoms_[l.atom];
      bool ok = true;
      switch (a.op) {
        case Op::Sub:
          if (l.val) R[a.x][a.y] = 1;
          break;
        case Op::Pos: ok = set_flag(fl[a.x].pos, l.val); break;
        case Op::Full: ok = set_flag(fl[a.x].full, l.val); break;
        case Op::AllPos: ok = set_flag(fl[a.x].ap, l.val); break;
        case Op::AllNeg: ok = set_flag(fl[a.x].an, l.val); break;
        default: throw Error("unexpected atom in existential matrix");
      }
      if (!ok) return false;
    }
    for (int m = 0; m < T_; ++m)
      for (int i = 0; i < T_; ++i)
        if (R[i][m])
          for (int j = 0; j < T_; ++j)
            if (R[m][j]) R[i][j] = 1;
    for (int i = k_; i < T_; ++i)
      for (int j = k_; j < T_; ++j)
        if (R[i][j] && !subsumes(konst(i), konst(j))) return false;
    for (const Lit& l : lits) {
      const Atom& a = atoms_[l.atom];
      if (a.op == Op::Sub && !l.val && R[a.x][a.y]) return false;
    }
    // Strongly connected terms denote the same instance.
    UF scc(T_);
    for (int i = 0; i < T_; ++i)
      for (int j = 0; j < T_; ++j)
        if (R[i][j] && R[j][i]) scc.unite(i, j);
    std::map<int, Flags> cf;
    for (int v = 0; v < k_; ++v) {
      Flags& g = cf[scc.find(v)];
      const Flags& h = fl[v];
      if ((h.pos >= 0 && !set_flag(g.pos, h.pos)) || (h.full >= 0 && !set_flag(g.full, h.full)) ||
          (h.ap >= 0 && !set_flag(g.ap, h.ap)) || (h.an >= 0 && !set_flag(g.an, h.an)))
        return false;
    }
    std::vector<int> reps;
    std::vector<std::vector<Mode>> choices;
    for (auto& [r, g] : cf) {
      reps.push_back(r);
      choices.push_back(modes_for(g));
      if (choices.back().empty()) return false;
    }
    std::vector<size_t> idx(reps.size(), 0);
    for (;;) {
      std::map<int, Mode> pick;
      for (size_t i = 0; i < reps.size(); ++i) pick[reps[i]] = choices[i][idx[i]];
      if (c_.st) ++c_.st->mode_combos;
      if (try_modes(R, scc, pick)) return true;
      size_t i = 0;
      for (; i < reps.size(); ++i) {
        if (++idx[i] < choices[i].size()) break;
        idx[i] = 0;
      }
      if (i == reps.size()) return false;
    }
  }

 private:
  Ctx& c_;
  int k_;
  const std::vector<Inst>& consts_;
  const std::vector<Atom>& atoms_;
  int T_;
  std::vector<Lit> lits_;
  Structure S_;

  const Inst& konst(int t) const { return consts_[t - k_]; }
  bool is_const(int t) const { return t >= k_; }

  bool try_modes(const std::vector<std::vector<char>>& R, UF scc, const std::map<int, Mode>& pick) {
    // Full classes absorb everything above them.
    auto term_full = [&](int t) {
      if (is_const(t)) return is_full(konst(t));
      auto it = pick.find(scc.find(t));
      return it != pick.end() && it->second.f == Fu::Full;
    };
    UF uf = scc;
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<char> fullc(T_, 0);
      for (int t = 0; t < T_; ++t)
        if (term_full(t)) fullc[uf.find(t)] = 1;
      for (int i = 0; i < T_; ++i)
        if (fullc[uf.find(i)])
          for (int j = 0; j < T_; ++j)
            if (R[i][j] && uf.unite(i, j)) changed = true;
    }
    // Classes.
    std::map<int, int> id;
    S_ = Structure{};
    S_.nterms = T_;
    S_.cls_of.assign(T_, -1);
    for (int t = 0; t < T_; ++t) {
      int r = uf.find(t);
      auto [it, fresh] = id.emplace(r, (int)id.size());
      S_.cls_of[t] = it->second;
      if (fresh) {
        S_.mode.push_back(Mode{});
        S_.has_var.push_back(0);
      }
    }
    int C = (int)id.size();
    std::vector<std::optional<Inst>> cval(C);
    for (int t = 0; t < T_; ++t) {
      int cl = S_.cls_of[t];
      if (is_const(t)) {
        if (cval[cl] && *cval[cl] != konst(t)) return false;
        cval[cl] = konst(t);
      } else {
        S_.has_var[cl] = 1;
        auto jm = join(S_.mode[cl], pick.at(scc.find(t)));
        if (!jm) return false;
        S_.mode[cl] = *jm;
      }
    }
    std::set<std::pair<int, int>> E;
    for (int i = 0; i < T_; ++i)
      for (int j = 0; j < T_; ++j)
        if (R[i][j] && S_.cls_of[i] != S_.cls_of[j]) E.insert({S_.cls_of[i], S_.cls_of[j]});
    S_.E.assign(E.begin(), E.end());
    for (const Lit& l : lits_) {
      const Atom& a = atoms_[l.atom];
      if (a.op == Op::Sub && !l.val && S_.cls_of[a.x] == S_.cls_of[a.y]) return false;
    }
    // Topological order, ties by smallest class id (classes are numbered in
    // term order, so variables come first).
    std::vector<int> indeg(C, 0);
    for (auto [a, b] : S_.E) ++indeg[b];
    std::set<int> ready;
    for (int i = 0; i < C; ++i)
      if (!indeg[i]) ready.insert(i);
    while (!ready.empty()) {
      int u = *ready.begin();
      ready.erase(ready.begin());
      S_.topo.push_back(u);
      for (auto [a, b] : S_.E)
        if (a == u && --indeg[b] == 0) ready.insert(b);
    }
    if ((int)S_.topo.size() != C) return false;
    // Initial domains.
    std::vector<Mask> D(C, Mask(c_.n, kMaskAll));
    for (int cl = 0; cl < C; ++cl) {
      if (cval[cl])
        for (int i = 0; i < c_.n; ++i) D[cl][i] &= vmask((*cval[cl])[i]);
      if (S_.mode[cl].f == Fu::Full)
        for (auto& x : D[cl]) x &= kMask0 | kMask1;
    }
    if (!propagate(D)) return false;
    // Components over variable classes.
    UF comp(C);
    for (auto [a, b] : S_.E)
      if (S_.has_var[a] && S_.has_var[b]) comp.unite(a, b);
    for (const Lit& l : lits_) {
      const Atom& a = atoms_[l.atom];
      if (a.op == Op::Sub && !l.val) {
        int x = S_.cls_of[a.x], y = S_.cls_of[a.y];
        if (S_.has_var[x] && S_.has_var[y]) comp.unite(x, y);
      }
    }
    std::vector<char> done(C, 0);
    for (int cl = 0; cl < C; ++cl) {
      if (!S_.has_var[cl] || done[cl]) continue;
      std::vector<char> in(C, 0);
      for (int o = 0; o < C; ++o)
        if (S_.has_var[o] && comp.find(o) == comp.find(cl)) in[o] = done[o] = 1;
      if (!search(D, in)) return false;
    }
    return true;
  }

  // Arc consistency of the containment edges.
  bool propagate(std::vector<Mask>& D) const {
    for (bool changed = true; changed;) {
      changed = false;
      for (auto [a, b] : S_.E)
        for (int i = 0; i < c_.n; ++i) {
          uint8_t na = D[a][i] & (kMaskBot | D[b][i]);
          uint8_t nb = (na & kMaskBot) ? D[b][i] : uint8_t(D[b][i] & na);
          if (na != D[a][i] || nb != D[b][i]) {
            D[a][i] = na, D[b][i] = nb;
            changed = true;
          }
          if (!na || !nb) return false;
        }
    }
    for (const Mask& m : D)
      for (uint8_t x : m)
        if (!x) return false;
    return true;
  }

  std::optional<Inst> det_class(const Mask& mask, Mode md) {
    int n = c_.n;
    Inst e(n, Val::Bot);
    auto fill = [&](bool prefer_bot) {
      for (int i = 0; i < n; ++i) {
        if (prefer_bot && (mask[i] & kMaskBot)) e[i] = Val::Bot;
        else if (mask[i] & kMask0) e[i] = Val::Zero;
        else if (mask[i] & kMask1) e[i] = Val::One;
        else e[i] = Val::Bot;
      }
    };
    if (md.f == Fu::Full) {
      if (md.c == Cl::None) {
        fill(false);
        return e;
      }
      return c_.cs.find(box_of(mask), md.c == Cl::AllPos);
    }
    switch (md.c) {
      case Cl::None: fill(true); return e;
      case Cl::Mixed:
        fill(true);
        if (c_.has(e, true) && c_.has(e, false)) return e;
        return std::nullopt;
      case Cl::AllPos:
      case Cl::AllNeg:
        if (!c_.o)
          throw Unsupported("AllPos/AllNeg on a quantified variable needs a determinization oracle for this model");
        return md.c == Cl::AllPos ? c_.o.dap(mask) : c_.o.dan(mask);
    }
    return std::nullopt;
  }

  // Determinizes the classes of one component in topological order.
  std::optional<std::vector<Inst>> determinize(std::vector<Mask> D, const std::vector<char>& in) {
    if (c_.st) ++c_.st->determinizations;
    std::vector<Inst> val(D.size());
    for (int cl : S_.topo) {
      if (!in[cl]) continue;
      auto e = det_class(D[cl], S_.mode[cl]);
      if (!e) return std::nullopt;
      for (int i = 0; i < c_.n; ++i) {
        D[cl][i] &= vmask((*e)[i]);
        if (!D[cl][i]) return std::nullopt;
      }
      if (!propagate(D)) return std::nullopt;
      val[cl] = *e;
    }
    return val;
  }

  Inst value_of(int t, const std::vector<Inst>& val) const { return is_const(t) ? konst(t) : val[S_.cls_of[t]]; }

  bool involves(int t, const std::vector<char>& in) const { return !is_const(t) && in[S_.cls_of[t]]; }

  // Index of the first violated literal of the component, or -1.
  int violated(const std::vector<Inst>& val, const std::vector<char>& in) const {
    for (size_t li = 0; li < lits_.size(); ++li) {
      const Atom& a = atoms_[lits_[li].atom];
      if (!involves(a.x, in) && !(a.y >= 0 && involves(a.y, in))) continue;
      Inst x = value_of(a.x, val);
      bool h = false;
      switch (a.op) {
        case Op::Sub: h = subsumes(x, value_of(a.y, val)); break;
        case Op::Pos: h = pos(c_.m, x); break;
        case Op::Full: h = is_full(x); break;
        case Op::AllPos: h = c_.all_pos(x); break;
        case Op::AllNeg: h = c_.all_neg(x); break;
        default: break;
      }
      if (h != lits_[li].val) return (int)li;
    }
    return -1;
  }

  // Representative indices: indices with the same model role and the same
  // domains in every class are interchangeable.
  template <class Pred>
  std::vector<int> candidates(const std::vector<Mask>& D, Pred ok) const {
    std::set<std::vector<int>> seen;
    std::vector<int> out;
    for (int k = 0; k < c_.n; ++k) {
      if (!ok(k)) continue;
      std::vector<int> key{c_.sig[k] < 0 ? -1 : c_.sig[k]};
      for (const Mask& m : D) key.push_back(m[k]);
      if (seen.insert(key).second) out.push_back(k);
    }
    return out;
  }

  bool search(const std::vector<Mask>& D, const std::vector<char>& in) {
    auto val = determinize(D, in);
    if (!val) return false;
    int li = violated(*val, in);
    if (li < 0) return true;
    const Lit& l = lits_[li];
    const Atom& a = atoms_[l.atom];
    auto branch = [&](std::vector<Mask> D2) {
      if (c_.st) ++c_.st->branches;
      return propagate(D2) && search(D2, in);
    };
    if (a.op == Op::Sub && !l.val) {
      // Witness: x defined as α at k, y ∈ {¬α, ⊥} at k.
      auto dom = [&](int t, int k) { return is_const(t) ? vmask(konst(t)[k]) : D[S_.cls_of[t]][k]; };
      auto ok = [&](int k) { return (dom(a.x, k) & (kMask0 | kMask1)) != 0; };
      for (int k : candidates(D, ok))
        for (Val al : {Val::Zero, Val::One}) {
          if (!(dom(a.x, k) & vmask(al))) continue;
          for (Val be : {flip(al), Val::Bot}) {
            if (!(dom(a.y, k) & vmask(be))) continue;
            std::vector<Mask> D2 = D;
            if (!is_const(a.x)) D2[S_.cls_of[a.x]][k] = vmask(al);
            if (!is_const(a.y)) D2[S_.cls_of[a.y]][k] = vmask(be);
            if (branch(std::move(D2))) return true;
          }
        }
      return false;
    }
    if ((a.op == Op::Full || a.op == Op::Pos) && !l.val) {
      int cl = S_.cls_of[a.x];
      auto ok = [&](int k) { return (D[cl][k] & kMaskBot) && D[cl][k] != kMaskBot; };
      for (int k : candidates(D, ok)) {
        std::vector<Mask> D2 = D;
        D2[cl][k] = kMaskBot;
        if (branch(std::move(D2))) return true;
      }
      return false;
    }
    return false;
  }

 public:
  // Direct determinization for a given structure (used by determinize_dag).
  std::optional<std::vector<Inst>> run_fixed(const std::vector<Mode>& modes, const std::vector<std::vector<char>>& P,
                                             const FactSet& facts) {
    UF uf(k_);
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j)
        if (P[i][j] && P[j][i]) uf.unite(i, j);
    std::map<int, int> id;
    S_ = Structure{};
    S_.nterms = k_;
    S_.cls_of.assign(k_, -1);
    for (int t = 0; t < k_; ++t) {
      auto [it, fresh] = id.emplace(uf.find(t), (int)id.size());
      S_.cls_of[t] = it->second;
      if (fresh) {
        S_.mode.push_back(modes[t]);
        S_.has_var.push_back(1);
      } else if (!(S_.mode[it->second] == modes[t])) {
        return std::nullopt;
      }
    }
    int C = (int)id.size();
    std::set<std::pair<int, int>> E;
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j)
        if (P[i][j] && S_.cls_of[i] != S_.cls_of[j]) E.insert({S_.cls_of[i], S_.cls_of[j]});
    S_.E.assign(E.begin(), E.end());
    std::vector<int> indeg(C, 0);
    for (auto [a, b] : S_.E) ++indeg[b];
    std::set<int> ready;
    for (int i = 0; i < C; ++i)
      if (!indeg[i]) ready.insert(i);
    while (!ready.empty()) {
      int u = *ready.begin();
      ready.erase(ready.begin());
      S_.topo.push_back(u);
      for (auto [a, b] : S_.E)
        if (a == u && --indeg[b] == 0) ready.insert(b);
    }
    if ((int)S_.topo.size() != C) return std::nullopt;
    std::vector<Mask> D(C, Mask(c_.n, kMaskAll));
    for (int cl = 0; cl < C; ++cl)
      if (S_.mode[cl].f == Fu::Full)
        for (auto& x : D[cl]) x &= kMask0 | kMask1;
    for (const Fact& f : facts) D[S_.cls_of[f.var]][f.k] &= vmask(f.v);
    if (!propagate(D)) return std::nullopt;
    auto val = determinize(D, std::vector<char>(C, 1));
    if (!val) return std::nullopt;
    std::vector<Inst> out(k_);
    for (int v = 0; v < k_; ++v) out[v] = (*val)[S_.cls_of[v]];
    return out;
  }
};

// ---- implicant enumeration over the quantifier-free matrix ----

struct MNode {
  enum K { Atom, And, Or, True, False } k;
  int atom = -1;
  bool neg = false;
  std::vector<int> kids;
  MNode(K kk) : k(kk) {}
};

class Matrix {
 public:
  std::vector<MNode> nodes;
  std::vector<Atom> atoms;
  std::vector<Inst> consts;
  std::vector<int8_t> fixed;  // per atom: -1 unless decided without variables
  int root = -1;

  Matrix(const F& f, const std::vector<std::string>& vars, const Ctx& c) : vars_(vars), c_(c) {
    for (size_t i = 0; i < vars.size(); ++i) vid_[vars[i]] = (int)i;
    root = build(f, false);
  }

  int nvars() const { return (int)vars_.size(); }

 private:
  const std::vector<std::string>& vars_;
  const Ctx& c_;
  std::map<std::string, int> vid_;
  std::map<std::tuple<int, int, int>, int> amap_;

  int term(const Term& t) {
    if (!t.is_const) {
      auto it = vid_.find(t.name);
      if (it == vid_.end()) throw Error("unbound free variable '" + t.name + "'");
      return it->second;
    }
    if ((int)t.c.size() != c_.n)
      throw Error("constant " + to_string(t.c) + " does not match model dimension " + std::to_string(c_.n));
    for (size_t i = 0; i < consts.size(); ++i)
      if (consts[i] == t.c) return nvars() + (int)i;
    consts.push_back(t.c);
    return nvars() + (int)consts.size() - 1;
  }

  int add(MNode n) {
    nodes.push_back(std::move(n));
    return (int)nodes.size() - 1;
  }

  int build(const F& f, bool neg) {
    switch (f->op) {
      case Op::Not: return build(f->a, !neg);
      case Op::True: return add({neg ? MNode::False : MNode::True});
      case Op::False: return add({neg ? MNode::True : MNode::False});
      case Op::And:
      case Op::Or: {
        MNode n{(f->op == Op::And) != neg ? MNode::And : MNode::Or};
        n.kids = {build(f->a, neg), build(f->b, neg)};
        return add(std::move(n));
      }
      case Op::Pos:
      case Op::Sub:
      case Op::Full:
      case Op::AllPos:
      case Op::AllNeg: {
        int x = term(f->t[0]), y = f->op == Op::Sub ? term(f->t[1]) : -1;
        if (f->op == Op::Sub && x == y) return add({neg ? MNode::False : MNode::True});
        auto key = std::make_tuple((int)f->op, x, y);
        auto it = amap_.find(key);
        int id;
        if (it != amap_.end()) {
          id = it->second;
        } else {
          id = (int)atoms.size();
          atoms.push_back({f->op, x, y});
          amap_[key] = id;
          fixed.push_back(ground(atoms.back()));
        }
        MNode n{MNode::Atom};
        n.atom = id;
        n.neg = neg;
        return add(std::move(n));
      }
      case Op::Eq: {
        MNode n{neg ? MNode::Or : MNode::And};
        n.kids = {build(mk_sub(f->t[0], f->t[1]), neg), build(mk_sub(f->t[1], f->t[0]), neg)};
        return add(std::move(n));
      }
      default: throw Error("unexpected connective in existential matrix");
    }
  }

  int8_t ground(const Atom& a) const {
    int k = nvars();
    if (a.x < k || (a.y >= 0 && a.y < k)) return -1;
    const Inst& x = consts[a.x - k];
    switch (a.op) {
      case Op::Sub: return subsumes(x, consts[a.y - k]);
      case Op::Pos: return pos(c_.m, x);
      case Op::Full: return is_full(x);
      case Op::AllPos: return c_.all_pos(x);
      case Op::AllNeg: return c_.all_neg(x);
      default: return -1;
    }
  }
};

class Implicants {
 public:
  Implicants(const Matrix& m, Solver& s, ExistsStats* st) : m_(m), s_(s), st_(st), asg_(m.fixed) {}

  bool run() { return dfs(); }

 private:
  const Matrix& m_;
  Solver& s_;
  ExistsStats* st_;
  std::vector<int8_t> asg_;

  int8_t eval(int u) const {
    const MNode& n = m_.nodes[u];
    switch (n.k) {
      case MNode::True: return 1;
      case MNode::False: return 0;
      case MNode::Atom: {
        int8_t v = asg_[n.atom];
        return v < 0 ? v : int8_t(n.neg ? !v : v);
      }
      case MNode::And:
      case MNode::Or: {
        bool conj = n.k == MNode::And;
        int8_t r = conj ? 1 : 0;
        for (int k : n.kids) {
          int8_t v = eval(k);
          if (v == (conj ? 0 : 1)) return v;
          if (v < 0) r = -1;
        }
        return r;
      }
    }
    return -1;
  }

  int pick(int u) const {
    const MNode& n = m_.nodes[u];
    if (n.k == MNode::Atom) return n.atom;
    for (int k : n.kids)
      if (eval(k) < 0) return pick(k);
    return -1;
  }

  bool dfs() {
    int8_t r = eval(m_.root);
    if (r == 0) return false;
    if (r == 1) {
      if (st_) ++st_->implicants;
      std::vector<Lit> lits;
      for (size_t a = 0; a < asg_.size(); ++a)
        if (asg_[a] >= 0 && m_.fixed[a] < 0) lits.push_back({(int)a, asg_[a] == 1});
      return s_.solve(lits);
    }
    int a = pick(m_.root);
    for (int8_t v : {1, 0}) {
      asg_[a] = v;
      if (dfs()) return true;
    }
    asg_[a] = -1;
    return false;
  }
};

void check_binding(const Model& m, const Binding& b) {
  for (const auto& [name, e] : b)
    if ((int)e.size() != dim(m))
      throw Error("binding for '" + name + "' has dimension " + std::to_string(e.size()) + ", model has " +
                  std::to_string(dim(m)));
}

bool extended_on_vars(const F& f) {
  if ((f->op == Op::AllPos || f->op == Op::AllNeg) && !f->t[0].is_const) return true;
  return (f->a && extended_on_vars(f->a)) || (f->b && extended_on_vars(f->b));
}

bool run_exists(const Model& m, const F& f, const Binding& b, const Oracles& o, ExistsStats* st) {
  if (auto* d = std::get_if<Diagram>(&m); d && !is_binary_diagram(*d))
    throw Unsupported("the existential engine needs a binary model; ternary diagrams go to the width or naive engine");
  check_binding(m, b);
  F g = expand_plus(substitute(f, b));
  Fragment fr = fragment_of(g);
  if (fr == Fragment::GeneralFOIL)
    throw Unsupported("formula mixes existential and universal quantification; use the width or naive engine");
  bool universal = fr == Fragment::ForallFOIL || fr == Fragment::ForallFOILPlus;
  if (universal) g = negate_dual(g);
  if (!o && extended_on_vars(nnf(g)))
    throw Unsupported("AllPos/AllNeg on a quantified variable over a diagram has no polynomial oracle");
  PrenexForm p = prenex(g);
  std::vector<std::string> vars;
  for (const Block& bl : p.blocks) {
    if (!bl.exists) throw Unsupported("universal quantifier left after normalization");
    vars.insert(vars.end(), bl.vars.begin(), bl.vars.end());
  }
  if (!free_vars(from_prenex(p)).empty())
    throw Error("unbound free variable '" + *free_vars(from_prenex(p)).begin() + "'");
  Ctx ctx(m, o, st);
  Matrix mx(p.matrix, vars, ctx);
  Solver s(ctx, mx.nvars(), mx.consts, mx.atoms);
  bool r = Implicants(mx, s, st).run();
  return universal ? !r : r;
}

}  // namespace

Mask mask_of_undetermined(const Inst& u) {
  Mask m(u.size());
  for (size_t i = 0; i < u.size(); ++i) m[i] = vmask(u[i]);
  return m;
}

Oracles perceptron_oracles(const Perceptron& p) {
  Oracles o;
  // Worst (dap) or best (dan) case contribution per component; ties go to ⊥,
  // which keeps successors unconstrained.
  auto run = [p](const Mask& m, bool allpos) -> std::optional<Inst> {
    Inst e(m.size());
    double s = 0;
    for (size_t i = 0; i < m.size(); ++i) {
      double w = p.w[i];
      double cb = allpos ? std::min(0.0, w) : std::max(0.0, w);
      bool have = false;
      double best = 0;
      for (Val v : {Val::Bot, Val::Zero, Val::One}) {
        if (!(m[i] & vmask(v))) continue;
        double c = v == Val::Bot ? cb : v == Val::Zero ? 0.0 : w;
        if (!have || (allpos ? c > best : c < best)) {
          best = c, e[i] = v;
          have = true;
        }
      }
      if (!have) return std::nullopt;
      s += best;
    }
    if (allpos ? s >= p.t : s < p.t) return e;
    return std::nullopt;
  };
  o.dap = [run](const Mask& m) { return run(m, true); };
  o.dan = [run](const Mask& m) { return run(m, false); };
  return o;
}

std::optional<Inst> det_all_pos_perceptron(const Perceptron& p, const Inst& u) {
  double s = 0;
  Inst e = u;
  for (size_t i = 0; i < u.size(); ++i) {
    double w = p.w[i];
    switch (u[i]) {
      case Val::Zero: break;
      case Val::One: s += w; break;
      case Val::Bot: s += std::min(0.0, w); break;
      case Val::Dia:
        s += std::max(0.0, w);
        e[i] = w >= 0 ? Val::One : Val::Zero;
        break;
    }
  }
  if (s >= p.t) return e;
  return std::nullopt;
}

std::optional<Inst> det_all_neg_perceptron(const Perceptron& p, const Inst& u) {
  double s = 0;
  Inst e = u;
  for (size_t i = 0; i < u.size(); ++i) {
    double w = p.w[i];
    switch (u[i]) {
      case Val::Zero: break;
      case Val::One: s += w; break;
      case Val::Bot: s += std::max(0.0, w); break;
      case Val::Dia:
        s += std::min(0.0, w);
        e[i] = w >= 0 ? Val::Zero : Val::One;
        break;
    }
  }
  if (s < p.t) return e;
  return std::nullopt;
}

bool eval_exists_fbdd(const Diagram& M, const F& f, const Binding& b, ExistsStats* st) {
  if (!is_binary_diagram(M) || !validate(M).is_free)
    throw Unsupported("model is not a free binary diagram; use the width-bounded or naive engine");
  return run_exists(Model(M), f, b, Oracles{}, st);
}

bool eval_exists_plus(const Model& m, const F& f, const Binding& b, const Oracles& o, ExistsStats* st) {
  return run_exists(m, f, b, o, st);
}

bool eval_exists(const Model& m, const F& f, const Binding& b, ExistsStats* st) {
  if (auto* p = std::get_if<Perceptron>(&m)) return run_exists(m, f, b, perceptron_oracles(*p), st);
  return run_exists(m, f, b, Oracles{}, st);
}

// ---- guess structures ----

std::vector<Type> type_catalog(bool extended) {
  if (!extended) return {Type{true, true, true, false}, Type{false, false, false, false}};
  return {Type{true, true, true, false}, Type{true, false, false, true}, Type{false, false, true, false},
          Type{false, false, false, true}, Type{false, false, true, true}};
}

std::vector<std::pair<int, int>> ContainmentGuess::N() const {
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < P.size(); ++i)
    for (size_t j = 0; j < P.size(); ++j)
      if (!P[i][j]) out.push_back({(int)i, (int)j});
  return out;
}

std::vector<std::pair<TypeAssignment, ContainmentGuess>> enumerate_guesses(int nv, bool extended) {
  std::vector<std::pair<TypeAssignment, ContainmentGuess>> out;
  std::vector<std::pair<int, int>> off;
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j)
      if (i != j) off.push_back({i, j});
  auto cat = type_catalog(extended);
  // Completions of y are completions of x whenever x ⊆ y.
  auto compatible = [&](const Type& x, const Type& y) {
    if (x.full) return x == y;
    if (!extended) return true;
    return (!y.exists_pos || x.exists_pos) && (!y.exists_neg || x.exists_neg);
  };
  for (long long rm = 0; rm < (1LL << off.size()); ++rm) {
    ContainmentGuess g;
    g.P.assign(nv, std::vector<char>(nv, 0));
    for (int i = 0; i < nv; ++i) g.P[i][i] = 1;
    for (size_t b = 0; b < off.size(); ++b)
      if (rm >> b & 1) g.P[off[b].first][off[b].second] = 1;
    bool trans = true;
    for (int i = 0; i < nv && trans; ++i)
      for (int j = 0; j < nv && trans; ++j)
        for (int k = 0; k < nv && trans; ++k)
          if (g.P[i][j] && g.P[j][k] && !g.P[i][k]) trans = false;
    if (!trans) continue;
    std::vector<int> ti(nv, 0);
    for (;;) {
      TypeAssignment t;
      for (int i = 0; i < nv; ++i) t.t.push_back(cat[ti[i]]);
      bool ok = true;
      for (int i = 0; i < nv && ok; ++i)
        for (int j = 0; j < nv && ok; ++j)
          if (i != j && g.P[i][j]) {
            if (!compatible(t.t[i], t.t[j])) ok = false;
            if (t.t[i].full && !g.P[j][i]) ok = false;
            if (g.P[j][i] && !(t.t[i] == t.t[j])) ok = false;
          }
      if (ok) out.push_back({t, g});
      int i = 0;
      for (; i < nv; ++i) {
        if (++ti[i] < (int)cat.size()) break;
        ti[i] = 0;
      }
      if (i == nv) break;
    }
  }
  return out;
}

std::vector<FactSet> guess_witnesses(const ContainmentGuess& g, const std::vector<int>& nonfull, int n) {
  int nv = (int)g.P.size();
  // A choice is a small set of facts; all choices are combined by product.
  std::vector<std::vector<FactSet>> slots;
  for (auto [a, b] : g.N()) {
    std::vector<FactSet> opts;
    for (int k = 0; k < n; ++k)
      for (Val al : {Val::Zero, Val::One})
        for (Val be : {flip(al), Val::Bot}) opts.push_back({{a, k, al}, {b, k, be}});
    slots.push_back(std::move(opts));
  }
  for (int v : nonfull) {
    std::vector<FactSet> opts;
    for (int k = 0; k < n; ++k) opts.push_back({{v, k, Val::Bot}});
    slots.push_back(std::move(opts));
  }
  std::set<FactSet> out;
  std::vector<size_t> idx(slots.size(), 0);
  for (;;) {
    std::map<std::pair<int, int>, Val> at;
    bool ok = true;
    auto put = [&](int v, int k, Val x) {
      auto [it, fresh] = at.emplace(std::pair{v, k}, x);
      if (!fresh && it->second != x) ok = false;
    };
    for (size_t s = 0; s < slots.size(); ++s)
      for (const Fact& f : slots[s][idx[s]]) {
        put(f.var, f.k, f.v);
        for (int o = 0; o < nv; ++o) {
          if (defined(f.v) && g.P[f.var][o]) put(o, f.k, f.v);
          if (f.v == Val::Bot && g.P[o][f.var]) put(o, f.k, Val::Bot);
        }
      }
    if (ok) {
      FactSet fs;
      for (auto& [vk, x] : at) fs.push_back({vk.first, vk.second, x});
      out.insert(fs);
    }
    size_t s = 0;
    for (; s < slots.size(); ++s) {
      if (++idx[s] < slots[s].size()) break;
      idx[s] = 0;
    }
    if (s == slots.size()) break;
  }
  return {out.begin(), out.end()};
}

std::optional<std::vector<Inst>> determinize_dag(const Model& m, const TypeAssignment& tau,
                                                 const ContainmentGuess& g, const FactSet& facts,
                                                 const Oracles& o) {
  int nv = (int)g.P.size();
  std::vector<Mode> modes;
  for (const Type& t : tau.t) {
    Mode md;
    if (t.full) md = {Fu::Full, t.pos ? Cl::AllPos : Cl::AllNeg};
    else if (t.exists_pos && t.exists_neg) md = {Fu::NonFull, Cl::Mixed};
    else if (t.exists_pos) md = {Fu::NonFull, Cl::AllPos};
    else if (t.exists_neg) md = {Fu::NonFull, Cl::AllNeg};
    else md = {Fu::Any, Cl::None};  // the plain ¬Pos type
    modes.push_back(md);
  }
  Ctx ctx(m, o, nullptr);
  std::vector<Inst> noconsts;
  std::vector<Atom> noatoms;
  Solver s(ctx, nv, noconsts, noatoms);
  auto val = s.run_fixed(modes, g.P, facts);
  if (!val) return std::nullopt;
  // Final check against the guess.
  for (int i = 0; i < nv; ++i) {
    const Inst& e = (*val)[i];
    const Type& t = tau.t[i];
    bool full = is_full(e), p = pos(m, e);
    if (t == Type{false, false, false, false}) {
      if (p) return std::nullopt;
    } else if (full != t.full || p != t.pos || ctx.has(e, true) != t.exists_pos || ctx.has(e, false) != t.exists_neg) {
      return std::nullopt;
    }
    for (int j = 0; j < nv; ++j)
      if (subsumes(e, (*val)[j]) != bool(g.P[i][j])) return std::nullopt;
  }
  for (const Fact& f : facts)
    if ((*val)[f.var][f.k] != f.v) return std::nullopt;
  return val;
}

// A free component of x pinned by y or z to one value b can only be ⊥ or b in
// a witness; b is never worse for AllPos, so it is fixed to b. Pinned to both
// values it must stay ⊥. Only fully unpinned components become ◇.
PapReduction reduce_pap_to_dap(const Inst& x, const Inst& y, const Inst& z) {
  if (x.size() != y.size() || x.size() != z.size()) throw Error("dimension mismatch");
  PapReduction r;
  r.u.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    auto clash = [&](Val a) { return defined(a) && defined(x[i]) && a != x[i]; };
    if (defined(x[i])) {
      if (clash(y[i]) || clash(z[i])) {
        r.verdict_false = true;
        r.u.clear();
        return r;
      }
      r.u[i] = x[i];
    } else if (defined(y[i]) && defined(z[i]) && y[i] != z[i]) {
      r.u[i] = Val::Bot;
    } else if (defined(y[i])) {
      r.u[i] = y[i];
    } else if (defined(z[i])) {
      r.u[i] = z[i];
    } else {
      r.u[i] = Val::Dia;
    }
  }
  return r;
}

std::array<Inst, 3> dap_to_pap(const Inst& u) {
  Inst x(u.size()), y(u.size()), z(u.size());
  for (size_t i = 0; i < u.size(); ++i) {
    x[i] = defined(u[i]) ? u[i] : Val::Bot;
    y[i] = u[i] == Val::Bot ? Val::One : Val::Bot;
    z[i] = u[i] == Val::Bot ? Val::Zero : Val::Bot;
  }
  return {x, y, z};
}

}  // namespace foil
