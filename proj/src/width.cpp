#include "foil/width.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <unordered_map>

namespace foil {

namespace {

constexpr int kF = 0, kT = 1;

struct TNode {
  int lvl;
  std::array<int, 3> ch;  // by value: 0, 1, ⊥
};

struct KeyHash {
  size_t operator()(const std::array<int, 4>& k) const {
    size_t h = 1469598103934665603ull;
    for (int x : k) h = (h ^ size_t(x)) * 1099511628211ull;
    return h;
  }
};

int child_index(Val v) { return v == Val::Zero ? 0 : v == Val::One ? 1 : 2; }

// Hash-consed ternary diagrams over one fixed level order. A node whose three
// children coincide is never created, so edges may skip levels; together with
// hash-consing this keeps every function in a unique reduced form.
class Store {
 public:
  explicit Store(std::vector<int> var_at) : var_at_(std::move(var_at)), N((int)var_at_.size()) {
    int mx = 0;
    for (int v : var_at_) mx = std::max(mx, v + 1);
    level_of_.assign(mx, -1);
    for (int l = 0; l < N; ++l) level_of_[var_at_[l]] = l;
    nodes_.push_back({N, {kF, kF, kF}});
    nodes_.push_back({N, {kT, kT, kT}});
  }

  const std::vector<int>& var_at() const { return var_at_; }
  int level_of(int var) const { return level_of_.at(var); }
  int lvl(int u) const { return nodes_[u].lvl; }
  size_t size() const { return nodes_.size(); }

  void set_budget(long long b) { budget_ = b, created_ = 0; }

  int mk(int l, int a, int b, int c) {
    if (a == b && b == c) return a;
    std::array<int, 4> k{l, a, b, c};
    auto it = unique_.find(k);
    if (it != unique_.end()) return it->second;
    if (++created_ > budget_)
      throw ResourceError("width engine: an intermediate diagram exceeds the cap of " + std::to_string(budget_) +
                          " nodes");
    nodes_.push_back({l, {a, b, c}});
    int id = (int)nodes_.size() - 1;
    unique_.emplace(k, id);
    return id;
  }

  int neg(int u) {
    std::unordered_map<int, int> memo;
    return neg_rec(u, memo);
  }

  int apply(BoolOp op, int a, int b) {
    std::unordered_map<uint64_t, int> memo;
    return apply_rec(op == BoolOp::And, a, b, memo);
  }

  // ∃ over the flagged levels; values range over the first nvals children.
  int exists(int u, const std::vector<char>& S, int nvals) {
    std::map<std::vector<int>, int> memo;
    return proj_rec({u}, S, nvals, memo);
  }

  int project(int u, const std::vector<char>& S, Quant q, int nvals) {
    if (q == Quant::Exists) return exists(u, S, nvals);
    return neg(exists(neg(u), S, nvals));
  }

  // Node counts per level of the complete form restricted to active levels.
  std::vector<int> counts(int root, const std::vector<char>& active) const {
    std::vector<int> start(nodes_.size(), -1), order;
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> st{root};
    seen[root] = 1;
    start[root] = 0;
    while (!st.empty()) {
      int u = st.back();
      st.pop_back();
      order.push_back(u);
      if (u <= kT) continue;
      for (int c : nodes_[u].ch) {
        int s = nodes_[u].lvl + 1;
        if (start[c] < 0 || s < start[c]) start[c] = s;
        if (!seen[c]) {
          seen[c] = 1;
          st.push_back(c);
        }
      }
    }
    std::vector<int> diff(N + 1, 0);
    for (int u : order) {
      int hi = std::min(nodes_[u].lvl, N - 1);
      if (start[u] > hi) continue;
      ++diff[start[u]];
      --diff[hi + 1];
    }
    std::vector<int> out(N, 0);
    int run = 0;
    for (int l = 0; l < N; ++l) {
      run += diff[l];
      out[l] = active[l] ? run : 0;
    }
    return out;
  }

  long long reachable(int root) const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> st{root};
    seen[root] = 1;
    long long k = 0;
    while (!st.empty()) {
      int u = st.back();
      st.pop_back();
      ++k;
      if (u <= kT) continue;
      for (int c : nodes_[u].ch)
        if (!seen[c]) seen[c] = 1, st.push_back(c);
    }
    return k;
  }

  // var → value lookup; components not tested are ignored.
  template <class Get>
  bool eval(int u, Get get) const {
    while (u > kT) u = nodes_[u].ch[child_index(get(var_at_[nodes_[u].lvl]))];
    return u == kT;
  }

  // Imports d with its feature f mapped to store variable off + f. Binary
  // diagrams send ⊥ to false.
  int import(const Diagram& d, int off) {
    std::vector<int> memo(d.nodes.size(), -1);
    bool ternary = d.kind == Kind::COTDD;
    std::function<int(int)> go = [&](int u) -> int {
      if (memo[u] >= 0) return memo[u];
      const Node& nd = d.nodes[u];
      if (nd.leaf) return memo[u] = nd.value ? kT : kF;
      int l = level_of(off + nd.var);
      for (int c : {nd.lo, nd.hi, ternary ? nd.bot : -1})
        if (c >= 0 && !d.nodes[c].leaf && level_of(off + d.nodes[c].var) <= l)
          throw Error("diagram does not follow the required variable order");
      int lo = go(nd.lo), hi = go(nd.hi), bt = ternary ? go(nd.bot) : kF;
      return memo[u] = mk(l, lo, hi, bt);
    };
    return go(d.root);
  }

  // Exports the complete form over the active levels; variables are renamed
  // through ren.
  Diagram export_complete(int root, const std::vector<char>& active, const std::vector<int>& ren, Kind kind) const {
    std::vector<int> A;
    for (int l = 0; l < N; ++l)
      if (active[l]) A.push_back(l);
    Diagram out;
    out.kind = kind;
    out.dim = (int)A.size();
    for (int l : A) out.order.push_back(ren[var_at_[l]]);
    bool ternary = kind == Kind::COTDD;
    int lf = out.leaf(false), lt = out.leaf(true);
    std::map<std::pair<int, int>, int> memo;
    std::function<int(int, size_t)> pad = [&](int u, size_t p) -> int {
      if (p == A.size()) {
        if (u > kT) throw Error("export: node on an inactive level");
        return u == kT ? lt : lf;
      }
      auto key = std::make_pair(u, (int)p);
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
      int r;
      int var = ren[var_at_[A[p]]];
      if (u > kT && nodes_[u].lvl == A[p]) {
        TNode nd = nodes_[u];
        int lo = pad(nd.ch[0], p + 1), hi = pad(nd.ch[1], p + 1);
        r = out.inner(var, lo, hi, ternary ? pad(nd.ch[2], p + 1) : -1);
      } else {
        if (u > kT && nodes_[u].lvl < A[p]) throw Error("export: node on an inactive level");
        int c = pad(u, p + 1);
        r = out.inner(var, c, c, ternary ? c : -1);
      }
      return memo[key] = r;
    };
    out.root = pad(root, 0);
    return out;
  }

 private:
  std::vector<int> var_at_, level_of_;
  std::vector<TNode> nodes_;
  std::unordered_map<std::array<int, 4>, int, KeyHash> unique_;
  long long budget_ = 1LL << 40, created_ = 0;

 public:
  const int N;

 private:
  int neg_rec(int u, std::unordered_map<int, int>& memo) {
    if (u <= kT) return 1 - u;
    auto it = memo.find(u);
    if (it != memo.end()) return it->second;
    TNode nd = nodes_[u];
    int a = neg_rec(nd.ch[0], memo), b = neg_rec(nd.ch[1], memo), c = neg_rec(nd.ch[2], memo);
    return memo[u] = mk(nd.lvl, a, b, c);
  }

  int apply_rec(bool conj, int a, int b, std::unordered_map<uint64_t, int>& memo) {
    if (conj) {
      if (a == kF || b == kF) return kF;
      if (a == kT) return b;
      if (b == kT) return a;
    } else {
      if (a == kT || b == kT) return kT;
      if (a == kF) return b;
      if (b == kF) return a;
    }
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    uint64_t key = (uint64_t(a) << 32) | uint32_t(b);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    TNode na = nodes_[a], nb = nodes_[b];
    int L = std::min(na.lvl, nb.lvl);
    std::array<int, 3> r;
    for (int c = 0; c < 3; ++c)
      r[c] = apply_rec(conj, na.lvl == L ? na.ch[c] : a, nb.lvl == L ? nb.ch[c] : b, memo);
    return memo[key] = mk(L, r[0], r[1], r[2]);
  }

  int proj_rec(std::vector<int> set, const std::vector<char>& S, int nvals, std::map<std::vector<int>, int>& memo) {
    if (std::find(set.begin(), set.end(), kT) != set.end()) return kT;
    set.erase(std::remove(set.begin(), set.end(), kF), set.end());
    if (set.empty()) return kF;
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    auto it = memo.find(set);
    if (it != memo.end()) return it->second;
    int L = N;
    for (int u : set) L = std::min(L, nodes_[u].lvl);
    int r;
    if (S[L]) {
      std::vector<int> next;
      for (int u : set) {
        if (nodes_[u].lvl != L) {
          next.push_back(u);
          continue;
        }
        for (int c = 0; c < nvals; ++c) next.push_back(nodes_[u].ch[c]);
      }
      r = proj_rec(std::move(next), S, nvals, memo);
    } else {
      std::array<int, 3> ch;
      for (int c = 0; c < 3; ++c) {
        std::vector<int> next;
        for (int u : set) next.push_back(nodes_[u].lvl == L ? nodes_[u].ch[c] : u);
        ch[c] = proj_rec(std::move(next), S, nvals, memo);
      }
      r = mk(L, ch[0], ch[1], ch[2]);
    }
    return memo[set] = r;
  }
};

int max_of(const std::vector<int>& v) { return v.empty() ? 0 : *std::max_element(v.begin(), v.end()); }

std::vector<int> identity(int n) {
  std::vector<int> r(n);
  for (int i = 0; i < n; ++i) r[i] = i;
  return r;
}

bool binary_kind(const Diagram& d) { return d.kind != Kind::COTDD; }

int full_gadget(Store& s, int slot, int n, const std::vector<int>& pi) {
  int g = kT;
  for (size_t p = pi.size(); p-- > 0;) g = s.mk(s.level_of(slot * n + pi[p]), g, g, kF);
  return g;
}

int sub_gadget(Store& s, int i, int j, int n, const std::vector<int>& pi) {
  if (i == j) return kT;
  int g = kT;
  for (size_t p = pi.size(); p-- > 0;) {
    int Li = s.level_of(i * n + pi[p]), Lj = s.level_of(j * n + pi[p]);
    if (Li < Lj) {
      int b0 = s.mk(Lj, g, kF, kF), b1 = s.mk(Lj, kF, g, kF);
      g = s.mk(Li, b0, b1, g);
    } else {
      int a0 = s.mk(Li, g, kF, g), a1 = s.mk(Li, kF, g, g), ab = s.mk(Li, kF, kF, g);
      g = s.mk(Lj, a0, a1, ab);
    }
  }
  return g;
}

// Lifted Pos on one slot: binary models additionally need a full slot.
int lift(Store& s, const Diagram& m, int slot, const std::vector<int>& pi) {
  int u = s.import(m, slot * m.dim);
  if (binary_kind(m)) u = s.apply(BoolOp::And, u, full_gadget(s, slot, m.dim, pi));
  return u;
}

// AllPos/AllNeg have no gadget; rewrite them into Pos, ⊆ and Full.
F lower_extended(const F& f, std::set<std::string>& used, int& next) {
  auto fresh = [&] {
    for (;;) {
      std::string n = "w_" + std::to_string(++next);
      if (used.insert(n).second) return n;
    }
  };
  switch (f->op) {
    case Op::AllPos: {
      std::string y = fresh();
      return mk_forall(y, mk_implies(mk_and(mk_sub(f->t[0], V(y)), mk_full(V(y))), mk_pos(V(y))));
    }
    case Op::AllNeg: {
      std::string y = fresh();
      return mk_forall(y, mk_implies(mk_sub(f->t[0], V(y)), mk_not(mk_pos(V(y)))));
    }
    case Op::Not: return mk_not(lower_extended(f->a, used, next));
    case Op::And: return mk_and(lower_extended(f->a, used, next), lower_extended(f->b, used, next));
    case Op::Or: return mk_or(lower_extended(f->a, used, next), lower_extended(f->b, used, next));
    case Op::Exists: return mk_exists(f->name, lower_extended(f->a, used, next));
    case Op::Forall: return mk_forall(f->name, lower_extended(f->a, used, next));
    default: return f;
  }
}

// Replaces every constant by a fresh variable; returns them in first-seen order.
F lift_constants(const F& f, std::vector<std::pair<std::string, Inst>>& cs, std::set<std::string>& used) {
  if (is_atom(f->op) || f->op == Op::Macro) {
    auto g = std::make_shared<Formula>(*f);
    for (Term& t : g->t) {
      if (!t.is_const) continue;
      std::string name;
      for (auto& [n, c] : cs)
        if (c == t.c) name = n;
      if (name.empty()) {
        for (int k = (int)cs.size();; ++k) {
          name = "c_" + std::to_string(k);
          if (used.insert(name).second) break;
        }
        cs.push_back({name, t.c});
      }
      t = V(name);
    }
    return g;
  }
  auto g = std::make_shared<Formula>(*f);
  if (f->a) g->a = lift_constants(f->a, cs, used);
  if (f->b) g->b = lift_constants(f->b, cs, used);
  return g;
}

class Compiler {
 public:
  Compiler(Store& s, const Diagram& m, const std::vector<int>& pi, int q, const WidthOptions& opt, WidthStats* st)
      : s_(s), m_(m), pi_(pi), n_(m.dim), q_(q), opt_(opt), st_(st), active_(s.N, 1) {}

  std::map<std::string, int> slot;
  int next_slot = 0;

  int go(const F& f) {
    switch (f->op) {
      case Op::True: return kT;
      case Op::False: return kF;
      case Op::Not: return checked(guard([&] { return s_.neg(go(f->a)); }));
      case Op::And:
      case Op::Or: {
        if (st_) ++st_->connectives;
        int a = go(f->a), b = go(f->b);
        BoolOp op = f->op == Op::And ? BoolOp::And : BoolOp::Or;
        int r = guard([&] { return s_.apply(op, a, b); });
        if (st_) {
          ApplyRecord rec{s_.counts(a, active_), s_.counts(b, active_), s_.counts(r, active_)};
          st_->applies.push_back(std::move(rec));
        }
        return checked(r);
      }
      case Op::Pos: return checked(guard([&] { return lift(s_, m_, slot_of(f->t[0]), pi_); }));
      case Op::Full: return guard([&] { return full_gadget(s_, slot_of(f->t[0]), n_, pi_); });
      case Op::Sub: return guard([&] { return sub_gadget(s_, slot_of(f->t[0]), slot_of(f->t[1]), n_, pi_); });
      case Op::Eq: {
        int i = slot_of(f->t[0]), j = slot_of(f->t[1]);
        return checked(guard([&] {
          return s_.apply(BoolOp::And, sub_gadget(s_, i, j, n_, pi_), sub_gadget(s_, j, i, n_, pi_));
        }));
      }
      case Op::Exists:
      case Op::Forall: {
        int sl = next_slot++;
        auto saved = slot.count(f->name) ? std::optional<int>(slot[f->name]) : std::nullopt;
        slot[f->name] = sl;
        int body = go(f->a);
        if (saved) slot[f->name] = *saved;
        else slot.erase(f->name);
        return project(body, {sl}, f->op == Op::Exists ? Quant::Exists : Quant::Forall);
      }
      default:
        throw Error("width engine: unexpected non-atomic residue in the matrix");
    }
  }

  int project(int u, const std::vector<int>& slots, Quant q) {
    std::vector<char> S(s_.N, 0);
    for (int sl : slots)
      for (int f = 0; f < n_; ++f) S[s_.level_of(sl * n_ + f)] = 1;
    int in_w = max_of(s_.counts(u, active_));
    int r = guard([&] { return s_.project(u, S, q, 3); });
    for (int l = 0; l < s_.N; ++l)
      if (S[l]) active_[l] = 0;
    int out_w = max_of(s_.counts(r, active_));
    if (st_) st_->projects.push_back({in_w, out_w});
    return checked(r);
  }

 private:
  Store& s_;
  const Diagram& m_;
  const std::vector<int>& pi_;
  int n_, q_;
  const WidthOptions& opt_;
  WidthStats* st_;
  std::vector<char> active_;

  int slot_of(const Term& t) const {
    if (t.is_const) throw Error("width engine: constants must be lifted to slots first");
    auto it = slot.find(t.name);
    if (it == slot.end()) throw Error("unbound free variable '" + t.name + "'");
    return it->second;
  }

  template <class Fn>
  int guard(Fn fn) {
    s_.set_budget(opt_.max_nodes);
    return fn();
  }

  int checked(int r) {
    int w = max_of(s_.counts(r, active_));
    if (w > opt_.max_width)
      throw ResourceError("width engine: intermediate width " + std::to_string(w) + " exceeds the cap of " +
                          std::to_string(opt_.max_width));
    if (st_) {
      st_->peak_width = std::max(st_->peak_width, w);
      st_->peak_nodes = std::max(st_->peak_nodes, s_.reachable(r));
    }
    return r;
  }
};

int count_binders(const F& f) {
  int k = is_quant(f->op) ? 1 : 0;
  if (f->a) k += count_binders(f->a);
  if (f->b) k += count_binders(f->b);
  return k;
}

}  // namespace

bool WidthStats::sum_claim_holds() const {
  for (const auto& r : applies)
    for (size_t j = 0; j < r.out.size(); ++j)
      if (r.out[j] > r.in1[j] + r.in2[j]) return false;
  return true;
}

bool WidthStats::product_bound_holds() const {
  for (const auto& r : applies)
    for (size_t j = 0; j < r.out.size(); ++j)
      if ((long long)r.out[j] > (long long)r.in1[j] * r.in2[j]) return false;
  return true;
}

bool WidthStats::project_bound_holds() const {
  for (const auto& r : projects)
    if (r.in_width < 30 && r.out_width > (1 << r.in_width)) return false;
  return true;
}

std::vector<int> interleaved_order(const std::vector<int>& pi, int q) {
  int n = (int)pi.size();
  std::vector<int> r;
  for (int f : pi)
    for (int s = 0; s < q; ++s) r.push_back(s * n + f);
  return r;
}

std::vector<int> derive_order(const Diagram& d) {
  if (!d.order.empty()) {
    std::vector<int> pos(d.dim, -1);
    for (size_t i = 0; i < d.order.size(); ++i) pos[d.order[i]] = (int)i;
    for (const Node& nd : d.nodes)
      if (!nd.leaf)
        for (int c : {nd.lo, nd.hi, nd.bot})
          if (c >= 0 && !d.nodes[c].leaf && pos[d.nodes[c].var] <= pos[nd.var])
            throw Unsupported("diagram violates its declared variable order");
    return d.order;
  }
  std::vector<std::set<int>> succ(d.dim);
  std::vector<int> indeg(d.dim, 0);
  for (const Node& nd : d.nodes)
    if (!nd.leaf)
      for (int c : {nd.lo, nd.hi, nd.bot})
        if (c >= 0 && !d.nodes[c].leaf && succ[nd.var].insert(d.nodes[c].var).second) ++indeg[d.nodes[c].var];
  std::set<int> ready;
  for (int i = 0; i < d.dim; ++i)
    if (!indeg[i]) ready.insert(i);
  std::vector<int> out;
  while (!ready.empty()) {
    int u = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(u);
    for (int v : succ[u])
      if (--indeg[v] == 0) ready.insert(v);
  }
  if ((int)out.size() != d.dim) throw Unsupported("diagram is not ordered: paths test features in conflicting orders");
  return out;
}

Diagram tdd_negate(const Diagram& m) {
  Store s(derive_order(m));
  int r = s.neg(s.import(m, 0));
  return s.export_complete(r, std::vector<char>(s.N, 1), identity(m.dim), m.kind == Kind::COTDD ? Kind::COTDD : Kind::COBDD);
}

Diagram tdd_apply(BoolOp op, const Diagram& a, const Diagram& b, ApplyRecord* rec) {
  if (a.dim != b.dim) throw Error("dimension mismatch");
  auto oa = derive_order(a), ob = derive_order(b);
  if (oa != ob) throw Error("order mismatch between operands");
  Store s(oa);
  int x = s.import(a, 0), y = s.import(b, 0);
  int r = s.apply(op, x, y);
  std::vector<char> all(s.N, 1);
  if (rec) *rec = {s.counts(x, all), s.counts(y, all), s.counts(r, all)};
  Kind k = binary_kind(a) && binary_kind(b) ? Kind::COBDD : Kind::COTDD;
  return s.export_complete(r, all, identity(a.dim), k);
}

Diagram bdd_to_tdd(const Diagram& m) {
  auto pi = derive_order(m);
  Store s(pi);
  int r = s.import(m, 0);
  if (binary_kind(m)) r = s.apply(BoolOp::And, r, full_gadget(s, 0, m.dim, pi));
  return s.export_complete(r, std::vector<char>(s.N, 1), identity(m.dim), Kind::COTDD);
}

Diagram tdd_project(const Diagram& m, const std::set<int>& S, Quant q, ProjectRecord* rec) {
  Store s(derive_order(m));
  int u = s.import(m, 0);
  std::vector<char> flag(s.N, 0), active(s.N, 1);
  for (int f : S) {
    if (f < 0 || f >= m.dim) throw Error("projection index out of range");
    flag[s.level_of(f)] = 1;
    active[s.level_of(f)] = 0;
  }
  int nvals = binary_kind(m) ? 2 : 3;
  int r = s.project(u, flag, q, nvals);
  if (rec) *rec = {max_of(s.counts(u, std::vector<char>(s.N, 1))), max_of(s.counts(r, active))};
  std::vector<int> ren(m.dim, -1);
  for (int f = 0, k = 0; f < m.dim; ++f)
    if (!S.count(f)) ren[f] = k++;
  return s.export_complete(r, active, ren, binary_kind(m) ? Kind::COBDD : Kind::COTDD);
}

Diagram lift_model(const Diagram& m, int slot, int q) {
  if (slot < 1 || slot > q) throw Error("slot out of range");
  auto pi = derive_order(m);
  Store s(interleaved_order(pi, q));
  int r = lift(s, m, slot - 1, pi);
  return s.export_complete(r, std::vector<char>(s.N, 1), identity(m.dim * q), Kind::COTDD);
}

Diagram containment_gadget(int i, int j, int n, int q, const std::vector<int>& pi) {
  if (i == j || i < 1 || j < 1 || i > q || j > q) throw Error("containment gadget needs two distinct slots in range");
  Store s(interleaved_order(pi, q));
  int r = sub_gadget(s, i - 1, j - 1, n, pi);
  return s.export_complete(r, std::vector<char>(s.N, 1), identity(n * q), Kind::COTDD);
}

Diagram compile_matrix(const Diagram& m, const F& psi, const std::vector<std::string>& slots) {
  auto pi = derive_order(m);
  int q = (int)slots.size();
  Store s(interleaved_order(pi, q));
  WidthOptions opt;
  Compiler c(s, m, pi, q, opt, nullptr);
  for (int i = 0; i < q; ++i) c.slot[slots[i]] = i;
  if (quantifier_count(psi)) throw Error("compile_matrix needs a quantifier-free formula");
  int r = c.go(psi);
  return s.export_complete(r, std::vector<char>(s.N, 1), identity(m.dim * q), Kind::COTDD);
}

bool eval_full_foil(const Model& model, const F& f, const Binding& b, const WidthOptions& opt, WidthStats* st) {
  auto* mp = std::get_if<Diagram>(&model);
  if (!mp) throw Unsupported("the width-bounded engine needs an ordered diagram");
  const Diagram& m = *mp;
  auto pi = derive_order(m);
  for (const auto& [name, e] : b)
    if ((int)e.size() != m.dim)
      throw Error("binding for '" + name + "' has dimension " + std::to_string(e.size()) + ", model has " +
                  std::to_string(m.dim));
  F g = expand_plus(substitute(f, b));
  std::set<std::string> used = all_names(g);
  int next = 0;
  g = lower_extended(g, used, next);
  int cd = const_dim(g);
  if (cd >= 0 && cd != m.dim)
    throw Error("constant of dimension " + std::to_string(cd) + " does not match model dimension " +
                std::to_string(m.dim));
  std::vector<std::pair<std::string, Inst>> consts;
  g = lift_constants(g, consts, used);
  for (const std::string& v : free_vars(g)) {
    bool known = false;
    for (auto& [n, c] : consts) known = known || n == v;
    if (!known) throw Error("unbound free variable '" + v + "'");
  }
  int l = (int)consts.size();
  PrenexForm p;
  int q;
  if (opt.scoped) {
    q = l + count_binders(g);
  } else {
    p = prenex(g);
    q = l;
    for (const Block& bl : p.blocks) q += (int)bl.vars.size();
  }
  q = std::max(q, 1);
  Store s(interleaved_order(pi, q));
  Compiler c(s, m, pi, q, opt, st);
  for (int i = 0; i < l; ++i) c.slot[consts[i].first] = i;
  c.next_slot = l;
  if (st) {
    st->slots = q;
    st->model_width = validate(m).width;
  }
  int r;
  if (opt.scoped) {
    r = c.go(g);
  } else {
    std::vector<std::vector<int>> block_slots;
    for (const Block& bl : p.blocks) {
      block_slots.emplace_back();
      for (const std::string& v : bl.vars) {
        c.slot[v] = c.next_slot;
        block_slots.back().push_back(c.next_slot++);
      }
    }
    r = c.go(p.matrix);
    if (st) st->matrix_width = max_of(s.counts(r, std::vector<char>(s.N, 1)));
    for (size_t i = p.blocks.size(); i-- > 0;)
      r = c.project(r, block_slots[i], p.blocks[i].exists ? Quant::Exists : Quant::Forall);
  }
  int n = m.dim;
  return s.eval(r, [&](int var) {
    int sl = var / n;
    if (sl >= l) throw Error("width engine: quantified slot left after projection");
    return consts[sl].second[var % n];
  });
}

}  // namespace foil
