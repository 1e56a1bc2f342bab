#include "foil/reductions.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "foil/naive.hpp"

namespace foil {

void check_cnf(const Cnf& c) {
  if (c.nvars < 0) throw Error("negative variable count");
  for (size_t i = 0; i < c.clauses.size(); ++i) {
    const auto& cl = c.clauses[i];
    for (int a = 0; a < 3; ++a) {
      int l = cl[a];
      if (l == 0 || std::abs(l) > c.nvars)
        throw Error("clause " + std::to_string(i + 1) + ": literal " + std::to_string(l) + " out of range");
      for (int b = 0; b < a; ++b)
        if (std::abs(cl[b]) == std::abs(l))
          throw Error("clause " + std::to_string(i + 1) + " has repeated or complementary literals");
    }
  }
}

Cnf to_3cnf(int nvars, const std::vector<std::vector<int>>& clauses) {
  Cnf out;
  out.nvars = nvars;
  auto fresh = [&] { return ++out.nvars; };
  for (const auto& raw : clauses) {
    std::vector<int> lits;
    bool taut = false;
    for (int l : raw) {
      if (l == 0 || std::abs(l) > nvars) throw Error("literal " + std::to_string(l) + " out of range");
      if (std::find(lits.begin(), lits.end(), -l) != lits.end()) taut = true;
      if (std::find(lits.begin(), lits.end(), l) == lits.end()) lits.push_back(l);
    }
    if (taut) continue;
    if (lits.empty()) {
      // Empty clause: unsatisfiable. Encode as all eight sign patterns.
      int a = fresh(), b = fresh(), c = fresh();
      for (int m = 0; m < 8; ++m)
        out.clauses.push_back({m & 1 ? -a : a, m & 2 ? -b : b, m & 4 ? -c : c});
      continue;
    }
    if (lits.size() == 1) {
      int a = fresh(), b = fresh();
      for (int m = 0; m < 4; ++m) out.clauses.push_back({lits[0], m & 1 ? -a : a, m & 2 ? -b : b});
    } else if (lits.size() == 2) {
      int a = fresh();
      out.clauses.push_back({lits[0], lits[1], a});
      out.clauses.push_back({lits[0], lits[1], -a});
    } else if (lits.size() == 3) {
      out.clauses.push_back({lits[0], lits[1], lits[2]});
    } else {
      int prev = fresh();
      out.clauses.push_back({lits[0], lits[1], prev});
      for (size_t i = 2; i + 2 < lits.size(); ++i) {
        int nx = fresh();
        out.clauses.push_back({-prev, lits[i], nx});
        prev = nx;
      }
      out.clauses.push_back({-prev, lits[lits.size() - 2], lits.back()});
    }
  }
  return out;
}

bool brute_sat(const Cnf& c) {
  if (c.nvars > 24) throw ResourceError("brute-force SAT limited to 24 variables");
  for (uint32_t a = 0; a < (1u << c.nvars); ++a) {
    bool ok = true;
    for (const auto& cl : c.clauses) {
      bool sat = false;
      for (int l : cl) sat = sat || (((a >> (std::abs(l) - 1)) & 1) == (l > 0 ? 1u : 0u));
      if (!sat) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

Cnf parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  int nv = -1, nc = -1;
  std::vector<std::vector<int>> cls;
  std::vector<int> cur;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    if (!(ls >> tok)) continue;
    if (tok == "c" || tok[0] == '%') continue;
    if (tok == "p") {
      std::string fmt;
      if (!(ls >> fmt >> nv >> nc) || fmt != "cnf") throw Error("malformed DIMACS header");
      continue;
    }
    std::istringstream ls2(line);
    long long l;
    while (ls2 >> l) {
      if (l == 0) {
        cls.push_back(cur);
        cur.clear();
      } else {
        cur.push_back((int)l);
      }
    }
    if (!ls2.eof()) throw Error("malformed DIMACS clause line: " + line);
  }
  if (!cur.empty()) cls.push_back(cur);
  if (nv < 0) throw Error("DIMACS input lacks a 'p cnf' header");
  bool three = true;
  for (const auto& c : cls) three = three && c.size() == 3;
  if (three) {
    Cnf c;
    c.nvars = nv;
    for (const auto& cl : cls) c.clauses.push_back({cl[0], cl[1], cl[2]});
    try {
      check_cnf(c);
      return c;
    } catch (const Error&) {
    }
  }
  return to_3cnf(nv, cls);
}

std::string to_dimacs(const Cnf& c) {
  std::ostringstream o;
  o << "p cnf " << c.nvars << " " << c.clauses.size() << "\n";
  for (const auto& cl : c.clauses) o << cl[0] << " " << cl[1] << " " << cl[2] << " 0\n";
  return o.str();
}

namespace {

// Full depth-3 tree over the clause's variables (features base + var − 1,
// ascending), each leaf labelled with the clause's truth value. Fresh leaves,
// so the result stays a tree.
int clause_tree(Diagram& d, const std::array<int, 3>& cl, int base) {
  std::array<int, 3> lits = cl;
  std::sort(lits.begin(), lits.end(), [](int a, int b) { return std::abs(a) < std::abs(b); });
  std::function<int(int, bool)> go = [&](int i, bool sat) -> int {
    if (i == 3) return d.leaf(sat);
    int l = lits[i];
    int lo = go(i + 1, sat || l < 0), hi = go(i + 1, sat || l > 0);
    return d.inner(base + std::abs(l) - 1, lo, hi);
  };
  return go(0, false);
}

std::vector<int> identity_order(int n) {
  std::vector<int> o(n);
  for (int i = 0; i < n; ++i) o[i] = i;
  return o;
}

}  // namespace

SatTree tree_from_3cnf(const Cnf& c) {
  check_cnf(c);
  int n = (int)c.clauses.size(), m = c.nvars;
  SatTree st;
  Diagram& d = st.tree;
  d.kind = Kind::DT;
  d.dim = n + m;
  d.order = identity_order(n + m);
  int next = d.leaf(true);
  for (int i = n; i-- > 0;) next = d.inner(i, clause_tree(d, c.clauses[i], n), next);
  d.root = next;
  st.e.assign(n + m, Val::Bot);
  for (int i = 0; i < n; ++i) st.e[i] = Val::One;
  return st;
}

F psi_formula(PsiForm form) {
  switch (form) {
    case PsiForm::Stable: return parse_core("Exists y, x <= y ^ P(y) ^ STABLE(y)");
    case PsiForm::Nested:
      return parse_core(
          "Exists y, x <= y ^ FULL(y) ^ ForAll z, ((z <= y ^ ~(y <= z)) -> "
          "((Exists u, z <= u ^ ~(u <= z) ^ ~FULL(u)) V (ForAll v, (z <= v ^ ~(v <= z)) -> P(v))))");
    case PsiForm::TwoVar:
      return parse_core(
          "Exists y, x <= y ^ FULL(y) ^ ForAll x, ((x <= y ^ ~(y <= x)) -> "
          "((Exists y, x <= y ^ ~(y <= x) ^ ~FULL(y)) V (ForAll y, (x <= y ^ ~(y <= x)) -> P(y))))");
  }
  throw Error("unknown psi form");
}

DapInstance dap_from_3sat(const Cnf& c) {
  check_cnf(c);
  if (c.clauses.empty()) throw Error("need at least one clause");
  Cnf p = c;
  int k = 0;
  while ((1 << k) < (int)p.clauses.size()) ++k;
  while ((int)p.clauses.size() < (1 << k)) {
    int a = ++p.nvars, b = ++p.nvars, d = ++p.nvars;
    p.clauses.push_back({a, b, d});
  }
  DapInstance out;
  out.k = k;
  out.padded_clauses = (int)p.clauses.size();
  Diagram& t = out.tree;
  t.kind = Kind::DT;
  t.dim = k + p.nvars;
  t.order = identity_order(t.dim);
  int ci = 0;
  std::function<int(int)> sel = [&](int level) -> int {
    if (level == k) return clause_tree(t, p.clauses[ci++], k);
    int lo = sel(level + 1), hi = sel(level + 1);
    return t.inner(level, lo, hi);
  };
  t.root = sel(0);
  out.u.assign(t.dim, Val::Dia);
  for (int i = 0; i < k; ++i) out.u[i] = Val::Bot;
  return out;
}

Perceptron perceptron_from_subset_sum(const std::vector<long long>& s, long long k) {
  if (s.empty()) throw Error("subset-sum instance needs at least one element");
  Perceptron p;
  for (long long x : s) {
    if (x < 0) throw Error("subset-sum elements must be natural numbers");
    p.w.push_back((double)x);
  }
  p.w.push_back(1);
  p.t = (double)k + 1;
  p.prot = {(int)s.size()};
  return p;
}

bool subset_sum(const std::vector<long long>& s, long long k) {
  if (k < 0) return false;
  std::set<long long> reach{0};
  for (long long x : s) {
    std::set<long long> nx = reach;
    for (long long r : reach)
      if (r + x <= k) nx.insert(r + x);
    reach.swap(nx);
  }
  return reach.count(k) > 0;
}

F biased_model_query(const Perceptron& p) {
  int n = (int)p.w.size();
  Inst u(n, Val::Bot), v(n, Val::Bot);
  std::vector<char> prot(n, 0);
  for (int i : p.prot) prot.at(i) = 1;
  for (int i = 0; i < n; ++i)
    if (!prot[i]) u[i] = Val::Zero, v[i] = Val::One;
  return mk_macro("BIASEDMODEL", {Term::konst(u), Term::konst(v)});
}

std::string random_query(int dim, int nvars, int size, uint64_t seed, bool universal) {
  if (dim < 1 || nvars < 1 || size < 1) throw Error("random_query needs dim, nvars and size ≥ 1");
  std::mt19937_64 g(seed);
  auto pick = [&](int n) { return (int)(g() % (uint64_t)n); };
  auto var = [&] { return "x" + std::to_string(1 + pick(nvars)); };
  auto konst = [&] {
    std::string s = "(";
    for (int i = 0; i < dim; ++i) s += (i ? "," : "") + std::string(1, "01?"[pick(3)]);
    return s + ")";
  };
  std::function<std::string(int)> gen = [&](int n) -> std::string {
    std::string e;
    if (n <= 1) {
      switch (pick(4)) {
        case 0: e = "P(" + var() + ")"; break;
        case 1: e = konst() + " <= " + var(); break;
        case 2: e = var() + " <= " + konst(); break;
        default: e = var() + " <= " + var(); break;
      }
    } else {
      int k = 1 + pick(n - 1);
      std::string a = gen(k), b = gen(n - k);
      e = "(" + a + (pick(2) ? " ^ " : " V ") + b + ")";
    }
    return pick(2) ? "~" + (n <= 1 ? "(" + e + ")" : e) : e;
  };
  std::string body = gen(size);
  std::string pre;
  for (int i = 1; i <= nvars; ++i) pre += (universal ? "ForAll x" : "Exists x") + std::to_string(i) + ", ";
  return pre + body;
}

Diagram random_tree(int dim, int leaves, uint64_t seed) {
  if (dim < 0 || leaves < 1) throw Error("random_tree needs dim ≥ 0 and leaves ≥ 1");
  if (dim < 62 && (long long)leaves > (1LL << dim))
    throw Error("a tree of dimension " + std::to_string(dim) + " has at most 2^" + std::to_string(dim) + " leaves");
  std::mt19937_64 g(seed);
  struct Grow {
    int var = -1, lo = -1, hi = -1, depth = 0, parent = -1;
  };
  std::vector<Grow> t(1);
  std::vector<int> open{0};  // leaves that can still split
  int nleaves = 1;
  auto path_vars = [&](int u) {
    std::vector<char> used(dim, 0);
    for (int p = t[u].parent; p >= 0; p = t[p].parent) used[t[p].var] = 1;
    return used;
  };
  while (nleaves < leaves) {
    if (open.empty()) throw Error("random_tree: no splittable leaf left");
    size_t pick = g() % open.size();
    int u = open[pick];
    std::vector<char> used = path_vars(u);
    std::vector<int> avail;
    for (int i = 0; i < dim; ++i)
      if (!used[i]) avail.push_back(i);
    if (avail.empty()) {
      open[pick] = open.back();
      open.pop_back();
      continue;
    }
    t[u].var = avail[g() % avail.size()];
    int lo = (int)t.size(), hi = lo + 1;
    t.push_back({-1, -1, -1, t[u].depth + 1, u});
    t.push_back({-1, -1, -1, t[u].depth + 1, u});
    t[u].lo = lo;
    t[u].hi = hi;
    open[pick] = lo;
    open.push_back(hi);
    ++nleaves;
  }
  Diagram d;
  d.kind = Kind::DT;
  d.dim = dim;
  std::function<int(int)> emit = [&](int u) -> int {
    if (t[u].var < 0) return d.leaf(g() % 2);
    int lo = emit(t[u].lo), hi = emit(t[u].hi);
    return d.inner(t[u].var, lo, hi);
  };
  d.root = emit(0);
  return d;
}

nlohmann::json BenchReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json j = {{"model", c.model}, {"query", c.query}, {"engine", c.engine}, {"seconds", c.seconds}};
    if (!c.label.empty()) j["label"] = c.label;
    if (c.answer) j["answer"] = *c.answer;
    if (!c.error.empty()) j["error"] = c.error;
    if (c.oracle_ok) j["oracle_ok"] = *c.oracle_ok;
    cs.push_back(j);
  }
  return {{"cells", cs},        {"mean_seconds", mean}, {"max_seconds", max},          {"stddev_seconds", stddev},
          {"completed", completed}, {"failed", failed},   {"oracle_mismatches", mismatches}};
}

std::string BenchReport::table() const {
  std::ostringstream o;
  o << std::left << std::setw(7) << "model" << std::setw(7) << "query" << std::setw(8) << "engine" << std::setw(8)
    << "answer" << std::setw(12) << "mean_s" << std::setw(12) << "max_s"
    << "note\n";
  for (const auto& c : cells) {
    double mx = 0, sum = 0;
    for (double s : c.seconds) mx = std::max(mx, s), sum += s;
    double mean_s = c.seconds.empty() ? 0 : sum / c.seconds.size();
    std::string note = c.label.empty() ? c.error : c.label + " " + c.error;
    if (c.oracle_ok) note += *c.oracle_ok ? "oracle ok" : "ORACLE MISMATCH";
    o << std::setw(7) << c.model << std::setw(7) << c.query << std::setw(8) << c.engine << std::setw(8)
      << (c.answer ? (*c.answer ? "YES" : "NO") : "-") << std::setw(12) << std::setprecision(6) << mean_s
      << std::setw(12) << mx << note << "\n";
  }
  o << "cells " << cells.size() << ", completed " << completed << ", failed " << failed << ", mean " << mean
    << " s, max " << max << " s, stddev " << stddev << " s";
  if (mismatches) o << ", ORACLE MISMATCHES " << mismatches;
  o << "\n";
  return o.str();
}

namespace {

BenchCell run_cell(const Model& m, const F& q, const BenchOptions& opt) {
  BenchCell c;
  c.engine = engine_name(opt.engine);
  try {
    for (int rep = 0; rep < std::max(1, opt.reps); ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      EvalResult e = evaluate(m, q, {}, opt.engine, opt.limits);
      auto t1 = std::chrono::steady_clock::now();
      c.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
      c.answer = e.value;
      c.engine = engine_name(e.used);
    }
  } catch (const Error& e) {
    c.error = e.what();
    c.answer.reset();
  }
  if (c.answer && opt.oracle) {
    try {
      NaiveOptions no;
      no.max_work = opt.limits.max_work;
      c.oracle_ok = eval_naive(m, q, {}, no) == *c.answer;
    } catch (const ResourceError&) {
    }
  }
  return c;
}

void aggregate(BenchReport& r) {
  std::vector<double> means;
  r.completed = r.failed = r.mismatches = 0;
  r.max = 0;
  for (const auto& c : r.cells) {
    if (c.oracle_ok && !*c.oracle_ok) ++r.mismatches;
    if (!c.answer) {
      ++r.failed;
      continue;
    }
    ++r.completed;
    double sum = 0;
    for (double s : c.seconds) sum += s, r.max = std::max(r.max, s);
    means.push_back(sum / c.seconds.size());
  }
  r.mean = r.stddev = 0;
  if (means.empty()) return;
  for (double m : means) r.mean += m;
  r.mean /= means.size();
  for (double m : means) r.stddev += (m - r.mean) * (m - r.mean);
  r.stddev = std::sqrt(r.stddev / means.size());
}

}  // namespace

BenchReport bench(const std::vector<Model>& models, const std::vector<F>& queries, const BenchOptions& opt) {
  BenchReport r;
  for (size_t mi = 0; mi < models.size(); ++mi)
    for (size_t qi = 0; qi < queries.size(); ++qi) {
      BenchCell c = run_cell(models[mi], queries[qi], opt);
      c.model = (int)mi;
      c.query = (int)qi;
      r.cells.push_back(std::move(c));
    }
  aggregate(r);
  return r;
}

std::string grid_query(const Grid& g, int dim, int q) {
  return random_query(dim, 1 + q % 4, 2 + q % 11, g.seed + q, q % 2 == 1);
}

BenchReport bench_grid(const Grid& g, const BenchOptions& opt) {
  BenchReport r;
  int mi = 0;
  for (int d : g.dims) {
    std::vector<F> qs;
    for (int q = 0; q < g.queries; ++q) qs.push_back(parse_core(grid_query(g, d, q)));
    for (int l : g.leaves) {
      Diagram t = random_tree(d, l, g.seed * 1000003 + (uint64_t)d * 7919 + l);
      for (int q = 0; q < g.queries; ++q) {
        BenchCell c = run_cell(t, qs[q], opt);
        c.model = mi;
        c.query = q;
        c.label = "dim=" + std::to_string(d) + " leaves=" + std::to_string(l);
        r.cells.push_back(std::move(c));
      }
      ++mi;
    }
  }
  aggregate(r);
  return r;
}

}  // namespace foil
