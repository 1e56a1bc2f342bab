#include "foil/hl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "foil/exists.hpp"
#include "foil/naive.hpp"

namespace foil {

using nlohmann::json;

int Schema::index(std::string_view name) const {
  for (size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return (int)i;
  return -1;
}

Schema schema_from_json(const json& j) {
  Schema s;
  try {
    for (const auto& f : j.at("features")) {
      std::string ty = f.at("type").get<std::string>();
      if (ty != "real" && ty != "bool") throw Error("feature type must be \"real\" or \"bool\", got \"" + ty + "\"");
      s.features.push_back({f.at("name").get<std::string>(), ty == "real" ? FType::Real : FType::Bool});
    }
    if (j.contains("classes")) s.classes = j["classes"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(std::string("schema: ") + e.what());
  }
  if (s.features.empty()) throw Error("schema: at least one feature is required");
  std::set<std::string> seen;
  for (const auto& f : s.features)
    if (!seen.insert(f.name).second) throw Error("schema: duplicate feature '" + f.name + "'");
  if (s.classes.size() != 2 || s.classes[0] == s.classes[1])
    throw Error("schema: classes must name two distinct classes (negative, positive)");
  for (const auto& c : s.classes)
    if (seen.count(c)) throw Error("schema: class name '" + c + "' clashes with a feature");
  return s;
}

json schema_to_json(const Schema& s) {
  json fs = json::array();
  for (const auto& f : s.features) fs.push_back({{"name", f.name}, {"type", f.type == FType::Real ? "real" : "bool"}});
  return {{"features", fs}, {"classes", s.classes}};
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file '" + path + "'");
  try {
    return schema_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error("schema file '" + path + "': " + e.what());
  }
}

int RealTree::leaf(bool v) {
  RNode n;
  n.leaf = true;
  n.value = v;
  nodes.push_back(n);
  return (int)nodes.size() - 1;
}

int RealTree::split(int feat, double tau, int lo, int hi) {
  nodes.push_back(RNode{feat, tau, lo, hi, false, false});
  return (int)nodes.size() - 1;
}

int RealTree::test(int feat, int lo, int hi) { return split(feat, 0, lo, hi); }

void check_compatible(const RealTree& t, const Schema& s) {
  int N = (int)t.nodes.size();
  if (t.root < 0 || t.root >= N) throw Error("tree root out of range");
  int nf = (int)s.features.size();
  std::vector<double> lo(nf, -INFINITY), hi(nf, INFINITY);
  std::vector<char> used(nf, 0), on_path(N, 0);
  std::function<void(int)> go = [&](int u) {
    if (u < 0 || u >= N) throw Error("tree child index out of range");
    const RNode& n = t.nodes[u];
    if (n.leaf) return;
    if (on_path[u]) throw Error("tree has a cycle through node " + std::to_string(u));
    if (n.feat < 0 || n.feat >= nf) throw Error("tree node " + std::to_string(u) + " tests an unknown feature");
    const auto& f = s.features[n.feat];
    on_path[u] = 1;
    if (f.type == FType::Real) {
      if (!std::isfinite(n.tau)) throw Error("tree node " + std::to_string(u) + " has a non-finite threshold");
      if (!(lo[n.feat] < n.tau && n.tau < hi[n.feat]))
        throw Error("tree node " + std::to_string(u) + ": threshold " + std::to_string(n.tau) + " on '" + f.name +
                    "' is outside the range left by its ancestors");
      double a = lo[n.feat], b = hi[n.feat];
      lo[n.feat] = n.tau;
      go(n.lo);
      lo[n.feat] = a;
      hi[n.feat] = n.tau;
      go(n.hi);
      hi[n.feat] = b;
    } else {
      if (used[n.feat]) throw Error("tree repeats Boolean feature '" + f.name + "' on a path");
      used[n.feat] = 1;
      go(n.lo);
      go(n.hi);
      used[n.feat] = 0;
    }
    on_path[u] = 0;
  };
  go(t.root);
}

bool classify(const RealTree& t, const Schema& s, const std::vector<double>& v) {
  int u = t.root;
  while (!t.nodes[u].leaf) {
    const RNode& n = t.nodes[u];
    bool take_hi = s.features[n.feat].type == FType::Real ? v[n.feat] <= n.tau : v[n.feat] != 0;
    u = take_hi ? n.hi : n.lo;
  }
  return t.nodes[u].value;
}

RealTree real_tree_from_json(const json& j, const Schema& s) {
  RealTree t;
  try {
    std::map<int, int> pos;
    const auto& ns = j.at("nodes");
    for (size_t i = 0; i < ns.size(); ++i) pos[ns[i].at("id").get<int>()] = (int)i;
    auto ref = [&](const json& x) {
      auto it = pos.find(x.get<int>());
      if (it == pos.end()) throw Error("tree references unknown node id " + std::to_string(x.get<int>()));
      return it->second;
    };
    for (const auto& n : ns) {
      RNode r;
      if (n.value("leaf", false)) {
        r.leaf = true;
        r.value = n.at("value").get<int>() != 0;
      } else {
        if (n.contains("feature")) {
          r.feat = s.index(n["feature"].get<std::string>());
          if (r.feat < 0) throw Error("tree uses unknown feature '" + n["feature"].get<std::string>() + "'");
        } else {
          r.feat = n.at("var").get<int>();
        }
        if (r.feat < 0 || r.feat >= (int)s.features.size())
          throw Error("tree node " + std::to_string(n.at("id").get<int>()) + " has feature index out of range");
        bool real = s.features[r.feat].type == FType::Real;
        if (real != n.contains("threshold"))
          throw Error("tree node " + std::to_string(n.at("id").get<int>()) +
                      (real ? ": real feature needs a threshold" : ": Boolean feature takes no threshold"));
        if (real) r.tau = n["threshold"].get<double>();
        r.lo = ref(n.at("lo"));
        r.hi = ref(n.at("hi"));
      }
      t.nodes.push_back(r);
    }
    t.root = ref(j.at("root"));
  } catch (const json::exception& e) {
    throw Error(std::string("tree: ") + e.what());
  }
  check_compatible(t, s);
  return t;
}

json real_tree_to_json(const RealTree& t, const Schema& s) {
  json ns = json::array();
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    const RNode& n = t.nodes[i];
    if (n.leaf) {
      ns.push_back({{"id", i}, {"leaf", true}, {"value", n.value ? 1 : 0}});
      continue;
    }
    json x = {{"id", i}, {"var", n.feat}, {"lo", n.lo}, {"hi", n.hi}};
    if (s.features[n.feat].type == FType::Real) x["threshold"] = n.tau;
    ns.push_back(x);
  }
  json fs = json::array();
  for (const auto& f : s.features) fs.push_back(f.name);
  return {{"type", "dt"}, {"dim", s.features.size()}, {"root", t.root}, {"nodes", ns}, {"features", fs},
          {"classes", s.classes}};
}

double HNode::cut() const { return strict ? std::nextafter(tau, -INFINITY) : tau; }

// ---------------------------------------------------------------------------
// HL parser

namespace {

H node(HOp op) { return std::make_shared<HNode>(HNode{op, {}, -1, 0, false, false, nullptr, nullptr}); }

H unary(HOp op, H a) {
  auto n = std::make_shared<HNode>(HNode{op, {}, -1, 0, false, false, std::move(a), nullptr});
  return n;
}

H binary(HOp op, H a, H b) {
  return std::make_shared<HNode>(HNode{op, {}, -1, 0, false, false, std::move(a), std::move(b)});
}

struct Tok {
  enum K { Id, Num, Sym, End } k;
  std::string s;
  int line, col;
};

const std::set<std::string>& hl_keywords() {
  static const std::set<std::string> k{"exists", "for", "every", "and", "or", "not", "implies",
                                       "iff",    "true", "false", "full"};
  return k;
}

class HLParser {
 public:
  HLParser(std::string_view text, const Schema& s) : s_(s) { lex(text); }

  H parse() {
    H f = formula();
    if (peek().k != Tok::End) fail("unexpected '" + peek().s + "'");
    return f;
  }

 private:
  const Schema& s_;
  std::vector<Tok> toks_;
  size_t p_ = 0;
  std::vector<std::string> scope_;

  [[noreturn]] void fail(const std::string& m, const Tok* t = nullptr) {
    const Tok& at = t ? *t : peek();
    throw ParseError(m, at.line, at.col);
  }

  void lex(std::string_view x) {
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t k) {
      for (size_t j = 0; j < k; ++j) {
        if (x[i] == '\n') ++line, col = 1;
        else ++col;
        ++i;
      }
    };
    while (i < x.size()) {
      char c = x[i];
      if (isspace((unsigned char)c)) {
        adv(1);
        continue;
      }
      if (c == '#') {
        while (i < x.size() && x[i] != '\n') adv(1);
        continue;
      }
      int l = line, cl = col;
      if (isalpha((unsigned char)c) || c == '_') {
        size_t j = i;
        while (j < x.size() && (isalnum((unsigned char)x[j]) || x[j] == '_')) ++j;
        toks_.push_back({Tok::Id, std::string(x.substr(i, j - i)), l, cl});
        adv(j - i);
        continue;
      }
      if (isdigit((unsigned char)c) || ((c == '-' || c == '+' || c == '.') && i + 1 < x.size() &&
                                        (isdigit((unsigned char)x[i + 1]) || x[i + 1] == '.'))) {
        size_t j = i + 1;
        while (j < x.size() && (isdigit((unsigned char)x[j]) || x[j] == '.' || x[j] == 'e' || x[j] == 'E' ||
                                ((x[j] == '-' || x[j] == '+') && (x[j - 1] == 'e' || x[j - 1] == 'E'))))
          ++j;
        toks_.push_back({Tok::Num, std::string(x.substr(i, j - i)), l, cl});
        adv(j - i);
        continue;
      }
      for (const char* op : {"<=", ">=", "!=", "<", ">", "=", "(", ")", ",", "."}) {
        size_t k = std::char_traits<char>::length(op);
        if (x.substr(i, k) == op) {
          toks_.push_back({Tok::Sym, op, l, cl});
          adv(k);
          goto next;
        }
      }
      throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
    next:;
    }
    toks_.push_back({Tok::End, "end of input", line, col});
  }

  const Tok& peek(size_t k = 0) const { return toks_[std::min(p_ + k, toks_.size() - 1)]; }
  bool is(const char* s, size_t k = 0) const { return peek(k).k != Tok::End && peek(k).k != Tok::Num && peek(k).s == s; }
  bool eat(const char* s) {
    if (!is(s)) return false;
    ++p_;
    return true;
  }
  void expect(const char* s) {
    if (!eat(s)) fail(std::string("expected '") + s + "', found '" + peek().s + "'");
  }

  std::string variable() {
    const Tok& t = peek();
    if (t.k != Tok::Id || hl_keywords().count(t.s)) fail("expected a variable name, found '" + t.s + "'");
    if (s_.index(t.s) >= 0 || std::find(s_.classes.begin(), s_.classes.end(), t.s) != s_.classes.end())
      fail("'" + t.s + "' names a feature or class and cannot be a variable");
    ++p_;
    return t.s;
  }

  std::string bound_var() {
    const Tok& t = peek();
    std::string v = variable();
    if (std::find(scope_.begin(), scope_.end(), v) == scope_.end()) fail("unbound variable '" + v + "'", &t);
    return v;
  }

  bool at_quant() const { return is("exists") || (is("for") && is("every", 1)); }

  H quant() {
    bool ex = eat("exists");
    if (!ex) {
      expect("for");
      expect("every");
    }
    std::string v = variable();
    expect(",");
    scope_.push_back(v);
    H body = formula();
    scope_.pop_back();
    auto n = std::make_shared<HNode>(HNode{ex ? HOp::Exists : HOp::Forall, v, -1, 0, false, false, body, nullptr});
    return n;
  }

  H formula() {
    if (at_quant()) return quant();
    H a = implication();
    while (eat("iff")) {
      H b = implication();
      a = binary(HOp::Or, binary(HOp::And, a, b), binary(HOp::And, unary(HOp::Not, a), unary(HOp::Not, b)));
    }
    return a;
  }

  H implication() {
    H a = disj();
    if (eat("implies")) {
      H b = at_quant() ? quant() : implication();
      return binary(HOp::Or, unary(HOp::Not, a), b);
    }
    return a;
  }

  H disj() {
    H a = conj();
    while (eat("or")) a = binary(HOp::Or, a, at_quant() ? quant() : conj());
    return a;
  }

  H conj() {
    H a = neg();
    while (eat("and")) a = binary(HOp::And, a, at_quant() ? quant() : neg());
    return a;
  }

  H neg() {
    if (eat("not")) return unary(HOp::Not, at_quant() ? quant() : neg());
    return primary();
  }

  double number() {
    const Tok& t = peek();
    if (t.k != Tok::Num) fail("expected a numeric threshold, found '" + t.s + "'");
    double v;
    auto [ptr, ec] = std::from_chars(t.s.data() + (t.s[0] == '+'), t.s.data() + t.s.size(), v);
    if (ec != std::errc() || ptr != t.s.data() + t.s.size() || !std::isfinite(v)) fail("malformed number '" + t.s + "'");
    ++p_;
    return v;
  }

  H primary() {
    if (eat("(")) {
      H f = formula();
      expect(")");
      return f;
    }
    if (eat("true")) return node(HOp::True);
    if (eat("false")) return node(HOp::False);
    const Tok& t = peek();
    if (t.k != Tok::Id) fail("expected an atom, found '" + t.s + "'");
    if (is("(", 1)) {
      bool full = t.s == "full";
      auto cls = std::find(s_.classes.begin(), s_.classes.end(), t.s);
      if (!full && cls == s_.classes.end()) fail("unknown class '" + t.s + "'");
      p_ += 2;
      std::string v = bound_var();
      expect(")");
      auto n = std::make_shared<HNode>(HNode{full ? HOp::Full : cls == s_.classes.begin() ? HOp::Neg : HOp::Pos, v, -1,
                                             0, false, false, nullptr, nullptr});
      return n;
    }
    std::string v = bound_var();
    expect(".");
    const Tok& ft = peek();
    if (ft.k != Tok::Id) fail("expected a feature name after '.'");
    int f = s_.index(ft.s);
    if (f < 0) fail("unknown feature '" + ft.s + "'");
    ++p_;
    auto n = std::make_shared<HNode>(HNode{HOp::Eq, v, f, 0, false, true, nullptr, nullptr});
    const Tok& opt = peek();
    bool real = s_.features[f].type == FType::Real;
    if (real) {
      std::string op = opt.s;
      if (opt.k != Tok::Sym || (op != "<=" && op != "<" && op != ">" && op != ">=")) {
        if (op == "=" || op == "!=") fail("real feature '" + ft.s + "' compares with <=, <, > or >=", &opt);
        fail("real feature '" + ft.s + "' needs a comparison", &opt);
      }
      ++p_;
      n->op = HOp::Le;
      n->tau = number();
      n->strict = op == "<" || op == ">=";
      if (op == ">" || op == ">=") return unary(HOp::Not, n);
      return n;
    }
    if (is("=") || is("!=")) {
      bool neq = is("!=");
      if (!neq && !is("=")) fail("unexpected");
      ++p_;
      if (eat("true")) n->b = true;
      else if (eat("false")) n->b = false;
      else if (peek().k == Tok::Num && (peek().s == "0" || peek().s == "1")) n->b = toks_[p_++].s == "1";
      else fail("Boolean feature '" + ft.s + "' compares with true or false");
      return neq ? unary(HOp::Not, n) : n;
    }
    if (opt.k == Tok::Sym && (opt.s == "<=" || opt.s == "<" || opt.s == ">" || opt.s == ">="))
      fail("threshold comparison on Boolean feature '" + ft.s + "'", &opt);
    return n;  // bare Boolean feature: = true
  }
};

std::string num(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

}  // namespace

H parse_hl(std::string_view text, const Schema& s) { return HLParser(text, s).parse(); }

std::string to_string(const H& f, const Schema& s) {
  switch (f->op) {
    case HOp::True: return "true";
    case HOp::False: return "false";
    case HOp::Pos: return s.classes[1] + "(" + f->var + ")";
    case HOp::Neg: return s.classes[0] + "(" + f->var + ")";
    case HOp::Full: return "full(" + f->var + ")";
    case HOp::Le: return f->var + "." + s.features[f->feat].name + (f->strict ? " < " : " <= ") + num(f->tau);
    case HOp::Eq: return f->var + "." + s.features[f->feat].name + " = " + (f->b ? "true" : "false");
    case HOp::Not: {
      const H& a = f->l;
      if (a->op == HOp::Le)
        return a->var + "." + s.features[a->feat].name + (a->strict ? " >= " : " > ") + num(a->tau);
      bool wrap = a->op == HOp::Exists || a->op == HOp::Forall || a->op == HOp::And || a->op == HOp::Or;
      return "not " + (wrap ? "(" + to_string(a, s) + ")" : to_string(a, s));
    }
    case HOp::And:
    case HOp::Or: {
      auto side = [&](const H& x) {
        bool wrap = x->op == HOp::Exists || x->op == HOp::Forall || ((x->op == HOp::And || x->op == HOp::Or) && x->op != f->op);
        return wrap ? "(" + to_string(x, s) + ")" : to_string(x, s);
      };
      return side(f->l) + (f->op == HOp::And ? " and " : " or ") + side(f->r);
    }
    case HOp::Exists: return "exists " + f->var + ", " + to_string(f->l, s);
    case HOp::Forall: return "for every " + f->var + ", " + to_string(f->l, s);
  }
  return "";
}

// ---------------------------------------------------------------------------
// Partitions and compilation

int PartitionMap::interval_of(int f, double v) const {
  const auto& p = P[f];
  return (int)(std::lower_bound(p.begin(), p.end(), v) - p.begin());
}

int PartitionMap::rank(int f, double tau) const {
  const auto& p = P[f];
  auto it = std::lower_bound(p.begin(), p.end(), tau);
  return it != p.end() && *it == tau ? (int)(it - p.begin()) + 1 : 0;
}

PartitionMap partition_sets(const RealTree& t, const H& f, const Schema& s) {
  int nf = (int)s.features.size();
  std::vector<std::set<double>> sets(nf);
  for (const RNode& n : t.nodes)
    if (!n.leaf && s.features[n.feat].type == FType::Real) sets[n.feat].insert(n.tau);
  std::function<void(const H&)> walk = [&](const H& g) {
    if (!g) return;
    if (g->op == HOp::Le) sets[g->feat].insert(g->cut());
    walk(g->l);
    walk(g->r);
  };
  walk(f);
  PartitionMap pm;
  pm.P.resize(nf);
  for (int i = 0; i < nf; ++i) {
    pm.P[i].assign(sets[i].begin(), sets[i].end());
    pm.offset.push_back(pm.dim);
    pm.width.push_back(s.features[i].type == FType::Real ? (int)pm.P[i].size() : 1);
    pm.dim += pm.width.back();
  }
  return pm;
}

Inst encode(const std::vector<int>& values, const PartitionMap& pm, const Schema& s) {
  Inst e(pm.dim, Val::Bot);
  for (size_t f = 0; f < s.features.size(); ++f) {
    int v = values[f], o = pm.offset[f], w = pm.width[f];
    if (v < 0) continue;
    if (s.features[f].type == FType::Bool) {
      e[o] = bit(v);
      continue;
    }
    for (int i = 0; i < w; ++i) e[o + i] = i == v ? Val::One : Val::Zero;
  }
  return e;
}

namespace {

class HLCompiler {
 public:
  HLCompiler(const PartitionMap& pm, const Schema& s) : pm_(pm), s_(s) {
    for (size_t f = 0; f < s.features.size(); ++f)
      if (s.features[f].type == FType::Real && pm.width[f] == 0) slotless_ = true;
  }

  F go(const H& f) {
    switch (f->op) {
      case HOp::True: return mk_true();
      case HOp::False: return mk_false();
      case HOp::Pos: return defined(f->var) ? mk_pos(V(f->var)) : mk_false();
      case HOp::Neg: return defined(f->var) ? mk_and(full(f->var), mk_not(mk_pos(V(f->var)))) : mk_false();
      case HOp::Full: return defined(f->var) ? full(f->var) : mk_false();
      case HOp::Le: {
        int r = pm_.rank(f->feat, f->cut());
        if (!r)
          throw Error("threshold " + num(f->cut()) + " on '" + s_.features[f->feat].name +
                      "' is missing from the partition; rebuild partitions from this query");
        Inst c(pm_.dim, Val::Bot);
        for (int i = 0; i < r; ++i) c[pm_.offset[f->feat] + i] = Val::Zero;
        return mk_not(mk_sub(Term::konst(c), V(f->var)));
      }
      case HOp::Eq: {
        Inst c(pm_.dim, Val::Bot);
        c[pm_.offset[f->feat]] = bit(f->b);
        return mk_sub(Term::konst(c), V(f->var));
      }
      case HOp::Not: {
        F a = go(f->l);
        return a->op == Op::Not ? a->a : mk_not(a);
      }
      case HOp::And: return mk_and(go(f->l), go(f->r));
      case HOp::Or: return mk_or(go(f->l), go(f->r));
      case HOp::Exists:
      case HOp::Forall: {
        bool ex = f->op == HOp::Exists;
        F body = cases(f->var, [&] { return go(f->l); }, ex);
        F g = guard(f->var);
        if (g->op == Op::True) return ex ? mk_exists(f->var, body) : mk_forall(f->var, body);
        return ex ? mk_exists(f->var, mk_and(g, body)) : mk_forall(f->var, mk_or(mk_not(g), body));
      }
    }
    throw Error("unreachable");
  }

 private:
  const PartitionMap& pm_;
  const Schema& s_;
  bool slotless_ = false;
  // Per variable: do the real features without slots hold a value? Only
  // tracked when such features exist, since they have no binary encoding.
  std::map<std::string, bool> def_;

  bool defined(const std::string& v) const {
    auto it = def_.find(v);
    return it == def_.end() || it->second;
  }

  F full(const std::string& v) { return mk_macro("FULL", {V(v)}); }

  F cases(const std::string& v, const std::function<F()>& body, bool ex) {
    auto it = def_.find(v);
    int saved = it == def_.end() ? -1 : it->second;
    auto restore = [&] {
      if (saved >= 0) def_[v] = saved;
      else def_.erase(v);
    };
    if (!slotless_) {
      def_.erase(v);
      F r = body();
      restore();
      return r;
    }
    def_[v] = true;
    F a = body();
    def_[v] = false;
    F b = body();
    restore();
    return ex ? mk_or(a, b) : mk_and(a, b);
  }

  F guard(const std::string& v) {
    std::vector<F> parts;
    for (size_t f = 0; f < s_.features.size(); ++f) {
      int w = pm_.width[f], o = pm_.offset[f];
      if (s_.features[f].type != FType::Real || w == 0) continue;
      std::vector<F> alts;
      Inst z(pm_.dim, Val::Bot), one(pm_.dim, Val::Bot);
      z[o] = Val::Zero;
      one[o] = Val::One;
      alts.push_back(mk_and(mk_not(mk_sub(Term::konst(z), V(v))), mk_not(mk_sub(Term::konst(one), V(v)))));
      for (int j = 0; j <= w; ++j) {
        Inst c(pm_.dim, Val::Bot);
        for (int i = 0; i < w; ++i) c[o + i] = i == j ? Val::One : Val::Zero;
        alts.push_back(mk_sub(Term::konst(c), V(v)));
      }
      parts.push_back(mk_or(alts));
    }
    return parts.empty() ? mk_true() : mk_and(parts);
  }
};

}  // namespace

F compile_hl_query(const H& f, const PartitionMap& pm, const Schema& s) { return HLCompiler(pm, s).go(f); }

Diagram binarize_tree(const RealTree& t, const PartitionMap& pm, const Schema& s) {
  Diagram d;
  d.kind = Kind::FBDD;
  d.dim = pm.dim;
  int leaves[2] = {d.leaf(false), d.leaf(true)};
  std::vector<int> memo(t.nodes.size(), -1);
  std::function<int(int)> go = [&](int u) -> int {
    if (memo[u] >= 0) return memo[u];
    const RNode& n = t.nodes[u];
    if (n.leaf) return memo[u] = leaves[n.value];
    int lo = go(n.lo), hi = go(n.hi), o = pm.offset[n.feat];
    if (s.features[n.feat].type == FType::Bool) return memo[u] = d.inner(o, lo, hi);
    // value ≤ τ_k iff one of the first k interval bits is set.
    int k = pm.rank(n.feat, n.tau);
    if (!k) throw Error("tree threshold " + num(n.tau) + " is missing from the partition");
    int g = lo;
    for (int i = k; i-- > 0;) g = d.inner(o + i, g, hi);
    return memo[u] = g;
  };
  d.root = go(t.root);
  return d;
}

HLResult hl_eval(const RealTree& t, const H& f, const Schema& s, long long naive_cap) {
  HLResult r;
  r.pm = partition_sets(t, f, s);
  if (r.pm.dim == 0) throw Unsupported("no binary slots: add a threshold or a Boolean feature");
  r.query = compile_hl_query(f, r.pm, s);
  r.model = binarize_tree(t, r.pm, s);
  Fragment fr = fragment_of(expand_plus(r.query));
  if (fr != Fragment::GeneralFOIL) {
    r.engine = "exists";
    r.value = eval_exists(r.model, r.query);
  } else {
    r.engine = "naive";
    NaiveOptions o;
    o.max_work = naive_cap;
    r.value = eval_naive(r.model, r.query, {}, o);
  }
  return r;
}

}  // namespace foil
