#include "foil/model.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <unordered_set>

namespace foil {

using nlohmann::json;

int Diagram::leaf(bool v) {
  Node n;
  n.leaf = true;
  n.value = v;
  nodes.push_back(n);
  return (int)nodes.size() - 1;
}

int Diagram::inner(int var, int lo, int hi, int bot) {
  Node n;
  n.var = var;
  n.lo = lo;
  n.hi = hi;
  n.bot = bot;
  nodes.push_back(n);
  return (int)nodes.size() - 1;
}

int dim(const Model& m) {
  if (auto* d = std::get_if<Diagram>(&m)) return d->dim;
  return (int)std::get<Perceptron>(m).w.size();
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::DT: return "dt";
    case Kind::FBDD: return "fbdd";
    case Kind::OBDD: return "obdd";
    case Kind::COBDD: return "cobdd";
    case Kind::COTDD: return "cotdd";
  }
  return "?";
}

bool is_binary_diagram(const Diagram& d) { return d.kind != Kind::COTDD; }

static void check_dim(size_t got, int want) {
  if ((int)got != want)
    throw Error("instance of dimension " + std::to_string(got) + " given to model of dimension " +
                std::to_string(want));
}

bool classify(const Diagram& d, const Inst& e) {
  check_dim(e.size(), d.dim);
  bool ternary = d.kind == Kind::COTDD;
  if (!ternary && !is_full(e)) throw Error("binary model applied to a partial instance");
  int u = d.root;
  while (!d.nodes[u].leaf) {
    const Node& n = d.nodes[u];
    Val v = e[n.var];
    if (v == Val::One) u = n.hi;
    else if (v == Val::Zero) u = n.lo;
    else if (ternary) u = n.bot;
    else throw Error("binary model reached an undefined feature");
  }
  return d.nodes[u].value;
}

bool classify(const Perceptron& p, const Inst& e) {
  check_dim(e.size(), (int)p.w.size());
  if (!is_full(e)) throw Error("perceptron applied to a partial instance");
  double s = 0;
  for (size_t i = 0; i < e.size(); ++i) s += p.w[i] * bitval(e[i]);
  return s >= p.t;
}

bool classify(const Model& m, const Inst& e) {
  return std::visit([&](const auto& x) { return classify(x, e); }, m);
}

bool pos(const Model& m, const Inst& e) {
  if (auto* d = std::get_if<Diagram>(&m); d && d->kind == Kind::COTDD) return classify(*d, e);
  if (!is_full(e)) {
    check_dim(e.size(), dim(m));
    return false;
  }
  return classify(m, e);
}

// ---- validation ----

static std::vector<int> children(const Node& n) {
  std::vector<int> c;
  if (n.leaf) return c;
  c.push_back(n.lo);
  c.push_back(n.hi);
  if (n.bot >= 0) c.push_back(n.bot);
  return c;
}

// Reachable nodes in reverse topological order (children first); throws on
// dangling ids and cycles.
static std::vector<int> post_order(const Diagram& d) {
  int N = (int)d.nodes.size();
  if (d.root < 0 || d.root >= N) throw Error("root id does not name a node");
  std::vector<int> color(N, 0), out;
  std::vector<std::pair<int, int>> st{{d.root, 0}};
  color[d.root] = 1;
  while (!st.empty()) {
    auto& [u, k] = st.back();
    auto ch = children(d.nodes[u]);
    if (k < (int)ch.size()) {
      int v = ch[k++];
      if (v < 0 || v >= N) throw Error("dangling child id");
      if (color[v] == 1) throw Error("diagram contains a cycle");
      if (color[v] == 0) {
        color[v] = 1;
        st.push_back({v, 0});
      }
    } else {
      color[u] = 2;
      out.push_back(u);
      st.pop_back();
    }
  }
  return out;
}

Report validate(const Diagram& d) {
  Report r;
  auto po = post_order(d);
  int N = (int)d.nodes.size();
  r.per_label.assign(d.dim, 0);
  std::vector<int> indeg(N, 0);
  for (int u : po) {
    const Node& n = d.nodes[u];
    if (n.leaf) continue;
    if (n.var < 0 || n.var >= d.dim) throw Error("node label out of range");
    if (d.kind == Kind::COTDD && n.bot < 0) throw Error("ternary node without a bot child");
    r.per_label[n.var]++;
    for (int v : children(n)) indeg[v]++;
  }
  r.width = r.per_label.empty() ? 0 : *std::max_element(r.per_label.begin(), r.per_label.end());
  r.is_tree = std::all_of(po.begin(), po.end(), [&](int u) { return indeg[u] <= 1; });

  // Vars occurring below (and at) each node.
  int W = (d.dim + 63) / 64;
  std::vector<std::vector<uint64_t>> vars(N, std::vector<uint64_t>(W, 0));
  r.is_free = true;
  for (int u : po) {
    const Node& n = d.nodes[u];
    if (n.leaf) continue;
    for (int v : children(n))
      for (int w = 0; w < W; ++w) vars[u][w] |= vars[v][w];
    if (vars[u][n.var / 64] >> (n.var % 64) & 1) r.is_free = false;
    vars[u][n.var / 64] |= uint64_t(1) << (n.var % 64);
  }

  std::vector<int> rank(d.dim, -1);
  if (!d.order.empty()) {
    if ((int)d.order.size() != d.dim) throw Error("order is not a permutation of the features");
    for (int i = 0; i < d.dim; ++i) {
      int f = d.order[i];
      if (f < 0 || f >= d.dim || rank[f] >= 0) throw Error("order is not a permutation of the features");
      rank[f] = i;
    }
    r.is_ordered = true;
    for (int u : po) {
      const Node& n = d.nodes[u];
      if (n.leaf) continue;
      for (int v : children(n))
        if (!d.nodes[v].leaf && rank[d.nodes[v].var] <= rank[n.var]) r.is_ordered = false;
    }
  } else if (r.is_free) {
    // Ordered iff the label precedence graph is acyclic.
    std::vector<std::vector<int>> g(d.dim);
    for (int u : po) {
      const Node& n = d.nodes[u];
      if (n.leaf) continue;
      for (int v : children(n))
        if (!d.nodes[v].leaf) g[n.var].push_back(d.nodes[v].var);
    }
    std::vector<int> indg(d.dim, 0), q;
    for (auto& a : g)
      for (int b : a) indg[b]++;
    for (int i = 0; i < d.dim; ++i)
      if (!indg[i]) q.push_back(i);
    int seen = 0;
    std::vector<int> topo;
    while (!q.empty()) {
      int a = q.back();
      q.pop_back();
      topo.push_back(a);
      ++seen;
      for (int b : g[a])
        if (--indg[b] == 0) q.push_back(b);
    }
    r.is_ordered = seen == d.dim;
    if (r.is_ordered)
      for (int i = 0; i < d.dim; ++i) rank[topo[i]] = i;
  }

  // Complete: every path tests every feature once, in order.
  if (r.is_ordered && r.is_free) {
    // Path lengths: all must equal dim.
    std::vector<int> mn(N, 0), mx(N, 0);
    for (int u : po) {
      const Node& n = d.nodes[u];
      if (n.leaf) continue;
      int a = 1 << 30, b = -1;
      for (int v : children(n)) {
        a = std::min(a, mn[v]);
        b = std::max(b, mx[v]);
      }
      mn[u] = a + 1;
      mx[u] = b + 1;
    }
    r.is_complete = mn[d.root] == d.dim && mx[d.root] == d.dim;
    if (r.is_complete && !d.order.empty()) {
      const Node& n = d.nodes[d.root];
      r.is_complete = n.leaf ? d.dim == 0 : rank[n.var] == 0;
    }
  }
  return r;
}

// ---- completion search ----

Dom dom_of(const Inst& e) {
  Dom d(e.size());
  for (size_t i = 0; i < e.size(); ++i)
    d[i] = e[i] == Val::Zero ? kAllow0 : e[i] == Val::One ? kAllow1 : (kAllow0 | kAllow1);
  return d;
}

CompletionSearch::CompletionSearch(const Model& m) : m_(m) {
  auto* d = std::get_if<Diagram>(&m);
  if (!d) return;
  if (d->kind == Kind::COTDD) throw Unsupported("completion search needs a binary model");
  Report r = validate(*d);
  free_ = r.is_free;
  if (free_) return;
  auto po = post_order(*d);
  below_.assign(d->nodes.size(), {});
  for (int u : po) {
    const Node& n = d->nodes[u];
    if (n.leaf) continue;
    std::vector<int> s{n.var};
    for (int v : children(n)) s.insert(s.end(), below_[v].begin(), below_[v].end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    below_[u] = std::move(s);
  }
}

static std::optional<Inst> fill(const Dom& dom, const std::vector<int8_t>& asg) {
  Inst e(dom.size());
  for (size_t i = 0; i < dom.size(); ++i) {
    if (asg[i] >= 0) e[i] = bit(asg[i]);
    else if (dom[i] & kAllow0) e[i] = Val::Zero;
    else e[i] = Val::One;
  }
  return e;
}

std::optional<Inst> CompletionSearch::find(const Dom& dom, bool target) const {
  for (uint8_t x : dom)
    if (!x) return std::nullopt;
  if (auto* p = std::get_if<Perceptron>(&m_)) {
    check_dim(dom.size(), (int)p->w.size());
    // Greedy per component: maximise the score for a positive target,
    // minimise it for a negative one.
    Inst e(dom.size());
    double s = 0;
    for (size_t i = 0; i < dom.size(); ++i) {
      double w = target ? p->w[i] : -p->w[i];
      int b;
      if (dom[i] == kAllow0) b = 0;
      else if (dom[i] == kAllow1) b = 1;
      else b = w > 0 ? 1 : 0;
      e[i] = bit(b);
      s += p->w[i] * b;
    }
    if ((s >= p->t) == target) return e;
    return std::nullopt;
  }
  const Diagram& d = std::get<Diagram>(m_);
  check_dim(dom.size(), d.dim);
  std::vector<int8_t> asg(d.dim, -1);
  std::vector<char> dead(free_ ? d.nodes.size() : 0, 0);
  std::unordered_set<std::string> dead_keys;
  auto key = [&](int u) {
    std::string k = std::to_string(u) + ':';
    for (int v : below_[u]) k += char('a' + asg[v] + 1);
    return k;
  };
  std::function<bool(int)> dfs = [&](int u) -> bool {
    const Node& n = d.nodes[u];
    if (n.leaf) return n.value == target;
    std::string k;
    if (free_) {
      if (dead[u]) return false;
    } else {
      k = key(u);
      if (dead_keys.count(k)) return false;
    }
    bool ok = false;
    if (asg[n.var] >= 0) {
      ok = dfs(asg[n.var] ? n.hi : n.lo);
    } else {
      for (int b = 0; b < 2 && !ok; ++b) {
        if (!(dom[n.var] & (1 << b))) continue;
        asg[n.var] = (int8_t)b;
        ok = dfs(b ? n.hi : n.lo);
        if (!ok) asg[n.var] = -1;
      }
    }
    if (!ok) {
      if (free_) dead[u] = 1;
      else dead_keys.insert(k);
    }
    return ok;
  };
  if (!dfs(d.root)) return std::nullopt;
  return fill(dom, asg);
}

std::optional<Inst> positive_completion(const Diagram& d, const Inst& e) {
  Model m = d;
  CompletionSearch cs(m);
  return cs.find(dom_of(e), true);
}

Diagram constant_diagram(int dim, bool v, Kind k) {
  Diagram d;
  d.kind = k;
  d.dim = dim;
  d.root = d.leaf(v);
  if (k == Kind::OBDD || k == Kind::COBDD || k == Kind::COTDD)
    for (int i = 0; i < dim; ++i) d.order.push_back(i);
  return d;
}

// ---- JSON ----

static Kind kind_from(const std::string& s) {
  if (s == "dt") return Kind::DT;
  if (s == "fbdd") return Kind::FBDD;
  if (s == "obdd") return Kind::OBDD;
  if (s == "cobdd") return Kind::COBDD;
  if (s == "cotdd") return Kind::COTDD;
  throw Error("unknown model type '" + s + "'");
}

ModelFile model_from_json(const json& j) {
  ModelFile mf;
  try {
    std::string type = j.at("type").get<std::string>();
    if (j.contains("features")) mf.features = j["features"].get<std::vector<std::string>>();
    if (j.contains("classes")) mf.classes = j["classes"].get<std::vector<std::string>>();
    if (type == "perceptron") {
      Perceptron p;
      p.w = j.at("weights").get<std::vector<double>>();
      p.t = j.at("threshold").get<double>();
      if (j.contains("protected")) p.prot = j["protected"].get<std::vector<int>>();
      if (j.contains("dim") && j["dim"].get<int>() != (int)p.w.size())
        throw Error("perceptron dim disagrees with weight count");
      if (p.w.empty()) throw Error("perceptron needs at least one weight");
      for (int i : p.prot)
        if (i < 0 || i >= (int)p.w.size()) throw Error("protected feature out of range");
      mf.model = std::move(p);
    } else {
      Diagram d;
      d.kind = kind_from(type);
      d.dim = j.at("dim").get<int>();
      if (d.dim < 1) throw Error("dimension must be at least 1");
      if (j.contains("order")) d.order = j["order"].get<std::vector<int>>();
      std::map<long long, int> idx;
      const auto& ns = j.at("nodes");
      for (const auto& n : ns) {
        long long id = n.at("id").get<long long>();
        if (!idx.emplace(id, (int)idx.size()).second) throw Error("duplicate node id " + std::to_string(id));
      }
      auto ref = [&](const json& v) {
        auto it = idx.find(v.get<long long>());
        if (it == idx.end()) throw Error("dangling child id " + v.dump());
        return it->second;
      };
      d.nodes.resize(ns.size());
      for (const auto& n : ns) {
        Node& x = d.nodes[idx[n.at("id").get<long long>()]];
        if (n.value("leaf", false)) {
          x.leaf = true;
          x.value = n.at("value").get<int>() != 0;
        } else {
          x.var = n.at("var").get<int>();
          if (x.var < 0 || x.var >= d.dim) throw Error("node var out of range");
          x.lo = ref(n.at("lo"));
          x.hi = ref(n.at("hi"));
          if (n.contains("bot")) x.bot = ref(n["bot"]);
        }
      }
      d.root = ref(j.at("root"));
      validate(d);  // cycles, dangling ids, malformed order
      mf.model = std::move(d);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model JSON: ") + e.what());
  }
  if (!mf.features.empty() && (int)mf.features.size() != dim(mf.model))
    throw Error("feature name count disagrees with dimension");
  return mf;
}

json model_to_json(const Model& m) {
  json j;
  if (auto* p = std::get_if<Perceptron>(&m)) {
    j["type"] = "perceptron";
    j["dim"] = p->w.size();
    j["weights"] = p->w;
    j["threshold"] = p->t;
    if (!p->prot.empty()) j["protected"] = p->prot;
    return j;
  }
  const Diagram& d = std::get<Diagram>(m);
  j["type"] = kind_name(d.kind);
  j["dim"] = d.dim;
  if (!d.order.empty()) j["order"] = d.order;
  j["root"] = d.root;
  json ns = json::array();
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    const Node& n = d.nodes[i];
    if (n.leaf) {
      ns.push_back({{"id", i}, {"leaf", true}, {"value", n.value ? 1 : 0}});
    } else {
      json x = {{"id", i}, {"var", n.var}, {"lo", n.lo}, {"hi", n.hi}};
      if (n.bot >= 0) x["bot"] = n.bot;
      ns.push_back(x);
    }
  }
  j["nodes"] = ns;
  return j;
}

json model_to_json(const ModelFile& mf) {
  json j = model_to_json(mf.model);
  if (!mf.features.empty()) j["features"] = mf.features;
  if (!mf.classes.empty()) j["classes"] = mf.classes;
  return j;
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed JSON in '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace foil
