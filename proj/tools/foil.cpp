// foil: batch evaluation, interactive session, generators and benchmarks.
// Exit codes: 0 = YES (or success), 1 = NO, 2 = error.

#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "foil/eval.hpp"
#include "foil/formula.hpp"
#include "foil/hl.hpp"
#include "foil/model.hpp"
#include "foil/reductions.hpp"

using namespace foil;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw Error(path + ": malformed JSON: " + e.what());
  }
}

struct Answer {
  bool value = false;
  std::string engine;
  double seconds = 0;
  std::string warning;
};

struct Session {
  std::optional<json> raw;  // last loaded model file, re-read when a schema arrives
  std::optional<ModelFile> model;
  std::optional<RealTree> tree;
  std::optional<Schema> schema;
  Engine engine = Engine::Auto;
  Limits lim;

  void attach() {
    model.reset();
    tree.reset();
    if (!raw) return;
    if (schema) {
      if ((*raw).value("type", "") != "dt") throw Error("with a schema loaded the model must be a \"dt\" tree");
      RealTree t = real_tree_from_json(*raw, *schema);
      check_compatible(t, *schema);
      tree = std::move(t);
    } else {
      model = model_from_json(*raw);
    }
  }

  void load(const std::string& path) {
    json j = read_json(path);
    auto keep = raw;
    raw = std::move(j);
    try {
      attach();
    } catch (...) {
      raw = keep;
      attach();
      throw;
    }
  }

  void load_schema(const std::string& path) {
    Schema s = schema_from_json(read_json(path));
    auto keep = schema;
    schema = std::move(s);
    try {
      attach();
    } catch (...) {
      schema = keep;
      attach();
      throw;
    }
  }

  Answer query(const std::string& text) {
    if (!model && !tree) throw Error("no model loaded: use :load <file> (or --model) first");
    Answer a;
    auto t0 = std::chrono::steady_clock::now();
    if (tree) {
      H h = parse_hl(text, *schema);
      if (engine == Engine::Auto) {
        HLResult r = hl_eval(*tree, h, *schema, lim.max_work);
        a.value = r.value;
        a.engine = r.engine;
      } else {
        PartitionMap pm = partition_sets(*tree, h, *schema);
        if (pm.dim == 0) throw Unsupported("no binary slots: add a threshold or a Boolean feature");
        EvalResult r = evaluate(binarize_tree(*tree, pm, *schema), compile_hl_query(h, pm, *schema), {}, engine, lim);
        a.value = r.value;
        a.engine = engine_name(r.used);
      }
    } else {
      F f = parse_core(text);
      auto fv = free_vars(f);
      if (!fv.empty()) throw Error("query has free variable '" + *fv.begin() + "'; bind it with Exists or ForAll");
      int cd = const_dim(f), md = dim(model->model);
      if (cd != -1 && cd != md)
        throw Error("constants have dimension " + std::to_string(cd) + " but the model has " + std::to_string(md));
      EvalResult r = evaluate(model->model, f, {}, engine, lim);
      a.value = r.value;
      a.engine = engine_name(r.used);
      a.warning = r.warning;
    }
    a.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return a;
  }

  std::vector<std::string> features() const {
    std::vector<std::string> out;
    if (schema) {
      for (const auto& f : schema->features) out.push_back(f.name + (f.type == FType::Real ? " (real)" : " (bool)"));
    } else if (model) {
      int n = dim(model->model);
      for (int i = 0; i < n; ++i)
        out.push_back(i < (int)model->features.size() ? model->features[i] : "f" + std::to_string(i + 1));
    }
    return out;
  }

  std::vector<std::string> classes() const {
    if (schema) return {schema->classes[0] + " (0)", schema->classes[1] + " (1)"};
    if (model && model->classes.size() == 2) return {model->classes[0] + " (0)", model->classes[1] + " (1)"};
    return {"negative (0)", "positive (1)"};
  }
};

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void print_answer(const Answer& a, bool as_json) {
  if (as_json) {
    json j = {{"answer", a.value}, {"engine", a.engine}, {"seconds", a.seconds}};
    if (!a.warning.empty()) j["warning"] = a.warning;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << (a.value ? "YES" : "NO") << "\n";
    std::cout << "engine: " << a.engine << ", time: " << a.seconds << " s\n";
    if (!a.warning.empty()) std::cout << "note: " << a.warning << "\n";
  }
}

const char* kHelp =
    "commands:\n"
    "  :load <file>        load a model (JSON); a real-valued tree when a schema is loaded\n"
    "  :schema <file>      load a feature schema; queries then use the high-level syntax\n"
    "  :engine <name>      auto | exists | width | naive\n"
    "  :show features      list feature names\n"
    "  :show classes       list class names\n"
    "  :help, :quit\n"
    "anything else is evaluated as a query and answered YES or NO\n";

int run_repl(Session& s, bool as_json) {
  bool tty = isatty(STDIN_FILENO);
  std::string line;
  for (;;) {
    if (tty) std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.back() == ';') line = trim(line.substr(0, line.size() - 1));
    try {
      if (line[0] == ':') {
        std::istringstream in(line.substr(1));
        std::string cmd, arg;
        in >> cmd;
        std::getline(in, arg);
        arg = trim(arg);
        if (cmd == "quit" || cmd == "q" || cmd == "exit") break;
        if (cmd == "help") {
          std::cout << kHelp;
        } else if (cmd == "load") {
          if (arg.empty()) throw Error(":load needs a file name");
          s.load(arg);
          std::cout << "loaded " << arg << " (" << s.features().size() << " features)\n";
        } else if (cmd == "schema") {
          if (arg.empty()) throw Error(":schema needs a file name");
          s.load_schema(arg);
          std::cout << "schema " << arg << " (" << s.schema->features.size() << " features)\n";
        } else if (cmd == "engine") {
          s.engine = engine_from(arg);
          std::cout << "engine " << engine_name(s.engine) << "\n";
        } else if (cmd == "show" && arg == "features") {
          auto fs = s.features();
          if (fs.empty()) std::cout << "no model or schema loaded\n";
          for (size_t i = 0; i < fs.size(); ++i) std::cout << i + 1 << ": " << fs[i] << "\n";
        } else if (cmd == "show" && arg == "classes") {
          for (const auto& c : s.classes()) std::cout << c << "\n";
        } else {
          throw Error("unknown command ':" + cmd + (arg.empty() ? "" : " " + arg) + "' (try :help)");
        }
      } else {
        print_answer(s.query(line), as_json);
      }
    } catch (const std::exception& e) {
      // Parse errors carry line:col within the query line.
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

std::string query_text(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) return slurp(arg);
  return arg;
}

Cnf read_cnf(const std::string& path) { return parse_dimacs(path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : slurp(path)); }

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!trim(tok).empty()) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate first-order interpretability queries over Boolean classifiers"};
  app.set_version_flag("--version", "foil 1.0");

  std::string model_path, schema_path, query_arg, engine_s = "auto";
  long long max_work = -1;
  int max_width = 4096;
  bool as_json = false;
  uint64_t seed = 0;
  app.add_option("--model", model_path, "model file (JSON)");
  app.add_option("--schema", schema_path, "feature schema (JSON) for high-level queries");
  app.add_option("--query", query_arg, "query file, or the query text itself");
  app.add_option("--engine", engine_s, "auto | exists | width | naive");
  app.add_option("--max-work", max_work, "naive engine work cap (env FOIL_MAX_WORK)");
  app.add_option("--max-width", max_width, "width engine cap on nodes per level");
  app.add_flag("--json", as_json, "machine-readable output");
  app.add_option("--seed", seed, "default seed for gen and bench");

  auto* gen = app.add_subcommand("gen", "generate reduction instances and random inputs");
  gen->require_subcommand(1);

  std::string cnf_in, out_model, out_query, form_s = "nested";
  auto* g_cnf = gen->add_subcommand("cnf2tree", "3-CNF → (tree, closed query) whose answer is satisfiability");
  g_cnf->add_option("cnf", cnf_in, "DIMACS file ('-' for stdin)")->required();
  g_cnf->add_option("--form", form_s, "stable | nested | twovar");
  g_cnf->add_option("--model", out_model, "output model file")->required();
  g_cnf->add_option("--query", out_query, "output query file")->required();

  auto* g_dap = gen->add_subcommand("sat2dap", "3-CNF → (tree, undetermined instance) for DeterminizationAllPos");
  g_dap->add_option("cnf", cnf_in, "DIMACS file ('-' for stdin)")->required();
  g_dap->add_option("--model", out_model, "output model file")->required();

  std::string set_s;
  long long target = 0;
  auto* g_ss = gen->add_subcommand("ssum2ptron", "subset sum → (perceptron, BiasedModel query)");
  g_ss->add_option("--set", set_s, "comma-separated naturals")->required();
  g_ss->add_option("--k", target, "target sum")->required();
  g_ss->add_option("--model", out_model, "output model file")->required();
  g_ss->add_option("--query", out_query, "output query file")->required();

  int q_dim = 5, q_vars = 2, q_size = 5;
  bool q_univ = false;
  std::optional<uint64_t> sub_seed;
  auto* g_rq = gen->add_subcommand("random-query", "random ∃ (or ∀) query in the core syntax");
  g_rq->add_option("--dim", q_dim, "dimension of constants");
  g_rq->add_option("--vars", q_vars, "quantified variables");
  g_rq->add_option("--size", q_size, "number of atoms");
  g_rq->add_flag("--universal", q_univ, "∀ prefix instead of ∃");
  g_rq->add_option("--seed", sub_seed, "random seed");

  int t_dim = 10, t_leaves = 100;
  auto* g_rt = gen->add_subcommand("random-tree", "random free decision tree (JSON)");
  g_rt->add_option("--dim", t_dim, "number of features");
  g_rt->add_option("--leaves", t_leaves, "exact leaf count");
  g_rt->add_option("--seed", sub_seed, "random seed");
  g_rt->add_option("--model", out_model, "output file (default stdout)");

  auto* b = app.add_subcommand("bench", "time query evaluation over models");
  std::vector<std::string> b_models, b_queries;
  int reps = 5, b_nq = 60;
  std::string b_engine = "exists", b_dims, b_leaves, b_out;
  bool oracle = false;
  b->add_option("--model", b_models, "model files (default: random grid)");
  b->add_option("--query", b_queries, "query files or texts (default: random)");
  b->add_option("--reps", reps, "repetitions per cell");
  b->add_option("--engine", b_engine, "auto | exists | width | naive");
  b->add_flag("--oracle", oracle, "cross-check answers with naive evaluation");
  b->add_option("--seed", sub_seed, "random seed");
  b->add_option("--dims", b_dims, "grid dimensions, comma-separated");
  b->add_option("--leaves", b_leaves, "grid leaf counts, comma-separated");
  b->add_option("--queries", b_nq, "random queries per tree");
  b->add_option("--report", b_out, "write the JSON report to this file");
  b->add_flag("--json", as_json, "print the JSON report instead of the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Limits lim;
  lim.max_width = max_width;
  if (const char* env = std::getenv("FOIL_MAX_WORK")) {
    try {
      lim.max_work = std::stoll(env);
    } catch (...) {
      std::cerr << "error: FOIL_MAX_WORK must be an integer\n";
      return 2;
    }
  }
  if (max_work >= 0) lim.max_work = max_work;
  uint64_t rs = sub_seed.value_or(seed);

  try {
    if (g_cnf->parsed()) {
      Cnf c = read_cnf(cnf_in);
      PsiForm form = form_s == "stable" ? PsiForm::Stable
                     : form_s == "twovar" ? PsiForm::TwoVar
                     : form_s == "nested" ? PsiForm::Nested
                                          : throw Error("unknown form '" + form_s + "'");
      SatTree st = tree_from_3cnf(c);
      spit(out_model, model_to_json(Model(st.tree)).dump(1) + "\n");
      spit(out_query, to_string(substitute(psi_formula(form), {{"x", st.e}})) + "\n");
      std::cout << "dim " << st.tree.dim << ", clauses " << c.clauses.size() << ", variables " << c.nvars << "\n";
      if (c.nvars <= 24) std::cout << "satisfiable: " << (brute_sat(c) ? "yes" : "no") << "\n";
      return 0;
    }
    if (g_dap->parsed()) {
      DapInstance di = dap_from_3sat(read_cnf(cnf_in));
      spit(out_model, model_to_json(Model(di.tree)).dump(1) + "\n");
      json j = {{"u", to_string(di.u)}, {"k", di.k}, {"padded_clauses", di.padded_clauses}};
      std::cout << j.dump() << "\n";
      return 0;
    }
    if (g_ss->parsed()) {
      std::vector<long long> s;
      for (int v : parse_ints(set_s)) s.push_back(v);
      Perceptron p = perceptron_from_subset_sum(s, target);
      spit(out_model, model_to_json(Model(p)).dump(1) + "\n");
      spit(out_query, to_string(biased_model_query(p)) + "\n");
      std::cout << "subset sum: " << (subset_sum(s, target) ? "yes" : "no") << "\n";
      return 0;
    }
    if (g_rq->parsed()) {
      std::cout << random_query(q_dim, q_vars, q_size, rs, q_univ) << "\n";
      return 0;
    }
    if (g_rt->parsed()) {
      std::string out = model_to_json(Model(random_tree(t_dim, t_leaves, rs))).dump(1) + "\n";
      if (out_model.empty()) std::cout << out;
      else spit(out_model, out);
      return 0;
    }
    if (b->parsed()) {
      BenchOptions o;
      o.reps = reps;
      o.engine = engine_from(b_engine);
      o.oracle = oracle;
      o.limits = lim;
      BenchReport r;
      if (b_models.empty()) {
        if (!b_queries.empty()) throw Error("bench: --query needs --model (random queries are sized per tree)");
        Grid gr;
        gr.seed = rs;
        gr.queries = b_nq;
        if (!b_dims.empty()) gr.dims = parse_ints(b_dims);
        if (!b_leaves.empty()) gr.leaves = parse_ints(b_leaves);
        r = bench_grid(gr, o);
      } else {
        std::vector<Model> ms;
        for (const auto& p : b_models) ms.push_back(model_from_json(read_json(p)).model);
        std::vector<F> qs;
        for (const auto& q : b_queries) qs.push_back(parse_core(query_text(q)));
        if (qs.empty()) {
          int d = dim(ms[0]);
          for (const auto& m : ms)
            if (dim(m) != d) throw Error("bench: random queries need models of one dimension");
          Grid gr;
          gr.seed = rs;
          for (int q = 0; q < b_nq; ++q) qs.push_back(parse_core(grid_query(gr, d, q)));
        }
        r = bench(ms, qs, o);
      }
      if (!b_out.empty()) spit(b_out, r.to_json().dump(1) + "\n");
      if (as_json) std::cout << r.to_json().dump() << "\n";
      else std::cout << r.table();
      return r.mismatches ? 2 : 0;
    }

    Session s;
    s.lim = lim;
    s.engine = engine_from(engine_s);
    if (!schema_path.empty()) s.load_schema(schema_path);
    if (!model_path.empty()) s.load(model_path);
    if (query_arg.empty()) return run_repl(s, as_json);
    if (model_path.empty()) throw Error("--query needs --model");
    Answer a = s.query(trim(query_text(query_arg)));
    print_answer(a, as_json);
    return a.value ? 0 : 1;
  } catch (const std::exception& e) {
    if (as_json) std::cout << json{{"error", e.what()}}.dump() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
