#pragma once

#include <array>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "foil/eval.hpp"
#include "foil/formula.hpp"
#include "foil/model.hpp"

namespace foil {

// Literals are ±(variable index), variables 1..nvars.
struct Cnf {
  int nvars = 0;
  std::vector<std::array<int, 3>> clauses;
};

// Throws Error on out-of-range, repeated or complementary literals.
void check_cnf(const Cnf& c);
// Clauses of any length: tautologies dropped, duplicates merged, short
// clauses padded with fresh variables in every sign combination, long ones
// split along a chain of fresh variables. Satisfiability is preserved.
Cnf to_3cnf(int nvars, const std::vector<std::vector<int>>& clauses);
bool brute_sat(const Cnf& c);
Cnf parse_dimacs(const std::string& text);
std::string to_dimacs(const Cnf& c);

enum class PsiForm { Stable, Nested, TwoVar };

struct SatTree {
  Diagram tree;  // ordered tree over 1 < 2 < … (clause selectors, then variables)
  Inst e;        // 1 on clause selectors, ⊥ on variables
};

// T_φ: the chain over clause selectors, with the clause tree hanging off each
// 0-edge. ψ(e) holds over it iff the formula is satisfiable.
SatTree tree_from_3cnf(const Cnf& c);
// ψ(x) with x free: the Stable form, or the nested quantifier form (also in a
// two-variable rendering).
F psi_formula(PsiForm form);

struct DapInstance {
  Diagram tree;
  Inst u;  // ⊥ on selector features, ◇ on variables
  int k = 0;
  int padded_clauses = 0;
};

// Pads the clause count to a power of two with clauses over fresh variables.
DapInstance dap_from_3sat(const Cnf& c);

// Weights (s…, 1), threshold k+1, last feature protected.
Perceptron perceptron_from_subset_sum(const std::vector<long long>& s, long long k);
bool subset_sum(const std::vector<long long>& s, long long k);
// BiasedModel over the non-protected features of p, as a closed formula.
F biased_model_query(const Perceptron& p);

std::string random_query(int dim, int nvars, int size, uint64_t seed, bool universal = false);
Diagram random_tree(int dim, int leaves, uint64_t seed);

struct BenchCell {
  int model = 0, query = 0;
  std::string engine;
  std::vector<double> seconds;
  std::optional<bool> answer;
  std::string error;
  std::optional<bool> oracle_ok;  // set when the oracle ran
  std::string label;              // model description, grid runs only
};

struct BenchReport {
  std::vector<BenchCell> cells;
  double mean = 0, max = 0, stddev = 0;  // over per-cell mean times
  int completed = 0, failed = 0, mismatches = 0;

  nlohmann::json to_json() const;
  std::string table() const;
};

struct BenchOptions {
  int reps = 5;
  Engine engine = Engine::Exists;
  bool oracle = false;
  Limits limits;
};

BenchReport bench(const std::vector<Model>& models, const std::vector<F>& queries, const BenchOptions& opt);

// Random trees over dims × leaves, each paired with `queries` random queries
// (1-4 variables cycled, sizes 2-12, alternating ∃/∀ prefix) whose constants
// match the tree's dimension. Query q uses seed + q at every dimension.
struct Grid {
  std::vector<int> dims{10, 50, 100, 150, 200, 250, 300, 350};
  std::vector<int> leaves{100, 500, 1000};
  int queries = 60;
  uint64_t seed = 0;
};

std::string grid_query(const Grid& g, int dim, int q);
BenchReport bench_grid(const Grid& g, const BenchOptions& opt);

}  // namespace foil
