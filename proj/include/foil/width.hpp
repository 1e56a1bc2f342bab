#pragma once

#include <set>

#include "foil/formula.hpp"
#include "foil/model.hpp"

namespace foil {

struct WidthOptions {
  int max_width = 4096;
  long long max_nodes = 1'000'000;
  // Project each quantifier right where it binds instead of prenexing first.
  bool scoped = false;
};

// Per-level node counts of the complete (padded) form of each operand.
struct ApplyRecord {
  std::vector<int> in1, in2, out;
};
struct ProjectRecord {
  int in_width = 0, out_width = 0;
};

struct WidthStats {
  std::vector<ApplyRecord> applies;
  std::vector<ProjectRecord> projects;
  int model_width = 0;
  int matrix_width = 0;
  int connectives = 0;
  int slots = 0;
  int peak_width = 0;
  long long peak_nodes = 0;

  // count_j(op) ≤ count_j(M1) + count_j(M2) on every apply. Does not hold in
  // general; reported, not assumed.
  bool sum_claim_holds() const;
  // count_j(op) ≤ count_j(M1) · count_j(M2): always holds for the pair construction.
  bool product_bound_holds() const;
  // width(∃_S M) ≤ 2^width(M) on every projection.
  bool project_bound_holds() const;
};

// Feature index per level: π(1), π(1)+n, …, π(1)+(q−1)n, π(2), …
std::vector<int> interleaved_order(const std::vector<int>& pi, int q);
// Label order of an ordered diagram (its `order` when set). Throws Unsupported
// when two paths disagree.
std::vector<int> derive_order(const Diagram& d);

enum class BoolOp { And, Or };
enum class Quant { Exists, Forall };

// Results are complete ordered diagrams: every root-leaf path tests every label
// once, in order.
Diagram tdd_negate(const Diagram& m);
Diagram tdd_apply(BoolOp op, const Diagram& a, const Diagram& b, ApplyRecord* rec = nullptr);
Diagram bdd_to_tdd(const Diagram& m);
// Features in S disappear; the remaining ones are renumbered in index order.
Diagram tdd_project(const Diagram& m, const std::set<int>& S, Quant q, ProjectRecord* rec = nullptr);
// Slots are 1-indexed; slot s holds features (s−1)n … sn−1.
Diagram lift_model(const Diagram& m, int slot, int q);
Diagram containment_gadget(int i, int j, int n, int q, const std::vector<int>& pi);
// psi quantifier-free over the named slot variables (in slot order).
Diagram compile_matrix(const Diagram& m, const F& psi, const std::vector<std::string>& slots);

// Full FOIL over ordered diagrams. Constants (including bound free variables)
// take the first slots, quantified variables the rest.
bool eval_full_foil(const Model& m, const F& f, const Binding& b = {}, const WidthOptions& opt = {},
                    WidthStats* stats = nullptr);

}  // namespace foil
