#pragma once

#include <array>
#include <functional>
#include <optional>

#include "foil/formula.hpp"
#include "foil/model.hpp"

namespace foil {

// Per-component allowed values of an undetermined component.
using Mask = std::vector<uint8_t>;
constexpr uint8_t kMaskBot = 1, kMask0 = 2, kMask1 = 4, kMaskAll = 7;
Mask mask_of_undetermined(const Inst& u);  // ◇ → {⊥,0,1}, others fixed

// Determinization oracles. Each returns a determinization within the masks
// whose completions are all positive (dap) or all negative (dan).
struct Oracles {
  std::function<std::optional<Inst>(const Mask&)> dap, dan;
  explicit operator bool() const { return dap && dan; }
};

Oracles perceptron_oracles(const Perceptron& p);

// Closed forms on undetermined instances (◇ = Dia).
std::optional<Inst> det_all_pos_perceptron(const Perceptron& p, const Inst& u);
std::optional<Inst> det_all_neg_perceptron(const Perceptron& p, const Inst& u);

struct ExistsStats {
  long long implicants = 0;
  long long mode_combos = 0;
  long long determinizations = 0;
  long long branches = 0;
};

// Existential/universal fragment over a free diagram.
bool eval_exists_fbdd(const Diagram& M, const F& f, const Binding& b = {}, ExistsStats* st = nullptr);
// Extended fragment with user-supplied oracles.
bool eval_exists_plus(const Model& m, const F& f, const Binding& b, const Oracles& o, ExistsStats* st = nullptr);
// Dispatch by model: perceptrons get the closed-form oracles, binary diagrams
// get none (extended atoms on variables then raise Unsupported). Diagrams
// need not be free; completion search tracks repeated labels.
bool eval_exists(const Model& m, const F& f, const Binding& b = {}, ExistsStats* st = nullptr);

// ---- the guess structures of the polynomial algorithm, exposed for tests ----

struct Type {
  bool full = false, pos = false, exists_pos = false, exists_neg = false;
  bool operator==(const Type&) const = default;
};
std::vector<Type> type_catalog(bool extended);

struct TypeAssignment {
  std::vector<Type> t;  // indexed like vars
};

struct ContainmentGuess {
  std::vector<std::vector<char>> P;  // P[i][j]: vars[i] ⊆ vars[j]
  std::vector<std::pair<int, int>> N() const;
};

std::vector<std::pair<TypeAssignment, ContainmentGuess>> enumerate_guesses(int nvars, bool extended);

struct Fact {
  int var, k;
  Val v;
  bool operator<(const Fact& o) const { return std::tie(var, k, v) < std::tie(o.var, o.k, o.v); }
  bool operator==(const Fact& o) const = default;
};
using FactSet = std::vector<Fact>;

// All propagation-closed fact sets witnessing every N pair, plus a ⊥ fact for
// every variable listed in nonfull. Contradictory sets are skipped.
std::vector<FactSet> guess_witnesses(const ContainmentGuess& g, const std::vector<int>& nonfull, int n);

// Determinizes every variable consistently with the guess, or returns absent.
// Step order follows a topological order of the collapsed guess graph with
// ties broken by variable index.
std::optional<std::vector<Inst>> determinize_dag(const Model& m, const TypeAssignment& tau,
                                                 const ContainmentGuess& g, const FactSet& facts,
                                                 const Oracles& o);

// ---- equivalence between PartialAllPos and DeterminizationAllPos ----

struct PapReduction {
  bool verdict_false = false;
  Inst u;
};
PapReduction reduce_pap_to_dap(const Inst& x, const Inst& y, const Inst& z);
std::array<Inst, 3> dap_to_pap(const Inst& u);

}  // namespace foil
