#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "foil/instance.hpp"

namespace foil {

// A term is a variable name or a partial-instance constant.
struct Term {
  bool is_const = false;
  std::string name;
  Inst c;

  static Term var(std::string n) { return Term{false, std::move(n), {}}; }
  static Term konst(Inst e) { return Term{true, {}, std::move(e)}; }
  bool operator==(const Term& o) const = default;
  bool operator<(const Term& o) const {
    if (is_const != o.is_const) return is_const < o.is_const;
    return is_const ? c < o.c : name < o.name;
  }
};

enum class Op { Pos, Sub, Eq, Full, AllPos, AllNeg, Macro, Not, And, Or, Exists, Forall, True, False };

struct Formula;
using F = std::shared_ptr<const Formula>;

struct Formula {
  Op op;
  std::vector<Term> t;  // atom / macro arguments
  std::string name;     // bound variable, or macro keyword (upper case)
  F a, b;
  int line = 0, col = 0;
};

// Builders.
F mk_pos(Term x);
F mk_sub(Term x, Term y);
F mk_eq(Term x, Term y);
F mk_full(Term x);
F mk_allpos(Term x);
F mk_allneg(Term x);
F mk_macro(std::string name, std::vector<Term> args);
F mk_not(F a);
F mk_and(F a, F b);
F mk_or(F a, F b);
F mk_implies(F a, F b);
F mk_iff(F a, F b);
F mk_exists(std::string v, F a);
F mk_forall(std::string v, F a);
F mk_true();
F mk_false();
F mk_and(const std::vector<F>& fs);
F mk_or(const std::vector<F>& fs);
inline Term V(std::string n) { return Term::var(std::move(n)); }

bool is_atom(Op op);
bool is_quant(Op op);

struct ParseError : Error {
  int line, col;
  ParseError(const std::string& msg, int l, int c)
      : Error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), col(c) {}
};

F parse_core(std::string_view text);
std::string to_string(const F& f);
std::string to_string(const Term& t);

bool same(const F& a, const F& b);  // structural equality, positions ignored

std::set<std::string> free_vars(const F& f);
std::set<std::string> all_names(const F& f);
int const_dim(const F& f);  // -1 when the formula has no constants
int quantifier_count(const F& f);

using Binding = std::map<std::string, Inst>;
F substitute(const F& f, const Binding& b);

// Macro keywords, upper-case, with arities.
const std::map<std::string, int>& macro_arities();
bool is_macro_keyword(std::string_view upper);

// Full rewrite into {Pos, ⊆, =}.
F expand_macros(const F& f);
// Rewrite into the extended vocabulary {Pos, ⊆, =, Full, AllPos, AllNeg}
// using the existential-friendly definitions.
F expand_plus(const F& f);
// Like expand_plus but leaves the named macros in place (for evaluators with
// closed forms for them).
F expand_keeping(const F& f, const std::set<std::string>& keep);

enum class Fragment { ExistsFOIL, ForallFOIL, ExistsFOILPlus, ForallFOILPlus, GeneralFOIL };
const char* fragment_name(Fragment fr);
Fragment fragment_of(const F& f);
bool has_extended(const F& f);

// Negation normal form: negations only on atoms.
F nnf(const F& f);
F negate_dual(const F& f);

struct Block {
  bool exists;
  std::vector<std::string> vars;
};

struct PrenexForm {
  std::vector<Block> blocks;
  F matrix;
};

// Bound variables are renamed apart, prefixes of conjuncts and disjuncts are
// merged to keep the number of blocks small, and equality atoms become
// double containment. strict pads with dummy variables until every block has
// one variable and the prefix starts with an existential.
PrenexForm prenex(const F& f, bool strict = false);
F to_prenex(const F& f, bool strict = false);
F from_prenex(const PrenexForm& p);

}  // namespace foil
