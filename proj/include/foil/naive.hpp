#pragma once

#include "foil/formula.hpp"
#include "foil/model.hpp"

namespace foil {

struct NaiveOptions {
  long long max_work = 10'000'000;  // atom evaluations
};

struct NaiveStats {
  long long work = 0;
};

// Exhaustive evaluation over {0,1,⊥}^n. Quantifiers whose body pins the
// variable through a top-level guard (containment in a known term, Full, Pos,
// Match) only range over the guarded values; this never changes the answer.
bool eval_naive(const Model& m, const F& f, const Binding& b = {}, const NaiveOptions& opt = {},
                NaiveStats* stats = nullptr);

}  // namespace foil
