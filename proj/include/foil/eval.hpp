#pragma once

#include <string>

#include "foil/formula.hpp"
#include "foil/model.hpp"

namespace foil {

enum class Engine { Auto, Exists, Width, Naive };

Engine engine_from(const std::string& name);  // throws Error on unknown names
const char* engine_name(Engine e);

struct Limits {
  long long max_work = 10'000'000;  // naive engine
  int max_width = 4096;             // width engine
};

struct EvalResult {
  bool value = false;
  Engine used = Engine::Naive;
  std::string warning;  // set when auto fell back to a slower engine
};

// Auto tries the existential engine, then the width engine, then naive.
EvalResult evaluate(const Model& m, const F& f, const Binding& b = {}, Engine e = Engine::Auto,
                    const Limits& lim = {});

}  // namespace foil
