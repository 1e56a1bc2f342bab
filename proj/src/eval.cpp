#include "foil/eval.hpp"

#include "foil/exists.hpp"
#include "foil/naive.hpp"
#include "foil/width.hpp"

namespace foil {

Engine engine_from(const std::string& name) {
  if (name == "auto") return Engine::Auto;
  if (name == "exists") return Engine::Exists;
  if (name == "width") return Engine::Width;
  if (name == "naive") return Engine::Naive;
  throw Error("unknown engine '" + name + "' (expected auto, exists, width or naive)");
}

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::Auto: return "auto";
    case Engine::Exists: return "exists";
    case Engine::Width: return "width";
    case Engine::Naive: return "naive";
  }
  return "?";
}

namespace {

bool run(Engine e, const Model& m, const F& f, const Binding& b, const Limits& lim) {
  switch (e) {
    case Engine::Exists: return eval_exists(m, f, b);
    case Engine::Width: {
      WidthOptions o;
      o.max_width = lim.max_width;
      return eval_full_foil(m, f, b, o);
    }
    default: {
      NaiveOptions o;
      o.max_work = lim.max_work;
      return eval_naive(m, f, b, o);
    }
  }
}

bool width_applicable(const Model& m) {
  auto* d = std::get_if<Diagram>(&m);
  if (!d) return false;
  Report r = validate(*d);
  return r.is_ordered && r.is_complete;
}

}  // namespace

EvalResult evaluate(const Model& m, const F& f, const Binding& b, Engine e, const Limits& lim) {
  EvalResult r;
  if (e != Engine::Auto) {
    if (e == Engine::Width && !width_applicable(m))
      throw Unsupported("the width engine needs a complete ordered diagram (every path tests every feature in one order)");
    r.used = e;
    r.value = run(e, m, f, b, lim);
    return r;
  }
  std::string why;
  try {
    r.used = Engine::Exists;
    r.value = run(Engine::Exists, m, f, b, lim);
    return r;
  } catch (const Unsupported& u) {
    why = u.what();
  }
  if (width_applicable(m)) {
    try {
      r.used = Engine::Width;
      r.value = run(Engine::Width, m, f, b, lim);
      r.warning = "existential engine not applicable (" + why + "); used the width engine";
      return r;
    } catch (const Unsupported& u) {
      why += "; " + std::string(u.what());
    } catch (const ResourceError& x) {
      why += "; width engine: " + std::string(x.what());
    }
  }
  r.used = Engine::Naive;
  r.warning = "fast engines not applicable (" + why + "); fell back to naive evaluation";
  r.value = run(Engine::Naive, m, f, b, lim);
  return r;
}

}  // namespace foil
