#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foil {

// Enumeration order of the naive engine is Bot < Zero < One.
enum class Val : uint8_t { Bot = 0, Zero = 1, One = 2, Dia = 3 };

using Inst = std::vector<Val>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an engine would exceed a configured work/size cap.
struct ResourceError : Error {
  using Error::Error;
};

// Raised when an engine's preconditions do not hold for the input.
struct Unsupported : Error {
  using Error::Error;
};

inline Val bit(int b) { return b ? Val::One : Val::Zero; }
inline bool defined(Val v) { return v == Val::Zero || v == Val::One; }
inline int bitval(Val v) { return v == Val::One ? 1 : 0; }

// a ⊆ b: every defined component of a agrees with b.
bool subsumes(const Inst& a, const Inst& b);
bool is_full(const Inst& a);

Inst all_bot(int n);
// Next instance in lexicographic Bot<Zero<One order; false after the last.
bool next_inst(Inst& e);

// "(0,1,?,*)": ? is Bot, * is Dia.
std::string to_string(const Inst& e);
Inst parse_inst(std::string_view s);
char val_char(Val v);

}  // namespace foil
