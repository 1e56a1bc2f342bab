#include "foil/instance.hpp"

#include <cctype>

namespace foil {

bool subsumes(const Inst& a, const Inst& b) {
  if (a.size() != b.size())
    throw Error("subsumption on instances of different dimension (" +
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != Val::Bot && a[i] != b[i]) return false;
  return true;
}

bool is_full(const Inst& a) {
  for (Val v : a)
    if (!defined(v)) return false;
  return true;
}

Inst all_bot(int n) { return Inst(n, Val::Bot); }

bool next_inst(Inst& e) {
  for (size_t i = e.size(); i-- > 0;) {
    if (e[i] == Val::Bot) { e[i] = Val::Zero; return true; }
    if (e[i] == Val::Zero) { e[i] = Val::One; return true; }
    e[i] = Val::Bot;
  }
  return false;
}

char val_char(Val v) {
  switch (v) {
    case Val::Zero: return '0';
    case Val::One: return '1';
    case Val::Bot: return '?';
    default: return '*';
  }
}

std::string to_string(const Inst& e) {
  std::string s = "(";
  for (size_t i = 0; i < e.size(); ++i) {
    if (i) s += ',';
    s += val_char(e[i]);
  }
  return s + ")";
}

Inst parse_inst(std::string_view s) {
  Inst e;
  size_t i = 0;
  auto skip = [&] { while (i < s.size() && std::isspace((unsigned char)s[i])) ++i; };
  skip();
  if (i >= s.size() || s[i] != '(') throw Error("instance must start with '('");
  ++i;
  for (;;) {
    skip();
    if (i >= s.size()) throw Error("unterminated instance");
    char c = s[i++];
    if (c == '0') e.push_back(Val::Zero);
    else if (c == '1') e.push_back(Val::One);
    else if (c == '?' || c == '_') e.push_back(Val::Bot);
    else if (c == '*') e.push_back(Val::Dia);
    else throw Error(std::string("bad instance component '") + c + "'");
    skip();
    if (i >= s.size()) throw Error("unterminated instance");
    if (s[i] == ')') { ++i; break; }
    if (s[i] != ',') throw Error("expected ',' in instance");
    ++i;
  }
  skip();
  if (i != s.size()) throw Error("trailing characters after instance");
  return e;
}

}  // namespace foil
