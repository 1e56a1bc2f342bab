#include <cctype>

#include "foil/formula.hpp"

namespace foil {

namespace {

enum class Tok { Ident, Const, LParen, RParen, Comma, Not, And, Or, Sub, Eq, Imp, Iff, End };

struct Token {
  Tok kind;
  std::string text;
  Inst c;
  int line, col;
};

std::string upper(std::string_view s) {
  std::string u(s);
  for (char& ch : u) ch = (char)std::toupper((unsigned char)ch);
  return u;
}

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      Token t{Tok::End, {}, {}, line_, col_};
      if (i_ >= s_.size()) {
        out.push_back(t);
        return out;
      }
      char c = s_[i_];
      if (c == '(' && const_ahead()) {
        t.kind = Tok::Const;
        t.c = read_const();
      } else if (std::isalpha((unsigned char)c) || c == '_') {
        size_t j = i_;
        while (j < s_.size() && (std::isalnum((unsigned char)s_[j]) || s_[j] == '_' || s_[j] == '\'')) ++j;
        t.text = std::string(s_.substr(i_, j - i_));
        t.kind = t.text == "V" ? Tok::Or : Tok::Ident;
        adv(j - i_);
      } else if (c == '(') { t.kind = Tok::LParen; adv(1); }
      else if (c == ')') { t.kind = Tok::RParen; adv(1); }
      else if (c == ',') { t.kind = Tok::Comma; adv(1); }
      else if (c == '~' || c == '!') { t.kind = Tok::Not; adv(1); }
      else if (c == '^' || c == '&') { t.kind = Tok::And; adv(1); }
      else if (c == '|') { t.kind = Tok::Or; adv(1); }
      else if (c == '=') { t.kind = Tok::Eq; adv(1); }
      else if (starts("<=>") || starts("<->")) { t.kind = Tok::Iff; adv(3); }
      else if (starts("<=")) { t.kind = Tok::Sub; adv(2); }
      else if (starts("->")) { t.kind = Tok::Imp; adv(2); }
      else throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
      out.push_back(std::move(t));
    }
  }

 private:
  std::string_view s_;
  size_t i_ = 0;
  int line_ = 1, col_ = 1;

  bool starts(std::string_view p) const { return s_.substr(i_, p.size()) == p; }

  void adv(size_t k) {
    for (size_t j = 0; j < k && i_ < s_.size(); ++j, ++i_) {
      if (s_[i_] == '\n') { ++line_; col_ = 1; }
      else ++col_;
    }
  }

  void skip() {
    for (;;) {
      while (i_ < s_.size() && std::isspace((unsigned char)s_[i_])) adv(1);
      if (i_ < s_.size() && s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') adv(1);
        continue;
      }
      return;
    }
  }

  // A '(' starts a constant when the next non-blank is a component symbol.
  bool const_ahead() const {
    size_t j = i_ + 1;
    while (j < s_.size() && std::isspace((unsigned char)s_[j])) ++j;
    if (j >= s_.size()) return false;
    char c = s_[j];
    if (c == '0' || c == '1' || c == '?' || c == '*') return true;
    // The bot symbol may also be written as the UTF-8 glyph.
    return s_.substr(j, 3) == "\xe2\x8a\xa5";
  }

  Inst read_const() {
    int l = line_, c = col_;
    adv(1);
    Inst e;
    for (;;) {
      skip();
      if (i_ >= s_.size()) throw ParseError("unterminated constant", l, c);
      if (s_.substr(i_, 3) == "\xe2\x8a\xa5") {
        e.push_back(Val::Bot);
        i_ += 3;
        ++col_;
      } else {
        char ch = s_[i_];
        if (ch == '0') e.push_back(Val::Zero);
        else if (ch == '1') e.push_back(Val::One);
        else if (ch == '?') e.push_back(Val::Bot);
        else throw ParseError(std::string("bad constant component '") + ch + "'", line_, col_);
        adv(1);
      }
      skip();
      if (i_ >= s_.size()) throw ParseError("unterminated constant", l, c);
      if (s_[i_] == ')') { adv(1); return e; }
      if (s_[i_] != ',') throw ParseError("expected ',' or ')' in constant", line_, col_);
      adv(1);
    }
  }
};

class Parser {
 public:
  explicit Parser(std::vector<Token> ts) : ts_(std::move(ts)) {}

  F parse() {
    F f = iff();
    if (cur().kind != Tok::End) fail("unexpected trailing input");
    return f;
  }

 private:
  std::vector<Token> ts_;
  size_t p_ = 0;
  int dim_ = -1;

  const Token& cur() const { return ts_[p_]; }
  [[noreturn]] void fail(const std::string& m) const { throw ParseError(m, cur().line, cur().col); }
  void expect(Tok k, const char* what) {
    if (cur().kind != k) fail(std::string("expected ") + what);
    ++p_;
  }

  F at(F f, const Token& t) {
    auto g = std::make_shared<Formula>(*f);
    g->line = t.line;
    g->col = t.col;
    return g;
  }

  F iff() {
    F l = imp();
    while (cur().kind == Tok::Iff) {
      ++p_;
      l = mk_iff(l, imp());
    }
    return l;
  }

  F imp() {
    F l = disj();
    if (cur().kind == Tok::Imp) {
      ++p_;
      return mk_implies(l, imp());
    }
    return l;
  }

  F disj() {
    F l = conj();
    while (cur().kind == Tok::Or) {
      Token t = cur();
      ++p_;
      l = at(mk_or(l, conj()), t);
    }
    return l;
  }

  F conj() {
    F l = unary();
    while (cur().kind == Tok::And) {
      Token t = cur();
      ++p_;
      l = at(mk_and(l, unary()), t);
    }
    return l;
  }

  F unary() {
    Token t = cur();
    if (t.kind == Tok::Not) {
      ++p_;
      return at(mk_not(unary()), t);
    }
    if (t.kind == Tok::Ident) {
      std::string u = upper(t.text);
      if (u == "EXISTS" || u == "FORALL") {
        ++p_;
        if (cur().kind != Tok::Ident) fail("expected variable after quantifier");
        std::string v = cur().text;
        ++p_;
        expect(Tok::Comma, "',' after quantified variable");
        F body = iff();
        return at(u == "EXISTS" ? mk_exists(v, body) : mk_forall(v, body), t);
      }
    }
    return primary();
  }

  Term term() {
    const Token& t = cur();
    if (t.kind == Tok::Const) {
      if (dim_ >= 0 && dim_ != (int)t.c.size())
        fail("constant of dimension " + std::to_string(t.c.size()) + " mixed with dimension " + std::to_string(dim_));
      dim_ = (int)t.c.size();
      ++p_;
      return Term::konst(t.c);
    }
    if (t.kind == Tok::Ident) {
      if (is_macro_keyword(upper(t.text)) || upper(t.text) == "EXISTS" || upper(t.text) == "FORALL")
        fail("reserved word '" + t.text + "' used as a variable");
      ++p_;
      return Term::var(t.text);
    }
    fail("expected a variable or constant");
  }

  std::vector<Term> args() {
    expect(Tok::LParen, "'('");
    std::vector<Term> out;
    if (cur().kind != Tok::RParen) {
      out.push_back(term());
      while (cur().kind == Tok::Comma) {
        ++p_;
        out.push_back(term());
      }
    }
    expect(Tok::RParen, "')'");
    return out;
  }

  F primary() {
    Token t = cur();
    if (t.kind == Tok::LParen) {
      ++p_;
      F f = iff();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::Ident) {
      std::string u = upper(t.text);
      bool call = p_ + 1 < ts_.size() && ts_[p_ + 1].kind == Tok::LParen;
      if (u == "TRUE") { ++p_; return at(mk_true(), t); }
      if (u == "FALSE") { ++p_; return at(mk_false(), t); }
      if (t.text == "P" && call) {
        ++p_;
        auto a = args();
        if (a.size() != 1) throw ParseError("P takes one argument", t.line, t.col);
        return at(mk_pos(a[0]), t);
      }
      if (is_macro_keyword(u)) {
        ++p_;
        auto a = args();
        int want = macro_arities().at(u);
        if ((int)a.size() != want)
          throw ParseError(u + " takes " + std::to_string(want) + " argument(s), got " + std::to_string(a.size()),
                           t.line, t.col);
        return at(mk_macro(u, a), t);
      }
    }
    Term l = term();
    Token op = cur();
    if (op.kind == Tok::Sub) {
      ++p_;
      return at(mk_sub(l, term()), op);
    }
    if (op.kind == Tok::Eq) {
      ++p_;
      return at(mk_eq(l, term()), op);
    }
    fail("expected '<=' or '='");
  }
};

}  // namespace

F parse_core(std::string_view text) {
  Lexer lx(text);
  Parser ps(lx.run());
  return ps.parse();
}

}  // namespace foil
