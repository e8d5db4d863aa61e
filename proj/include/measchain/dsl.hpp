// Copyright 2026 The measchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file dsl.hpp
 * Scenario language: AST, lexer, recursive-descent parser and canonical
 * formatter.
 *
 * The language is line oriented. Each statement occupies one line; newlines
 * inside brackets are ignored so matrices may span several lines. `#` starts
 * a comment. Keywords are lowercase and reserved.
 *
 *     scenario   := stmt*
 *     stmt       := space | state | observable | hamiltonian | device | evolve | query
 *     space      := "system" "dim" INT
 *     state      := "state" ("pure" cvec | "mixed" cmat)
 *     observable := "observable" NAME ("eigen" rvec "basis" cmat | "projectors" rvec cmat+)
 *     hamiltonian:= "hamiltonian" NAME cmat
 *     device     := "device" NAME ("measures" NAME ["weak" cmat+] | "reads" NAME)
 *     evolve     := "evolve" NAME "t" FLOAT | "evolve" "unitary" cmat
 *     query      := "query" ("marginal" NAME | "joint" event+ | "conditional" event "given" event+
 *                   | "reduced" | "repeatability" NAME NAME | "equivalence")
 *     event      := NAME "=" INT
 *
 * Complex literals are `a`, `bi`, `a+bi` and `a-bi` with no inner spaces.
 */
#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "measchain/error.hpp"
#include "measchain/linalg.hpp"

namespace measchain::dsl {

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

inline std::string to_string(const SourcePos& p) {
  return "line " + std::to_string(p.line) + ", column " + std::to_string(p.column);
}

/// Lexical or syntax error with the position and the tokens that would have fit.
class ParseError : public Error {
 public:
  ParseError(SourcePos pos, std::string message, std::vector<std::string> expected = {})
      : Error(compose(pos, message, expected)), pos_(pos), message_(std::move(message)), expected_(std::move(expected)) {}

  const SourcePos& pos() const { return pos_; }
  const std::string& message() const { return message_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string compose(const SourcePos& pos, const std::string& msg, const std::vector<std::string>& expected) {
    std::string s = to_string(pos) + ": " + msg;
    if (!expected.empty()) {
      s += " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) s += (i ? ", " : "") + expected[i];
      s += ")";
    }
    return s;
  }

  SourcePos pos_;
  std::string message_;
  std::vector<std::string> expected_;
};

using CVec = std::vector<Complex>;
using CMat = std::vector<CVec>;
using RVec = std::vector<double>;

/// An identifier use or definition. Equality ignores the position.
struct Name {
  std::string text;
  SourcePos pos;
  friend bool operator==(const Name& a, const Name& b) { return a.text == b.text; }
};

struct Event {
  Name device;
  std::size_t outcome = 0;
  SourcePos pos;
  friend bool operator==(const Event& a, const Event& b) { return a.device == b.device && a.outcome == b.outcome; }
};

struct SystemDecl {
  std::size_t dim = 0;
  friend bool operator==(const SystemDecl&, const SystemDecl&) = default;
};
struct PureStateDecl {
  CVec amplitudes;
  friend bool operator==(const PureStateDecl&, const PureStateDecl&) = default;
};
struct MixedStateDecl {
  CMat matrix;
  friend bool operator==(const MixedStateDecl&, const MixedStateDecl&) = default;
};
/// Either `eigen ... basis ...` (basis set) or `projectors ...` (projectors set).
struct ObservableDecl {
  Name name;
  RVec eigenvalues;
  std::optional<CMat> basis;
  std::vector<CMat> projectors;
  friend bool operator==(const ObservableDecl&, const ObservableDecl&) = default;
};
struct HamiltonianDecl {
  Name name;
  CMat matrix;
  friend bool operator==(const HamiltonianDecl&, const HamiltonianDecl&) = default;
};
struct MeasureDecl {
  Name name;
  Name observable;
  std::vector<CMat> weak;  // empty: ideal device
  friend bool operator==(const MeasureDecl&, const MeasureDecl&) = default;
};
struct ReadDecl {
  Name name;
  Name target;
  friend bool operator==(const ReadDecl&, const ReadDecl&) = default;
};
struct EvolveHamiltonian {
  Name hamiltonian;
  double t = 0.0;
  friend bool operator==(const EvolveHamiltonian&, const EvolveHamiltonian&) = default;
};
struct EvolveUnitary {
  CMat matrix;
  friend bool operator==(const EvolveUnitary&, const EvolveUnitary&) = default;
};

enum class QueryKind { marginal, joint, conditional, reduced, repeatability, equivalence };

inline const char* to_string(QueryKind k) {
  switch (k) {
    case QueryKind::marginal: return "marginal";
    case QueryKind::joint: return "joint";
    case QueryKind::conditional: return "conditional";
    case QueryKind::reduced: return "reduced";
    case QueryKind::repeatability: return "repeatability";
    case QueryKind::equivalence: return "equivalence";
  }
  return "?";
}

/// Field use depends on kind: marginal/repeatability use `devices`; joint uses
/// `events`; conditional uses `events` (one target) and `given`.
struct QueryDecl {
  QueryKind kind = QueryKind::equivalence;
  std::vector<Name> devices;
  std::vector<Event> events;
  std::vector<Event> given;
  friend bool operator==(const QueryDecl&, const QueryDecl&) = default;
};

using StatementBody = std::variant<SystemDecl, PureStateDecl, MixedStateDecl, ObservableDecl, HamiltonianDecl,
                                   MeasureDecl, ReadDecl, EvolveHamiltonian, EvolveUnitary, QueryDecl>;

struct Statement {
  SourcePos pos;
  StatementBody body;
  friend bool operator==(const Statement& a, const Statement& b) { return a.body == b.body; }
};

/// A parsed scenario; statement order is the physical order of events.
struct Scenario {
  std::vector<Statement> statements;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  template <class T>
  std::vector<const T*> all() const {
    std::vector<const T*> out;
    for (const auto& s : statements)
      if (const auto* p = std::get_if<T>(&s.body)) out.push_back(p);
    return out;
  }
};

inline const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> kw{
      "system", "dim",       "state",       "pure",    "mixed",       "observable",    "eigen",
      "basis",  "projectors", "hamiltonian", "device",  "measures",    "weak",          "reads",
      "evolve", "t",          "unitary",     "query",   "marginal",    "joint",         "conditional",
      "given",  "reduced",    "repeatability", "equivalence"};
  return kw;
}

// ---------------------------------------------------------------------------
// Lexer

enum class TokenKind { word, number, lbracket, rbracket, comma, equals, newline, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  Complex value;
  bool is_integer = false;  // digits only, no sign, point, exponent or imaginary part
  bool is_real = true;
  SourcePos pos;
};

inline std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::word: return "'" + t.text + "'";
    case TokenKind::number: return "number '" + t.text + "'";
    case TokenKind::lbracket: return "'['";
    case TokenKind::rbracket: return "']'";
    case TokenKind::comma: return "','";
    case TokenKind::equals: return "'='";
    case TokenKind::newline: return "end of line";
    case TokenKind::end: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    int depth = 0;
    while (true) {
      skip_blanks();
      const SourcePos pos{line_, col_};
      if (at_end()) {
        out.push_back({TokenKind::newline, "", {}, false, true, pos});
        out.push_back({TokenKind::end, "", {}, false, true, pos});
        return out;
      }
      const char c = peek();
      if (c == '\n') {
        advance();
        if (depth == 0) out.push_back({TokenKind::newline, "\\n", {}, false, true, pos});
      } else if (c == '[') {
        advance();
        ++depth;
        out.push_back({TokenKind::lbracket, "[", {}, false, true, pos});
      } else if (c == ']') {
        advance();
        if (--depth < 0) throw ParseError(pos, "unbalanced ']'");
        out.push_back({TokenKind::rbracket, "]", {}, false, true, pos});
      } else if (c == ',') {
        advance();
        out.push_back({TokenKind::comma, ",", {}, false, true, pos});
      } else if (c == '=') {
        advance();
        out.push_back({TokenKind::equals, "=", {}, false, true, pos});
      } else if (is_name_start(c)) {
        std::string w;
        while (!at_end() && is_name_char(peek())) w += advance();
        out.push_back({TokenKind::word, w, {}, false, true, pos});
      } else if (starts_number(0)) {
        out.push_back(lex_number(pos));
      } else {
        throw ParseError(pos, std::string("unexpected character '") + c + "'");
      }
    }
  }

 private:
  static bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
  }

  bool at_end() const { return i_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }
  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_blanks() {
    while (!at_end()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  bool starts_number(std::size_t ahead) const {
    char c = peek(ahead);
    if (c == '+' || c == '-') c = peek(ahead + 1);
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
    return c == '.' && std::isdigit(static_cast<unsigned char>(peek(ahead + (peek(ahead) == '.' ? 1 : 2))));
  }

  // Reads [sign] digits [. digits] [e [sign] digits] and returns its text.
  std::string scan_real(const SourcePos& pos) {
    std::string s;
    if (peek() == '+' || peek() == '-') s += advance();
    bool digits = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance(), digits = true;
    if (peek() == '.') {
      s += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance(), digits = true;
    }
    if (!digits) throw ParseError(pos, "malformed number '" + s + "'");
    if (peek() == 'e' || peek() == 'E') {
      const char sign = peek(1);
      const std::size_t first = (sign == '+' || sign == '-') ? 2 : 1;
      if (!std::isdigit(static_cast<unsigned char>(peek(first))))
        throw ParseError(pos, "malformed exponent in '" + s + "'");
      for (std::size_t k = 0; k < first; ++k) s += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance();
    }
    return s;
  }

  static double to_double(const std::string& s, const SourcePos& pos) {
    const double v = std::strtod(s.c_str(), nullptr);
    if (!std::isfinite(v)) throw ParseError(pos, "number '" + s + "' is out of range");
    return v;
  }

  Token lex_number(const SourcePos& pos) {
    Token t{TokenKind::number, "", {}, false, true, pos};
    const std::string first = scan_real(pos);
    t.text = first;
    t.is_integer = first.find_first_not_of("0123456789") == std::string::npos;
    if (peek() == 'i' && !is_name_char(peek(1))) {
      advance();
      t.text += 'i';
      t.value = {0.0, to_double(first, pos)};
      t.is_real = false;
      t.is_integer = false;
    } else if ((peek() == '+' || peek() == '-') && starts_number(0)) {
      const std::string second = scan_real(pos);
      if (peek() != 'i' || is_name_char(peek(1)))
        throw ParseError({line_, col_}, "complex literal '" + first + second + "' must end in 'i'");
      advance();
      t.text = first + second + "i";
      t.value = {to_double(first, pos), to_double(second, pos)};
      t.is_real = false;
      t.is_integer = false;
    } else {
      t.value = {to_double(first, pos), 0.0};
    }
    if (is_name_char(peek()))
      throw ParseError({line_, col_}, "unexpected '" + std::string(1, peek()) + "' after number '" + t.text + "'");
    return t;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Scenario parse() {
    Scenario s;
    while (true) {
      while (cur().kind == TokenKind::newline) ++i_;
      if (cur().kind == TokenKind::end) break;
      s.statements.push_back(statement());
      if (cur().kind != TokenKind::newline) fail("unexpected " + describe(cur()) + " after statement", {"end of line"});
    }
    return s;
  }

 private:
  const Token& cur() const { return toks_[i_]; }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) const {
    throw ParseError(cur().pos, msg, std::move(expected));
  }

  bool at_word(std::string_view w) const { return cur().kind == TokenKind::word && cur().text == w; }

  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("expected '" + std::string(w) + "', found " + describe(cur()), {"'" + std::string(w) + "'"});
    ++i_;
  }

  std::string choose(std::initializer_list<std::string_view> options) {
    for (auto o : options)
      if (at_word(o)) {
        ++i_;
        return std::string(o);
      }
    std::vector<std::string> exp;
    for (auto o : options) exp.push_back("'" + std::string(o) + "'");
    fail("unexpected " + describe(cur()), exp);
  }

  void expect(TokenKind k, const char* what) {
    if (cur().kind != k) fail("expected " + std::string(what) + ", found " + describe(cur()), {what});
    ++i_;
  }

  Name name() {
    if (cur().kind != TokenKind::word) fail("expected a name, found " + describe(cur()), {"NAME"});
    if (keywords().count(cur().text)) fail("'" + cur().text + "' is a keyword and cannot be used as a name", {"NAME"});
    Name n{cur().text, cur().pos};
    ++i_;
    return n;
  }

  Name define(Name n) {
    if (!defined_.insert(n.text).second) throw ParseError(n.pos, "duplicate name '" + n.text + "'");
    return n;
  }

  std::size_t integer() {
    if (cur().kind != TokenKind::number || !cur().is_integer)
      fail("expected a non-negative integer, found " + describe(cur()), {"INT"});
    const auto v = static_cast<std::size_t>(std::stoull(cur().text));
    ++i_;
    return v;
  }

  double real() {
    if (cur().kind != TokenKind::number || !cur().is_real) fail("expected a real number, found " + describe(cur()), {"FLOAT"});
    const double v = cur().value.real();
    ++i_;
    return v;
  }

  Complex complex_value() {
    if (cur().kind != TokenKind::number) fail("expected a number, found " + describe(cur()), {"COMPLEX"});
    const Complex v = cur().value;
    ++i_;
    return v;
  }

  template <class F>
  auto list(F item) {
    std::vector<decltype(item())> out;
    expect(TokenKind::lbracket, "'['");
    out.push_back(item());
    while (cur().kind == TokenKind::comma) {
      ++i_;
      out.push_back(item());
    }
    expect(TokenKind::rbracket, "']'");
    return out;
  }

  CVec cvec() { return list([&] { return complex_value(); }); }
  RVec rvec() { return list([&] { return real(); }); }
  CMat cmat() { return list([&] { return cvec(); }); }

  std::vector<CMat> cmat_list() {
    std::vector<CMat> out{cmat()};
    while (cur().kind == TokenKind::lbracket) out.push_back(cmat());
    return out;
  }

  Event event() {
    const SourcePos pos = cur().pos;
    Name dev = name();
    expect(TokenKind::equals, "'='");
    return Event{std::move(dev), integer(), pos};
  }

  std::vector<Event> events() {
    std::vector<Event> out{event()};
    while (cur().kind == TokenKind::word && !at_word("given")) out.push_back(event());
    return out;
  }

  Statement statement() {
    const SourcePos pos = cur().pos;
    const std::string kw = choose({"system", "state", "observable", "hamiltonian", "device", "evolve", "query"});
    if (kw == "system") {
      expect_word("dim");
      return {pos, SystemDecl{integer()}};
    }
    if (kw == "state") {
      if (choose({"pure", "mixed"}) == "pure") return {pos, PureStateDecl{cvec()}};
      return {pos, MixedStateDecl{cmat()}};
    }
    if (kw == "observable") {
      ObservableDecl o;
      o.name = define(name());
      if (choose({"eigen", "projectors"}) == "eigen") {
        o.eigenvalues = rvec();
        expect_word("basis");
        o.basis = cmat();
      } else {
        o.eigenvalues = rvec();
        o.projectors = cmat_list();
      }
      return {pos, std::move(o)};
    }
    if (kw == "hamiltonian") {
      Name n = define(name());
      return {pos, HamiltonianDecl{std::move(n), cmat()}};
    }
    if (kw == "device") {
      Name n = define(name());
      if (choose({"measures", "reads"}) == "reads") return {pos, ReadDecl{std::move(n), name()}};
      MeasureDecl m{std::move(n), name(), {}};
      if (at_word("weak")) {
        ++i_;
        m.weak = cmat_list();
      }
      return {pos, std::move(m)};
    }
    if (kw == "evolve") {
      if (at_word("unitary")) {
        ++i_;
        return {pos, EvolveUnitary{cmat()}};
      }
      Name h = name();
      expect_word("t");
      return {pos, EvolveHamiltonian{std::move(h), real()}};
    }
    QueryDecl q;
    const std::string kind =
        choose({"marginal", "joint", "conditional", "reduced", "repeatability", "equivalence"});
    if (kind == "marginal") {
      q.kind = QueryKind::marginal;
      q.devices.push_back(name());
    } else if (kind == "joint") {
      q.kind = QueryKind::joint;
      q.events = events();
    } else if (kind == "conditional") {
      q.kind = QueryKind::conditional;
      q.events.push_back(event());
      expect_word("given");
      q.given = events();
    } else if (kind == "reduced") {
      q.kind = QueryKind::reduced;
    } else if (kind == "repeatability") {
      q.kind = QueryKind::repeatability;
      q.devices.push_back(name());
      q.devices.push_back(name());
    } else {
      q.kind = QueryKind::equivalence;
    }
    return {pos, std::move(q)};
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::set<std::string> defined_;
};

/// Parses scenario text; throws ParseError on the first lexical or syntax error.
inline Scenario parse_scenario(std::string_view text) { return Parser(Lexer(text).tokenize()).parse(); }

// ---------------------------------------------------------------------------
// Formatter

/// %.17g, which round-trips every finite double.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_complex(const Complex& z) {
  if (z.imag() == 0.0) return format_real(z.real());
  const std::string im = format_real(std::abs(z.imag())) + "i";
  const bool negative = std::signbit(z.imag());
  if (z.real() == 0.0) return (negative ? "-" : "") + im;
  return format_real(z.real()) + (negative ? "-" : "+") + im;
}

namespace detail {

template <class T, class F>
std::string join_list(const std::vector<T>& xs, F fmt) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
  return s + "]";
}

inline std::string fmt_cvec(const CVec& v) { return join_list(v, format_complex); }
inline std::string fmt_rvec(const RVec& v) { return join_list(v, format_real); }
inline std::string fmt_cmat(const CMat& m) { return join_list(m, fmt_cvec); }

inline std::string fmt_cmats(const std::vector<CMat>& ms) {
  std::string s;
  for (std::size_t i = 0; i < ms.size(); ++i) s += (i ? " " : "") + fmt_cmat(ms[i]);
  return s;
}

inline std::string fmt_events(const std::vector<Event>& evs) {
  std::string s;
  for (std::size_t i = 0; i < evs.size(); ++i)
    s += (i ? " " : "") + evs[i].device.text + "=" + std::to_string(evs[i].outcome);
  return s;
}

}  // namespace detail

/// Canonical text of one query, as used in reports.
inline std::string format_query(const QueryDecl& q) {
  std::string s = std::string("query ") + to_string(q.kind);
  switch (q.kind) {
    case QueryKind::marginal: return s + " " + q.devices.at(0).text;
    case QueryKind::joint: return s + " " + detail::fmt_events(q.events);
    case QueryKind::conditional:
      return s + " " + detail::fmt_events(q.events) + " given " + detail::fmt_events(q.given);
    case QueryKind::repeatability: return s + " " + q.devices.at(0).text + " " + q.devices.at(1).text;
    case QueryKind::reduced:
    case QueryKind::equivalence: return s;
  }
  return s;
}

inline std::string format_statement(const Statement& st) {
  struct Visitor {
    std::string operator()(const SystemDecl& s) const { return "system dim " + std::to_string(s.dim); }
    std::string operator()(const PureStateDecl& s) const { return "state pure " + detail::fmt_cvec(s.amplitudes); }
    std::string operator()(const MixedStateDecl& s) const { return "state mixed " + detail::fmt_cmat(s.matrix); }
    std::string operator()(const ObservableDecl& o) const {
      if (o.basis)
        return "observable " + o.name.text + " eigen " + detail::fmt_rvec(o.eigenvalues) + " basis " +
               detail::fmt_cmat(*o.basis);
      return "observable " + o.name.text + " projectors " + detail::fmt_rvec(o.eigenvalues) + " " +
             detail::fmt_cmats(o.projectors);
    }
    std::string operator()(const HamiltonianDecl& h) const {
      return "hamiltonian " + h.name.text + " " + detail::fmt_cmat(h.matrix);
    }
    std::string operator()(const MeasureDecl& m) const {
      std::string s = "device " + m.name.text + " measures " + m.observable.text;
      if (!m.weak.empty()) s += " weak " + detail::fmt_cmats(m.weak);
      return s;
    }
    std::string operator()(const ReadDecl& r) const { return "device " + r.name.text + " reads " + r.target.text; }
    std::string operator()(const EvolveHamiltonian& e) const {
      return "evolve " + e.hamiltonian.text + " t " + format_real(e.t);
    }
    std::string operator()(const EvolveUnitary& e) const { return "evolve unitary " + detail::fmt_cmat(e.matrix); }
    std::string operator()(const QueryDecl& q) const { return format_query(q); }
  };
  return std::visit(Visitor{}, st.body);
}

/// Canonical text: one statement per line, no comments, 17 significant digits.
inline std::string format_scenario(const Scenario& s) {
  std::string out;
  for (const auto& st : s.statements) out += format_statement(st) + "\n";
  return out;
}

}  // namespace measchain::dsl
