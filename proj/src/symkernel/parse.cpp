#include "cayley/expr.hpp"

#include <cctype>
#include <sstream>

// Grammar (whitespace insignificant):
//   expr     := ['-'] term (('+'|'-') term)*
//   term     := factor (('*'|'/') factor)*
//   factor   := base ('^' exponent)?
//   exponent := ['-'] NUMBER | '(' expr ')'
//   base     := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')'
//             | 'diff' '(' expr ',' IDENT ')' | '(' expr ')'
// Rational literals are written a/b.  exp, log, sqrt are built in.  A
// derivative of an opaque symbol prints as nested diff(...) calls when its
// arguments are plain distinct variables and as name__d_i1_i2_...(args)
// otherwise; the parser accepts both spellings.

namespace cayley {

namespace {

struct lexer {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool eat(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c))
      throw parse_error(std::string("expected '") + c + "'", pos);
  }
};

struct parser {
  lexer lx;

  [[noreturn]] void fail(const std::string& msg) {
    throw parse_error(msg, lx.pos);
  }

  bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
  bool ident_char(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

  std::string read_ident() {
    lx.skip_ws();
    std::size_t start = lx.pos;
    if (start >= lx.s.size() || !ident_start(lx.s[start])) fail("expected identifier");
    std::size_t end = start;
    while (end < lx.s.size() && ident_char(lx.s[end])) ++end;
    lx.pos = end;
    return lx.s.substr(start, end - start);
  }

  expr read_number() {
    lx.skip_ws();
    std::size_t start = lx.pos;
    while (lx.pos < lx.s.size() && std::isdigit((unsigned char)lx.s[lx.pos]))
      ++lx.pos;
    if (lx.pos == start) fail("expected number");
    mpz_class n(lx.s.substr(start, lx.pos - start));
    return expr(rat(n));
  }

  expr parse_expr() {
    bool neg = lx.eat('-');
    expr acc = parse_term();
    if (neg) acc = -acc;
    while (true) {
      if (lx.eat('+'))
        acc += parse_term();
      else if (lx.eat('-'))
        acc -= parse_term();
      else
        return acc;
    }
  }

  expr parse_term() {
    expr acc = parse_factor();
    while (true) {
      if (lx.eat('*'))
        acc *= parse_factor();
      else if (lx.eat('/'))
        acc /= parse_factor();
      else
        return acc;
    }
  }

  expr parse_factor() {
    expr b = parse_base();
    if (lx.eat('^')) {
      expr e = parse_exponent();
      return make_power(b, e);
    }
    return b;
  }

  expr parse_exponent() {
    if (lx.eat('(')) {
      expr e = parse_expr();
      lx.expect(')');
      return e;
    }
    bool neg = lx.eat('-');
    char c = lx.peek();
    expr n = ident_start(c) ? make_variable(read_ident()) : read_number();
    return neg ? -n : n;
  }

  // name of the form base__d_i1_i2_... -> (base, indices)
  static bool split_marker(const std::string& name, std::string& base,
                           std::vector<std::uint32_t>& idx) {
    auto pos = name.find("__d_");
    if (pos == std::string::npos || pos == 0) return false;
    base = name.substr(0, pos);
    std::size_t i = pos + 4;
    std::uint32_t cur = 0;
    bool have = false;
    while (i <= name.size()) {
      if (i == name.size() || name[i] == '_') {
        if (!have) return false;
        idx.push_back(cur);
        cur = 0;
        have = false;
        if (i == name.size()) break;
      } else if (std::isdigit((unsigned char)name[i])) {
        cur = cur * 10 + (std::uint32_t)(name[i] - '0');
        have = true;
      } else {
        return false;
      }
      ++i;
    }
    return !idx.empty();
  }

  expr parse_base() {
    char c = lx.peek();
    if (c == '(') {
      lx.eat('(');
      expr e = parse_expr();
      lx.expect(')');
      return e;
    }
    if (std::isdigit((unsigned char)c)) return read_number();
    if (!ident_start(c)) fail("unknown token");
    std::string name = read_ident();
    if (name == "diff") {
      lx.expect('(');
      expr e = parse_expr();
      lx.expect(',');
      std::string v = read_ident();
      lx.expect(')');
      return diff(e, v);
    }
    if (lx.peek() == '(') {
      lx.eat('(');
      std::vector<expr> args;
      args.push_back(parse_expr());
      while (lx.eat(',')) args.push_back(parse_expr());
      lx.expect(')');
      if (name == "exp") {
        if (args.size() != 1) fail("exp takes one argument");
        return make_exp(args[0]);
      }
      if (name == "log") {
        if (args.size() != 1) fail("log takes one argument");
        return make_log(args[0]);
      }
      if (name == "sqrt") {
        if (args.size() != 1) fail("sqrt takes one argument");
        return make_power(args[0], expr(rat(1, 2)));
      }
      std::string base;
      std::vector<std::uint32_t> idx;
      if (split_marker(name, base, idx)) {
        if (idx.size() != args.size())
          fail("derivative index length does not match argument count");
        return make_opaque(base, std::move(args), std::move(idx));
      }
      return make_opaque(name, std::move(args));
    }
    return make_variable(name);
  }
};

}  // namespace

expr parse(const std::string& text) {
  parser p{lexer{text}};
  expr e = p.parse_expr();
  p.lx.skip_ws();
  if (p.lx.pos != text.size()) throw parse_error("trailing input", p.lx.pos);
  return e;
}

// ---- printing ----------------------------------------------------------

namespace {

std::string print_expr(const expr& e);

std::string print_atom(atom_id id) {
  const atom_data& a = atom_info(id);
  std::ostringstream os;
  switch (a.kind) {
    case atom_kind::var:
      return a.name;
    case atom_kind::opaque: {
      bool all_zero = true;
      for (auto d : a.dindex) all_zero = all_zero && d == 0;
      // plain distinct variable arguments print as nested diff(...)
      bool simple = true;
      std::vector<std::string> argnames;
      for (auto& x : a.args) {
        if (x.den().is_constant() && x.den().constant_value() == 1 &&
            x.num().t.size() == 1 && x.num().t[0].second == 1 &&
            x.num().t[0].first.f.size() == 1 &&
            x.num().t[0].first.f[0].second == 1 &&
            atom_info(x.num().t[0].first.f[0].first).kind == atom_kind::var) {
          argnames.push_back(atom_info(x.num().t[0].first.f[0].first).name);
        } else {
          simple = false;
          break;
        }
      }
      if (simple) {
        for (std::size_t i = 0; i < argnames.size(); ++i)
          for (std::size_t j = i + 1; j < argnames.size(); ++j)
            if (argnames[i] == argnames[j]) simple = false;
      }
      if (all_zero || simple) {
        std::string inner = a.name + "(";
        for (std::size_t i = 0; i < a.args.size(); ++i) {
          if (i) inner += ",";
          inner += print_expr(a.args[i]);
        }
        inner += ")";
        if (!all_zero) {
          for (std::size_t j = 0; j < a.dindex.size(); ++j)
            for (std::uint32_t k = 0; k < a.dindex[j]; ++k)
              inner = "diff(" + inner + "," + argnames[j] + ")";
        }
        return inner;
      }
      os << a.name << "__d";
      for (auto d : a.dindex) os << "_" << d;
      os << "(";
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) os << ",";
        os << print_expr(a.args[i]);
      }
      os << ")";
      return os.str();
    }
    case atom_kind::fexp:
      return "exp(" + print_expr(a.args[0]) + ")";
    case atom_kind::flog:
      return "log(" + print_expr(a.args[0]) + ")";
    case atom_kind::radical:
      os << "(" << print_expr(a.args[0]) << ")^(1/" << a.root << ")";
      return os.str();
    case atom_kind::sympow:
      os << "(" << print_expr(a.args[0]) << ")^(" << print_expr(a.spow) << ")";
      return os.str();
  }
  return "?";
}

std::string print_mono(const monomial& m) {
  std::string out;
  for (std::size_t i = 0; i < m.f.size(); ++i) {
    if (i) out += "*";
    const atom_data& a = atom_info(m.f[i].first);
    std::string as = print_atom(m.f[i].first);
    bool atom_is_power = a.kind == atom_kind::radical || a.kind == atom_kind::sympow;
    if (m.f[i].second == 1) {
      out += as;
    } else if (atom_is_power) {
      // ((b)^(1/q))^k needs explicit grouping to reparse
      out += "(" + as + ")^" + std::to_string(m.f[i].second);
    } else {
      out += as + "^" + std::to_string(m.f[i].second);
    }
  }
  return out;
}

std::string print_poly(const polynomial& p) {
  if (p.t.empty()) return "0";
  std::string out;
  bool first = true;
  for (auto& [m, c] : p.t) {
    rat a = c;
    bool neg = a < 0;
    if (neg) a = -a;
    if (first) {
      if (neg) out += "-";
      first = false;
    } else {
      out += neg ? " - " : " + ";
    }
    std::string cs = rat_to_string(a);
    if (m.f.empty()) {
      out += cs;
    } else if (a == 1) {
      out += print_mono(m);
    } else {
      out += cs + "*" + print_mono(m);
    }
  }
  return out;
}

std::string print_expr(const expr& e) {
  if (e.den().is_constant() && e.den().constant_value() == 1)
    return print_poly(e.num());
  return "(" + print_poly(e.num()) + ")/(" + print_poly(e.den()) + ")";
}

}  // namespace

std::string to_string(const expr& e) { return print_expr(e); }

std::string atom_key(atom_id id) { return print_atom(id); }

}  // namespace cayley
