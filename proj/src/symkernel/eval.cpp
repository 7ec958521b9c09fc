#include "cayley/expr.hpp"

#include <cmath>
#include <map>
#include <string>

namespace cayley {

namespace {

struct rat_env {
  const std::map<std::string, rat>* point;
  const std::map<std::string, rat>* symbols;
  std::map<atom_id, rat> memo;
};

rat eval_poly_rat(const polynomial& p, rat_env& env);

rat eval_atom_rat(atom_id id, rat_env& env) {
  auto it = env.memo.find(id);
  if (it != env.memo.end()) return it->second;
  const atom_data& a = atom_info(id);
  rat v;
  switch (a.kind) {
    case atom_kind::var: {
      auto b = env.point->find(a.name);
      if (b == env.point->end())
        throw eval_error("unbound variable: " + a.name);
      v = b->second;
      break;
    }
    case atom_kind::opaque: {
      // key carries the evaluated argument values, e.g. f(2) or
      // f__d_1(1/2); the structural spelling is accepted as a fallback
      std::string key = a.name;
      bool all_zero = true;
      for (auto d : a.dindex) all_zero = all_zero && d == 0;
      if (!all_zero) {
        key += "__d";
        for (auto d : a.dindex) key += "_" + std::to_string(d);
      }
      key += "(";
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) key += ",";
        key += rat_to_string(eval_poly_rat(a.args[i].num(), env) /
                             eval_poly_rat(a.args[i].den(), env));
      }
      key += ")";
      auto b = env.symbols->find(key);
      if (b == env.symbols->end()) b = env.symbols->find(atom_key(id));
      if (b == env.symbols->end())
        throw eval_error("unbound symbol: " + key);
      v = b->second;
      break;
    }
    case atom_kind::radical: {
      rat base = eval_poly_rat(a.args[0].num(), env) /
                 eval_poly_rat(a.args[0].den(), env);
      bool neg = base < 0;
      if (neg && a.root % 2 == 0)
        throw eval_error("even root of a negative rational");
      rat b = neg ? rat(-base) : base;
      mpz_class rn, rd;
      if (!mpz_root(rn.get_mpz_t(), b.get_num_mpz_t(), a.root) ||
          !mpz_root(rd.get_mpz_t(), b.get_den_mpz_t(), a.root))
        throw eval_error("irrational radical value");
      v = rat(rn, rd);
      v.canonicalize();
      if (neg) v = -v;
      break;
    }
    default:
      throw eval_error("cannot evaluate transcendental atom exactly: " +
                       atom_key(id));
  }
  env.memo.emplace(id, v);
  return v;
}

rat eval_poly_rat(const polynomial& p, rat_env& env) {
  rat total(0);
  for (auto& [m, c] : p.t) {
    rat term = c;
    for (auto& [id, e] : m.f) {
      rat av = eval_atom_rat(id, env);
      for (std::uint32_t k = 0; k < e; ++k) term *= av;
    }
    total += term;
  }
  return total;
}

struct dbl_env {
  const std::map<std::string, double>* point;
  const std::map<std::string, double>* symbols;
  std::map<atom_id, double> memo;
};

double eval_poly_dbl(const polynomial& p, dbl_env& env);

double eval_expr_dbl(const expr& e, dbl_env& env) {
  double n = eval_poly_dbl(e.num(), env);
  double d = eval_poly_dbl(e.den(), env);
  return n / d;
}

double eval_atom_dbl(atom_id id, dbl_env& env) {
  auto it = env.memo.find(id);
  if (it != env.memo.end()) return it->second;
  const atom_data& a = atom_info(id);
  double v = 0;
  switch (a.kind) {
    case atom_kind::var: {
      auto b = env.point->find(a.name);
      if (b == env.point->end())
        throw eval_error("unbound variable: " + a.name);
      v = b->second;
      break;
    }
    case atom_kind::opaque: {
      std::string key = atom_key(id);
      auto b = env.symbols->find(key);
      if (b == env.symbols->end())
        throw eval_error("unbound symbol: " + key);
      v = b->second;
      break;
    }
    case atom_kind::fexp:
      v = std::exp(eval_expr_dbl(a.args[0], env));
      break;
    case atom_kind::flog:
      v = std::log(eval_expr_dbl(a.args[0], env));
      break;
    case atom_kind::radical: {
      double base = eval_expr_dbl(a.args[0], env);
      if (base < 0 && a.root % 2 == 1)
        v = -std::pow(-base, 1.0 / a.root);
      else
        v = std::pow(base, 1.0 / a.root);
      break;
    }
    case atom_kind::sympow: {
      double base = eval_expr_dbl(a.args[0], env);
      double s = eval_expr_dbl(a.spow, env);
      v = std::pow(base, s);
      break;
    }
  }
  env.memo.emplace(id, v);
  return v;
}

double eval_poly_dbl(const polynomial& p, dbl_env& env) {
  double total = 0;
  for (auto& [m, c] : p.t) {
    double term = c.get_d();
    for (auto& [id, e] : m.f) term *= std::pow(eval_atom_dbl(id, env), (double)e);
    total += term;
  }
  return total;
}

// termwise magnitude, for scale-aware zero detection
double poly_scale_dbl(const polynomial& p, dbl_env& env) {
  double total = 0;
  for (auto& [m, c] : p.t) {
    double term = std::fabs(c.get_d());
    for (auto& [id, e] : m.f)
      term *= std::pow(std::fabs(eval_atom_dbl(id, env)), (double)e);
    total += term;
  }
  return total;
}

}  // namespace

rat eval_rational(const expr& e, const std::map<std::string, rat>& point,
                  const std::map<std::string, rat>& symbol_table) {
  rat_env env{&point, &symbol_table, {}};
  rat d = eval_poly_rat(e.den(), env);
  if (d == 0) throw eval_error("pole: denominator vanishes at the point");
  return eval_poly_rat(e.num(), env) / d;
}

double eval_double(const expr& e, const std::map<std::string, double>& point,
                   const std::map<std::string, double>& symbol_table) {
  dbl_env env{&point, &symbol_table, {}};
  return eval_expr_dbl(e, env);
}

zero_kind zero_test(const expr& e, const zero_options& opt) {
  if (e.num().is_zero()) return zero_kind::zero;
  if (!has_inexact_atoms(e)) return zero_kind::nonzero;

  // sampling fallback for values carrying radical/exp/log/power atoms
  std::vector<std::string> vars, syms;
  for (atom_id id : collect_atoms(e)) {
    const atom_data& a = atom_info(id);
    if (a.kind == atom_kind::var)
      vars.push_back(a.name);
    else if (a.kind == atom_kind::opaque)
      syms.push_back(atom_key(id));
  }
  rng r(opt.seed);
  unsigned good = 0, attempts = 0;
  while (good < opt.points) {
    if (++attempts > opt.points + opt.max_retries)
      throw eval_error("zero test: sampling failed (poles or domain errors)");
    std::map<std::string, double> pt, st;
    // positive samples keep radicals and logs real
    for (auto& v : vars) pt[v] = 0.1 + 1.9 * (double)(r.next() % 100000) / 100000.0;
    for (auto& s : syms) st[s] = 0.1 + 1.9 * (double)(r.next() % 100000) / 100000.0;
    dbl_env env{&pt, &st, {}};
    double n, d, ns, ds;
    try {
      n = eval_poly_dbl(e.num(), env);
      ns = poly_scale_dbl(e.num(), env);
      d = eval_poly_dbl(e.den(), env);
      ds = poly_scale_dbl(e.den(), env);
    } catch (const eval_error&) {
      continue;
    }
    if (!std::isfinite(n) || !std::isfinite(d) || !std::isfinite(ns) ||
        !std::isfinite(ds))
      continue;
    if (std::fabs(d) <= opt.tolerance * std::max(1.0, ds)) continue;  // pole
    ++good;
    if (std::fabs(n) > opt.tolerance * std::max(1.0, ns))
      return zero_kind::nonzero;
  }
  return zero_kind::probably_zero;
}

bool is_zero(const expr& e, const zero_options& opt) {
  return zero_test(e, opt) != zero_kind::nonzero;
}

}  // namespace cayley
