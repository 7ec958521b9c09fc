#include "cayley/expr.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace cayley {

rat rat_from_long(long n, long d) {
  rat q(n, d);
  q.canonicalize();
  return q;
}

std::string rat_to_string(const rat& q) { return q.get_str(); }

// ---- monomials ---------------------------------------------------------

std::uint64_t monomial::degree() const {
  std::uint64_t d = 0;
  for (auto& [id, e] : f) d += e;
  return d;
}

bool mono_less(const monomial& a, const monomial& b) {
  std::uint64_t da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  // compare from the highest atom id down
  auto ia = a.f.rbegin(), ib = b.f.rbegin();
  for (; ia != a.f.rend() && ib != b.f.rend(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first;
    if (ia->second != ib->second) return ia->second < ib->second;
  }
  return ia == a.f.rend() && ib != b.f.rend();
}

static monomial mono_mul_raw(const monomial& a, const monomial& b) {
  monomial r;
  r.f.reserve(a.f.size() + b.f.size());
  std::size_t i = 0, j = 0;
  while (i < a.f.size() && j < b.f.size()) {
    if (a.f[i].first == b.f[j].first) {
      r.f.emplace_back(a.f[i].first, a.f[i].second + b.f[j].second);
      ++i, ++j;
    } else if (a.f[i].first < b.f[j].first) {
      r.f.push_back(a.f[i++]);
    } else {
      r.f.push_back(b.f[j++]);
    }
  }
  for (; i < a.f.size(); ++i) r.f.push_back(a.f[i]);
  for (; j < b.f.size(); ++j) r.f.push_back(b.f[j]);
  return r;
}

// ---- atom table --------------------------------------------------------

namespace {

struct atom_table {
  std::deque<atom_data> atoms;
  std::unordered_multimap<std::uint64_t, atom_id> index;
  std::unordered_map<std::string, atom_id> vars;
  mutable std::shared_mutex mtx;
};

atom_table& table() {
  static atom_table t;
  return t;
}

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t hash_rat(const rat& q) {
  std::uint64_t h = mpz_getlimbn(q.get_num_mpz_t(), 0);
  h = hash_mix(h, mpz_getlimbn(q.get_den_mpz_t(), 0));
  h = hash_mix(h, (std::uint64_t)mpz_sgn(q.get_num_mpz_t()) + 2);
  return h;
}

std::uint64_t hash_poly(const polynomial& p) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto& [m, c] : p.t) {
    for (auto& [id, e] : m.f) {
      h = hash_mix(h, id);
      h = hash_mix(h, e);
    }
    h = hash_mix(h, hash_rat(c));
  }
  return h;
}

std::uint64_t hash_expr(const expr& e) {
  return hash_mix(hash_poly(e.num()), hash_poly(e.den()));
}

std::uint64_t hash_atom(const atom_data& a) {
  std::uint64_t h = (std::uint64_t)a.kind;
  h = hash_mix(h, std::hash<std::string>{}(a.name));
  for (auto& x : a.args) h = hash_mix(h, hash_expr(x));
  for (auto d : a.dindex) h = hash_mix(h, d);
  h = hash_mix(h, a.root);
  h = hash_mix(h, hash_expr(a.spow));
  return h;
}

bool atom_equal(const atom_data& a, const atom_data& b) {
  return a.kind == b.kind && a.name == b.name && a.root == b.root &&
         a.dindex == b.dindex && a.args == b.args && a.spow == b.spow;
}

atom_id intern_atom(atom_data a) {
  auto& t = table();
  std::uint64_t h = hash_atom(a);
  {
    std::shared_lock lk(t.mtx);
    auto [lo, hi] = t.index.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (atom_equal(t.atoms[it->second], a)) return it->second;
  }
  std::unique_lock lk(t.mtx);
  auto [lo, hi] = t.index.equal_range(h);
  for (auto it = lo; it != hi; ++it)
    if (atom_equal(t.atoms[it->second], a)) return it->second;
  atom_id id = (atom_id)t.atoms.size();
  t.atoms.push_back(std::move(a));
  t.index.emplace(h, id);
  if (t.atoms[id].kind == atom_kind::var) t.vars.emplace(t.atoms[id].name, id);
  return id;
}

}  // namespace

const atom_data& atom_info(atom_id id) {
  auto& t = table();
  std::shared_lock lk(t.mtx);
  return t.atoms.at(id);
}

atom_id intern_variable(const std::string& name) {
  {
    auto& t = table();
    std::shared_lock lk(t.mtx);
    auto it = t.vars.find(name);
    if (it != t.vars.end()) return it->second;
  }
  atom_data a;
  a.kind = atom_kind::var;
  a.name = name;
  return intern_atom(std::move(a));
}

std::optional<atom_id> find_variable(const std::string& name) {
  auto& t = table();
  std::shared_lock lk(t.mtx);
  auto it = t.vars.find(name);
  if (it == t.vars.end()) return std::nullopt;
  return it->second;
}

// ---- polynomial arithmetic ---------------------------------------------

polynomial poly_const(const rat& c) {
  polynomial p;
  if (c != 0) p.t.emplace_back(monomial{}, c);
  return p;
}

rat polynomial::constant_value() const {
  if (t.empty()) return rat(0);
  assert(is_constant());
  return t[0].second;
}

polynomial poly_add(const polynomial& a, const polynomial& b) {
  polynomial r;
  r.t.reserve(a.t.size() + b.t.size());
  std::size_t i = 0, j = 0;
  while (i < a.t.size() && j < b.t.size()) {
    const auto& ta = a.t[i];
    const auto& tb = b.t[j];
    if (ta.first == tb.first) {
      rat c = ta.second + tb.second;
      if (c != 0) r.t.emplace_back(ta.first, c);
      ++i, ++j;
    } else if (mono_less(tb.first, ta.first)) {
      r.t.push_back(ta);
      ++i;
    } else {
      r.t.push_back(tb);
      ++j;
    }
  }
  for (; i < a.t.size(); ++i) r.t.push_back(a.t[i]);
  for (; j < b.t.size(); ++j) r.t.push_back(b.t[j]);
  return r;
}

polynomial poly_neg(const polynomial& a) {
  polynomial r = a;
  for (auto& [m, c] : r.t) c = -c;
  return r;
}

namespace {

// forward declarations used by term normalization
void add_term_normalized(polynomial& acc, const rat& c, const monomial& m);

polynomial poly_mul_n(const polynomial& a, const polynomial& b) {
  polynomial acc;
  for (auto& [ma, ca] : a.t)
    for (auto& [mb, cb] : b.t)
      add_term_normalized(acc, ca * cb, mono_mul_raw(ma, mb));
  return acc;
}

// Rewrites a raw term into normal form:
//   - radical atoms with exponent >= root are reduced against their base
//   - several exp factors (or an exp power != 1) merge into one exp atom
//   - same-base symbolic powers combine
// The result is accumulated into acc (sorted insertion).
void add_term_sorted(polynomial& acc, const rat& c, const monomial& m) {
  if (c == 0) return;
  auto pos = std::lower_bound(
      acc.t.begin(), acc.t.end(), m,
      [](const std::pair<monomial, rat>& t, const monomial& k) {
        return mono_less(k, t.first);
      });
  if (pos != acc.t.end() && pos->first == m) {
    pos->second += c;
    if (pos->second == 0) acc.t.erase(pos);
  } else {
    acc.t.insert(pos, std::make_pair(m, c));
  }
}

void add_expr_times(polynomial& acc, const rat& c, const monomial& m,
                    const expr& factor);

void add_term_normalized(polynomial& acc, const rat& c, const monomial& m) {
  if (c == 0) return;
  // radical reduction
  for (std::size_t i = 0; i < m.f.size(); ++i) {
    const atom_data& a = atom_info(m.f[i].first);
    if (a.kind == atom_kind::radical && m.f[i].second >= a.root) {
      std::uint32_t q = m.f[i].second / a.root, rem = m.f[i].second % a.root;
      monomial rest = m;
      if (rem)
        rest.f[i].second = rem;
      else
        rest.f.erase(rest.f.begin() + i);
      expr factor = pow_int(a.args[0], (long)q);
      add_expr_times(acc, c, rest, factor);
      return;
    }
  }
  // exp merging
  {
    int nexp = 0;
    bool power_gt1 = false;
    for (auto& [id, e] : m.f) {
      if (atom_info(id).kind == atom_kind::fexp) {
        ++nexp;
        if (e > 1) power_gt1 = true;
      }
    }
    if (nexp > 1 || (nexp == 1 && power_gt1)) {
      expr merged(0L);
      monomial rest;
      for (auto& [id, e] : m.f) {
        const atom_data& a = atom_info(id);
        if (a.kind == atom_kind::fexp)
          merged += expr((long)e) * a.args[0];
        else
          rest.f.emplace_back(id, e);
      }
      add_expr_times(acc, c, rest, make_exp(merged));
      return;
    }
  }
  // symbolic-power merging (same base appearing more than once)
  for (std::size_t i = 0; i < m.f.size(); ++i) {
    const atom_data& ai = atom_info(m.f[i].first);
    if (ai.kind != atom_kind::sympow) continue;
    for (std::size_t j = i + 1; j < m.f.size(); ++j) {
      const atom_data& aj = atom_info(m.f[j].first);
      if (aj.kind != atom_kind::sympow) continue;
      if (!(ai.args[0] == aj.args[0])) continue;
      expr total = ai.spow * expr((long)m.f[i].second) +
                   aj.spow * expr((long)m.f[j].second);
      monomial rest;
      for (std::size_t k = 0; k < m.f.size(); ++k)
        if (k != i && k != j) rest.f.push_back(m.f[k]);
      add_expr_times(acc, c, rest, make_power(ai.args[0], total));
      return;
    }
  }
  add_term_sorted(acc, c, m);
}

// acc += c * m * factor, where factor is a general expr.  Division by the
// factor's denominator is legal here only when it is constant; rewrite
// rules are arranged so this holds (radical bases and sympow bases are
// polynomials).
void add_expr_times(polynomial& acc, const rat& c, const monomial& m,
                    const expr& factor) {
  assert(factor.den().is_constant());
  rat scale = c / factor.den().constant_value();
  for (auto& [mf, cf] : factor.num().t)
    add_term_normalized(acc, scale * cf, mono_mul_raw(m, mf));
}

rat poly_content(const polynomial& p) {
  // positive rational content: gcd of numerators over lcm of denominators
  if (p.t.empty()) return rat(0);
  mpz_class g = 0, l = 1;
  for (auto& [m, c] : p.t) {
    mpz_class n = c.get_num();
    mpz_class d = c.get_den();
    mpz_abs(n.get_mpz_t(), n.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
  }
  rat c(g, l);
  c.canonicalize();
  return c;
}

polynomial poly_scale(const polynomial& p, const rat& c) {
  if (c == 0) return polynomial{};
  polynomial r = p;
  for (auto& [m, co] : r.t) co *= c;
  return r;
}

}  // namespace

polynomial poly_mul(const polynomial& a, const polynomial& b) {
  return poly_mul_n(a, b);
}

// ---- expr --------------------------------------------------------------

polynomial expr::poly_one() { return poly_const(rat(1)); }

expr::expr(long n) : num_(poly_const(rat_from_long(n))), den_(poly_one()) {}
expr::expr(const rat& q) : num_(poly_const(q)), den_(poly_one()) {}

expr make_fraction_reduced(polynomial num, polynomial den) {
  if (den.is_zero()) throw eval_error("division by zero");
  expr r;
  if (num.is_zero()) {
    r.num_ = polynomial{};
    r.den_ = expr::poly_one();
    return r;
  }
  if (!den.is_constant()) {
    polynomial g = poly_gcd(num, den);
    if (!g.is_constant()) {
      polynomial q, rem;
      bool ok = poly_divide(num, g, q, rem);
      assert(ok && rem.is_zero());
      (void)ok;
      num = q;
      ok = poly_divide(den, g, q, rem);
      assert(ok && rem.is_zero());
      den = q;
    }
  }
  // normalize: denominator integer-primitive with positive leading coeff
  rat c = poly_content(den);
  if (den.t.front().second < 0) c = -c;
  r.num_ = poly_scale(num, 1 / c);
  r.den_ = poly_scale(den, 1 / c);
  return r;
}

expr expr::from_poly(polynomial p) {
  expr r;
  r.num_ = std::move(p);
  r.den_ = poly_one();
  return r;
}

expr expr::from_fraction(polynomial num, polynomial den) {
  return make_fraction_reduced(std::move(num), std::move(den));
}

rat expr::rational_value() const {
  assert(is_rational());
  if (num_.is_zero()) return rat(0);
  return num_.constant_value() / den_.constant_value();
}

expr expr::operator-() const {
  expr r = *this;
  r.num_ = poly_neg(r.num_);
  return r;
}

expr expr::operator+(const expr& o) const {
  if (den_ == o.den_)
    return make_fraction_reduced(poly_add(num_, o.num_), den_);
  polynomial n =
      poly_add(poly_mul(num_, o.den_), poly_mul(o.num_, den_));
  return make_fraction_reduced(std::move(n), poly_mul(den_, o.den_));
}

expr expr::operator-(const expr& o) const { return *this + (-o); }

expr expr::operator*(const expr& o) const {
  return make_fraction_reduced(poly_mul(num_, o.num_), poly_mul(den_, o.den_));
}

expr expr::operator/(const expr& o) const {
  if (o.is_zero()) throw eval_error("division by zero");
  return make_fraction_reduced(poly_mul(num_, o.den_), poly_mul(den_, o.num_));
}

// ---- constructors ------------------------------------------------------

expr make_atom_expr(atom_id id) {
  polynomial p;
  monomial m;
  m.f.emplace_back(id, 1);
  p.t.emplace_back(std::move(m), rat(1));
  return expr::from_poly(std::move(p));
}

expr make_variable(const std::string& name) {
  return make_atom_expr(intern_variable(name));
}

expr make_opaque(const std::string& name, std::vector<expr> args,
                 std::vector<std::uint32_t> dindex) {
  if (dindex.empty()) dindex.assign(args.size(), 0);
  if (dindex.size() != args.size())
    throw eval_error("opaque symbol: derivative index length mismatch");
  atom_data a;
  a.kind = atom_kind::opaque;
  a.name = name;
  a.args = std::move(args);
  a.dindex = std::move(dindex);
  return make_atom_expr(intern_atom(std::move(a)));
}

expr make_exp(const expr& arg) {
  if (arg.is_zero()) return expr(1L);
  expr residual(0L);
  expr factors(1L);
  if (arg.den().is_constant()) {
    rat dc = arg.den().constant_value();
    for (auto& [m, c] : arg.num().t) {
      // peel off q*log(u) terms
      if (m.f.size() == 1 && m.f[0].second == 1 &&
          atom_info(m.f[0].first).kind == atom_kind::flog) {
        factors *= make_power(atom_info(m.f[0].first).args[0], expr(c / dc));
      } else {
        polynomial one_term;
        one_term.t.emplace_back(m, c / dc);
        residual += expr::from_poly(std::move(one_term));
      }
    }
  } else {
    residual = arg;
  }
  if (!residual.is_zero()) {
    atom_data a;
    a.kind = atom_kind::fexp;
    a.args.push_back(residual);
    factors *= make_atom_expr(intern_atom(std::move(a)));
  }
  return factors;
}

expr make_log(const expr& arg) {
  if (arg.is_zero()) throw eval_error("log of zero");
  if (arg.is_rational() && arg.rational_value() == 1) return expr(0L);
  // log(exp(u)) -> u for a bare exp atom
  if (arg.den().is_constant() && arg.num().t.size() == 1) {
    auto& [m, c] = arg.num().t[0];
    if (m.f.size() == 1 && m.f[0].second == 1 &&
        atom_info(m.f[0].first).kind == atom_kind::fexp &&
        c / arg.den().constant_value() == 1)
      return atom_info(m.f[0].first).args[0];
  }
  atom_data a;
  a.kind = atom_kind::flog;
  a.args.push_back(arg);
  return make_atom_expr(intern_atom(std::move(a)));
}

expr pow_int(const expr& base, long k) {
  if (k == 0) return expr(1L);
  if (k < 0) return expr(1L) / pow_int(base, -k);
  expr acc(1L);
  expr b = base;
  unsigned long n = (unsigned long)k;
  while (n) {
    if (n & 1) acc *= b;
    b = (n >>= 1) ? b * b : b;
  }
  return acc;
}

namespace {

// exact r-th root of a non-negative integer, if it exists
bool exact_root_z(const mpz_class& n, unsigned r, mpz_class& out) {
  mpz_class root;
  int isexact = mpz_root(root.get_mpz_t(), n.get_mpz_t(), r);
  if (isexact) {
    out = root;
    return true;
  }
  return false;
}

// split |c| = s^r * rest with s maximal among divisors built from full roots
// and small primes
void split_perfect_power(const mpz_class& n_in, unsigned r, mpz_class& s,
                         mpz_class& rest) {
  s = 1;
  rest = n_in;
  if (rest == 0 || rest == 1) return;
  mpz_class root;
  if (exact_root_z(rest, r, root)) {
    s = root;
    rest = 1;
    return;
  }
  static const unsigned long primes[] = {2, 3, 5, 7, 11, 13};
  for (unsigned long p : primes) {
    mpz_class pr;
    mpz_ui_pow_ui(pr.get_mpz_t(), p, r);
    while (mpz_divisible_p(rest.get_mpz_t(), pr.get_mpz_t())) {
      rest /= pr;
      s *= (long)p;
    }
  }
}

expr radical_of_atom(atom_id id, const rat& expo);

// base^(1/r) with r >= 2 for a polynomial base (den of the expr must be 1)
expr radical_of_poly(const polynomial& base, unsigned r) {
  if (base.is_zero()) return expr(0L);
  if (base.is_constant()) {
    rat c = base.constant_value();
    bool neg = c < 0;
    rat a = neg ? rat(-c) : c;
    mpz_class sn, rn, sd, rd;
    split_perfect_power(a.get_num(), r, sn, rn);
    split_perfect_power(a.get_den(), r, sd, rd);
    rat outside(sn, sd);
    outside.canonicalize();
    rat inside(rn, rd);
    inside.canonicalize();
    expr out(outside);
    if (neg) {
      if (r % 2 == 1)
        out = -out;
      else
        inside = -inside;
    }
    if (inside == 1) return out;
    atom_data ad;
    ad.kind = atom_kind::radical;
    ad.args.push_back(expr(inside));
    ad.root = r;
    return out * make_atom_expr(intern_atom(std::move(ad)));
  }
  if (base.t.size() == 1) {
    // monomial base: distribute the root over the factors
    auto& [m, c] = base.t[0];
    expr out = radical_of_poly(poly_const(c), r);
    for (auto& [id, e] : m.f)
      out = out * radical_of_atom(id, rat(e, r));
    return out;
  }
  // multi-term base: pull out the perfect r-th power part of the content
  rat c = poly_content(base);
  bool neg = base.t.front().second < 0;
  if (neg && r % 2 == 1) c = -c;  // odd roots absorb the sign
  polynomial prim = poly_scale(base, 1 / c);
  rat croot_in;
  expr out(1L);
  {
    bool cn = c < 0;
    rat a = cn ? rat(-c) : c;
    mpz_class sn, rn, sd, rd;
    split_perfect_power(a.get_num(), r, sn, rn);
    split_perfect_power(a.get_den(), r, sd, rd);
    rat outside(sn, sd);
    outside.canonicalize();
    croot_in = rat(rn, rd);
    croot_in.canonicalize();
    if (cn) {
      if (r % 2 == 1)
        outside = -outside;
      else
        croot_in = -croot_in;
    }
    out = expr(outside);
  }
  polynomial inner = poly_scale(prim, croot_in);
  atom_data ad;
  ad.kind = atom_kind::radical;
  ad.args.push_back(expr::from_poly(inner));
  ad.root = r;
  return out * make_atom_expr(intern_atom(std::move(ad)));
}

// atom^expo for rational expo with canonical splitting per atom kind.
// sympow atoms are deliberately not unwrapped here: base^((p/q)*s) is
// canonically a radical over the sympow atom base^s.
expr radical_of_atom(atom_id id, const rat& expo) {
  const atom_data& a = atom_info(id);
  if (expo == 0) return expr(1L);
  switch (a.kind) {
    case atom_kind::radical:
      return make_power(a.args[0], expr(expo / rat((long)a.root)));
    case atom_kind::fexp:
      return make_exp(a.args[0] * expr(expo));
    default:
      break;
  }
  mpz_class num = expo.get_num(), den = expo.get_den();
  if (den == 1) return pow_int(make_atom_expr(id), num.get_si());
  atom_data ad;
  ad.kind = atom_kind::radical;
  ad.args.push_back(make_atom_expr(id));
  ad.root = (std::uint32_t)den.get_ui();
  expr r = make_atom_expr(intern_atom(std::move(ad)));
  return pow_int(r, num.get_si());
}

expr sympow_of_poly(const polynomial& base, const expr& s);

// base^s for a non-constant, primitive exponent s
expr sympow_atom(const polynomial& base, const expr& s) {
  atom_data ad;
  ad.kind = atom_kind::sympow;
  ad.args.push_back(expr::from_poly(base));
  ad.spow = s;
  return make_atom_expr(intern_atom(std::move(ad)));
}

expr sympow_of_atom(atom_id id, const expr& s) {
  const atom_data& a = atom_info(id);
  switch (a.kind) {
    case atom_kind::radical:
      return make_power(a.args[0], s / expr(rat((long)a.root)));
    case atom_kind::sympow:
      return make_power(a.args[0], a.spow * s);
    case atom_kind::fexp:
      return make_exp(a.args[0] * s);
    default:
      break;
  }
  polynomial p;
  monomial m;
  m.f.emplace_back(id, 1);
  p.t.emplace_back(std::move(m), rat(1));
  // split s = c * s1 with s1 primitive
  rat c = poly_content(s.num());
  if (s.num().t.front().second < 0) c = -c;
  expr s1 = expr::from_fraction(poly_scale(s.num(), 1 / c), s.den());
  expr a1 = sympow_atom(p, s1);
  mpz_class den = c.get_den();
  if (den == 1) return pow_int(a1, c.get_num().get_si());
  return radical_of_atom(
      a1.num().t[0].first.f[0].first, c);
}

expr sympow_of_poly(const polynomial& base, const expr& s) {
  if (base.is_zero()) throw eval_error("0 raised to a symbolic power");
  if (base.is_constant()) {
    rat c = base.constant_value();
    if (c == 1) return expr(1L);
    rat ccont = poly_content(s.num());
    if (s.num().t.front().second < 0) ccont = -ccont;
    expr s1 = expr::from_fraction(poly_scale(s.num(), 1 / ccont), s.den());
    expr ca = sympow_atom(poly_const(c), s1);
    atom_id id = ca.num().t[0].first.f[0].first;
    return (ccont.get_den() == 1) ? pow_int(ca, ccont.get_num().get_si())
                                  : radical_of_atom(id, ccont);
  }
  if (base.t.size() == 1) {
    auto& [m, c] = base.t[0];
    expr out(1L);
    if (c != 1) out = sympow_of_poly(poly_const(c), s);
    for (auto& [id, e] : m.f)
      out = out * sympow_of_atom(id, s * expr((long)e));
    return out;
  }
  // multi-term: extract positive content
  rat c = poly_content(base);
  polynomial prim = poly_scale(base, 1 / c);
  expr out(1L);
  if (c != 1) out = sympow_of_poly(poly_const(c), s);
  rat ccont = poly_content(s.num());
  if (s.num().t.front().second < 0) ccont = -ccont;
  expr s1 = expr::from_fraction(poly_scale(s.num(), 1 / ccont), s.den());
  expr a1 = sympow_atom(prim, s1);
  atom_id id = a1.num().t[0].first.f[0].first;
  expr apow = (ccont.get_den() == 1)
                  ? pow_int(a1, ccont.get_num().get_si())
                  : radical_of_atom(id, ccont);
  return out * apow;
}

}  // namespace

expr make_power(const expr& base, const expr& exponent) {
  if (exponent.is_zero()) return expr(1L);
  if (exponent.is_rational()) {
    rat q = exponent.rational_value();
    if (q.get_den() == 1) return pow_int(base, q.get_num().get_si());
    if (base.is_zero()) {
      if (q > 0) return expr(0L);
      throw eval_error("0 raised to a negative power");
    }
    // rationalize so the radical base is a polynomial
    unsigned r = (unsigned)q.get_den().get_ui();
    polynomial base_poly = base.num();
    expr denom_correction(1L);
    if (!base.den().is_constant()) {
      base_poly = poly_mul(base.num(), [&] {
        polynomial d = expr::poly_one();
        for (unsigned i = 0; i + 1 < r; ++i) d = poly_mul(d, base.den());
        return d;
      }());
      denom_correction = expr::from_poly(base.den());
    } else {
      rat dc = base.den().constant_value();
      base_poly = poly_scale(base_poly, 1 / dc);
    }
    expr root = radical_of_poly(base_poly, r);
    long p = q.get_num().get_si();
    expr result = pow_int(root, p);
    if (!(denom_correction == expr(1L)))
      result = result / pow_int(denom_correction, p);
    return result;
  }
  // non-constant exponent: split off the rational constant part
  expr c0(0L), rest = exponent;
  if (exponent.den().is_constant()) {
    rat dc = exponent.den().constant_value();
    for (auto& [m, c] : exponent.num().t)
      if (m.f.empty()) {
        c0 = expr(c / dc);
        rest = exponent - c0;
        break;
      }
  }
  if (base.is_zero()) throw eval_error("0 raised to a symbolic power");
  expr out(1L);
  if (!c0.is_zero()) out = make_power(base, c0);
  // distribute over the fraction
  expr nume = sympow_of_poly(base.num(), rest);
  if (!base.den().is_constant()) {
    expr deno = sympow_of_poly(base.den(), rest);
    return out * nume / deno;
  }
  rat dc = base.den().constant_value();
  if (dc != 1) out = out / sympow_of_poly(poly_const(dc), rest);
  return out * nume;
}

// ---- differentiation ---------------------------------------------------

namespace {

expr atom_derivative(atom_id id, atom_id v) {
  const atom_data& a = atom_info(id);
  switch (a.kind) {
    case atom_kind::var:
      return expr(id == v ? 1L : 0L);
    case atom_kind::opaque: {
      expr total(0L);
      for (std::size_t j = 0; j < a.args.size(); ++j) {
        expr da = diff(a.args[j], v);
        if (da.is_zero()) continue;
        auto didx = a.dindex;
        ++didx[j];
        total += make_opaque(a.name, a.args, didx) * da;
      }
      return total;
    }
    case atom_kind::fexp:
      return make_atom_expr(id) * diff(a.args[0], v);
    case atom_kind::flog:
      return diff(a.args[0], v) / a.args[0];
    case atom_kind::radical: {
      expr db = diff(a.args[0], v);
      if (db.is_zero()) return expr(0L);
      return db * make_atom_expr(id) / (expr((long)a.root) * a.args[0]);
    }
    case atom_kind::sympow: {
      expr db = diff(a.args[0], v);
      expr ds = diff(a.spow, v);
      expr total(0L);
      if (!db.is_zero()) total += a.spow * db / a.args[0];
      if (!ds.is_zero()) total += ds * make_log(a.args[0]);
      if (total.is_zero()) return expr(0L);
      return make_atom_expr(id) * total;
    }
  }
  return expr(0L);
}

expr poly_derivative(const polynomial& p, atom_id v) {
  expr total(0L);
  for (auto& [m, c] : p.t) {
    for (std::size_t i = 0; i < m.f.size(); ++i) {
      expr da = atom_derivative(m.f[i].first, v);
      if (da.is_zero()) continue;
      monomial rest = m;
      if (rest.f[i].second > 1)
        --rest.f[i].second;
      else
        rest.f.erase(rest.f.begin() + i);
      polynomial mono;
      mono.t.emplace_back(monomial{}, c * rat((long)m.f[i].second));
      polynomial restp;
      restp.t.emplace_back(rest, rat(1));
      total += expr::from_poly(poly_mul_n(mono, restp)) * da;
    }
  }
  return total;
}

}  // namespace

expr diff(const expr& e, atom_id v) {
  expr dn = poly_derivative(e.num(), v);
  if (e.den().is_constant()) {
    return dn / expr(e.den().constant_value());
  }
  expr dd = poly_derivative(e.den(), v);
  expr den = expr::from_poly(e.den());
  expr num = expr::from_poly(e.num());
  return (dn * den - num * dd) / (den * den);
}

expr diff(const expr& e, const std::string& var) {
  return diff(e, intern_variable(var));
}

// ---- substitution ------------------------------------------------------

namespace {

struct subst_ctx {
  const std::map<std::string, expr>* bindings;
  std::map<atom_id, expr> memo;
};

expr subst_expr(const expr& e, subst_ctx& ctx);

expr subst_atom(atom_id id, subst_ctx& ctx) {
  auto it = ctx.memo.find(id);
  if (it != ctx.memo.end()) return it->second;
  const atom_data& a = atom_info(id);
  expr r = make_atom_expr(id);
  switch (a.kind) {
    case atom_kind::var: {
      auto b = ctx.bindings->find(a.name);
      if (b != ctx.bindings->end()) r = b->second;
      break;
    }
    case atom_kind::opaque: {
      std::vector<expr> args;
      bool changed = false;
      for (auto& x : a.args) {
        expr s = subst_expr(x, ctx);
        changed = changed || !(s == x);
        args.push_back(std::move(s));
      }
      if (changed) r = make_opaque(a.name, std::move(args), a.dindex);
      break;
    }
    case atom_kind::fexp: {
      expr s = subst_expr(a.args[0], ctx);
      if (!(s == a.args[0])) r = make_exp(s);
      break;
    }
    case atom_kind::flog: {
      expr s = subst_expr(a.args[0], ctx);
      if (!(s == a.args[0])) r = make_log(s);
      break;
    }
    case atom_kind::radical: {
      expr s = subst_expr(a.args[0], ctx);
      if (!(s == a.args[0]))
        r = make_power(s, expr(rat(1, (long)a.root)));
      break;
    }
    case atom_kind::sympow: {
      expr sb = subst_expr(a.args[0], ctx);
      expr ss = subst_expr(a.spow, ctx);
      if (!(sb == a.args[0]) || !(ss == a.spow)) r = make_power(sb, ss);
      break;
    }
  }
  ctx.memo.emplace(id, r);
  return r;
}

expr subst_poly(const polynomial& p, subst_ctx& ctx) {
  expr total(0L);
  for (auto& [m, c] : p.t) {
    expr term{c};
    for (auto& [id, e] : m.f) term *= pow_int(subst_atom(id, ctx), (long)e);
    total += term;
  }
  return total;
}

expr subst_expr(const expr& e, subst_ctx& ctx) {
  expr n = subst_poly(e.num(), ctx);
  if (e.den().is_constant()) return n / expr(e.den().constant_value());
  return n / subst_poly(e.den(), ctx);
}

}  // namespace

expr substitute(const expr& e, const std::map<std::string, expr>& bindings) {
  if (bindings.empty()) return e;
  subst_ctx ctx{&bindings, {}};
  return subst_expr(e, ctx);
}

// ---- misc --------------------------------------------------------------

bool has_inexact_atoms(const expr& e) {
  for (atom_id id : collect_atoms(e)) {
    atom_kind k = atom_info(id).kind;
    if (k != atom_kind::var && k != atom_kind::opaque) return true;
  }
  return false;
}

namespace {
void collect_atoms_rec(const expr& e, std::vector<atom_id>& out,
                       std::vector<bool>& seen);

void collect_from_poly(const polynomial& p, std::vector<atom_id>& out,
                       std::vector<bool>& seen) {
  for (auto& [m, c] : p.t)
    for (auto& [id, _] : m.f) {
      if (id < seen.size() && seen[id]) continue;
      if (id >= seen.size()) seen.resize(id + 1, false);
      seen[id] = true;
      out.push_back(id);
      const atom_data& a = atom_info(id);
      for (auto& x : a.args) collect_atoms_rec(x, out, seen);
      if (a.kind == atom_kind::sympow) collect_atoms_rec(a.spow, out, seen);
    }
}

void collect_atoms_rec(const expr& e, std::vector<atom_id>& out,
                       std::vector<bool>& seen) {
  collect_from_poly(e.num(), out, seen);
  collect_from_poly(e.den(), out, seen);
}
}  // namespace

std::vector<atom_id> collect_atoms(const expr& e) {
  std::vector<atom_id> out;
  std::vector<bool> seen;
  collect_atoms_rec(e, out, seen);
  return out;
}

bool is_exactly_zero(const expr& e) { return e.num().is_zero(); }

// ---- variable views ------------------------------------------------------

namespace {
void require_poly_in(const expr& e, atom_id v) {
  for (auto& [m, c] : e.den().t)
    for (auto& [id, _] : m.f)
      if (id == v)
        throw eval_error("value is not polynomial in " + atom_info(v).name);
}
}  // namespace

long degree_in(const expr& e, atom_id v) {
  require_poly_in(e, v);
  long d = 0;
  for (auto& [m, c] : e.num().t)
    for (auto& [id, k] : m.f)
      if (id == v) d = std::max(d, (long)k);
  return d;
}

long degree_in(const expr& e, const std::string& v) {
  return degree_in(e, intern_variable(v));
}

expr coeff_of(const expr& e, atom_id v, unsigned k) {
  require_poly_in(e, v);
  polynomial out;
  for (auto& [m, c] : e.num().t) {
    unsigned deg = 0;
    monomial rest;
    for (auto& [id, ke] : m.f) {
      if (id == v)
        deg = ke;
      else
        rest.f.emplace_back(id, ke);
    }
    if (deg != k) continue;
    polynomial term;
    term.t.emplace_back(std::move(rest), c);
    out = poly_add(out, term);
  }
  return expr::from_fraction(std::move(out), e.den());
}

expr coeff_of(const expr& e, const std::string& v, unsigned k) {
  return coeff_of(e, intern_variable(v), k);
}

std::map<std::vector<unsigned>, expr> collect_terms(
    const expr& e, const std::vector<atom_id>& vars) {
  for (atom_id v : vars) require_poly_in(e, v);
  std::map<std::vector<unsigned>, expr> out;
  std::map<std::vector<unsigned>, polynomial> buckets;
  for (auto& [m, c] : e.num().t) {
    std::vector<unsigned> key(vars.size(), 0);
    monomial rest;
    for (auto& [id, k] : m.f) {
      bool hit = false;
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == id) {
          key[i] = k;
          hit = true;
          break;
        }
      if (!hit) rest.f.emplace_back(id, k);
    }
    polynomial term;
    term.t.emplace_back(std::move(rest), c);
    buckets[key] = poly_add(buckets[key], term);
  }
  for (auto& [key, p] : buckets) {
    expr val = expr::from_fraction(p, e.den());
    if (!val.is_zero()) out.emplace(key, std::move(val));
  }
  return out;
}

// ---- rng ---------------------------------------------------------------

std::uint64_t rng::next() {
  // splitmix64
  s_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

long rng::next_int(long lo, long hi) {
  return lo + (long)(next() % (std::uint64_t)(hi - lo + 1));
}

rat rng::next_rational(long bound) {
  long n = next_int(-bound, bound);
  long d = next_int(1, bound);
  return rat_from_long(n, d);
}

}  // namespace cayley
