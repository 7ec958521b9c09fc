#include "cayley/expr.hpp"

#include <algorithm>
#include <cassert>

// Multivariate gcd and exact division used for fraction reduction. The
// polynomials here live in Q[atoms]; gcd is computed up to a rational unit
// by a primitive subresultant remainder sequence recursing on the atom of
// highest id present.

namespace cayley {

namespace {

std::optional<atom_id> main_atom(const polynomial& p) {
  std::optional<atom_id> best;
  for (auto& [m, c] : p.t)
    for (auto& [id, e] : m.f)
      if (!best || id > *best) best = id;
  return best;
}

// view p as univariate in v: degree -> coefficient polynomial
std::vector<polynomial> univariate_view(const polynomial& p, atom_id v) {
  std::vector<polynomial> coeffs;
  for (auto& [m, c] : p.t) {
    std::uint32_t deg = 0;
    monomial rest;
    for (auto& [id, e] : m.f) {
      if (id == v)
        deg = e;
      else
        rest.f.emplace_back(id, e);
    }
    if (coeffs.size() <= deg) coeffs.resize(deg + 1);
    polynomial term;
    term.t.emplace_back(std::move(rest), c);
    coeffs[deg] = poly_add(coeffs[deg], term);
  }
  while (!coeffs.empty() && coeffs.back().is_zero()) coeffs.pop_back();
  return coeffs;
}

polynomial from_univariate(const std::vector<polynomial>& coeffs, atom_id v) {
  polynomial r;
  for (std::size_t d = 0; d < coeffs.size(); ++d) {
    if (coeffs[d].is_zero()) continue;
    polynomial vp = expr::poly_one();
    if (d > 0) {
      monomial m;
      m.f.emplace_back(v, (std::uint32_t)d);
      vp.t.clear();
      vp.t.emplace_back(std::move(m), rat(1));
    }
    r = poly_add(r, poly_mul(coeffs[d], vp));
  }
  return r;
}

bool mono_divides(const monomial& a, const monomial& b) {
  // does a divide b
  std::size_t i = 0;
  for (auto& [id, e] : a.f) {
    while (i < b.f.size() && b.f[i].first < id) ++i;
    if (i >= b.f.size() || b.f[i].first != id || b.f[i].second < e)
      return false;
  }
  return true;
}

monomial mono_quot(const monomial& b, const monomial& a) {
  monomial r;
  std::size_t i = 0;
  for (auto& [id, e] : b.f) {
    std::uint32_t sub = 0;
    while (i < a.f.size() && a.f[i].first < id) ++i;
    if (i < a.f.size() && a.f[i].first == id) sub = a.f[i].second;
    if (e > sub) r.f.emplace_back(id, e - sub);
  }
  return r;
}

polynomial poly_mul_term(const polynomial& p, const monomial& m, const rat& c) {
  polynomial t;
  t.t.emplace_back(m, c);
  return poly_mul(p, t);
}

// pseudo-division of a by b in the variable v; returns the remainder of
// lc(b)^(da-db+1) * a = q*b + r
polynomial pseudo_rem(const polynomial& a, const polynomial& b, atom_id v) {
  auto av = univariate_view(a, v);
  auto bv = univariate_view(b, v);
  assert(!bv.empty());
  long db = (long)bv.size() - 1;
  polynomial lcb = bv[db];
  std::vector<polynomial> r = av;
  long dr = (long)r.size() - 1;
  while (dr >= db && !(dr < 0)) {
    while (dr >= 0 && r[dr].is_zero()) --dr;
    if (dr < db) break;
    polynomial lr = r[dr];
    // r = lcb*r - lr * v^(dr-db) * b
    for (long i = 0; i <= dr; ++i) r[i] = poly_mul(r[i], lcb);
    for (long i = 0; i <= db; ++i) {
      long k = i + dr - db;
      r[k] = poly_add(r[k], poly_neg(poly_mul(lr, bv[i])));
    }
    --dr;
  }
  while (!r.empty() && r.back().is_zero()) r.pop_back();
  return from_univariate(r, v);
}

polynomial poly_primitive(const polynomial& p, atom_id v, polynomial& content) {
  auto cv = univariate_view(p, v);
  content = polynomial{};
  for (auto& c : cv) content = poly_gcd(content, c);
  if (content.is_zero() || content.is_constant()) {
    content = expr::poly_one();
    return p;
  }
  polynomial q, rem;
  bool ok = poly_divide(p, content, q, rem);
  assert(ok && rem.is_zero());
  (void)ok;
  return q;
}

rat leading_unit(const polynomial& p) {
  if (p.t.empty()) return rat(1);
  rat c = p.t.front().second;
  return c;
}

}  // namespace

bool poly_divide(const polynomial& a, const polynomial& b, polynomial& quot,
                 polynomial& rem) {
  quot = polynomial{};
  rem = polynomial{};
  if (b.is_zero()) return false;
  if (b.is_constant()) {
    rat inv = 1 / b.constant_value();
    quot = a;
    for (auto& [m, c] : quot.t) c *= inv;
    return true;
  }
  polynomial r = a;
  const monomial& lb = b.t.front().first;
  const rat& cb = b.t.front().second;
  while (!r.is_zero()) {
    const monomial& lr = r.t.front().first;
    if (!mono_divides(lb, lr)) {
      // move the leading term to the remainder
      polynomial lead;
      lead.t.push_back(r.t.front());
      rem = poly_add(rem, lead);
      r.t.erase(r.t.begin());
      continue;
    }
    monomial mq = mono_quot(lr, lb);
    rat cq = r.t.front().second / cb;
    polynomial q1;
    q1.t.emplace_back(mq, cq);
    quot = poly_add(quot, q1);
    r = poly_add(r, poly_neg(poly_mul_term(b, mq, cq)));
  }
  return true;
}

polynomial poly_gcd(const polynomial& a, const polynomial& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_constant() || b.is_constant()) return expr::poly_one();
  if (a == b) return a;
  // single-term fast path: gcd is the common monomial part
  if (a.t.size() == 1 || b.t.size() == 1) {
    const polynomial& mono = a.t.size() == 1 ? a : b;
    const polynomial& other = a.t.size() == 1 ? b : a;
    monomial g = mono.t.front().first;
    for (auto& [m, c] : other.t) {
      monomial ng;
      std::size_t i = 0;
      for (auto& [id, e] : g.f) {
        while (i < m.f.size() && m.f[i].first < id) ++i;
        if (i < m.f.size() && m.f[i].first == id)
          ng.f.emplace_back(id, std::min(e, m.f[i].second));
      }
      g = std::move(ng);
      if (g.f.empty()) break;
    }
    polynomial r;
    r.t.emplace_back(g, rat(1));
    return r;
  }
  auto va = main_atom(a);
  auto vb = main_atom(b);
  atom_id v = std::max(*va, *vb);
  // univariate-in-v gcd by primitive PRS
  polynomial ca, cb;
  polynomial pa = poly_primitive(a, v, ca);
  polynomial pb = poly_primitive(b, v, cb);
  polynomial cont_gcd = poly_gcd(ca, cb);
  auto degree_in = [&](const polynomial& p) {
    long d = 0;
    for (auto& [m, c] : p.t)
      for (auto& [id, e] : m.f)
        if (id == v) d = std::max(d, (long)e);
    return d;
  };
  polynomial f = pa, g = pb;
  if (degree_in(f) < degree_in(g)) std::swap(f, g);
  while (true) {
    if (g.is_zero()) break;
    if (degree_in(g) == 0) {
      // content already removed: coprime in v
      f = expr::poly_one();
      break;
    }
    polynomial r = pseudo_rem(f, g, v);
    polynomial junk;
    r = poly_primitive(r, v, junk);
    f = g;
    g = r;
  }
  if (f.is_constant()) return cont_gcd;
  polynomial junk;
  f = poly_primitive(f, v, junk);
  // normalize sign/content
  rat c = leading_unit(f);
  if (c != 1) {
    for (auto& [m, co] : f.t) co /= c;
  }
  return poly_mul(cont_gcd, f);
}

}  // namespace cayley
