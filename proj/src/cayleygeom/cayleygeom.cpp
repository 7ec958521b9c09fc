#include "cayley/cayleygeom.hpp"

#include <algorithm>
#include <cassert>

namespace cayley {

namespace {

// number of ordered triples realizing the sorted index triple
int triple_multiplicity(int i, int j, int k) {
  if (i == j && j == k) return 1;
  if (i == j || j == k || i == k) return 3;
  return 6;
}

}  // namespace

expr& cubic_form::at(int i, int j, int k) { return c[i][j][k]; }
const expr& cubic_form::at(int i, int j, int k) const { return c[i][j][k]; }

void cubic_form::set_sym(int i, int j, int k, const expr& v) {
  int idx[3] = {i, j, k};
  std::sort(idx, idx + 3);
  do {
    c[idx[0]][idx[1]][idx[2]] = v;
  } while (std::next_permutation(idx, idx + 3));
}

expr cubic_form::evaluate(const std::array<expr, 4>& v) const {
  expr total(0L);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      for (int k = j; k < 4; ++k) {
        if (c[i][j][k].is_zero()) continue;
        total += expr((long)triple_multiplicity(i, j, k)) * c[i][j][k] * v[i] *
                 v[j] * v[k];
      }
  return total;
}

expr cubic_form::as_polynomial(const std::array<expr, 4>& slots) const {
  return evaluate(slots);
}

std::array<expr, 4> cubic_slots() {
  return {make_variable("v0_"), make_variable("v1_"), make_variable("v2_"),
          make_variable("v3_")};
}

cubic_form cubic_from_polynomial(const expr& p,
                                 const std::array<std::string, 4>& slot_names) {
  std::vector<atom_id> vars;
  for (auto& n : slot_names) vars.push_back(intern_variable(n));
  cubic_form out;
  for (auto& [key, coeff] : collect_terms(p, vars)) {
    unsigned deg = key[0] + key[1] + key[2] + key[3];
    if (deg != 3) throw eval_error("cubic_from_polynomial: non-cubic term");
    int idx[3];
    int pos = 0;
    for (int i = 0; i < 4; ++i)
      for (unsigned r = 0; r < key[i]; ++r) idx[pos++] = i;
    int mult = triple_multiplicity(idx[0], idx[1], idx[2]);
    out.set_sym(idx[0], idx[1], idx[2], coeff / expr((long)mult));
  }
  return out;
}

expr primitive_scale(const expr& p) {
  if (p.is_zero()) return p;
  // the denominator is a nonzero scalar; the representative is chosen from
  // the numerator alone (monomial factors and rational content stripped)
  polynomial num = p.num();
  // strip the common monomial factor
  monomial g = num.t.front().first;
  for (auto& [m, c] : num.t) {
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
  expr result = expr::from_poly(num);
  if (!g.f.empty()) {
    polynomial gp;
    gp.t.emplace_back(g, rat(1));
    result = result / expr::from_poly(gp);
  }
  // integer-primitive with positive leading coefficient
  polynomial n2 = result.num();
  mpz_class gg = 0, ll = 1;
  for (auto& [m, c] : n2.t) {
    mpz_class nn = c.get_num();
    mpz_abs(nn.get_mpz_t(), nn.get_mpz_t());
    mpz_gcd(gg.get_mpz_t(), gg.get_mpz_t(), nn.get_mpz_t());
    mpz_lcm(ll.get_mpz_t(), ll.get_mpz_t(), c.get_den_mpz_t());
  }
  rat content(gg, ll);
  content.canonicalize();
  if (n2.t.front().second < 0) content = -content;
  return expr::from_poly(n2) / expr(content) /
         expr(result.den().constant_value());
}

bool cubic_equal_exact(const cubic_form& a, const cubic_form& b) {
  auto slots = cubic_slots();
  expr pa = a.as_polynomial(slots);
  expr pb = b.as_polynomial(slots);
  if (pa.is_zero() || pb.is_zero()) return pa.is_zero() && pb.is_zero();
  return is_exactly_zero(primitive_scale(pa) - primitive_scale(pb));
}

bool cubic_proportional(const cubic_form& a, const cubic_form& b) {
  auto slots = cubic_slots();
  expr pa = a.as_polynomial(slots);
  expr pb = b.as_polynomial(slots);
  if (pa.is_zero() || pb.is_zero()) return pa.is_zero() && pb.is_zero();
  std::vector<atom_id> vars;
  for (auto* s : {"v0_", "v1_", "v2_", "v3_"}) vars.push_back(intern_variable(s));
  auto ta = collect_terms(pa, vars);
  auto tb = collect_terms(pb, vars);
  if (ta.size() != tb.size()) return false;
  auto ia = ta.begin();
  auto ib = tb.begin();
  if (ia->first != ib->first) return false;
  expr a0 = ia->second, b0 = ib->second;
  for (; ia != ta.end() && ib != tb.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!is_zero(ia->second * b0 - ib->second * a0)) return false;
  }
  return true;
}

std::vector<std::vector<expr>> group_element::matrix() const {
  expr z(0L);
  expr a03 = u * v / f0 - u * u * u / (expr(3L) * f0 * f0);
  return {
      {f0, u, v, a03},
      {z, f0 * f1, u * f1, v * f1},
      {z, z, f0 * f1 * f1, u * f1 * f1},
      {z, z, z, f0 * f1 * f1 * f1},
  };
}

std::vector<std::vector<expr>> group_element::inverse() const {
  return matrix_inverse(matrix());
}

cubic_form cubic_from_coframe(const coframe& cf) {
  if (cf.dim() != 4) throw eval_error("cubic_from_coframe: need dimension 4");
  auto slots = cubic_slots();
  std::array<expr, 4> w{expr(0L), expr(0L), expr(0L), expr(0L)};
  for (int i = 0; i < 4; ++i)
    for (auto& [idx, e] : cf.forms[i].coeff) w[i] += e * slots[idx[0]];
  expr rho = w[2] * w[2] * w[2] / expr(3L) + w[0] * w[3] * w[3] -
             w[1] * w[2] * w[3];
  return cubic_from_polynomial(rho, {"v0_", "v1_", "v2_", "v3_"});
}

coframe group_action(const group_element& g, const coframe& cf) {
  auto gi = g.inverse();
  std::vector<diff_form> out;
  for (int i = 0; i < 4; ++i) {
    diff_form w(cf.ch, 1);
    for (int j = 0; j < 4; ++j) w = w + cf.forms[j] * gi[i][j];
    out.push_back(w);
  }
  return coframe(cf.ch, out);
}

ruling_data make_ruling_data(const coframe& cf, const expr& u) {
  auto frame = dual_frame(cf);
  ruling_data rd;
  rd.parameter = u;
  expr third(rat(1, 3));
  rd.annihilators[0] =
      cf.forms[0] + cf.forms[1] * u - cf.forms[3] * (third * u * u * u);
  rd.annihilators[1] = cf.forms[2] + cf.forms[3] * u;
  std::vector<expr> g1(cf.ch.dim(), expr(0L)), g2(cf.ch.dim(), expr(0L));
  for (std::size_t i = 0; i < cf.ch.dim(); ++i) {
    g1[i] = frame[1].comp[i] - u * frame[0].comp[i];
    g2[i] = frame[3].comp[i] - u * frame[2].comp[i] +
            third * u * u * u * frame[0].comp[i];
  }
  rd.gamma1 = vector_field(cf.ch, std::move(g1));
  rd.gamma2 = vector_field(cf.ch, std::move(g2));
  return rd;
}

expr dual_cubic(const std::array<expr, 4>& p) {
  return p[1] * p[1] * p[1] / expr(3L) + p[0] * p[0] * p[3] -
         p[0] * p[1] * p[2];
}

vector_field characteristic_spray(const expr& L, const chart& xy) {
  if (xy.dim() != 8)
    throw eval_error("characteristic_spray: chart must be (x0..x3, y0..y3)");
  std::vector<std::string> x(xy.coords.begin(), xy.coords.begin() + 4);
  std::vector<std::string> y(xy.coords.begin() + 4, xy.coords.end());
  std::vector<std::vector<expr>> hess(4, std::vector<expr>(4, expr(0L)));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) hess[i][j] = diff(diff(L, y[i]), y[j]);
  auto hinv = matrix_inverse(hess);  // throws when the determinant vanishes
  std::vector<expr> comp(8, expr(0L));
  for (int i = 0; i < 4; ++i) comp[i] = make_variable(y[i]);
  for (int j = 0; j < 4; ++j) {
    expr vertical(0L);
    for (int i = 0; i < 4; ++i) {
      expr inner = diff(L, x[i]);
      for (int k = 0; k < 4; ++k)
        inner -= make_variable(y[k]) * diff(diff(L, y[i]), x[k]);
      vertical += hinv[i][j] * inner;
    }
    comp[4 + j] = vertical;
  }
  return vector_field(xy, std::move(comp));
}

cubic_reconstruction cubic_from_solution_family(const solution_family& fam) {
  cubic_reconstruction out;
  auto slots = cubic_slots();
  expr pairing1(0L), pairing2(0L);
  for (int i = 0; i < 4; ++i) {
    pairing1 += diff(fam.z1, fam.cnames[i]) * slots[i];
    pairing2 += diff(fam.z2, fam.cnames[i]) * slots[i];
  }
  atom_id t = intern_variable(fam.tname);
  long d2 = degree_in(pairing2, t);
  if (d2 != 1) {
    out.is_cubic_cone = false;
    out.note = "second pairing is not linear in the curve parameter";
    return out;
  }
  expr a = coeff_of(pairing2, t, 1);
  expr b = coeff_of(pairing2, t, 0);
  expr tstar = -b / a;
  expr cone = substitute(pairing1, {{fam.tname, tstar}});
  expr num = expr::from_poly(cone.num());
  expr prim = primitive_scale(num);
  std::vector<atom_id> vars;
  for (auto* s : {"v0_", "v1_", "v2_", "v3_"}) vars.push_back(intern_variable(s));
  for (auto& [key, coeff] : collect_terms(prim, vars)) {
    unsigned deg = key[0] + key[1] + key[2] + key[3];
    if (deg != 3) {
      out.is_cubic_cone = false;
      out.note = "elimination degree is not 3: found slot degree " +
                 std::to_string(deg);
      out.polynomial = prim;
      return out;
    }
  }
  out.polynomial = prim;
  out.cubic = cubic_from_polynomial(prim, {"v0_", "v1_", "v2_", "v3_"});
  return out;
}

normalize_result normalize_to_cayley(const cubic_form& rho, const coframe& ansatz,
                                     const std::vector<std::string>& unknowns) {
  normalize_result res;
  auto slots = cubic_slots();
  cubic_form m = cubic_from_coframe(ansatz);
  expr scale_var = make_variable("scale_");
  expr target = m.as_polynomial(slots) - scale_var * rho.as_polynomial(slots);
  std::vector<atom_id> vars;
  for (auto* s : {"v0_", "v1_", "v2_", "v3_"}) vars.push_back(intern_variable(s));
  std::vector<expr> eqs;
  for (auto& [key, coeff] : collect_terms(target, vars)) eqs.push_back(coeff);

  std::vector<std::string> names = unknowns;
  names.push_back("scale_");
  std::map<std::string, expr> solved;
  std::map<std::string, atom_id> name_atoms;
  for (auto& n : names) name_atoms[n] = intern_variable(n);

  auto unknowns_in = [&](const expr& e) {
    std::vector<std::string> present;
    auto atoms = collect_atoms(e);
    for (auto& [n, id] : name_atoms)
      if (!solved.count(n) &&
          std::find(atoms.begin(), atoms.end(), id) != atoms.end())
        present.push_back(n);
    return present;
  };

  bool progress = true;
  bool scale_pinned = false;
  while (progress) {
    progress = false;
    for (auto& eq : eqs) {
      expr cur = substitute(eq, solved);
      if (cur.is_zero()) continue;
      auto present = unknowns_in(cur);
      if (present.size() != 1) continue;
      const std::string& n = present[0];
      atom_id id = name_atoms[n];
      long deg;
      try {
        deg = degree_in(cur, id);
      } catch (const eval_error&) {
        continue;  // unknown trapped in a denominator or under an atom
      }
      if (deg < 1) continue;
      expr lead = coeff_of(cur, id, (unsigned)deg);
      if (!unknowns_in(lead).empty()) continue;
      bool bands_ok = true;
      for (long k = 1; k < deg; ++k)
        if (!coeff_of(cur, id, (unsigned)k).is_zero()) bands_ok = false;
      if (!bands_ok) continue;
      expr rest = cur - lead * pow_int(make_atom_expr(id), deg);
      expr rhs = -rest / lead;
      solved[n] = deg == 1 ? rhs : make_power(rhs, expr(rat(1, deg)));
      progress = true;
    }
    if (!progress && !scale_pinned && !solved.count("scale_")) {
      // the overall multiple is a free gauge; pin it when nothing else moves
      solved["scale_"] = expr(1L);
      scale_pinned = true;
      progress = true;
    }
  }
  for (auto& eq : eqs) {
    expr cur = substitute(eq, solved);
    if (!unknowns_in(cur).empty()) {
      res.note = "matching system underdetermined (unresolved unknowns)";
      return res;
    }
    if (!is_zero(cur)) {
      res.note = "matching system inconsistent: residual " + to_string(cur);
      return res;
    }
  }
  if (!solved.count("scale_")) {
    res.note = "gauge scale left free by the matching system";
    return res;
  }
  res.scale = solved["scale_"];
  if (is_exactly_zero(res.scale)) {
    res.note = "matching collapsed to the zero multiple";
    return res;
  }
  std::vector<diff_form> forms;
  for (auto& w : ansatz.forms) {
    diff_form nw(ansatz.ch, 1);
    for (auto& [idx, e] : w.coeff) nw.add(idx, substitute(e, solved));
    forms.push_back(nw);
  }
  res.normalized = coframe(ansatz.ch, forms);
  res.solved = solved;
  res.ok = true;
  return res;
}

ruling_obstruction ruling_bracket_obstruction(const coframe& cf,
                                              const std::string& uname) {
  std::vector<std::string> coords = cf.ch.coords;
  coords.push_back(uname);
  chart J(coords, cf.ch.dim());
  expr u = make_variable(uname);

  if (cf.ch.dim() != 4)
    throw eval_error("ruling_bracket_obstruction: need a 4d base");
  ruling_data rd = make_ruling_data(cf, u);
  auto lift = [&](const vector_field& f) {
    std::vector<expr> comp = f.comp;
    comp.push_back(expr(0L));
    return vector_field(J, std::move(comp));
  };
  vector_field g1 = lift(rd.gamma1), g2 = lift(rd.gamma2);
  auto du_of = [&](const vector_field& f) {
    std::vector<expr> comp;
    for (auto& e : f.comp) comp.push_back(diff(e, uname));
    return vector_field(J, std::move(comp));
  };
  vector_field g1u = du_of(g1), g2u = du_of(g2);

  vector_field br = lie_bracket(g1, g2);
  // [g1,g2] = a g1 + b g2 + c g1' + d g2' in the base directions
  std::vector<std::vector<expr>> A(4, std::vector<expr>(4, expr(0L)));
  std::vector<expr> rhs(4, expr(0L));
  for (std::size_t i = 0; i < 4; ++i) {
    A[i][0] = g1.comp[i];
    A[i][1] = g2.comp[i];
    A[i][2] = g1u.comp[i];
    A[i][3] = g2u.comp[i];
    rhs[i] = br.comp[i];
  }
  auto coef = solve_linear(A, rhs);
  expr a = coef[0], b = coef[1], c = coef[2], d = coef[3];
  expr m = -d, nn = c;
  expr w =
      g1.apply(nn) - g2.apply(m) + m * diff(nn, uname) - nn * diff(m, uname);
  expr residual = w - a * m - b * nn;
  ruling_obstruction out;
  out.residual = residual;
  if (residual.is_zero()) {
    out.primitive = residual;
    out.half_flat = true;
    return out;
  }
  out.primitive = primitive_scale(expr::from_poly(residual.num()));
  out.half_flat = false;
  return out;
}

}  // namespace cayley
