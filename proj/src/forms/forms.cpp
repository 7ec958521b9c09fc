#include "cayley/forms.hpp"

#include <algorithm>
#include <cassert>

namespace cayley {

expr vector_field::apply(const expr& f) const {
  expr total(0L);
  for (std::size_t i = 0; i < comp.size(); ++i) {
    if (comp[i].is_zero()) continue;
    total += comp[i] * diff(f, ch.coords[i]);
  }
  return total;
}

void diff_form::add(const index_tuple& idx, const expr& e) {
  if (e.is_zero()) return;
  auto it = coeff.find(idx);
  if (it == coeff.end()) {
    coeff.emplace(idx, e);
  } else {
    it->second += e;
    if (it->second.is_zero()) coeff.erase(it);
  }
}

expr diff_form::get(const index_tuple& idx) const {
  auto it = coeff.find(idx);
  return it == coeff.end() ? expr(0L) : it->second;
}

diff_form diff_form::operator+(const diff_form& o) const {
  assert(degree == o.degree);
  diff_form r = *this;
  for (auto& [idx, e] : o.coeff) r.add(idx, e);
  return r;
}

diff_form diff_form::operator-(const diff_form& o) const {
  assert(degree == o.degree);
  diff_form r = *this;
  for (auto& [idx, e] : o.coeff) r.add(idx, -e);
  return r;
}

diff_form diff_form::operator*(const expr& s) const {
  diff_form r(ch, degree);
  if (s.is_zero()) return r;
  for (auto& [idx, e] : coeff) r.add(idx, e * s);
  return r;
}

diff_form d_coord(const chart& c, std::size_t i) {
  diff_form f(c, 1);
  f.add({(std::uint8_t)i}, expr(1L));
  return f;
}

diff_form form_from_expr(const chart& c, const expr& e) {
  diff_form f(c, 0);
  f.add({}, e);
  return f;
}

namespace {

// merge two strictly increasing tuples; returns sign or 0 on repetition
int merge_tuples(const index_tuple& a, const index_tuple& b, index_tuple& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  int sign = 1;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return 0;
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else {
      // b[j] hops over the remaining entries of a
      if ((a.size() - i) % 2 == 1) sign = -sign;
      out.push_back(b[j++]);
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return sign;
}

}  // namespace

diff_form wedge(const diff_form& a, const diff_form& b) {
  if (!(a.ch == b.ch)) throw eval_error("wedge: chart mismatch");
  diff_form r(a.ch, a.degree + b.degree);
  index_tuple merged;
  for (auto& [ia, ea] : a.coeff)
    for (auto& [ib, eb] : b.coeff) {
      int s = merge_tuples(ia, ib, merged);
      if (s == 0) continue;
      expr c = ea * eb;
      if (s < 0) c = -c;
      r.add(merged, c);
    }
  return r;
}

diff_form exterior_derivative(const diff_form& a) {
  diff_form r(a.ch, a.degree + 1);
  index_tuple merged;
  for (auto& [idx, e] : a.coeff) {
    for (std::size_t i = 0; i < a.ch.dim(); ++i) {
      expr de = diff(e, a.ch.coords[i]);
      if (de.is_zero()) continue;
      index_tuple di{(std::uint8_t)i};
      int s = merge_tuples(di, idx, merged);
      if (s == 0) continue;
      r.add(merged, s < 0 ? -de : de);
    }
  }
  return r;
}

vector_field lie_bracket(const vector_field& x, const vector_field& y) {
  if (!(x.ch == y.ch)) throw eval_error("lie_bracket: chart mismatch");
  std::vector<expr> comp(x.ch.dim(), expr(0L));
  for (std::size_t i = 0; i < x.ch.dim(); ++i)
    comp[i] = x.apply(y.comp[i]) - y.apply(x.comp[i]);
  return vector_field(x.ch, std::move(comp));
}

expr form_apply(const diff_form& a, const std::vector<vector_field>& fields) {
  if (fields.size() != a.degree)
    throw eval_error("form_apply: arity mismatch");
  if (a.degree == 0) return a.get({});
  // sum over permutations via Laplace-like expansion: evaluate the
  // determinant of component picks for every stored index tuple
  expr total(0L);
  std::size_t k = a.degree;
  for (auto& [idx, e] : a.coeff) {
    std::vector<std::vector<expr>> m(k, std::vector<expr>(k, expr(0L)));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) m[r][c] = fields[r].comp[idx[c]];
    total += e * matrix_det(m);
  }
  return total;
}

expr pair_form_field(const diff_form& a, const vector_field& x) {
  return form_apply(a, {x});
}

coframe::coframe(chart c, std::vector<diff_form> f)
    : ch(std::move(c)), forms(std::move(f)) {
  if (forms.size() != ch.dim())
    throw eval_error("coframe: needs dim one-forms");
  for (auto& w : forms)
    if (w.degree != 1) throw eval_error("coframe: degree-1 forms required");
}

std::vector<std::vector<expr>> coframe_matrix(const coframe& c) {
  std::size_t n = c.dim();
  std::vector<std::vector<expr>> m(n, std::vector<expr>(n, expr(0L)));
  for (std::size_t i = 0; i < n; ++i)
    for (auto& [idx, e] : c.forms[i].coeff) m[i][idx[0]] = e;
  return m;
}

expr matrix_det(const std::vector<std::vector<expr>>& m) {
  std::size_t n = m.size();
  if (n == 0) return expr(1L);
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  // Laplace along the first row (matrices here are small and often sparse)
  expr det(0L);
  for (std::size_t j = 0; j < n; ++j) {
    if (m[0][j].is_zero()) continue;
    std::vector<std::vector<expr>> sub(n - 1, std::vector<expr>(n - 1, expr(0L)));
    for (std::size_t r = 1; r < n; ++r) {
      std::size_t cc = 0;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == j) continue;
        sub[r - 1][cc++] = m[r][c];
      }
    }
    expr term = m[0][j] * matrix_det(sub);
    det += (j % 2 == 0) ? term : -term;
  }
  return det;
}

std::vector<std::vector<expr>> matrix_inverse(
    const std::vector<std::vector<expr>>& m) {
  std::size_t n = m.size();
  expr det = matrix_det(m);
  if (det.is_zero()) throw eval_error("matrix_inverse: symbolic determinant is zero");
  std::vector<std::vector<expr>> inv(n, std::vector<expr>(n, expr(0L)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::vector<expr>> sub(n - 1, std::vector<expr>(n - 1, expr(0L)));
      std::size_t rr = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == j) continue;
        std::size_t cc = 0;
        for (std::size_t c = 0; c < n; ++c) {
          if (c == i) continue;
          sub[rr][cc++] = m[r][c];
        }
        ++rr;
      }
      expr cof = matrix_det(sub);
      if ((i + j) % 2 == 1) cof = -cof;
      inv[i][j] = cof / det;
    }
  return inv;
}

std::vector<vector_field> dual_frame(const coframe& c) {
  auto inv = matrix_inverse(coframe_matrix(c));
  std::vector<vector_field> frame;
  std::size_t n = c.dim();
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<expr> comp(n, expr(0L));
    for (std::size_t i = 0; i < n; ++i) comp[i] = inv[i][j];
    frame.emplace_back(c.ch, std::move(comp));
  }
  return frame;
}

structure_functions compute_structure_functions(const coframe& c) {
  std::size_t n = c.dim();
  auto frame = dual_frame(c);
  structure_functions sf;
  sf.T.assign(n, std::vector<std::vector<expr>>(n, std::vector<expr>(n, expr(0L))));
  for (std::size_t i = 0; i < n; ++i) {
    diff_form dw = exterior_derivative(c.forms[i]);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        expr t = form_apply(dw, {frame[j], frame[k]});
        if (t.is_zero()) continue;
        sf.T[i][j][k] = t;
        sf.T[i][k][j] = -t;
      }
  }
  return sf;
}

std::vector<expr> solve_linear(std::vector<std::vector<expr>> a,
                               std::vector<expr> b) {
  std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col].is_zero()) ++piv;
    if (piv == n) throw eval_error("solve_linear: singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    expr inv = expr(1L) / a[col][col];
    for (std::size_t j = col; j < n; ++j) a[col][j] *= inv;
    b[col] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      expr f = a[r][col];
      for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  return b;
}

std::vector<expr> expand_one_form(const diff_form& w,
                                  const std::vector<diff_form>& basis) {
  std::size_t n = basis.size();
  if (w.ch.dim() != n)
    throw eval_error("expand_one_form: basis does not span the chart");
  // columns: basis forms; rows: coordinate components
  std::vector<std::vector<expr>> a(n, std::vector<expr>(n, expr(0L)));
  std::vector<expr> b(n, expr(0L));
  for (std::size_t j = 0; j < n; ++j)
    for (auto& [idx, e] : basis[j].coeff) a[idx[0]][j] = e;
  for (auto& [idx, e] : w.coeff) b[idx[0]] = e;
  return solve_linear(std::move(a), std::move(b));
}

std::vector<expr> coframe_derivative(const expr& f,
                                     const std::vector<diff_form>& basis) {
  if (basis.empty()) throw eval_error("coframe_derivative: empty basis");
  diff_form df = exterior_derivative(form_from_expr(basis[0].ch, f));
  return expand_one_form(df, basis);
}

std::vector<std::vector<expr>> expand_two_form(
    const diff_form& tau, const std::vector<diff_form>& basis) {
  // write the coordinate components of tau through the dual frame of the
  // basis: C[a][b] = tau(E_a, E_b)
  coframe cf(basis[0].ch, basis);
  auto frame = dual_frame(cf);
  std::size_t n = basis.size();
  std::vector<std::vector<expr>> c(n, std::vector<expr>(n, expr(0L)));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      expr v = form_apply(tau, {frame[a], frame[b]});
      c[a][b] = v;
      c[b][a] = -v;
    }
  return c;
}

}  // namespace cayley
