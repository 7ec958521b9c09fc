#include "cayley/pathgeom.hpp"

#include <cassert>

namespace cayley {

chart ode_chart() { return chart({"t", "z1", "z2", "p1", "p2"}); }

namespace {

const char* zname(int i) { return i == 1 ? "z1" : "z2"; }
const char* pname(int i) { return i == 1 ? "p1" : "p2"; }

expr pick(const ode_pair& pair, int i) { return i == 1 ? pair.F1 : pair.F2; }

mat2 mat_mul(const mat2& a, const mat2& b) {
  mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      expr s(0L);
      for (int k = 0; k < 2; ++k) s += a[i][k] * b[k][j];
      r[i][j] = s;
    }
  return r;
}

mat2 mat_sub(const mat2& a, const mat2& b) {
  mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}

mat2 mat_apply(const vector_field& X, const mat2& a) {
  mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = X.apply(a[i][j]);
  return r;
}

mat2 mat_inverse2(const mat2& a) {
  expr det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (det.is_zero()) throw eval_error("2x2 matrix not invertible");
  mat2 r{};
  r[0][0] = a[1][1] / det;
  r[0][1] = -a[0][1] / det;
  r[1][0] = -a[1][0] / det;
  r[1][1] = a[0][0] / det;
  return r;
}

}  // namespace

vector_field total_derivative(const ode_pair& pair) {
  chart c = ode_chart();
  return vector_field(
      c, {expr(1L), make_variable("p1"), make_variable("p2"), pair.F1, pair.F2});
}

mat2 fels_f_matrix(const ode_pair& pair) {
  vector_field X = total_derivative(pair);
  mat2 F{};
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) {
      expr fi = pick(pair, i);
      expr v = -diff(fi, zname(j)) + X.apply(diff(fi, pname(j))) / expr(2L);
      for (int k = 1; k <= 2; ++k)
        v -= diff(fi, pname(k)) * diff(pick(pair, k), pname(j)) / expr(4L);
      F[i - 1][j - 1] = v;
    }
  return F;
}

mat2 fels_torsion(const ode_pair& pair) {
  mat2 F = fels_f_matrix(pair);
  expr half_tr = (F[0][0] + F[1][1]) / expr(2L);
  F[0][0] -= half_tr;
  F[1][1] -= half_tr;
  return F;
}

fels_curvature compute_fels_curvature(const ode_pair& pair) {
  fels_curvature out;
  // G_{jk} = d_{p^r} d_{p^j} d_{p^k} F^r
  expr G[2][2];
  for (int j = 1; j <= 2; ++j)
    for (int k = 1; k <= 2; ++k) {
      expr s(0L);
      for (int r = 1; r <= 2; ++r)
        s += diff(diff(diff(pick(pair, r), pname(r)), pname(j)), pname(k));
      G[j - 1][k - 1] = s;
    }
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= 2; ++k)
        for (int l = 1; l <= 2; ++l) {
          expr f3 = diff(diff(diff(pick(pair, i), pname(j)), pname(k)), pname(l));
          expr corr(0L);
          if (i == l) corr += G[j - 1][k - 1];
          if (i == j) corr += G[k - 1][l - 1];
          if (i == k) corr += G[l - 1][j - 1];
          out.S[i - 1][j - 1][k - 1][l - 1] = f3 - corr / expr(4L);
        }
  return out;
}

cayley_ode_report cayley_conditions(const ode_pair& pair) {
  cayley_ode_report rep;
  vector_field X = total_derivative(pair);
  mat2 F = fels_f_matrix(pair);
  mat2 T = fels_torsion(pair);
  bool tzero = true;
  for (auto& row : T)
    for (auto& e : row)
      if (!e.is_zero()) tzero = false;
  if (tzero) {
    rep.torsion_zero = true;
    rep.note = "torsion-free pair: conformal case, outside this check";
    return rep;
  }
  expr det = T[0][0] * T[1][1] - T[0][1] * T[1][0];
  rep.rank_ok = is_zero(det);
  // H^i_j = -d_{p^j} F^i
  mat2 H{};
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      H[i - 1][j - 1] = -diff(pick(pair, i), pname(j));
  mat2 M = mat_apply(X, T);
  mat2 bracket = mat_sub(mat_mul(H, T), mat_mul(T, H));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) M[i][j] += bracket[i][j] / expr(2L);
  // solve phi at the first nonzero torsion entry, then check the rest
  int pi = -1, pj = -1;
  for (int i = 0; i < 2 && pi < 0; ++i)
    for (int j = 0; j < 2 && pi < 0; ++j)
      if (!T[i][j].is_zero()) {
        pi = i;
        pj = j;
      }
  rep.phi = M[pi][pj] / T[pi][pj];
  rep.phi_consistent = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (!is_zero(M[i][j] - rep.phi * T[i][j])) rep.phi_consistent = false;
  rep.residual = X.apply(rep.phi) - rep.phi * rep.phi / expr(4L) -
                 expr(2L) * (F[0][0] + F[1][1]);
  rep.residual_zero = is_zero(rep.residual);
  rep.pass = rep.rank_ok && rep.phi_consistent && rep.residual_zero;
  return rep;
}

expr schwarzian(const vector_field& X, const expr& f) {
  return expr(2L) * f * X.apply(X.apply(f)) - pow_int(X.apply(f), 2);
}

projective_report projective_frame_check(const vector_field& X,
                                         const vector_field& V1,
                                         const vector_field& V2,
                                         const vector_field& C1,
                                         const vector_field& C2,
                                         const expr* gauge_f,
                                         const mat2* gauge_G) {
  projective_report rep;
  const chart& c = X.ch;
  std::size_t n = c.dim();
  if (n != 5) throw eval_error("projective_frame_check: expects a 5d chart");
  auto expand = [&](const vector_field& w, const vector_field& W1,
                    const vector_field& W2, const vector_field& XX) {
    std::vector<std::vector<expr>> A(n, std::vector<expr>(n, expr(0L)));
    std::vector<expr> b(n, expr(0L));
    const vector_field* cols[5] = {&W1, &W2, &XX, &C1, &C2};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 5; ++j) A[i][j] = cols[j]->comp[i];
      b[i] = w.comp[i];
    }
    return solve_linear(A, b);
  };
  auto tx_of = [&](const vector_field& XX, const vector_field& W1,
                   const vector_field& W2, mat2& TX, std::vector<expr>& obs) {
    const vector_field* vs[2] = {&W1, &W2};
    for (int i = 0; i < 2; ++i) {
      vector_field ad2 = lie_bracket(XX, lie_bracket(XX, *vs[i]));
      auto coef = expand(ad2, W1, W2, XX);
      TX[i][0] = -coef[0];
      TX[i][1] = -coef[1];
      obs.push_back(coef[3]);
      obs.push_back(coef[4]);
    }
  };
  tx_of(X, V1, V2, rep.TX, rep.obstructions);
  bool ok = true;
  for (auto& e : rep.obstructions)
    if (!is_zero(e)) ok = false;
  if (!is_zero(rep.TX[0][0] + rep.TX[1][1])) ok = false;
  rep.is_projective = ok;

  if (gauge_f && gauge_G) {
    const expr& f = *gauge_f;
    const mat2& G = *gauge_G;
    rep.gauge_residuals.push_back(schwarzian(X, f));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        rep.gauge_residuals.push_back(expr(2L) * f * X.apply(G[i][j]) +
                                      X.apply(f) * G[i][j]);
    // conjugation law for the rescaled field and frame
    std::vector<expr> fxc;
    for (auto& e : X.comp) fxc.push_back(f * e);
    vector_field fX(X.ch, fxc);
    auto gv = [&](int i) {
      std::vector<expr> comp(5, expr(0L));
      for (std::size_t k = 0; k < 5; ++k)
        comp[k] = G[i][0] * V1.comp[k] + G[i][1] * V2.comp[k];
      return vector_field(X.ch, comp);
    };
    mat2 TfX{};
    std::vector<expr> obs2;
    tx_of(fX, gv(0), gv(1), TfX, obs2);
    mat2 expected = mat_mul(mat_mul(G, rep.TX), mat_inverse2(G));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        rep.gauge_residuals.push_back(TfX[i][j] - f * f * expected[i][j]);
  }
  return rep;
}

schwarzian_hat_result schwarzian_hat(const mat2& A, const vector_field& X) {
  schwarzian_hat_result out;
  mat2 dA = mat_apply(X, A);
  mat2 d2A = mat_apply(X, dA);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          out.H[i][j][k][l] =
              (d2A[i][j] * A[k][l] + A[i][j] * d2A[k][l]) / expr(2L) -
              expr(rat(5, 4)) * dA[i][j] * dA[k][l];
  return out;
}

expr schwarzian_hat_scalar(const expr& w, const vector_field& X) {
  return w * X.apply(X.apply(w)) - expr(rat(5, 4)) * pow_int(X.apply(w), 2);
}

ansatz_report ansatz_conditions(const expr& F2, const expr& F1) {
  ansatz_report rep;
  for (const expr* f : {&F1, &F2})
    if (!diff(*f, "z1").is_zero() || !diff(*f, "p1").is_zero()) {
      rep.note = "right-hand sides must not depend on z1 or p1";
      return rep;
    }
  rep.valid = true;
  chart c = ode_chart();
  vector_field Xt(c, {expr(1L), expr(0L), make_variable("p2"), expr(0L), F2});
  expr f2p = diff(F2, "p2");
  rep.T22 = -diff(F2, "z2") + Xt.apply(f2p) / expr(2L) - f2p * f2p / expr(4L);
  rep.T12 = -diff(F1, "z2") + Xt.apply(diff(F1, "p2")) / expr(2L) -
            diff(F1, "p2") * f2p / expr(4L);
  if (rep.T12.is_zero()) {
    rep.t12_zero = true;
    rep.note = "T12 vanishes identically: phi is undefined for this ansatz";
    return rep;
  }
  rep.phi = Xt.apply(rep.T12) / rep.T12 + f2p / expr(2L);
  rep.residual = Xt.apply(rep.phi) - rep.phi * rep.phi / expr(4L);
  return rep;
}

std::array<vector_field, 2> z_frame(const ode_pair& pair, bool keep_half_factor) {
  chart c = ode_chart();
  expr scale = keep_half_factor ? expr(rat(1, 2)) : expr(1L);
  std::array<vector_field, 2> out{
      vector_field(c, std::vector<expr>(5, expr(0L))),
      vector_field(c, std::vector<expr>(5, expr(0L)))};
  for (int i = 1; i <= 2; ++i) {
    std::vector<expr> comp(5, expr(0L));
    comp[i] = expr(1L);  // d_{z^i}
    comp[3] = scale * diff(pair.F1, pname(i));
    comp[4] = scale * diff(pair.F2, pname(i));
    out[i - 1] = vector_field(c, std::move(comp));
  }
  return out;
}

}  // namespace cayley
