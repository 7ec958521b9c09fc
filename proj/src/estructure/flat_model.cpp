#include "cayley/estructure.hpp"

namespace cayley {

invariant_environment zero_environment() {
  invariant_environment env;
  for (auto& e : env.a) e = expr(0L);
  env.derive = [](const expr&) { return std::vector<expr>(8, expr(0L)); };
  return env;
}

estructure_data flat_model(const std::map<std::string, expr>& gauge) {
  chart c({"x0", "x1", "x2", "x3", "s0", "s1", "t1", "t2"}, 4);
  expr s0 = make_variable("s0"), s1 = make_variable("s1");
  auto sub = [&](const expr& e) { return substitute(e, gauge); };

  auto scaled = [&](const expr& factor,
                    std::initializer_list<std::pair<int, expr>> parts) {
    diff_form w(c, 1);
    for (auto& [idx, coefficient] : parts)
      w.add({(std::uint8_t)idx}, sub(factor * coefficient));
    return w;
  };
  expr one(1L);
  // w0 = e^-s0 (dx0 + x1 dt2 + x2 dt1)
  diff_form w0 = scaled(make_exp(-s0), {{0, one},
                                        {7, make_variable("x1")},
                                        {6, make_variable("x2")}});
  // w1 = e^(-s0-s1) (dx1 + x2 dt2 + x3 dt1)
  diff_form w1 = scaled(make_exp(-s0 - s1), {{1, one},
                                             {7, make_variable("x2")},
                                             {6, make_variable("x3")}});
  // w2 = e^(-s0-2s1) (dx2 + x3 dt2)
  diff_form w2 =
      scaled(make_exp(-s0 - expr(2L) * s1), {{2, one}, {7, make_variable("x3")}});
  // w3 = e^(-s0-3s1) dx3
  diff_form w3 = scaled(make_exp(-s0 - expr(3L) * s1), {{3, one}});
  // theta1 = e^(2 s1) dt1, theta2 = e^(s1) dt2
  diff_form th1 = scaled(make_exp(expr(2L) * s1), {{6, one}});
  diff_form th2 = scaled(make_exp(s1), {{7, one}});
  // phi0 = d(s0), phi1 = d(s1), rebuilt from the substituted coordinates
  diff_form ph0 = exterior_derivative(form_from_expr(c, sub(s0)));
  diff_form ph1 = exterior_derivative(form_from_expr(c, sub(s1)));
  return estructure_data{c, {w0, w1, w2, w3, th1, th2, ph0, ph1}};
}

bool closure_check(const std::vector<std::vector<std::vector<expr>>>& c) {
  std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i].size() != n) throw eval_error("closure_check: ragged table");
    for (std::size_t j = 0; j < n; ++j) {
      if (c[i][j].size() != n) throw eval_error("closure_check: ragged table");
      for (std::size_t k = 0; k < n; ++k)
        if (!is_exactly_zero(c[i][j][k] + c[i][k][j]))
          throw eval_error("closure_check: table not antisymmetric");
    }
  }
  // Jacobi: sum_m c^i_{m a} c^m_{b c} + cyclic(a, b, c) = 0
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t cc = b + 1; cc < n; ++cc) {
          expr s(0L);
          for (std::size_t m = 0; m < n; ++m) {
            s += c[i][m][a] * c[m][b][cc];
            s += c[i][m][b] * c[m][cc][a];
            s += c[i][m][cc] * c[m][a][b];
          }
          if (!is_exactly_zero(s)) return false;
        }
  return true;
}

}  // namespace cayley
