#ifndef CAYLEY_FORMS_HPP
#define CAYLEY_FORMS_HPP

#include <map>
#include <string>
#include <vector>

#include "cayley/expr.hpp"

// Exterior calculus over expr coefficients in a fixed chart.

namespace cayley {

struct chart {
  std::vector<std::string> coords;
  // base/vertical split: indices < base_dim are base coordinates
  std::size_t base_dim = 0;

  chart() = default;
  explicit chart(std::vector<std::string> names, std::size_t base = 0)
      : coords(std::move(names)) {
    base_dim = base ? base : coords.size();
    for (std::size_t i = 0; i < coords.size(); ++i)
      for (std::size_t j = i + 1; j < coords.size(); ++j)
        if (coords[i] == coords[j])
          throw eval_error("chart: duplicate coordinate " + coords[i]);
    for (auto& c : coords) intern_variable(c);
  }
  std::size_t dim() const { return coords.size(); }
  bool operator==(const chart& o) const { return coords == o.coords; }
};

struct vector_field {
  chart ch;
  std::vector<expr> comp;  // one per coordinate

  vector_field() = default;
  vector_field(chart c, std::vector<expr> v) : ch(std::move(c)), comp(std::move(v)) {
    if (comp.size() != ch.dim())
      throw eval_error("vector field: component count != chart dimension");
  }
  // derivation on functions
  expr apply(const expr& f) const;
};

using index_tuple = std::vector<std::uint8_t>;  // strictly increasing

struct diff_form {
  chart ch;
  unsigned degree = 0;
  std::map<index_tuple, expr> coeff;  // strictly increasing tuples, no zeros

  diff_form() = default;
  diff_form(chart c, unsigned deg) : ch(std::move(c)), degree(deg) {}

  void add(const index_tuple& idx, const expr& e);
  expr get(const index_tuple& idx) const;
  bool is_zero() const { return coeff.empty(); }

  diff_form operator+(const diff_form& o) const;
  diff_form operator-(const diff_form& o) const;
  diff_form operator*(const expr& s) const;  // scalar multiple
};

// basis 1-form dx^i
diff_form d_coord(const chart& c, std::size_t i);
// 0-form from a function
diff_form form_from_expr(const chart& c, const expr& e);

diff_form wedge(const diff_form& a, const diff_form& b);
diff_form exterior_derivative(const diff_form& a);
vector_field lie_bracket(const vector_field& x, const vector_field& y);

// full interior evaluation on degree-many fields
expr form_apply(const diff_form& a, const std::vector<vector_field>& fields);
// pairing of a 1-form with a field
expr pair_form_field(const diff_form& a, const vector_field& x);

struct coframe {
  chart ch;
  std::vector<diff_form> forms;  // n one-forms

  coframe() = default;
  coframe(chart c, std::vector<diff_form> f);
  std::size_t dim() const { return forms.size(); }
};

// coefficient matrix M[i][j] = coefficient of dx^j in forms[i]
std::vector<std::vector<expr>> coframe_matrix(const coframe& c);

expr matrix_det(const std::vector<std::vector<expr>>& m);
// adjugate-based inverse; throws when the determinant is exactly zero
std::vector<std::vector<expr>> matrix_inverse(const std::vector<std::vector<expr>>& m);

// fields e_j with forms[i](e_j) = delta^i_j
std::vector<vector_field> dual_frame(const coframe& c);

struct structure_functions {
  // T[i][j][k], antisymmetric in (j,k): d omega^i = 1/2 T^i_jk omega^j ^ omega^k
  std::vector<std::vector<std::vector<expr>>> T;
};

structure_functions compute_structure_functions(const coframe& c);

// expansion dF = F_{;mu} theta^mu for an arbitrary spanning set of 1-forms
std::vector<expr> coframe_derivative(const expr& f,
                                     const std::vector<diff_form>& basis);

// linear solve A x = b over the expression field; throws on singular A
std::vector<expr> solve_linear(std::vector<std::vector<expr>> a,
                               std::vector<expr> b);

// expand a 1-form in a spanning set of 1-forms
std::vector<expr> expand_one_form(const diff_form& w,
                                  const std::vector<diff_form>& basis);

// expand a 2-form in wedge products of a coframe basis; returns C[i][j]
// (i<j) with tau = sum_{i<j} C[i][j] theta^i ^ theta^j
std::vector<std::vector<expr>> expand_two_form(
    const diff_form& tau, const std::vector<diff_form>& basis);

}  // namespace cayley

#endif
