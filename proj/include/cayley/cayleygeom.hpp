#ifndef CAYLEY_CAYLEYGEOM_HPP
#define CAYLEY_CAYLEYGEOM_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cayley/forms.hpp"

// Cayley cubic data: the cubic of an adapted coframe, the structure group,
// ruling planes, the dual cubic, the characteristic spray, and cubics
// reconstructed from explicit solution families.

namespace cayley {

// fully symmetric coefficients, rho(V,V,V) = sum over all ordered triples
// rho_ijk v^i v^j v^k
struct cubic_form {
  std::array<std::array<std::array<expr, 4>, 4>, 4> c{};

  expr& at(int i, int j, int k);
  const expr& at(int i, int j, int k) const;
  void set_sym(int i, int j, int k, const expr& v);
  expr evaluate(const std::array<expr, 4>& v) const;
  // as a homogeneous polynomial in the four slot variables
  expr as_polynomial(const std::array<expr, 4>& slots) const;
};

// slot variables used when cubics are flattened to polynomials
std::array<expr, 4> cubic_slots();

cubic_form cubic_from_polynomial(const expr& p,
                                 const std::array<std::string, 4>& slot_names);

// primitive representative of the conformal class: integer content one,
// leading coefficient positive in the monomial order
expr primitive_scale(const expr& p);

// exact equality of primitive representatives
bool cubic_equal_exact(const cubic_form& a, const cubic_form& b);
// a == s*b for some nonzero scalar (cross-coefficient elimination)
bool cubic_proportional(const cubic_form& a, const cubic_form& b);

struct group_element {
  expr f0{1L}, f1{1L}, u{0L}, v{0L};

  std::vector<std::vector<expr>> matrix() const;   // eq. of the structure group
  std::vector<std::vector<expr>> inverse() const;
};

cubic_form cubic_from_coframe(const coframe& cf);
coframe group_action(const group_element& g, const coframe& cf);

struct ruling_data {
  expr parameter;                 // the ruling parameter u
  std::array<diff_form, 2> annihilators;  // {w0 + u w1 - u^3/3 w3, w2 + u w3}
  vector_field gamma1, gamma2;    // generator curves
};

ruling_data make_ruling_data(const coframe& cf, const expr& u);

expr dual_cubic(const std::array<expr, 4>& p);

// characteristic line field of L on the cone L=0; chart must list the four
// base coordinates first and the four fiber coordinates second
vector_field characteristic_spray(const expr& L, const chart& xy);

struct solution_family {
  expr z1, z2;  // expressions in t and C0..C3
  std::string tname = "t";
  std::array<std::string, 4> cnames{"C0", "C1", "C2", "C3"};
};

struct cubic_reconstruction {
  cubic_form cubic;
  expr polynomial;  // primitive representative in the slot variables
  bool is_cubic_cone = true;
  std::string note;
};

cubic_reconstruction cubic_from_solution_family(const solution_family& fam);

struct normalize_result {
  bool ok = false;
  coframe normalized;
  std::map<std::string, expr> solved;  // unknown name -> value
  expr scale{1L};                      // cubic(result) = scale * rho
  std::string note;
};

// solves the unknown scalar slots of the ansatz so that the ansatz cubic
// equals a nonzero multiple of rho
normalize_result normalize_to_cayley(const cubic_form& rho, const coframe& ansatz,
                                     const std::vector<std::string>& unknowns);

// Frobenius obstruction for tangent surfaces along the ruling planes: the
// residual d/du-coefficient of the lifted ruling bracket, as a function of
// the ruling parameter.  Identically zero iff a 3-parameter family of
// surfaces tangent to the rulings exists.
struct ruling_obstruction {
  expr residual;        // raw coefficient
  expr primitive;       // monomial content stripped
  bool half_flat = false;
};

ruling_obstruction ruling_bracket_obstruction(const coframe& cf,
                                              const std::string& uname = "u_r");

}  // namespace cayley

#endif
