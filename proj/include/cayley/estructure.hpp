#ifndef CAYLEY_ESTRUCTURE_HPP
#define CAYLEY_ESTRUCTURE_HPP

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cayley/cayleygeom.hpp"
#include "cayley/forms.hpp"

// The half-flat {e}-structure: first-order torsion normalization, the full
// structure equations with their a- and b-coefficients, the flat model, and
// the induced Cartan connections.
//
// Basis index convention throughout: 0..3 = w0..w3, 4 = theta1, 5 = theta2,
// 6 = phi0, 7 = phi1.  Coframe derivatives F_{;mu} follow the same order.

namespace cayley {

struct estructure_data {
  chart ch;
  std::array<diff_form, 8> forms;
};

// values of the essential invariants together with a derivative operator
struct invariant_environment {
  rat c{2};                        // branch constant: 2 or 3/2
  std::array<expr, 9> a{};         // a[1]..a[8]; a7, a8 vanish when half-flat
  std::map<std::string, expr> b;   // entries keyed "101", "123", ...
  std::function<std::vector<expr>(const expr&)> derive;  // 8 components
};

// b_{alpha beta gamma} with antisymmetry in (beta,gamma) and the dependent
// entries filled from the appendix relations for the active branch
expr env_b(const invariant_environment& env, int alpha, int beta, int gamma);

// the dependent-entry table itself (for consistency reports)
std::vector<std::pair<std::string, expr>> dependent_b_values(
    const invariant_environment& env);

invariant_environment zero_environment();

// ---- flat model --------------------------------------------------------

// explicit integration of the flat structure equations on the chart
// (x0..x3, s0, s1, t1, t2); gauge entries substitute the group coordinates
estructure_data flat_model(const std::map<std::string, expr>& gauge = {});

// d^2 = 0 check for a constant-coefficient system
// d zeta^i = -1/2 c^i_{jk} zeta^j wedge zeta^k
bool closure_check(const std::vector<std::vector<std::vector<expr>>>& c);

// ---- first-order analysis ---------------------------------------------

enum class hf_branch { both, c2, c32, neither };

struct first_order_report {
  expr a5, a6, a7, a8;
  bool t301_zero = false;     // necessary condition for half-flatness
  hf_branch branch = hf_branch::neither;
  ruling_obstruction obstruction;  // Frobenius residual of the ruling planes
  bool half_flat = false;
};

// essential torsion at the group point g, per the first-order normalization
first_order_report first_order_torsion(const coframe& cf,
                                       const group_element& g);

// ---- absorption --------------------------------------------------------

struct absorb_result {
  bool ok = false;
  estructure_data data;  // lifted coframe + connection forms on (x, f0, f1, u, v)
  std::array<expr, 9> a{};  // essential torsion read off after absorption
  std::string note;
};

// lifts the coframe to the structure bundle with symbolic group coordinates
// (f0, f1, u, v), forms the Maurer-Cartan part of the connection and solves
// the (unique) semibasic corrections that put the torsion in normal form
absorb_result absorb(const coframe& cf);

// ---- verification ------------------------------------------------------

struct structure_verification {
  bool pass = false;
  // per equation row: list of (slot label, residual coefficient)
  std::vector<std::pair<std::string, expr>> residuals;
  // the five derivative relations for a1 (labels and residuals)
  std::vector<std::pair<std::string, expr>> a1_relations;
  // dependent-b consistency with the appendix table
  std::vector<std::pair<std::string, expr>> b_relations;
};

structure_verification verify_structure_equations(
    const estructure_data& data, const invariant_environment& env);

// reads a's and b's off a realized e-structure; the derivative operator is
// the coframe derivative against the realized basis
invariant_environment extract_environment(const estructure_data& data,
                                          const rat& branch_c = rat(2));

// ---- Cartan connections -------------------------------------------------

// formal 1-forms and 2-forms over the 8-element coframe basis
using eform1 = std::array<expr, 8>;
struct eform2 {
  expr c[8][8]{};  // antisymmetric
  void add(int i, int j, const expr& v);
  expr get(int i, int j) const { return c[i][j]; }
  bool zero() const;
};

eform2 wedge11(const eform1& x, const eform1& y);
// d against the structure equations of env
eform2 formal_d(const eform1& w, const invariant_environment& env);

struct sl4_report {
  bool trace_free = false;
  bool torsion_normalized = false;  // block equals ((0,0),(1,0))
  std::array<expr, 5> W;            // iterated theta1-derivatives of b123
  bool w5_zero = false;
  bool curvature_in_w_span = false; // horizontal curvature generated by W
  bool projective = false;          // all W vanish
  std::vector<std::string> notes;
};

sl4_report sl4_connection(const invariant_environment& env);

enum class sl3_kind { hf, null, uhf };

struct sl3_report {
  bool preconditions_ok = false;
  bool pass = false;
  expr K1, K2, L1, L2;
  std::string note;
};

sl3_report sl3_connections(const invariant_environment& env, sl3_kind which);

// abstract environment: named scalars are plain variables, derivatives
// come from a table; missing entries become fresh symbols so unprovable
// results surface instead of silently vanishing
invariant_environment abstract_environment(
    const rat& branch_c, const std::map<std::string, expr>& scalars,
    const std::map<std::string, std::array<expr, 8>>& derivative_table);

}  // namespace cayley

#endif
