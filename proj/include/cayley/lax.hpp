#ifndef CAYLEY_LAX_HPP
#define CAYLEY_LAX_HPP

#include <array>
#include <string>
#include <vector>

#include "cayley/forms.hpp"

// The half-flat normal form, the dispersionless Lax pair and its seven
// integrability residuals, the linearization symbol, and the null-foliation
// and ultra-half-flat specializations.

namespace cayley {

struct normal_form_data {
  expr E{0L}, F1{0L}, F2{0L};  // functions on the chart (x0, x1, x2, x3)
};

chart normal_chart();          // (x0, x1, x2, x3)
chart lambda_chart();          // (x0, x1, x2, x3, lam)
extern const char* lambda_name;

// the four 1-forms of the normal coframe; F1, F2 enter only through
// derivatives
coframe normal_coframe(const normal_form_data& d);

struct frame_data {
  vector_field K1, K2, R1, R2;  // dual to w1, w0, w3, w2 respectively
  expr P, Q, S, T;              // P=K1(F1), Q=K1(F2), S=R1(F1), T=R1(F2)
};

struct ruling_fields_result {
  vector_field K_lam, R_lam;  // on the lambda chart
  frame_data frame;
};

ruling_fields_result ruling_fields(const normal_form_data& d);

struct lift_coefficients_result {
  expr psi, phi, xi, eta;  // lambda-polynomials
  expr m, n;               // deg m <= 4, deg n <= 6
};

lift_coefficients_result lift_coefficients(const normal_form_data& d);

// lambda-coefficient list of a polynomial value, degree checked
std::vector<expr> lambda_coefficients(const expr& e, unsigned max_degree);

struct lax_residual_report {
  std::array<expr, 7> residuals;  // coefficients at lam^3 .. lam^9
  bool dk_dr_vanish = false;      // dK/dlam, dR/dlam coefficients of [L0,L1]
  bool low_orders_vanish = false; // lam^0..lam^2 coefficients
  bool degree_ok = false;         // residual polynomial, degree <= 9
  bool all_zero = false;
  expr vertical;                  // the full d/dlam coefficient
};

lax_residual_report integrability_residuals(const normal_form_data& d);

// duality 1-forms: alpha annihilates K, R and pairs to 1 with dK/dlam;
// beta annihilates K, R and pairs to 1 with dR/dlam
struct alpha_beta {
  std::array<expr, 4> alpha, beta;  // components in dx^i
};

alpha_beta duality_forms(const vector_field& K_lam, const vector_field& R_lam);

struct symbol_decomposition {
  vector_field Khat, Rhat;
  std::vector<vector_field> K_unknown, R_unknown;  // one per unknown
};

// decomposition of the normal-form ruling fields into the parts linear in
// (P, S, Q, T, E), evaluated along the trivial solution
symbol_decomposition trivial_decomposition();

// sigma^i_lambda(p) for each unknown
std::vector<expr> general_symbol(const symbol_decomposition& dec,
                                 const std::array<expr, 4>& p);

struct symbol_matrix {
  expr entry[5][6];  // rows P, S, Q, T, E; columns lambda powers
};

symbol_matrix trivial_symbol();

// the raw symbol rows of the trivial decomposition equal the stored matrix
// after dividing by lambda^2 and flipping the signs of the S, T, E rows
extern const int symbol_row_sign[5];

struct rank_drop_report {
  bool minors_divisible = false;
  unsigned off_cone_rank5 = 0;     // samples confirmed full rank
  unsigned on_cone_rank_le4 = 0;   // parametrized samples with rank <= 4
  unsigned requested = 0;
  bool pass = false;
  std::string note;
};

rank_drop_report rank_drop_check(const symbol_matrix& s, unsigned samples = 100,
                                 std::uint64_t seed = 20240501);

struct null_foliation_report {
  expr r1, r2;   // K1(E) and K2(E) - K1(P) + E K1(Q)
  bool pass = false;
  bool m_degree_le3 = false;  // checked when pass holds
};

null_foliation_report null_foliation_check(const normal_form_data& d);

struct ultra_lift_report {
  vector_field L2;
  expr mu;  // d/dlam coefficient of L2
  std::vector<expr> residuals;  // obstruction coefficients for span{L0,L1,L2}
  bool pass = false;
};

// requires null_foliation_check to pass
ultra_lift_report ultra_lift(const normal_form_data& d);

}  // namespace cayley

#endif
