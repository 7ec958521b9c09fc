#ifndef CAYLEY_PATHGEOM_HPP
#define CAYLEY_PATHGEOM_HPP

#include <array>
#include <optional>
#include <string>

#include "cayley/forms.hpp"

// Point invariants of pairs of second-order ODEs z'' = F(t, z, z') on the
// jet chart (t, z1, z2, p1, p2).

namespace cayley {

using mat2 = std::array<std::array<expr, 2>, 2>;

chart ode_chart();

struct ode_pair {
  expr F1, F2;
};

// X_F = d_t + p^i d_{z^i} + F^i d_{p^i}
vector_field total_derivative(const ode_pair& pair);

// F^i_j = -d_{z^j}F^i + 1/2 X_F(d_{p^j}F^i) - 1/4 d_{p^k}F^i d_{p^j}F^k
mat2 fels_f_matrix(const ode_pair& pair);
// T = F - 1/2 (tr F) Id, trace-free by construction
mat2 fels_torsion(const ode_pair& pair);

struct fels_curvature {
  // S^i_{jkl}, fully symmetric in (j,k,l), trace-free: S^i_{ijk} = 0
  expr S[2][2][2][2];
};

fels_curvature compute_fels_curvature(const ode_pair& pair);

struct cayley_ode_report {
  bool torsion_zero = false;  // conformal case, outside this geometry
  bool rank_ok = false;
  bool phi_consistent = false;
  bool residual_zero = false;
  bool pass = false;
  expr phi;
  expr residual;  // X_F(phi) - 1/4 phi^2 - 2 tr F
  std::string note;
};

// the three conditions: rank T = 1, X_F(T) + 1/2 [H,T] = phi T with
// H^i_j = -d_{p^j} F^i, and X_F(phi) - 1/4 phi^2 - 2 tr F = 0
cayley_ode_report cayley_conditions(const ode_pair& pair);

// S^X(f) = 2 f X^2(f) - X(f)^2
expr schwarzian(const vector_field& X, const expr& f);

struct projective_report {
  bool is_projective = false;
  mat2 TX;
  std::vector<expr> obstructions;     // coefficients outside span{V1,V2,X}
  std::vector<expr> gauge_residuals;  // optional gauge-law checks
};

// checks ad_X^2 V + T^X V = 0 mod X in the frame (V1, V2, X, C1, C2);
// when (f, G) is supplied also verifies 2fX^2(f)-X(f)^2 = 0,
// 2fX(G)+X(f)G = 0 and T^{fX} = f^2 G T^X G^{-1}
projective_report projective_frame_check(const vector_field& X,
                                         const vector_field& V1,
                                         const vector_field& V2,
                                         const vector_field& C1,
                                         const vector_field& C2,
                                         const expr* gauge_f = nullptr,
                                         const mat2* gauge_G = nullptr);

// Shat^X(A) = 1/2 (D^2A (x) A + A (x) D^2A) - 5/4 DA (x) DA with D acting
// entrywise through the supplied derivation; component (ij)(kl) of the
// symmetric square
struct schwarzian_hat_result {
  expr H[2][2][2][2];
};

schwarzian_hat_result schwarzian_hat(const mat2& A, const vector_field& X);

// scalar reduction for T^X = ((0,0),(w,0)): w X^2(w) - 5/4 X(w)^2
expr schwarzian_hat_scalar(const expr& w, const vector_field& X);

struct ansatz_report {
  bool valid = false;        // F1, F2 free of z1 and p1
  bool t12_zero = false;     // torsion degenerate, phi undefined
  expr T22, T12, phi, residual;
  std::string note;
};

// specialization to pairs z1'' = F1(t,z2,p2), z2'' = F2(t,z2,p2):
// T22 = -d_{z2}F2 + 1/2 Xt(d_{p2}F2) - 1/4 (d_{p2}F2)^2,
// phi = Xt(T12)/T12 + 1/2 d_{p2}F2, residual = Xt(phi) - 1/4 phi^2
ansatz_report ansatz_conditions(const expr& F2, const expr& F1);

// normal-frame companions Z_i = d_{z^i} + c (d_{p^i}F^1 d_{p^1} +
// d_{p^i}F^2 d_{p^2}); the 1/2 factor is configurable and dropped by
// default
std::array<vector_field, 2> z_frame(const ode_pair& pair,
                                    bool keep_half_factor = false);

}  // namespace cayley

#endif
