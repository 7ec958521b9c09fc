#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cayley/cayleygeom.hpp"
#include "cayley/lax.hpp"

using namespace cayley;

namespace {

expr P(const std::string& s) { return parse(s); }

bool field_zero(const vector_field& v) {
  for (auto& e : v.comp)
    if (!is_exactly_zero(e)) return false;
  return true;
}

normal_form_data random_poly_data(rng& r, int terms = 2) {
  auto rand_poly = [&]() {
    const char* vars[4] = {"x0", "x1", "x2", "x3"};
    expr e(0L);
    for (int t = 0; t < terms; ++t) {
      expr term(r.next_rational(3));
      term *= make_variable(vars[r.next_int(0, 3)]);
      term *= make_variable(vars[r.next_int(0, 3)]);
      e += term;
    }
    return e;
  };
  return {rand_poly(), rand_poly(), rand_poly()};
}

}  // namespace

TEST_CASE("normal coframe: trivial data gives dx^i") {
  normal_form_data d;
  coframe cf = normal_coframe(d);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(is_exactly_zero(cf.forms[i].get({(std::uint8_t)j}) -
                            expr(i == j ? 1L : 0L)));
}

TEST_CASE("normal coframe: duality with the K,R frame") {
  normal_form_data d;
  d.E = make_opaque("E", {P("x0"), P("x1"), P("x2"), P("x3")});
  d.F1 = make_opaque("A", {P("x0"), P("x1"), P("x2"), P("x3")});
  d.F2 = make_opaque("B", {P("x0"), P("x1"), P("x2"), P("x3")});
  coframe cf = normal_coframe(d);
  auto rf = ruling_fields(d);
  const vector_field* fields[4] = {&rf.frame.K2, &rf.frame.K1, &rf.frame.R2,
                                   &rf.frame.R1};
  // w0, w1, w2, w3 pair to delta with K2, K1, R2, R1
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(is_exactly_zero(pair_form_field(cf.forms[i], *fields[j]) -
                            expr(i == j ? 1L : 0L)));
}

TEST_CASE("normal coframe cubic has the ruling planes spanned by K,R") {
  normal_form_data d;
  d.E = P("x1*x2");
  d.F1 = P("x0*x3 + x2^2");
  d.F2 = P("x1*x3");
  coframe cf = normal_coframe(d);
  cubic_form rho = cubic_from_coframe(cf);
  auto rf = ruling_fields(d);
  expr v = make_variable("v_aux");
  std::array<expr, 4> V;
  for (int i = 0; i < 4; ++i)
    V[i] = v * rf.K_lam.comp[i] + rf.R_lam.comp[i];
  CHECK(is_exactly_zero(rho.evaluate(V)));
}

TEST_CASE("ruling fields of trivial data") {
  normal_form_data d;
  auto rf = ruling_fields(d);
  CHECK(is_exactly_zero(rf.K_lam.comp[0] - P("lam")));
  CHECK(is_exactly_zero(rf.K_lam.comp[1] - P("1")));
  CHECK(is_exactly_zero(rf.R_lam.comp[1] - P("1/3*lam^2")));
  CHECK(is_exactly_zero(rf.R_lam.comp[2] - P("lam")));
  CHECK(is_exactly_zero(rf.R_lam.comp[3] - P("1")));
}

TEST_CASE("lift coefficients: trivial data vanishes") {
  normal_form_data d;
  auto lc = lift_coefficients(d);
  CHECK(is_exactly_zero(lc.psi));
  CHECK(is_exactly_zero(lc.phi));
  CHECK(is_exactly_zero(lc.xi));
  CHECK(is_exactly_zero(lc.eta));
  CHECK(is_exactly_zero(lc.m));
  CHECK(is_exactly_zero(lc.n));
}

TEST_CASE("lift coefficients: null-foliation conditions kill lam^4 in m") {
  // E with K1(E)=0 and K2(E)=K1(P)-E K1(Q): take E=0 and F1 with K1(P)=0
  normal_form_data d;
  d.E = P("0");
  d.F1 = P("x0*x1 + x3*x2");
  d.F2 = P("0");
  auto lc = lift_coefficients(d);
  atom_id lam = intern_variable(lambda_name);
  CHECK(is_exactly_zero(coeff_of(lc.m, lam, 4)));
}

TEST_CASE("lift coefficients against the bracket oracle") {
  // m = -beta([K,R]), n = alpha([K,R]) for random polynomial data
  rng r(901);
  for (int round = 0; round < 12; ++round) {
    normal_form_data d = random_poly_data(r);
    auto rf = ruling_fields(d);
    auto lc = lift_coefficients(d);
    vector_field br = lie_bracket(rf.K_lam, rf.R_lam);
    auto ab = duality_forms(rf.K_lam, rf.R_lam);
    expr a_br(0L), b_br(0L);
    for (int i = 0; i < 4; ++i) {
      a_br += ab.alpha[i] * br.comp[i];
      b_br += ab.beta[i] * br.comp[i];
    }
    CHECK(is_exactly_zero(lc.n - a_br));
    CHECK(is_exactly_zero(lc.m + b_br));
  }
}

TEST_CASE("integrability residuals: trivial data") {
  normal_form_data d;
  auto rep = integrability_residuals(d);
  CHECK(rep.all_zero);
  CHECK(rep.dk_dr_vanish);
  CHECK(rep.low_orders_vanish);
  // the bracket itself vanishes for the trivial pair
  auto rf = ruling_fields(d);
  CHECK(field_zero(lie_bracket(rf.K_lam, rf.R_lam)));
}

TEST_CASE("integrability residuals: flat family E=0, F1=x3") {
  normal_form_data d;
  d.F1 = P("x3");
  auto rep = integrability_residuals(d);
  CHECK(rep.all_zero);
}

TEST_CASE("integrability residuals: generic data fails") {
  rng r(77);
  int nonzero_found = 0;
  for (int round = 0; round < 5; ++round) {
    normal_form_data d = random_poly_data(r);
    auto rep = integrability_residuals(d);
    for (auto& e : rep.residuals)
      if (!e.is_zero()) {
        ++nonzero_found;
        break;
      }
  }
  CHECK(nonzero_found >= 4);  // generic data is not half-flat
}

TEST_CASE("duality forms of the trivial decomposition") {
  auto dec = trivial_decomposition();
  auto ab = duality_forms(dec.Khat, dec.Rhat);
  // alpha = dx0 - lam dx1 + 2/3 lam^2 dx2 - 1/3 lam^3 dx3
  CHECK(is_exactly_zero(ab.alpha[0] - P("1")));
  CHECK(is_exactly_zero(ab.alpha[1] + P("lam")));
  CHECK(is_exactly_zero(ab.alpha[2] - P("2/3*lam^2")));
  CHECK(is_exactly_zero(ab.alpha[3] + P("1/3*lam^3")));
  // beta = dx2 - lam dx3
  CHECK(is_exactly_zero(ab.beta[0]));
  CHECK(is_exactly_zero(ab.beta[1]));
  CHECK(is_exactly_zero(ab.beta[2] - P("1")));
  CHECK(is_exactly_zero(ab.beta[3] + P("lam")));
}

TEST_CASE("general symbol row for P matches the product form") {
  auto dec = trivial_decomposition();
  std::array<expr, 4> p{P("p0"), P("p1"), P("p2"), P("p3")};
  auto sig = general_symbol(dec, p);
  expr expected = P("(p3 + lam*p2 + 1/3*lam^2*p1)") *
                  P("(lam^2*p3 + lam^3*p2 + 2/3*lam^4*p1 + 1/3*lam^5*p0)");
  CHECK(is_exactly_zero(sig[0] - expected));
  // zero decomposition rows give a zero symbol
  symbol_decomposition zdec = dec;
  for (auto& v : zdec.K_unknown)
    for (auto& e : v.comp) e = expr(0L);
  for (auto& v : zdec.R_unknown)
    for (auto& e : v.comp) e = expr(0L);
  auto zsig = general_symbol(zdec, p);
  for (auto& e : zsig) CHECK(is_exactly_zero(e));
}

TEST_CASE("trivial symbol matrix equals the assembled general symbol") {
  auto dec = trivial_decomposition();
  std::array<expr, 4> p{P("p0"), P("p1"), P("p2"), P("p3")};
  auto sig = general_symbol(dec, p);
  symbol_matrix s = trivial_symbol();
  atom_id lam = intern_variable(lambda_name);
  for (int i = 0; i < 5; ++i) {
    // each raw row is divisible by lam^2; the stored matrix is the
    // coefficient list of sign * sigma / lam^2
    expr q = sig[i] * expr((long)symbol_row_sign[i]);
    CHECK(is_exactly_zero(coeff_of(q, lam, 0)));
    CHECK(is_exactly_zero(coeff_of(q, lam, 1)));
    for (int j = 0; j < 6; ++j)
      CHECK(is_exactly_zero(coeff_of(q, lam, (unsigned)(j + 2)) - s.entry[i][j]));
  }
}

TEST_CASE("trivial symbol spot entries") {
  symbol_matrix s = trivial_symbol();
  CHECK(is_exactly_zero(s.entry[3][0] - P("p1^2")));
  CHECK(is_exactly_zero(s.entry[0][5] - P("1/9*p0*p1")));
  // homogeneity of degree 2 in p
  std::vector<atom_id> pv{intern_variable("p0"), intern_variable("p1"),
                          intern_variable("p2"), intern_variable("p3")};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j)
      for (auto& [key, c] : collect_terms(s.entry[i][j], pv))
        CHECK(key[0] + key[1] + key[2] + key[3] == 2);
}

TEST_CASE("rank drop report") {
  auto rep = rank_drop_check(trivial_symbol(), 100, 4242);
  CHECK(rep.minors_divisible);
  CHECK(rep.off_cone_rank5 == 100);
  CHECK(rep.on_cone_rank_le4 == 100);
  CHECK(rep.pass);
}

TEST_CASE("rank at specific points") {
  symbol_matrix s = trivial_symbol();
  // p = (1,0,0,0) lies on the dual cone: row evaluation forces rank <= 4
  std::map<std::string, rat> on{{"p0", rat(1)}, {"p1", rat(0)}, {"p2", rat(0)}, {"p3", rat(0)}};
  std::map<std::string, rat> off{{"p0", rat(1)}, {"p1", rat(1)}, {"p2", rat(1)}, {"p3", rat(1)}};
  auto rank_at = [&](const std::map<std::string, rat>& pt) {
    std::vector<std::vector<rat>> m(5, std::vector<rat>(6));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 6; ++j) m[i][j] = eval_rational(s.entry[i][j], pt);
    unsigned rank = 0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < 6 && r < 5; ++c) {
      std::size_t piv = r;
      while (piv < 5 && m[piv][c] == 0) ++piv;
      if (piv == 5) continue;
      std::swap(m[piv], m[r]);
      for (std::size_t i = 0; i < 5; ++i) {
        if (i == r || m[i][c] == 0) continue;
        rat f = m[i][c] / m[r][c];
        for (std::size_t j = c; j < 6; ++j) m[i][j] -= f * m[r][j];
      }
      ++r;
      ++rank;
    }
    return rank;
  };
  CHECK(rank_at(on) <= 4);
  CHECK(rank_at(off) == 5);
}

TEST_CASE("null foliation report") {
  normal_form_data trivial;
  auto rep0 = null_foliation_check(trivial);
  CHECK(rep0.pass);
  CHECK(rep0.m_degree_le3);
  // E=0 and F1 with K1(P) = d1 d1 F1 != 0 fails the second condition
  normal_form_data d;
  d.F1 = P("x1^2");
  auto rep = null_foliation_check(d);
  CHECK(is_exactly_zero(rep.r1));
  CHECK(!rep.pass);
  CHECK(is_exactly_zero(rep.r2 + P("2")));
  // E = x0: first residual K1(E) = 0, second carries the K1(P) content
  normal_form_data d2;
  d2.E = P("x0");
  d2.F1 = P("x1^2");
  auto rep2 = null_foliation_check(d2);
  CHECK(is_exactly_zero(rep2.r1));
  CHECK(!is_exactly_zero(rep2.r2));
}

TEST_CASE("ultra lift") {
  normal_form_data trivial;
  auto rep = ultra_lift(trivial);
  CHECK(rep.pass);
  CHECK(is_exactly_zero(rep.mu));
  CHECK(is_exactly_zero(rep.L2.comp[0]));
  CHECK(is_exactly_zero(rep.L2.comp[1] - P("1")));
  // pp-wave family in normal form: E=0, F1=0, F2=g(x3)
  normal_form_data pp;
  pp.F2 = make_opaque("g", {P("x3")});
  REQUIRE(null_foliation_check(pp).pass);
  auto rep2 = ultra_lift(pp);
  CHECK(rep2.pass);
  // violated precondition throws
  normal_form_data bad;
  bad.F1 = P("x1^2");
  CHECK_THROWS_AS(ultra_lift(bad), eval_error);
}

TEST_CASE("pp-wave normal-form data is half-flat with zero residuals") {
  normal_form_data pp;
  pp.F2 = make_opaque("g", {P("x3")});
  auto rep = integrability_residuals(pp);
  CHECK(rep.all_zero);
  // its coframe cubic is the pp-wave cubic with G = g'(x3)
  coframe cf = normal_coframe(pp);
  chart c = normal_chart();
  expr G = diff(make_opaque("g", {P("x3")}), "x3");
  diff_form w1(c, 1);
  w1.add({1}, P("1"));
  w1.add({2}, -G);
  coframe ppref(c, {d_coord(c, 0), w1, d_coord(c, 2), d_coord(c, 3)});
  CHECK(cubic_equal_exact(cubic_from_coframe(cf), cubic_from_coframe(ppref)));
}
