#ifndef CAYLEY_EXPR_HPP
#define CAYLEY_EXPR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

// Exact scalar symbolic kernel.
//
// Canonical form: every value is a reduced fraction num/den of multivariate
// polynomials over Q in "atoms".  An atom is a variable, an opaque function
// application carrying a derivative multi-index, an exp/log application, a
// radical base^(1/q), or a power base^s with s a non-constant exponent.
// Monomials are kept reduced: radical powers stay below the root order,
// exp factors are merged into a single exp atom, and same-base symbolic
// powers are combined.  On the fragment built from variables and opaque
// atoms only, a zero numerator is a sound and complete zero test; values
// containing radical/exp/log/power atoms fall back to sampling.

namespace cayley {

using rat = mpq_class;

rat rat_from_long(long n, long d = 1);
std::string rat_to_string(const rat& q);

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class eval_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using atom_id = std::uint32_t;

enum class atom_kind : std::uint8_t { var, opaque, fexp, flog, radical, sympow };

struct monomial {
  // factors sorted by atom id ascending; exponents > 0
  std::vector<std::pair<atom_id, std::uint32_t>> f;

  bool operator==(const monomial& o) const { return f == o.f; }
  std::uint64_t degree() const;
};

// graded order, ties broken on the highest atom id first
bool mono_less(const monomial& a, const monomial& b);

struct polynomial {
  // terms sorted by mono_less descending; no zero coefficients
  std::vector<std::pair<monomial, rat>> t;

  bool is_zero() const { return t.empty(); }
  bool is_constant() const { return t.empty() || (t.size() == 1 && t[0].first.f.empty()); }
  rat constant_value() const;
  bool operator==(const polynomial& o) const { return t == o.t; }
};

class expr {
 public:
  expr() : num_(), den_(poly_one()) {}
  expr(long n) ;
  expr(const rat& q);

  static expr from_poly(polynomial p);
  static expr from_fraction(polynomial num, polynomial den);

  const polynomial& num() const { return num_; }
  const polynomial& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_rational() const { return num_.is_constant() && den_.is_constant(); }
  rat rational_value() const;

  bool operator==(const expr& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const expr& o) const { return !(*this == o); }

  expr operator-() const;
  expr operator+(const expr& o) const;
  expr operator-(const expr& o) const;
  expr operator*(const expr& o) const;
  expr operator/(const expr& o) const;
  expr& operator+=(const expr& o) { *this = *this + o; return *this; }
  expr& operator-=(const expr& o) { *this = *this - o; return *this; }
  expr& operator*=(const expr& o) { *this = *this * o; return *this; }
  expr& operator/=(const expr& o) { *this = *this / o; return *this; }

  static polynomial poly_one();

 private:
  polynomial num_, den_;
  friend expr make_fraction_reduced(polynomial, polynomial);
};

// ---- atom table ------------------------------------------------------

struct atom_data {
  atom_kind kind;
  std::string name;             // var, opaque
  std::vector<expr> args;       // opaque args; fexp/flog/radical/sympow base at [0]
  std::vector<std::uint32_t> dindex;  // opaque derivative multi-index
  std::uint32_t root = 0;       // radical: exponent is 1/root
  expr spow;                    // sympow: the (primitive, non-constant) exponent
};

const atom_data& atom_info(atom_id id);
atom_id intern_variable(const std::string& name);
std::optional<atom_id> find_variable(const std::string& name);

// ---- constructors ----------------------------------------------------

expr make_variable(const std::string& name);
expr make_atom_expr(atom_id id);
expr make_opaque(const std::string& name, std::vector<expr> args,
                 std::vector<std::uint32_t> dindex = {});
expr make_exp(const expr& arg);
expr make_log(const expr& arg);
expr make_power(const expr& base, const expr& exponent);
expr pow_int(const expr& base, long k);

// ---- operations ------------------------------------------------------

expr diff(const expr& e, const std::string& var);
expr diff(const expr& e, atom_id var);

expr substitute(const expr& e, const std::map<std::string, expr>& bindings);

rat eval_rational(const expr& e, const std::map<std::string, rat>& point,
                  const std::map<std::string, rat>& symbol_table = {});

double eval_double(const expr& e, const std::map<std::string, double>& point,
                   const std::map<std::string, double>& symbol_table = {});

enum class zero_kind { nonzero, zero, probably_zero };

struct zero_options {
  unsigned points = 20;       // sample count for the fallback
  unsigned max_retries = 200; // resamples on poles / domain errors
  std::uint64_t seed = 20240501;
  double tolerance = 1e-8;
};

zero_kind zero_test(const expr& e, const zero_options& opt = {});
// true for zero and probably_zero
bool is_zero(const expr& e, const zero_options& opt = {});
// true only when the kernel can certify the value without sampling
bool is_exactly_zero(const expr& e);

// atoms other than variables and opaque applications trigger the sampling
// fallback in zero_test
bool has_inexact_atoms(const expr& e);

std::vector<atom_id> collect_atoms(const expr& e);

// ---- parsing / printing ----------------------------------------------

expr parse(const std::string& text);
std::string to_string(const expr& e);
std::string atom_key(atom_id id);  // printed form, used as symbol_table key

// ---- variable views ----------------------------------------------------

// e must be polynomial in v (v absent from the denominator)
long degree_in(const expr& e, atom_id v);
long degree_in(const expr& e, const std::string& v);
// coefficient of v^k
expr coeff_of(const expr& e, atom_id v, unsigned k);
expr coeff_of(const expr& e, const std::string& v, unsigned k);
// exponent-vector -> coefficient over the listed variables
std::map<std::vector<unsigned>, expr> collect_terms(const expr& e,
                                                    const std::vector<atom_id>& vars);

// ---- polynomial helpers (exposed for the geometry layers) -------------

polynomial poly_add(const polynomial& a, const polynomial& b);
polynomial poly_neg(const polynomial& a);
polynomial poly_mul(const polynomial& a, const polynomial& b);
polynomial poly_const(const rat& c);
polynomial poly_gcd(const polynomial& a, const polynomial& b);
// single-divisor reduction; remainder zero iff exactly divisible
bool poly_divide(const polynomial& a, const polynomial& b, polynomial& quot,
                 polynomial& rem);

// deterministic rng for sampling-based checks
class rng {
 public:
  explicit rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next();
  // uniform rational with |numerator|, denominator <= bound (default 10^4)
  rat next_rational(long bound = 10000);
  long next_int(long lo, long hi);

 private:
  std::uint64_t s_;
};

}  // namespace cayley

#endif
