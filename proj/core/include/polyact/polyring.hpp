#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyact {

/// Raised when operands disagree on variable count or vector length.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent vector alpha of the monomial z^alpha.
class Monomial {
 public:
  Monomial() = default;
  /// The constant monomial over n variables.
  explicit Monomial(std::size_t n);
  explicit Monomial(std::vector<int> exponents);

  static Monomial unit(std::size_t n, std::size_t i);

  std::size_t size() const { return exps_.size(); }
  int degree() const { return degree_; }
  int operator[](std::size_t i) const { return exps_[i]; }
  std::span<const int> exponents() const { return exps_; }

  Monomial operator*(const Monomial& other) const;
  double eval(std::span<const double> z) const;

  bool operator==(const Monomial& other) const { return exps_ == other.exps_; }

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// Graded lexicographic order: total degree first, then the larger exponent
/// of the earliest differing variable comes first. With this order the
/// degree-d basis is a prefix of every higher-degree basis.
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const;
};

/// Sparse real polynomial over a fixed number of variables. Zero
/// coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLexLess>;

  /// Coefficients smaller than this in magnitude are dropped after arithmetic.
  static constexpr double kDropTolerance = 1e-14;

  /// The zero polynomial over n variables.
  explicit Polynomial(std::size_t n = 0) : n_(n) {}

  static Polynomial constant(std::size_t n, double value);
  static Polynomial variable(std::size_t n, std::size_t i, double coeff = 1.0);
  static Polynomial monomial(const Monomial& m, double coeff = 1.0);

  std::size_t num_vars() const { return n_; }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  /// Total degree; the zero polynomial has degree 0.
  int degree() const;
  double coefficient(const Monomial& m) const;

  /// Adds coeff * m, dropping the term if it cancels.
  void add_term(const Monomial& m, double coeff);

  double eval(std::span<const double> z) const;

  /// Re-expresses the polynomial over new_n variables, moving variable i to
  /// variable offset + i.
  Polynomial embed(std::size_t new_n, std::size_t offset = 0) const;

  /// Renders nonconstant terms in graded-lex order followed by the constant,
  /// e.g. "3*c21 + 29*c12*c21 - 52".
  std::string to_string(std::span<const std::string> names) const;
  /// Same, with default names z1..zn.
  std::string to_string() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  bool operator==(const Polynomial& other) const {
    return n_ == other.n_ && terms_ == other.terms_;
  }

 private:
  std::size_t n_ = 0;
  TermMap terms_;
};

Polynomial poly_add(const Polynomial& p, const Polynomial& q);
Polynomial poly_mul(const Polynomial& p, const Polynomial& q);
double poly_eval(const Polynomial& p, std::span<const double> z);
Polynomial poly_pow(const Polynomial& p, int e);

std::size_t binomial(std::size_t n, std::size_t k);

/// All exponent vectors of total degree <= d over n variables, in graded-lex
/// order.
class MonomialBasis {
 public:
  MonomialBasis(std::size_t n, int d);

  std::size_t num_vars() const { return n_; }
  int max_degree() const { return d_; }
  std::size_t size() const { return list_.size(); }
  const Monomial& operator[](std::size_t i) const { return list_[i]; }
  auto begin() const { return list_.begin(); }
  auto end() const { return list_.end(); }
  const std::vector<Monomial>& list() const { return list_; }

 private:
  std::size_t n_;
  int d_;
  std::vector<Monomial> list_;
};

MonomialBasis basis(std::size_t n, int d);

/// Applies the univariate polynomial with coefficients (c_d, ..., c_1, c_0)
/// to each argument.
std::vector<Polynomial> compose_affine(std::span<const double> coeffs,
                                       std::span<const Polynomial> args);

/// Same, with coefficients that are themselves polynomials over the
/// arguments' variable space (used for learnable activations).
std::vector<Polynomial> compose_affine(std::span<const Polynomial> coeffs,
                                       std::span<const Polynomial> args);

}  // namespace polyact
