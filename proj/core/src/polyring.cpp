#include "polyact/polyring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace polyact {

namespace {

void require_same_vars(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": variable count mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

Monomial::Monomial(std::size_t n) : exps_(n, 0) {}

Monomial::Monomial(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::unit(std::size_t n, std::size_t i) {
  if (i >= n) throw DimensionError("Monomial::unit: index out of range");
  Monomial m(n);
  m.exps_[i] = 1;
  m.degree_ = 1;
  return m;
}

Monomial Monomial::operator*(const Monomial& other) const {
  require_same_vars(size(), other.size(), "Monomial product");
  Monomial out(*this);
  for (std::size_t i = 0; i < exps_.size(); ++i) out.exps_[i] += other.exps_[i];
  out.degree_ += other.degree_;
  return out;
}

double Monomial::eval(std::span<const double> z) const {
  double r = 1.0;
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    for (int e = 0; e < exps_[i]; ++e) r *= z[i];
  }
  return r;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const auto ea = a.exponents();
  const auto eb = b.exponents();
  return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end(),
                                      std::greater<int>());
}

std::size_t MonomialHash::operator()(const Monomial& m) const {
  std::size_t h = 1469598103934665603ULL;
  for (int e : m.exponents()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

Polynomial Polynomial::constant(std::size_t n, double value) {
  Polynomial p(n);
  p.add_term(Monomial(n), value);
  return p;
}

Polynomial Polynomial::variable(std::size_t n, std::size_t i, double coeff) {
  Polynomial p(n);
  p.add_term(Monomial::unit(n, i), coeff);
  return p;
}

Polynomial Polynomial::monomial(const Monomial& m, double coeff) {
  Polynomial p(m.size());
  p.add_term(m, coeff);
  return p;
}

int Polynomial::degree() const {
  // Terms are sorted by degree, so the last one carries the maximum.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Monomial& m, double coeff) {
  require_same_vars(n_, m.size(), "Polynomial::add_term");
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) < kDropTolerance) terms_.erase(it);
}

double Polynomial::eval(std::span<const double> z) const {
  if (z.size() != n_) {
    throw DimensionError("poly_eval: point has length " + std::to_string(z.size()) +
                         ", polynomial has " + std::to_string(n_) + " variables");
  }
  double s = 0.0;
  for (const auto& [m, c] : terms_) s += c * m.eval(z);
  return s;
}

Polynomial Polynomial::embed(std::size_t new_n, std::size_t offset) const {
  if (offset + n_ > new_n) throw DimensionError("Polynomial::embed: target space too small");
  Polynomial out(new_n);
  for (const auto& [m, c] : terms_) {
    std::vector<int> e(new_n, 0);
    std::copy(m.exponents().begin(), m.exponents().end(), e.begin() + offset);
    out.terms_.emplace(Monomial(std::move(e)), c);
  }
  return out;
}

std::string Polynomial::to_string(std::span<const std::string> names) const {
  if (names.size() != n_) throw DimensionError("Polynomial::to_string: wrong name count");
  if (terms_.empty()) return "0";

  std::vector<std::pair<const Monomial*, double>> order;
  order.reserve(terms_.size());
  for (const auto& [m, c] : terms_) {
    if (m.degree() > 0) order.emplace_back(&m, c);
  }
  if (terms_.begin()->first.degree() == 0) order.emplace_back(&terms_.begin()->first, terms_.begin()->second);

  std::string out;
  bool first = true;
  for (const auto& [m, c] : order) {
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;

    std::string factors;
    for (std::size_t i = 0; i < n_; ++i) {
      const int e = (*m)[i];
      if (e == 0) continue;
      if (!factors.empty()) factors += "*";
      factors += names[i];
      if (e > 1) factors += "^" + std::to_string(e);
    }
    if (factors.empty()) {
      out += format_number(mag);
    } else if (mag == 1.0) {
      out += factors;
    } else {
      out += format_number(mag) + "*" + factors;
    }
  }
  return out;
}

std::string Polynomial::to_string() const {
  std::vector<std::string> names(n_);
  for (std::size_t i = 0; i < n_; ++i) names[i] = "z" + std::to_string(i + 1);
  return to_string(names);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  require_same_vars(n_, other.n_, "poly_add");
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  require_same_vars(n_, other.n_, "poly_sub");
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    if (std::abs(it->second) < kDropTolerance) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require_same_vars(a.n_, b.n_, "poly_mul");
  Polynomial out(a.n_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      auto [it, inserted] = out.terms_.try_emplace(ma * mb, ca * cb);
      if (!inserted) it->second += ca * cb;
    }
  }
  // Cancellation is only checked once the full product is accumulated.
  std::erase_if(out.terms_, [](const auto& t) { return std::abs(t.second) < Polynomial::kDropTolerance; });
  return out;
}

Polynomial poly_add(const Polynomial& p, const Polynomial& q) { return p + q; }
Polynomial poly_mul(const Polynomial& p, const Polynomial& q) { return p * q; }
double poly_eval(const Polynomial& p, std::span<const double> z) { return p.eval(z); }

Polynomial poly_pow(const Polynomial& p, int e) {
  if (e < 0) throw std::invalid_argument("poly_pow: negative exponent");
  Polynomial result = Polynomial::constant(p.num_vars(), 1.0);
  Polynomial base = p;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

void enumerate_degree(std::size_t pos, int remaining, std::vector<int>& cur,
                      std::vector<Monomial>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    cur[pos] = a;
    enumerate_degree(pos + 1, remaining - a, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(std::size_t n, int d) : n_(n), d_(d) {
  if (n == 0) throw std::invalid_argument("basis: need at least one variable");
  if (d < 0) throw std::invalid_argument("basis: negative degree");
  list_.reserve(binomial(n + static_cast<std::size_t>(d), static_cast<std::size_t>(d)));
  std::vector<int> cur(n, 0);
  for (int t = 0; t <= d; ++t) enumerate_degree(0, t, cur, list_);
}

MonomialBasis basis(std::size_t n, int d) { return MonomialBasis(n, d); }

std::vector<Polynomial> compose_affine(std::span<const double> coeffs,
                                       std::span<const Polynomial> args) {
  if (args.empty()) throw std::invalid_argument("compose_affine: no arguments");
  std::vector<Polynomial> lifted;
  lifted.reserve(coeffs.size());
  for (double c : coeffs) lifted.push_back(Polynomial::constant(args.front().num_vars(), c));
  return compose_affine(std::span<const Polynomial>(lifted), args);
}

std::vector<Polynomial> compose_affine(std::span<const Polynomial> coeffs,
                                       std::span<const Polynomial> args) {
  if (coeffs.empty()) throw std::invalid_argument("compose_affine: empty coefficient list");
  if (args.empty()) throw std::invalid_argument("compose_affine: no arguments");
  const std::size_t n = args.front().num_vars();
  for (const auto& a : args) require_same_vars(n, a.num_vars(), "compose_affine");
  for (const auto& c : coeffs) require_same_vars(n, c.num_vars(), "compose_affine");

  std::vector<Polynomial> out;
  out.reserve(args.size());
  for (const auto& arg : args) {
    // Horner: ((c_d t + c_{d-1}) t + ...) t + c_0
    Polynomial acc = coeffs.front();
    for (std::size_t j = 1; j < coeffs.size(); ++j) acc = acc * arg + coeffs[j];
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace polyact
