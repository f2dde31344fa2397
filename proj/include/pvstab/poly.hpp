#pragma once

#include <complex>
#include <string>
#include <vector>

namespace pvstab {

/// Real-coefficient polynomial in the Laplace variable s, stored as
/// ascending powers: c[k] multiplies s^k. Canonical form keeps the
/// highest-index coefficient nonzero; the zero polynomial has an empty list.
/// Only coefficients that are exactly 0.0 are trimmed — arithmetic never
/// rounds small coefficients away.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  static Polynomial zero() { return Polynomial(); }
  static Polynomial constant(double a);
  /// Monomial a * s^k.
  static Polynomial term(double a, int k);

  const std::vector<double>& coeffs() const { return c_; }
  /// Degree of the polynomial; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  /// Leading (highest-power) coefficient; 0 for the zero polynomial.
  double leading() const { return c_.empty() ? 0.0 : c_.back(); }
  double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }

  /// Horner evaluation.
  std::complex<double> eval(std::complex<double> s) const;
  double eval(double s) const;

  /// Largest coefficient magnitude (0 for the zero polynomial).
  double max_abs_coeff() const;

  Polynomial derivative() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double a, const Polynomial& p);
  Polynomial operator-() const;

  bool operator==(const Polynomial& other) const { return c_ == other.c_; }

 private:
  void trim();
  std::vector<double> c_;
};

/// Ratio of two real polynomials. Canonical form gives the denominator a
/// positive leading coefficient (the sign is absorbed into the numerator);
/// the denominator is never the zero polynomial. No pole/zero cancellation
/// happens implicitly — see rf_reduce.
struct RationalFunction {
  Polynomial num;
  Polynomial den;

  /// Builds the canonical form; throws DomainError if d is the zero
  /// polynomial.
  static RationalFunction from(Polynomial n, Polynomial d);
  static RationalFunction constant(double a);

  bool operator==(const RationalFunction& other) const {
    return num == other.num && den == other.den;
  }
};

/// All complex roots of a real polynomial, plus the polishing residual.
/// The set is closed under conjugation (within 1e-6 relative) and its
/// cardinality equals the degree of the source polynomial. residual_bound is
/// a backward-error style measure: max over roots of
/// |p(z)| / sum_k |c_k||z|^k.
struct PoleSet {
  std::vector<std::complex<double>> values;
  double residual_bound = 0.0;
};

/// Roots via eigenvalues of the companion matrix of the monic form, after
/// rescaling s -> s/sigma with sigma the geometric mean of the end
/// coefficient magnitude ratio (tames the 1e-18-spanning coefficients that
/// uH/uF parameters produce), each root refined by Newton polishing against
/// the original polynomial. Throws DomainError for degree < 1 and InputError
/// for non-finite coefficients.
PoleSet poly_roots(const Polynomial& p, int polish_iters = 12);

enum class RfOp { Add, Sub, Mul, Div };

/// Exact coefficient arithmetic over a common denominator; the result is
/// canonicalized but never cancelled. Division by a zero rational throws
/// DomainError.
RationalFunction rf_arith(const RationalFunction& a, const RationalFunction& b,
                          RfOp op);

RationalFunction rf_add(const RationalFunction& a, const RationalFunction& b);
RationalFunction rf_sub(const RationalFunction& a, const RationalFunction& b);
RationalFunction rf_mul(const RationalFunction& a, const RationalFunction& b);
RationalFunction rf_div(const RationalFunction& a, const RationalFunction& b);

/// Explicit pole/zero cancellation: removes numerator/denominator root pairs
/// closer than rel_tol * max(|root|, 1). Pairing is deterministic:
/// repeatedly match the globally nearest pair, ties broken by smallest
/// imaginary part, then smallest real part. Returns the input unchanged when
/// nothing cancels. rel_tol must lie in (0, 1e-2].
RationalFunction rf_reduce(const RationalFunction& r, double rel_tol);

/// num(s)/den(s) by Horner evaluation; evaluation where den(s) == 0 throws
/// DomainError naming the pole location.
std::complex<double> rf_eval(const RationalFunction& r, std::complex<double> s);

/// Second-order Pade approximation of the delay e^{-Td s}:
/// (Td^2 s^2 - 6 Td s + 12) / (Td^2 s^2 + 6 Td s + 12); Td = 0 gives the
/// constant 1. Negative Td throws InputError.
RationalFunction pade_delay(double Td);

/// e^{-j omega Td}: the exact delay frequency response, used only for
/// cross-checks of the Pade model, never in rational algebra.
std::complex<double> exact_delay(double Td, double omega);

/// Reconstructs a real polynomial `leading * prod (s - root)` from a
/// conjugate-closed root list (helper shared by rf_reduce and tests).
Polynomial poly_from_roots(double leading,
                           const std::vector<std::complex<double>>& roots);

}  // namespace pvstab
