#include "pvstab/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pvstab/errors.hpp"
#include "pvstab/kernels.hpp"

namespace pvstab {

// ---------------------------------------------------------------------------
// Polynomial
// ---------------------------------------------------------------------------

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  trim();
}

Polynomial Polynomial::constant(double a) {
  return a == 0.0 ? Polynomial() : Polynomial({a});
}

Polynomial Polynomial::term(double a, int k) {
  if (a == 0.0) return Polynomial();
  std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
  c.back() = a;
  return Polynomial(std::move(c));
}

void Polynomial::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

std::complex<double> Polynomial::eval(std::complex<double> s) const {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = c_.size(); k-- > 0;) acc = acc * s + c_[k];
  return acc;
}

double Polynomial::eval(double s) const {
  double acc = 0.0;
  for (std::size_t k = c_.size(); k-- > 0;) acc = acc * s + c_[k];
  return acc;
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial();
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k)
    d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] = a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] = a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] -= b.c_[k];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial();
  std::vector<double> c(a.c_.size() + b.c_.size() - 1);
  kern::convolve(a.c_.data(), a.c_.size(), b.c_.data(), b.c_.size(), c.data());
  return Polynomial(std::move(c));
}

Polynomial operator*(double a, const Polynomial& p) {
  if (a == 0.0) return Polynomial();
  std::vector<double> c = p.c_;
  for (double& v : c) v *= a;
  return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-() const { return -1.0 * (*this); }

// ---------------------------------------------------------------------------
// RationalFunction
// ---------------------------------------------------------------------------

RationalFunction RationalFunction::from(Polynomial n, Polynomial d) {
  if (d.is_zero()) throw DomainError("rational function with zero denominator");
  if (d.leading() < 0.0) {
    n = -1.0 * n;
    d = -1.0 * d;
  }
  return RationalFunction{std::move(n), std::move(d)};
}

RationalFunction RationalFunction::constant(double a) {
  return RationalFunction{Polynomial::constant(a), Polynomial::constant(1.0)};
}

RationalFunction rf_arith(const RationalFunction& a, const RationalFunction& b,
                          RfOp op) {
  switch (op) {
    case RfOp::Add:
      return RationalFunction::from(a.num * b.den + b.num * a.den,
                                    a.den * b.den);
    case RfOp::Sub:
      return RationalFunction::from(a.num * b.den - b.num * a.den,
                                    a.den * b.den);
    case RfOp::Mul:
      return RationalFunction::from(a.num * b.num, a.den * b.den);
    case RfOp::Div:
      if (b.num.is_zero())
        throw DomainError("division by a zero rational function");
      return RationalFunction::from(a.num * b.den, a.den * b.num);
  }
  throw InputError("unknown rational operation");
}

RationalFunction rf_add(const RationalFunction& a, const RationalFunction& b) {
  return rf_arith(a, b, RfOp::Add);
}
RationalFunction rf_sub(const RationalFunction& a, const RationalFunction& b) {
  return rf_arith(a, b, RfOp::Sub);
}
RationalFunction rf_mul(const RationalFunction& a, const RationalFunction& b) {
  return rf_arith(a, b, RfOp::Mul);
}
RationalFunction rf_div(const RationalFunction& a, const RationalFunction& b) {
  return rf_arith(a, b, RfOp::Div);
}

std::complex<double> rf_eval(const RationalFunction& r,
                             std::complex<double> s) {
  const std::complex<double> d = r.den.eval(s);
  if (d == std::complex<double>{0.0, 0.0}) {
    std::ostringstream msg;
    msg << "rational function evaluated at one of its poles: s = (" << s.real()
        << ", " << s.imag() << ")";
    throw DomainError(msg.str());
  }
  return r.num.eval(s) / d;
}

RationalFunction pade_delay(double Td) {
  if (Td < 0.0) throw InputError("pade_delay: negative delay");
  if (Td == 0.0) return RationalFunction::constant(1.0);
  return RationalFunction::from(Polynomial({12.0, -6.0 * Td, Td * Td}),
                                Polynomial({12.0, 6.0 * Td, Td * Td}));
}

std::complex<double> exact_delay(double Td, double omega) {
  if (Td < 0.0) throw InputError("exact_delay: negative delay");
  return std::exp(std::complex<double>(0.0, -omega * Td));
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

namespace {

// Evaluates p and p' at z in one Horner pass.
void eval_with_derivative(const std::vector<double>& c, std::complex<double> z,
                          std::complex<double>& p, std::complex<double>& dp) {
  p = {0.0, 0.0};
  dp = {0.0, 0.0};
  for (std::size_t k = c.size(); k-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[k];
  }
}

double residual_at(const std::vector<double>& c, std::complex<double> z) {
  std::complex<double> p{0.0, 0.0};
  double scale = 0.0;
  const double az = std::abs(z);
  for (std::size_t k = c.size(); k-- > 0;) {
    p = p * z + c[k];
    scale = scale * az + std::abs(c[k]);
  }
  return std::abs(p) / std::max(scale, std::numeric_limits<double>::min());
}

}  // namespace

PoleSet poly_roots(const Polynomial& p, int polish_iters) {
  const auto& c = p.coeffs();
  for (double v : c)
    if (!std::isfinite(v))
      throw InputError("poly_roots: non-finite coefficient");
  const int deg = p.degree();
  if (deg < 1)
    throw DomainError("poly_roots: degree must be at least 1");

  // s -> s/sigma rescaling: geometric mean of the magnitude ratio between the
  // lowest and highest nonzero coefficients, one factor per power of s.
  std::size_t lo = 0;
  while (c[lo] == 0.0) ++lo;
  const std::size_t hi = c.size() - 1;
  double sigma = 1.0;
  if (hi > lo) {
    sigma = std::pow(std::abs(c[lo]) / std::abs(c[hi]),
                     1.0 / static_cast<double>(hi - lo));
    if (!std::isfinite(sigma) || sigma <= 0.0) sigma = 1.0;
  }

  // Monic coefficients of q(x) = p(sigma x) / (c_hi sigma^hi).
  std::vector<double> b(c.size());
  double pw = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    b[k] = c[k] * pw;
    pw *= sigma;
  }
  const double lead = b.back();
  for (double& v : b) v /= lead;

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -b[i];

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw EngineError("poly_roots: companion eigenvalue iteration failed");

  PoleSet out;
  out.values.reserve(deg);
  for (int i = 0; i < deg; ++i) {
    std::complex<double> z = sigma * solver.eigenvalues()[i];
    // Newton refinement against the original polynomial; accept only
    // improving steps. Real-coefficient IEEE arithmetic maps conjugate
    // inputs to conjugate outputs, so the pair structure survives polishing.
    double best = residual_at(c, z);
    for (int it = 0; it < polish_iters && best > 0.0; ++it) {
      std::complex<double> pv, dv;
      eval_with_derivative(c, z, pv, dv);
      if (dv == std::complex<double>{0.0, 0.0}) break;
      const std::complex<double> step = pv / dv;
      const std::complex<double> zn = z - step;
      const double rn = residual_at(c, zn);
      if (rn >= best) break;
      z = zn;
      best = rn;
      if (std::abs(step) <= 1e-16 * (std::abs(z) + 1.0)) break;
    }
    out.values.push_back(z);
  }

  std::sort(out.values.begin(), out.values.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });

  double rb = 0.0;
  for (const auto& z : out.values) rb = std::max(rb, residual_at(c, z));
  out.residual_bound = rb;
  return out;
}

// ---------------------------------------------------------------------------
// rf_reduce
// ---------------------------------------------------------------------------

Polynomial poly_from_roots(double leading,
                           const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> acc{{1.0, 0.0}};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(acc.size() + 1, {0.0, 0.0});
    for (std::size_t k = 0; k < acc.size(); ++k) {
      next[k] -= acc[k] * r;
      next[k + 1] += acc[k];
    }
    acc = std::move(next);
  }
  double worst = 0.0;
  double scale = 0.0;
  std::vector<double> c(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) {
    c[k] = leading * acc[k].real();
    worst = std::max(worst, std::abs(acc[k].imag()));
    scale = std::max(scale, std::abs(acc[k]));
  }
  if (scale > 0.0 && worst > 1e-8 * scale)
    throw EngineError(
        "poly_from_roots: root set is not conjugate-closed; the reconstructed "
        "polynomial would not be real");
  return Polynomial(std::move(c));
}

RationalFunction rf_reduce(const RationalFunction& r, double rel_tol) {
  if (!(rel_tol > 0.0) || rel_tol > 1e-2)
    throw InputError("rf_reduce: rel_tol must lie in (0, 1e-2]");
  if (r.num.degree() < 1 || r.den.degree() < 1) return r;

  const PoleSet zeros = poly_roots(r.num);
  const PoleSet poles = poly_roots(r.den);
  const std::size_t nz = zeros.values.size();
  const std::size_t np = poles.values.size();

  std::vector<bool> zero_cancel(nz, false), pole_cancel(np, false);
  // Deterministic pairing: repeatedly take the globally nearest
  // (zero, pole) pair within its cancellation threshold; ties resolved by
  // the smaller imaginary part, then the smaller real part, of the pair.
  while (true) {
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t bi = nz, bj = np;
    for (std::size_t i = 0; i < nz; ++i) {
      if (zero_cancel[i]) continue;
      for (std::size_t j = 0; j < np; ++j) {
        if (pole_cancel[j]) continue;
        const double d = std::abs(zeros.values[i] - poles.values[j]);
        const double thr =
            rel_tol * std::max({std::abs(zeros.values[i]),
                                std::abs(poles.values[j]), 1.0});
        if (d > thr) continue;
        bool better = d < best_d;
        if (d == best_d && bi < nz) {
          const auto key = [](const std::complex<double>& z,
                              const std::complex<double>& p) {
            return std::make_pair(std::min(z.imag(), p.imag()),
                                  std::min(z.real(), p.real()));
          };
          better = key(zeros.values[i], poles.values[j]) <
                   key(zeros.values[bi], poles.values[bj]);
        }
        if (better) {
          best_d = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == nz) break;
    zero_cancel[bi] = true;
    pole_cancel[bj] = true;
  }

  if (std::none_of(zero_cancel.begin(), zero_cancel.end(),
                   [](bool b) { return b; }))
    return r;

  std::vector<std::complex<double>> kept_zeros, kept_poles;
  for (std::size_t i = 0; i < nz; ++i)
    if (!zero_cancel[i]) kept_zeros.push_back(zeros.values[i]);
  for (std::size_t j = 0; j < np; ++j)
    if (!pole_cancel[j]) kept_poles.push_back(poles.values[j]);

  return RationalFunction::from(
      poly_from_roots(r.num.leading(), kept_zeros),
      poly_from_roots(r.den.leading(), kept_poles));
}

}  // namespace pvstab
