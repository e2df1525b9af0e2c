#pragma once

/// Spectral constants: the point q with Σ a_n q^n = 1, the exponent γ, the
/// mean μ, and the tilt that reduces a problem to q = 1.

#include <cmath>
#include <limits>
#include <string>

#include "renewal/error.hpp"
#include "renewal/model.hpp"
#include "renewal/numeric.hpp"

namespace renewal {

struct SpectralConstants {
  double q = 1.0;
  double gamma = 0.0;
  double mu = 1.0;
  double series_error_bound = 0.0;
};

struct GammaValue {
  double gamma = 0.0;
  double mu = 0.0;
  double error_bound = 0.0;
};

namespace detail {

template <class T>
double generating_sum(const DecaySequence<T>& a, double q) {
  return a.power_sum(q, 0);
}

/// Rounding bound for Σ a_n q^n evaluated in double with compensation.
template <class T>
double generating_rounding(const DecaySequence<T>& a, double q) {
  return 8.0 * std::numeric_limits<double>::epsilon() * a.power_sum(q, 0, true);
}

}  // namespace detail

/// Root of Σ a_n q^n = 1 on (0, 1/ρ): bisection to 1e-14 followed by Newton
/// polishing with the analytic derivative.
template <class T>
double solve_q(const DecaySequence<T>& a, double tol = 1e-14) {
  a.check_envelope("a");
  if (a.is_zero()) throw NumericError("no spectral point: a vanishes identically");
  auto f = [&](double q) { return detail::generating_sum(a, q) - 1.0; };

  double lo = 0.0;
  double hi;
  if (a.has_tail()) {
    hi = (1.0 - 1e-12) / to_double(a.tail()->rho);
    double fh = f(hi);
    if (!(fh > 0.0))
      throw NumericError("no spectral point: sum a_n q^n stays below 1 up to q = " + detail::fmt_double(hi) +
                         " (condition r3 violated)");
  } else {
    hi = 1.0;
    int doublings = 0;
    while (!(f(hi) > 0.0)) {
      lo = hi;
      hi *= 2.0;
      if (++doublings > 2000 || !std::isfinite(hi))
        throw NumericError("no spectral point: sum a_n q^n never reaches 1");
    }
  }

  for (int it = 0; it < 400 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  double q = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    double deriv = a.power_sum(q, 1) / q;
    if (!(deriv > 0.0) || !std::isfinite(deriv)) break;
    double next = q - f(q) / deriv;
    if (!(next > lo - 1e-12 && next < hi + 1e-12)) break;
    if (std::fabs(f(next)) > std::fabs(f(q))) break;
    q = next;
  }
  double residual = std::fabs(f(q));
  if (residual > std::max(tol, detail::generating_rounding(a, q)))
    throw NumericError("spectral point did not converge: |sum a_n q^n - 1| = " + detail::fmt_double(residual));
  return q;
}

/// γ = Σ b_n q^n / Σ n a_n q^n together with μ = Σ n a_n q^n.
template <class T>
GammaValue gamma_discrete(const DecaySequence<T>& a, const DecaySequence<T>& b, double q) {
  if (!(q > 0.0)) throw ArgumentError("gamma_discrete: q must be positive");
  double mu = a.power_sum(q, 1);
  if (!std::isfinite(mu)) throw NumericError("mean sum n a_n q^n diverges at q = " + detail::fmt_double(q));
  if (!(mu > 1e-14)) throw NumericError("degenerate mean: sum n a_n q^n = " + detail::fmt_double(mu));
  double B = b.power_sum(q, 0);
  if (!std::isfinite(B)) throw NumericError("sum b_n q^n diverges at q = " + detail::fmt_double(q));
  const double eps = std::numeric_limits<double>::epsilon();
  double err_b = 8.0 * eps * b.power_sum(q, 0, true);
  double err_mu = 8.0 * eps * mu;
  GammaValue out;
  out.mu = mu;
  out.gamma = B / mu;
  out.error_bound = err_b / mu + std::fabs(B) * err_mu / (mu * mu);
  return out;
}

/// γ = ∫ b / ∫ s a(s) ds, closed form for mixtures.
inline GammaValue gamma_continuous(const DecayFunction& a, const DecayFunction& b) {
  MomentValue mu = a.moment(1);
  if (!std::isfinite(mu.value)) throw NumericError("mean of a diverges");
  if (!(mu.value > 1e-14)) throw NumericError("degenerate mean: int s a(s) ds = " + detail::fmt_double(mu.value));
  MomentValue B = b.is_zero() ? MomentValue{} : b.moment(0);
  if (!std::isfinite(B.value)) throw NumericError("b is not integrable");
  GammaValue out;
  out.mu = mu.value;
  out.gamma = B.value / mu.value;
  out.error_bound = B.error_bound / mu.value + std::fabs(B.value) * mu.error_bound / (mu.value * mu.value);
  return out;
}

/// The tilted problem ã_j = q^j a_j, b̃_j = q^j b_j, c̃_{n,j} = q^j c_{n,j},
/// r̃_n = q^n r_n.
template <class T>
DiscreteProblem<T> normalize(const DiscreteProblem<T>& p, const T& q) {
  if (q == T(1)) return p;
  return {p.a.tilted(q), p.b.tilted(q), p.c.tilted(q), p.r.tilted(q), p.weight_form};
}

template <class T>
SpectralConstants spectral_constants(const DiscreteProblem<T>& p, double tol = 1e-14) {
  SpectralConstants sc;
  sc.q = solve_q(p.a, tol);
  GammaValue g = gamma_discrete(p.a, p.b, sc.q);
  sc.gamma = g.gamma;
  sc.mu = g.mu;
  sc.series_error_bound =
      std::fabs(p.a.power_sum(sc.q) - 1.0) + detail::generating_rounding(p.a, sc.q) + g.error_bound;
  return sc;
}

inline SpectralConstants spectral_constants(const ContinuousProblem& p) {
  GammaValue g = gamma_continuous(p.a, p.b);
  MomentValue mass = p.a.moment(0);
  SpectralConstants sc;
  sc.q = 1.0;
  sc.gamma = g.gamma;
  sc.mu = g.mu;
  sc.series_error_bound = std::fabs(mass.value - 1.0) + mass.error_bound + g.error_bound;
  return sc;
}

}  // namespace renewal
