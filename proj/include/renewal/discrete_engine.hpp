#pragma once

/// Forward iteration of the tilde-normalized recursion, the y_n = x̃_n n^{-γ}
/// sequence, its residuals against the renewal part, the running-product
/// bound certificates and estimators of the limit C.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "renewal/constants.hpp"
#include "renewal/error.hpp"
#include "renewal/model.hpp"
#include "renewal/numeric.hpp"

namespace renewal {

/// Supported float significands. Requests are rounded up to the next entry.
inline constexpr unsigned kPrecisions[] = {53, 64, 113, 237};
inline constexpr unsigned kDefaultPrecision = 64;

inline unsigned supported_precision(unsigned bits) {
  for (unsigned p : kPrecisions)
    if (bits <= p) return p;
  throw ArgumentError("precision of " + std::to_string(bits) + " bits exceeds the supported maximum of 237");
}

template <class T>
struct TypeTag {
  using type = T;
};

/// Calls f(TypeTag<T>{}) with the float type carrying `bits` of precision.
template <class F>
decltype(auto) with_precision(unsigned bits, F&& f) {
  switch (supported_precision(bits)) {
    case 53:
      return f(TypeTag<double>{});
    case 64:
      return f(TypeTag<long double>{});
    case 113:
      return f(TypeTag<Quad>{});
    default:
      return f(TypeTag<Octuple>{});
  }
}

struct ArithmeticMode {
  bool exact = false;
  unsigned bits = kDefaultPrecision;

  static ArithmeticMode exact_rational() { return {true, 0}; }
  static ArithmeticMode floating(unsigned bits = kDefaultPrecision) { return {false, supported_precision(bits)}; }

  [[nodiscard]] std::string label() const {
    return exact ? std::string("exact_rational") : "float(" + std::to_string(bits) + ")";
  }
};

struct SolveOptions {
  bool enforce_nonnegative_weights = true;
  double negativity_tol = 1e-12;
};

struct SolutionTrace {
  std::size_t N = 0;
  std::vector<double> x_tilde;  ///< x_tilde[n-1] = x̃_n
  std::vector<double> y;        ///< y[n-1] = x̃_n n^{-γ}
  ArithmeticMode mode;
  double gamma_used = 0.0;
  double q_used = 1.0;
  std::vector<Rational> x_exact;  ///< populated in exact mode only
};

/// x_n = Σ_{j<n} w_{n,j} x_{n-j} + r_n for n = 1..N, in the arithmetic of T.
template <class T>
std::vector<T> iterate_recursion(const DiscreteProblem<T>& p, std::size_t N, const SolveOptions& opts = {}) {
  if (N == 0) throw ArgumentError("horizon N must be at least 1");
  const std::vector<T> a = p.a.values(N);
  const std::vector<T> b = p.b.values(N);
  const std::vector<T> r = p.r.values(N);
  const bool b_zero = p.b.is_zero();

  std::size_t j_static = N;
  if (!p.a.has_tail() && !p.b.has_tail())
    j_static = std::max(p.a.last_nonzero().value_or(0), p.b.last_nonzero().value_or(0));

  std::vector<T> inv(N + 1, T(0));
  if (!b_zero)
    for (std::size_t k = 1; k <= N; ++k) inv[k] = T(1) / T(static_cast<long>(k));

  std::vector<T> x(N + 1, T(0));
  std::vector<T> crow;
  for (std::size_t n = 1; n <= N; ++n) {
    const bool has_c = p.c.fill_row(n, crow);
    const std::size_t jmax = has_c ? n - 1 : std::min(n - 1, j_static);
    CompensatedSum<T> acc;
    for (std::size_t j = 1; j <= jmax; ++j) {
      T w = a[j - 1];
      if (!b_zero) w += b[j - 1] * inv[p.weight_form == WeightForm::b_over_n ? n : n - j];
      if (has_c) w += crow[j - 1];
      if (opts.enforce_nonnegative_weights) {
        bool negative;
        if constexpr (is_exact_v<T>) {
          negative = w < T(0);
        } else {
          negative = w < T(0) && -w > T(opts.negativity_tol) *
                                          (abs_of(a[j - 1]) + (b_zero ? T(0) : abs_of(b[j - 1]) * inv[1]) +
                                           (has_c ? abs_of(crow[j - 1]) : T(0)));
        }
        if (negative)
          throw NumericError("negative weight w_{" + std::to_string(n) + "," + std::to_string(j) +
                             "} = " + detail::fmt_double(to_double(w)));
      }
      if constexpr (is_exact_v<T>) {
        if (x[n - j] == 0 || w == 0) continue;
      }
      acc.add(w * x[n - j]);
    }
    x[n] = acc.value() + r[n - 1];
    if (!is_finite_value(x[n]))
      throw NumericError("overflow at n = " + std::to_string(n) +
                         " in float mode; retry with a higher precision or exact mode");
  }
  x.erase(x.begin());
  return x;
}

namespace detail {

/// y_n = x_n n^{-γ}, formed in the arithmetic of T so that x_n outside the
/// double range still gives a representable y_n.
template <class T>
std::vector<double> make_y(const std::vector<T>& x, double gamma) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    if (gamma == 0.0) {
      y[i] = to_double(x[i]);
    } else if constexpr (is_exact_v<T>) {
      double direct = to_double(x[i]) * std::pow(n, -gamma);
      if (x[i] == 0) {
        y[i] = 0.0;
      } else if (std::isfinite(direct) && std::fabs(direct) >= std::numeric_limits<double>::min()) {
        y[i] = direct;
      } else {
        double mag = std::exp(log_abs(x[i]) - gamma * std::log(n));
        y[i] = x[i] < 0 ? -mag : mag;
      }
    } else {
      using std::pow;
      using boost::multiprecision::pow;
      y[i] = to_double(T(x[i] * T(pow(T(n), T(-gamma)))));
    }
  }
  return y;
}

}  // namespace detail

/// Solves the tilde-normalized problem. The raw problem is tilted by sc.q
/// (converted exactly in exact mode) before iterating.
inline SolutionTrace solve(const DiscreteProblem<Rational>& p, const SpectralConstants& sc, std::size_t N,
                           ArithmeticMode mode = ArithmeticMode::floating(), const SolveOptions& opts = {}) {
  if (N == 0) throw ArgumentError("horizon N must be at least 1");
  if (!(sc.q > 0.0)) throw ArgumentError("spectral point must be positive");
  SolutionTrace tr;
  tr.N = N;
  tr.mode = mode;
  tr.gamma_used = sc.gamma;
  tr.q_used = sc.q;
  tr.x_tilde.resize(N);
  if (mode.exact) {
    DiscreteProblem<Rational> np = normalize(p, Rational(sc.q));
    tr.x_exact = iterate_recursion(np, N, opts);
    for (std::size_t i = 0; i < N; ++i) tr.x_tilde[i] = to_double(tr.x_exact[i]);
    tr.y = detail::make_y(tr.x_exact, sc.gamma);
  } else {
    with_precision(mode.bits, [&](auto tag) {
      using T = typename decltype(tag)::type;
      DiscreteProblem<T> np = normalize(p.template cast<T>(), T(sc.q));
      std::vector<T> x = iterate_recursion(np, N, opts);
      for (std::size_t i = 0; i < N; ++i) tr.x_tilde[i] = to_double(x[i]);
      tr.y = detail::make_y(x, sc.gamma);
    });
  }
  return tr;
}

/// Smallest N0 with x̃_n > 0 for N0 ≤ n ≤ N. Absent when x̃_N ≤ 0 or when the
/// final positive run does not reach back into the lower half of the trace.
inline std::optional<std::size_t> positivity_horizon(const SolutionTrace& tr) {
  const std::size_t N = tr.x_tilde.size();
  if (N == 0) return std::nullopt;
  auto positive = [&](std::size_t i) { return tr.x_exact.empty() ? tr.x_tilde[i] > 0.0 : tr.x_exact[i] > 0; };
  std::size_t start = N;
  while (start > 0 && positive(start - 1)) --start;
  if (start == N) return std::nullopt;
  std::size_t n0 = start + 1;
  if (n0 > N / 2 + 1) return std::nullopt;
  return n0;
}

struct ResidualReport {
  std::vector<double> rho;  ///< rho[n-1] = y_n - Σ_{j<n} a_j y_{n-j}
  double tail_max = 0.0;    ///< max |rho_n| over the last decade n ∈ [N/10, N]
};

/// max |v_n| over 1-based n ∈ [lo, hi].
inline double window_max_abs(std::span<const double> v, std::size_t lo, std::size_t hi) {
  double m = 0.0;
  lo = std::max<std::size_t>(lo, 1);
  hi = std::min(hi, v.size());
  for (std::size_t n = lo; n <= hi; ++n) m = std::max(m, std::fabs(v[n - 1]));
  return m;
}

inline ResidualReport residual(std::span<const double> y, const DecaySequence<double>& a) {
  const std::size_t N = y.size();
  const std::vector<double> av = a.values(N);
  std::size_t jmax = N;
  if (!a.has_tail()) jmax = a.last_nonzero().value_or(0);
  ResidualReport out;
  out.rho.resize(N);
  for (std::size_t n = 1; n <= N; ++n) {
    CompensatedSum<double> acc;
    std::size_t top = std::min(n - 1, jmax);
    for (std::size_t j = 1; j <= top; ++j) {
      if (av[j - 1] == 0.0) continue;
      acc.add(av[j - 1] * y[n - j - 1]);
    }
    out.rho[n - 1] = y[n - 1] - acc.value();
  }
  out.tail_max = window_max_abs(out.rho, std::max<std::size_t>(N / 10, 1), N);
  return out;
}

/// Residuals of the trace against the normalized renewal part ã.
inline ResidualReport residual(const SolutionTrace& tr, const DecaySequence<double>& a_normalized) {
  return residual(std::span<const double>(tr.y), a_normalized);
}

enum class CertificateStatus { bounded, inconclusive };

inline const char* to_string(CertificateStatus s) { return s == CertificateStatus::bounded ? "bounded" : "inconclusive"; }

struct BoundCertificate {
  std::vector<double> s_upper;  ///< s_upper[n-1], n = 1..N
  std::vector<double> s_lower;  ///< s_lower[n-1], zero for n ≤ N_threshold
  double product_upper = 1.0;
  double product_lower = 1.0;
  bool lower_positive = false;
  std::optional<std::size_t> N_threshold;
  double cauchy_ratio = 0.0;
  CertificateStatus status = CertificateStatus::inconclusive;
};

/// Running-product certificates built from
///   s_n  = |Σ_{j<n} (w_{n,j}(1-j/n)^γ - a_j)| + r_n n^{-γ}
///   s'_n = Σ_{j>n-N0} a_j + |Σ_{j≤n-N0} (w_{n,j}(1-j/n)^γ - a_j)|,   n > N0
/// on the normalized problem. The upper product is reported bounded when the
/// partial sums of s_n contract over successive dyadic blocks.
inline BoundCertificate bound_certificate(const DiscreteProblem<double>& p, const SolutionTrace& tr, double gamma) {
  const std::size_t N = tr.N;
  BoundCertificate cert;
  cert.s_upper.assign(N, 0.0);
  cert.s_lower.assign(N, 0.0);
  cert.N_threshold = positivity_horizon(tr);

  const std::vector<double> a = p.a.values(N);
  const std::vector<double> b = p.b.values(N);
  const std::vector<double> r = p.r.values(N);
  // (m/n)^γ and n^{-γ}; through logs when N^|γ| leaves the double range
  const bool use_logs = std::fabs(gamma) * std::log(static_cast<double>(std::max<std::size_t>(N, 2))) > 600.0;
  std::vector<double> pw(N + 1, 1.0);  // pw[k] = k^γ
  std::vector<double> lg(N + 1, 0.0);  // lg[k] = log k
  for (std::size_t k = 1; k <= N; ++k) {
    lg[k] = std::log(static_cast<double>(k));
    if (!use_logs) pw[k] = std::pow(static_cast<double>(k), gamma);
  }
  auto ratio = [&](std::size_t m, std::size_t n) {
    return use_logs ? std::exp(gamma * (lg[m] - lg[n])) : pw[m] / pw[n];
  };
  auto inv_pw = [&](std::size_t n) { return use_logs ? std::exp(-gamma * lg[n]) : 1.0 / pw[n]; };

  std::vector<double> crow;
  const std::size_t n0 = cert.N_threshold.value_or(N + 1);
  for (std::size_t n = 1; n <= N; ++n) {
    const bool has_c = p.c.fill_row(n, crow);
    CompensatedSum<double> upper;
    CompensatedSum<double> lower;
    for (std::size_t j = 1; j < n; ++j) {
      double denom = p.weight_form == WeightForm::b_over_n ? static_cast<double>(n) : static_cast<double>(n - j);
      double w = a[j - 1] + b[j - 1] / denom + (has_c ? crow[j - 1] : 0.0);
      double term = w * ratio(n - j, n) - a[j - 1];
      upper.add(term);
      if (n > n0 && j + n0 <= n) lower.add(term);
    }
    cert.s_upper[n - 1] = std::fabs(upper.value()) + r[n - 1] * inv_pw(n);
    if (n > n0) cert.s_lower[n - 1] = p.a.tail_sum(n - n0 + 1) + std::fabs(lower.value());
  }

  cert.product_upper = 1.0;
  for (double s : cert.s_upper) cert.product_upper *= 1.0 + s;
  cert.product_lower = 1.0;
  cert.lower_positive = cert.N_threshold.has_value();
  for (std::size_t n = n0 + 1; n <= N; ++n) {
    cert.product_lower *= 1.0 - cert.s_lower[n - 1];
    if (cert.s_lower[n - 1] >= 1.0) cert.lower_positive = false;
  }
  if (!cert.N_threshold) cert.product_lower = 0.0;

  auto block = [&](std::size_t lo, std::size_t hi) {  // Σ s_n over (lo, hi]
    CompensatedSum<double> acc;
    for (std::size_t n = lo + 1; n <= hi; ++n) acc.add(cert.s_upper[n - 1]);
    return acc.value();
  };
  double recent = block(N / 2, N);
  double earlier = block(N / 4, N / 2);
  if (recent < 1e-12 && earlier < 1e-12) {
    cert.cauchy_ratio = 0.0;
    cert.status = CertificateStatus::bounded;
  } else {
    cert.cauchy_ratio = earlier > 0.0 ? recent / earlier : kInfinity;
    cert.status = cert.cauchy_ratio <= 0.75 ? CertificateStatus::bounded : CertificateStatus::inconclusive;
  }
  return cert;
}

enum class EstimateStatus { converged, not_converged, inconclusive };

inline const char* to_string(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::converged:
      return "converged";
    case EstimateStatus::not_converged:
      return "not_converged";
    case EstimateStatus::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

struct AsymptoticEstimate {
  double C_hat = 0.0;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  std::string method = "tail_mean";
  double dispersion = 0.0;
  double relative_dispersion = 0.0;
  double aitken = 0.0;
  EstimateStatus status = EstimateStatus::inconclusive;
};

/// Mean of y over [⌈N/2⌉, N] with Aitken Δ² on y_{2^k} as a cross-check.
inline AsymptoticEstimate estimate_C(std::span<const double> y, double tol) {
  const std::size_t N = y.size();
  if (N == 0) throw ArgumentError("estimate_C: empty window");
  AsymptoticEstimate est;
  est.window_lo = (N + 1) / 2;
  est.window_hi = N;
  CompensatedSum<double> acc;
  double lo = kInfinity;
  double hi = -kInfinity;
  for (std::size_t n = est.window_lo; n <= N; ++n) {
    acc.add(y[n - 1]);
    lo = std::min(lo, y[n - 1]);
    hi = std::max(hi, y[n - 1]);
  }
  est.C_hat = acc.value() / static_cast<double>(N - est.window_lo + 1);
  est.dispersion = hi - lo;
  est.relative_dispersion = est.C_hat != 0.0 ? est.dispersion / std::fabs(est.C_hat) : kInfinity;

  std::vector<double> dyadic;
  for (std::size_t m = 1; m <= N; m *= 2) dyadic.push_back(y[m - 1]);
  est.aitken = est.C_hat;
  if (dyadic.size() >= 3) {
    double y0 = dyadic[dyadic.size() - 3];
    double y1 = dyadic[dyadic.size() - 2];
    double y2 = dyadic[dyadic.size() - 1];
    double den = (y2 - y1) - (y1 - y0);
    est.aitken = std::fabs(den) > 1e-300 ? y2 - (y2 - y1) * (y2 - y1) / den : y2;
  }

  if (!(est.C_hat > 0.0)) {
    est.status = EstimateStatus::inconclusive;
  } else if (est.relative_dispersion > tol) {
    est.status = EstimateStatus::not_converged;
  } else if (std::fabs(est.aitken - est.C_hat) <= tol * est.C_hat) {
    est.status = EstimateStatus::converged;
  } else {
    est.status = EstimateStatus::inconclusive;
  }
  return est;
}

inline AsymptoticEstimate estimate_C(const SolutionTrace& tr, double tol) {
  return estimate_C(std::span<const double>(tr.y), tol);
}

/// Least-squares slope of log y_n against log n over [lo, hi].
inline LinearFit loglog_slope(std::span<const double> y, std::size_t lo, std::size_t hi) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t n = std::max<std::size_t>(lo, 1); n <= std::min(hi, y.size()); ++n) {
    if (!(y[n - 1] > 0.0)) throw NumericError("log-log fit needs positive y_n (n = " + std::to_string(n) + ")");
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(y[n - 1]));
  }
  return fit_line(lx, ly);
}

struct DiscreteRun {
  SpectralConstants constants;
  SolutionTrace trace;
  BoundCertificate certificate;
  bool escalated = false;
};

/// Solves in float mode and re-solves at 113 bits when the upper product
/// exceeds 1e8.
inline DiscreteRun solve_with_escalation(const DiscreteProblem<Rational>& p, const SpectralConstants& sc,
                                         std::size_t N, ArithmeticMode mode, const SolveOptions& opts = {}) {
  DiscreteRun run;
  run.constants = sc;
  run.trace = solve(p, sc, N, mode, opts);
  DiscreteProblem<double> nd = normalize(p.template cast<double>(), sc.q);
  run.certificate = bound_certificate(nd, run.trace, sc.gamma);
  if (!mode.exact && mode.bits < 113 && run.certificate.product_upper > 1e8) {
    run.trace = solve(p, sc, N, ArithmeticMode::floating(113), opts);
    run.certificate = bound_certificate(nd, run.trace, sc.gamma);
    run.escalated = true;
  }
  return run;
}

}  // namespace renewal
