#pragma once

/// Laplace-side pipeline for the integral equation: the transforms A, B, R,
/// the functions
///
///     L(s)  = d - (B(s) - A'(s)) / (1 - A(s))
///     R*(s) = -(R'(s) - d R(s) - C(s)) / (1 - A(s))
///     G(s)  = ∫_s^∞ R*(t) exp(-∫_s^t L(u) du) dt,
///
/// transforms of a solved trace, and the small-s / large-x ladders used to
/// check the Tauberian correspondence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "renewal/constants.hpp"
#include "renewal/error.hpp"
#include "renewal/model.hpp"
#include "renewal/numeric.hpp"
#include "renewal/volterra_engine.hpp"

namespace renewal {

struct TransformValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

/// (-1)^k ∫_0^∞ e^{-sx} x^k f(x) dx.
inline TransformValue transform(const DecayFunction& f, double s, int k = 0) {
  if (f.is_zero()) return {};
  MomentValue m = f.laplace(s, k);
  return {m.value, m.error_bound};
}

/// (-1)^k ∫_0^∞ e^{-sx} x^k g(x) dx from a trace: trapezoid on [0, T] with a
/// Richardson estimate of the discretisation error, plus the bound
/// g(T)·Γ(k+1, sT)/s^{k+1} on the part beyond T, valid for nonincreasing g.
inline TransformValue trace_transform(const ContinuousTrace& tr, double s, int k = 0) {
  if (!(s > 0.0)) throw ArgumentError("trace transforms need s > 0");
  if (k < 0) throw ArgumentError("derivative order must be nonnegative");
  const std::size_t M = tr.grid.M;
  const double h = tr.grid.h;
  auto f = [&](std::size_t i) {
    double x = tr.grid.node(i);
    return std::exp(-s * x) * std::pow(x, k) * tr.g[i];
  };
  CompensatedSum<double> fine;
  CompensatedSum<double> coarse;
  for (std::size_t i = 0; i <= M; ++i) {
    double v = f(i);
    double wf = (i == 0 || i == M) ? 0.5 : 1.0;
    fine.add(wf * v);
    if (i % 2 == 0) coarse.add(wf * v);
  }
  double I_h = h * fine.value();
  double err = 0.0;
  if (M >= 4 && M % 2 == 0) err = std::fabs(I_h - 2.0 * h * coarse.value()) / 3.0;
  double tail = std::fabs(tr.g.back()) * upper_gamma_int(k, s * tr.grid.T) / std::pow(s, k + 1);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return {sign * I_h, err + tail};
}

/// Richardson combination of trace transforms at steps h (fine) and 2h
/// (coarse). The bound covers both the quadrature and the O(h²) error of
/// the solved g itself.
inline TransformValue trace_transform(const ContinuousTrace& fine, const ContinuousTrace& coarse, double s,
                                      int k = 0) {
  if (std::fabs(coarse.grid.h - 2.0 * fine.grid.h) > 1e-12 * fine.grid.h ||
      std::fabs(coarse.grid.T - fine.grid.T) > 1e-9 * fine.grid.T)
    throw ArgumentError("coarse trace must share the horizon and use twice the fine step");
  TransformValue f = trace_transform(fine, s, k);
  TransformValue c = trace_transform(coarse, s, k);
  double diff = f.value - c.value;
  double tail = std::fabs(fine.g.back()) * upper_gamma_int(k, s * fine.grid.T) / std::pow(s, k + 1);
  return {f.value + diff / 3.0, std::fabs(diff) / 3.0 + tail};
}

/// ∫_0^x g(u) u^k du by the trapezoid rule on the trace, for x on the grid
/// or between nodes (linear interpolation of the integrand).
inline double trace_moment_integral(const ContinuousTrace& tr, double x, int k) {
  const double h = tr.grid.h;
  if (x <= 0.0) return 0.0;
  x = std::min(x, tr.grid.T);
  auto f = [&](std::size_t i) { return tr.g[i] * std::pow(tr.grid.node(i), k); };
  std::size_t full = static_cast<std::size_t>(std::floor(x / h + 1e-9));
  full = std::min(full, tr.grid.M);
  CompensatedSum<double> acc;
  for (std::size_t i = 0; i < full; ++i) acc.add(0.5 * h * (f(i) + f(i + 1)));
  double rest = x - static_cast<double>(full) * h;
  if (rest > 1e-12 * h && full < tr.grid.M) {
    double fx = interpolate(tr, x) * std::pow(x, k);
    acc.add(0.5 * rest * (f(full) + fx));
  }
  return acc.value();
}

struct GValue {
  double value = 0.0;
  double quadrature_error = 0.0;
  double truncation_bound = 0.0;
  [[nodiscard]] double error_bound() const { return quadrature_error + truncation_bound; }
};

/// Evaluates the transform-side functions of one problem. When the kernel c
/// is nonzero a solved trace is required for C(s); the convolution
/// ∫_0^x g(x-u) ψ(u) du is computed once on construction.
class LaplacePipeline {
 public:
  explicit LaplacePipeline(ContinuousProblem p, const ContinuousTrace* trace = nullptr) : p_(std::move(p)) {
    if (!p_.c.is_zero()) {
      if (trace == nullptr) throw ArgumentError("a solved trace is required for C(s) when c is nonzero");
      trace_ = *trace;
      const std::size_t M = trace_->grid.M;
      const double h = trace_->grid.h;
      std::vector<double> psi(M + 1);
      for (std::size_t k = 0; k <= M; ++k) psi[k] = p_.c.psi()(trace_->grid.node(k));
      conv_.assign(M + 1, 0.0);
      for (std::size_t i = 1; i <= M; ++i) {
        CompensatedSum<double> acc;
        for (std::size_t k = 0; k <= i; ++k) {
          double wt = (k == 0 || k == i) ? 0.5 : 1.0;
          acc.add(wt * psi[k] * trace_->g[i - k]);
        }
        conv_[i] = h * acc.value();
      }
    }
  }

  [[nodiscard]] const ContinuousProblem& problem() const { return p_; }

  [[nodiscard]] TransformValue A(double s, int k = 0) const { return transform(p_.a, s, k); }
  [[nodiscard]] TransformValue B(double s, int k = 0) const { return transform(p_.b, s, k); }
  [[nodiscard]] TransformValue R(double s, int k = 0) const { return transform(p_.r, s, k); }

  /// ∫_0^∞ e^{-sx} (x+d) φ(x) ∫_0^x g(x-u) ψ(u) du dx over the trace.
  [[nodiscard]] TransformValue C(double s) const {
    if (p_.c.is_zero()) return {};
    const auto& tr = *trace_;
    const std::size_t M = tr.grid.M;
    CompensatedSum<double> acc;
    double last = 0.0;
    for (std::size_t i = 0; i <= M; ++i) {
      double x = tr.grid.node(i);
      double v = std::exp(-s * x) * (x + p_.d) * p_.c.phi()(x) * conv_[i];
      acc.add(((i == 0 || i == M) ? 0.5 : 1.0) * v);
      last = v;
    }
    return {tr.grid.h * acc.value(), std::fabs(last) / s};
  }

  [[nodiscard]] double one_minus_A(double s) const {
    double v = 1.0 - A(s).value;
    if (std::fabs(v) < 1e-14)
      throw NumericError("1 - A(s) vanishes to working precision at s = " + detail::fmt_double(s) +
                         "; use a larger s");
    return v;
  }

  [[nodiscard]] double L(double s) const {
    return p_.d - (B(s).value - A(s, 1).value) / one_minus_A(s);
  }

  [[nodiscard]] double Rstar(double s) const {
    return -(R(s, 1).value - p_.d * R(s).value - C(s).value) / one_minus_A(s);
  }

  /// Outer integral truncated at s + 40/d; inner ∫L by adaptive quadrature.
  [[nodiscard]] GValue G(double s) const {
    if (!(s > 0.0)) throw ArgumentError("G(s) needs s > 0");
    const double top = s + 40.0 / p_.d;
    double inner_err = 0.0;
    auto exponent = [&](double t) {
      QuadratureResult q = integrate_adaptive([&](double u) { return L(u); }, s, t, 1e-12);
      inner_err = std::max(inner_err, q.error);
      return q.value;
    };
    double max_integrand = 0.0;
    auto integrand = [&](double t) {
      double v = Rstar(t) * std::exp(-exponent(t));
      max_integrand = std::max(max_integrand, std::fabs(v));
      return v;
    };
    QuadratureResult outer = integrate_adaptive(integrand, s, top, 1e-10, 15);
    GValue out;
    out.value = outer.value;
    out.quadrature_error = outer.error + inner_err * max_integrand * (top - s);
    double Lt = L(top);
    double ft = std::fabs(Rstar(top) * std::exp(-exponent(top)));
    out.truncation_bound = Lt > 0.0 ? 2.0 * ft / Lt : kInfinity;
    return out;
  }

 private:
  ContinuousProblem p_;
  std::optional<ContinuousTrace> trace_;
  std::vector<double> conv_;
};

inline double compute_L(const ContinuousProblem& p, double s) { return LaplacePipeline(p).L(s); }

inline double compute_Rstar(const ContinuousProblem& p, double s, const ContinuousTrace* trace = nullptr) {
  return LaplacePipeline(p, trace).Rstar(s);
}

inline GValue compute_G(const ContinuousProblem& p, double s, const ContinuousTrace* trace = nullptr) {
  return LaplacePipeline(p, trace).G(s);
}

struct TransformSample {
  std::vector<double> s_values;
  std::vector<double> A, B, R, L, Rstar, G, C_of_s;
  std::vector<double> A_tail, B_tail, R_tail, G_error;
};

inline TransformSample sample_transforms(const LaplacePipeline& lp, const std::vector<double>& s_values) {
  TransformSample out;
  out.s_values = s_values;
  for (double s : s_values) {
    if (!(s > 0.0)) throw ArgumentError("transform samples need s > 0");
    TransformValue a = lp.A(s), b = lp.B(s), r = lp.R(s), c = lp.C(s);
    GValue g = lp.G(s);
    out.A.push_back(a.value);
    out.B.push_back(b.value);
    out.R.push_back(r.value);
    out.C_of_s.push_back(c.value);
    out.L.push_back(lp.L(s));
    out.Rstar.push_back(lp.Rstar(s));
    out.G.push_back(g.value);
    out.A_tail.push_back(a.tail_bound);
    out.B_tail.push_back(b.tail_bound);
    out.R_tail.push_back(r.tail_bound + c.tail_bound);
    out.G_error.push_back(g.error_bound());
  }
  return out;
}

/// G(2^j) decreases for j = 0..6 and G(64) ≤ G(1)/8.
inline bool g_vanishes_at_infinity(const LaplacePipeline& lp) {
  double prev = kInfinity;
  double first = 0.0;
  for (int j = 0; j <= 6; ++j) {
    double v = lp.G(std::ldexp(1.0, j)).value;
    if (j == 0) first = v;
    if (!(v < prev)) return false;
    prev = v;
  }
  return prev <= first / 8.0;
}

enum class LadderStatus { stable, unsettled, diverging };

inline const char* to_string(LadderStatus s) {
  switch (s) {
    case LadderStatus::stable:
      return "stable";
    case LadderStatus::unsettled:
      return "unsettled";
    case LadderStatus::diverging:
      return "diverging";
  }
  return "unsettled";
}

enum class TauberianVerdict { consistent, inconsistent, inconclusive };

inline const char* to_string(TauberianVerdict v) {
  switch (v) {
    case TauberianVerdict::consistent:
      return "consistent";
    case TauberianVerdict::inconsistent:
      return "inconsistent";
    case TauberianVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

/// A ladder is stable when its last relative increment is at most
/// `settle_tol`, or when the increments keep one sign and each is at most
/// `contraction` times the previous one. It is diverging when the last
/// increment exceeds the one before.
inline LadderStatus classify_ladder(const std::vector<double>& v, double settle_tol = 0.01,
                                    double contraction = 0.8) {
  if (v.size() < 3) throw ArgumentError("a ladder needs at least three values");
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    double scale = std::max(std::fabs(v[i + 1]), 1e-300);
    d.push_back((v[i + 1] - v[i]) / scale);
  }
  if (std::fabs(d.back()) <= settle_tol) return LadderStatus::stable;
  bool contracting = true;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    if (d[i] * d[i + 1] <= 0.0 || std::fabs(d[i + 1]) > contraction * std::fabs(d[i])) contracting = false;
  }
  if (contracting) return LadderStatus::stable;
  if (std::fabs(d.back()) > std::fabs(d[d.size() - 2])) return LadderStatus::diverging;
  return LadderStatus::unsettled;
}

struct TauberianOptions {
  std::vector<double> s_ladder{0.4, 0.2, 0.1, 0.05};
  std::vector<double> x_fractions{1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2};
  double epsilon = 0.05;
  std::size_t oscillation_points = 64;
};

struct TauberianReport {
  int k = 1;
  double gamma = 0.0;
  double rho = 0.0;  ///< γ + k + 1
  std::vector<double> s_ladder;
  std::vector<double> K_estimates;  ///< s^ρ G^{(k)}(s)
  std::vector<double> K_errors;
  std::vector<double> x_ladder;
  std::vector<double> U_ratios;  ///< U(x)/x^ρ
  LadderStatus K_status = LadderStatus::unsettled;
  LadderStatus U_status = LadderStatus::unsettled;
  bool slow_osc_pass = false;
  double karamata_gap = 0.0;  ///< relative gap between |K| and A_k Γ(ρ+1)
  TauberianVerdict verdict = TauberianVerdict::inconclusive;
  std::string reason;
};

/// Smallest positive integer k with γ + k + 1 > 0.
inline int tauberian_order(double gamma) {
  int k = 1;
  while (gamma + k + 1.0 <= 0.0) ++k;
  return k;
}

/// f(u) ≤ f(x)(1+ε) for x < u < x(1+δ) on a log grid, where f(x) = g(x)x^k
/// and δ = (1+ε)^{1/k} - 1.
inline bool slow_oscillation(const ContinuousTrace& tr, int k, double epsilon, std::size_t points = 64) {
  const double delta = std::pow(1.0 + epsilon, 1.0 / k) - 1.0;
  const double hi = tr.grid.T / (1.0 + delta);
  const double lo = std::max(10.0 * tr.grid.h, hi / 1000.0);
  if (!(hi > lo)) throw NumericError("trace horizon too short for the slow-oscillation test");
  auto f = [&](double x) { return interpolate(tr, x) * std::pow(x, k); };
  for (std::size_t i = 0; i < points; ++i) {
    double x = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
    double fx = f(x);
    for (int m = 1; m <= 4; ++m) {
      double u = x * (1.0 + delta * m / 5.0);
      if (f(u) > fx * (1.0 + epsilon) + 1e-12) return false;
    }
  }
  return true;
}

inline TauberianReport tauberian_check(const ContinuousTrace& tr, double gamma, const TauberianOptions& opt = {}) {
  TauberianReport rep;
  rep.gamma = gamma;
  rep.k = tauberian_order(gamma);
  rep.rho = gamma + rep.k + 1.0;
  const double T = tr.grid.T;
  const double s_min = std::max(1e-3, 5.0 / T);
  for (double s : opt.s_ladder)
    if (s < s_min * (1.0 - 1e-12))
      throw NumericError("trace horizon too short: s = " + detail::fmt_double(s) + " needs T >= " +
                         detail::fmt_double(5.0 / s));

  rep.s_ladder = opt.s_ladder;
  for (double s : opt.s_ladder) {
    TransformValue v = trace_transform(tr, s, rep.k);
    double scale = std::pow(s, rep.rho);
    rep.K_estimates.push_back(scale * v.value);
    rep.K_errors.push_back(scale * v.tail_bound);
  }
  for (double f : opt.x_fractions) {
    double x = f * T;
    rep.x_ladder.push_back(x);
    rep.U_ratios.push_back(trace_moment_integral(tr, x, rep.k) / std::pow(x, rep.rho));
  }
  rep.K_status = classify_ladder(rep.K_estimates);
  rep.U_status = classify_ladder(rep.U_ratios);
  rep.slow_osc_pass = slow_oscillation(tr, rep.k, opt.epsilon, opt.oscillation_points);

  double A_k = rep.U_ratios.back();
  double predicted = A_k * std::tgamma(rep.rho + 1.0);
  rep.karamata_gap = predicted != 0.0 ? std::fabs(std::fabs(rep.K_estimates.back()) - predicted) / std::fabs(predicted)
                                      : kInfinity;

  if (!tr.monotone_decreasing) {
    rep.verdict = TauberianVerdict::inconclusive;
    rep.reason = "g is not monotone decreasing on the trace";
  } else if (gamma > 0.0) {
    rep.verdict = TauberianVerdict::inconclusive;
    rep.reason = "gamma is positive";
  } else if (!rep.slow_osc_pass) {
    rep.verdict = TauberianVerdict::inconsistent;
    rep.reason = "slow-oscillation test failed";
  } else if (rep.K_status == LadderStatus::diverging || rep.U_status == LadderStatus::diverging) {
    rep.verdict = TauberianVerdict::inconsistent;
    rep.reason = "a ladder diverges";
  } else if (rep.K_status == LadderStatus::stable && rep.U_status == LadderStatus::stable) {
    rep.verdict = TauberianVerdict::consistent;
    rep.reason = "both ladders stabilise and f(x) = g(x) x^k oscillates slowly";
  } else {
    rep.verdict = TauberianVerdict::inconclusive;
    rep.reason = "ladders have not settled";
  }
  return rep;
}

}  // namespace renewal
