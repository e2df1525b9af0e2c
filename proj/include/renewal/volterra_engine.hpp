#pragma once

/// Trapezoidal product integration of
///
///     g(t) = ∫_0^t w_{t,s} g(t-s) ds + r(t)
///
/// on a uniform grid, with the s = 0 endpoint treated implicitly, plus the
/// exponent fit, tail band and monotonicity checks on the solved trace.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "renewal/constants.hpp"
#include "renewal/error.hpp"
#include "renewal/model.hpp"
#include "renewal/numeric.hpp"

namespace renewal {

struct QuadratureGrid {
  double h = 0.0;
  double T = 0.0;
  std::size_t M = 0;

  static QuadratureGrid make(double h, double T) {
    if (!(h > 0.0) || !(T > 0.0) || !std::isfinite(h) || !std::isfinite(T))
      throw ArgumentError("grid needs a positive step h and horizon T");
    double steps = std::round(T / h);
    if (steps < 1.0 || std::fabs(steps * h - T) > 1e-9 * T)
      throw ArgumentError("horizon T = " + detail::fmt_double(T) + " is not a multiple of h = " + detail::fmt_double(h));
    return {h, T, static_cast<std::size_t>(steps)};
  }

  [[nodiscard]] double node(std::size_t i) const { return static_cast<double>(i) * h; }
  [[nodiscard]] std::size_t size() const { return M + 1; }
};

struct ContinuousTrace {
  QuadratureGrid grid;
  std::vector<double> g;
  std::vector<double> H;  ///< g(t_i)(t_i + d)^{-γ}
  double gamma = 0.0;
  double d = 1.0;
  bool monotone_decreasing = false;
};

/// g_{i+1} ≤ g_i + tol·h at every node.
inline bool monotonicity(const ContinuousTrace& tr, double tol) {
  for (std::size_t i = 0; i + 1 < tr.g.size(); ++i)
    if (tr.g[i + 1] > tr.g[i] + tol * tr.grid.h) return false;
  return true;
}

/// Default slack for monotonicity: the scheme's own O(h²) drift per unit time.
inline double default_monotone_tol(const QuadratureGrid& grid) { return grid.h * grid.h; }

inline ContinuousTrace solve_volterra(const ContinuousProblem& p, const QuadratureGrid& grid, double gamma) {
  const std::size_t M = grid.M;
  const double h = grid.h;
  std::vector<double> av(M + 1), bv(M + 1), psi(M + 1), phi(M + 1), scale(M + 1);
  const bool has_b = !p.b.is_zero();
  const bool has_c = !p.c.is_zero();
  for (std::size_t k = 0; k <= M; ++k) {
    double t = grid.node(k);
    av[k] = p.a(t);
    bv[k] = has_b ? p.b(t) : 0.0;
    psi[k] = has_c ? p.c.psi()(t) : 0.0;
    phi[k] = has_c ? p.c.phi()(t) : 0.0;
    scale[k] = std::fabs(av[k]) + std::fabs(bv[k]) + std::fabs(psi[k]);
  }

  ContinuousTrace tr;
  tr.grid = grid;
  tr.gamma = gamma;
  tr.d = p.d;
  tr.g.assign(M + 1, 0.0);
  tr.g[0] = p.r(0.0);

  std::vector<double> w(M + 1);
  for (std::size_t i = 1; i <= M; ++i) {
    const double ti = grid.node(i);
    const double inv = 1.0 / (ti + p.d);
    const double ph = phi[i];
    for (std::size_t k = 0; k <= i; ++k) {
      double v = av[k];
      if (has_b) v += bv[k] * inv;
      if (has_c) v += ph * psi[k];
      if (v < -1e-12 * std::max(1.0, scale[k] * std::max(1.0, std::fabs(ph))))
        throw NumericError("negative kernel sample w(" + detail::fmt_double(ti) + ", " +
                           detail::fmt_double(grid.node(k)) + ") = " + detail::fmt_double(v));
      w[k] = v;
    }
    const double denom = 1.0 - 0.5 * h * w[0];
    if (!(denom > 0.0))
      throw NumericError("diagonal denominator 1 - h w(t,0)/2 = " + detail::fmt_double(denom) +
                         " is not positive; reduce h");
    CompensatedSum<double> acc;
    for (std::size_t k = 1; k < i; ++k) acc.add(w[k] * tr.g[i - k]);
    double rhs = h * acc.value() + 0.5 * h * w[i] * tr.g[0] + p.r(ti);
    tr.g[i] = rhs / denom;
    if (!std::isfinite(tr.g[i]))
      throw NumericError("solution overflowed at t = " + detail::fmt_double(ti));
  }

  tr.H.resize(M + 1);
  for (std::size_t i = 0; i <= M; ++i) tr.H[i] = tr.g[i] * std::pow(grid.node(i) + p.d, -gamma);
  tr.monotone_decreasing = monotonicity(tr, default_monotone_tol(grid));
  return tr;
}

inline ContinuousTrace solve_volterra(const ContinuousProblem& p, const QuadratureGrid& grid) {
  return solve_volterra(p, grid, gamma_continuous(p.a, p.b).gamma);
}

struct ExponentFit {
  double gamma_hat = 0.0;
  double C_hat = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// log g(t_i) ≈ log C + γ̂ log t_i over nodes in [T1, T2].
inline ExponentFit fit_exponent(const ContinuousTrace& tr, double T1, double T2) {
  if (!(T1 > 0.0) || !(T2 > T1)) throw ArgumentError("fit window must satisfy 0 < T1 < T2");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < tr.g.size(); ++i) {
    double t = tr.grid.node(i);
    if (t < T1 - 1e-9 * tr.grid.h || t > T2 + 1e-9 * tr.grid.h) continue;
    if (!(tr.g[i] > 0.0)) throw NumericError("fit window contains non-positive g at t = " + detail::fmt_double(t));
    lx.push_back(std::log(t));
    ly.push_back(std::log(tr.g[i]));
  }
  if (lx.size() < 10)
    throw ArgumentError("fit window holds " + std::to_string(lx.size()) + " nodes; at least 10 are needed");
  LinearFit f = fit_line(lx, ly);
  return {f.slope, std::exp(f.intercept), f.r2, f.points};
}

struct BandReport {
  double inf_H = 0.0;  ///< over the tail
  double sup_H = 0.0;  ///< over the tail
  double sup_all = 0.0;
  [[nodiscard]] double ratio() const { return inf_H > 0.0 ? sup_H / inf_H : kInfinity; }
};

/// inf and sup of g(t)(t+d)^{-γ} over the last tail_fraction of the grid.
inline BandReport check_bounds(const ContinuousTrace& tr, double gamma, double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) throw ArgumentError("tail fraction must lie in (0, 1]");
  BandReport out;
  out.inf_H = kInfinity;
  out.sup_H = -kInfinity;
  const double start = (1.0 - tail_fraction) * tr.grid.T;
  for (std::size_t i = 0; i < tr.g.size(); ++i) {
    double t = tr.grid.node(i);
    double H = tr.g[i] * std::pow(t + tr.d, -gamma);
    out.sup_all = std::max(out.sup_all, H);
    if (t >= start - 1e-9 * tr.grid.h) {
      out.inf_H = std::min(out.inf_H, H);
      out.sup_H = std::max(out.sup_H, H);
    }
  }
  return out;
}

enum class BandVerdict { pass, fail };

inline const char* to_string(BandVerdict v) { return v == BandVerdict::pass ? "pass" : "fail"; }

struct BandStability {
  BandReport at_T;
  BandReport at_2T;
  double floor = 0.0;
  double growth = 0.0;  ///< sup over [0, 2T] relative to sup over [0, T]
  BandVerdict verdict = BandVerdict::fail;
};

/// Solves on [0, T] and [0, 2T]. Passes when the tail infimum stays above
/// `floor` at both horizons and the overall supremum grows by at most
/// `growth_tol` under the doubling.
inline BandStability band_under_doubling(const ContinuousProblem& p, double h, double T, double gamma,
                                         double tail_fraction = 0.5, double floor = 1e-2, double growth_tol = 0.1) {
  BandStability out;
  out.floor = floor;
  ContinuousTrace t1 = solve_volterra(p, QuadratureGrid::make(h, T), gamma);
  ContinuousTrace t2 = solve_volterra(p, QuadratureGrid::make(h, 2.0 * T), gamma);
  out.at_T = check_bounds(t1, gamma, tail_fraction);
  out.at_2T = check_bounds(t2, gamma, tail_fraction);
  out.growth = out.at_T.sup_all > 0.0 ? out.at_2T.sup_all / out.at_T.sup_all - 1.0 : kInfinity;
  bool ok = out.at_T.inf_H > floor && out.at_2T.inf_H > floor && out.growth <= growth_tol;
  out.verdict = ok ? BandVerdict::pass : BandVerdict::fail;
  return out;
}

/// max_i |g_i - exact(t_i)| over the trace.
template <class F>
double max_error_against(const ContinuousTrace& tr, F&& exact) {
  double m = 0.0;
  for (std::size_t i = 0; i < tr.g.size(); ++i) m = std::max(m, std::fabs(tr.g[i] - exact(tr.grid.node(i))));
  return m;
}

struct HalvingCheck {
  double coarse = 0.0;  ///< error (or difference) at step h
  double fine = 0.0;    ///< error (or difference) at step h/2
  [[nodiscard]] double ratio() const { return fine > 0.0 ? coarse / fine : kInfinity; }
};

/// Max nodal error against a known solution at steps h and h/2.
template <class F>
HalvingCheck halving_against(const ContinuousProblem& p, double h, double T, F&& exact) {
  double gamma = gamma_continuous(p.a, p.b).gamma;
  ContinuousTrace c = solve_volterra(p, QuadratureGrid::make(h, T), gamma);
  ContinuousTrace f = solve_volterra(p, QuadratureGrid::make(h / 2.0, T), gamma);
  return {max_error_against(c, exact), max_error_against(f, exact)};
}

/// Differences at t = T between steps h, h/2 and h/2, h/4.
inline HalvingCheck richardson_at_horizon(const ContinuousProblem& p, double h, double T) {
  double gamma = gamma_continuous(p.a, p.b).gamma;
  double g1 = solve_volterra(p, QuadratureGrid::make(h, T), gamma).g.back();
  double g2 = solve_volterra(p, QuadratureGrid::make(h / 2.0, T), gamma).g.back();
  double g4 = solve_volterra(p, QuadratureGrid::make(h / 4.0, T), gamma).g.back();
  return {std::fabs(g1 - g2), std::fabs(g2 - g4)};
}

/// Linear interpolation of the trace at t ∈ [0, T].
inline double interpolate(const ContinuousTrace& tr, double t) {
  if (t <= 0.0) return tr.g.front();
  double u = t / tr.grid.h;
  auto i = static_cast<std::size_t>(std::floor(u));
  if (i >= tr.grid.M) return tr.g.back();
  double frac = u - static_cast<double>(i);
  return tr.g[i] * (1.0 - frac) + tr.g[i + 1] * frac;
}

}  // namespace renewal
