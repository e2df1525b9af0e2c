#pragma once

/// Built-in problems with known answers, including three counterexamples
/// that show which hypotheses cannot be dropped. Each entry lists expected
/// facts; run_entry measures them and reports pass/fail per fact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "renewal/constants.hpp"
#include "renewal/discrete_engine.hpp"
#include "renewal/error.hpp"
#include "renewal/laplace.hpp"
#include "renewal/model.hpp"
#include "renewal/numeric.hpp"
#include "renewal/volterra_engine.hpp"

namespace renewal {

enum class Provenance { closed_form, independent_oracle, literature_remark };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::closed_form:
      return "closed_form";
    case Provenance::independent_oracle:
      return "independent_oracle";
    case Provenance::literature_remark:
      return "literature_remark";
  }
  return "closed_form";
}

enum class Check { approx, at_most, at_least, in_range, holds, fails };

struct ExpectedFact {
  std::string name;
  std::string operation;
  Check check = Check::approx;
  double value = 0.0;
  double bound = 0.0;  ///< absolute tolerance (approx) or upper end (in_range)
  Provenance provenance = Provenance::closed_form;

  [[nodiscard]] bool accepts(double actual) const {
    switch (check) {
      case Check::approx:
        return std::fabs(actual - value) <= bound;
      case Check::at_most:
        return actual <= value;
      case Check::at_least:
        return actual >= value;
      case Check::in_range:
        return actual >= value && actual <= bound;
      case Check::holds:
        return actual != 0.0;
      case Check::fails:
        return actual == 0.0;
    }
    return false;
  }

  [[nodiscard]] std::string describe() const {
    using detail::fmt_double;
    switch (check) {
      case Check::approx:
        return name + " = " + fmt_double(value) + " +/- " + fmt_double(bound);
      case Check::at_most:
        return name + " <= " + fmt_double(value);
      case Check::at_least:
        return name + " >= " + fmt_double(value);
      case Check::in_range:
        return name + " in [" + fmt_double(value) + ", " + fmt_double(bound) + "]";
      case Check::holds:
        return name + " holds";
      case Check::fails:
        return name + " does not hold";
    }
    return name;
  }
};

inline ExpectedFact fact_approx(std::string name, std::string op, double v, double tol, Provenance pv) {
  return {std::move(name), std::move(op), Check::approx, v, tol, pv};
}
inline ExpectedFact fact_at_most(std::string name, std::string op, double v, Provenance pv) {
  return {std::move(name), std::move(op), Check::at_most, v, 0.0, pv};
}
inline ExpectedFact fact_at_least(std::string name, std::string op, double v, Provenance pv) {
  return {std::move(name), std::move(op), Check::at_least, v, 0.0, pv};
}
inline ExpectedFact fact_in_range(std::string name, std::string op, double lo, double hi, Provenance pv) {
  return {std::move(name), std::move(op), Check::in_range, lo, hi, pv};
}
inline ExpectedFact fact_holds(std::string name, std::string op, Provenance pv) {
  return {std::move(name), std::move(op), Check::holds, 1.0, 0.0, pv};
}
inline ExpectedFact fact_fails(std::string name, std::string op, Provenance pv) {
  return {std::move(name), std::move(op), Check::fails, 0.0, 0.0, pv};
}

enum class EntryKind { discrete, continuous, sequence };

inline const char* to_string(EntryKind k) {
  switch (k) {
    case EntryKind::discrete:
      return "discrete";
    case EntryKind::continuous:
      return "continuous";
    case EntryKind::sequence:
      return "sequence";
  }
  return "discrete";
}

struct DiscreteSettings {
  std::size_t N = 1000;
  ArithmeticMode mode = ArithmeticMode::floating();
  double tol = 0.02;
  bool allow_negative_weights = false;
  std::optional<SpectralConstants> manual_constants;
  std::vector<double> z_grid{1.05, 1.1, 1.2, 1.5, 2.0};
};

struct ContinuousSettings {
  double h = 0.02;
  double T = 50.0;
  double z = 1.2;
  double tau = 1.0;
  double horizon = 50.0;
  double fit_lo = 25.0;
  double fit_hi = 50.0;
  double tail_fraction = 0.5;
  std::vector<double> s_values{0.5, 1.0, 2.0};
};

/// A raw sequence y_1..y_N checked against a renewal part a.
struct SequenceData {
  std::function<double(std::size_t)> y;
  DecaySequence<double> a;
  std::size_t N = 0;
};

struct EntryResult;

struct CorpusEntry {
  std::string name;
  std::string description;
  EntryKind kind = EntryKind::discrete;
  std::optional<DiscreteProblem<Rational>> discrete;
  std::optional<ContinuousProblem> continuous;
  std::optional<SequenceData> sequence;
  DiscreteSettings dset;
  ContinuousSettings cset;
  std::vector<ExpectedFact> expected;
  std::function<void(const CorpusEntry&, EntryResult&)> extra;  ///< entry-specific measurements
};

struct FactOutcome {
  ExpectedFact fact;
  double actual = 0.0;
  bool pass = false;
};

struct EntryResult {
  std::string name;
  std::map<std::string, double> measured;
  std::vector<FactOutcome> facts;
  std::optional<ValidationReport> validation;
  std::optional<SpectralConstants> constants;
  std::optional<SolutionTrace> discrete_trace;
  std::optional<ResidualReport> residuals;
  std::optional<BoundCertificate> certificate;
  std::optional<AsymptoticEstimate> estimate;
  std::optional<ContinuousTrace> continuous_trace;
  std::optional<TransformSample> transforms;
  std::optional<TauberianReport> tauberian;
  std::optional<std::size_t> positivity;

  [[nodiscard]] bool all_pass() const {
    return std::all_of(facts.begin(), facts.end(), [](const FactOutcome& f) { return f.pass; });
  }
};

// ---------------------------------------------------------------------------
// Counterexample helpers.

/// x_k = 2 + sin(log(k+1))
inline double cex2_target(std::size_t k) { return 2.0 + std::sin(std::log(static_cast<double>(k) + 1.0)); }

/// Correction (x_k - Σ_{j<k} x_{k-j} a_j) / Σ_{j<k} x_j shared by every w_{k,i}.
inline double cex2_correction(const DecaySequence<double>& a, std::size_t k, std::span<const double> x_history) {
  if (k < 2) throw ArgumentError("cex2 weights need k >= 2 (no history at k = 1)");
  if (x_history.size() < k - 1) throw ArgumentError("cex2 weights need x_1..x_{k-1}");
  CompensatedSum<double> conv;
  CompensatedSum<double> mass;
  for (std::size_t j = 1; j < k; ++j) {
    conv.add(x_history[k - j - 1] * a(j));
    mass.add(x_history[j - 1]);
  }
  if (!(mass.value() > 0.0)) throw ArgumentError("cex2 weights need a positive history sum");
  return (cex2_target(k) - conv.value()) / mass.value();
}

/// w_{k,i} = a_i + correction for i = 1..k-1.
inline std::vector<double> cex2_weights(const DecaySequence<double>& a, std::size_t k,
                                        std::span<const double> x_history) {
  double corr = cex2_correction(a, k, x_history);
  std::vector<double> w(k - 1);
  for (std::size_t i = 1; i < k; ++i) w[i - 1] = a(i) + corr;
  return w;
}

/// 3 Σ_{j≥n} a_j + 3/(n-M) Σ j a_j + 3 Σ_{j≥M} j a_j for a_j = 2^{-j}.
inline double cex3_bound(std::size_t n, std::size_t M) {
  const double first_moment = detail::geometric_tail_first_moment(0.5, 1);
  return 3.0 * detail::geometric_tail(0.5, n) + 3.0 * first_moment / static_cast<double>(n - M) +
         3.0 * detail::geometric_tail_first_moment(0.5, M);
}

// ---------------------------------------------------------------------------
// Catalog.

namespace detail {

inline DecaySequence<Rational> halves(SignConstraint sign = SignConstraint::nonnegative) {
  return DecaySequence<Rational>::geometric(Rational(1), Rational(1, 2), 1, {}, sign);
}

inline void record(EntryResult& r, const std::string& key, double v) { r.measured[key] = v; }
inline void record(EntryResult& r, const std::string& key, bool v) { r.measured[key] = v ? 1.0 : 0.0; }

inline ContinuousProblem exp_problem(double beta) {
  return {DecayFunction::exponential(1.0, 1.0),
          beta == 0.0 ? DecayFunction{} : DecayFunction::exponential(beta, 1.0),
          {},
          DecayFunction::exponential(1.0, 1.0),
          1.0};
}

inline CorpusEntry geom_renewal() {
  CorpusEntry e;
  e.name = "geom-renewal";
  e.description = "a_j = 2^-j, r = delta_1; x_n = 1/2 for n >= 2";
  e.kind = EntryKind::discrete;
  e.discrete = DiscreteProblem<Rational>{halves(), DecaySequence<Rational>::zero(),
                                         PerturbationKernelDiscrete<Rational>::zero(),
                                         DecaySequence<Rational>::delta(1, Rational(1), SignConstraint::nonnegative)};
  e.dset.N = 2000;
  e.dset.mode = ArithmeticMode::exact_rational();
  e.expected = {
      fact_approx("q", "solve_q", 1.0, 1e-14, Provenance::closed_form),
      fact_approx("gamma", "gamma_discrete", 0.0, 1e-15, Provenance::closed_form),
      fact_at_most("exact_max_error", "solve", 0.0, Provenance::independent_oracle),
      fact_at_most("float_max_error", "solve", 1e-12, Provenance::independent_oracle),
      fact_approx("C_hat", "estimate_C", 0.5, 1e-12, Provenance::closed_form),
      fact_holds("status_converged", "estimate_C", Provenance::closed_form),
      fact_approx("positivity_horizon", "positivity_horizon", 1.0, 0.0, Provenance::independent_oracle),
      fact_at_most("residual_tail_max", "residual", 1e-12, Provenance::independent_oracle),
  };
  e.extra = [](const CorpusEntry& self, EntryResult& r) {
    const auto& x = r.discrete_trace->x_exact;
    Rational worst(0);
    for (std::size_t n = 2; n <= x.size(); ++n) worst = std::max(worst, Rational(abs_of(x[n - 1] - Rational(1, 2))));
    record(r, "exact_max_error", to_double(worst));
    SolutionTrace fl = solve(*self.discrete, *r.constants, self.dset.N, ArithmeticMode::floating(53));
    double fmax = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) fmax = std::max(fmax, std::fabs(fl.x_tilde[i] - to_double(x[i])));
    record(r, "float_max_error", fmax);
  };
  return e;
}

inline CorpusEntry tilted() {
  CorpusEntry e;
  e.name = "tilted";
  e.description = "a_j = (1/3)(2/3)^(j-1), b_j = -0.6 * 2^-j, r = delta_1; gamma = -0.2, mu = 3";
  e.kind = EntryKind::discrete;
  e.discrete = DiscreteProblem<Rational>{
      DecaySequence<Rational>::geometric(Rational(1, 2), Rational(2, 3), 1, {}, SignConstraint::nonnegative),
      DecaySequence<Rational>::geometric(Rational(-3, 5), Rational(1, 2)),
      PerturbationKernelDiscrete<Rational>::zero(),
      DecaySequence<Rational>::delta(1, Rational(1), SignConstraint::nonnegative)};
  e.dset.N = 10000;
  e.dset.tol = 0.02;
  e.expected = {
      fact_approx("q", "solve_q", 1.0, 1e-12, Provenance::closed_form),
      fact_approx("gamma", "gamma_discrete", -0.2, 1e-12, Provenance::closed_form),
      fact_approx("mu", "gamma_discrete", 3.0, 1e-12, Provenance::closed_form),
      fact_holds("status_converged", "estimate_C", Provenance::independent_oracle),
      fact_at_most("relative_dispersion", "estimate_C", 0.02, Provenance::independent_oracle),
      fact_at_most("loglog_slope_abs", "estimate_C", 0.02, Provenance::independent_oracle),
  };
  return e;
}

inline CorpusEntry two_atom() {
  CorpusEntry e;
  e.name = "two-atom";
  e.description = "a = {1/4, 1/4}, r = delta_1; q = (-1 + sqrt 17)/2";
  e.kind = EntryKind::discrete;
  e.discrete = DiscreteProblem<Rational>{
      DecaySequence<Rational>::finite({Rational(1, 4), Rational(1, 4)}, SignConstraint::nonnegative),
      DecaySequence<Rational>::zero(), PerturbationKernelDiscrete<Rational>::zero(),
      DecaySequence<Rational>::delta(1, Rational(1), SignConstraint::nonnegative)};
  e.dset.N = 2000;
  const double q = (-1.0 + std::sqrt(17.0)) / 2.0;
  e.expected = {
      fact_approx("q", "solve_q", q, 1e-12, Provenance::closed_form),
      fact_approx("q_after_normalize", "normalize", 1.0, 1e-12, Provenance::closed_form),
      fact_approx("C_hat", "estimate_C", 1.0 / (0.25 + q / 2.0), 1e-9, Provenance::closed_form),
  };
  e.extra = [](const CorpusEntry& self, EntryResult& r) {
    auto np = normalize(self.discrete->template cast<double>(), r.constants->q);
    record(r, "q_after_normalize", solve_q(np.a));
  };
  return e;
}

inline CorpusEntry cex1() {
  CorpusEntry e;
  e.name = "cex1";
  e.description = "w_{n,j} = 2^-n (1 - 1/(n-j)), r = delta_1; x_n = 0 for n >= 2";
  e.kind = EntryKind::discrete;
  const std::size_t N = 200;
  std::vector<std::vector<Rational>> rows;
  for (std::size_t n = 2; n <= N; ++n) {
    std::vector<Rational> row;
    Rational an = Rational(1) / power(Rational(2), n);
    for (std::size_t j = 1; j < n; ++j) row.push_back(an * (Rational(1) - Rational(1, static_cast<long>(n - j))));
    rows.push_back(std::move(row));
  }
  e.discrete = DiscreteProblem<Rational>{
      DecaySequence<Rational>::zero(SignConstraint::nonnegative), DecaySequence<Rational>::zero(),
      PerturbationKernelDiscrete<Rational>::table(std::move(rows), Rational(1), Rational(3, 4), Rational(3, 4)),
      DecaySequence<Rational>::delta(1, Rational(1), SignConstraint::nonnegative)};
  e.dset.N = N;
  e.dset.mode = ArithmeticMode::exact_rational();
  e.dset.manual_constants = SpectralConstants{1.0, 0.0, 1.0, 0.0};
  e.expected = {
      fact_fails("positivity_horizon_present", "positivity_horizon", Provenance::literature_remark),
      fact_approx("weight_2_1", "weight_discrete", 0.0, 0.0, Provenance::literature_remark),
      fact_at_most("x_tail_max_abs", "solve", 0.0, Provenance::literature_remark),
      fact_approx("x_1", "solve", 1.0, 0.0, Provenance::literature_remark),
  };
  e.extra = [](const CorpusEntry& self, EntryResult& r) {
    record(r, "weight_2_1", to_double(weight_discrete(*self.discrete, 2, 1)));
    const auto& x = r.discrete_trace->x_exact;
    Rational worst(0);
    for (std::size_t n = 2; n <= x.size(); ++n) worst = std::max(worst, Rational(abs_of(x[n - 1])));
    record(r, "x_tail_max_abs", to_double(worst));
    record(r, "x_1", to_double(x.front()));
  };
  return e;
}

inline CorpusEntry cex2() {
  CorpusEntry e;
  e.name = "cex2";
  e.description = "w_{k,i} = 2^-i + o(1) reproducing x_k = 2 + sin(log(k+1)); y_n does not converge";
  e.kind = EntryKind::discrete;
  const std::size_t N = 10000;
  const DecaySequence<double> a = DecaySequence<double>::geometric(1.0, 0.5);
  std::vector<double> history(N);
  for (std::size_t k = 1; k <= N; ++k) history[k - 1] = cex2_target(k);
  std::vector<Rational> scale;
  scale.reserve(N - 1);
  for (std::size_t k = 2; k <= N; ++k) scale.emplace_back(cex2_correction(a, k, history));
  e.discrete = DiscreteProblem<Rational>{
      halves(), DecaySequence<Rational>::zero(),
      PerturbationKernelDiscrete<Rational>::row_scaled(std::move(scale), Rational(1)),
      DecaySequence<Rational>::delta(1, Rational(cex2_target(1)), SignConstraint::nonnegative)};
  e.dset.N = N;
  e.dset.allow_negative_weights = true;
  e.expected = {
      fact_at_most("reconstruction_error", "solve", 1e-10, Provenance::literature_remark),
      fact_holds("status_not_converged", "estimate_C", Provenance::literature_remark),
      fact_holds("correction_shrinks", "cex2_weights", Provenance::independent_oracle),
      fact_approx("i_spread", "cex2_weights", 0.0, 1e-15, Provenance::closed_form),
      fact_fails("certificate_bounded", "bound_certificate", Provenance::literature_remark),
  };
  e.extra = [a](const CorpusEntry&, EntryResult& r) {
    const auto& x = r.discrete_trace->x_tilde;
    double err = 0.0;
    for (std::size_t k = 1; k <= x.size(); ++k) err = std::max(err, std::fabs(x[k - 1] - cex2_target(k)));
    record(r, "reconstruction_error", err);
    std::vector<double> hist(1000);
    for (std::size_t k = 1; k <= hist.size(); ++k) hist[k - 1] = cex2_target(k);
    record(r, "correction_shrinks",
           std::fabs(cex2_correction(a, 1000, hist)) < std::fabs(cex2_correction(a, 10, hist)));
    std::vector<double> w = cex2_weights(a, 50, hist);
    double lo = kInfinity;
    double hi = -kInfinity;
    for (std::size_t i = 1; i < 50; ++i) {
      lo = std::min(lo, w[i - 1] - a(i));
      hi = std::max(hi, w[i - 1] - a(i));
    }
    record(r, "i_spread", hi - lo);
  };
  return e;
}

inline CorpusEntry cex3() {
  CorpusEntry e;
  e.name = "cex3";
  e.description = "y_n = 2 + sin(log(1+n)) against a_j = 2^-j; residuals vanish, y_n does not converge";
  e.kind = EntryKind::sequence;
  e.sequence = SequenceData{[](std::size_t n) { return 2.0 + std::sin(std::log(1.0 + static_cast<double>(n))); },
                            DecaySequence<double>::geometric(1.0, 0.5), 10000};
  e.expected = {
      fact_at_most("residual_bound_ratio", "residual", 10.0, Provenance::literature_remark),
      fact_at_least("oscillation", "residual", 0.05, Provenance::closed_form),
      fact_holds("status_not_converged", "estimate_C", Provenance::literature_remark),
  };
  e.extra = [](const CorpusEntry& self, EntryResult& r) {
    const std::size_t N = self.sequence->N;
    double ratio = 0.0;
    for (std::size_t n = N / 2; n <= N; ++n)
      ratio = std::max(ratio, std::fabs(r.residuals->rho[n - 1]) / cex3_bound(n, n / 2));
    record(r, "residual_bound_ratio", ratio);
    record(r, "oscillation", std::fabs(self.sequence->y(N) - self.sequence->y(N / 2)));
  };
  return e;
}

inline CorpusEntry poisson() {
  CorpusEntry e;
  e.name = "poisson";
  e.description = "a = e^-s, r = e^-t, b = c = 0; g = 1";
  e.kind = EntryKind::continuous;
  e.continuous = exp_problem(0.0);
  e.cset.h = 0.01;
  e.cset.T = 50.0;
  e.cset.z = std::exp(0.5);
  e.cset.fit_lo = 25.0;
  e.cset.fit_hi = 50.0;
  e.cset.s_values = {0.5, 1.0, 2.0};
  // the discrete trapezoid kernel carries mass (h/2)coth(h/2) ≈ 1 + h²/12,
  // so the nodal error grows like h²t/12
  const double envelope = 1.1 * e.cset.h * e.cset.h * e.cset.T / 12.0;
  e.expected = {
      fact_approx("gamma", "gamma_continuous", 0.0, 0.0, Provenance::closed_form),
      fact_at_most("max_abs_error", "solve_volterra", envelope, Provenance::closed_form),
      fact_in_range("halving_ratio", "solve_volterra", 3.5, 4.5, Provenance::independent_oracle),
      fact_holds("monotone", "monotonicity", Provenance::closed_form),
      fact_approx("L_at_1", "compute_L", 0.5, 1e-14, Provenance::closed_form),
      fact_approx("Rstar_at_1", "compute_Rstar", 1.5, 1e-14, Provenance::closed_form),
      fact_approx("G_at_1", "compute_G", 1.0, 1e-7, Provenance::closed_form),
      fact_approx("G_at_2", "compute_G", 0.5, 1e-7, Provenance::closed_form),
      fact_holds("G_vanishes", "compute_G", Provenance::closed_form),
      fact_approx("U_ratio_at_200", "tauberian_check", 0.5, 0.0025, Provenance::closed_form),
      fact_approx("K_abs_at_0.05", "tauberian_check", 1.0, 0.01, Provenance::closed_form),
      fact_holds("slow_osc_pass", "tauberian_check", Provenance::closed_form),
      fact_holds("tauberian_consistent", "tauberian_check", Provenance::closed_form),
  };
  e.extra = [](const CorpusEntry& self, EntryResult& r) {
    const auto& p = *self.continuous;
    record(r, "max_abs_error", max_error_against(*r.continuous_trace, [](double) { return 1.0; }));
    record(r, "halving_ratio", halving_against(p, 2.0 * self.cset.h, self.cset.T, [](double) { return 1.0; }).ratio());
    LaplacePipeline lp(p);
    record(r, "L_at_1", lp.L(1.0));
    record(r, "Rstar_at_1", lp.Rstar(1.0));
    record(r, "G_at_1", lp.G(1.0).value);
    record(r, "G_at_2", lp.G(2.0).value);
    record(r, "G_vanishes", g_vanishes_at_infinity(lp));
    ContinuousTrace longer = solve_volterra(p, QuadratureGrid::make(0.02, 400.0), 0.0);
    TauberianReport rep = tauberian_check(longer, 0.0);
    record(r, "U_ratio_at_200", rep.U_ratios.back());
    record(r, "K_abs_at_0.05", std::fabs(rep.K_estimates.back()));
    record(r, "slow_osc_pass", rep.slow_osc_pass);
    record(r, "tauberian_consistent", rep.verdict == TauberianVerdict::consistent);
    r.tauberian = std::move(rep);
  };
  return e;
}

inline CorpusEntry cts_beta(double beta) {
  CorpusEntry e;
  e.name = beta == -1.0 ? "cts-beta-1" : "cts-beta";
  e.description = "a = e^-s, b = " + fmt_double(beta) + " e^-s, d = 1, r = e^-t; gamma = " + fmt_double(beta);
  e.kind = EntryKind::continuous;
  e.continuous = exp_problem(beta);
  e.cset.h = 0.02;
  e.cset.T = 500.0;
  e.cset.z = std::exp(0.5);
  e.cset.fit_lo = 250.0;
  e.cset.fit_hi = 500.0;
  e.cset.tail_fraction = 0.5;
  e.expected = {
      fact_approx("gamma", "gamma_continuous", beta, 1e-14, Provenance::closed_form),
      fact_approx("gamma_hat", "fit_exponent", beta, 0.025, Provenance::independent_oracle),
      fact_at_least("r2", "fit_exponent", 0.999, Provenance::independent_oracle),
      fact_holds("monotone", "monotonicity", Provenance::independent_oracle),
      fact_at_most("band_ratio", "check_bounds", 1.1, Provenance::independent_oracle),
      fact_at_most("laplace_gap", "compute_G", 0.01, Provenance::independent_oracle),
      fact_holds("laplace_within_bounds", "compute_G", Provenance::independent_oracle),
      fact_approx("sL_small", "compute_L", -(beta + 1.0), 0.005,
                  Provenance::closed_form),
      fact_approx("tauberian_k", "tauberian_check", 1.0, 0.0, Provenance::closed_form),
      fact_holds("tauberian_consistent", "tauberian_check", Provenance::independent_oracle),
  };
  e.extra = [beta](const CorpusEntry& self, EntryResult& r) {
    const auto& p = *self.continuous;
    const auto& fine = *r.continuous_trace;
    ContinuousTrace coarse = solve_volterra(p, QuadratureGrid::make(2.0 * self.cset.h, self.cset.T), beta);
    LaplacePipeline lp(p);
    double gap = 0.0;
    bool within = true;
    for (double s : self.cset.s_values) {
      GValue g = lp.G(s);
      TransformValue t = trace_transform(fine, coarse, s, 0);
      double diff = std::fabs(g.value - t.value);
      gap = std::max(gap, diff / std::fabs(t.value));
      if (diff > g.error_bound() + t.tail_bound) within = false;
    }
    record(r, "laplace_gap", gap);
    record(r, "laplace_within_bounds", within);
    record(r, "sL_small", 1e-3 * lp.L(1e-3));
    TauberianReport rep = tauberian_check(fine, beta);
    record(r, "tauberian_k", static_cast<double>(rep.k));
    record(r, "tauberian_consistent", rep.verdict == TauberianVerdict::consistent);
    r.tauberian = std::move(rep);
  };
  return e;
}

inline CorpusEntry cts_cex_i6() {
  CorpusEntry e;
  e.name = "cts-cex-i6";
  e.description = "c_{t,s} = 0.1 e^-s without decay in t; the tail band degenerates";
  e.kind = EntryKind::continuous;
  e.continuous = ContinuousProblem{
      DecayFunction::exponential(1.0, 1.0), DecayFunction{},
      PerturbationKernelContinuous::separable(DecayFunction::exponential(0.1, 0.0), DecayFunction::exponential(1.0, 1.0)),
      DecayFunction::exponential(1.0, 1.0), 1.0};
  e.cset.h = 0.05;
  e.cset.T = 50.0;
  e.cset.z = 1.2;
  e.cset.fit_lo = 25.0;
  e.cset.fit_hi = 50.0;
  e.expected = {
      fact_fails("i4_pass", "validate_continuous", Provenance::closed_form),
      fact_fails("i6_pass", "validate_continuous", Provenance::closed_form),
      fact_fails("band_pass", "check_bounds", Provenance::independent_oracle),
  };
  e.extra = [](const CorpusEntry& self, EntryResult& r) {
    BandStability b = band_under_doubling(*self.continuous, self.cset.h, self.cset.T, r.constants->gamma,
                                          self.cset.tail_fraction);
    record(r, "band_pass", b.verdict == BandVerdict::pass);
    record(r, "band_growth", b.growth);
  };
  return e;
}

inline CorpusEntry cts_gamma_pos() {
  CorpusEntry e;
  e.name = "cts-gamma-pos";
  e.description = "a = 2 e^-2s, b = e^-s, d = 1, r = e^-t; gamma = 2, g not monotone";
  e.kind = EntryKind::continuous;
  e.continuous = ContinuousProblem{DecayFunction::exponential(2.0, 2.0), DecayFunction::exponential(1.0, 1.0), {},
                                   DecayFunction::exponential(1.0, 1.0), 1.0};
  e.cset.h = 0.02;
  e.cset.T = 50.0;
  e.cset.z = 1.2;
  e.expected = {
      fact_approx("gamma", "gamma_continuous", 2.0, 1e-14, Provenance::closed_form),
      fact_fails("monotone", "monotonicity", Provenance::independent_oracle),
  };
  return e;
}

}  // namespace detail

inline std::vector<std::string> builtin_names() {
  return {"geom-renewal", "tilted", "two-atom", "cex1",       "cex2",         "cex3",
          "poisson",      "cts-beta", "cts-beta-1", "cts-cex-i6", "cts-gamma-pos"};
}

inline CorpusEntry builtin(const std::string& name) {
  if (name == "geom-renewal") return detail::geom_renewal();
  if (name == "tilted") return detail::tilted();
  if (name == "two-atom") return detail::two_atom();
  if (name == "cex1") return detail::cex1();
  if (name == "cex2") return detail::cex2();
  if (name == "cex3") return detail::cex3();
  if (name == "poisson") return detail::poisson();
  if (name == "cts-beta") return detail::cts_beta(-0.5);
  if (name == "cts-beta-1") return detail::cts_beta(-1.0);
  if (name == "cts-cex-i6") return detail::cts_cex_i6();
  if (name == "cts-gamma-pos") return detail::cts_gamma_pos();
  throw ArgumentError("unknown corpus entry '" + name + "'");
}

namespace detail {

inline void measure_discrete(const CorpusEntry& e, EntryResult& r) {
  const auto& p = *e.discrete;
  const auto& s = e.dset;
  r.validation = validate_discrete(p, s.z_grid);
  SpectralConstants sc = s.manual_constants ? *s.manual_constants : spectral_constants(p);
  r.constants = sc;
  record(r, "q", sc.q);
  record(r, "gamma", sc.gamma);
  record(r, "mu", sc.mu);
  SolveOptions opts;
  opts.enforce_nonnegative_weights = !s.allow_negative_weights;
  SolutionTrace tr = solve(p, sc, s.N, s.mode, opts);
  DiscreteProblem<double> nd = normalize(p.template cast<double>(), sc.q);
  r.residuals = residual(tr, nd.a);
  r.certificate = bound_certificate(nd, tr, sc.gamma);
  r.estimate = estimate_C(tr, s.tol);
  r.positivity = positivity_horizon(tr);
  record(r, "positivity_horizon_present", r.positivity.has_value());
  if (r.positivity) record(r, "positivity_horizon", static_cast<double>(*r.positivity));
  record(r, "residual_tail_max", r.residuals->tail_max);
  record(r, "product_upper", r.certificate->product_upper);
  record(r, "certificate_bounded", r.certificate->status == CertificateStatus::bounded);
  record(r, "C_hat", r.estimate->C_hat);
  record(r, "relative_dispersion", r.estimate->relative_dispersion);
  record(r, "status_converged", r.estimate->status == EstimateStatus::converged);
  record(r, "status_not_converged", r.estimate->status == EstimateStatus::not_converged);
  bool positive_window = std::all_of(tr.y.begin() + static_cast<std::ptrdiff_t>(r.estimate->window_lo - 1), tr.y.end(),
                                     [](double v) { return v > 0.0; });
  if (positive_window && tr.N >= 4)
    record(r, "loglog_slope_abs", std::fabs(loglog_slope(tr.y, r.estimate->window_lo, tr.N).slope));
  r.discrete_trace = std::move(tr);
}

inline void measure_sequence(const CorpusEntry& e, EntryResult& r) {
  const auto& sq = *e.sequence;
  std::vector<double> y(sq.N);
  for (std::size_t n = 1; n <= sq.N; ++n) y[n - 1] = sq.y(n);
  r.residuals = residual(y, sq.a);
  r.estimate = estimate_C(y, e.dset.tol);
  record(r, "residual_tail_max", r.residuals->tail_max);
  record(r, "C_hat", r.estimate->C_hat);
  record(r, "relative_dispersion", r.estimate->relative_dispersion);
  record(r, "status_converged", r.estimate->status == EstimateStatus::converged);
  record(r, "status_not_converged", r.estimate->status == EstimateStatus::not_converged);
  SolutionTrace tr;
  tr.N = sq.N;
  tr.x_tilde = y;
  tr.y = std::move(y);
  r.discrete_trace = std::move(tr);
}

inline void measure_continuous(const CorpusEntry& e, EntryResult& r) {
  const auto& p = *e.continuous;
  const auto& s = e.cset;
  r.validation = validate_continuous(p, s.z, s.tau, s.horizon);
  for (const auto& entry : r.validation->entries) record(r, entry.id + "_pass", entry.status == Status::pass);
  SpectralConstants sc = spectral_constants(p);
  r.constants = sc;
  record(r, "gamma", sc.gamma);
  record(r, "mu", sc.mu);
  ContinuousTrace tr = solve_volterra(p, QuadratureGrid::make(s.h, s.T), sc.gamma);
  record(r, "monotone", tr.monotone_decreasing);
  bool positive = std::all_of(tr.g.begin(), tr.g.end(), [](double v) { return v > 0.0; });
  if (positive) {
    ExponentFit fit = fit_exponent(tr, s.fit_lo, s.fit_hi);
    record(r, "gamma_hat", fit.gamma_hat);
    record(r, "C_hat", fit.C_hat);
    record(r, "r2", fit.r2);
  }
  BandReport band = check_bounds(tr, sc.gamma, s.tail_fraction);
  record(r, "inf_H", band.inf_H);
  record(r, "sup_H", band.sup_H);
  record(r, "band_ratio", band.ratio());
  r.continuous_trace = std::move(tr);
}

}  // namespace detail

/// Measures every fact of an entry. Facts whose measurement is missing are
/// reported as failures with a NaN value.
inline EntryResult run_entry(const CorpusEntry& e) {
  EntryResult r;
  r.name = e.name;
  switch (e.kind) {
    case EntryKind::discrete:
      detail::measure_discrete(e, r);
      break;
    case EntryKind::sequence:
      detail::measure_sequence(e, r);
      break;
    case EntryKind::continuous:
      detail::measure_continuous(e, r);
      break;
  }
  if (e.extra) e.extra(e, r);
  for (const auto& f : e.expected) {
    auto it = r.measured.find(f.name);
    double actual = it == r.measured.end() ? std::nan("") : it->second;
    r.facts.push_back({f, actual, it != r.measured.end() && f.accepts(actual)});
  }
  return r;
}

}  // namespace renewal
