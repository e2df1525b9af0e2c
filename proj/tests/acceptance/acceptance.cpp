// Acceptance suite: one pass/fail line per criterion. With no arguments every
// criterion runs; otherwise only the listed ids (C1..C9).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "renewal/renewal.hpp"

using namespace renewal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> run;
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string verdict(bool ok) { return ok ? "ok" : "FAIL"; }

// ---------------------------------------------------------------------------

Outcome c1() {
  auto start = std::chrono::steady_clock::now();
  CorpusEntry e = builtin("geom-renewal");
  const auto& p = *e.discrete;
  SpectralConstants sc = spectral_constants(p);
  SolutionTrace exact = solve(p, sc, 2000, ArithmeticMode::exact_rational());
  bool exact_ok = exact.x_exact.size() == 2000;
  for (std::size_t n = 2; n <= 2000 && exact_ok; ++n) exact_ok = exact.x_exact[n - 1] == Rational(1, 2);
  SolutionTrace fl = solve(p, sc, 2000, ArithmeticMode::floating());
  double ferr = 0.0;
  for (std::size_t n = 2; n <= 2000; ++n) ferr = std::max(ferr, std::fabs(fl.x_tilde[n - 1] - 0.5));
  double secs = seconds_since(start);
  bool ok = exact_ok && ferr <= 1e-12 && secs < 5.0;
  return {ok, "exact x_n == 1/2 for 2<=n<=2000: " + verdict(exact_ok) + "; float max err " + num(ferr) +
                  " (<= 1e-12); " + num(secs) + " s (< 5 s)"};
}

Outcome c2() {
  auto start = std::chrono::steady_clock::now();
  CorpusEntry e = builtin("tilted");
  const auto& p = *e.discrete;
  // closed forms: sum b_j = -0.6, sum j a_j = 3 for a_j = (1/3)(2/3)^(j-1)
  const double gamma_oracle = -0.6 / 3.0;
  SpectralConstants sc = spectral_constants(p);
  SolutionTrace tr = solve(p, sc, 10000, ArithmeticMode::floating());
  AsymptoticEstimate est = estimate_C(tr, 0.02);
  double slope = loglog_slope(tr.y, est.window_lo, tr.N).slope;
  double secs = seconds_since(start);
  bool ok = std::fabs(sc.gamma - gamma_oracle) <= 1e-12 && est.status == EstimateStatus::converged &&
            est.relative_dispersion <= 0.02 && std::fabs(slope) <= 0.02 && secs < 60.0;
  return {ok, "gamma " + num(sc.gamma) + " (oracle " + num(gamma_oracle) + "); status " + to_string(est.status) +
                  "; dispersion/C_hat " + num(est.relative_dispersion) + " (<= 0.02); |slope| " +
                  num(std::fabs(slope)) + " (<= 0.02); " + num(secs) + " s (< 60 s)"};
}

Outcome c3() {
  CorpusEntry e = builtin("two-atom");
  const auto& p = *e.discrete;
  const double q_oracle = (-1.0 + std::sqrt(17.0)) / 2.0;
  double q = solve_q(p.a);
  double q_norm = solve_q(normalize(p.cast<double>(), q).a);
  bool ok = std::fabs(q - q_oracle) <= 1e-12 && std::fabs(q_norm - 1.0) <= 1e-12;
  return {ok, "q - (-1+sqrt17)/2 = " + num(q - q_oracle) + "; after normalize q - 1 = " + num(q_norm - 1.0) +
                  " (both within 1e-12)"};
}

/// 3·2^{1-n} + (3/(n-M))·2 + 3(M+1)·2^{1-M}, summed directly for a_j = 2^{-j}.
double cex3_oracle_bound(std::size_t n, std::size_t M) {
  double tail = 0.0, mean = 0.0, mtail = 0.0;
  for (std::size_t j = 1; j < 2000; ++j) {
    double aj = std::ldexp(1.0, -static_cast<int>(j));
    if (j >= n) tail += aj;
    mean += static_cast<double>(j) * aj;
    if (j >= M) mtail += static_cast<double>(j) * aj;
  }
  return 3.0 * tail + 3.0 * mean / static_cast<double>(n - M) + 3.0 * mtail;
}

Outcome c4() {
  // cex1: every weight row carries the 2^-n factor and vanishes at j = n-1
  CorpusEntry e1 = builtin("cex1");
  SolutionTrace t1 = solve(*e1.discrete, *e1.dset.manual_constants, e1.dset.N, ArithmeticMode::exact_rational());
  bool cex1_ok = !positivity_horizon(t1).has_value();

  // cex2: rebuild w_{k,i} from the target sequence and check the recursion
  CorpusEntry e2 = builtin("cex2");
  const std::size_t N = 10000;
  SolveOptions opts;
  opts.enforce_nonnegative_weights = false;
  SolutionTrace t2 = solve(*e2.discrete, SpectralConstants{1.0, 0.0, 2.0, 0.0}, N, ArithmeticMode::floating(), opts);
  AsymptoticEstimate est2 = estimate_C(t2, 0.02);
  std::vector<double> target(N);
  for (std::size_t k = 1; k <= N; ++k) target[k - 1] = 2.0 + std::sin(std::log(static_cast<double>(k) + 1.0));
  double recon = std::fabs(t2.x_tilde[0] - target[0]);
  const DecaySequence<double> a = DecaySequence<double>::geometric(1.0, 0.5);
  for (std::size_t k = 2; k <= N; ++k) {
    recon = std::max(recon, std::fabs(t2.x_tilde[k - 1] - target[k - 1]));
    if (k % 97 == 0 || k == N) {
      std::vector<double> w = cex2_weights(a, k, target);
      CompensatedSum<double> acc;
      for (std::size_t i = 1; i < k; ++i) acc.add(w[i - 1] * target[k - i - 1]);
      recon = std::max(recon, std::fabs(target[k - 1] - acc.value()));
    }
  }
  bool cex2_ok = est2.status == EstimateStatus::not_converged && recon <= 1e-10;

  // cex3: residuals of y_n = 2 + sin(log(1+n)) against a_j = 2^-j
  const std::size_t N3 = 10000;
  auto y = [](std::size_t n) { return 2.0 + std::sin(std::log(1.0 + static_cast<double>(n))); };
  double worst_ratio = 0.0;
  for (std::size_t n = 5000; n <= N3; ++n) {
    double conv = 0.0;
    for (std::size_t j = 1; j < n && j < 1100; ++j) conv += std::ldexp(1.0, -static_cast<int>(j)) * y(n - j);
    double rho = y(n) - conv;
    worst_ratio = std::max(worst_ratio, std::fabs(rho) / cex3_oracle_bound(n, n / 2));
  }
  double osc = std::fabs(y(N3) - y(N3 / 2));
  bool cex3_ok = worst_ratio <= 10.0 && osc > 0.05;

  return {cex1_ok && cex2_ok && cex3_ok,
          "cex1 positivity horizon absent: " + verdict(cex1_ok) + "; cex2 status " + to_string(est2.status) +
              ", reconstruction " + num(recon) + " (<= 1e-10); cex3 max residual/bound " + num(worst_ratio) +
              " (<= 10), |y_N - y_N/2| " + num(osc) + " (> 0.05)"};
}

Outcome c5() {
  auto start = std::chrono::steady_clock::now();
  CorpusEntry e = builtin("poisson");
  const auto& p = *e.continuous;
  auto one = [](double) { return 1.0; };
  ContinuousTrace tr = solve_volterra(p, QuadratureGrid::make(0.01, 50.0), 0.0);
  double err = max_error_against(tr, one);
  HalvingCheck hc = halving_against(p, 0.01, 50.0, one);
  double secs = seconds_since(start);
  bool ok = err <= 1e-4 && hc.ratio() >= 3.5 && hc.ratio() <= 4.5 && secs < 10.0;
  return {ok, "max|g_i - 1| " + num(err) + " (<= 1e-4): " + verdict(err <= 1e-4) + "; halving ratio " +
                  num(hc.ratio()) + " (in [3.5, 4.5]); " + num(secs) + " s (< 10 s)"};
}

Outcome c6() {
  auto start = std::chrono::steady_clock::now();
  CorpusEntry e = builtin("cts-beta");
  const auto& p = *e.continuous;
  ContinuousTrace tr = solve_volterra(p, QuadratureGrid::make(0.02, 500.0), -0.5);
  ExponentFit fit = fit_exponent(tr, 250.0, 500.0);
  BandReport band = check_bounds(tr, -0.5, 0.5);
  double secs = seconds_since(start);
  bool ok = tr.monotone_decreasing && std::fabs(fit.gamma_hat + 0.5) <= 0.025 && fit.r2 >= 0.999 &&
            band.ratio() <= 1.1 && secs < 120.0;
  return {ok, std::string("monotone ") + (tr.monotone_decreasing ? "true" : "false") + "; gamma_hat " +
                  num(fit.gamma_hat) + " (-0.5 +/- 0.025); r2 " + num(fit.r2) + " (>= 0.999); band ratio " +
                  num(band.ratio()) + " (<= 1.1); " + num(secs) + " s (< 120 s)"};
}

Outcome c7() {
  CorpusEntry e = builtin("cts-beta");
  const auto& p = *e.continuous;
  ContinuousTrace fine = solve_volterra(p, QuadratureGrid::make(0.02, 500.0), -0.5);
  ContinuousTrace coarse = solve_volterra(p, QuadratureGrid::make(0.04, 500.0), -0.5);
  LaplacePipeline lp(p);
  double worst_gap = 0.0;
  bool within = true;
  for (double s : {0.5, 1.0, 2.0}) {
    GValue g = lp.G(s);
    TransformValue t = trace_transform(fine, coarse, s, 0);
    double diff = std::fabs(g.value - t.value);
    worst_gap = std::max(worst_gap, diff / std::fabs(t.value));
    if (diff > g.error_bound() + t.tail_bound) within = false;
  }
  const double gamma = -0.5;
  double sL = 1e-3 * lp.L(1e-3);
  double target = -(gamma + 1.0);
  double rel = std::fabs(sL - target) / std::fabs(target);
  bool ok = worst_gap <= 0.01 && within && rel <= 0.01;
  return {ok, "max relative gap G vs trace transform " + num(worst_gap) + " (<= 0.01), within error bounds: " +
                  verdict(within) + "; s L(s) at 1e-3 = " + num(sL) + " vs " + num(target) + " (rel " + num(rel) +
                  " <= 0.01)"};
}

Outcome c8() {
  CorpusEntry ep = builtin("poisson");
  ContinuousTrace tp = solve_volterra(*ep.continuous, QuadratureGrid::make(0.02, 400.0), 0.0);
  TauberianReport rp = tauberian_check(tp, 0.0);
  double U200 = 0.0;
  for (std::size_t i = 0; i < rp.x_ladder.size(); ++i)
    if (std::fabs(rp.x_ladder[i] - 200.0) < 1e-9) U200 = rp.U_ratios[i];
  double K005 = 0.0;
  for (std::size_t i = 0; i < rp.s_ladder.size(); ++i)
    if (std::fabs(rp.s_ladder[i] - 0.05) < 1e-12) K005 = std::fabs(rp.K_estimates[i]);
  bool poisson_ok = std::fabs(U200 - 0.5) <= 0.005 * 0.5 && std::fabs(K005 - 1.0) <= 0.01 && rp.slow_osc_pass;

  CorpusEntry eb = builtin("cts-beta");
  ContinuousTrace tb = solve_volterra(*eb.continuous, QuadratureGrid::make(0.02, 500.0), -0.5);
  TauberianReport rb = tauberian_check(tb, -0.5);
  bool beta_ok = rb.verdict == TauberianVerdict::consistent && rb.slow_osc_pass;

  return {poisson_ok && beta_ok,
          "poisson U(200)/200^2 " + num(U200) + " (0.5 within 0.5%), s^2|G'(s)| at 0.05 " + num(K005) +
              " (1 within 1%), slow oscillation " + verdict(rp.slow_osc_pass) + "; cts-beta verdict " +
              to_string(rb.verdict) + ", slow oscillation " + verdict(rb.slow_osc_pass)};
}

// ---------------------------------------------------------------------------
// Randomized property suite.

struct Instance {
  DiscreteProblem<Rational> p;
  std::size_t N = 0;
};

Rational random_fraction(std::mt19937_64& rng, long num_lo, long num_hi, long den) {
  std::uniform_int_distribution<long> d(num_lo, num_hi);
  return Rational(d(rng), den);
}

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len_a(1, 6), len_b(0, 4), len_r(1, 3), den(2, 12), form(0, 1);
  std::uniform_int_distribution<std::size_t> horizon(20, 200);
  Instance ins;
  std::vector<Rational> a(static_cast<std::size_t>(len_a(rng)));
  for (std::size_t j = 0; j < a.size(); ++j) {
    long d = den(rng);
    a[j] = random_fraction(rng, j == 0 ? 1 : 0, d, d);
  }
  std::vector<Rational> b(static_cast<std::size_t>(len_b(rng)));
  for (std::size_t j = 0; j < b.size(); ++j) {
    long d = den(rng);
    // b_j >= -a_j keeps every weight a_j + b_j/m (m >= 1) nonnegative
    Rational lo = j < a.size() ? -a[j] : Rational(0);
    b[j] = std::max(lo, random_fraction(rng, -d, d, d));
  }
  std::vector<Rational> r(static_cast<std::size_t>(len_r(rng)));
  for (std::size_t j = 0; j < r.size(); ++j) {
    long d = den(rng);
    r[j] = random_fraction(rng, j == 0 ? 1 : 0, d, d);
  }
  ins.p.a = DecaySequence<Rational>::finite(std::move(a), SignConstraint::nonnegative);
  ins.p.b = DecaySequence<Rational>::finite(std::move(b));
  ins.p.r = DecaySequence<Rational>::finite(std::move(r), SignConstraint::nonnegative);
  ins.p.weight_form = form(rng) == 0 ? WeightForm::b_over_n : WeightForm::b_over_n_minus_j;
  ins.N = horizon(rng);
  return ins;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

Outcome c9() {
  auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = 0x5eed2026ULL;
  std::mt19937_64 rng(seed);
  const int instances = 200;
  int fail_exact = 0, fail_equiv = 0, fail_residual = 0, fail_cert = 0;
  std::string first_failure;
  auto note = [&](int i, const std::string& what) {
    if (first_failure.empty()) first_failure = "instance " + std::to_string(i) + ": " + what;
  };

  for (int i = 0; i < instances; ++i) {
    Instance ins = random_instance(rng);
    const auto& p = ins.p;
    SpectralConstants sc = spectral_constants(p);

    // exact vs float, compared on y_n = x~_n n^{-gamma}
    SolutionTrace ex = solve(p, sc, ins.N, ArithmeticMode::exact_rational());
    SolutionTrace fl = solve(p, sc, ins.N, ArithmeticMode::floating());
    double scale = std::max(1.0, max_abs(ex.y));
    double diff = 0.0;
    for (std::size_t n = 0; n < ins.N; ++n) diff = std::max(diff, std::fabs(ex.y[n] - fl.y[n]));
    if (!(diff <= 1e-10 * scale)) {
      ++fail_exact;
      note(i, "exact/float gap " + num(diff));
    }

    // normalization equivariance: y~_n = q^n y_n, and the tilted a has q = 1
    SolutionTrace raw = solve(p, SpectralConstants{1.0, sc.gamma, sc.mu, 0.0}, ins.N, ArithmeticMode::floating());
    double worst = 0.0;
    double qn = 1.0;
    for (std::size_t n = 1; n <= ins.N; ++n) {
      qn *= sc.q;
      double expect = qn * raw.y[n - 1];
      double got = fl.y[n - 1];
      worst = std::max(worst, std::fabs(got - expect) / std::max({std::fabs(expect), std::fabs(got), 1e-300}));
    }
    DiscreteProblem<double> nd = normalize(p.cast<double>(), sc.q);
    double q_again = solve_q(nd.a);
    if (!(worst <= 1e-9) || !(std::fabs(q_again - 1.0) <= 1e-12)) {
      ++fail_equiv;
      note(i, "equivariance gap " + num(worst) + ", renormalized q " + num(q_again));
    }

    // residual decay under N doubling
    SolutionTrace fl2 = solve(p, sc, 2 * ins.N, ArithmeticMode::floating());
    double r1 = residual(fl, nd.a).tail_max;
    double r2 = residual(fl2, nd.a).tail_max;
    if (!(r2 <= r1 * (1.0 + 1e-9) + 1e-13)) {
      ++fail_residual;
      note(i, "residual tail grew " + num(r1) + " -> " + num(r2));
    }

    // certificate inequality
    BoundCertificate cert = bound_certificate(nd, fl, sc.gamma);
    double ymax = max_abs(fl.y);
    double rhs = ymax / std::max(1.0, fl.y.front());
    if (!(cert.product_upper >= rhs * (1.0 - 1e-12))) {
      ++fail_cert;
      note(i, "product_upper " + num(cert.product_upper) + " < " + num(rhs));
    }
  }
  double secs = seconds_since(start);
  int failures = fail_exact + fail_equiv + fail_residual + fail_cert;
  std::string detail = std::to_string(instances) + " instances (seed " + std::to_string(seed) +
                       "): exact/float " + std::to_string(fail_exact) + ", equivariance " +
                       std::to_string(fail_equiv) + ", residual decay " + std::to_string(fail_residual) +
                       ", certificate " + std::to_string(fail_cert) + " failures; " + num(secs) + " s";
  if (!first_failure.empty()) detail += "; first: " + first_failure;
  return {failures == 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"C1", "exact renewal oracle", c1},
      {"C2", "exponent on the tilted family", c2},
      {"C3", "spectral point", c3},
      {"C4", "counterexamples", c4},
      {"C5", "Volterra identity", c5},
      {"C6", "continuous exponent and band", c6},
      {"C7", "Laplace pipeline", c7},
      {"C8", "Tauberian report", c8},
      {"C9", "randomized properties", c9},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    bool known = std::any_of(all.begin(), all.end(), [&](const Criterion& c) { return c.id == w; });
    if (!known) {
      std::cerr << "unknown criterion '" << w << "'\n";
      return 2;
    }
  }
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::cout << c.id << "  " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
