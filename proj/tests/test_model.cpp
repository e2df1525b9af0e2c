#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "renewal/model.hpp"

using namespace renewal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using Seq = DecaySequence<Rational>;
using SeqD = DecaySequence<double>;

double brute_power_sum(const SeqD& s, double z, int moment, bool absolute, std::size_t terms = 4000) {
  double acc = 0.0;
  for (std::size_t n = 1; n <= terms; ++n) {
    double v = s(n);
    if (absolute) v = std::fabs(v);
    double t = v * std::pow(z, static_cast<double>(n));
    if (moment == 1) t *= static_cast<double>(n);
    acc += t;
  }
  return acc;
}

SeqD random_sequence(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, 5);
  std::uniform_real_distribution<double> val(-1.0, 1.0), rho(0.05, 0.8);
  std::uniform_int_distribution<int> start_off(0, 3), has_tail(0, 1);
  std::vector<double> prefix(static_cast<std::size_t>(len(rng)));
  for (auto& v : prefix) v = val(rng);
  if (has_tail(rng) == 0) return SeqD::finite(prefix);
  return SeqD::geometric(val(rng), rho(rng), prefix.size() + 1 + static_cast<std::size_t>(start_off(rng)), prefix);
}

}  // namespace

TEST_CASE("sequence values follow prefix then geometric tail") {
  Seq s = Seq::geometric(Rational(3), Rational(1, 2), 4, {Rational(1), Rational(0), Rational(2)});
  CHECK(s(1) == Rational(1));
  CHECK(s(2) == Rational(0));
  CHECK(s(3) == Rational(2));
  CHECK(s(4) == Rational(3, 16));
  CHECK(s(6) == Rational(3, 64));
  auto v = s.values(6);
  CHECK(v[5] == s(6));
  CHECK_THROWS_AS(s(0), ArgumentError);
  CHECK(Seq::delta(3, Rational(5))(3) == Rational(5));
  CHECK(Seq::delta(3, Rational(5))(2) == Rational(0));
  CHECK(Seq::zero().is_zero());
  CHECK(Seq::finite({Rational(0), Rational(1), Rational(0)}).last_nonzero() == std::optional<std::size_t>(2));
}

TEST_CASE("non-decaying envelopes are rejected") {
  Seq bad = Seq::geometric(Rational(1), Rational(1));
  CHECK_THROWS_AS(bad.check_envelope("a"), ModelError);
  CHECK_THROWS_AS(Seq::geometric(Rational(1), Rational(1, 2)).tilted(Rational(3)), ModelError);
}

TEST_CASE("power sums match direct summation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> zd(0.2, 1.2);
  for (int i = 0; i < 100; ++i) {
    SeqD s = random_sequence(rng);
    double z = zd(rng);
    for (int m : {0, 1}) {
      for (bool absolute : {false, true}) {
        double expect = brute_power_sum(s, z, m, absolute);
        CHECK_THAT(s.power_sum(z, m, absolute), WithinAbs(expect, 1e-12 * std::max(1.0, std::fabs(expect))));
      }
    }
  }
}

TEST_CASE("abs_power_bracket contains the series and tightens with the truncation") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> zd(0.2, 1.2);
  for (int i = 0; i < 100; ++i) {
    SeqD s = random_sequence(rng);
    double z = zd(rng);
    double exact = brute_power_sum(s, z, 0, true);
    double prev_lo = -1.0, prev_hi = kInfinity;
    for (std::size_t K : {0u, 1u, 2u, 5u, 10u, 40u}) {
      SeriesBracket b = s.abs_power_bracket(z, K);
      CHECK(b.lower <= exact + 1e-12);
      CHECK(b.upper >= exact - 1e-12);
      CHECK(b.lower >= prev_lo - 1e-15);
      CHECK(b.upper <= prev_hi + 1e-12);
      prev_lo = b.lower;
      prev_hi = b.upper;
    }
  }
}

TEST_CASE("tilting multiplies the n-th term by q^n") {
  Seq s = Seq::geometric(Rational(1, 3), Rational(1, 4), 3, {Rational(1), Rational(-2)});
  Rational q(3, 2);
  Seq t = s.tilted(q);
  for (std::size_t n = 1; n <= 12; ++n) CHECK(t(n) == s(n) * power(q, n));
}

TEST_CASE("cast keeps the values") {
  Seq s = Seq::geometric(Rational(2, 7), Rational(1, 3), 2, {Rational(1, 5)});
  SeqD d = s.cast<double>();
  for (std::size_t n = 1; n <= 10; ++n) CHECK_THAT(d(n), WithinRel(to_double(s(n)), 1e-15));
}

TEST_CASE("tail_sum of a geometric sequence") {
  SeqD s = SeqD::geometric(1.0, 0.5);
  CHECK_THAT(s.tail_sum(1), WithinAbs(1.0, 1e-15));
  CHECK_THAT(s.tail_sum(4), WithinAbs(0.125, 1e-15));
}

TEST_CASE("discrete kernels agree between pointwise access and rows") {
  using K = PerturbationKernelDiscrete<Rational>;
  K sep = K::separable(Rational(1, 5), Rational(1, 2), Rational(2, 3));
  std::vector<std::vector<Rational>> rows{{Rational(1)}, {Rational(2), Rational(3)}};
  K tab = K::table(rows, Rational(1), Rational(1, 2), Rational(1, 2));
  K rs = K::row_scaled({Rational(1, 2), Rational(-1, 4)}, Rational(1, 3));
  for (const K* k : {&sep, &tab, &rs}) {
    std::vector<Rational> row;
    for (std::size_t n = 2; n <= 6; ++n) {
      bool any = k->fill_row(n, row);
      for (std::size_t j = 1; j < n; ++j) CHECK((any ? row[j - 1] : Rational(0)) == (*k)(n, j));
    }
  }
  CHECK(sep(4, 2) == Rational(1, 5) * power(Rational(1, 2), 4) * power(Rational(2, 3), 2));
  CHECK(tab(3, 2) == Rational(3));
  CHECK(tab(5, 1) == Rational(0));
  CHECK(rs(3, 2) == Rational(-1, 4) * Rational(1, 9));
  CHECK(sep.certified());
  CHECK_FALSE(tab.certified());
  CHECK_THROWS_AS(sep(3, 3), ArgumentError);
  CHECK_THROWS_AS(K::table({{Rational(1), Rational(2)}}, Rational(1), Rational(1, 2), Rational(1, 2)), ModelError);
}

TEST_CASE("weighted kernel sums match brute force") {
  using K = PerturbationKernelDiscrete<double>;
  auto brute = [](const K& k, double z, std::size_t nmax) {
    double acc = 0.0;
    for (std::size_t n = 2; n <= nmax; ++n)
      for (std::size_t j = 1; j < n; ++j) acc += std::fabs(k(n, j)) * std::pow(z, static_cast<double>(j));
    return acc;
  };
  K sep = K::separable(-0.3, 0.6, 0.7);
  CHECK_THAT(sep.weighted_abs_sum(1.2), WithinRel(brute(sep, 1.2, 400), 1e-10));
  K rs = K::row_scaled({0.5, -0.25, 0.125}, 0.9);
  CHECK_THAT(rs.weighted_abs_sum(1.1), WithinRel(brute(rs, 1.1, 4), 1e-14));
  // the table's continuation is its envelope K sigma^n rho^j
  K tab = K::table({{0.1}, {0.05, 0.02}}, 0.8, 0.5, 0.6);
  double explicit_part = brute(tab, 1.3, 3);
  double cont = 0.0;
  for (std::size_t n = 4; n <= 600; ++n)
    for (std::size_t j = 1; j < n; ++j) cont += 0.8 * std::pow(0.5, n) * std::pow(0.6 * 1.3, j);
  CHECK_THAT(tab.weighted_abs_sum(1.3), WithinRel(explicit_part + cont, 1e-10));
  // the same envelope at x = rho z = 1 takes the degenerate branch
  CHECK_THAT(K::table({{0.0}}, 1.0, 0.5, 0.5).weighted_abs_sum(2.0), WithinRel([] {
               double c = 0.0;
               for (std::size_t n = 3; n <= 600; ++n) c += std::pow(0.5, n) * static_cast<double>(n - 1);
               return c;
             }(), 1e-10));
  CHECK(std::isinf(sep.weighted_abs_sum(1.01 / (0.6 * 0.7))));
}

TEST_CASE("kernel tilt multiplies c_{n,j} by q^j") {
  using K = PerturbationKernelDiscrete<Rational>;
  K tab = K::table({{Rational(1)}, {Rational(2), Rational(3)}}, Rational(1), Rational(1, 2), Rational(1, 2));
  K sep = K::separable(Rational(1), Rational(1, 2), Rational(1, 3));
  Rational q(5, 4);
  for (const K* k : {&tab, &sep}) {
    K t = k->tilted(q);
    for (std::size_t n = 2; n <= 4; ++n)
      for (std::size_t j = 1; j < n; ++j) CHECK(t(n, j) == (*k)(n, j) * power(q, j));
  }
}

TEST_CASE("weights and their range checks") {
  DiscreteProblem<Rational> p{Seq::finite({Rational(1, 2), Rational(1, 2)}), Seq::finite({Rational(-1, 2)}), {},
                              Seq::delta(1)};
  CHECK(weight_discrete(p, 4, 1) == Rational(1, 2) - Rational(1, 8));
  p.weight_form = WeightForm::b_over_n_minus_j;
  CHECK(weight_discrete(p, 4, 1) == Rational(1, 2) - Rational(1, 6));
  CHECK_THROWS_AS(weight_discrete(p, 4, 4), ArgumentError);
  CHECK_THROWS_AS(weight_discrete(p, 4, 0), ArgumentError);
  p.b = Seq::finite({Rational(-2)});
  CHECK_THROWS_AS(weight_discrete(p, 2, 1), NumericError);
}

TEST_CASE("discrete validation catches each hypothesis") {
  const std::vector<double> grid{1.05, 1.1, 1.2, 1.5, 2.0, 3.0};
  DiscreteProblem<Rational> good{Seq::geometric(Rational(1), Rational(1, 2)), {}, {}, Seq::delta(1)};
  ValidationReport ok = validate_discrete(good, grid);
  CHECK(ok.all_pass());
  CHECK(ok.at("r3").witness == std::optional<double>(1.05));

  DiscreteProblem<Rational> even{Seq::finite({Rational(0), Rational(1, 2), Rational(0), Rational(1, 2)}), {}, {},
                                 Seq::delta(1)};
  CHECK(validate_discrete(even, grid).at("r1").status == Status::fail);

  DiscreteProblem<Rational> no_forcing{good.a, {}, {}, Seq::zero()};
  CHECK(validate_discrete(no_forcing, grid).at("r2").status == Status::fail);

  // sum a z^n = 0.001 z/(1 - z/2) stays below 1 on the grid
  DiscreteProblem<Rational> light{Seq::geometric(Rational(1, 1000), Rational(1, 2)), {}, {}, Seq::delta(1)};
  CHECK(validate_discrete(light, grid).at("r3").status == Status::fail);

  DiscreteProblem<Rational> table{good.a, {}, PerturbationKernelDiscrete<Rational>::table(
                                                  {{Rational(1, 10)}}, Rational(1), Rational(1, 2), Rational(1, 2)),
                                  Seq::delta(1)};
  CHECK(validate_discrete(table, grid).at("r3").status == Status::unknown);
  CHECK_THROWS_AS(validate_discrete(good, std::vector<double>{}), ArgumentError);
}

TEST_CASE("refining the z grid never turns r3 from pass to fail") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> alpha(0.05, 2.0), rho(0.2, 0.9), zr(1.01, 4.0);
  for (int i = 0; i < 200; ++i) {
    DiscreteProblem<double> p{SeqD::geometric(alpha(rng), rho(rng)), SeqD::geometric(0.1, rho(rng)), {},
                              SeqD::delta(1)};
    std::vector<double> grid{zr(rng), zr(rng)};
    std::vector<double> refined = grid;
    refined.push_back(zr(rng));
    refined.push_back(zr(rng));
    ValidationReport coarse = validate_discrete(p, grid);
    ValidationReport fine = validate_discrete(p, refined);
    if (coarse.at("r3").status == Status::pass) {
      CHECK(fine.at("r3").status == Status::pass);
      CHECK(*fine.at("r3").witness <= *coarse.at("r3").witness);
    }
  }
}

TEST_CASE("mixture moments and transforms against numerical integration") {
  DecayFunction f = DecayFunction::exp_mixture({{2.0, 1.5}, {-0.5, 3.0}});
  auto integral = [&](auto g) {
    const double hi = 60.0;
    const int steps = 120000;
    const double h = hi / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
      double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * g(i * h);
    }
    return acc * h / 3.0;
  };
  for (int m : {0, 1, 2})
    CHECK_THAT(f.moment(m).value, WithinRel(integral([&](double s) { return std::pow(s, m) * f(s); }), 1e-9));
  for (int k : {0, 1, 2}) {
    double s = 0.7;
    double direct = integral([&](double x) { return std::exp(-s * x) * std::pow(x, k) * f(x); });
    CHECK_THAT(f.laplace(s, k).value, WithinRel(k % 2 ? -direct : direct, 1e-9));
  }
  CHECK(f.decay_rate() == 1.5);
  CHECK(DecayFunction{}.is_zero());
  CHECK_THROWS_AS(DecayFunction::exponential(1.0, -1.0), ModelError);
}

TEST_CASE("tables: interpolation, moments and bounds") {
  // samples of e^{-s} on [0, 10] with step 0.01
  std::vector<double> samples;
  for (int k = 0; k <= 1000; ++k) samples.push_back(std::exp(-0.01 * k));
  DecayFunction f = DecayFunction::table(0.01, samples, 1.0, 1.0);
  CHECK_THAT(f(0.005), WithinAbs(0.5 * (1.0 + std::exp(-0.01)), 1e-15));
  CHECK(f(10.5) == 0.0);
  MomentValue m0 = f.moment(0);
  // trapezoid of e^{-s} over [0,10] plus the envelope tail e^{-10}
  CHECK_THAT(m0.value, WithinRel((1.0 - std::exp(-10.0)) * (1.0 + 0.01 * 0.01 / 12.0), 1e-6));
  CHECK_THAT(m0.error_bound, WithinRel(std::exp(-10.0), 1e-12));
  double prev = kInfinity;
  double prev_int = 0.0;
  for (double s = 0.0; s < 14.0; s += 0.137) {
    CHECK(f.majorant(s) >= std::fabs(f(s)));
    CHECK(f.majorant(s) <= prev);
    prev = f.majorant(s);
    double b = f.abs_integral_bound(s);
    CHECK(b >= prev_int);
    CHECK(b >= 1.0 - std::exp(-std::min(s, 10.0)) - 1e-12);
    prev_int = b;
  }
}

TEST_CASE("upper sums bound the integral and shrink under refinement") {
  DecayFunction r = DecayFunction::exp_mixture({{1.0, 1.0}, {0.5, 2.0}});
  const double z = std::exp(0.4);
  // ∫ r(t) z^t dt = 1/(1-0.4) + 0.5/(2-0.4)
  const double exact = 1.0 / 0.6 + 0.5 / 1.6;
  double prev = kInfinity;
  for (double tau : {2.0, 1.0, 0.5, 0.25, 0.125}) {
    UpperSum u = upper_sum_forcing(r, z, tau, 40.0);
    CHECK(u.finite());
    CHECK(u.upper_integral() >= exact);
    CHECK(u.upper_integral() <= prev + 1e-12);
    prev = u.upper_integral();
  }
  CHECK_THAT(prev, WithinRel(exact, 0.15));

  PerturbationKernelContinuous c =
      PerturbationKernelContinuous::separable(DecayFunction::exponential(0.2, 1.0), DecayFunction::exponential(1.0, 1.0));
  double prevk = kInfinity;
  for (double tau : {1.0, 0.5, 0.25}) {
    UpperSum u = upper_sum_kernel(c, z, tau, 40.0);
    CHECK(u.finite());
    CHECK(u.upper_integral() <= prevk + 1e-12);
    prevk = u.upper_integral();
  }
  PerturbationKernelContinuous flat =
      PerturbationKernelContinuous::separable(DecayFunction::exponential(0.2, 0.0), DecayFunction::exponential(1.0, 1.0));
  CHECK_FALSE(upper_sum_kernel(flat, z, 1.0, 40.0).finite());
}

TEST_CASE("continuous validation") {
  ContinuousProblem poisson{DecayFunction::exponential(1.0, 1.0), {}, {}, DecayFunction::exponential(1.0, 1.0), 1.0};
  ValidationReport ok = validate_continuous(poisson, std::exp(0.5), 1.0, 50.0);
  CHECK(ok.all_pass());
  CHECK(ok.entries.size() == 6);

  ContinuousProblem heavy = poisson;
  heavy.a = DecayFunction::exponential(2.0, 1.0);
  CHECK(validate_continuous(heavy, 1.2, 1.0, 50.0).at("i1").status == Status::fail);

  ContinuousProblem flat = poisson;
  flat.c = PerturbationKernelContinuous::separable(DecayFunction::exponential(0.1, 0.0),
                                                   DecayFunction::exponential(1.0, 1.0));
  ValidationReport bad = validate_continuous(flat, 1.2, 1.0, 50.0);
  CHECK(bad.at("i4").status == Status::fail);
  CHECK(bad.at("i6").status == Status::fail);

  CHECK(validate_continuous(poisson, std::exp(1.5), 1.0, 50.0).at("i5").status == Status::fail);
  CHECK_THROWS_AS(validate_continuous(poisson, 0.9, 1.0, 50.0), ArgumentError);
}

TEST_CASE("continuous weights") {
  ContinuousProblem p{DecayFunction::exponential(1.0, 1.0), DecayFunction::exponential(-0.5, 1.0), {},
                      DecayFunction::exponential(1.0, 1.0), 1.0};
  CHECK_THAT(weight_continuous(p, 3.0, 1.0), WithinRel(std::exp(-1.0) * (1.0 - 0.5 / 4.0), 1e-15));
  CHECK_THROWS_AS(weight_continuous(p, 1.0, 2.0), ArgumentError);
  p.b = DecayFunction::exponential(-5.0, 1.0);
  CHECK_THROWS_AS(weight_continuous(p, 0.5, 0.1), NumericError);
}
