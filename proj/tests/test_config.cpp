#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "renewal/config.hpp"

using namespace renewal;

namespace {

ProblemConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "inline");
}

}  // namespace

TEST_CASE("a discrete config with every section") {
  ProblemConfig c = parse(R"(
[problem]
type = discrete
weight_form = b_over_n_minus_j
[a]
kind = geometric
alpha = 1
rho = 1/2
prefix = 1/4
start = 3
[b]
kind = finite
prefix = -1/10, 0.05
[c]
kind = table
rows = 1/100 | 1/200, 1/300
envelope = 1
sigma = 1/2
rho = 1/2
[r]
kind = delta
index = 2
value = 3
[run]
n = 50
mode = exact
z_grid = 1.1, 1.3
allow_negative_weights = true
)");
  CHECK(c.name == "inline");
  CHECK_FALSE(c.continuous);
  const auto& p = *c.discrete_problem;
  CHECK(p.weight_form == WeightForm::b_over_n_minus_j);
  CHECK(p.a(1) == Rational(1, 4));
  CHECK(p.a(2) == Rational(0));
  CHECK(p.a(3) == Rational(1, 8));
  CHECK(p.b(2) == Rational(1, 20));
  CHECK(p.c(3, 2) == Rational(1, 300));
  CHECK(p.r(2) == Rational(3));
  CHECK(p.r(1) == Rational(0));
  CHECK(*c.run.n == 50);
  CHECK(*c.run.mode == "exact");
  CHECK(c.run.z_grid == std::vector<double>{1.1, 1.3});
  CHECK(c.run.allow_negative_weights);
}

TEST_CASE("a continuous config") {
  ProblemConfig c = parse(R"(
[problem]
type = continuous
name = named
[a]
kind = exp_mixture
terms = 0.5:1, 0.25:0.5
[c]
kind = separable
phi = 0.1:1
psi = 1:2
[r]
kind = table
step = 0.5
samples = 1, 0.5, 0.25
envelope = 1
rate = 1
[kernel]
d = 2
[run]
fit_window = 10, 20
)");
  CHECK(c.name == "named");
  CHECK(c.continuous);
  const auto& p = *c.continuous_problem;
  CHECK(p.d == 2.0);
  CHECK(p.a(0.0) == 0.75);
  CHECK(p.r(0.25) == 0.75);
  CHECK(p.b.is_zero());
  CHECK_FALSE(p.c.is_zero());
  CHECK(c.run.fit_window->second == 20.0);
}

TEST_CASE("malformed configs are model errors") {
  auto bad = [](const std::string& text) { CHECK_THROWS_AS(parse(text), ModelError); };
  bad("[a]\nkind = zero\n");
  bad("[problem]\n[zzz]\nx = 1\n");
  bad("[problem]\ncolor = red\n");
  bad("[problem]\ntype = sideways\n");
  bad("[problem]\n[a]\nkind = geometric\nalpha = 1\n");
  bad("[problem]\n[a]\nkind = finite\nprefix = 1/0\n");
  bad("[problem]\n[a]\nkind = finite\nprefix = -1\n");
  bad("[problem]\n[a]\nkind = spiral\n");
  bad("[problem]\n[kernel]\nd = 1\n");
  bad("[problem]\ntype = continuous\n[kernel]\nd = 0\n");
  bad("[problem]\n[run]\nmode = fuzzy\n");
  bad("[problem]\n[run]\nfit_window = 1\n");
  bad("[problem]\n[run]\nallow_negative_weights = maybe\n");
  bad("[problem]\n[c]\nkind = table\nrows = 1, 2\nenvelope = 1\nsigma = 1/2\nrho = 1/2\n");
  bad("[problem\n");
  CHECK_THROWS_AS(load_config("/nonexistent/problem.ini"), ModelError);
}

TEST_CASE("shipped configs load") {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(RENEWAL_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    INFO(entry.path().string());
    ProblemConfig c = load_config(entry.path());
    CHECK(c.name == entry.path().stem().string());
    CHECK(c.continuous == c.continuous_problem.has_value());
    CHECK(c.continuous != c.discrete_problem.has_value());
    ++count;
  }
  CHECK(count >= 7);
}

TEST_CASE("sections without keys still count") {
  ProblemConfig c = parse("[problem]\n[a]\nkind = finite\nprefix = 1\n[run]\n");
  CHECK_FALSE(c.continuous);
  CHECK_THROWS_AS(parse("[problem]\n[kernel]\n"), ModelError);
  CHECK_THROWS_AS(parse("[problem]\n[extra]\n"), ModelError);
}

TEST_CASE("a non-decaying tail parses and is rejected when used") {
  ProblemConfig c = parse("[problem]\n[a]\nkind = geometric\nalpha = 1\nrho = 1\n");
  CHECK_THROWS_AS(c.discrete_problem->a.check_envelope("a"), ModelError);
}
