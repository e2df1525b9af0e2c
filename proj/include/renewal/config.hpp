#pragma once

/// INI problem definitions.
///
///     [problem]  type = discrete | continuous, weight_form, name
///     [a] [b] [r]  discrete:   kind = zero | finite | geometric | delta
///                              prefix, alpha, rho, start, index, value
///                  continuous: kind = zero | exp_mixture | table
///                              terms = "alpha:lambda, ...", step, samples, envelope, rate
///     [c]          discrete:   kind = zero | separable | table | row_scaled
///                              kappa, sigma, rho, rows, envelope, scale, ratio
///                  continuous: kind = zero | separable, phi, psi (term lists)
///     [kernel]     d
///     [run]        n, h, t, tol, z, z_grid, tau, horizon, mode, precision,
///                  fit_window, tail_fraction, s_values, allow_negative_weights
///
/// Rationals are written "p/q" or as decimals; lists are comma separated and
/// table rows are separated by '|'. Unknown sections and keys are rejected.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "renewal/error.hpp"
#include "renewal/model.hpp"
#include "renewal/numeric.hpp"

namespace renewal {

struct RunSettings {
  std::optional<std::size_t> n;
  std::optional<double> h;
  std::optional<double> t;
  std::optional<double> tol;
  std::optional<double> z;
  std::vector<double> z_grid;
  std::optional<double> tau;
  std::optional<double> horizon;
  std::optional<std::string> mode;
  std::optional<unsigned> precision;
  std::optional<std::pair<double, double>> fit_window;
  std::optional<double> tail_fraction;
  std::vector<double> s_values;
  bool allow_negative_weights = false;
};

struct ProblemConfig {
  std::string name;
  bool continuous = false;
  std::optional<DiscreteProblem<Rational>> discrete_problem;
  std::optional<ContinuousProblem> continuous_problem;
  RunSettings run;
};

namespace config_detail {

using boost::property_tree::ptree;

inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

class Section {
 public:
  Section(std::string name, const ptree* node) : name_(std::move(name)), node_(node) {}

  [[nodiscard]] bool present() const { return node_ != nullptr; }

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const {
    used_.insert(key);
    if (!node_) return std::nullopt;
    auto child = node_->get_child_optional(key);
    if (!child) return std::nullopt;
    return trim(child->data());
  }

  [[nodiscard]] std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v || v->empty()) throw ModelError("config: [" + name_ + "] needs key '" + key + "'");
    return *v;
  }

  [[nodiscard]] Rational rational(const std::string& key) const {
    std::string v = require(key);
    try {
      return parse_rational(v);
    } catch (const ModelError& e) {
      throw ModelError("config: [" + name_ + "] " + key + ": " + e.what());
    }
  }

  [[nodiscard]] std::optional<Rational> rational_opt(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    return rational(key);
  }

  [[nodiscard]] double real(const std::string& key) const { return to_double(rational(key)); }

  [[nodiscard]] std::optional<double> real_opt(const std::string& key) const {
    auto v = rational_opt(key);
    if (!v) return std::nullopt;
    return to_double(*v);
  }

  [[nodiscard]] std::optional<std::size_t> index_opt(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    Rational q = rational(key);
    if (boost::multiprecision::denominator(q) != 1 || q < 0)
      throw ModelError("config: [" + name_ + "] " + key + " must be a nonnegative integer");
    return boost::multiprecision::numerator(q).convert_to<std::size_t>();
  }

  [[nodiscard]] std::vector<Rational> rational_list(const std::string& key) const {
    std::vector<Rational> out;
    auto v = get(key);
    if (!v) return out;
    for (const auto& item : split(*v, ',')) {
      try {
        out.push_back(parse_rational(item));
      } catch (const ModelError& e) {
        throw ModelError("config: [" + name_ + "] " + key + ": " + e.what());
      }
    }
    return out;
  }

  [[nodiscard]] std::vector<double> real_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& q : rational_list(key)) out.push_back(to_double(q));
    return out;
  }

  [[nodiscard]] std::vector<ExpTerm> terms(const std::string& key) const {
    std::vector<ExpTerm> out;
    for (const auto& item : split(require(key), ',')) {
      auto parts = split(item, ':');
      if (parts.size() != 2)
        throw ModelError("config: [" + name_ + "] " + key + ": term '" + item + "' must read alpha:lambda");
      try {
        out.push_back({to_double(parse_rational(parts[0])), to_double(parse_rational(parts[1]))});
      } catch (const ModelError& e) {
        throw ModelError("config: [" + name_ + "] " + key + ": " + e.what());
      }
    }
    return out;
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    if (!node_) return;
    for (const auto& kv : *node_)
      if (!used_.count(kv.first)) throw ModelError("config: unknown key '" + kv.first + "' in [" + name_ + "]");
  }

 private:
  std::string name_;
  const ptree* node_;
  mutable std::set<std::string> used_;
};

inline DecaySequence<Rational> sequence(const Section& s, SignConstraint sign) {
  if (!s.present()) return DecaySequence<Rational>::zero(sign);
  std::string kind = s.get("kind").value_or("zero");
  DecaySequence<Rational> out;
  if (kind == "zero") {
    out = DecaySequence<Rational>::zero(sign);
  } else if (kind == "finite") {
    out = DecaySequence<Rational>::finite(s.rational_list("prefix"), sign);
  } else if (kind == "geometric") {
    auto prefix = s.rational_list("prefix");
    std::size_t start = s.index_opt("start").value_or(prefix.size() + 1);
    out = DecaySequence<Rational>::geometric(s.rational("alpha"), s.rational("rho"), start, std::move(prefix), sign);
  } else if (kind == "delta") {
    std::size_t index = s.index_opt("index").value_or(1);
    out = DecaySequence<Rational>::delta(index, s.rational_opt("value").value_or(Rational(1)), sign);
  } else {
    throw ModelError("config: unknown sequence kind '" + kind + "'");
  }
  s.finish();
  return out;
}

inline PerturbationKernelDiscrete<Rational> discrete_kernel(const Section& s) {
  if (!s.present()) return {};
  std::string kind = s.get("kind").value_or("zero");
  PerturbationKernelDiscrete<Rational> out;
  if (kind == "zero") {
  } else if (kind == "separable") {
    out = PerturbationKernelDiscrete<Rational>::separable(s.rational("kappa"), s.rational("sigma"), s.rational("rho"));
  } else if (kind == "table") {
    std::vector<std::vector<Rational>> rows;
    for (const auto& row : split(s.require("rows"), '|')) {
      std::vector<Rational> r;
      for (const auto& item : split(row, ',')) r.push_back(parse_rational(item));
      rows.push_back(std::move(r));
    }
    out = PerturbationKernelDiscrete<Rational>::table(std::move(rows), s.rational("envelope"), s.rational("sigma"),
                                                      s.rational("rho"));
  } else if (kind == "row_scaled") {
    out = PerturbationKernelDiscrete<Rational>::row_scaled(s.rational_list("scale"),
                                                           s.rational_opt("ratio").value_or(Rational(1)));
  } else {
    throw ModelError("config: unknown kernel kind '" + kind + "'");
  }
  s.finish();
  return out;
}

inline DecayFunction function(const Section& s) {
  if (!s.present()) return {};
  std::string kind = s.get("kind").value_or("zero");
  DecayFunction out;
  if (kind == "zero") {
  } else if (kind == "exp_mixture") {
    out = DecayFunction::exp_mixture(s.terms("terms"));
  } else if (kind == "table") {
    out = DecayFunction::table(s.real("step"), s.real_list("samples"), s.real("envelope"), s.real("rate"));
  } else {
    throw ModelError("config: unknown function kind '" + kind + "'");
  }
  s.finish();
  return out;
}

inline PerturbationKernelContinuous continuous_kernel(const Section& s) {
  if (!s.present()) return {};
  std::string kind = s.get("kind").value_or("zero");
  PerturbationKernelContinuous out;
  if (kind == "zero") {
  } else if (kind == "separable") {
    out = PerturbationKernelContinuous::separable(DecayFunction::exp_mixture(s.terms("phi")),
                                                  DecayFunction::exp_mixture(s.terms("psi")));
  } else {
    throw ModelError("config: unknown kernel kind '" + kind + "'");
  }
  s.finish();
  return out;
}

inline RunSettings run_settings(const Section& s) {
  RunSettings run;
  run.n = s.index_opt("n");
  run.h = s.real_opt("h");
  run.t = s.real_opt("t");
  run.tol = s.real_opt("tol");
  run.z = s.real_opt("z");
  run.z_grid = s.real_list("z_grid");
  run.tau = s.real_opt("tau");
  run.horizon = s.real_opt("horizon");
  run.mode = s.get("mode");
  if (run.mode && *run.mode != "exact" && *run.mode != "float")
    throw ModelError("config: [run] mode must be exact or float");
  if (auto p = s.index_opt("precision")) run.precision = static_cast<unsigned>(*p);
  auto window = s.real_list("fit_window");
  if (!window.empty()) {
    if (window.size() != 2) throw ModelError("config: [run] fit_window needs two values");
    run.fit_window = std::make_pair(window[0], window[1]);
  }
  run.tail_fraction = s.real_opt("tail_fraction");
  run.s_values = s.real_list("s_values");
  if (auto v = s.get("allow_negative_weights")) {
    if (*v != "true" && *v != "false") throw ModelError("config: allow_negative_weights must be true or false");
    run.allow_negative_weights = *v == "true";
  }
  s.finish();
  return run;
}

}  // namespace config_detail

inline ProblemConfig parse_config(std::istream& in, const std::string& default_name = "problem") {
  using config_detail::ptree;
  using config_detail::Section;
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  ptree tree;
  try {
    std::istringstream buffer(text);
    boost::property_tree::ini_parser::read_ini(buffer, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ModelError(std::string("config: ") + e.what());
  }
  // the ini reader drops sections without keys
  std::set<std::string> headers;
  {
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
      line = config_detail::trim(line);
      if (line.size() > 2 && line.front() == '[' && line.back() == ']')
        headers.insert(config_detail::trim(line.substr(1, line.size() - 2)));
    }
  }
  static const ptree empty_section;
  static const std::set<std::string> known{"problem", "a", "b", "c", "r", "kernel", "run"};
  for (const auto& h : headers)
    if (!known.count(h)) throw ModelError("config: unknown section [" + h + "]");
  for (const auto& kv : tree) {
    if (!known.count(kv.first)) throw ModelError("config: unknown section [" + kv.first + "]");
    if (!kv.second.data().empty()) throw ModelError("config: key '" + kv.first + "' outside a section");
  }
  auto section = [&](const std::string& name) {
    auto child = tree.get_child_optional(name);
    if (child) return Section(name, &*child);
    return Section(name, headers.count(name) ? &empty_section : nullptr);
  };

  ProblemConfig cfg;
  Section problem = section("problem");
  if (!problem.present()) throw ModelError("config: missing [problem] section");
  std::string type = problem.get("type").value_or("discrete");
  cfg.name = problem.get("name").value_or(default_name);
  std::string form = problem.get("weight_form").value_or("b_over_n");
  problem.finish();
  if (type != "discrete" && type != "continuous")
    throw ModelError("config: [problem] type must be discrete or continuous");
  cfg.continuous = type == "continuous";

  if (!cfg.continuous) {
    if (headers.count("kernel")) throw ModelError("config: [kernel] applies to continuous problems only");
    DiscreteProblem<Rational> p;
    p.a = config_detail::sequence(section("a"), SignConstraint::nonnegative);
    p.b = config_detail::sequence(section("b"), SignConstraint::any);
    p.c = config_detail::discrete_kernel(section("c"));
    p.r = config_detail::sequence(section("r"), SignConstraint::nonnegative);
    if (form == "b_over_n") {
      p.weight_form = WeightForm::b_over_n;
    } else if (form == "b_over_n_minus_j") {
      p.weight_form = WeightForm::b_over_n_minus_j;
    } else {
      throw ModelError("config: weight_form must be b_over_n or b_over_n_minus_j");
    }
    cfg.discrete_problem = std::move(p);
  } else {
    if (form != "b_over_n") throw ModelError("config: weight_form applies to discrete problems only");
    ContinuousProblem p;
    p.a = config_detail::function(section("a"));
    p.b = config_detail::function(section("b"));
    p.c = config_detail::continuous_kernel(section("c"));
    p.r = config_detail::function(section("r"));
    Section kernel = section("kernel");
    p.d = kernel.real_opt("d").value_or(1.0);
    kernel.finish();
    if (!(p.d > 0.0)) throw ModelError("config: [kernel] d must be positive");
    cfg.continuous_problem = std::move(p);
  }
  cfg.run = config_detail::run_settings(section("run"));
  return cfg;
}

inline ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("config: cannot open '" + path.string() + "'");
  return parse_config(in, path.stem().string());
}

}  // namespace renewal
