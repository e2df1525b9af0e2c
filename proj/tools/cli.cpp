#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "renewal/renewal.hpp"

namespace renewal::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string corpus_name;
  std::string out_dir = ".";
  std::string name;
  std::optional<std::size_t> n;
  std::optional<double> h;
  std::optional<double> t;
  std::optional<double> tol;
  std::optional<std::string> mode;
  std::optional<unsigned> precision;
  std::vector<double> s_values;
  bool force = false;
};

/// Carries an exit code through the command dispatch.
struct Exit {
  int code;
};

const std::vector<double> kDefaultZGrid{1.05, 1.1, 1.2, 1.5, 2.0, 3.0};
const std::vector<double> kDefaultSValues{0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
constexpr std::size_t kDefaultN = 1000;
constexpr double kDefaultH = 0.02;
constexpr double kDefaultT = 50.0;
constexpr double kDefaultTauberianT = 400.0;
constexpr double kDefaultTol = 0.02;

std::optional<unsigned> env_precision() {
  const char* v = std::getenv("RENEWAL_ASYM_PRECISION");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  unsigned long bits = std::strtoul(v, &end, 10);
  if (end == v || *end != '\0' || bits == 0)
    throw ArgumentError(std::string("RENEWAL_ASYM_PRECISION must be a positive integer, got '") + v + "'");
  return static_cast<unsigned>(bits);
}

class Command {
 public:
  Command(std::string command, const Options& opt, std::ostream& out, std::ostream& err)
      : command_(std::move(command)), opt_(opt), out_(out), err_(err) {}

  int run(const std::function<int(Command&)>& body) {
    try {
      return body(*this);
    } catch (const Exit& e) {
      return e.code;
    } catch (const ModelError& e) {
      return fail(kExitUsage, "config", e.what());
    } catch (const ArgumentError& e) {
      return fail(kExitUsage, "argument", e.what());
    } catch (const NumericError& e) {
      return fail(kExitNumeric, "numeric", e.what());
    } catch (const std::exception& e) {
      return fail(kExitNumeric, "internal", e.what());
    }
  }

  ProblemConfig load() {
    name_ = opt_.name.empty() ? fs::path(opt_.config_path).stem().string() : opt_.name;
    cfg_ = load_config(opt_.config_path);
    name_ = opt_.name.empty() ? cfg_->name : opt_.name;
    return *cfg_;
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  [[nodiscard]] const Options& options() const { return opt_; }

  fs::path artifact(const std::string& suffix) const { return fs::path(opt_.out_dir) / (name_ + suffix); }

  Json summary() const { return new_summary(command_, name_); }

  void write_summary(const Json& j) const { write_json(artifact(".summary.json"), j); }

  [[nodiscard]] std::size_t n() const {
    std::size_t v = opt_.n.value_or(cfg_ && cfg_->run.n ? *cfg_->run.n : kDefaultN);
    if (v == 0) throw ArgumentError("--n must be at least 1");
    return v;
  }
  [[nodiscard]] double h() const { return opt_.h.value_or(cfg_ && cfg_->run.h ? *cfg_->run.h : kDefaultH); }
  [[nodiscard]] double t(double fallback = kDefaultT) const {
    return opt_.t.value_or(cfg_ && cfg_->run.t ? *cfg_->run.t : fallback);
  }
  [[nodiscard]] double tol() const { return opt_.tol.value_or(cfg_ && cfg_->run.tol ? *cfg_->run.tol : kDefaultTol); }

  [[nodiscard]] ArithmeticMode mode() const {
    std::string m = opt_.mode.value_or(cfg_ && cfg_->run.mode ? *cfg_->run.mode : "float");
    if (m == "exact") return ArithmeticMode::exact_rational();
    if (m != "float") throw ArgumentError("--mode must be exact or float");
    unsigned bits = kDefaultPrecision;
    if (opt_.precision) {
      bits = *opt_.precision;
    } else if (auto env = env_precision()) {
      bits = *env;
    } else if (cfg_ && cfg_->run.precision) {
      bits = *cfg_->run.precision;
    }
    return ArithmeticMode::floating(bits);
  }

  [[nodiscard]] std::vector<double> z_grid() const {
    return cfg_ && !cfg_->run.z_grid.empty() ? cfg_->run.z_grid : kDefaultZGrid;
  }

  [[nodiscard]] std::vector<double> s_values() const {
    if (!opt_.s_values.empty()) return opt_.s_values;
    return cfg_ && !cfg_->run.s_values.empty() ? cfg_->run.s_values : kDefaultSValues;
  }

  /// Default z sits halfway into the strip ln z < min decay rate of a, b.
  [[nodiscard]] double z(const ContinuousProblem& p) const {
    if (cfg_ && cfg_->run.z) return *cfg_->run.z;
    double rate = std::min(p.a.decay_rate(), p.b.decay_rate());
    return std::isfinite(rate) && rate > 0.0 ? std::exp(0.5 * rate) : 1.5;
  }
  [[nodiscard]] double tau() const { return cfg_ && cfg_->run.tau ? *cfg_->run.tau : 1.0; }
  [[nodiscard]] double horizon(double T) const {
    return cfg_ && cfg_->run.horizon ? *cfg_->run.horizon : std::max(T, kDefaultT);
  }
  [[nodiscard]] double tail_fraction() const {
    return cfg_ && cfg_->run.tail_fraction ? *cfg_->run.tail_fraction : 0.5;
  }
  [[nodiscard]] std::pair<double, double> fit_window(double T) const {
    return cfg_ && cfg_->run.fit_window ? *cfg_->run.fit_window : std::make_pair(T / 2.0, T);
  }
  [[nodiscard]] bool allow_negative_weights() const { return cfg_ && cfg_->run.allow_negative_weights; }

  const DiscreteProblem<Rational>& discrete() const {
    if (!cfg_->discrete_problem) throw ArgumentError("'" + command_ + "' needs a discrete problem");
    return *cfg_->discrete_problem;
  }
  const ContinuousProblem& continuous() const {
    if (!cfg_->continuous_problem) throw ArgumentError("'" + command_ + "' needs a continuous problem");
    return *cfg_->continuous_problem;
  }

  ValidationReport validate(double T = kDefaultT) const {
    if (cfg_->continuous) {
      const auto& p = continuous();
      return validate_continuous(p, z(p), tau(), horizon(T));
    }
    return validate_discrete(discrete(), z_grid());
  }

  /// Stops with exit 1 when a hypothesis fails, unless --force was given.
  void gate(const ValidationReport& report, Json& summary) const {
    summary["validation"] = to_json(report);
    if (!report.any_fail() || opt_.force) return;
    summary["status"] = "validation_failed";
    write_summary(summary);
    for (const auto& e : report.entries)
      if (e.status == Status::fail) err_ << "hypothesis " << e.id << " fails: " << e.detail << '\n';
    err_ << "validation failed; rerun with --force to solve anyway\n";
    throw Exit{kExitFailed};
  }

 private:
  int fail(int code, const char* kind, const std::string& message) {
    err_ << "error: " << message << '\n';
    if (!name_.empty()) {
      try {
        Json j = summary();
        j["status"] = "error";
        j["error_kind"] = kind;
        j["message"] = message;
        write_summary(j);
      } catch (const std::exception&) {
      }
    }
    return code;
  }

  std::string command_;
  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<ProblemConfig> cfg_;
  std::string name_;
};

void print_report(std::ostream& out, const ValidationReport& r) {
  for (const auto& e : r.entries) out << "  " << e.id << "  " << to_string(e.status) << "  " << e.detail << '\n';
}

int cmd_validate(Command& c) {
  ProblemConfig cfg = c.load();
  ValidationReport r = c.validate(c.t());
  Json j = c.summary();
  j["type"] = cfg.continuous ? "continuous" : "discrete";
  j["conditions"] = to_json(r);
  j["status"] = r.any_fail() ? "fail" : (r.all_pass() ? "pass" : "unknown");
  c.write_summary(j);
  c.out() << c.name() << ": " << j["status"].get<std::string>() << '\n';
  print_report(c.out(), r);
  return r.any_fail() ? kExitFailed : kExitOk;
}

struct DiscreteOutcome {
  DiscreteRun run;
  ResidualReport residuals;
  AsymptoticEstimate estimate;
  std::optional<std::size_t> positivity;
};

DiscreteOutcome run_discrete(Command& c, Json& j) {
  const auto& p = c.discrete();
  c.gate(c.validate(), j);
  SpectralConstants sc = spectral_constants(p);
  SolveOptions opts;
  opts.enforce_nonnegative_weights = !c.allow_negative_weights();
  DiscreteOutcome o;
  ArithmeticMode mode = c.mode();
  o.run = solve_with_escalation(p, sc, c.n(), mode, opts);
  DiscreteProblem<double> nd = normalize(p.template cast<double>(), sc.q);
  o.residuals = residual(o.run.trace, nd.a);
  o.estimate = estimate_C(o.run.trace, c.tol());
  o.positivity = positivity_horizon(o.run.trace);

  j["q"] = number_or_null(sc.q);
  j["gamma"] = number_or_null(sc.gamma);
  j["mu"] = number_or_null(sc.mu);
  j["error_bound"] = number_or_null(sc.series_error_bound);
  j["N"] = o.run.trace.N;
  j["mode"] = o.run.trace.mode.label();
  j["escalated"] = o.run.escalated;
  j["C_hat"] = number_or_null(o.estimate.C_hat);
  j["status"] = to_string(o.estimate.status);
  j["product_upper"] = number_or_null(o.run.certificate.product_upper);
  j["positivity_horizon"] = o.positivity ? Json(*o.positivity) : Json(nullptr);
  j["residual_tail_max"] = number_or_null(o.residuals.tail_max);
  j["estimate"] = to_json(o.estimate);
  j["certificate"] = to_json(o.run.certificate);
  write_discrete_csv(c.artifact(".trace.csv"), o.run.trace, &o.residuals);
  return o;
}

void print_discrete(Command& c, const DiscreteOutcome& o) {
  const auto& sc = o.run.constants;
  c.out() << c.name() << ": q = " << detail::fmt_double(sc.q) << ", gamma = " << detail::fmt_double(sc.gamma)
          << ", C_hat = " << detail::fmt_double(o.estimate.C_hat) << " (" << to_string(o.estimate.status) << ")"
          << ", N = " << o.run.trace.N << ", positivity horizon "
          << (o.positivity ? std::to_string(*o.positivity) : std::string("absent")) << '\n';
}

int cmd_solve_discrete(Command& c) {
  c.load();
  Json j = c.summary();
  DiscreteOutcome o = run_discrete(c, j);
  c.write_summary(j);
  print_discrete(c, o);
  return kExitOk;
}

struct ContinuousOutcome {
  ContinuousTrace trace;
  std::optional<ExponentFit> fit;
  BandReport band;
};

ContinuousOutcome run_continuous(Command& c, Json& j, double T) {
  const auto& p = c.continuous();
  c.gate(c.validate(T), j);
  SpectralConstants sc = spectral_constants(p);
  ContinuousOutcome o;
  o.trace = solve_volterra(p, QuadratureGrid::make(c.h(), T), sc.gamma);
  auto [lo, hi] = c.fit_window(T);
  bool positive = std::all_of(o.trace.g.begin(), o.trace.g.end(), [](double v) { return v > 0.0; });
  if (positive) o.fit = fit_exponent(o.trace, lo, hi);
  o.band = check_bounds(o.trace, sc.gamma, c.tail_fraction());

  j["gamma"] = number_or_null(sc.gamma);
  j["mu"] = number_or_null(sc.mu);
  j["gamma_hat"] = o.fit ? number_or_null(o.fit->gamma_hat) : Json(nullptr);
  j["C_hat"] = o.fit ? number_or_null(o.fit->C_hat) : Json(nullptr);
  j["r2"] = o.fit ? number_or_null(o.fit->r2) : Json(nullptr);
  j["fit_window"] = Json::array({lo, hi});
  j["inf_H"] = number_or_null(o.band.inf_H);
  j["sup_H"] = number_or_null(o.band.sup_H);
  j["monotone"] = o.trace.monotone_decreasing;
  j["h"] = o.trace.grid.h;
  j["T"] = o.trace.grid.T;
  write_continuous_csv(c.artifact(".trace.csv"), o.trace);
  return o;
}

void print_continuous(Command& c, const ContinuousOutcome& o) {
  c.out() << c.name() << ": gamma = " << detail::fmt_double(o.trace.gamma) << ", gamma_hat = "
          << (o.fit ? detail::fmt_double(o.fit->gamma_hat) : std::string("n/a")) << ", H band ["
          << detail::fmt_double(o.band.inf_H) << ", " << detail::fmt_double(o.band.sup_H) << "], monotone "
          << (o.trace.monotone_decreasing ? "yes" : "no") << '\n';
}

int cmd_solve_volterra(Command& c) {
  c.load();
  Json j = c.summary();
  ContinuousOutcome o = run_continuous(c, j, c.t());
  j["status"] = "solved";
  c.write_summary(j);
  print_continuous(c, o);
  return kExitOk;
}

int cmd_estimate(Command& c) {
  ProblemConfig cfg = c.load();
  Json j = c.summary();
  if (cfg.continuous) {
    ContinuousOutcome o = run_continuous(c, j, c.t());
    j["status"] = o.fit ? "fitted" : "inconclusive";
    c.write_summary(j);
    print_continuous(c, o);
    return kExitOk;
  }
  DiscreteOutcome o = run_discrete(c, j);
  const auto& y = o.run.trace.y;
  bool positive = std::all_of(y.begin() + static_cast<std::ptrdiff_t>(o.estimate.window_lo - 1), y.end(),
                              [](double v) { return v > 0.0; });
  if (positive && y.size() >= 4) {
    LinearFit f = loglog_slope(y, o.estimate.window_lo, y.size());
    j["loglog_slope"] = number_or_null(f.slope);
  }
  c.write_summary(j);
  print_discrete(c, o);
  return kExitOk;
}

int cmd_laplace(Command& c) {
  c.load();
  const auto& p = c.continuous();
  Json j = c.summary();
  std::optional<ContinuousTrace> trace;
  if (!p.c.is_zero()) {
    c.gate(c.validate(c.t()), j);
    trace = solve_volterra(p, QuadratureGrid::make(c.h(), c.t()));
  }
  LaplacePipeline lp(p, trace ? &*trace : nullptr);
  TransformSample s = sample_transforms(lp, c.s_values());
  write_laplace_csv(c.artifact(".laplace.csv"), s);
  j["s"] = s.s_values;
  j["A"] = s.A;
  j["B"] = s.B;
  j["R"] = s.R;
  j["L"] = s.L;
  j["Rstar"] = s.Rstar;
  j["G"] = s.G;
  j["G_error"] = s.G_error;
  j["C_of_s"] = s.C_of_s;
  j["G_vanishes"] = g_vanishes_at_infinity(lp);
  j["status"] = "evaluated";
  c.write_summary(j);
  c.out() << c.name() << ": transforms at " << s.s_values.size() << " points written to "
          << c.artifact(".laplace.csv").string() << '\n';
  return kExitOk;
}

int cmd_tauberian(Command& c) {
  c.load();
  Json j = c.summary();
  ContinuousOutcome o = run_continuous(c, j, c.t(kDefaultTauberianT));
  TauberianReport rep = tauberian_check(o.trace, o.trace.gamma);
  Json r = to_json(rep);
  for (auto it = r.begin(); it != r.end(); ++it) j[it.key()] = it.value();
  j["status"] = to_string(rep.verdict);
  c.write_summary(j);
  c.out() << c.name() << ": k = " << rep.k << ", verdict " << to_string(rep.verdict) << " (" << rep.reason << ")\n";
  return kExitOk;
}

int cmd_corpus_list(std::ostream& out) {
  for (const auto& name : builtin_names()) {
    CorpusEntry e = builtin(name);
    out << name << " [" << to_string(e.kind) << "] " << e.description << '\n';
    for (const auto& f : e.expected)
      out << "  - " << f.describe() << "  (" << f.operation << ", " << to_string(f.provenance) << ")\n";
  }
  return kExitOk;
}

void write_entry(const Options& opt, const EntryResult& r) {
  fs::path dir(opt.out_dir);
  write_json(dir / (r.name + ".summary.json"), to_json(r));
  if (r.continuous_trace) {
    write_continuous_csv(dir / (r.name + ".trace.csv"), *r.continuous_trace);
  } else if (r.discrete_trace) {
    write_discrete_csv(dir / (r.name + ".trace.csv"), *r.discrete_trace, r.residuals ? &*r.residuals : nullptr);
  }
}

void print_entry(std::ostream& out, const EntryResult& r) {
  out << r.name << ": " << (r.all_pass() ? "pass" : "FAIL") << '\n';
  for (const auto& f : r.facts)
    out << "  " << (f.pass ? "pass" : "FAIL") << "  " << f.fact.describe() << "  (actual "
        << detail::fmt_double(f.actual) << ")\n";
}

int cmd_corpus_run(const Options& opt, std::ostream& out, std::ostream& err) {
  std::vector<std::string> names;
  if (opt.corpus_name.empty()) {
    names = builtin_names();
  } else {
    builtin(opt.corpus_name);
    names = {opt.corpus_name};
  }
  std::vector<std::future<EntryResult>> jobs;
  for (const auto& n : names) jobs.push_back(std::async(std::launch::async, [n] { return run_entry(builtin(n)); }));
  int code = kExitOk;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      EntryResult r = jobs[i].get();
      write_entry(opt, r);
      print_entry(out, r);
      if (!r.all_pass()) code = std::max(code, kExitFailed);
    } catch (const NumericError& e) {
      err << names[i] << ": numeric failure: " << e.what() << '\n';
      code = std::max(code, kExitNumeric);
    }
  }
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Renewal-type recursions and Volterra equations: solve, validate, estimate asymptotics",
               "renewal-asym"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--out", opt.out_dir, "directory for summary/trace files")->capture_default_str();
  app.add_option("--name", opt.name, "artifact base name (default: config file stem)");
  app.add_option("--n", opt.n, "discrete horizon N");
  app.add_option("--h", opt.h, "grid step h")->check(CLI::PositiveNumber);
  app.add_option("--t", opt.t, "grid horizon T")->check(CLI::PositiveNumber);
  app.add_option("--tol", opt.tol, "convergence tolerance for estimate_C")->check(CLI::PositiveNumber);
  app.add_option("--mode", opt.mode, "arithmetic: exact or float")->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--precision", opt.precision, "float significand bits (53, 64, 113, 237; rounded up)");
  app.add_option("--s", opt.s_values, "Laplace sample points")->delimiter(',');
  app.add_flag("--force", opt.force, "solve even when a hypothesis fails");

  auto with_config = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", opt.config_path, "problem file (INI)")->required()->check(CLI::ExistingFile);
    return sub;
  };
  CLI::App* validate = with_config("validate", "check the hypotheses of a problem");
  CLI::App* solve_d = with_config("solve-discrete", "solve a recursion up to --n");
  CLI::App* solve_v = with_config("solve-volterra", "solve an integral equation on a grid (--h, --t)");
  CLI::App* estimate = with_config("estimate", "estimate the limit constant or exponent");
  CLI::App* laplace = with_config("laplace", "tabulate A, B, R, L, R*, G");
  CLI::App* tauberian = with_config("tauberian", "small-s / large-x ladders and slow oscillation");
  CLI::App* corpus = app.add_subcommand("corpus", "built-in problems with known answers");
  corpus->require_subcommand(1);
  CLI::App* corpus_run = corpus->add_subcommand("run", "run one entry, or all");
  corpus_run->add_option("name", opt.corpus_name, "entry name");
  CLI::App* corpus_list = corpus->add_subcommand("list", "list entries and their expected facts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  auto dispatch = [&](const char* name, int (*body)(Command&)) {
    Command c(name, opt, out, err);
    return c.run(body);
  };
  if (validate->parsed()) return dispatch("validate", cmd_validate);
  if (solve_d->parsed()) return dispatch("solve-discrete", cmd_solve_discrete);
  if (solve_v->parsed()) return dispatch("solve-volterra", cmd_solve_volterra);
  if (estimate->parsed()) return dispatch("estimate", cmd_estimate);
  if (laplace->parsed()) return dispatch("laplace", cmd_laplace);
  if (tauberian->parsed()) return dispatch("tauberian", cmd_tauberian);
  if (corpus_list->parsed()) return cmd_corpus_list(out);
  if (corpus_run->parsed()) {
    Command c("corpus run", opt, out, err);
    return c.run([&](Command&) { return cmd_corpus_run(opt, out, err); });
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace renewal::cli
