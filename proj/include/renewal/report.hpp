#pragma once

/// JSON summaries (schema 1) and CSV traces. Object keys keep insertion
/// order and numbers print in shortest round-trip form, so identical runs
/// give byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "renewal/corpus.hpp"
#include "renewal/discrete_engine.hpp"
#include "renewal/error.hpp"
#include "renewal/laplace.hpp"
#include "renewal/model.hpp"
#include "renewal/volterra_engine.hpp"

namespace renewal {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline Json new_summary(const std::string& command, const std::string& name) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  j["name"] = name;
  return j;
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const ValidationReport& r) {
  Json arr = Json::array();
  for (const auto& e : r.entries) {
    Json o;
    o["condition"] = e.id;
    o["status"] = to_string(e.status);
    o["witness"] = e.witness ? number_or_null(*e.witness) : Json(nullptr);
    o["detail"] = e.detail;
    arr.push_back(std::move(o));
  }
  return arr;
}

inline Json to_json(const SpectralConstants& sc) {
  Json o;
  o["q"] = number_or_null(sc.q);
  o["gamma"] = number_or_null(sc.gamma);
  o["mu"] = number_or_null(sc.mu);
  o["error_bound"] = number_or_null(sc.series_error_bound);
  return o;
}

inline Json to_json(const AsymptoticEstimate& e) {
  Json o;
  o["C_hat"] = number_or_null(e.C_hat);
  o["window"] = Json::array({e.window_lo, e.window_hi});
  o["method"] = e.method;
  o["dispersion"] = number_or_null(e.dispersion);
  o["relative_dispersion"] = number_or_null(e.relative_dispersion);
  o["aitken"] = number_or_null(e.aitken);
  o["status"] = to_string(e.status);
  return o;
}

inline Json to_json(const BoundCertificate& c) {
  Json o;
  o["product_upper"] = number_or_null(c.product_upper);
  o["product_lower"] = number_or_null(c.product_lower);
  o["lower_positive"] = c.lower_positive;
  o["N_threshold"] = c.N_threshold ? Json(*c.N_threshold) : Json(nullptr);
  o["cauchy_ratio"] = number_or_null(c.cauchy_ratio);
  o["status"] = to_string(c.status);
  return o;
}

inline Json to_json(const TauberianReport& r) {
  Json o;
  o["k"] = r.k;
  o["gamma"] = number_or_null(r.gamma);
  o["rho"] = number_or_null(r.rho);
  o["s_ladder"] = r.s_ladder;
  o["K_ladder"] = r.K_estimates;
  o["x_ladder"] = r.x_ladder;
  o["U_ratio_ladder"] = r.U_ratios;
  o["K_status"] = to_string(r.K_status);
  o["U_status"] = to_string(r.U_status);
  o["slow_osc_pass"] = r.slow_osc_pass;
  o["karamata_gap"] = number_or_null(r.karamata_gap);
  o["verdict"] = to_string(r.verdict);
  o["reason"] = r.reason;
  return o;
}

inline Json to_json(const ExponentFit& f) {
  Json o;
  o["gamma_hat"] = number_or_null(f.gamma_hat);
  o["C_hat"] = number_or_null(f.C_hat);
  o["r2"] = number_or_null(f.r2);
  o["points"] = f.points;
  return o;
}

inline Json to_json(const FactOutcome& f) {
  Json o;
  o["fact"] = f.fact.name;
  o["operation"] = f.fact.operation;
  o["expectation"] = f.fact.describe();
  o["actual"] = number_or_null(f.actual);
  o["provenance"] = to_string(f.fact.provenance);
  o["status"] = f.pass ? "pass" : "fail";
  return o;
}

inline Json to_json(const EntryResult& r) {
  Json o = new_summary("corpus run", r.name);
  o["status"] = r.all_pass() ? "pass" : "fail";
  Json facts = Json::array();
  for (const auto& f : r.facts) facts.push_back(to_json(f));
  o["facts"] = std::move(facts);
  Json measured;
  for (const auto& [k, v] : r.measured) measured[k] = number_or_null(v);
  o["measured"] = std::move(measured);
  if (r.validation) o["validation"] = to_json(*r.validation);
  if (r.constants) o["constants"] = to_json(*r.constants);
  if (r.discrete_trace) o["N"] = r.discrete_trace->N;
  if (r.discrete_trace && r.discrete_trace->mode.exact) o["mode"] = "exact_rational";
  if (r.estimate) o["estimate"] = to_json(*r.estimate);
  if (r.certificate) o["certificate"] = to_json(*r.certificate);
  if (r.discrete_trace && r.constants)
    o["positivity_horizon"] = r.positivity ? Json(*r.positivity) : Json(nullptr);
  if (r.continuous_trace) {
    o["h"] = r.continuous_trace->grid.h;
    o["T"] = r.continuous_trace->grid.T;
  }
  if (r.tauberian) o["tauberian"] = to_json(*r.tauberian);
  return o;
}

namespace report_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace report_detail

inline void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = report_detail::open(path);
  out << j.dump(2) << '\n';
}

/// n,x_tilde,y,residual; the residual column is empty when not computed.
inline void write_discrete_csv(const std::filesystem::path& path, const SolutionTrace& tr,
                               const ResidualReport* res = nullptr) {
  using report_detail::num;
  auto out = report_detail::open(path);
  out << "n,x_tilde,y,residual\n";
  for (std::size_t n = 1; n <= tr.y.size(); ++n) {
    out << n << ',' << num(tr.x_tilde[n - 1]) << ',' << num(tr.y[n - 1]) << ',';
    if (res) out << num(res->rho[n - 1]);
    out << '\n';
  }
}

inline void write_continuous_csv(const std::filesystem::path& path, const ContinuousTrace& tr) {
  using report_detail::num;
  auto out = report_detail::open(path);
  out << "t,g,H\n";
  for (std::size_t i = 0; i < tr.g.size(); ++i)
    out << num(tr.grid.node(i)) << ',' << num(tr.g[i]) << ',' << num(tr.H[i]) << '\n';
}

inline void write_laplace_csv(const std::filesystem::path& path, const TransformSample& s) {
  using report_detail::num;
  auto out = report_detail::open(path);
  out << "s,A,B,R,L,Rstar,G\n";
  for (std::size_t i = 0; i < s.s_values.size(); ++i)
    out << num(s.s_values[i]) << ',' << num(s.A[i]) << ',' << num(s.B[i]) << ',' << num(s.R[i]) << ','
        << num(s.L[i]) << ',' << num(s.Rstar[i]) << ',' << num(s.G[i]) << '\n';
}

}  // namespace renewal
