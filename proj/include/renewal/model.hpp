#pragma once

/// Problem families for the renewal-like recursion
///
///     x_n = Σ_{j=1}^{n-1} w_{n,j} x_{n-j} + r_n,   w_{n,j} = a_j + b_j/n + c_{n,j}
///
/// and for the perturbed renewal Volterra equation
///
///     g(t) = ∫_0^t w_{t,s} g(t-s) ds + r(t),       w_{t,s} = a(s) + b(s)/(t+d) + c_{t,s}
///
/// together with validators for their standing hypotheses. Every coefficient
/// family carries a closed-form exponential envelope so that every series and
/// upper Riemann sum used by a validator is a finite computation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "renewal/error.hpp"
#include "renewal/numeric.hpp"

namespace renewal {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class SignConstraint { nonnegative, any };

template <class T>
struct GeometricTail {
  T alpha{};
  T rho{};
  std::size_t start = 1;
};

/// Interval [lower, upper] known to contain a series value.
struct SeriesBracket {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail {

/// Σ_{n≥m} x^n for 0 ≤ x < 1.
inline double geometric_tail(double x, std::size_t m) {
  if (x >= 1.0) return kInfinity;
  return std::pow(x, static_cast<double>(m)) / (1.0 - x);
}

/// Σ_{n≥m} n x^n for 0 ≤ x < 1.
inline double geometric_tail_first_moment(double x, std::size_t m) {
  if (x >= 1.0) return kInfinity;
  const double md = static_cast<double>(m);
  return std::pow(x, md) * (md - (md - 1.0) * x) / ((1.0 - x) * (1.0 - x));
}

}  // namespace detail

/// Coefficient sequence indexed from 1: an explicit prefix followed by zeros
/// or by a geometric tail alpha·rho^n for every n ≥ start.
template <class T>
class DecaySequence {
 public:
  DecaySequence() = default;

  explicit DecaySequence(std::vector<T> prefix, std::optional<GeometricTail<T>> tail = std::nullopt,
                         SignConstraint sign = SignConstraint::any)
      : prefix_(std::move(prefix)), tail_(std::move(tail)), sign_(sign) {
    if (tail_) {
      if (tail_->start < prefix_.size() + 1)
        throw ModelError("geometric tail must start after the explicit prefix");
      if (tail_->start == 0) throw ModelError("sequence indices start at 1");
      if (!(tail_->rho > T(0))) throw ModelError("geometric tail ratio must be positive");
      if (tail_->alpha == T(0)) tail_.reset();
    }
    if (sign_ == SignConstraint::nonnegative) {
      for (const T& v : prefix_)
        if (v < T(0)) throw ModelError("nonnegative sequence has a negative prefix entry");
      if (tail_ && tail_->alpha < T(0)) throw ModelError("nonnegative sequence has a negative tail");
    }
  }

  static DecaySequence zero(SignConstraint sign = SignConstraint::any) { return DecaySequence({}, std::nullopt, sign); }

  static DecaySequence finite(std::vector<T> prefix, SignConstraint sign = SignConstraint::any) {
    return DecaySequence(std::move(prefix), std::nullopt, sign);
  }

  static DecaySequence geometric(T alpha, T rho, std::size_t start = 1, std::vector<T> prefix = {},
                                 SignConstraint sign = SignConstraint::any) {
    return DecaySequence(std::move(prefix), GeometricTail<T>{std::move(alpha), std::move(rho), start}, sign);
  }

  /// value·δ_{n,index}
  static DecaySequence delta(std::size_t index, T value = T(1), SignConstraint sign = SignConstraint::any) {
    if (index == 0) throw ArgumentError("sequence indices start at 1");
    std::vector<T> prefix(index, T(0));
    prefix.back() = std::move(value);
    return DecaySequence(std::move(prefix), std::nullopt, sign);
  }

  [[nodiscard]] const std::vector<T>& prefix() const { return prefix_; }
  [[nodiscard]] const std::optional<GeometricTail<T>>& tail() const { return tail_; }
  [[nodiscard]] SignConstraint sign() const { return sign_; }
  [[nodiscard]] bool has_tail() const { return tail_.has_value(); }

  [[nodiscard]] bool is_zero() const {
    return !tail_ && std::all_of(prefix_.begin(), prefix_.end(), [](const T& v) { return v == T(0); });
  }

  /// Largest index with a nonzero value; nullopt when the tail is infinite.
  [[nodiscard]] std::optional<std::size_t> last_nonzero() const {
    if (tail_) return std::nullopt;
    for (std::size_t i = prefix_.size(); i > 0; --i)
      if (prefix_[i - 1] != T(0)) return i;
    return std::size_t{0};
  }

  T operator()(std::size_t n) const {
    if (n == 0) throw ArgumentError("sequence indices start at 1");
    if (n <= prefix_.size()) return prefix_[n - 1];
    if (tail_ && n >= tail_->start) return tail_->alpha * power(tail_->rho, n);
    return T(0);
  }

  /// values()[k] = value(k + 1) for k < count.
  [[nodiscard]] std::vector<T> values(std::size_t count) const {
    std::vector<T> out(count, T(0));
    for (std::size_t k = 0; k < std::min(count, prefix_.size()); ++k) out[k] = prefix_[k];
    if (tail_ && tail_->start <= count) {
      T term = tail_->alpha * power(tail_->rho, tail_->start);
      for (std::size_t n = tail_->start; n <= count; ++n) {
        out[n - 1] = term;
        term *= tail_->rho;
      }
    }
    return out;
  }

  /// Rejects envelopes that do not decay (rho ≥ 1).
  void check_envelope(const char* label = "sequence") const {
    if (tail_ && !(tail_->rho < T(1)))
      throw ModelError(std::string("malformed envelope for ") + label + ": geometric ratio rho = " +
                       std::to_string(to_double(tail_->rho)) + " is not below 1");
  }

  /// The sequence q^n·value(n); geometric tails stay geometric with ratio q·rho.
  [[nodiscard]] DecaySequence tilted(const T& q) const {
    if (!(q > T(0))) throw ArgumentError("tilt factor must be positive");
    std::vector<T> prefix = prefix_;
    T qn(1);
    for (auto& v : prefix) {
      qn *= q;
      v *= qn;
    }
    std::optional<GeometricTail<T>> tail;
    if (tail_) {
      T rho = tail_->rho * q;
      if (!(rho < T(1)))
        throw ModelError("envelope violation: tilted geometric ratio q·rho = " + std::to_string(to_double(rho)) +
                         " is not below 1");
      tail = GeometricTail<T>{tail_->alpha, rho, tail_->start};
    }
    return DecaySequence(std::move(prefix), std::move(tail), sign_);
  }

  template <class U>
  [[nodiscard]] DecaySequence<U> cast() const {
    std::vector<U> prefix;
    prefix.reserve(prefix_.size());
    for (const T& v : prefix_) prefix.push_back(convert<U>(v));
    std::optional<GeometricTail<U>> tail;
    if (tail_) tail = GeometricTail<U>{convert<U>(tail_->alpha), convert<U>(tail_->rho), tail_->start};
    return DecaySequence<U>(std::move(prefix), std::move(tail), sign_);
  }

  /// Σ_n n^moment·v(n)·z^n (or with |v(n)|) in double precision, with the
  /// geometric tail summed in closed form. +inf when the tail diverges.
  [[nodiscard]] double power_sum(double z, int moment = 0, bool absolute = false) const {
    if (moment < 0 || moment > 1) throw ArgumentError("power_sum supports moments 0 and 1");
    CompensatedSum<double> acc;
    double zn = 1.0;
    for (std::size_t n = 1; n <= prefix_.size(); ++n) {
      zn *= z;
      double v = to_double(prefix_[n - 1]);
      if (absolute) v = std::fabs(v);
      acc.add((moment == 1 ? static_cast<double>(n) : 1.0) * v * zn);
    }
    if (tail_) {
      double alpha = to_double(tail_->alpha);
      if (absolute) alpha = std::fabs(alpha);
      double x = to_double(tail_->rho) * z;
      double t = moment == 1 ? detail::geometric_tail_first_moment(x, tail_->start)
                             : detail::geometric_tail(x, tail_->start);
      if (!std::isfinite(t)) return kInfinity;
      acc.add(alpha * t);
    }
    return acc.value();
  }

  /// Bracket for Σ |v(n)| z^n: the partial sum through `truncation` and the
  /// partial sum plus the exact remainder.
  [[nodiscard]] SeriesBracket abs_power_bracket(double z, std::size_t truncation) const {
    CompensatedSum<double> partial;
    CompensatedSum<double> rest;
    for (std::size_t n = 1; n <= prefix_.size(); ++n) {
      double term = std::fabs(to_double(prefix_[n - 1])) * std::pow(z, static_cast<double>(n));
      (n <= truncation ? partial : rest).add(term);
    }
    if (tail_) {
      double alpha = std::fabs(to_double(tail_->alpha));
      double x = to_double(tail_->rho) * z;
      std::size_t m = tail_->start;
      for (std::size_t n = m; n <= truncation; ++n) partial.add(alpha * std::pow(x, static_cast<double>(n)));
      rest.add(alpha * detail::geometric_tail(x, std::max(m, truncation + 1)));
    }
    return {partial.value(), partial.value() + rest.value()};
  }

  /// Σ_{n≥m} v(n) in double precision.
  [[nodiscard]] double tail_sum(std::size_t m) const {
    CompensatedSum<double> acc;
    for (std::size_t n = std::max<std::size_t>(m, 1); n <= prefix_.size(); ++n) acc.add(to_double(prefix_[n - 1]));
    if (tail_) {
      acc.add(to_double(tail_->alpha) *
              detail::geometric_tail(to_double(tail_->rho), std::max<std::size_t>(m, tail_->start)));
    }
    return acc.value();
  }

 private:
  template <class U>
  static U convert(const T& v) {
    if constexpr (std::is_same_v<T, U>) {
      return v;
    } else if constexpr (is_exact_v<T>) {
      return rational_to<U>(v);
    } else {
      return U(v);
    }
  }

  std::vector<T> prefix_;
  std::optional<GeometricTail<T>> tail_;
  SignConstraint sign_ = SignConstraint::any;
};

// ---------------------------------------------------------------------------
// Discrete perturbation kernel c_{n,j}, defined for 1 ≤ j ≤ n-1.

/// c_{n,j} = kappa·sigma^n·rho^j
template <class T>
struct SeparableKernel {
  T kappa{};
  T sigma{};
  T rho{};
};

/// Explicit values rows[n-2][j-1] = c_{n,j} for 2 ≤ n ≤ rows.size()+1, and
/// zero beyond. The envelope |c_{n,j}| ≤ envelope·sigma^n·rho^j is asserted by
/// the user for the unlisted continuation and enters validation only.
template <class T>
struct TableKernel {
  std::vector<std::vector<T>> rows;
  T envelope{};
  T sigma{};
  T rho{};
};

/// c_{n,j} = scale[n-2]·ratio^j for 2 ≤ n ≤ scale.size()+1, zero beyond.
template <class T>
struct RowScaledKernel {
  std::vector<T> scale;
  T ratio{1};
};

template <class T>
class PerturbationKernelDiscrete {
 public:
  enum class Kind { zero, separable, table, row_scaled };
  using Data = std::variant<std::monostate, SeparableKernel<T>, TableKernel<T>, RowScaledKernel<T>>;

  PerturbationKernelDiscrete() = default;

  static PerturbationKernelDiscrete zero() { return {}; }

  static PerturbationKernelDiscrete separable(T kappa, T sigma, T rho) {
    if (!(sigma > T(0)) || !(rho > T(0))) throw ModelError("separable kernel ratios must be positive");
    return PerturbationKernelDiscrete(Data(SeparableKernel<T>{std::move(kappa), std::move(sigma), std::move(rho)}));
  }

  static PerturbationKernelDiscrete table(std::vector<std::vector<T>> rows, T envelope, T sigma, T rho) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].size() != i + 1)
        throw ModelError("table kernel row for n = " + std::to_string(i + 2) + " must hold n-1 entries");
    if (envelope < T(0) || !(sigma > T(0)) || !(rho > T(0)))
      throw ModelError("table kernel envelope must be nonnegative with positive ratios");
    return PerturbationKernelDiscrete(
        Data(TableKernel<T>{std::move(rows), std::move(envelope), std::move(sigma), std::move(rho)}));
  }

  static PerturbationKernelDiscrete row_scaled(std::vector<T> scale, T ratio = T(1)) {
    if (!(ratio > T(0))) throw ModelError("row-scaled kernel ratio must be positive");
    return PerturbationKernelDiscrete(Data(RowScaledKernel<T>{std::move(scale), std::move(ratio)}));
  }

  [[nodiscard]] Kind kind() const { return static_cast<Kind>(data_.index()); }
  [[nodiscard]] bool is_zero() const { return data_.index() == 0; }
  [[nodiscard]] const Data& data() const { return data_; }

  /// Tables and row-scaled kernels list finitely many values; their
  /// continuation is asserted rather than certified.
  [[nodiscard]] bool certified() const { return kind() == Kind::zero || kind() == Kind::separable; }

  T operator()(std::size_t n, std::size_t j) const {
    if (j < 1 || j + 1 > n) throw ArgumentError("kernel index j must satisfy 1 <= j <= n-1");
    return std::visit(
        [&](const auto& k) -> T {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, std::monostate>) {
            return T(0);
          } else if constexpr (std::is_same_v<K, SeparableKernel<T>>) {
            return k.kappa * power(k.sigma, n) * power(k.rho, j);
          } else if constexpr (std::is_same_v<K, TableKernel<T>>) {
            return n - 2 < k.rows.size() ? k.rows[n - 2][j - 1] : T(0);
          } else {
            return n - 2 < k.scale.size() ? k.scale[n - 2] * power(k.ratio, j) : T(0);
          }
        },
        data_);
  }

  /// row[j-1] = c_{n,j} for 1 ≤ j ≤ n-1. Returns false (row untouched) when
  /// the whole row is zero.
  bool fill_row(std::size_t n, std::vector<T>& row) const {
    if (n < 2) return false;
    return std::visit(
        [&](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, std::monostate>) {
            return false;
          } else if constexpr (std::is_same_v<K, SeparableKernel<T>>) {
            row.resize(n - 1);
            T term = k.kappa * power(k.sigma, n);
            for (std::size_t j = 1; j < n; ++j) {
              term *= k.rho;
              row[j - 1] = term;
            }
            return true;
          } else if constexpr (std::is_same_v<K, TableKernel<T>>) {
            if (n - 2 >= k.rows.size()) return false;
            row = k.rows[n - 2];
            return true;
          } else {
            if (n - 2 >= k.scale.size()) return false;
            row.resize(n - 1);
            T term = k.scale[n - 2];
            for (std::size_t j = 1; j < n; ++j) {
              term *= k.ratio;
              row[j - 1] = term;
            }
            return true;
          }
        },
        data_);
  }

  /// Last row index n carrying explicit data (0 when none).
  [[nodiscard]] std::size_t table_extent() const {
    if (const auto* t = std::get_if<TableKernel<T>>(&data_)) return t->rows.size() + 1;
    if (const auto* r = std::get_if<RowScaledKernel<T>>(&data_)) return r->scale.size() + 1;
    return 0;
  }

  void check_envelope() const {
    if (const auto* s = std::get_if<SeparableKernel<T>>(&data_)) {
      if (!(s->sigma < T(1)) || !(s->rho < T(1)))
        throw ModelError("malformed envelope for c: separable ratios sigma, rho must lie in (0, 1)");
    }
    if (const auto* t = std::get_if<TableKernel<T>>(&data_)) {
      if (!(t->sigma < T(1)) || !(t->rho < T(1)))
        throw ModelError("malformed envelope for c: table envelope ratios must lie in (0, 1)");
    }
  }

  /// c̃_{n,j} = q^j c_{n,j}.
  [[nodiscard]] PerturbationKernelDiscrete tilted(const T& q) const {
    return std::visit(
        [&](const auto& k) -> PerturbationKernelDiscrete {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, std::monostate>) {
            return {};
          } else if constexpr (std::is_same_v<K, SeparableKernel<T>>) {
            return separable(k.kappa, k.sigma, k.rho * q);
          } else if constexpr (std::is_same_v<K, TableKernel<T>>) {
            auto rows = k.rows;
            for (auto& row : rows) {
              T qj(1);
              for (auto& v : row) {
                qj *= q;
                v *= qj;
              }
            }
            return table(std::move(rows), k.envelope, k.sigma, k.rho * q);
          } else {
            return row_scaled(k.scale, k.ratio * q);
          }
        },
        data_);
  }

  template <class U>
  [[nodiscard]] PerturbationKernelDiscrete<U> cast() const {
    auto cv = [](const T& v) -> U {
      if constexpr (std::is_same_v<T, U>) {
        return v;
      } else if constexpr (is_exact_v<T>) {
        return rational_to<U>(v);
      } else {
        return U(v);
      }
    };
    return std::visit(
        [&](const auto& k) -> PerturbationKernelDiscrete<U> {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, std::monostate>) {
            return {};
          } else if constexpr (std::is_same_v<K, SeparableKernel<T>>) {
            return PerturbationKernelDiscrete<U>::separable(cv(k.kappa), cv(k.sigma), cv(k.rho));
          } else if constexpr (std::is_same_v<K, TableKernel<T>>) {
            std::vector<std::vector<U>> rows;
            rows.reserve(k.rows.size());
            for (const auto& row : k.rows) {
              std::vector<U> r;
              r.reserve(row.size());
              for (const auto& v : row) r.push_back(cv(v));
              rows.push_back(std::move(r));
            }
            return PerturbationKernelDiscrete<U>::table(std::move(rows), cv(k.envelope), cv(k.sigma), cv(k.rho));
          } else {
            std::vector<U> scale;
            scale.reserve(k.scale.size());
            for (const auto& v : k.scale) scale.push_back(cv(v));
            return PerturbationKernelDiscrete<U>::row_scaled(std::move(scale), cv(k.ratio));
          }
        },
        data_);
  }

  /// Σ_n Σ_{j<n} |c_{n,j}| z^j in double precision; +inf when divergent.
  /// Tables add the asserted envelope continuation beyond their last row.
  [[nodiscard]] double weighted_abs_sum(double z) const {
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, std::monostate>) {
            return 0.0;
          } else if constexpr (std::is_same_v<K, SeparableKernel<T>>) {
            double sigma = to_double(k.sigma);
            double x = to_double(k.rho) * z;
            if (sigma >= 1.0 || sigma * x >= 1.0) return kInfinity;
            // Σ_{j≥1} x^j Σ_{n≥j+1} σ^n = σ/(1-σ) · σx/(1-σx)
            return std::fabs(to_double(k.kappa)) * sigma / (1.0 - sigma) * (sigma * x) / (1.0 - sigma * x);
          } else if constexpr (std::is_same_v<K, TableKernel<T>>) {
            CompensatedSum<double> acc;
            for (const auto& row : k.rows) {
              double zj = 1.0;
              for (const auto& v : row) {
                zj *= z;
                acc.add(std::fabs(to_double(v)) * zj);
              }
            }
            double tail = envelope_tail(to_double(k.envelope), to_double(k.sigma), to_double(k.rho) * z,
                                        k.rows.size() + 2);
            if (!std::isfinite(tail)) return kInfinity;
            acc.add(tail);
            return acc.value();
          } else {
            CompensatedSum<double> acc;
            double x = to_double(k.ratio) * z;
            for (std::size_t i = 0; i < k.scale.size(); ++i) {
              std::size_t n = i + 2;
              double inner = 0.0;
              double xj = 1.0;
              for (std::size_t j = 1; j < n; ++j) {
                xj *= x;
                inner += xj;
              }
              acc.add(std::fabs(to_double(k.scale[i])) * inner);
            }
            return acc.value();
          }
        },
        data_);
  }

 private:
  explicit PerturbationKernelDiscrete(Data d) : data_(std::move(d)) {}

  /// K Σ_{n≥M} σ^n Σ_{j=1}^{n-1} x^j
  static double envelope_tail(double K, double sigma, double x, std::size_t M) {
    if (K == 0.0) return 0.0;
    if (sigma >= 1.0 || sigma * x >= 1.0) return kInfinity;
    const double Md = static_cast<double>(M);
    if (std::fabs(x - 1.0) < 1e-12) {
      double s = std::pow(sigma, Md) * ((Md - 1.0) / (1.0 - sigma) + sigma / ((1.0 - sigma) * (1.0 - sigma)));
      return K * s;
    }
    double s = (x * std::pow(sigma, Md) / (1.0 - sigma) - std::pow(sigma * x, Md) / (1.0 - sigma * x)) / (1.0 - x);
    return K * s;
  }

  Data data_{};
};

enum class WeightForm { b_over_n, b_over_n_minus_j };

template <class T>
struct DiscreteProblem {
  DecaySequence<T> a;
  DecaySequence<T> b;
  PerturbationKernelDiscrete<T> c;
  DecaySequence<T> r;
  WeightForm weight_form = WeightForm::b_over_n;

  /// a_j + b_j/n + c_{n,j} (or b_j/(n-j)), without sign checks.
  T weight(std::size_t n, std::size_t j) const {
    if (j < 1 || j + 1 > n) throw ArgumentError("weight index j must satisfy 1 <= j <= n-1");
    T denom = weight_form == WeightForm::b_over_n ? T(static_cast<long>(n)) : T(static_cast<long>(n - j));
    return a(j) + b(j) / denom + c(n, j);
  }

  template <class U>
  [[nodiscard]] DiscreteProblem<U> cast() const {
    return {a.template cast<U>(), b.template cast<U>(), c.template cast<U>(), r.template cast<U>(), weight_form};
  }
};

/// w_{n,j}, rejecting j outside [1, n-1] and weights below -tol·scale.
template <class T>
T weight_discrete(const DiscreteProblem<T>& p, std::size_t n, std::size_t j, double tol = 1e-12) {
  if (j < 1 || j + 1 > n)
    throw ArgumentError("weight_discrete: j = " + std::to_string(j) + " outside [1, n-1] for n = " +
                        std::to_string(n));
  T w = p.weight(n, j);
  bool negative;
  if constexpr (is_exact_v<T>) {
    negative = w < T(0);
  } else {
    double scale = std::fabs(to_double(p.a(j))) + std::fabs(to_double(p.b(j))) + std::fabs(to_double(p.c(n, j)));
    negative = to_double(w) < -tol * std::max(scale, 1.0);
  }
  if (negative)
    throw NumericError("negative weight w_{" + std::to_string(n) + "," + std::to_string(j) +
                       "} = " + std::to_string(to_double(w)));
  return w;
}

// ---------------------------------------------------------------------------
// Continuous coefficient functions.

struct ExpTerm {
  double alpha = 0.0;
  double lambda = 0.0;
};

/// Σ alpha_i e^{-lambda_i s}. A zero rate is allowed so that non-decaying
/// kernels can be represented and flagged by the validators.
struct ExpMixture {
  std::vector<ExpTerm> terms;
};

/// Samples on a uniform grid s_k = k·step up to S0, linearly interpolated,
/// zero beyond S0. |f(s)| ≤ envelope·e^{-rate·s} is asserted for s > S0.
struct PiecewiseTable {
  double step = 1.0;
  std::vector<double> samples;
  double envelope = 0.0;
  double rate = 1.0;
};

struct MomentValue {
  double value = 0.0;
  double error_bound = 0.0;
};

class DecayFunction {
 public:
  using Data = std::variant<ExpMixture, PiecewiseTable>;

  DecayFunction() = default;

  static DecayFunction exp_mixture(std::vector<ExpTerm> terms) {
    std::vector<ExpTerm> kept;
    for (const auto& t : terms) {
      if (!std::isfinite(t.alpha) || !std::isfinite(t.lambda)) throw ModelError("non-finite mixture term");
      if (t.lambda < 0.0) throw ModelError("mixture rates must be nonnegative");
      if (t.alpha != 0.0) kept.push_back(t);
    }
    DecayFunction f;
    f.data_ = ExpMixture{std::move(kept)};
    return f;
  }

  static DecayFunction exponential(double alpha, double lambda) { return exp_mixture({{alpha, lambda}}); }

  static DecayFunction table(double step, std::vector<double> samples, double envelope, double rate) {
    if (!(step > 0.0)) throw ModelError("table step must be positive");
    if (samples.size() < 2) throw ModelError("table needs at least two samples");
    if (envelope < 0.0 || !(rate > 0.0)) throw ModelError("table envelope must be nonnegative with positive rate");
    DecayFunction f;
    PiecewiseTable t{step, std::move(samples), envelope, rate};
    f.suffix_max_.assign(t.samples.size(), 0.0);
    double running = 0.0;
    for (std::size_t k = t.samples.size(); k > 0; --k) {
      running = std::max(running, std::fabs(t.samples[k - 1]));
      f.suffix_max_[k - 1] = running;
    }
    f.data_ = std::move(t);
    return f;
  }

  [[nodiscard]] const Data& data() const { return data_; }
  [[nodiscard]] bool is_table() const { return std::holds_alternative<PiecewiseTable>(data_); }
  [[nodiscard]] bool is_zero() const {
    if (const auto* m = std::get_if<ExpMixture>(&data_)) return m->terms.empty();
    const auto& t = std::get<PiecewiseTable>(data_);
    return t.envelope == 0.0 && std::all_of(t.samples.begin(), t.samples.end(), [](double v) { return v == 0.0; });
  }

  /// Right end of the explicit table (0 for mixtures).
  [[nodiscard]] double table_end() const {
    if (const auto* t = std::get_if<PiecewiseTable>(&data_)) return t->step * static_cast<double>(t->samples.size() - 1);
    return 0.0;
  }

  double operator()(double s) const {
    if (const auto* m = std::get_if<ExpMixture>(&data_)) {
      double v = 0.0;
      for (const auto& t : m->terms) v += t.alpha * std::exp(-t.lambda * s);
      return v;
    }
    const auto& t = std::get<PiecewiseTable>(data_);
    if (s < 0.0 || s > table_end()) return 0.0;
    double u = s / t.step;
    auto k = static_cast<std::size_t>(std::floor(u));
    if (k + 1 >= t.samples.size()) return t.samples.back();
    double frac = u - static_cast<double>(k);
    return t.samples[k] * (1.0 - frac) + t.samples[k + 1] * frac;
  }

  /// Nonincreasing majorant of |f| on [s, ∞).
  [[nodiscard]] double majorant(double s) const {
    s = std::max(s, 0.0);
    if (const auto* m = std::get_if<ExpMixture>(&data_)) {
      double v = 0.0;
      for (const auto& t : m->terms) v += std::fabs(t.alpha) * std::exp(-t.lambda * s);
      return v;
    }
    const auto& t = std::get<PiecewiseTable>(data_);
    double env = t.envelope * std::exp(-t.rate * std::max(s, table_end()));
    if (s >= table_end()) return t.envelope * std::exp(-t.rate * s);
    auto k = static_cast<std::size_t>(std::floor(s / t.step));
    return std::max(suffix_max_[std::min(k, suffix_max_.size() - 1)], env);
  }

  /// Nondecreasing upper bound on ∫_0^t |f(s)| ds.
  [[nodiscard]] double abs_integral_bound(double t) const {
    t = std::max(t, 0.0);
    if (const auto* m = std::get_if<ExpMixture>(&data_)) {
      double v = 0.0;
      for (const auto& term : m->terms) {
        v += term.lambda > 0.0 ? std::fabs(term.alpha) * (-std::expm1(-term.lambda * t)) / term.lambda
                               : std::fabs(term.alpha) * t;
      }
      return v;
    }
    const auto& tab = std::get<PiecewiseTable>(data_);
    double v = 0.0;
    double end = std::min(t, table_end());
    for (std::size_t k = 0; k + 1 < tab.samples.size(); ++k) {
      double lo = static_cast<double>(k) * tab.step;
      if (lo >= end) break;
      double width = std::min(tab.step, end - lo);
      v += width * std::max(std::fabs(tab.samples[k]), std::fabs(tab.samples[k + 1]));
    }
    if (t > table_end())
      v += tab.envelope * (std::exp(-tab.rate * table_end()) - std::exp(-tab.rate * t)) / tab.rate;
    return v;
  }

  /// Upper bound on ∫_0^∞ |f|; +inf for a non-decaying mixture term.
  [[nodiscard]] double abs_integral_total() const {
    if (const auto* m = std::get_if<ExpMixture>(&data_)) {
      double v = 0.0;
      for (const auto& term : m->terms) {
        if (term.lambda <= 0.0) return kInfinity;
        v += std::fabs(term.alpha) / term.lambda;
      }
      return v;
    }
    const auto& tab = std::get<PiecewiseTable>(data_);
    return abs_integral_bound(table_end()) + tab.envelope * std::exp(-tab.rate * table_end()) / tab.rate;
  }

  /// Smallest exponential rate among nonzero terms (the asserted envelope rate
  /// for tables); +inf for the zero function.
  [[nodiscard]] double decay_rate() const {
    if (const auto* m = std::get_if<ExpMixture>(&data_)) {
      double rate = kInfinity;
      for (const auto& t : m->terms) rate = std::min(rate, t.lambda);
      return rate;
    }
    const auto& t = std::get<PiecewiseTable>(data_);
    return t.envelope == 0.0 ? kInfinity : t.rate;
  }

  /// ∫_0^∞ s^m f(s) ds. Closed form for mixtures; exact cellwise Gauss
  /// quadrature of the interpolant plus the envelope tail for tables.
  [[nodiscard]] MomentValue moment(int m) const {
    if (m < 0) throw ArgumentError("moment order must be nonnegative");
    if (const auto* mix = std::get_if<ExpMixture>(&data_)) {
      CompensatedSum<double> acc;
      for (const auto& t : mix->terms) {
        if (t.lambda <= 0.0) return {kInfinity, kInfinity};
        acc.add(t.alpha * std::tgamma(m + 1.0) / std::pow(t.lambda, m + 1));
      }
      double v = acc.value();
      return {v, 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(v)};
    }
    const auto& tab = std::get<PiecewiseTable>(data_);
    CompensatedSum<double> acc;
    for (std::size_t k = 0; k + 1 < tab.samples.size(); ++k) {
      double lo = static_cast<double>(k) * tab.step;
      acc.add(integrate_gauss8([&](double s) { return std::pow(s, m) * (*this)(s); }, lo, lo + tab.step));
    }
    return {acc.value(), tab.envelope * exp_moment_tail(m, tab.rate, table_end())};
  }

  /// (-1)^k ∫_0^∞ e^{-sx} x^k f(x) dx, i.e. the k-th derivative of the
  /// Laplace transform, with a bound on the truncated part.
  [[nodiscard]] MomentValue laplace(double s, int k = 0) const {
    if (k < 0) throw ArgumentError("derivative order must be nonnegative");
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    if (const auto* mix = std::get_if<ExpMixture>(&data_)) {
      CompensatedSum<double> acc;
      for (const auto& t : mix->terms) {
        double p = s + t.lambda;
        if (p <= 0.0)
          throw ArgumentError("Laplace argument s = " + std::to_string(s) + " lies at or beyond a mixture pole");
        acc.add(t.alpha * std::tgamma(k + 1.0) / std::pow(p, k + 1));
      }
      double v = sign * acc.value();
      return {v, 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(v)};
    }
    const auto& tab = std::get<PiecewiseTable>(data_);
    if (s + tab.rate <= 0.0) throw ArgumentError("Laplace argument outside the envelope strip");
    CompensatedSum<double> acc;
    for (std::size_t i = 0; i + 1 < tab.samples.size(); ++i) {
      double lo = static_cast<double>(i) * tab.step;
      acc.add(integrate_gauss8([&](double x) { return std::exp(-s * x) * std::pow(x, k) * (*this)(x); }, lo,
                               lo + tab.step));
    }
    return {sign * acc.value(), tab.envelope * exp_moment_tail(k, s + tab.rate, table_end())};
  }

  /// Checks f ≥ -tol on a uniform sample of [0, horizon], and that the
  /// slowest-decaying mixture component is nonnegative.
  [[nodiscard]] bool nonnegative_on(double horizon, std::size_t samples = 4001, double tol = 1e-14) const {
    if (const auto* t = std::get_if<PiecewiseTable>(&data_)) {
      return std::all_of(t->samples.begin(), t->samples.end(), [&](double v) { return v >= -tol; });
    }
    const auto& mix = std::get<ExpMixture>(data_);
    if (!mix.terms.empty()) {
      double slow = decay_rate();
      double lead = 0.0;
      for (const auto& t : mix.terms)
        if (t.lambda == slow) lead += t.alpha;
      if (lead < 0.0) return false;
    }
    for (std::size_t i = 0; i < samples; ++i) {
      double s = horizon * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(samples - 1, 1));
      if ((*this)(s) < -tol * std::max(1.0, majorant(s))) return false;
    }
    return true;
  }

  /// Σ_{n≥n0} E(nτ)·z^{(n+1)τ}, where E is the exponential envelope of |f|
  /// (the mixture itself, or the asserted table envelope). Requires n0·τ to
  /// lie beyond the table. +inf when some rate does not exceed ln z.
  [[nodiscard]] double envelope_cell_tail(double log_z, double tau, std::size_t n0) const {
    auto one = [&](double coeff, double rate) {
      double kappa = rate - log_z;
      if (coeff == 0.0) return 0.0;
      if (kappa <= 0.0) return kInfinity;
      double qv = std::exp(-kappa * tau);
      return coeff * std::exp(log_z * tau) * std::pow(qv, static_cast<double>(n0)) / (1.0 - qv);
    };
    if (const auto* mix = std::get_if<ExpMixture>(&data_)) {
      double v = 0.0;
      for (const auto& t : mix->terms) v += one(std::fabs(t.alpha), t.lambda);
      return v;
    }
    const auto& tab = std::get<PiecewiseTable>(data_);
    return one(tab.envelope, tab.rate);
  }

 private:
  Data data_{ExpMixture{}};
  std::vector<double> suffix_max_;
};

/// Continuous perturbation kernel: zero or c_{t,s} = phi(t)·psi(s).
class PerturbationKernelContinuous {
 public:
  PerturbationKernelContinuous() = default;
  static PerturbationKernelContinuous zero() { return {}; }
  static PerturbationKernelContinuous separable(DecayFunction phi, DecayFunction psi) {
    PerturbationKernelContinuous k;
    if (!phi.is_zero() && !psi.is_zero()) k.factors_ = std::make_pair(std::move(phi), std::move(psi));
    return k;
  }

  [[nodiscard]] bool is_zero() const { return !factors_.has_value(); }
  [[nodiscard]] const DecayFunction& phi() const { return factors_->first; }
  [[nodiscard]] const DecayFunction& psi() const { return factors_->second; }

  double operator()(double t, double s) const { return factors_ ? factors_->first(t) * factors_->second(s) : 0.0; }

 private:
  std::optional<std::pair<DecayFunction, DecayFunction>> factors_;
};

struct ContinuousProblem {
  DecayFunction a;
  DecayFunction b;
  PerturbationKernelContinuous c;
  DecayFunction r;
  double d = 1.0;

  double weight(double t, double s) const { return a(s) + b(s) / (t + d) + c(t, s); }
};

/// w_{t,s} for 0 ≤ s ≤ t, rejecting negative values beyond rounding.
inline double weight_continuous(const ContinuousProblem& p, double t, double s, double tol = 1e-12) {
  if (s < 0.0 || s > t * (1.0 + 1e-15) + 1e-300)
    throw ArgumentError("weight_continuous: need 0 <= s <= t (s = " + std::to_string(s) +
                        ", t = " + std::to_string(t) + ")");
  double w = p.weight(t, s);
  double scale = std::fabs(p.a(s)) + std::fabs(p.b(s)) / (t + p.d) + std::fabs(p.c(t, s));
  if (w < -tol * std::max(scale, 1.0))
    throw NumericError("negative kernel value w(" + std::to_string(t) + ", " + std::to_string(s) +
                       ") = " + std::to_string(w));
  return w;
}

// ---------------------------------------------------------------------------
// Validation.

enum class Status { pass, fail, unknown };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    case Status::unknown:
      return "unknown";
  }
  return "unknown";
}

struct ConditionResult {
  std::string id;
  Status status = Status::unknown;
  std::optional<double> witness;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionResult> entries;

  [[nodiscard]] const ConditionResult& at(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return e;
    throw ArgumentError("validation report has no condition '" + id + "'");
  }
  [[nodiscard]] bool any_fail() const {
    return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.status == Status::fail; });
  }
  [[nodiscard]] bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.status == Status::pass; });
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// Checks the recursion hypotheses: aperiodic nonnegative a, a positive term
/// in r, and a z from `z_grid` with 1 < Σ a_n z^n < ∞ at which the b, c and r
/// series also converge.
template <class T>
ValidationReport validate_discrete(const DiscreteProblem<T>& p, std::span<const double> z_grid) {
  if (z_grid.empty()) throw ArgumentError("validate_discrete: empty z grid");
  for (double z : z_grid)
    if (!(z > 0.0) || !std::isfinite(z)) throw ArgumentError("validate_discrete: z values must be positive");
  p.a.check_envelope("a");
  p.b.check_envelope("b");
  p.r.check_envelope("r");
  p.c.check_envelope();

  ValidationReport report;

  {  // (r1)
    ConditionResult e{"r1", Status::pass, std::nullopt, ""};
    bool nonnegative = std::all_of(p.a.prefix().begin(), p.a.prefix().end(), [](const T& v) { return !(v < T(0)); }) &&
                       (!p.a.has_tail() || !(p.a.tail()->alpha < T(0)));
    std::size_t g = 0;
    for (std::size_t n = 1; n <= p.a.prefix().size(); ++n)
      if (p.a.prefix()[n - 1] > T(0)) g = std::gcd(g, n);
    if (p.a.has_tail()) g = std::gcd(g, std::gcd(p.a.tail()->start, p.a.tail()->start + 1));
    if (!nonnegative) {
      e.status = Status::fail;
      e.detail = "a has negative entries";
    } else if (g == 0) {
      e.status = Status::fail;
      e.detail = "a has empty support";
    } else if (g != 1) {
      e.status = Status::fail;
      e.detail = "gcd of the support of a is " + std::to_string(g);
    } else {
      e.detail = "gcd of the support of a is 1";
    }
    report.entries.push_back(std::move(e));
  }

  {  // (r2)
    ConditionResult e{"r2", Status::pass, std::nullopt, ""};
    bool nonnegative = std::all_of(p.r.prefix().begin(), p.r.prefix().end(), [](const T& v) { return !(v < T(0)); }) &&
                       (!p.r.has_tail() || !(p.r.tail()->alpha < T(0)));
    bool positive = std::any_of(p.r.prefix().begin(), p.r.prefix().end(), [](const T& v) { return v > T(0); }) ||
                    (p.r.has_tail() && p.r.tail()->alpha > T(0));
    if (!nonnegative) {
      e.status = Status::fail;
      e.detail = "r has negative entries";
    } else if (!positive) {
      e.status = Status::fail;
      e.detail = "r has no positive term";
    } else {
      e.detail = "r is nonnegative with a positive term";
    }
    report.entries.push_back(std::move(e));
  }

  {  // (r3)
    ConditionResult e{"r3", Status::fail, std::nullopt, ""};
    std::vector<double> zs(z_grid.begin(), z_grid.end());
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
    std::string last;
    for (double z : zs) {
      double sa = p.a.power_sum(z);
      double sb = p.b.power_sum(z, 0, true);
      double sc = p.c.weighted_abs_sum(z);
      double sr = p.r.power_sum(z, 0, true);
      last = "z = " + detail::fmt_double(z) + ": sum a z^n = " + detail::fmt_double(sa) +
             ", sum |b| z^n = " + detail::fmt_double(sb) + ", sum |c| z^j = " + detail::fmt_double(sc) +
             ", sum r z^n = " + detail::fmt_double(sr);
      if (sa > 1.0 && std::isfinite(sa) && std::isfinite(sb) && std::isfinite(sc) && std::isfinite(sr)) {
        e.witness = z;
        if (p.c.certified()) {
          e.status = Status::pass;
          e.detail = last;
        } else {
          e.status = Status::unknown;
          e.detail = last + " (kernel continuation beyond its explicit rows is asserted, not certified)";
        }
        break;
      }
    }
    if (!e.witness) e.detail = "no z in the grid satisfies all series conditions; last tried " + last;
    report.entries.push_back(std::move(e));
  }
  return report;
}

/// Span-weighted and plain upper Riemann sums of a nonnegative function h.
struct UpperSum {
  double span = 0.0;
  double cell_sum = 0.0;    ///< Σ over cells [nτ, (n+1)τ] below the horizon of a bound on sup h
  double tail_bound = 0.0;  ///< closed-form bound on the same sum beyond the horizon
  std::size_t cells = 0;

  [[nodiscard]] double total() const { return cell_sum + tail_bound; }
  [[nodiscard]] double upper_integral() const { return span * total(); }
  [[nodiscard]] bool finite() const { return std::isfinite(tail_bound) && std::isfinite(cell_sum); }
};

namespace detail {

/// Upper sums for h(t) ≤ M(t)·P(t) with M nonincreasing and P nondecreasing:
/// sup over a cell [lo, hi] is bounded by M(lo)·P(hi).
template <class Majorant, class Growth>
UpperSum upper_sum_product(Majorant&& M, Growth&& P, double tau, double horizon, double tail) {
  UpperSum out;
  out.span = tau;
  out.cells = static_cast<std::size_t>(std::ceil(horizon / tau));
  CompensatedSum<double> acc;
  for (std::size_t n = 0; n < out.cells; ++n) {
    double lo = static_cast<double>(n) * tau;
    acc.add(M(lo) * P(lo + tau));
  }
  out.cell_sum = acc.value();
  out.tail_bound = tail;
  return out;
}

}  // namespace detail

/// Upper sums of r(t)·z^t with span tau (one of the two (i6) functions).
inline UpperSum upper_sum_forcing(const DecayFunction& r, double z, double tau, double horizon) {
  if (!(tau > 0.0) || !(z > 0.0)) throw ArgumentError("upper sums need tau > 0 and z > 0");
  horizon = std::max(horizon, r.table_end());
  const double log_z = std::log(z);
  std::size_t cells = static_cast<std::size_t>(std::ceil(horizon / tau));
  double tail = r.envelope_cell_tail(log_z, tau, cells);
  return detail::upper_sum_product([&](double t) { return r.majorant(t); }, [&](double t) { return std::exp(log_z * t); },
                                   tau, horizon, tail);
}

/// Upper sums of z^t ∫_0^t |c_{t,s}| ds with span tau (the other (i6) function).
inline UpperSum upper_sum_kernel(const PerturbationKernelContinuous& c, double z, double tau, double horizon) {
  if (!(tau > 0.0) || !(z > 0.0)) throw ArgumentError("upper sums need tau > 0 and z > 0");
  if (c.is_zero()) {
    UpperSum out;
    out.span = tau;
    out.cells = static_cast<std::size_t>(std::ceil(horizon / tau));
    return out;
  }
  horizon = std::max({horizon, c.phi().table_end(), c.psi().table_end()});
  const double log_z = std::log(z);
  std::size_t cells = static_cast<std::size_t>(std::ceil(horizon / tau));
  double psi_total = c.psi().abs_integral_total();
  double tail = std::isfinite(psi_total) ? psi_total * c.phi().envelope_cell_tail(log_z, tau, cells) : kInfinity;
  if (psi_total == 0.0) tail = 0.0;
  return detail::upper_sum_product([&](double t) { return c.phi().majorant(t); },
                                   [&](double t) { return std::exp(log_z * t) * c.psi().abs_integral_bound(t); }, tau,
                                   horizon, tail);
}

/// Checks the integral-equation hypotheses at a given z > 1 and span tau.
inline ValidationReport validate_continuous(const ContinuousProblem& p, double z, double tau, double horizon,
                                            double mass_tol = 1e-9) {
  if (!(z > 1.0)) throw ArgumentError("validate_continuous: z must exceed 1");
  if (!(tau > 0.0)) throw ArgumentError("validate_continuous: tau must be positive");
  if (!(horizon > 0.0)) throw ArgumentError("validate_continuous: horizon must be positive");
  using detail::fmt_double;
  const double log_z = std::log(z);
  ValidationReport report;

  {  // (i1)
    ConditionResult e{"i1", Status::pass, std::nullopt, ""};
    MomentValue mass = p.a.moment(0);
    bool nonneg = p.a.nonnegative_on(horizon);
    if (!nonneg) {
      e.status = Status::fail;
      e.detail = "a takes negative values";
    } else if (!std::isfinite(mass.value)) {
      e.status = Status::fail;
      e.detail = "a is not integrable";
    } else if (std::fabs(mass.value - 1.0) > mass_tol + mass.error_bound) {
      e.status = Status::fail;
      e.detail = "mass of a is " + fmt_double(mass.value) + ", not 1";
    } else {
      e.status = mass.error_bound > mass_tol ? Status::unknown : Status::pass;
      e.detail = "mass of a is " + fmt_double(mass.value) + " (tail bound " + fmt_double(mass.error_bound) + ")";
    }
    report.entries.push_back(std::move(e));
  }

  {  // (i2)
    ConditionResult e{"i2", Status::pass, std::nullopt, ""};
    double l1 = p.b.abs_integral_total();
    if (!std::isfinite(l1)) {
      e.status = Status::fail;
      e.detail = "b is not integrable";
    } else if (!(p.d > 0.0)) {
      e.status = Status::fail;
      e.detail = "d must be positive";
    } else {
      e.detail = "int |b| <= " + fmt_double(l1) + ", d = " + fmt_double(p.d);
    }
    report.entries.push_back(std::move(e));
  }

  {  // (i3)
    ConditionResult e{"i3", Status::pass, std::nullopt, ""};
    bool nonneg = p.r.nonnegative_on(horizon);
    double l1 = p.r.abs_integral_total();
    bool continuous = true;
    if (const auto* t = std::get_if<PiecewiseTable>(&p.r.data())) continuous = t->samples.back() == 0.0;
    if (!nonneg) {
      e.status = Status::fail;
      e.detail = "r takes negative values";
    } else if (!std::isfinite(l1)) {
      e.status = Status::fail;
      e.detail = "r is not integrable";
    } else if (!continuous) {
      e.status = Status::fail;
      e.detail = "tabulated r jumps to zero at the end of its table";
    } else {
      e.detail = "r is nonnegative, continuous, int r <= " + fmt_double(l1);
    }
    report.entries.push_back(std::move(e));
  }

  {  // (i4)
    ConditionResult e{"i4", Status::pass, std::nullopt, ""};
    if (p.c.is_zero()) {
      e.detail = "c vanishes identically";
    } else if (!(p.c.phi().decay_rate() > 0.0)) {
      e.status = Status::fail;
      e.detail = "c_{t,s} does not tend to 0 as t grows (phi has rate 0)";
    } else if (p.c.phi().is_table()) {
      e.status = Status::unknown;
      e.detail = "phi decays only through its asserted envelope";
    } else {
      e.detail = "phi decays at rate " + fmt_double(p.c.phi().decay_rate());
    }
    report.entries.push_back(std::move(e));
  }

  {  // (i5)
    ConditionResult e{"i5", Status::pass, z, ""};
    double critical = std::min(p.a.decay_rate(), p.b.decay_rate());
    if (!(log_z < critical)) {
      e.status = Status::fail;
      e.detail = "ln z = " + fmt_double(log_z) + " is not below the critical rate " + fmt_double(critical);
    } else if (p.a.is_table() || p.b.is_table()) {
      e.status = Status::unknown;
      e.detail = "ln z = " + fmt_double(log_z) + " < " + fmt_double(critical) + " relies on an asserted envelope";
    } else {
      e.detail = "ln z = " + fmt_double(log_z) + " < critical rate " + fmt_double(critical);
    }
    report.entries.push_back(std::move(e));
  }

  {  // (i6)
    ConditionResult e{"i6", Status::pass, tau, ""};
    UpperSum sr = upper_sum_forcing(p.r, z, tau, horizon);
    UpperSum sc = upper_sum_kernel(p.c, z, tau, horizon);
    std::string sums = "upper sums with span " + fmt_double(tau) + ": r-part " + fmt_double(sr.total()) +
                       ", c-part " + fmt_double(sc.total());
    bool tables = p.r.is_table() || (!p.c.is_zero() && (p.c.phi().is_table() || p.c.psi().is_table()));
    if (!sr.finite() || !sc.finite()) {
      e.status = Status::fail;
      e.detail = sums + " (divergent beyond the horizon)";
    } else if (tables) {
      e.status = Status::unknown;
      e.detail = sums + " (tail relies on an asserted envelope)";
    } else {
      e.detail = sums;
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace renewal
