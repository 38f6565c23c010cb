#pragma once

// Concave per-subchannel utilities.
//
// Every family is stored in maximization form: cost-type families (MSE,
// amplify-and-forward relaying) are negated so that all solvers maximize
// a sum of strictly increasing, strictly concave functions.  For each
// family we expose
//   eval(p)          f(p)
//   rate(p)          f'(p), the marginal utility ("increasing rate")
//   inverse_rate(mu) g(mu) = (f')^{-1}(mu)
// plus a few helpers the solvers need (slope of the rate, cluster
// coupling terms).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "waterline/error.hpp"

namespace waterline {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// w * log(b + a p)
struct LogCapacity {
  double w = 1.0;
  double a = 1.0;
  double b = 1.0;
};

/// -w / (b + a p)
struct InverseMse {
  double w = 1.0;
  double a = 1.0;
  double b = 1.0;
};

/// -w * log(1 - a b p / (1 + b p)),  0 < a < 1
struct AfRelay {
  double w = 1.0;
  double a = 0.5;
  double b = 1.0;
};

/// sum_j w_j * log(a c_j + b d_j p)
struct SumLog {
  std::vector<double> w;
  double a = 1.0;
  double b = 1.0;
  std::vector<double> c;
  std::vector<double> d;
};

/// -sum_j w_j / (a c_j + b d_j p)
struct SumInverseMse {
  std::vector<double> w;
  double a = 1.0;
  double b = 1.0;
  std::vector<double> c;
  std::vector<double> d;
};

/// w * log(1 + a p / (sigma_e2 * P_cluster + sigma_n2))
///
/// The utility depends on the total power of the cluster the subchannel
/// belongs to (imperfect channel knowledge turns that power into noise).
struct ClusterLogCapacity {
  double w = 1.0;
  double a = 1.0;
  double sigma_e2 = 0.0;
  double sigma_n2 = 1.0;
};

/// User-supplied utility.  `value` and `rate` are mandatory; `slope`
/// (derivative of the rate) falls back to a central difference and
/// `inverse` to the numeric inversion.
struct CustomObjective {
  std::string name = "custom";
  std::function<double(double p, double cluster_power)> value;
  std::function<double(double p, double cluster_power)> rate;
  std::function<double(double p, double cluster_power)> slope;
  std::function<double(double mu, double cluster_power)> inverse;
  bool cluster_aware = false;
};

using Family = std::variant<LogCapacity, InverseMse, AfRelay, SumLog, SumInverseMse,
                            ClusterLogCapacity, CustomObjective>;

namespace detail {

inline bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }
inline bool finite_pos(double x) { return std::isfinite(x) && x > 0.0; }

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidProblem, what);
}

template <class Sum>
void validate_sum_family(const Sum& s, std::string_view name) {
  const std::string n(name);
  require(!s.w.empty(), n + ": w must be non-empty");
  require(s.w.size() == s.c.size() && s.w.size() == s.d.size(),
          n + ": w, c and d must have equal length");
  require(finite_nonneg(s.a), n + ": a must be finite and >= 0");
  require(finite_pos(s.b), n + ": b must be finite and > 0");
  for (std::size_t j = 0; j < s.w.size(); ++j) {
    require(finite_pos(s.w[j]), n + ": w entries must be finite and > 0");
    require(finite_nonneg(s.c[j]), n + ": c entries must be finite and >= 0");
    require(finite_pos(s.d[j]), n + ": d entries must be finite and > 0");
  }
}

}  // namespace detail

class Objective {
 public:
  Objective() : Objective(LogCapacity{}) {}

  // NOLINTNEXTLINE(google-explicit-constructor)
  Objective(Family family) : family_(std::move(family)) { validate(); }

  static Objective log_capacity(double w, double a, double b) { return Objective(LogCapacity{w, a, b}); }
  static Objective inverse_mse(double w, double a, double b) { return Objective(InverseMse{w, a, b}); }
  static Objective af_relay(double w, double a, double b) { return Objective(AfRelay{w, a, b}); }
  static Objective cluster_log_capacity(double w, double a, double sigma_e2, double sigma_n2) {
    return Objective(ClusterLogCapacity{w, a, sigma_e2, sigma_n2});
  }

  const Family& family() const noexcept { return family_; }

  std::string_view family_name() const {
    return std::visit(
        [](const auto& f) -> std::string_view {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LogCapacity>) return "log_capacity";
          else if constexpr (std::is_same_v<T, InverseMse>) return "inverse_mse";
          else if constexpr (std::is_same_v<T, AfRelay>) return "af_relay";
          else if constexpr (std::is_same_v<T, SumLog>) return "sum_log";
          else if constexpr (std::is_same_v<T, SumInverseMse>) return "sum_inverse_mse";
          else if constexpr (std::is_same_v<T, ClusterLogCapacity>) return "cluster_log_capacity";
          else return f.name;
        },
        family_);
  }

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(family_);
  }

  bool is_cluster_aware() const {
    if (is<ClusterLogCapacity>()) return true;
    if (const auto* c = std::get_if<CustomObjective>(&family_)) return c->cluster_aware;
    return false;
  }

  /// True when g = (f')^{-1} is available in closed form and extends to a
  /// signed value below the domain edge.
  bool has_closed_form_inverse() const {
    if (is<LogCapacity>() || is<InverseMse>() || is<AfRelay>() || is<ClusterLogCapacity>()) return true;
    if (const auto* c = std::get_if<CustomObjective>(&family_)) return static_cast<bool>(c->inverse);
    return false;
  }

  double eval(double p, double cluster_power = 0.0) const {
    check_power(p);
    return std::visit([&](const auto& f) { return eval_impl(f, p, cluster_power); }, family_);
  }

  double rate(double p, double cluster_power = 0.0) const {
    check_power(p);
    return std::visit([&](const auto& f) { return rate_impl(f, p, cluster_power); }, family_);
  }

  /// Derivative of the rate with respect to p (strictly negative).
  double rate_slope(double p, double cluster_power = 0.0) const {
    return std::visit([&](const auto& f) { return slope_impl(f, p, cluster_power); }, family_);
  }

  /// rate(0); +inf when p = 0 sits on the domain edge (b = 0).
  double rate_at_zero(double cluster_power = 0.0) const {
    return std::visit([&](const auto& f) { return rate_impl(f, 0.0, cluster_power); }, family_);
  }

  /// Signed inverse of the rate.
  ///
  /// For mu <= rate(0) the result is the unique p >= 0 with rate(p) = mu.
  /// For mu > rate(0) closed-form families return their analytic
  /// continuation (a negative power), numeric families return the tangent
  /// continuation (rate(0) - mu) / |rate'(0)|.  Either way the value is
  /// negative exactly when the subchannel should be switched off, and it
  /// is strictly decreasing in mu.
  double inverse_rate(double mu, double cluster_power = 0.0) const {
    if (!(mu > 0.0)) throw Error(ErrorKind::Domain, "inverse_rate requires mu > 0");
    return std::visit([&](const auto& f) { return inverse_impl(f, mu, cluster_power); }, family_);
  }

  /// Generic inversion by safeguarded Newton/bisection on the rate,
  /// independent of any closed form.
  double numeric_inverse_rate(double mu, double cluster_power = 0.0) const {
    if (!(mu > 0.0)) throw Error(ErrorKind::Domain, "inverse_rate requires mu > 0");
    const double r0 = rate_at_zero(cluster_power);
    if (mu >= r0) {
      const double s0 = rate_slope(0.0, cluster_power);
      return (r0 - mu) / std::abs(s0);
    }
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (rate(hi, cluster_power) >= mu) {
      lo = hi;
      hi *= 2.0;
      if (++doublings > 60) {
        throw Error(ErrorKind::InversionFailure, "rate bracket exceeded 2^60 for " +
                                                     std::string(family_name()));
      }
    }
    double p = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double r = rate(p, cluster_power);
      if (r > mu) lo = p;
      else if (r < mu) hi = p;
      else return p;
      if (hi - lo <= 1e-12 * (1.0 + p)) break;
      const double s = rate_slope(p, cluster_power);
      double next = p - (r - mu) / s;
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
      p = next;
    }
    return p;
  }

  /// f(g(mu)) continued below the domain edge so that it stays finite and
  /// strictly decreasing in mu.  Used when solving for a water level that
  /// reaches a target utility.
  double utility_at_level(double mu, double cluster_power = 0.0) const {
    const double p = inverse_rate(mu, cluster_power);
    if (p >= 0.0) {
      const double r0 = rate_at_zero(cluster_power);
      if (p > 0.0 || std::isfinite(r0)) return eval(p, cluster_power);
    }
    return std::visit([&](const auto& f) { return continued_utility(f, mu, p, cluster_power); },
                      family_);
  }

  /// Partial derivative of f with respect to the cluster power.
  double cluster_partial(double p, double cluster_power) const {
    if (const auto* c = std::get_if<ClusterLogCapacity>(&family_)) {
      const double s = c->sigma_e2 * cluster_power + c->sigma_n2;
      return -c->sigma_e2 * c->w * c->a * p / (s * (s + c->a * p));
    }
    if (const auto* c = std::get_if<CustomObjective>(&family_)) {
      if (!c->cluster_aware) return 0.0;
      const double h = 1e-6 * (1.0 + cluster_power);
      if (cluster_power >= h) {
        return (c->value(p, cluster_power + h) - c->value(p, cluster_power - h)) / (2.0 * h);
      }
      return (c->value(p, cluster_power + h) - c->value(p, cluster_power)) / h;
    }
    return 0.0;
  }

  /// Freezes the cluster power, turning a cluster-aware utility into an
  /// ordinary one.  Non-cluster families are returned unchanged.
  Objective at_cluster_power(double cluster_power) const {
    if (const auto* c = std::get_if<ClusterLogCapacity>(&family_)) {
      const double s = c->sigma_e2 * cluster_power + c->sigma_n2;
      return Objective(LogCapacity{c->w, c->a / s, 1.0});
    }
    if (const auto* c = std::get_if<CustomObjective>(&family_); c && c->cluster_aware) {
      CustomObjective bound;
      bound.name = c->name;
      auto base = std::make_shared<CustomObjective>(*c);
      bound.value = [base, cluster_power](double p, double) { return base->value(p, cluster_power); };
      bound.rate = [base, cluster_power](double p, double) { return base->rate(p, cluster_power); };
      if (base->slope) {
        bound.slope = [base, cluster_power](double p, double) { return base->slope(p, cluster_power); };
      }
      if (base->inverse) {
        bound.inverse = [base, cluster_power](double mu, double) { return base->inverse(mu, cluster_power); };
      }
      return Objective(std::move(bound));
    }
    return *this;
  }

 private:
  Family family_;

  static void check_power(double p) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::Domain, "power must be finite and >= 0");
    }
  }

  static void check_positive_arg(double x) {
    if (!(x > 0.0)) throw Error(ErrorKind::Domain, "power outside admissible domain");
  }

  void validate() const {
    using detail::finite_nonneg;
    using detail::finite_pos;
    using detail::require;
    std::visit(
        [](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LogCapacity> || std::is_same_v<T, InverseMse>) {
            require(finite_pos(f.w), "w must be finite and > 0");
            require(finite_pos(f.a), "a must be finite and > 0");
            require(finite_nonneg(f.b), "b must be finite and >= 0");
          } else if constexpr (std::is_same_v<T, AfRelay>) {
            require(finite_pos(f.w), "af_relay: w must be finite and > 0");
            require(std::isfinite(f.a) && f.a > 0.0 && f.a < 1.0, "af_relay: a must lie in (0, 1)");
            require(finite_pos(f.b), "af_relay: b must be finite and > 0");
          } else if constexpr (std::is_same_v<T, SumLog>) {
            detail::validate_sum_family(f, "sum_log");
          } else if constexpr (std::is_same_v<T, SumInverseMse>) {
            detail::validate_sum_family(f, "sum_inverse_mse");
          } else if constexpr (std::is_same_v<T, ClusterLogCapacity>) {
            require(finite_pos(f.w), "cluster_log_capacity: w must be finite and > 0");
            require(finite_pos(f.a), "cluster_log_capacity: a must be finite and > 0");
            require(finite_nonneg(f.sigma_e2), "cluster_log_capacity: sigma_e2 must be finite and >= 0");
            require(finite_pos(f.sigma_n2), "cluster_log_capacity: sigma_n2 must be finite and > 0");
          } else {
            require(static_cast<bool>(f.value) && static_cast<bool>(f.rate),
                    "custom objective needs value and rate callables");
          }
        },
        family_);
  }

  // --- eval -------------------------------------------------------------

  static double eval_impl(const LogCapacity& f, double p, double) {
    const double x = f.b + f.a * p;
    check_positive_arg(x);
    return f.w * std::log(x);
  }
  static double eval_impl(const InverseMse& f, double p, double) {
    const double x = f.b + f.a * p;
    check_positive_arg(x);
    return -f.w / x;
  }
  static double eval_impl(const AfRelay& f, double p, double) {
    return f.w * (std::log1p(f.b * p) - std::log1p((1.0 - f.a) * f.b * p));
  }
  static double eval_impl(const SumLog& f, double p, double) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.w.size(); ++j) {
      const double x = f.a * f.c[j] + f.b * f.d[j] * p;
      check_positive_arg(x);
      s += f.w[j] * std::log(x);
    }
    return s;
  }
  static double eval_impl(const SumInverseMse& f, double p, double) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.w.size(); ++j) {
      const double x = f.a * f.c[j] + f.b * f.d[j] * p;
      check_positive_arg(x);
      s -= f.w[j] / x;
    }
    return s;
  }
  static double eval_impl(const ClusterLogCapacity& f, double p, double cp) {
    const double s = f.sigma_e2 * cp + f.sigma_n2;
    return f.w * std::log1p(f.a * p / s);
  }
  static double eval_impl(const CustomObjective& f, double p, double cp) { return f.value(p, cp); }

  // --- rate -------------------------------------------------------------

  static double rate_impl(const LogCapacity& f, double p, double) {
    const double x = f.b + f.a * p;
    return x > 0.0 ? f.w * f.a / x : kInf;
  }
  static double rate_impl(const InverseMse& f, double p, double) {
    const double x = f.b + f.a * p;
    return x > 0.0 ? f.w * f.a / (x * x) : kInf;
  }
  static double rate_impl(const AfRelay& f, double p, double) {
    const double u = 1.0 + f.b * p;
    const double v = 1.0 + (1.0 - f.a) * f.b * p;
    return f.w * f.a * f.b / (u * v);
  }
  static double rate_impl(const SumLog& f, double p, double) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.w.size(); ++j) {
      const double x = f.a * f.c[j] + f.b * f.d[j] * p;
      if (!(x > 0.0)) return kInf;
      s += f.w[j] * f.b * f.d[j] / x;
    }
    return s;
  }
  static double rate_impl(const SumInverseMse& f, double p, double) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.w.size(); ++j) {
      const double x = f.a * f.c[j] + f.b * f.d[j] * p;
      if (!(x > 0.0)) return kInf;
      s += f.w[j] * f.b * f.d[j] / (x * x);
    }
    return s;
  }
  static double rate_impl(const ClusterLogCapacity& f, double p, double cp) {
    const double s = f.sigma_e2 * cp + f.sigma_n2;
    return f.w * f.a / (s + f.a * p);
  }
  static double rate_impl(const CustomObjective& f, double p, double cp) { return f.rate(p, cp); }

  // --- slope ------------------------------------------------------------

  static double slope_impl(const LogCapacity& f, double p, double) {
    const double x = f.b + f.a * p;
    return x > 0.0 ? -f.w * f.a * f.a / (x * x) : -kInf;
  }
  static double slope_impl(const InverseMse& f, double p, double) {
    const double x = f.b + f.a * p;
    return x > 0.0 ? -2.0 * f.w * f.a * f.a / (x * x * x) : -kInf;
  }
  static double slope_impl(const AfRelay& f, double p, double) {
    const double c = 1.0 - f.a;
    const double u = 1.0 + f.b * p;
    const double v = 1.0 + c * f.b * p;
    return -f.w * f.a * f.b * (f.b * v + c * f.b * u) / (u * u * v * v);
  }
  static double slope_impl(const SumLog& f, double p, double) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.w.size(); ++j) {
      const double x = f.a * f.c[j] + f.b * f.d[j] * p;
      if (!(x > 0.0)) return -kInf;
      const double bd = f.b * f.d[j];
      s -= f.w[j] * bd * bd / (x * x);
    }
    return s;
  }
  static double slope_impl(const SumInverseMse& f, double p, double) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.w.size(); ++j) {
      const double x = f.a * f.c[j] + f.b * f.d[j] * p;
      if (!(x > 0.0)) return -kInf;
      const double bd = f.b * f.d[j];
      s -= 2.0 * f.w[j] * bd * bd / (x * x * x);
    }
    return s;
  }
  static double slope_impl(const ClusterLogCapacity& f, double p, double cp) {
    const double s = f.sigma_e2 * cp + f.sigma_n2;
    const double x = s + f.a * p;
    return -f.w * f.a * f.a / (x * x);
  }
  static double slope_impl(const CustomObjective& f, double p, double cp) {
    if (f.slope) return f.slope(p, cp);
    const double h = 1e-6 * (1.0 + p);
    if (p >= h) return (f.rate(p + h, cp) - f.rate(p - h, cp)) / (2.0 * h);
    return (f.rate(p + h, cp) - f.rate(p, cp)) / h;
  }

  // --- inverse ----------------------------------------------------------

  double inverse_impl(const LogCapacity& f, double mu, double) const { return f.w / mu - f.b / f.a; }
  double inverse_impl(const InverseMse& f, double mu, double) const {
    return std::sqrt(f.w / (f.a * mu)) - f.b / f.a;
  }
  double inverse_impl(const AfRelay& f, double mu, double) const {
    // Larger root of (1 + x)(1 + (1-a) x) = w a b / mu with x = b p, in the
    // cancellation-free form.
    const double r = f.w * f.a * f.b / mu;
    const double x = 2.0 * (r - 1.0) / ((2.0 - f.a) + std::sqrt(f.a * f.a + 4.0 * (1.0 - f.a) * r));
    return x / f.b;
  }
  double inverse_impl(const SumLog&, double mu, double cp) const { return numeric_inverse_rate(mu, cp); }
  double inverse_impl(const SumInverseMse&, double mu, double cp) const { return numeric_inverse_rate(mu, cp); }
  double inverse_impl(const ClusterLogCapacity& f, double mu, double cp) const {
    const double s = f.sigma_e2 * cp + f.sigma_n2;
    return f.w / mu - s / f.a;
  }
  double inverse_impl(const CustomObjective& f, double mu, double cp) const {
    if (f.inverse) return f.inverse(mu, cp);
    return numeric_inverse_rate(mu, cp);
  }

  // --- utility continuation below p = 0 ----------------------------------

  double continued_utility(const LogCapacity& f, double mu, double, double) const {
    return f.w * std::log(f.a * f.w / mu);
  }
  double continued_utility(const InverseMse& f, double mu, double, double) const {
    return -std::sqrt(f.w * mu / f.a);
  }
  double continued_utility(const AfRelay& f, double, double p, double) const {
    const double x = f.b * p;
    return f.w * (std::log1p(x) - std::log1p((1.0 - f.a) * x));
  }
  double continued_utility(const ClusterLogCapacity& f, double mu, double, double cp) const {
    const double s = f.sigma_e2 * cp + f.sigma_n2;
    return f.w * std::log(f.a * f.w / (s * mu));
  }
  template <class F>
  double continued_utility(const F&, double, double p, double cp) const {
    return eval(0.0, cp) + rate_at_zero(cp) * p;
  }
};

}  // namespace waterline
