#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "fjgame/error.hpp"

namespace fjgame::stats {

inline constexpr double kSeriesTol = 1e-12;
inline constexpr int kMaxTerms = 10000;

namespace detail {

inline constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), modified Lentz. Converges fast for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kSeriesTol * 1e-3) return h;
  }
  throw Error(ErrorKind::NoConvergence, "incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  fjgame::detail::require(a > 0.0 && b > 0.0, ErrorKind::InvalidArgument, "incomplete beta needs a, b > 0");
  fjgame::detail::require(x >= 0.0 && x <= 1.0, ErrorKind::InvalidArgument, "incomplete beta needs x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double incomplete_gamma_upper(double a, double x) {
  fjgame::detail::require(a > 0.0 && x >= 0.0, ErrorKind::InvalidArgument, "incomplete gamma needs a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  const double log_front = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x).
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 1; n <= kMaxTerms; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kSeriesTol * 1e-3) return 1.0 - sum * std::exp(log_front);
    }
    throw Error(ErrorKind::NoConvergence, "incomplete gamma series did not converge");
  }
  // Continued fraction for Q(a, x), modified Lentz.
  double b = x + 1.0 - a;
  double c = 1.0 / detail::kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < detail::kTiny) d = detail::kTiny;
    c = b + an / c;
    if (std::abs(c) < detail::kTiny) c = detail::kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kSeriesTol * 1e-3) return std::exp(log_front) * h;
  }
  throw Error(ErrorKind::NoConvergence, "incomplete gamma continued fraction did not converge");
}

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
  fjgame::detail::require(dof > 0.0, ErrorKind::InvalidArgument, "degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

/// P(X >= x) for a chi-square variable with `dof` degrees of freedom.
inline double chi_square_survival(double x, double dof) {
  fjgame::detail::require(dof > 0.0, ErrorKind::InvalidArgument, "degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return incomplete_gamma_upper(0.5 * dof, 0.5 * x);
}

enum class SampleStatus { Ok, ZeroVariance, DegenerateSample };

struct TTestResult {
  double t = 0.0;
  double p_value = 1.0;
  int dof = 0;
  double mean = 0.0;
  double sd = 0.0;
  SampleStatus status = SampleStatus::Ok;
};

/// Two-sided one-sample t test of H0: mean = mu0.
///
/// A sample whose sd is below 1e-12 max(1, |mean|) is treated as constant:
/// p = 0 (t = +-inf) if its mean differs from mu0 by more than that scale,
/// p = 1 (t = 0) otherwise.
inline TTestResult t_test_one_sample(std::span<const double> data, double mu0) {
  fjgame::detail::require(data.size() >= 2, ErrorKind::EmptySample, "t test needs at least two observations");
  const double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : data) ss += (v - mean) * (v - mean);

  TTestResult r;
  r.dof = static_cast<int>(data.size()) - 1;
  r.mean = mean;
  r.sd = std::sqrt(ss / (n - 1.0));
  const double scale = 1e-12 * std::max({1.0, std::abs(mean), std::abs(mu0)});
  if (r.sd <= scale) {
    if (std::abs(mean - mu0) <= scale) {
      r.status = SampleStatus::DegenerateSample;
      r.t = 0.0;
      r.p_value = 1.0;
    } else {
      r.status = SampleStatus::ZeroVariance;
      r.t = std::copysign(std::numeric_limits<double>::infinity(), mean - mu0);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t = (mean - mu0) / (r.sd / std::sqrt(n));
  r.p_value = std::clamp(student_t_two_sided_p(r.t, r.dof), 0.0, 1.0);
  return r;
}

struct ChiSquareResult {
  double chi2 = 0.0;
  double p_value = 1.0;
  long positive = 0;
  long negative = 0;
};

/// Goodness-of-fit of sign counts (zero counts as +) against P(+) = p0, one dof.
inline ChiSquareResult chi_square_sign_test(std::span<const double> data, double p0) {
  fjgame::detail::require(!data.empty(), ErrorKind::EmptySample, "chi-square test needs at least one observation");
  fjgame::detail::require(p0 > 0.0 && p0 < 1.0, ErrorKind::InvalidArgument, "p0 must lie in (0,1)");
  ChiSquareResult r;
  for (double v : data) (v >= 0.0 ? r.positive : r.negative)++;
  const double n = static_cast<double>(data.size());
  const double e_pos = n * p0;
  const double e_neg = n * (1.0 - p0);
  const double d_pos = static_cast<double>(r.positive) - e_pos;
  const double d_neg = static_cast<double>(r.negative) - e_neg;
  r.chi2 = d_pos * d_pos / e_pos + d_neg * d_neg / e_neg;
  r.p_value = chi_square_survival(r.chi2, 1.0);
  return r;
}

}  // namespace fjgame::stats
