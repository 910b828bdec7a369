#include "spinring/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spinring/errors.hpp"

namespace spinring::stats {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, const char* who) {
  if (x.size() != y.size()) {
    std::ostringstream msg;
    msg << who << ": length mismatch (" << x.size() << " vs " << y.size() << ")";
    throw InvalidArgument(msg.str());
  }
  if (x.size() < 3) throw InvalidArgument(std::string(who) + ": need at least 3 samples");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw InvalidArgument(std::string(who) + ": non-finite sample");
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

std::string to_string(Measure m) { return m == Measure::kendall ? "kendall" : "pearson"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::h0_not_rejected: return "H0_not_rejected";
    case Verdict::h1_plus: return "H1_plus";
    case Verdict::h1_minus: return "H1_minus";
    case Verdict::insufficient: return "insufficient";
  }
  return "insufficient";
}

Measure parse_measure(std::string_view s) {
  if (s == "kendall") return Measure::kendall;
  if (s == "pearson") return Measure::pearson;
  throw InvalidArgument("unknown correlation measure: " + std::string(s));
}

Verdict parse_verdict(std::string_view s) {
  if (s == "H0_not_rejected") return Verdict::h0_not_rejected;
  if (s == "H1_plus") return Verdict::h1_plus;
  if (s == "H1_minus") return Verdict::h1_minus;
  if (s == "insufficient") return Verdict::insufficient;
  throw InvalidArgument("unknown verdict: " + std::string(s));
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "kendall_tau");
  const std::size_t n = x.size();
  long long score = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) score += sign(x[i] - x[j]) * sign(y[i] - y[j]);
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(score) / pairs;
}

double kendall_z(double tau, std::size_t n) {
  if (n < 3) throw InvalidArgument("kendall_z: need n >= 3");
  const double nd = static_cast<double>(n);
  const double sigma = std::sqrt(2.0 * (2.0 * nd + 5.0) / (9.0 * nd * (nd - 1.0)));
  return tau / sigma;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "pearson_r");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("pearson_r: zero variance sample");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double pearson_t(double r, std::size_t n) {
  if (n < 3) throw InvalidArgument("pearson_t: need n >= 3");
  if (!(std::abs(r) <= 1.0)) throw InvalidArgument("pearson_t: |r| must be <= 1");
  if (std::abs(r) == 1.0) return std::copysign(std::numeric_limits<double>::infinity(), r);
  return r / std::sqrt((1.0 - r * r) / static_cast<double>(n - 2));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iter = 500;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double md = m;
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("incomplete_beta: a, b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace {

// P(T > |t|) for Student's t with `dof` degrees of freedom.
double student_upper_tail(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  return 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

}  // namespace

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("student_t_cdf: dof must be > 0");
  const double tail = student_upper_tail(t, dof);
  return t < 0.0 ? tail : 1.0 - tail;
}

double p_value_normal(double z, int sign_of_stat) {
  if (sign_of_stat == 0) return 0.5;
  // Phi(z) and 1 - Phi(z) through erfc so both tails keep full precision.
  return sign_of_stat < 0 ? 0.5 * std::erfc(-z / std::sqrt(2.0)) : 0.5 * std::erfc(z / std::sqrt(2.0));
}

double p_value_student(double t, std::size_t n, int sign_of_stat) {
  if (n < 3) throw InvalidArgument("p_value_student: need n >= 3");
  if (sign_of_stat == 0) return 0.5;
  const double dof = static_cast<double>(n - 2);
  const double tail = student_upper_tail(t, dof);
  if (sign_of_stat < 0) return t < 0.0 ? tail : 1.0 - tail;  // S(t)
  return t > 0.0 ? tail : 1.0 - tail;                        // 1 - S(t)
}

CorrelationVerdict hypothesis_verdict(Measure measure, double statistic, std::size_t n, double alpha) {
  if (n < 3) throw InvalidArgument("hypothesis_verdict: need n >= 3");
  if (!(statistic >= -1.0 && statistic <= 1.0))
    throw InvalidArgument("hypothesis_verdict: statistic must lie in [-1, 1]");
  CorrelationVerdict v;
  v.measure = measure;
  v.statistic = statistic;
  v.alpha = alpha;
  v.n = n;
  const int s = sign(statistic);
  if (measure == Measure::kendall) {
    v.score = kendall_z(statistic, n);
    v.p_value = p_value_normal(v.score, s);
  } else {
    v.score = pearson_t(statistic, n);
    v.p_value = p_value_student(v.score, n, s);
  }
  if (v.p_value < alpha && s > 0) {
    v.verdict = Verdict::h1_plus;
  } else if (v.p_value < alpha && s < 0) {
    v.verdict = Verdict::h1_minus;
  } else {
    v.verdict = Verdict::h0_not_rejected;
  }
  return v;
}

CorrelationVerdict correlation_test(Measure measure, std::span<const double> x, std::span<const double> y,
                                    double alpha) {
  const double stat = measure == Measure::kendall ? kendall_tau(x, y) : pearson_r(x, y);
  return hypothesis_verdict(measure, stat, x.size(), alpha);
}

}  // namespace spinring::stats
