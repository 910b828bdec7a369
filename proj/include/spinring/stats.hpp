#pragma once

// Correlation statistics and the one-sided, sign-selected significance test
// used to classify error-vs-robustness trends.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace spinring::stats {

enum class Measure { kendall, pearson };

enum class Verdict {
  h0_not_rejected,
  h1_plus,   // significant positive trend
  h1_minus,  // significant negative trend
  insufficient,
};

std::string to_string(Measure m);
std::string to_string(Verdict v);
Measure parse_measure(std::string_view s);
Verdict parse_verdict(std::string_view s);

struct CorrelationVerdict {
  Measure measure = Measure::kendall;
  double statistic = 0.0;  // tau or r
  double score = 0.0;      // Z_tau or t_r
  double p_value = 0.5;
  double alpha = 0.01;
  Verdict verdict = Verdict::h0_not_rejected;
  std::size_t n = 0;
};

/// Kendall tau-a by O(n^2) pair enumeration; tied pairs count as neither.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// tau / sqrt(2(2n+5) / (9n(n-1))).
double kendall_z(double tau, std::size_t n);

/// Product-moment correlation. Throws DegenerateError on zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// r / sqrt((1 - r^2) / (n - 2)); +-infinity when |r| = 1.
double pearson_t(double r, std::size_t n);

double normal_cdf(double z);
/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);

/// Phi(z) for a negative statistic, 1 - Phi(z) for a positive one, 0.5 at 0.
double p_value_normal(double z, int sign_of_stat);
/// Same tail selection with the Student t CDF, nu = n - 2.
double p_value_student(double t, std::size_t n, int sign_of_stat);

/// Score, p-value and verdict for an already-computed statistic.
CorrelationVerdict hypothesis_verdict(Measure measure, double statistic, std::size_t n, double alpha);

/// Convenience: statistic from the raw samples, then hypothesis_verdict.
CorrelationVerdict correlation_test(Measure measure, std::span<const double> x, std::span<const double> y,
                                    double alpha);

}  // namespace spinring::stats
