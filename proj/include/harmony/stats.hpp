#pragma once

#include <span>

namespace harmony {

/// I_x(a, b) by Lentz's continued fraction, |error| < 1e-14 for moderate a, b.
double regularized_incomplete_beta(double a, double b, double x);

/// Student-t CDF with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Inverse of student_t_cdf for p in (0, 1).
double student_t_quantile(double p, double df);

struct TTestResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double sd_a = 0.0;
  double sd_b = 0.0;
  double mean_diff = 0.0;  // mean(a - b)
  double sd_diff = 0.0;
  double ci_low = 0.0;  // 95% interval for mean_diff
  double ci_high = 0.0;
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Paired two-sided t-test on d = a - b with sample standard deviations.
/// All-zero differences give t = 0, p = 1.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> v);

}  // namespace harmony
