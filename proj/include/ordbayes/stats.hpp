#pragma once

#include <span>
#include <vector>

namespace ordbayes {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series expansion for x < a + 1, Lentz continued fraction otherwise;
/// relative error well below 1e-12 over the range used here.
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-square distribution: Pr(X > x) with df degrees of
/// freedom. Throws ConfigError for df <= 0 or x < 0.
double chi_square_survival(double x, double df);

/// 1 / (1 + exp(-x)), evaluated without overflow in either tail.
double logistic(double x);

double mean(std::span<const double> v);

/// Unbiased sample variance (n - 1 denominator); 0 for fewer than 2 values.
double sample_variance(std::span<const double> v);

/// Pearson correlation; throws ConfigError on length mismatch or n < 2.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation quantile (R type 7) of an unsorted sample.
/// p in [0, 1]; throws ConfigError on empty input.
double quantile(std::vector<double> v, double p);

} // namespace ordbayes
