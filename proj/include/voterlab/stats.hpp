#pragma once

#include <functional>
#include <span>
#include <vector>

namespace voterlab {

struct Estimate {
    double value = 0.0;
    double se = 0.0;  // standard error
};

/// Sample mean with its standard error (n - 1 denominator).
Estimate mean_estimate(std::span<const double> xs);

double sample_variance(std::span<const double> xs);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Upper-tail p-value of a chi-square statistic.
double chi_square_pvalue(double statistic, double degrees_of_freedom);

double median(std::vector<double> xs);

}  // namespace voterlab
