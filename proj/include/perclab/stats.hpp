#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace perclab {

enum class Method { MonteCarlo, ExactEnumeration };
std::string method_name(Method m);

struct McEstimate {
    double mean = 0;
    double ci_halfwidth = 0;
    double ci_lo = 0;
    double ci_hi = 0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    int patch_radius = 0;
    Method method = Method::MonteCarlo;
};

// Two-sided standard normal quantile for the given confidence (0.95 -> 1.95996...).
double z_value(double confidence);

// Wilson score interval for `successes` out of `trials`; mean is the raw frequency and the
// half-width is half the interval length.
McEstimate proportion_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed, int patch_radius,
                               double confidence = 0.95);

// Normal-approximation interval for a sample mean given the sum and sum of squares.
McEstimate mean_estimate(double sum, double sum_sq, std::uint64_t n, std::uint64_t seed, int patch_radius,
                         double confidence = 0.95);

McEstimate exact_value(double value, int patch_radius);

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

// Upper-tail p-value of a chi-squared statistic.
double chi_squared_pvalue(double statistic, double dof);

// Pearson chi-squared goodness of fit of counts against probabilities; cells with expected count
// below min_expected are pooled. Returns the p-value.
double chi_squared_gof(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs,
                       double min_expected = 5.0);

}  // namespace perclab
