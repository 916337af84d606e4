#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace polaris {

// Lower and upper regularized incomplete gamma functions P(a,x), Q(a,x).
// Series expansion for x < a+1, Lentz continued fraction otherwise.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Survival function of the chi-square distribution.
double chi_square_pvalue(double chi2, int dof);

struct ChiSquare2x2 {
  std::array<std::array<double, 2>, 2> expected{};
  double chi2 = 0.0;
  double p_value = 1.0;
  double min_expected = 0.0;
  bool low_expected_warning = false;  // some expected cell < 5
};

// Pearson chi-square test of independence for a 2x2 table, 1 dof.
ChiSquare2x2 chi_square_independence_2x2(const std::array<std::array<std::uint64_t, 2>, 2>& observed);

// y-th percentile (0..100) of an ascending-sorted sample, linearly
// interpolated between closest ranks. y=0 is the minimum, y=100 the maximum.
double percentile_interpolated(std::span<const double> sorted_values, double y);

// Midrank percentile of each element within the sample: ties share their
// average rank; results lie in (0,100). Invariant under strictly monotone
// transformations of the values.
std::vector<double> midrank_percentiles(std::span<const double> values);

// Fraction of sample values <= x, as a percentage. Used for inclusive
// top-percentile cutoffs; with all values equal everything sits at 100.
std::vector<double> cumulative_percentiles(std::span<const double> values);

double mean_of(std::span<const double> values);
double sample_stddev(std::span<const double> values);

}  // namespace polaris
